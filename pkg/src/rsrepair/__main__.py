import sys

from rsrepair.cli import main

sys.exit(main())
