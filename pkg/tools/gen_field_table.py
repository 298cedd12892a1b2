"""Regenerate src/rsrepair/field_table.json.

For every supported (q, t) the modulus is the smallest monic polynomial of
degree t over GF(q), ordered by integer code, that is irreducible and
primitive (so the residue of x generates F* and log tables build by shifting).
"""

import json
import sys
from itertools import product
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rsrepair.fields import (  # noqa: E402
    MAX_FIELD_BITS,
    FieldTower,
    _prime_factors,
    is_irreducible,
    modulus_to_hex,
)


def smallest_primitive(q: int, t: int) -> tuple[int, ...]:
    for lower in product(range(q), repeat=t):
        modulus = tuple(lower[::-1]) + (1,)
        if not is_irreducible(q, modulus):
            continue
        tower = FieldTower(q, t, modulus, verify=False, tables=False)
        x = tower._mul_x(1)
        if x == 0:
            continue
        if all(tower._pow_slow(x, tower.order // p) != 1 for p in _prime_factors(tower.order)):
            return modulus
    raise RuntimeError(f"no primitive polynomial for q={q}, t={t}")


def main() -> None:
    records = []
    for q in (2, 4, 16):
        bits = q.bit_length() - 1
        for t in range(1, MAX_FIELD_BITS // bits + 1):
            modulus = smallest_primitive(q, t)
            records.append({"q": q, "t": t, "modulus": modulus_to_hex(q, modulus)})
    doc = {
        "description": (
            "One record per (q, t): the monic modulus of GF(q^t) over GF(q) as the lowercase hex "
            "of its integer code sum(c_m * q**m), most significant base-q digit first. Base fields: "
            "GF(4) = GF(2)[y]/(y^2+y+1), GF(16) = GF(2)[y]/(y^4+y+1)."
        ),
        "fields": records,
    }
    out = Path(__file__).resolve().parents[1] / "src" / "rsrepair" / "field_table.json"
    out.write_text(json.dumps(doc, indent=1) + "\n")
    print(f"wrote {len(records)} records to {out}")


if __name__ == "__main__":
    main()
