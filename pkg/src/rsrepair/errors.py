"""Exception types shared across the package."""


class RepairError(Exception):
    """Base class for all package errors."""


class UsageError(RepairError, ValueError):
    """Bad arguments: shape mismatch, mixed towers, out-of-range parameters."""


class DomainError(RepairError, ArithmeticError):
    """Operation undefined at this input (inverse of zero, coset of zero)."""


class UnrecoverableError(RepairError):
    """More erasures than the code can tolerate."""


class InfeasibleError(RepairError):
    """Scheme parameters admit no construction."""


class InvalidRepairMatrix(RepairError):
    """A matrix failed a multiple-repair-matrix property."""


class ReducibleModulusError(UsageError):
    """A field-table modulus is not irreducible, so it defines no field."""
