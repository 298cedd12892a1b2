"""Concrete multiple-failure repair constructions and their bandwidth bounds."""

from rsrepair.schemes.bounds import (
    CSV_HEADER,
    BoundReport,
    bound_report,
    bounds_table,
    choose_s,
    multiplier_bound,
    multiplier_feasible,
    subspace_bound,
    subspace_claim_bound,
)
from rsrepair.schemes.multiplier import (
    CollisionAudit,
    DeltaSelection,
    MultiplierScheme,
    build_multiplier_matrix,
    collision_audit,
    collisions,
    constraint_residuals,
    lu_structure_check,
    perturb_delta,
    select_deltas,
    single_failure_matrix,
)
from rsrepair.schemes.subspace import (
    SubspaceScheme,
    build_subspace_matrix,
    column_polynomials,
    max_column_degree,
)

__all__ = [
    "BoundReport",
    "CSV_HEADER",
    "CollisionAudit",
    "DeltaSelection",
    "MultiplierScheme",
    "SubspaceScheme",
    "bound_report",
    "bounds_table",
    "build_multiplier_matrix",
    "build_subspace_matrix",
    "choose_s",
    "collision_audit",
    "collisions",
    "column_polynomials",
    "constraint_residuals",
    "lu_structure_check",
    "max_column_degree",
    "multiplier_bound",
    "multiplier_feasible",
    "perturb_delta",
    "select_deltas",
    "single_failure_matrix",
    "subspace_bound",
    "subspace_claim_bound",
]
