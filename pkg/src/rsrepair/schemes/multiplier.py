"""Repair matrices built by stacking scaled single-failure matrices.

Block l targets failed node I_l with multiplier delta_l; its entry in row j is a
B-multiple of delta_l / (alpha_j - alpha_{I_l}). Rows where two blocks land on the
same coset of B* ("collide") cost one fewer symbol. The deltas are chosen one at a
time: each must satisfy linear trace constraints that keep M[I,:] full rank, and
among those we prefer one whose new collisions avoid I and all earlier collisions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from rsrepair.errors import InfeasibleError, InvalidRepairMatrix, UsageError
from rsrepair.fields import BaseMatrix, FieldTower
from rsrepair.repair import MultiRepairMatrix, verify_matrix
from rsrepair.rscode import RSCode
from rsrepair.schemes.bounds import multiplier_bound, multiplier_feasible


def _require_full_length(code: RSCode) -> None:
    f = code.tower
    if not code.full_length or code.k != code.n - code.n // f.q:
        raise UsageError(
            "the multiplier scheme needs the full-length code with k = n - n/q "
            f"(n={f.size}, k={f.size - f.size // f.q}); got n={code.n}, k={code.k}"
        )


def _failed_tuple(code: RSCode, failed: Sequence[int]) -> tuple[int, ...]:
    idx = tuple(sorted({int(i) for i in failed}))
    if not idx or len(idx) != len(failed) or any(not 1 <= i <= code.n for i in idx):
        raise UsageError(f"failed set must be distinct indices in [1, {code.n}]")
    return idx


def single_failure_matrix(
    code: RSCode, i: int, delta: int, basis: Optional[Sequence[int]] = None
) -> np.ndarray:
    """n x t matrix with M[j, w] = delta tr(z_w (a_j - a_i)) / (a_j - a_i), M[i, w] = delta z_w.

    Each column is lambda times a polynomial of degree < n/q, so it is a dual
    codeword when k = n - n/q.
    """
    _require_full_length(code)
    f = code.tower
    if delta == 0:
        raise UsageError("delta must be nonzero")
    if not 1 <= i <= code.n:
        raise UsageError(f"index {i} outside [1, {code.n}]")
    z = np.array(f.basis if basis is None else basis, dtype=np.int64)
    if z.shape != (f.t,):
        raise UsageError(f"basis must have {f.t} elements")
    d = code.alpha_array ^ code.alpha(i)
    out = np.zeros((code.n, f.t), dtype=np.int64)
    off = d != 0
    dd = d[off]
    traces = f.trace_arr(f.mul_arr(dd[:, None], z[None, :]))
    out[off] = f.mul_arr(f.mul_arr(delta, f.inv_arr(dd))[:, None], traces)
    out[i - 1] = f.mul_arr(delta, z)
    return out


# -- trace constraints on the deltas -------------------------------------------------------


def constraint_betas(code: RSCode, failed: Sequence[int], deltas: Sequence[int], ell: int) -> list[int]:
    """beta values with tr(delta_ell * beta) = 0 required, given delta_1..delta_{ell-1}.

    ``ell`` is 1-based within I. One beta per pair j < ell, s > j:
    beta = (a_s - a_j) / (delta_j (a_j - a_ell)).
    """
    f = code.tower
    a = [code.alpha(i) for i in failed]
    r = len(a)
    out = []
    for j in range(1, ell):
        denom = f.mul(deltas[j - 1], a[j - 1] ^ a[ell - 1])
        for s in range(j + 1, r + 1):
            out.append(f.div(a[s - 1] ^ a[j - 1], denom))
    return out


def constraint_residuals(code: RSCode, failed: Sequence[int], deltas: Sequence[int]) -> list[tuple]:
    """(j, l, s, trace) for every j < l, s > j; full rank is guaranteed when all traces vanish."""
    f = code.tower
    a = [code.alpha(i) for i in failed]
    r = len(a)
    out = []
    for j in range(1, r + 1):
        for ell in range(j + 1, r + 1):
            ratio = f.div(deltas[ell - 1], deltas[j - 1])
            for s in range(j + 1, r + 1):
                val = f.mul(ratio, f.div(a[s - 1] ^ a[j - 1], a[j - 1] ^ a[ell - 1]))
                out.append((j, ell, s, f.trace(val)))
    return out


def _solution_space(tower: FieldTower, betas: Sequence[int]) -> list[int]:
    """All x in F with tr(x beta) = 0 for each beta, ascending, zero excluded."""
    if not betas:
        kernel = list(tower.basis)
    else:
        basis = np.array(tower.basis, dtype=np.int64)
        rows = tower.trace_arr(tower.mul_arr(np.array(betas, dtype=np.int64)[:, None], basis[None, :]))
        null = BaseMatrix(tower.base, rows).nullspace()
        kernel = [int(v) for v in tower.from_coord_matrix(null.T)] if len(null) else []
    span = {0}
    for g in kernel:
        span = {x ^ tower.mul(b, g) for x in span for b in range(tower.q)}
    return sorted(span - {0})


# -- collisions ----------------------------------------------------------------------------


def _coset_ids(tower: FieldTower, values: np.ndarray) -> np.ndarray:
    if tower.has_tables:
        return tower.coset_table[values]
    return np.array([tower.coset_id(int(v)) for v in values], dtype=np.int64)


def block_cosets(code: RSCode, pos: int, delta: int) -> np.ndarray:
    """coset_id(delta / (a_i - a_pos)) for every position i (1-based index i-1); -1 at i = pos."""
    f = code.tower
    d = code.alpha_array ^ code.alpha(pos)
    out = np.full(code.n, -1, dtype=np.int64)
    off = d != 0
    out[off] = _coset_ids(f, f.mul_arr(delta, f.inv_arr(d[off])))
    return out


def collisions(code: RSCode, pos_j: int, delta_j: int, pos_l: int, delta_l: int) -> tuple[int, ...]:
    """Positions i (1-based, i not in {pos_j, pos_l}) where the two blocks share a coset."""
    cj = block_cosets(code, pos_j, delta_j)
    cl = block_cosets(code, pos_l, delta_l)
    hit = (cj == cl) & (cj >= 0) & (cl >= 0)
    return tuple(int(i) + 1 for i in np.flatnonzero(hit))


@dataclass(frozen=True)
class DeltaSelection:
    """Chosen deltas, the collision sets they produce, and a per-step log."""

    failed: tuple[int, ...]
    deltas: tuple[int, ...]
    S: tuple[int, ...]
    T: dict = field(default_factory=dict)  # (ell, j) -> positions, both 1-based within I
    fallback: bool = False
    steps: tuple = ()

    @property
    def expected_S(self) -> int:
        return comb(len(self.deltas), 2)

    def to_json(self, tower: FieldTower) -> dict:
        return {
            "deltas": [tower.hex(d) for d in self.deltas],
            "S": list(self.S),
            "T": {f"{ell},{j}": list(v) for (ell, j), v in sorted(self.T.items())},
            "fallback": self.fallback,
            "steps": [dict(s) for s in self.steps],
        }


def select_deltas(code: RSCode, failed: Sequence[int], *, require_feasible: bool = True) -> DeltaSelection:
    """Greedy choice of delta_1 = 1, delta_2, ..., delta_r.

    Candidates for delta_ell are the nonzero solutions of the trace constraints, in
    ascending code order. The first one whose collisions with every earlier block
    number exactly q-1 each, avoid I and the collisions so far, and are mutually
    disjoint is taken. If none qualifies the first candidate is used and
    ``fallback`` is set; the matrix is still valid, only with fewer collisions.
    """
    _require_full_length(code)
    idx = _failed_tuple(code, failed)
    f = code.tower
    r = len(idx)
    if require_feasible and not multiplier_feasible(f.t, f.q, r):
        raise InfeasibleError(f"parameters t={f.t}, q={f.q}, r={r} fail the feasibility condition")
    deltas = [1]
    gone = set(idx)
    s_set: set[int] = set()
    t_sets: dict = {}
    steps = []
    fallback = False
    for ell in range(2, r + 1):
        betas = constraint_betas(code, idx, deltas, ell)
        candidates = _solution_space(f, betas)
        if not candidates:
            raise InfeasibleError(f"no nonzero delta_{ell} satisfies the trace constraints")
        earlier = [block_cosets(code, idx[j - 1], deltas[j - 1]) for j in range(1, ell)]
        blocked = np.zeros(code.n, dtype=bool)
        blocked[[i - 1 for i in gone | s_set]] = True
        chosen, chosen_t, scanned = None, None, 0
        for cand in candidates:
            scanned += 1
            mine = block_cosets(code, idx[ell - 1], cand)
            sets, ok, seen = {}, True, np.zeros(code.n, dtype=bool)
            for j, cj in enumerate(earlier, start=1):
                hit = (cj == mine) & (cj >= 0) & (mine >= 0)
                if hit.sum() != f.q - 1 or (hit & blocked).any() or (hit & seen).any():
                    ok = False
                    break
                seen |= hit
                sets[j] = tuple(int(i) + 1 for i in np.flatnonzero(hit))
            if ok:
                chosen, chosen_t = cand, sets
                break
        good = chosen is not None
        if not good:
            fallback = True
            chosen = candidates[0]
            mine = block_cosets(code, idx[ell - 1], chosen)
            chosen_t = {
                j: tuple(int(i) + 1 for i in np.flatnonzero((cj == mine) & (cj >= 0) & (mine >= 0)))
                for j, cj in enumerate(earlier, start=1)
            }
        deltas.append(chosen)
        for j, pos in chosen_t.items():
            t_sets[(ell, j)] = pos
            s_set |= set(pos) - gone
        steps.append(
            {
                "ell": ell,
                "constraints": len(betas),
                "solutions": len(candidates),
                "scanned": scanned,
                "delta": f.hex(chosen),
                "good": good,
            }
        )
    return DeltaSelection(idx, tuple(deltas), tuple(sorted(s_set)), t_sets, fallback, tuple(steps))


# -- the scheme ----------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MultiplierScheme:
    failed: tuple[int, ...]
    deltas: tuple[int, ...]
    matrix: MultiRepairMatrix
    selection: Optional[DeltaSelection] = None

    @property
    def r(self) -> int:
        return len(self.failed)

    @property
    def bandwidth(self) -> int:
        return self.matrix.bandwidth

    @property
    def bound(self) -> int:
        return multiplier_bound(self.matrix.code.n, self.r, self.matrix.code.tower.q)

    def to_json(self) -> dict:
        f = self.matrix.code.tower
        out = {
            "scheme": "multiplier",
            "failed": list(self.failed),
            "deltas": [f.hex(d) for d in self.deltas],
            "bound": self.bound,
            "bandwidth": self.bandwidth,
            "column_order": "block-major: column (l-1)*t + (w-1) targets failed node I_l",
        }
        if self.selection is not None:
            out["selection"] = self.selection.to_json(f)
        return out


def build_multiplier_matrix(
    code: RSCode,
    failed: Sequence[int],
    deltas: Optional[Sequence[int]] = None,
    *,
    check: bool = True,
    require_feasible: bool = True,
) -> MultiplierScheme:
    """[M_1 | ... | M_r] with M_l the single-failure matrix for I_l, multiplier
    delta_l and basis zeta / delta_l. Deltas default to ``select_deltas``.

    With ``check`` the full-rank property is verified and a failure raises
    ``InvalidRepairMatrix``.
    """
    _require_full_length(code)
    idx = _failed_tuple(code, failed)
    f = code.tower
    selection = None
    if deltas is None:
        selection = select_deltas(code, idx, require_feasible=require_feasible)
        deltas = selection.deltas
    deltas = tuple(int(d) for d in deltas)
    if len(deltas) != len(idx):
        raise UsageError(f"need {len(idx)} deltas, got {len(deltas)}")
    blocks, labels = [], []
    for ell, (pos, d) in enumerate(zip(idx, deltas), start=1):
        if d == 0:
            raise UsageError("deltas must be nonzero")
        scaled = [f.div(z, d) for z in f.basis]
        blocks.append(single_failure_matrix(code, pos, d, scaled))
        labels.extend((pos, w) for w in range(1, f.t + 1))
    matrix = MultiRepairMatrix(code, idx, np.hstack(blocks), tuple(labels), "multiplier")
    if check:
        report = verify_matrix(code, matrix)
        if not report.ok:
            raise InvalidRepairMatrix(
                f"stacked matrix fails verification (dual_ok={report.dual_ok}, rank {report.rank}/{matrix.rt})"
            )
    return MultiplierScheme(idx, deltas, matrix, selection)


# -- audits --------------------------------------------------------------------------------


@dataclass(frozen=True)
class CollisionAudit:
    pairs: dict  # (j, l) -> positions outside I where blocks j < l collide
    pairs_in_I: dict  # (j, l) -> positions inside I (should be empty)
    S: tuple[int, ...]
    expected_S: int
    stored_S_matches: Optional[bool]
    t_disjoint: bool
    row_dims: dict
    row_cosets: dict
    violations: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def full_success(self) -> bool:
        return len(self.S) == self.expected_S and self.t_disjoint and not any(self.pairs_in_I.values())

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "full_success": self.full_success,
            "S_size": len(self.S),
            "expected_S_size": self.expected_S,
            "S": list(self.S),
            "stored_S_matches": self.stored_S_matches,
            "t_disjoint": self.t_disjoint,
            "pairs": {f"{j},{l}": list(v) for (j, l), v in sorted(self.pairs.items())},
            "violations": list(self.violations),
        }


def collision_audit(scheme: MultiplierScheme) -> CollisionAudit:
    """Recompute every collision from scratch and check the bandwidth accounting.

    Row bound: a surviving row meets at most as many B*-cosets as there are distinct
    block cosets at that row, so its span has at most that dimension; rows in S
    lose at least one.
    """
    code = scheme.matrix.code
    f = code.tower
    idx, deltas, r = scheme.failed, scheme.deltas, scheme.r
    gone = set(idx)
    cos = [block_cosets(code, pos, d) for pos, d in zip(idx, deltas)]
    pairs, pairs_in = {}, {}
    for j, ell in itertools.combinations(range(1, r + 1), 2):
        hit = (cos[j - 1] == cos[ell - 1]) & (cos[j - 1] >= 0) & (cos[ell - 1] >= 0)
        where = [int(i) + 1 for i in np.flatnonzero(hit)]
        pairs[(j, ell)] = tuple(i for i in where if i not in gone)
        pairs_in[(j, ell)] = tuple(i for i in where if i in gone)
    s_all = tuple(sorted(set().union(*pairs.values()))) if pairs else ()
    violations = []

    # T sets per new block ell: pairwise disjoint, and disjoint from the earlier S
    t_disjoint = True
    s_prev: set[int] = set()
    for ell in range(2, r + 1):
        seen: set[int] = set()
        for j in range(1, ell):
            tj = set(pairs[(j, ell)]) | set(pairs_in[(j, ell)])
            if tj & seen or tj & s_prev or tj & gone:
                t_disjoint = False
            seen |= tj
        s_prev |= seen - gone
    if any(pairs_in.values()):
        violations.append("collision inside the failed set")

    stored = None
    if scheme.selection is not None:
        stored = tuple(scheme.selection.S) == s_all
        if not stored:
            violations.append("recomputed S differs from the selection record")

    row_dims, row_cosets = {}, {}
    s_members = set(s_all)
    for i in range(1, code.n + 1):
        if i in gone:
            continue
        n_cos = len({int(c[i - 1]) for c in cos})
        dim = scheme.matrix.plans[i].width
        row_dims[i], row_cosets[i] = dim, n_cos
        cap = r - 1 if i in s_members else r
        if dim > n_cos or dim > cap:
            violations.append(f"row {i}: dimension {dim} exceeds coset count {n_cos} / cap {cap}")
    expected = comb(r, 2) * (f.q - 1)
    if scheme.bandwidth > scheme.matrix.code.n * r - r * r - len(s_all):
        violations.append("bandwidth exceeds (n-r)r - |S|")
    return CollisionAudit(
        pairs=pairs,
        pairs_in_I=pairs_in,
        S=s_all,
        expected_S=expected,
        stored_S_matches=stored,
        t_disjoint=t_disjoint,
        row_dims=row_dims,
        row_cosets=row_cosets,
        violations=tuple(violations),
    )


def lu_structure_check(
    tower: FieldTower,
    m_i: np.ndarray,
    deltas: Sequence[int],
    alphas_i: Sequence[int],
    basis: Optional[Sequence[int]] = None,
) -> bool:
    """Run the trace-twisted elimination on M[I,:] and test for block upper-triangular form.

    Step (j, s) adds f_g(row j) to row s, where g = delta_j / (a_s - a_j) and
    f_g(x) = g tr(x / g) entrywise. Success means diagonal blocks equal the basis
    and every block below the diagonal is zero.
    """
    a = np.array(m_i, dtype=np.int64)
    r = len(deltas)
    t = tower.t
    basis = np.array(tower.basis if basis is None else basis, dtype=np.int64)
    if a.shape != (r, r * t):
        raise UsageError(f"M[I,:] must be {r} x {r * t}")
    for j in range(r - 1):
        for s in range(j + 1, r):
            g = tower.div(int(deltas[j]), int(alphas_i[s]) ^ int(alphas_i[j]))
            ginv = tower.inv(g)
            a[s] ^= tower.mul_arr(g, tower.trace_arr(tower.mul_arr(a[j], ginv)))
    for p in range(r):
        if not np.array_equal(a[p, p * t : (p + 1) * t], basis):
            return False
        if np.any(a[p, : p * t]):
            return False
    return True


def perturb_delta(code: RSCode, failed: Sequence[int], deltas: Sequence[int], ell: int) -> tuple[int, ...]:
    """Replace delta_ell (1-based) by the smallest nonzero value breaking a trace constraint."""
    idx = _failed_tuple(code, failed)
    f = code.tower
    betas = constraint_betas(code, idx, deltas, ell)
    if not betas:
        raise UsageError("delta_1 is unconstrained; pick ell >= 2")
    for cand in range(1, f.size):
        if any(f.trace(f.mul(cand, b)) for b in betas):
            out = list(deltas)
            out[ell - 1] = cand
            return tuple(out)
    raise UsageError("every delta satisfies the constraints")
