"""Multiple-repair matrices and the centralized repair procedure they induce.

A matrix ``M`` (n x rt over F) for the failed set I drives repair as follows:
each surviving node j returns the traces tr(lambda * c_j) for a B-basis lambda of
the entries in row j; the repair center combines them into the rt values
sum_{i in I} tr(c_i M[i, l]) and solves the resulting B-linear system for c_I.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from rsrepair import kernels
from rsrepair.errors import InvalidRepairMatrix, UsageError
from rsrepair.fields import BaseField, FieldTower
from rsrepair.rscode import RSCode, generator_inner_products


@dataclass(frozen=True)
class RowPlan:
    """Download plan for one surviving node.

    ``basis`` is a B-basis of the entries of row j (first independent entries in
    column order) and ``coeffs[i, l]`` expands M[j, l] = sum_i coeffs[i, l] basis[i].
    """

    node: int
    basis: tuple[int, ...]
    coeffs: np.ndarray

    @property
    def width(self) -> int:
        return len(self.basis)


def _row_plans(tower: FieldTower, entries: np.ndarray, nodes: Sequence[int]) -> dict[int, RowPlan]:
    """Plans for the given 1-indexed rows, reducing all coordinate blocks in one call."""
    rows = entries[[j - 1 for j in nodes]]
    # red[a, m, l] is coordinate m of M[nodes[a], l]
    shifts = (np.arange(tower.t, dtype=np.int64) * tower.bits)[None, :, None]
    red = np.ascontiguousarray((rows[:, None, :] >> shifts) & (tower.q - 1))
    pivots = kernels.rref_many(red, tower.base.mul_table, tower.base.inv_table)
    plans = {}
    for a, (j, piv) in enumerate(zip(nodes, pivots)):
        coeffs = np.array(red[a, : len(piv)], dtype=np.int64)
        coeffs.setflags(write=False)
        plans[j] = RowPlan(j, tuple(int(rows[a, p]) for p in piv), coeffs)
    return plans


@dataclass(frozen=True, eq=False)
class MultiRepairMatrix:
    """An n x rt matrix over F together with its failed set I (1-indexed, ascending)."""

    code: RSCode
    failed: tuple[int, ...]
    entries: np.ndarray
    labels: tuple = ()
    scheme: str = ""
    plans: Mapping[int, RowPlan] = field(init=False, repr=False)

    def __post_init__(self):
        failed = tuple(sorted({int(i) for i in self.failed}))
        if len(failed) != len(self.failed) or any(not 1 <= i <= self.code.n for i in failed):
            raise UsageError(f"failed set must be distinct indices in [1, {self.code.n}]")
        entries = np.array(self.entries, dtype=np.int64)
        r, t = len(failed), self.code.tower.t
        if entries.shape != (self.code.n, r * t):
            raise UsageError(f"matrix has shape {entries.shape}, expected ({self.code.n}, {r * t})")
        if entries.size and (entries.min() < 0 or entries.max() >= self.code.tower.size):
            raise UsageError("matrix entries must be field elements")
        entries.setflags(write=False)
        object.__setattr__(self, "failed", failed)
        object.__setattr__(self, "entries", entries)
        gone = set(failed)
        survivors = [j for j in range(1, self.code.n + 1) if j not in gone]
        plans = _row_plans(self.code.tower, entries, survivors)
        object.__setattr__(self, "plans", plans)

    @property
    def r(self) -> int:
        return len(self.failed)

    @property
    def rt(self) -> int:
        return self.entries.shape[1]

    @property
    def failed_rows(self) -> np.ndarray:
        """M[I, :] as an r x rt array."""
        return self.entries[[i - 1 for i in self.failed]]

    def row(self, j: int) -> np.ndarray:
        return self.entries[j - 1]

    @property
    def row_dims(self) -> dict[int, int]:
        return {j: p.width for j, p in self.plans.items()}

    @property
    def bandwidth(self) -> int:
        """Sum over surviving j of dim_B span_B(row j), in B-symbols."""
        return sum(p.width for p in self.plans.values())

    @property
    def bandwidth_bits(self) -> int:
        return self.bandwidth * self.code.tower.bits

    def to_json(self) -> dict:
        f = self.code.tower
        return {
            "scheme": self.scheme,
            "failed": list(self.failed),
            "shape": list(self.entries.shape),
            "column_labels": [":".join(str(x) for x in lab) for lab in self.labels],
            "entries": [" ".join(f.hex(int(v)) for v in row) for row in self.entries],
        }


# -- verification ------------------------------------------------------------------------------


def psi_matrix(tower: FieldTower, m_i: np.ndarray) -> np.ndarray:
    """rt x rt matrix over B of y -> M[I,:] y, in stacked coordinates of F^r."""
    m_i = np.asarray(m_i, dtype=np.int64)
    r, rt = m_i.shape
    blocks = [tower.coord_matrix(m_i[i]) for i in range(r)]
    return np.ascontiguousarray(np.vstack(blocks)) if blocks else np.zeros((0, rt), np.int64)


def phi_matrix(tower: FieldTower, m_i: np.ndarray) -> np.ndarray:
    """rt x rt matrix over B of x -> (tr(<x, M[I, l]>))_l; column (i, m) is x_i = basis[m]."""
    m_i = np.asarray(m_i, dtype=np.int64)
    r, rt = m_i.shape
    basis = np.array(tower.basis, dtype=np.int64)
    # prods[l, i, m] = basis[m] * M[i, l]
    prods = tower.mul_arr(m_i.T[:, :, None], basis[None, None, :])
    return np.ascontiguousarray(tower.trace_arr(prods).reshape(rt, r * tower.t))


@dataclass(frozen=True)
class VerificationReport:
    dual_ok: bool
    rank_ok: bool
    rank: int
    bandwidth: int
    bad_columns: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.dual_ok and self.rank_ok

    def to_json(self) -> dict:
        return {
            "dual_ok": self.dual_ok,
            "rank_ok": self.rank_ok,
            "rank": self.rank,
            "bandwidth": self.bandwidth,
            "bad_columns": list(self.bad_columns),
        }


def verify_matrix(code: RSCode, matrix, failed: Optional[Iterable[int]] = None) -> VerificationReport:
    """Check the three multiple-repair-matrix properties.

    ``matrix`` is a ``MultiRepairMatrix`` or a raw n x rt array (then ``failed``
    is required).
    """
    if not isinstance(matrix, MultiRepairMatrix):
        if failed is None:
            raise UsageError("failed set required for a raw matrix")
        matrix = MultiRepairMatrix(code, tuple(failed), matrix)
    elif failed is not None and tuple(sorted(failed)) != matrix.failed:
        raise UsageError("failed set does not match the matrix")
    if matrix.code is not code and matrix.code != code:
        raise UsageError("matrix was built for a different code")
    bad = tuple(
        col for col in range(matrix.rt) if np.any(generator_inner_products(code, matrix.entries[:, col]))
    )
    tower = code.tower
    psi = psi_matrix(tower, matrix.failed_rows)
    rank = len(kernels.rref(psi, tower.base.mul_table, tower.base.inv_table)) if psi.size else 0
    return VerificationReport(
        dual_ok=not bad,
        rank_ok=rank == matrix.rt,
        rank=rank,
        bandwidth=matrix.bandwidth,
        bad_columns=bad,
    )


# -- the repair protocol ------------------------------------------------------------------------


@dataclass(frozen=True)
class Transcript:
    """What surviving node ``node`` sends: tr(basis[i] * c_node) for each i."""

    node: int
    basis: tuple[int, ...]
    symbols: tuple[int, ...]

    def to_json(self, tower: FieldTower) -> dict:
        return {
            "node_index": self.node,
            "basis": [tower.hex(b) for b in self.basis],
            "symbols": [tower.base_hex(s) for s in self.symbols],
        }


def node_response(tower: FieldTower, c_j: int, row_basis: Sequence[int]) -> tuple[int, ...]:
    return tuple(tower.trace(tower.mul(int(lam), int(c_j))) for lam in row_basis)


def aggregate_syndromes(matrix: MultiRepairMatrix, transcripts) -> np.ndarray:
    """Recover (sum_{i in I} tr(c_i M[i, l]))_l from the survivors' transcripts.

    ``transcripts`` maps node index to ``Transcript`` (a sequence is accepted too).
    In characteristic 2 the minus sign in front of the survivors' sum vanishes.
    """
    if not isinstance(transcripts, Mapping):
        transcripts = {tr.node: tr for tr in transcripts}
    base = matrix.code.tower.base
    syn = np.zeros(matrix.rt, dtype=np.int64)
    for j, plan in matrix.plans.items():
        if j not in transcripts:
            raise UsageError(f"missing transcript for node {j}")
        got = transcripts[j]
        if len(got.symbols) != plan.width:
            raise UsageError(f"node {j} sent {len(got.symbols)} symbols, expected {plan.width}")
        if plan.width:
            sym = np.array(got.symbols, dtype=np.int64)
            syn ^= np.bitwise_xor.reduce(base.mul_table[sym[:, None], plan.coeffs], axis=0)
    return syn


def apply_phi(tower: FieldTower, m_i: np.ndarray, x: Sequence[int]) -> tuple[int, ...]:
    """phi(x) = tr(x^T M[I,:]), computed directly from the definition."""
    m_i = np.asarray(m_i, dtype=np.int64)
    out = []
    for col in range(m_i.shape[1]):
        acc = 0
        for i, xi in enumerate(x):
            acc ^= tower.mul(int(xi), int(m_i[i, col]))
        out.append(tower.trace(acc))
    return tuple(out)


def apply_psi(tower: FieldTower, m_i: np.ndarray, y: Sequence[int]) -> tuple[int, ...]:
    """psi(y) = M[I,:] y for y over B."""
    m_i = np.asarray(m_i, dtype=np.int64)
    out = []
    for i in range(m_i.shape[0]):
        acc = 0
        for col, yl in enumerate(y):
            acc ^= tower.mul(int(m_i[i, col]), int(yl))
        out.append(acc)
    return tuple(out)


def invert_phi(tower: FieldTower, m_i: np.ndarray, syndromes) -> np.ndarray:
    """Solve phi(x) = syndromes for x in F^r.

    ``syndromes`` is a length-rt vector (result: length r) or an (N, rt) batch
    (result: (N, r)). Raises ``InvalidRepairMatrix`` when phi is singular.
    """
    m_i = np.asarray(m_i, dtype=np.int64)
    r, rt = m_i.shape
    if rt != r * tower.t:
        raise UsageError(f"M[I,:] has {rt} columns, expected {r * tower.t}")
    s = np.asarray(syndromes, dtype=np.int64)
    single = s.ndim == 1
    s2 = s.reshape(1, -1) if single else s
    if s2.shape[1] != rt:
        raise UsageError(f"expected {rt} syndromes, got {s2.shape[1]}")
    aug = np.ascontiguousarray(np.hstack([phi_matrix(tower, m_i), s2.T]))
    pivots = kernels.rref(aug, tower.base.mul_table, tower.base.inv_table, rt)
    if len(pivots) != rt:
        raise InvalidRepairMatrix(f"phi has rank {len(pivots)} < {rt}; M[I,:] is not full rank over B")
    coords = aug[:, rt:]  # pivots are 0..rt-1, so row l solves coordinate l
    out = np.zeros((s2.shape[0], r), dtype=np.int64)
    for i in range(r):
        out[:, i] = tower.from_coord_matrix(coords[i * tower.t : (i + 1) * tower.t])
    return out[0] if single else out


@dataclass(frozen=True)
class RepairOutcome:
    failed: tuple[int, ...]
    recovered: dict[int, int]
    transcripts: tuple[Transcript, ...]
    symbols_B: int
    bits: int

    def to_json(self, tower: FieldTower) -> dict:
        return {
            "failed": list(self.failed),
            "recovered": {str(i): tower.hex(v) for i, v in self.recovered.items()},
            "symbols_B": self.symbols_B,
            "bits": self.bits,
            "transcripts": [tr.to_json(tower) for tr in self.transcripts],
        }


def _check_pair(code: RSCode, matrix: MultiRepairMatrix, failed: Optional[Iterable[int]]) -> None:
    if matrix.code is not code and matrix.code != code:
        raise UsageError("matrix was built for a different code")
    if failed is not None and tuple(sorted(failed)) != matrix.failed:
        raise UsageError("failed set does not match the matrix")


def centralized_repair(
    code: RSCode, codeword: Sequence[int], failed: Iterable[int], matrix: MultiRepairMatrix
) -> RepairOutcome:
    """Erase ``failed`` from ``codeword`` and rebuild it from the survivors' traces."""
    failed = tuple(sorted(failed))
    _check_pair(code, matrix, failed)
    if len(codeword) != code.n:
        raise UsageError(f"codeword has length {len(codeword)}, expected n={code.n}")
    tower = code.tower
    gone = set(failed)
    # the repair center never sees the erased symbols
    survivors = {j: int(codeword[j - 1]) for j in range(1, code.n + 1) if j not in gone}
    transcripts = tuple(
        Transcript(j, plan.basis, node_response(tower, survivors[j], plan.basis))
        for j, plan in matrix.plans.items()
    )
    syn = aggregate_syndromes(matrix, {tr.node: tr for tr in transcripts})
    x = invert_phi(tower, matrix.failed_rows, syn)
    used = sum(len(tr.symbols) for tr in transcripts)
    return RepairOutcome(
        failed=failed,
        recovered={i: int(v) for i, v in zip(failed, x)},
        transcripts=transcripts,
        symbols_B=used,
        bits=used * tower.bits,
    )


def base_matmul(base: BaseField, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Matrix product over B."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    if base.q == 2:
        return (x @ y) & 1
    out = np.zeros((x.shape[0], y.shape[1]), dtype=np.int64)
    for k in range(x.shape[1]):
        out ^= base.mul_table[x[:, k][:, None], y[k][None, :]]
    return out


def repair_many(code: RSCode, codewords, matrix: MultiRepairMatrix) -> tuple[np.ndarray, int]:
    """Repair a batch of codewords (rows of an (N, n) array) with one matrix.

    Same protocol as ``centralized_repair``, vectorized over codewords; the
    linear system is solved once per call for all right-hand sides.
    Returns the (N, r) recovered symbols and the per-codeword bandwidth in B-symbols.
    """
    _check_pair(code, matrix, None)
    words = np.asarray(codewords, dtype=np.int64)
    if words.ndim != 2 or words.shape[1] != code.n:
        raise UsageError(f"codewords must have shape (N, {code.n})")
    tower = code.tower
    plans = [p for p in matrix.plans.values() if p.width]
    if plans:
        # one response column per downloaded symbol, all nodes at once
        nodes = np.array([p.node - 1 for p in plans for _ in p.basis], dtype=np.int64)
        basis = np.array([b for p in plans for b in p.basis], dtype=np.int64)
        responses = tower.trace_arr(tower.mul_arr(words[:, nodes], basis[None, :]))
        syn = base_matmul(tower.base, responses, np.vstack([p.coeffs for p in plans]))
    else:
        syn = np.zeros((words.shape[0], matrix.rt), dtype=np.int64)
    return invert_phi(tower, matrix.failed_rows, syn), matrix.bandwidth
