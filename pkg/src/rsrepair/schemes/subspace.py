"""Repair matrices from subspace polynomials.

For a failed set I with annihilator F_I(X) = prod_{i in I}(X - alpha_i) and the
subspace polynomial L_W of an s-dimensional W, the column indexed by (zeta, p) is
lambda_j * L_W(zeta F_I(alpha_j) alpha_j^(p-1)) / F_I(alpha_j). Every surviving row
then lies in a coset of Im(L_W), which has dimension t - s over B.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from rsrepair.errors import InfeasibleError, UsageError
from rsrepair.fields import FieldTower, LinearizedPolynomial, subspace_polynomial
from rsrepair.repair import MultiRepairMatrix
from rsrepair.rscode import RSCode
from rsrepair.schemes.bounds import choose_s, subspace_bound, subspace_claim_bound


def poly_mul(tower: FieldTower, a: Sequence[int], b: Sequence[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] ^= tower.mul(x, y)
    return out


def poly_pow(tower: FieldTower, a: Sequence[int], e: int) -> list[int]:
    out, base = [1], list(a)
    while e:
        if e & 1:
            out = poly_mul(tower, out, base)
        e >>= 1
        if e:
            base = poly_mul(tower, base, base)
    return out


def annihilator(tower: FieldTower, points: Sequence[int]) -> list[int]:
    """Coefficients (lowest first) of prod (X - a) over ``points``."""
    out = [1]
    for a in points:
        out = poly_mul(tower, out, [int(a), 1])
    return out


def _trim(poly: list[int]) -> list[int]:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


@dataclass(frozen=True, eq=False)
class SubspaceScheme:
    """A subspace-polynomial repair matrix for ``requested``.

    When ``r_prime`` exceeds the number of requested failures, the matrix is built
    for the padded set ``matrix.failed`` (extra survivors are simply treated as lost).
    """

    requested: tuple[int, ...]
    s: int
    w_basis: tuple[int, ...]
    poly: LinearizedPolynomial
    annihilator: tuple[int, ...]
    matrix: MultiRepairMatrix

    @property
    def r(self) -> int:
        return len(self.requested)

    @property
    def r_prime(self) -> int:
        return self.matrix.r

    @property
    def bandwidth(self) -> int:
        return self.matrix.bandwidth

    @property
    def bound(self) -> int:
        """(n - r')(t - s) for the r' actually used."""
        code = self.matrix.code
        return subspace_claim_bound(code.n, code.tower.t, self.r_prime, self.s)

    def to_json(self) -> dict:
        f = self.matrix.code.tower
        return {
            "scheme": "subspace",
            "requested": list(self.requested),
            "failed": list(self.matrix.failed),
            "r_prime": self.r_prime,
            "s": self.s,
            "w_basis": [f.hex(w) for w in self.w_basis],
            "subspace_poly": [f.hex(c) for c in self.poly.coeffs],
            "bound": self.bound,
            "bandwidth": self.bandwidth,
            "column_order": "p-major, zeta-minor: column (p-1)*t + (w-1)",
        }


def _pad(n: int, failed: Sequence[int], extra: int) -> tuple[int, ...]:
    gone = set(failed)
    pad = [j for j in range(1, n + 1) if j not in gone][:extra]
    return tuple(sorted(gone | set(pad)))


def build_subspace_matrix(
    code: RSCode, failed: Sequence[int], *, r_prime: Union[None, int, str] = None
) -> SubspaceScheme:
    """Build the subspace scheme for ``failed``.

    ``r_prime`` may be an integer in [r, n-k], ``None`` (use r) or ``"auto"``
    (the r' minimizing the closed-form bound).
    """
    requested = tuple(sorted({int(i) for i in failed}))
    n, k, tower = code.n, code.k, code.tower
    r = len(requested)
    if r == 0 or any(not 1 <= i <= n for i in requested):
        raise UsageError(f"failed set must be nonempty indices in [1, {n}]")
    if r > n - k:
        raise InfeasibleError(f"r={r} exceeds n-k={n - k}; the erasures are unrecoverable")
    if r_prime is None:
        rp = r
    elif r_prime == "auto":
        rp = subspace_bound(n, k, tower.t, r, tower.q)[1]
    else:
        rp = int(r_prime)
    if not r <= rp <= n - k:
        raise UsageError(f"r' must lie in [{r}, {n - k}], got {rp}")
    idx = _pad(n, requested, rp - r)
    s = choose_s(n, k, rp, tower.q)
    t = tower.t
    w_basis = tuple(tower.basis[:s])
    poly = subspace_polynomial(tower, w_basis)
    c0 = poly.coeffs[0]

    alphas, lam = code.alpha_array, code.lambda_array
    in_i = np.zeros(n, dtype=bool)
    in_i[[i - 1 for i in idx]] = True
    fi = np.ones(n, dtype=np.int64)
    for i in idx:
        fi = tower.mul_arr(fi, alphas ^ code.alpha(i))
    surv = ~in_i
    fi_s, a_s, lam_s = fi[surv], alphas[surv], lam[surv]
    scale_s = tower.mul_arr(lam_s, tower.inv_arr(fi_s))
    a_i, lam_i = alphas[in_i], lam[in_i]

    entries = np.zeros((n, rp * t), dtype=np.int64)
    labels = []
    for p in range(1, rp + 1):
        pw_s = tower.pow_arr(a_s, p - 1)
        pw_i = tower.pow_arr(a_i, p - 1)
        arg_base = tower.mul_arr(fi_s, pw_s)
        for w, zeta in enumerate(tower.basis):
            col = (p - 1) * t + w
            entries[surv, col] = tower.mul_arr(scale_s, poly.evaluate_many(tower.mul_arr(zeta, arg_base)))
            entries[in_i, col] = tower.mul_arr(tower.mul_arr(lam_i, tower.mul(c0, zeta)), pw_i)
            labels.append((w + 1, p))
    matrix = MultiRepairMatrix(code, idx, entries, tuple(labels), "subspace")
    return SubspaceScheme(
        requested=requested,
        s=s,
        w_basis=w_basis,
        poly=poly,
        annihilator=tuple(annihilator(tower, [code.alpha(i) for i in idx])),
        matrix=matrix,
    )


def column_polynomials(scheme: SubspaceScheme) -> list[list[int]]:
    """P_{zeta,p} for every column, from the expanded form
    sum_m c_m zeta^(q^m) F_I(X)^(q^m - 1) X^((p-1) q^m)."""
    tower = scheme.matrix.code.tower
    q = tower.q
    fi = list(scheme.annihilator)
    fi_pows = [poly_pow(tower, fi, q**m - 1) for m in range(len(scheme.poly.coeffs))]
    out = []
    for p in range(1, scheme.r_prime + 1):
        for zeta in tower.basis:
            acc: list[int] = []
            for m, c in enumerate(scheme.poly.coeffs):
                scal = tower.mul(c, tower.pow(zeta, q**m))
                shift = (p - 1) * q**m
                term = [0] * shift + [tower.mul(scal, v) for v in fi_pows[m]]
                if len(term) > len(acc):
                    acc += [0] * (len(term) - len(acc))
                for d, v in enumerate(term):
                    acc[d] ^= v
            out.append(_trim(acc))
    return out


def max_column_degree(scheme: SubspaceScheme) -> int:
    return max(len(p) - 1 for p in column_polynomials(scheme))
