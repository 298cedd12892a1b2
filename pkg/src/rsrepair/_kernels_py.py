"""Pure Python / numpy versions of the hot kernels.

Every function here has the same signature and semantics as its twin in
``_kernels.pyx``. Field elements are integer codes; base-field addition is XOR
(all supported fields have characteristic 2).
"""

from __future__ import annotations

import numpy as np


def rref(a: np.ndarray, mul: np.ndarray, inv: np.ndarray, ncols: int = -1) -> list[int]:
    """Reduce ``a`` in place to reduced row echelon form over GF(q).

    Pivots are only searched in the first ``ncols`` columns (all if negative),
    which lets callers reduce an augmented system ``[A | b]``.
    Returns the pivot column indices.
    """
    rows, cols = a.shape
    if ncols < 0:
        ncols = cols
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            a[[r, p]] = a[[p, r]]
        piv = int(a[r, c])
        if piv != 1:
            a[r] = mul[inv[piv], a[r]]
        others = np.flatnonzero(a[:, c])
        others = others[others != r]
        if others.size:
            factors = a[others, c]
            a[others] ^= mul[factors[:, None], a[r][None, :]]
        pivots.append(c)
        r += 1
    return pivots


def rref_many(a: np.ndarray, mul: np.ndarray, inv: np.ndarray) -> list[list[int]]:
    """``rref`` applied to every matrix of the stack ``a`` (N, rows, cols), in place.

    All matrices advance one column at a time, so the work is a handful of
    array operations per column rather than per matrix.
    """
    count, rows, cols = a.shape
    rank = np.zeros(count, dtype=np.int64)
    is_pivot = np.zeros((count, cols), dtype=bool)
    row_idx = np.arange(rows)
    for c in range(cols):
        cand = (a[:, :, c] != 0) & (row_idx[None, :] >= rank[:, None])
        n = np.flatnonzero(cand.any(axis=1))
        if n.size == 0:
            continue
        top = rank[n]
        p = cand[n].argmax(axis=1)
        lead, other = a[n, top].copy(), a[n, p].copy()
        a[n, p] = lead
        a[n, top] = other
        a[n, top] = mul[inv[a[n, top, c]][:, None], a[n, top]]
        factors = a[n, :, c].copy()
        factors[np.arange(n.size), top] = 0
        a[n] ^= mul[factors[:, :, None], a[n, top][:, None, :]]
        is_pivot[n, c] = True
        rank[n] += 1
    return [np.flatnonzero(row).tolist() for row in is_pivot]


def xor_rank(codes: np.ndarray) -> int:
    """Rank over GF(2) of integers read as bit vectors."""
    basis: dict[int, int] = {}
    for v in codes.tolist():
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def horner(coeffs: np.ndarray, xs: np.ndarray, log: np.ndarray, exp: np.ndarray, order: int) -> np.ndarray:
    """Evaluate sum(coeffs[d] * x**d) at every x."""
    xs = np.asarray(xs, dtype=np.int64)
    out = np.zeros(xs.shape[0], dtype=np.int64)
    xnz = xs != 0
    lx = log[xs]
    for c in coeffs[::-1].tolist():
        # out = out * x + c
        prod = np.zeros_like(out)
        m = xnz & (out != 0)
        prod[m] = exp[log[out[m]] + lx[m]]
        out = prod ^ c
    return out


def power_sums(v: np.ndarray, xs: np.ndarray, k: int, log: np.ndarray, exp: np.ndarray, order: int) -> np.ndarray:
    """Return ``s[d] = sum_j v[j] * xs[j]**d`` for ``d < k`` (with 0**0 = 1)."""
    v = np.asarray(v, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    out = np.zeros(k, dtype=np.int64)
    if k == 0:
        return out
    live = v != 0
    lv = log[v[live]]
    x = xs[live]
    zero_x = x == 0
    out[0] = np.bitwise_xor.reduce(v[live]) if lv.size else 0
    if k > 1:
        lx = log[x[~zero_x]]
        lvn = lv[~zero_x]
        d = np.arange(1, k, dtype=np.int64)[:, None]
        terms = exp[(lvn[None, :] + d * lx[None, :]) % order]
        if terms.shape[1]:
            out[1:] = np.bitwise_xor.reduce(terms, axis=1)
    return out
