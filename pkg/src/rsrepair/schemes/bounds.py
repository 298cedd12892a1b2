"""Closed-form bandwidth bounds for both constructions, and bound tables."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, log2
from typing import Optional

import numpy as np

from rsrepair.errors import UsageError


def _check_r(n: int, k: int, r: int) -> None:
    if not 1 <= r <= n - k:
        raise UsageError(f"need 1 <= r <= n-k = {n - k}, got r={r}")


def choose_s(n: int, k: int, r: int, q: int) -> int:
    """Largest s >= 0 with q^s (2r - 1) <= n - k + r - 1."""
    _check_r(n, k, r)
    num, den = n - k + r - 1, 2 * r - 1
    s = 0
    while q ** (s + 1) * den <= num:
        s += 1
    return s


def subspace_claim_bound(n: int, t: int, r: int, s: int) -> int:
    """(n - r)(t - s): the bandwidth guaranteed for a given s."""
    return (n - r) * (t - s)


def _subspace_values(n: int, k: int, t: int, q: int) -> np.ndarray:
    """(n - r')(t - s(r')) for r' = 1..n-k, as an int64 array indexed by r' - 1."""
    rp = np.arange(1, n - k + 1, dtype=np.int64)
    num, den = n - k + rp - 1, 2 * rp - 1
    s = np.zeros_like(rp)
    power = q
    while power <= num[-1]:
        s += power * den <= num
        power *= q
    s = np.minimum(s, t)
    return (n - rp) * (t - s)


def _suffix_argmin(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """For each start index, the min of values[start:] and the smallest index attaining it."""
    best = np.minimum.accumulate(values[::-1])[::-1]
    # an index attains its own suffix min exactly when it equals it; between two such
    # indices the suffix min is constant, so the next one to the right is the argmin
    idx = np.arange(len(values))
    marked = np.where(values == best, idx, len(values))
    arg = np.minimum.accumulate(marked[::-1])[::-1]
    return best, arg


def subspace_bound(n: int, k: int, t: int, r: int, q: int) -> tuple[int, int]:
    """min over r' in [r, n-k] of (n - r')(t - s(r')), with the smallest minimizing r'.

    Repairing r failures as r' >= r failures (ignoring r' - r extra survivors) is
    always allowed, hence the minimum.
    """
    _check_r(n, k, r)
    vals = _subspace_values(n, k, t, q)[r - 1 :]
    i = int(np.argmin(vals))
    return int(vals[i]), r + i


def multiplier_feasible(t: int, q: int, r: int) -> bool:
    """Integer form of the parameter condition for the multiplier construction.

    q^(t - C(r,2)) - 1 > r (r + C(r,2)(q-1)) (q-1). A single failure needs no
    condition and is reported feasible.
    """
    if r < 1:
        raise UsageError("r must be positive")
    if r == 1:
        return True
    pairs = comb(r, 2)
    if t <= pairs:
        return False
    return q ** (t - pairs) - 1 > r * (r + pairs * (q - 1)) * (q - 1)


def multiplier_bound(n: int, r: int, q: int) -> int:
    """(n - r) r - C(r,2)(q - 1)."""
    if r < 1:
        raise UsageError("r must be positive")
    return (n - r) * r - comb(r, 2) * (q - 1)


@dataclass(frozen=True)
class BoundReport:
    """Bandwidth bounds for r failures, in B-symbols (``*_bits`` for bits)."""

    n: int
    k: int
    t: int
    q: int
    r: int
    trivial: int
    subspace: int
    subspace_rprime: int
    multiplier: Optional[int]
    multiplier_feasible: bool

    @property
    def bits_per_symbol(self) -> int:
        return int(log2(self.q))

    @property
    def trivial_bits(self) -> int:
        return self.trivial * self.bits_per_symbol

    @property
    def subspace_bits(self) -> int:
        return self.subspace * self.bits_per_symbol

    @property
    def multiplier_bits(self) -> Optional[int]:
        return None if self.multiplier is None else self.multiplier * self.bits_per_symbol

    def csv_row(self) -> str:
        mb = "" if self.multiplier_bits is None else str(self.multiplier_bits)
        feas = "true" if self.multiplier_feasible else "false"
        return f"{self.r},{self.trivial_bits},{self.subspace_bits},{self.subspace_rprime},{mb},{feas}"

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "trivial_bits": self.trivial_bits,
            "subspace_bits": self.subspace_bits,
            "subspace_rprime": self.subspace_rprime,
            "multiplier_bits": self.multiplier_bits,
            "multiplier_feasible": self.multiplier_feasible,
        }


CSV_HEADER = "r,trivial_bits,subspace_bits,subspace_rprime,multiplier_bits,multiplier_feasible"


def _multiplier_applies(n: int, k: int, t: int, q: int, r: int) -> bool:
    return n == q**t and k == n - n // q and multiplier_feasible(t, q, r)


def bound_report(n: int, k: int, t: int, q: int, r: int) -> BoundReport:
    value, rp = subspace_bound(n, k, t, r, q)
    ok = _multiplier_applies(n, k, t, q, r)
    return BoundReport(n, k, t, q, r, k * t, value, rp, multiplier_bound(n, r, q) if ok else None, ok)


def bounds_table(q: int, t: int, k: int, r_max: Optional[int] = None) -> list[BoundReport]:
    """One report per r in [1, min(r_max, n-k)] for the full-length code over GF(q^t)."""
    n = q**t
    if not 1 <= k < n:
        raise UsageError(f"need 1 <= k < n={n}, got k={k}")
    top = n - k if r_max is None else min(r_max, n - k)
    best, arg = _suffix_argmin(_subspace_values(n, k, t, q))
    out = []
    for r in range(1, top + 1):
        ok = _multiplier_applies(n, k, t, q, r)
        out.append(
            BoundReport(
                n, k, t, q, r, k * t, int(best[r - 1]), int(arg[r - 1]) + 1,
                multiplier_bound(n, r, q) if ok else None, ok,
            )
        )
    return out
