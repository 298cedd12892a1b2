"""Reed-Solomon codes, their generalized Reed-Solomon duals, and an erasure decoder.

Messages are coefficient vectors: ``m`` encodes to the evaluations of
``f(X) = sum(m[i] X^i)`` at the evaluation points. Codeword positions are
1-indexed in every public API, matching the failed-set convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from rsrepair import kernels
from rsrepair.errors import UnrecoverableError, UsageError
from rsrepair.fields import FieldTower


def dual_multipliers(tower: FieldTower, alphas: Sequence[int]) -> tuple[int, ...]:
    """lambda_j = (prod_{i != j} (alpha_j - alpha_i))^-1."""
    xs = [int(a) for a in alphas]
    if not tower.has_tables:
        out = []
        for j, aj in enumerate(xs):
            prod = 1
            for i, ai in enumerate(xs):
                if i != j:
                    prod = tower.mul(prod, aj ^ ai)
            out.append(tower.inv(prod))
        return tuple(out)
    arr = np.array(xs, dtype=np.int64)
    logs = np.zeros(len(xs), dtype=np.int64)
    chunk = max(1, 2**22 // max(1, len(xs)))
    for start in range(0, len(xs), chunk):
        block = arr[start : start + chunk, None] ^ arr[None, :]
        # the diagonal is zero; log[0] == 0 so it drops out of the sum
        logs[start : start + chunk] = (tower.log[block].sum(axis=1)) % tower.order
    return tuple(int(v) for v in tower.exp[(tower.order - logs) % tower.order])


@dataclass(frozen=True)
class RSCode:
    """A Reed-Solomon code of dimension k with evaluation points ``alphas``."""

    tower: FieldTower
    alphas: tuple[int, ...]
    k: int
    lambdas: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.alphas)

    @property
    def full_length(self) -> bool:
        return self.n == self.tower.size

    def alpha(self, i: int) -> int:
        """Evaluation point of 1-indexed position i."""
        return self.alphas[i - 1]

    @cached_property
    def alpha_array(self) -> np.ndarray:
        arr = np.array(self.alphas, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def lambda_array(self) -> np.ndarray:
        arr = np.array(self.lambdas, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    def describe(self) -> dict:
        return {
            "q": self.tower.q,
            "t": self.tower.t,
            "modulus": self.tower.modulus_hex,
            "n": self.n,
            "k": self.k,
            "full_length": self.full_length,
        }


def make_code(tower: FieldTower, alphas: Iterable[int], k: int) -> RSCode:
    alphas = tuple(int(a) for a in alphas)
    n = len(alphas)
    if len(set(alphas)) != n:
        raise UsageError("evaluation points must be distinct")
    if any(not 0 <= a < tower.size for a in alphas):
        raise UsageError("evaluation point outside the field")
    if not 1 <= k < n:
        raise UsageError(f"need 1 <= k < n, got k={k}, n={n}")
    return RSCode(tower, alphas, k, dual_multipliers(tower, alphas))


def full_length_code(tower: FieldTower, k: Optional[int] = None) -> RSCode:
    """The code on all of F, points in ascending code order; k defaults to n - n/q."""
    n = tower.size
    if k is None:
        k = n - n // tower.q
    return make_code(tower, range(n), k)


def _check_message(code: RSCode, message: Sequence[int]) -> None:
    if len(message) != code.k:
        raise UsageError(f"message has length {len(message)}, expected k={code.k}")


def evaluate_poly(tower: FieldTower, coeffs: Sequence[int], xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.int64)
    if not len(coeffs):
        return np.zeros(xs.shape[0], dtype=np.int64)
    c = np.ascontiguousarray(coeffs, dtype=np.int64)
    if tower.has_tables:
        return kernels.horner(c, xs, tower.log, tower.exp, tower.order)
    out = []
    for x in xs.tolist():
        acc = 0
        for a in reversed(c.tolist()):
            acc = tower.mul(acc, x) ^ a
        out.append(acc)
    return np.array(out, dtype=np.int64)


def encode(code: RSCode, message: Sequence[int]) -> tuple[int, ...]:
    _check_message(code, message)
    return tuple(int(v) for v in evaluate_poly(code.tower, message, code.alpha_array))


def encode_many(code: RSCode, messages) -> np.ndarray:
    """Encode each row of an (N, k) array of messages; returns (N, n) codes."""
    msgs = np.asarray(messages, dtype=np.int64)
    if msgs.ndim != 2 or msgs.shape[1] != code.k:
        raise UsageError(f"messages must have shape (N, {code.k})")
    out = np.zeros((msgs.shape[0], code.n), dtype=np.int64)
    for row in range(msgs.shape[0]):
        out[row] = evaluate_poly(code.tower, msgs[row], code.alpha_array)
    return out


def random_messages(code: RSCode, count: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(0, code.tower.size, size=(count, code.k), dtype=np.int64)


# -- dual code ---------------------------------------------------------------------------


def generator_inner_products(code: RSCode, v: Sequence[int]) -> np.ndarray:
    """<v, (alpha_j^d)_j> for d = 0..k-1: the inner products with a generator basis."""
    if len(v) != code.n:
        raise UsageError(f"vector has length {len(v)}, expected n={code.n}")
    f = code.tower
    if f.has_tables:
        return kernels.power_sums(np.asarray(v, dtype=np.int64), code.alpha_array, code.k, f.log, f.exp, f.order)
    out = np.zeros(code.k, dtype=np.int64)
    for vj, aj in zip(v, code.alphas):
        term = int(vj)
        for d in range(code.k):
            out[d] ^= term
            term = f.mul(term, aj)
    return out


def is_dual_codeword(code: RSCode, v: Sequence[int]) -> bool:
    """True iff v is orthogonal to every codeword."""
    return not np.any(generator_inner_products(code, v))


def interpolate(tower: FieldTower, xs: Sequence[int], ys: Sequence[int]) -> list[int]:
    """Coefficients (lowest first, trailing zeros trimmed) of the unique polynomial of
    degree < len(xs) through the points (xs[i], ys[i]). Newton divided differences."""
    xs = [int(x) for x in xs]
    coef = [int(y) for y in ys]
    m = len(xs)
    if len(set(xs)) != m:
        raise UsageError("interpolation nodes must be distinct")
    for j in range(1, m):
        for i in range(m - 1, j - 1, -1):
            coef[i] = tower.div(coef[i] ^ coef[i - 1], xs[i] ^ xs[i - j])
    poly = [coef[m - 1]] if m else []
    for i in range(m - 2, -1, -1):
        # poly = poly * (X - xs[i]) + coef[i]
        nxt = [0] * (len(poly) + 1)
        for d, c in enumerate(poly):
            nxt[d + 1] ^= c
            nxt[d] ^= tower.mul(c, xs[i])
        nxt[0] ^= coef[i]
        poly = nxt
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def dual_degree(code: RSCode, v: Sequence[int]) -> int:
    """Degree of the polynomial g with v_j = lambda_j g(alpha_j); -1 for v = 0."""
    if len(v) != code.n:
        raise UsageError(f"vector has length {len(v)}, expected n={code.n}")
    f = code.tower
    ys = [f.div(int(vj), lam) for vj, lam in zip(v, code.lambdas)]
    return len(interpolate(f, code.alphas, ys)) - 1


def is_dual_by_degree(code: RSCode, v: Sequence[int]) -> bool:
    return dual_degree(code, v) < code.n - code.k


# -- erasures ------------------------------------------------------------------------------


@dataclass(frozen=True)
class ErasurePattern:
    """A sorted set of erased 1-indexed positions."""

    erased: tuple[int, ...]

    @classmethod
    def of(cls, code: RSCode, indices: Iterable[int], *, limit: bool = True) -> "ErasurePattern":
        erased = tuple(sorted({int(i) for i in indices}))
        if any(not 1 <= i <= code.n for i in erased):
            raise UsageError(f"erased indices must lie in [1, {code.n}]")
        if limit and len(erased) > code.n - code.k:
            raise UnrecoverableError(f"{len(erased)} erasures exceed n - k = {code.n - code.k}")
        return cls(erased)

    @property
    def r(self) -> int:
        return len(self.erased)

    def to_json(self) -> list[int]:
        return list(self.erased)


class ErasureDecoder:
    """Lagrange interpolation from the first k surviving positions, precomputed for one pattern."""

    def __init__(self, code: RSCode, erased: Iterable[int], targets: Optional[Iterable[int]] = None):
        pattern = ErasurePattern.of(code, erased)
        self.code = code
        self.erased = pattern.erased
        gone = set(self.erased)
        self.survivors = tuple(j for j in range(1, code.n + 1) if j not in gone)[: code.k]
        self.targets = self.erased if targets is None else tuple(targets)
        f = code.tower
        xs = [code.alpha(s) for s in self.survivors]
        denom = []
        for a, xa in enumerate(xs):
            prod = 1
            for b, xb in enumerate(xs):
                if a != b:
                    prod = f.mul(prod, xa ^ xb)
            denom.append(prod)
        weights = np.zeros((len(self.targets), len(xs)), dtype=np.int64)
        for e, target in enumerate(self.targets):
            xe = code.alpha(target)
            if xe in xs:
                weights[e, xs.index(xe)] = 1
                continue
            full = 1
            for xb in xs:
                full = f.mul(full, xe ^ xb)
            for a, xa in enumerate(xs):
                weights[e, a] = f.div(full, f.mul(xe ^ xa, denom[a]))
        self.weights = weights

    def decode_many(self, words) -> np.ndarray:
        """Values at ``targets`` for each row of an (N, n) array; erased entries are ignored."""
        w = np.asarray(words, dtype=np.int64)
        surv = w[:, [s - 1 for s in self.survivors]]
        terms = self.code.tower.mul_arr(surv[:, None, :], self.weights[None, :, :])
        return np.bitwise_xor.reduce(terms, axis=2) if terms.shape[2] else np.zeros(terms.shape[:2], np.int64)


def erasure_decoder(code: RSCode, erased: Iterable[int]) -> ErasureDecoder:
    return ErasureDecoder(code, erased)


def erasure_decode(code: RSCode, word: Sequence[Optional[int]]) -> tuple[int, ...]:
    """Fill the ``None`` entries of ``word`` from any k surviving symbols."""
    if len(word) != code.n:
        raise UsageError(f"word has length {len(word)}, expected n={code.n}")
    erased = [j for j in range(1, code.n + 1) if word[j - 1] is None]
    dec = ErasureDecoder(code, erased, targets=range(1, code.n + 1))
    filled = np.array([[0 if x is None else int(x) for x in word]], dtype=np.int64)
    full = dec.decode_many(filled)[0]
    for j in range(1, code.n + 1):
        if word[j - 1] is not None and int(word[j - 1]) != int(full[j - 1]):
            raise UsageError(f"surviving symbol at position {j} is inconsistent with every codeword")
    return tuple(int(v) for v in full)


def codeword_to_json(tower: FieldTower, word: Sequence[int]) -> list[str]:
    return [tower.hex(int(c)) for c in word]


def codeword_from_json(tower: FieldTower, items: Sequence[str]) -> tuple[int, ...]:
    return tuple(tower.parse_hex(s) for s in items)
