"""Finite-field towers GF(q) < GF(q^t) in characteristic 2.

Elements of the extension field F are plain integer codes: the coordinates
d_0, ..., d_{t-1} over the base field B = GF(q) in the polynomial basis
1, a, ..., a^(t-1) are packed as ``sum(d_m * q**m)``. Elements of B are the
codes below q, so B sits inside F as the constant polynomials. Because every
supported q is a power of two, addition and subtraction of codes are XOR.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib import resources
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from rsrepair import kernels
from rsrepair.errors import DomainError, ReducibleModulusError, UsageError

# GF(q) itself is GF(2)[x]/(m(x)); these are the base-field moduli as bit masks.
BASE_MODULI = {2: 0b11, 4: 0b111, 16: 0b10011}
TABLE_LIMIT_BITS = 16
MAX_FIELD_BITS = 20


def _clmul_mod(a: int, b: int, mod: int, deg: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> deg) & 1:
            a ^= mod
    return r


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


class BaseField:
    """The base field B = GF(q), q in {2, 4, 16}, with full multiplication tables."""

    def __init__(self, q: int):
        if q not in BASE_MODULI:
            raise UsageError(f"unsupported base field order {q}; expected one of {sorted(BASE_MODULI)}")
        self.q = q
        self.bits = q.bit_length() - 1
        mod = BASE_MODULI[q]
        rows = [[_clmul_mod(a, b, mod, self.bits) for b in range(q)] for a in range(q)]
        inv = [0] * q
        for a in range(1, q):
            inv[a] = rows[a].index(1)
        self._mul = rows
        self._inv = inv
        self.mul_table = np.array(rows, dtype=np.int64)
        self.inv_table = np.array(inv, dtype=np.int64)
        self.mul_table.setflags(write=False)
        self.inv_table.setflags(write=False)

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("inverse of zero in the base field")
        return self._inv[a]

    def __repr__(self) -> str:
        return f"BaseField(q={self.q})"


@lru_cache(maxsize=None)
def base_field(q: int) -> BaseField:
    return BaseField(q)


def _poly_rem(a: list[int], b: list[int], base: BaseField) -> list[int]:
    """Remainder of a by the monic b; coefficient lists lowest degree first."""
    a = list(a)
    db = len(b) - 1
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            for j in range(db + 1):
                a[i - db + j] ^= base.mul(c, b[j])
    return a[:db]


def is_irreducible(q: int, modulus: Sequence[int]) -> bool:
    """Trial division of a monic polynomial over GF(q) by every monic divisor of degree <= t/2."""
    base = base_field(q)
    t = len(modulus) - 1
    if t < 1:
        return False
    if t == 1:
        return True
    if modulus[0] == 0:
        return False
    for d in range(1, t // 2 + 1):
        for lower in product(range(q), repeat=d):
            if not any(_poly_rem(list(modulus), list(lower) + [1], base)):
                return False
    return True


def modulus_from_hex(q: int, t: int, text: str) -> tuple[int, ...]:
    code = int(text, 16)
    bits = q.bit_length() - 1
    return tuple((code >> (m * bits)) & (q - 1) for m in range(t + 1))


def modulus_to_hex(q: int, modulus: Sequence[int]) -> str:
    bits = q.bit_length() - 1
    return format(sum(c << (m * bits) for m, c in enumerate(modulus)), "x")


class FieldTower:
    """The pair B = GF(q) inside F = GF(q^t) = B[x]/(modulus).

    ``modulus`` is the list of t+1 coefficients over B, lowest degree first,
    and must be monic and irreducible. The basis is the polynomial basis
    1, a, ..., a^(t-1), i.e. the codes q**0, ..., q**(t-1).
    """

    def __init__(self, q: int, t: int, modulus: Sequence[int], *, verify: bool = True, tables: bool = True):
        base = base_field(q)
        if t < 1 or q**t > 2**MAX_FIELD_BITS:
            raise UsageError(f"unsupported tower GF({q}^{t}); need 1 <= t and q^t <= 2^{MAX_FIELD_BITS}")
        modulus = tuple(int(c) for c in modulus)
        if len(modulus) != t + 1 or modulus[-1] != 1 or any(not 0 <= c < q for c in modulus):
            raise UsageError(f"modulus must be a monic degree-{t} polynomial over GF({q})")
        if verify and not is_irreducible(q, modulus):
            raise ReducibleModulusError(f"modulus {modulus_to_hex(q, modulus)} is reducible over GF({q})")
        self.base = base
        self.q = q
        self.t = t
        self.modulus = modulus
        self.bits = base.bits
        self.size = q**t
        self.order = self.size - 1
        self.width = t * self.bits
        self.hex_width = max(1, -(-self.width // 4))
        self._mask = self.size - 1
        tail = sum(c << (m * self.bits) for m, c in enumerate(modulus[:t]))
        self._tail_scaled = [self._scale(d, tail) for d in range(q)]
        self.basis = tuple(1 << (m * self.bits) for m in range(t))
        self._exp = None
        self._log = None
        self.exp = None
        self.log = None
        if tables and self.width <= TABLE_LIMIT_BITS:
            self._build_tables()
        self._tr_basis = tuple(self.trace_frobenius(z) for z in self.basis)

    # -- construction helpers ------------------------------------------------

    def _scale(self, d: int, code: int) -> int:
        """Multiply every coordinate of ``code`` by the base element ``d``."""
        if d == 0:
            return 0
        if d == 1:
            return code
        out = 0
        mul = self.base._mul[d]
        for m in range(self.t):
            out |= mul[(code >> (m * self.bits)) & (self.q - 1)] << (m * self.bits)
        return out

    def _mul_x(self, code: int) -> int:
        s = code << self.bits
        return (s & self._mask) ^ self._tail_scaled[s >> self.width]

    def _mul_slow(self, a: int, b: int) -> int:
        r = 0
        for m in range(self.t - 1, -1, -1):
            r = self._mul_x(r)
            d = (b >> (m * self.bits)) & (self.q - 1)
            if d:
                r ^= self._scale(d, a)
        return r

    def _pow_slow(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self._mul_slow(result, a)
            a = self._mul_slow(a, a)
            e >>= 1
        return result

    def _find_generator(self) -> int:
        if self.order == 1:
            return 1
        factors = _prime_factors(self.order)
        x = self._mul_x(1)
        for g in [x] + list(range(2, self.size)):
            if all(self._pow_slow(g, self.order // p) != 1 for p in factors):
                return g
        raise UsageError("no generator found; modulus is not irreducible")

    def _build_tables(self) -> None:
        g = self._find_generator()
        step = self._mul_x if g == self._mul_x(1) else (lambda y: self._mul_slow(y, g))
        exp = [0] * (2 * self.order)
        x = 1
        for e in range(self.order):
            exp[e] = x
            x = step(x)
        exp[self.order :] = exp[: self.order]
        log = [0] * self.size
        for e in range(self.order):
            log[exp[e]] = e
        self._exp = exp
        self._log = log
        self.exp = np.array(exp, dtype=np.int64)
        self.log = np.array(log, dtype=np.int64)
        self.exp.setflags(write=False)
        self.log.setflags(write=False)
        self.generator = g

    # -- identity --------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldTower):
            return NotImplemented
        return (self.q, self.t, self.modulus) == (other.q, other.t, other.modulus)

    def __hash__(self) -> int:
        return hash((self.q, self.t, self.modulus))

    def __repr__(self) -> str:
        return f"FieldTower(q={self.q}, t={self.t}, modulus=0x{self.modulus_hex})"

    @property
    def modulus_hex(self) -> str:
        return modulus_to_hex(self.q, self.modulus)

    @property
    def has_tables(self) -> bool:
        return self._exp is not None

    def __call__(self, code: int) -> "FieldElement":
        return FieldElement(self, code)

    def elements(self) -> range:
        return range(self.size)

    def is_base(self, a: int) -> bool:
        return 0 <= a < self.q

    # -- scalar arithmetic on codes ----------------------------------------------

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    sub = add

    @staticmethod
    def neg(a: int) -> int:
        return a

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self._exp is not None:
            return self._exp[self._log[a] + self._log[b]]
        return self._mul_slow(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("inverse of zero")
        if self._exp is not None:
            return self._exp[self.order - self._log[a]]
        return self._pow_slow(a, self.order - 1)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise DomainError("negative power of zero")
            return 1 if e == 0 else 0
        if self._exp is not None:
            return self._exp[(self._log[a] * e) % self.order]
        return self._pow_slow(a, e % self.order)

    def frobenius(self, a: int, m: int = 1) -> int:
        """a ** (q ** m)."""
        for _ in range(m):
            a = self.pow(a, self.q)
        return a

    def trace_frobenius(self, a: int) -> int:
        """tr(a) as the literal sum of the t Frobenius conjugates of a."""
        acc = 0
        for _ in range(self.t):
            acc ^= a
            a = self.pow(a, self.q)
        return acc

    def trace(self, a: int) -> int:
        """tr_{F/B}(a), via the table or the B-linear form on coordinates."""
        if self.has_tables:
            return self._trace_list[a]
        acc = 0
        for m, tz in enumerate(self._tr_basis):
            d = (a >> (m * self.bits)) & (self.q - 1)
            if d:
                acc ^= self.base._mul[d][tz]
        return acc

    # -- coordinates and serialization ---------------------------------------------

    def coords(self, a: int) -> tuple[int, ...]:
        return tuple((a >> (m * self.bits)) & (self.q - 1) for m in range(self.t))

    def from_coords(self, coords: Sequence[int]) -> int:
        if len(coords) != self.t:
            raise UsageError(f"expected {self.t} coordinates, got {len(coords)}")
        code = 0
        for m, d in enumerate(coords):
            if not 0 <= d < self.q:
                raise UsageError(f"coordinate {d} is not in GF({self.q})")
            code |= int(d) << (m * self.bits)
        return code

    def hex(self, a: int) -> str:
        return format(a, f"0{self.hex_width}x")

    def base_hex(self, b: int) -> str:
        return format(b, f"0{max(1, -(-self.bits // 4))}x")

    def parse_hex(self, text: str) -> int:
        code = int(text, 16)
        if not 0 <= code < self.size:
            raise UsageError(f"{text!r} is not an element of GF({self.q}^{self.t})")
        return code

    # -- vectorized helpers ----------------------------------------------------------

    @cached_property
    def trace_table(self) -> np.ndarray:
        codes = np.arange(self.size, dtype=np.int64)
        acc = np.zeros(self.size, dtype=np.int64)
        for m, tz in enumerate(self._tr_basis):
            digits = (codes >> (m * self.bits)) & (self.q - 1)
            acc ^= self.base.mul_table[digits, tz]
        acc.setflags(write=False)
        return acc

    @cached_property
    def _trace_list(self) -> list[int]:
        return self.trace_table.tolist()

    def _require_tables(self) -> None:
        if not self.has_tables:
            raise UsageError(
                f"vectorized arithmetic needs log tables; GF({self.q}^{self.t}) exceeds 2^{TABLE_LIMIT_BITS}"
            )

    def mul_arr(self, a, b) -> np.ndarray:
        """Elementwise product of broadcastable code arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if not self.has_tables:
            return np.vectorize(self.mul, otypes=[np.int64])(a, b)
        out = self.exp[self.log[a] + self.log[b]]
        return np.where((a == 0) | (b == 0), 0, out)

    def inv_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise DomainError("inverse of zero")
        if not self.has_tables:
            return np.vectorize(self.inv, otypes=[np.int64])(a)
        return self.exp[self.order - self.log[a]]

    def pow_arr(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if not self.has_tables:
            return np.vectorize(lambda x: self.pow(int(x), e), otypes=[np.int64])(a)
        out = self.exp[(self.log[a] * e) % self.order]
        if e == 0:
            return np.ones_like(a)
        return np.where(a == 0, 0, out)

    def trace_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if not self.has_tables:
            return np.vectorize(self.trace, otypes=[np.int64])(a)
        return self.trace_table[a]

    def coord_matrix(self, elems) -> np.ndarray:
        """t x N matrix over B whose columns are the coordinates of ``elems``."""
        arr = np.asarray(elems, dtype=np.int64).reshape(-1)
        shifts = (np.arange(self.t, dtype=np.int64) * self.bits)[:, None]
        return np.ascontiguousarray((arr[None, :] >> shifts) & (self.q - 1))

    def from_coord_matrix(self, mat: np.ndarray) -> np.ndarray:
        """Inverse of ``coord_matrix``: pack each length-t column into a code."""
        shifts = (np.arange(self.t, dtype=np.int64) * self.bits)[:, None]
        return np.bitwise_or.reduce(np.asarray(mat, dtype=np.int64) << shifts, axis=0)

    # -- linear algebra over B ----------------------------------------------------------

    def span_dim(self, elems: Iterable[int]) -> int:
        """dim_B span_B(elems)."""
        arr = np.fromiter((int(e) for e in elems), dtype=np.int64)
        if arr.size == 0:
            return 0
        if self.q == 2:
            return kernels.xor_rank(arr)
        return len(kernels.rref(self.coord_matrix(arr), self.base.mul_table, self.base.inv_table))

    def span_elements(self, gens: Sequence[int]) -> set[int]:
        """Brute-force enumeration of span_B(gens)."""
        out = {0}
        for g in gens:
            out = {x ^ self.mul(b, g) for x in out for b in range(self.q)}
        return out

    # -- cosets of B* --------------------------------------------------------------------

    @cached_property
    def coset_table(self) -> np.ndarray:
        """coset_table[x] = smallest code in x B*; entry 0 is unused (-1)."""
        self._require_tables()
        stride = self.order // (self.q - 1)
        # column a holds the coset {g^(a + i*stride)}
        reps = self.exp[: self.order].reshape(self.q - 1, stride).min(axis=0)
        table = np.full(self.size, -1, dtype=np.int64)
        nz = np.arange(1, self.size)
        table[nz] = reps[self.log[nz] % stride]
        table.setflags(write=False)
        return table

    def coset_id(self, x: int) -> int:
        """Canonical representative (minimal code) of the multiplicative coset x B*."""
        if x == 0:
            raise DomainError("zero has no multiplicative coset")
        if self.has_tables:
            return int(self.coset_table[x])
        return min(self.mul(x, b) for b in range(1, self.q))


class FieldElement:
    """An element of a ``FieldTower``, with operator overloads.

    Library internals work on raw integer codes; this wrapper exists for
    interactive use and for catching mixed-tower mistakes.
    """

    __slots__ = ("tower", "code")

    def __init__(self, tower: FieldTower, code: int):
        code = int(code)
        if not 0 <= code < tower.size:
            raise UsageError(f"code {code} out of range for GF({tower.q}^{tower.t})")
        self.tower = tower
        self.code = code

    def _code_of(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.tower != self.tower:
                raise UsageError("operands belong to different field towers")
            return other.code
        if isinstance(other, (int, np.integer)):
            return FieldElement(self.tower, int(other)).code
        return NotImplemented

    def _wrap(self, code: int) -> "FieldElement":
        return FieldElement(self.tower, code)

    def __add__(self, other):
        c = self._code_of(other)
        return self._wrap(self.code ^ c) if c is not NotImplemented else c

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __neg__(self):
        return self

    def __mul__(self, other):
        c = self._code_of(other)
        return self._wrap(self.tower.mul(self.code, c)) if c is not NotImplemented else c

    __rmul__ = __mul__

    def __truediv__(self, other):
        c = self._code_of(other)
        return self._wrap(self.tower.div(self.code, c)) if c is not NotImplemented else c

    def __rtruediv__(self, other):
        c = self._code_of(other)
        return self._wrap(self.tower.div(c, self.code)) if c is not NotImplemented else c

    def __pow__(self, e: int):
        return self._wrap(self.tower.pow(self.code, e))

    def inverse(self) -> "FieldElement":
        return self._wrap(self.tower.inv(self.code))

    def trace(self) -> "FieldElement":
        return self._wrap(self.tower.trace(self.code))

    def coords(self) -> tuple[int, ...]:
        return self.tower.coords(self.code)

    def hex(self) -> str:
        return self.tower.hex(self.code)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.tower == other.tower and self.code == other.code
        if isinstance(other, (int, np.integer)):
            return self.code == int(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.tower, self.code))

    def __int__(self) -> int:
        return self.code

    def __bool__(self) -> bool:
        return self.code != 0

    def __repr__(self) -> str:
        return f"<GF({self.tower.q}^{self.tower.t}) 0x{self.hex()}>"


@dataclass(frozen=True)
class BaseMatrix:
    """A dense matrix over the base field B."""

    field: BaseField
    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.int64, ndmin=2)
        if arr.ndim != 2:
            raise UsageError("BaseMatrix needs a 2-D array")
        if arr.size and (arr.min() < 0 or arr.max() >= self.field.q):
            raise UsageError(f"entries must lie in GF({self.field.q})")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def _reduced(self, extra: np.ndarray | None = None) -> tuple[np.ndarray, list[int]]:
        a = self.entries if extra is None else np.hstack([self.entries, extra])
        a = np.array(a, dtype=np.int64, order="C")
        pivots = kernels.rref(a, self.field.mul_table, self.field.inv_table, self.shape[1])
        return a, pivots

    def rank(self) -> int:
        if 0 in self.shape:
            return 0
        return len(self._reduced()[1])

    def solve(self, rhs) -> np.ndarray | None:
        """Any x with A x = rhs, or None when inconsistent.

        ``rhs`` may be a vector or a matrix of column right-hand sides; the
        result has the matching shape.
        """
        b = np.asarray(rhs, dtype=np.int64)
        vector = b.ndim == 1
        b2 = b.reshape(-1, 1) if vector else b
        if b2.shape[0] != self.shape[0]:
            raise UsageError(f"rhs has {b2.shape[0]} rows, matrix has {self.shape[0]}")
        red, pivots = self._reduced(b2)
        rank = len(pivots)
        n = self.shape[1]
        if np.any(red[rank:, n:]):
            return None
        x = np.zeros((n, b2.shape[1]), dtype=np.int64)
        for i, c in enumerate(pivots):
            x[c] = red[i, n:]
        return x[:, 0] if vector else x

    def nullspace(self) -> np.ndarray:
        """Rows form a basis of {x : A x = 0}."""
        rows, n = self.shape
        red, pivots = self._reduced()
        free = [c for c in range(n) if c not in set(pivots)]
        basis = np.zeros((len(free), n), dtype=np.int64)
        for k, f in enumerate(free):
            basis[k, f] = 1
            for i, c in enumerate(pivots):
                basis[k, c] = red[i, f]  # -R[i, f] in characteristic 2
        return basis


def base_rank(m: BaseMatrix) -> int:
    return m.rank()


def base_solve(m: BaseMatrix, rhs) -> np.ndarray | None:
    return m.solve(rhs)


@dataclass(frozen=True)
class LinearizedPolynomial:
    """L(X) = sum_m coeffs[m] * X^(q^m), a B-linear map F -> F."""

    tower: FieldTower
    coeffs: tuple[int, ...]

    @property
    def s(self) -> int:
        return len(self.coeffs) - 1

    @property
    def degree(self) -> int:
        return self.tower.q**self.s

    def __call__(self, x: int) -> int:
        f = self.tower
        acc = 0
        for c in self.coeffs:
            acc ^= f.mul(c, x)
            x = f.pow(x, f.q)
        return acc

    def evaluate_many(self, xs) -> np.ndarray:
        f = self.tower
        x = np.asarray(xs, dtype=np.int64)
        acc = np.zeros_like(x)
        for c in self.coeffs:
            acc ^= f.mul_arr(c, x)
            x = f.pow_arr(x, f.q)
        return acc

    def expanded(self) -> list[int]:
        """Ordinary coefficient list (lowest degree first) of L as a polynomial in X."""
        out = [0] * (self.degree + 1)
        for m, c in enumerate(self.coeffs):
            out[self.tower.q**m] = c
        return out


def subspace_polynomial(tower: FieldTower, w_basis: Sequence[int]) -> LinearizedPolynomial:
    """The subspace polynomial prod_{w in W}(X - w) of W = span_B(w_basis), in linearized form.

    Built one generator at a time: adjoining beta maps L to
    L^q - L(beta)^(q-1) L.
    """
    w_basis = [int(w) for w in w_basis]
    if tower.span_dim(w_basis) != len(w_basis):
        raise UsageError("subspace basis is not linearly independent over B")
    q = tower.q
    coeffs = [1]
    for beta in w_basis:
        lw = LinearizedPolynomial(tower, tuple(coeffs))
        v = tower.pow(lw(beta), q - 1)
        nxt = [0] * (len(coeffs) + 1)
        for m, c in enumerate(coeffs):
            nxt[m] ^= tower.mul(v, c)
            nxt[m + 1] ^= tower.pow(c, q)
        coeffs = nxt
    return LinearizedPolynomial(tower, tuple(coeffs))


def eval_linearized(poly: LinearizedPolynomial, x: int) -> int:
    return poly(x)


def coset_id(tower: FieldTower, x: int) -> int:
    return tower.coset_id(x)


# -- the shipped field table -----------------------------------------------------------


def load_field_table(path: str | None = None) -> dict[tuple[int, int], tuple[int, ...]]:
    """Read ``{(q, t): modulus}`` from a field-table JSON file (the packaged one by default)."""
    if path is None:
        text = resources.files("rsrepair").joinpath("field_table.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    table = {}
    for rec in json.loads(text)["fields"]:
        q, t = int(rec["q"]), int(rec["t"])
        table[(q, t)] = modulus_from_hex(q, t, rec["modulus"])
    return table


@lru_cache(maxsize=None)
def get_tower(q: int, t: int, table_path: str | None = None) -> FieldTower:
    """The tower for (q, t) using the modulus recorded in the field table."""
    table = load_field_table(table_path)
    if (q, t) not in table:
        raise UsageError(f"no field-table entry for q={q}, t={t}")
    return FieldTower(q, t, table[(q, t)])
