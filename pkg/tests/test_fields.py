import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from reference import ext_mul, ext_pow
from rsrepair.errors import DomainError, ReducibleModulusError, UsageError
from rsrepair.fields import (
    BaseMatrix,
    FieldTower,
    base_rank,
    base_solve,
    coset_id,
    eval_linearized,
    get_tower,
    is_irreducible,
    load_field_table,
    modulus_from_hex,
    modulus_to_hex,
    subspace_polynomial,
)

SMALL = [(2, 1), (2, 2), (2, 3), (2, 4), (4, 1), (4, 2), (16, 1), (2, 6), (4, 3), (16, 2)]


# -- arithmetic against the naive oracle ------------------------------------------------------


@pytest.mark.parametrize("q,t", SMALL)
def test_mul_matches_schoolbook(q, t):
    f = get_tower(q, t)
    xs = range(f.size) if f.size <= 64 else range(0, f.size, 7)
    for a in xs:
        for b in xs:
            assert f.mul(a, b) == ext_mul(q, t, f.modulus, a, b)


@pytest.mark.parametrize("q,t", [(2, 17), (4, 9), (16, 5)])
def test_slow_path_matches_oracle(q, t, rng):
    f = get_tower(q, t)
    assert not f.has_tables
    for a, b in rng.integers(0, f.size, (200, 2)):
        assert f.mul(int(a), int(b)) == ext_mul(q, t, f.modulus, int(a), int(b))


def test_tables_and_slow_path_agree(rng):
    g = get_tower(2, 12)
    slow = FieldTower(2, 12, g.modulus, tables=False)
    for a, b in rng.integers(0, g.size, (500, 2)):
        a, b = int(a), int(b)
        assert g.mul(a, b) == slow.mul(a, b)
        if a:
            assert g.inv(a) == slow.inv(a)
        assert g.trace(a) == slow.trace(a)


def test_gf4_examples(gf4):
    w = 2  # residue of x
    assert gf4.add(1, 1) == 0
    assert gf4.mul(w, w) == w ^ 1
    assert gf4.trace(w) == 1
    assert gf4.trace(0) == 0


def test_exhaustive_inverse_gf16(gf16):
    for x in range(1, 16):
        assert gf16.mul(x, gf16.inv(x)) == 1


def test_inverse_of_zero_raises(gf16):
    with pytest.raises(DomainError):
        gf16.inv(0)
    with pytest.raises(DomainError):
        gf16.inv_arr([1, 0])
    with pytest.raises(DomainError):
        gf16(0).inverse()


def test_pow_against_repeated_mul(gf16):
    for a in range(16):
        for e in range(0, 20):
            assert gf16.pow(a, e) == ext_pow(2, 4, gf16.modulus, a, e)


def test_field_element_operators(gf16, gf4):
    a, b = gf16(7), gf16(9)
    assert (a + b).code == 7 ^ 9
    assert a - b == a + b
    assert (a * b).code == gf16.mul(7, 9)
    assert (a / b) * b == a
    assert a * a.inverse() == 1
    assert a**15 == 1
    assert -a == a
    assert int(a.trace()) in (0, 1)
    assert not gf16(0)
    with pytest.raises(UsageError):
        a + gf4(1)
    with pytest.raises(UsageError):
        gf16(16)


@pytest.mark.parametrize("q,t", SMALL)
def test_trace_properties(q, t):
    f = get_tower(q, t)
    tr = [f.trace(x) for x in range(f.size)]
    assert all(0 <= v < q for v in tr)
    assert set(tr) == set(range(q))  # onto B
    for x in range(f.size):
        assert tr[x] == f.trace_frobenius(x)
        assert tr[f.pow(x, q)] == tr[x]
    # B-linear
    for a, x, y in itertools.islice(itertools.product(range(q), range(f.size), range(f.size)), 3000):
        assert f.trace(f.mul(a, x) ^ y) == f.mul(a, tr[x]) ^ tr[y]


def test_trace_vectorized(gf256):
    xs = np.arange(256)
    assert np.array_equal(gf256.trace_arr(xs), [gf256.trace_frobenius(int(x)) for x in xs])


@pytest.mark.parametrize("q,t", SMALL)
def test_coords_round_trip(q, t):
    f = get_tower(q, t)
    for x in range(f.size):
        assert f.from_coords(f.coords(x)) == x
    mat = f.coord_matrix(np.arange(f.size))
    assert np.array_equal(f.from_coord_matrix(mat), np.arange(f.size))


def test_hex_serialization(gf256):
    assert gf256.hex(0) == "00"
    assert gf256.hex(0xAB) == "ab"
    assert gf256.parse_hex("ab") == 0xAB
    with pytest.raises(UsageError):
        gf256.parse_hex("1ff")


def test_basis_is_polynomial_basis():
    f = get_tower(4, 3)
    assert f.basis == (1, 4, 16)
    assert f.span_dim(f.basis) == 3
    assert f.mul(f.basis[1], f.basis[1]) == f.basis[2]


# -- span and base-field linear algebra -------------------------------------------------------


def test_span_dim_examples(gf4, gf16):
    assert gf16.span_dim([0]) == 0
    assert gf16.span_dim([]) == 0
    assert gf16.span_dim(gf16.basis) == 4
    assert gf4.span_dim([1, 2, 3]) == 2


@given(st.lists(st.integers(0, 63), max_size=6))
def test_span_dim_matches_enumeration_gf64(gens):
    f = get_tower(2, 6)
    span = f.span_elements(gens)
    assert len(span) == 2 ** f.span_dim(gens)


@given(st.lists(st.integers(0, 255), max_size=4))
def test_span_dim_matches_enumeration_gf16_over_gf4(gens):
    f = get_tower(4, 4)
    span = f.span_elements(gens)
    assert len(span) == 4 ** f.span_dim(gens)


def test_base_rank_examples():
    gf2 = get_tower(2, 1).base
    assert base_rank(BaseMatrix(gf2, np.eye(4, dtype=int))) == 4
    assert base_rank(BaseMatrix(gf2, np.zeros((3, 5), dtype=int))) == 0
    assert base_rank(BaseMatrix(gf2, [[1, 0, 1], [1, 0, 1], [0, 1, 1]])) <= 2
    with pytest.raises(UsageError):
        BaseMatrix(gf2, [[2]])


@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_base_solve_gf4(rows, cols, data):
    b4 = get_tower(4, 1).base
    a = np.array(data.draw(st.lists(st.lists(st.integers(0, 3), min_size=cols, max_size=cols), min_size=rows, max_size=rows)))
    x = np.array(data.draw(st.lists(st.integers(0, 3), min_size=cols, max_size=cols)))
    m = BaseMatrix(b4, a)
    rhs = np.bitwise_xor.reduce(b4.mul_table[a, x[None, :]], axis=1)
    sol = base_solve(m, rhs)
    assert sol is not None
    assert np.array_equal(np.bitwise_xor.reduce(b4.mul_table[a, sol[None, :]], axis=1), rhs)
    # nullspace rows are solutions of A y = 0 and have the right count
    null = m.nullspace()
    assert len(null) == cols - m.rank()
    for y in null:
        assert not np.any(np.bitwise_xor.reduce(b4.mul_table[a, y[None, :]], axis=1))


def test_base_solve_inconsistent_and_mismatch():
    gf2 = get_tower(2, 1).base
    m = BaseMatrix(gf2, [[1, 1], [1, 1]])
    assert base_solve(m, [0, 1]) is None
    with pytest.raises(UsageError):
        base_solve(m, [1, 0, 1])


# -- subspace polynomials ---------------------------------------------------------------------


def test_subspace_polynomial_examples(gf4, gf16):
    assert subspace_polynomial(gf16, []).coeffs == (1,)
    poly = subspace_polynomial(gf4, [1])
    assert poly.coeffs == (1, 1)
    assert eval_linearized(poly, 2) == 1  # w^2 + w = 1
    assert eval_linearized(poly, 0) == 0
    with pytest.raises(UsageError):
        subspace_polynomial(gf16, [3, 3])


@pytest.mark.parametrize("q,t", [(2, 4), (4, 2), (2, 6), (4, 3), (16, 2)])
def test_subspace_polynomial_kernel_image_and_product(q, t):
    f = get_tower(q, t)
    xs = np.arange(f.size)
    for s in range(t + 1):
        w = f.basis[:s]
        poly = subspace_polynomial(f, w)
        assert poly.s == s and poly.coeffs[-1] == 1 and poly.coeffs[0] != 0
        vals = poly.evaluate_many(xs)
        assert set(np.flatnonzero(vals == 0).tolist()) == f.span_elements(w)
        assert f.span_dim(vals) == t - s
        # ordinary coefficients agree with the product of (X - w) over W
        prod = [1]
        for a in sorted(f.span_elements(w)):
            nxt = [0] * (len(prod) + 1)
            for d, c in enumerate(prod):
                nxt[d + 1] ^= c
                nxt[d] ^= f.mul(c, a)
            prod = nxt
        assert poly.expanded() == prod


@given(st.lists(st.integers(1, 255), min_size=1, max_size=4, unique=True), st.data())
def test_subspace_polynomial_linear(gens, data):
    f = get_tower(4, 4)
    if f.span_dim(gens) != len(gens):
        gens = gens[:1]
    poly = subspace_polynomial(f, gens)
    a, b = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3))
    x, y = data.draw(st.integers(0, 255)), data.draw(st.integers(0, 255))
    assert poly(f.mul(a, x) ^ f.mul(b, y)) == f.mul(a, poly(x)) ^ f.mul(b, poly(y))
    for g in gens:
        assert poly(g) == 0


def test_linearity_random_pairs(gf256, rng):
    poly = subspace_polynomial(gf256, gf256.basis[:3])
    for x, y in rng.integers(0, 256, (100, 2)):
        assert poly(int(x) ^ int(y)) == poly(int(x)) ^ poly(int(y))


# -- cosets -----------------------------------------------------------------------------------


def test_coset_examples(gf4):
    f = get_tower(4, 2)
    assert len({coset_id(f, b) for b in range(1, 4)}) == 1
    assert len({coset_id(f, x) for x in range(1, 16)}) == 5
    assert {coset_id(gf4, x) for x in range(1, 4)} == {1, 2, 3}
    with pytest.raises(DomainError):
        coset_id(f, 0)


@pytest.mark.parametrize("q,t", [(4, 2), (4, 3), (16, 2), (2, 5)])
def test_coset_id_is_min_of_coset(q, t):
    f = get_tower(q, t)
    for x in range(1, f.size):
        members = {f.mul(x, b) for b in range(1, q)}
        assert coset_id(f, x) == min(members)


# -- the field table --------------------------------------------------------------------------


def test_field_table_entries_irreducible_and_primitive():
    table = load_field_table()
    assert {(2, t) for t in range(1, 21)} <= set(table)
    for (q, t), mod in table.items():
        assert is_irreducible(q, mod)
        assert modulus_from_hex(q, t, modulus_to_hex(q, mod)) == mod


def test_known_moduli():
    assert get_tower(2, 8).modulus_hex == "11d"
    assert get_tower(2, 4).modulus_hex == "13"


def test_reducible_modulus_rejected():
    with pytest.raises(ReducibleModulusError):
        FieldTower(2, 4, (1, 0, 1, 0, 1))  # (x^2 + x + 1)^2
    with pytest.raises(ReducibleModulusError):
        FieldTower(4, 2, (0, 1, 1))
    with pytest.raises(UsageError):
        FieldTower(2, 21, (1,) * 22)


def test_irreducibility_by_enumeration():
    # over GF(2), degree 4: x^4+x+1, x^4+x^3+1, x^4+x^3+x^2+x+1 are the irreducible ones
    found = []
    for tail in itertools.product(range(2), repeat=4):
        mod = tail + (1,)
        if is_irreducible(2, mod):
            found.append(modulus_to_hex(2, mod))
    assert sorted(found) == ["13", "19", "1f"]
