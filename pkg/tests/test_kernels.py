import os

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rsrepair import _kernels_py, kernels
from rsrepair.fields import get_tower

try:
    from rsrepair import _kernels as compiled
except ImportError:  # pragma: no cover - extension not built
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    if compiled is not None and os.environ.get("RSREPAIR_PURE_PYTHON", "") in ("", "0"):
        assert kernels.BACKEND == "cython"


def test_forced_fallback(monkeypatch):
    import importlib

    monkeypatch.setenv("RSREPAIR_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.rref is _kernels_py.rref
    finally:
        monkeypatch.delenv("RSREPAIR_PURE_PYTHON")
        importlib.reload(kernels)


@needs_ext
@given(st.sampled_from([2, 4, 16]), st.integers(1, 9), st.integers(1, 9), st.data())
def test_rref_backends_agree(q, rows, cols, data):
    base = get_tower(q, 1).base
    a = data.draw(arrays(np.int64, (rows, cols), elements=st.integers(0, q - 1)))
    ncols = data.draw(st.integers(-1, cols))
    a1, a2 = a.copy(), a.copy()
    p1 = _kernels_py.rref(a1, base.mul_table, base.inv_table, ncols)
    p2 = compiled.rref(a2, base.mul_table, base.inv_table, ncols)
    assert p1 == p2
    assert np.array_equal(a1, a2)


@given(st.sampled_from([2, 4, 16]), st.integers(0, 12), st.integers(1, 6), st.integers(1, 9), st.data())
def test_rref_many_matches_one_at_a_time(q, count, rows, cols, data):
    base = get_tower(q, 1).base
    stack = data.draw(arrays(np.int64, (count, rows, cols), elements=st.integers(0, q - 1)))
    impls = [_kernels_py] + ([compiled] if compiled is not None else [])
    for impl in impls:
        batch = stack.copy()
        pivots = impl.rref_many(batch, base.mul_table, base.inv_table)
        for i in range(count):
            single = stack[i].copy()
            assert pivots[i] == _kernels_py.rref(single, base.mul_table, base.inv_table)
            assert np.array_equal(batch[i], single)


@given(st.sampled_from([2, 4]), st.integers(1, 8), st.data())
def test_rref_is_reduced_echelon(q, n, data):
    base = get_tower(q, 1).base
    a = data.draw(arrays(np.int64, (n, n + 2), elements=st.integers(0, q - 1)))
    red = a.copy()
    piv = kernels.rref(red, base.mul_table, base.inv_table)
    for i, c in enumerate(piv):
        col = red[:, c]
        assert col[i] == 1 and np.count_nonzero(col) == 1
    assert not np.any(red[len(piv):])


@needs_ext
@given(arrays(np.int64, st.integers(0, 40), elements=st.integers(0, 2**20 - 1)))
def test_xor_rank_backends_agree(codes):
    assert _kernels_py.xor_rank(codes) == compiled.xor_rank(codes)


@needs_ext
@given(st.lists(st.integers(0, 255), max_size=20), st.data())
def test_horner_and_power_sums_agree(coeffs, data):
    f = get_tower(2, 8)
    xs = np.array(data.draw(st.lists(st.integers(0, 255), min_size=1, max_size=30)), dtype=np.int64)
    c = np.array(coeffs, dtype=np.int64)
    h1 = _kernels_py.horner(c, xs, f.log, f.exp, f.order)
    h2 = compiled.horner(c, xs, f.log, f.exp, f.order)
    assert np.array_equal(h1, h2)
    v = np.array(data.draw(st.lists(st.integers(0, 255), min_size=len(xs), max_size=len(xs))), dtype=np.int64)
    k = data.draw(st.integers(0, 12))
    assert np.array_equal(
        _kernels_py.power_sums(v, xs, k, f.log, f.exp, f.order),
        compiled.power_sums(v, xs, k, f.log, f.exp, f.order),
    )


def test_horner_against_scalar(gf16):
    coeffs = np.array([3, 0, 7, 1], dtype=np.int64)
    xs = np.arange(16)
    got = kernels.horner(coeffs, xs, gf16.log, gf16.exp, gf16.order)
    for x in range(16):
        want = 0
        for d, c in enumerate(coeffs):
            want ^= gf16.mul(int(c), gf16.pow(x, d))
        assert got[x] == want
