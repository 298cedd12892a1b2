"""Desk-scale invariant suites, run by ``rsrepair selftest``.

Each suite counts individual checks; a failed check records a short reason.
Negative controls pass when the corruption they inject is caught.
"""

from __future__ import annotations

import itertools
from math import comb
from typing import Callable, Optional

import numpy as np

from rsrepair.errors import InvalidRepairMatrix, ReducibleModulusError, RepairError
from rsrepair.fields import FieldTower, get_tower, load_field_table, subspace_polynomial
from rsrepair.repair import apply_phi, apply_psi, invert_phi, repair_many, verify_matrix
from rsrepair.rscode import (
    ErasureDecoder,
    encode_many,
    full_length_code,
    generator_inner_products,
    is_dual_by_degree,
    make_code,
    random_messages,
)
from rsrepair.schemes import (
    build_multiplier_matrix,
    build_subspace_matrix,
    collision_audit,
    constraint_residuals,
    lu_structure_check,
    max_column_degree,
    multiplier_feasible,
    perturb_delta,
    select_deltas,
)


class Suite:
    def __init__(self, name: str):
        self.name = name
        self.passed = 0
        self.failures: list[str] = []

    def check(self, ok, label: str) -> bool:
        if ok:
            self.passed += 1
        else:
            self.failures.append(label)
        return bool(ok)

    def run(self, fn: Callable[[], bool], label: str) -> bool:
        try:
            ok = fn()
        except RepairError as exc:
            return self.check(False, f"{label}: {type(exc).__name__}: {exc}")
        return self.check(ok, label)

    def to_json(self) -> dict:
        return {"passed": self.passed, "failed": len(self.failures), "failures": self.failures[:20]}


TOWERS = ((2, 2), (2, 4), (4, 2), (16, 1), (2, 8), (4, 4), (16, 2))


def _field_suite(table_path: Optional[str]) -> Suite:
    suite = Suite("fields")
    table = load_field_table(table_path)
    for (q, t), mod in sorted(table.items()):
        if q**t > 2**16:
            continue
        # construction re-checks irreducibility of the stored modulus
        try:
            FieldTower(q, t, mod, tables=False)
            suite.check(True, "")
        except ReducibleModulusError as exc:
            suite.check(False, f"table entry q={q} t={t}: {exc}")
    for q, t in TOWERS:
        if (q, t) not in table:
            continue
        try:
            f = get_tower(q, t, table_path)
        except RepairError as exc:
            suite.check(False, f"GF({q}^{t}): {exc}")
            continue
        xs = np.arange(1, f.size, dtype=np.int64)
        suite.check(np.all(f.mul_arr(xs, f.inv_arr(xs)) == 1), f"GF({q}^{t}) inverses")
        tr = f.trace_arr(np.arange(f.size))
        suite.check(np.array_equal(tr, f.trace_arr(f.pow_arr(np.arange(f.size), q))), f"GF({q}^{t}) trace Frobenius")
        suite.check(set(tr.tolist()) == set(range(q)), f"GF({q}^{t}) trace onto B")
        suite.check(
            all(f.trace(x) == f.trace_frobenius(x) for x in range(0, f.size, max(1, f.size // 64))),
            f"GF({q}^{t}) trace table vs Frobenius sum",
        )
        suite.check(all(f.from_coords(f.coords(x)) == x for x in range(f.size)), f"GF({q}^{t}) coords round trip")
        suite.check(len(set(f.coset_table[1:].tolist())) == (f.size - 1) // (q - 1), f"GF({q}^{t}) coset count")
        if f.size <= 2**12:
            for s in range(f.t + 1):
                w = f.basis[:s]
                poly = subspace_polynomial(f, w)
                vals = poly.evaluate_many(np.arange(f.size))
                kernel = set(np.flatnonzero(vals == 0).tolist())
                c0 = 1
                for beta in f.span_elements(w) - {0}:
                    c0 = f.mul(c0, beta)
                suite.check(kernel == f.span_elements(w), f"GF({q}^{t}) ker L_W, s={s}")
                suite.check(f.span_dim(vals) == f.t - s, f"GF({q}^{t}) dim Im L_W, s={s}")
                suite.check(poly.coeffs[0] == c0 != 0, f"GF({q}^{t}) c0, s={s}")
    return suite


def _rscode_suite(rng: np.random.Generator) -> Suite:
    suite = Suite("rscode")
    for q, t in ((2, 4), (4, 2), (2, 6)):
        f = get_tower(q, t)
        codes = [full_length_code(f), make_code(f, range(1, f.size, 2), max(1, f.size // 4))]
        for code in codes:
            suite.check(
                all(not np.any(generator_inner_products(code, [f.mul(lam, f.pow(a, d)) for lam, a in zip(code.lambdas, code.alphas)]))
                    for d in range(code.n - code.k)),
                f"GF({q}^{t}) n={code.n}: GRS words are dual",
            )
            v = [f.mul(lam, f.pow(a, code.n - code.k)) for lam, a in zip(code.lambdas, code.alphas)]
            suite.check(not is_dual_by_degree(code, v), f"GF({q}^{t}) n={code.n}: degree n-k rejected")
            words = encode_many(code, random_messages(code, 20, rng))
            for _ in range(5):
                erased = sorted(rng.choice(code.n, code.n - code.k, replace=False) + 1)
                dec = ErasureDecoder(code, erased)
                suite.check(
                    np.array_equal(dec.decode_many(words), words[:, [i - 1 for i in erased]]),
                    f"GF({q}^{t}) n={code.n}: erasure decode",
                )
    return suite


def _repair_suite(rng: np.random.Generator) -> Suite:
    suite = Suite("repair")
    f = get_tower(2, 4)
    code = full_length_code(f)
    for failed in ([1], [2, 9], [3, 4, 5]):
        m = build_subspace_matrix(code, failed).matrix
        mi = m.failed_rows
        for _ in range(20):
            x = rng.integers(0, f.size, m.r)
            y = rng.integers(0, 2, m.rt)
            lhs = 0
            for a, b in zip(apply_phi(f, mi, x), y):
                lhs ^= a & b
            rhs = 0
            for a, b in zip(x, apply_psi(f, mi, y)):
                rhs ^= f.mul(int(a), b)
            suite.check(lhs == f.trace(rhs), f"adjointness I={failed}")
            suite.check(np.array_equal(invert_phi(f, mi, apply_phi(f, mi, x)), x), f"phi round trip I={failed}")
    suite.run(
        lambda: verify_matrix(code, np.zeros((code.n, 2 * f.t), dtype=np.int64), [1, 2]).rank_ok is False,
        "zero matrix fails rank",
    )
    try:
        invert_phi(f, np.zeros((1, f.t), dtype=np.int64), np.zeros(f.t, dtype=np.int64))
        suite.check(False, "singular phi must raise")
    except InvalidRepairMatrix:
        suite.check(True, "")
    return suite


def _schemes_suite(rng: np.random.Generator) -> Suite:
    suite = Suite("schemes")
    f = get_tower(2, 4)
    code = full_length_code(f)
    words = encode_many(code, random_messages(code, 32, rng))
    for failed in itertools.combinations(range(1, code.n + 1), 2):
        for build in (build_subspace_matrix, build_multiplier_matrix):
            try:
                sch = build(code, failed)
            except RepairError as exc:
                suite.check(False, f"{build.__name__} {failed}: {exc}")
                continue
            rep = verify_matrix(code, sch.matrix)
            rec, bw = repair_many(code, words, sch.matrix)
            suite.check(rep.ok, f"{build.__name__} {failed}: verification")
            suite.check(np.array_equal(rec, words[:, [i - 1 for i in sch.matrix.failed]]), f"{build.__name__} {failed}: repair")
            suite.check(bw <= sch.bound, f"{build.__name__} {failed}: bandwidth {bw} > {sch.bound}")
    for r in range(3, 9):
        failed = sorted(rng.choice(code.n, r, replace=False) + 1)
        sch = build_subspace_matrix(code, failed)
        suite.check(verify_matrix(code, sch.matrix).ok, f"subspace r={r}: verification")
        suite.check(max_column_degree(sch) < code.n - code.k, f"subspace r={r}: degree guard")
    f8 = get_tower(2, 8)
    big = full_length_code(f8)
    for r in (1, 2, 3):
        failed = sorted(rng.choice(big.n, r, replace=False) + 1)
        sch = build_multiplier_matrix(big, failed)
        audit = collision_audit(sch)
        alphas = [big.alpha(i) for i in sch.failed]
        suite.check(not sch.selection.fallback, f"GF(256) r={r}: no fallback")
        suite.check(len(audit.S) == comb(r, 2), f"GF(256) r={r}: |S|")
        suite.check(audit.ok and audit.stored_S_matches is not False, f"GF(256) r={r}: audit")
        suite.check(all(v[3] == 0 for v in constraint_residuals(big, sch.failed, sch.deltas)), f"GF(256) r={r}: traces")
        suite.check(lu_structure_check(f8, sch.matrix.failed_rows, sch.deltas, alphas), f"GF(256) r={r}: LU")
        suite.check(sch.bandwidth <= sch.bound, f"GF(256) r={r}: bound")
        sub = build_subspace_matrix(big, failed)
        suite.check(sub.bandwidth <= sub.bound, f"GF(256) r={r}: subspace bound")
        if r == 1:
            suite.check(sch.bandwidth == sub.bandwidth == big.n - 1, "GF(256) r=1: bandwidth n-1")
    suite.check(multiplier_feasible(8, 2, 3) and not multiplier_feasible(8, 2, 4), "feasibility at t=8")
    return suite


def _negative_suite(table_path: Optional[str]) -> Suite:
    suite = Suite("negative_controls")
    q, t = 2, 8
    mod = list(load_field_table(table_path).get((q, t), (1, 0, 1, 1, 1, 0, 0, 0, 1)))
    mod[0] = 0  # X divides the modulus now
    try:
        FieldTower(q, t, mod)
        suite.check(False, "corrupted modulus was accepted")
    except ReducibleModulusError:
        suite.check(True, "")
    f = get_tower(2, 8)
    code = full_length_code(f)
    for failed in ([1, 2], [1, 2, 3], [10, 77, 200]):
        sel = select_deltas(code, failed)
        for ell in range(2, len(failed) + 1):
            bad = perturb_delta(code, failed, sel.deltas, ell)
            sch = build_multiplier_matrix(code, failed, bad, check=False)
            lu = lu_structure_check(f, sch.matrix.failed_rows, bad, [code.alpha(i) for i in sch.failed])
            rank_ok = verify_matrix(code, sch.matrix).rank_ok
            suite.check(not (lu and rank_ok), f"perturbed delta_{ell} for {failed} went unnoticed")
    return suite


def run_selftest(table_path: Optional[str] = None, seed: int = 0) -> dict:
    """Run every suite; returns a JSON-ready summary with an overall ``ok`` flag."""
    rng = np.random.default_rng(seed)
    suites = [_field_suite(table_path)]
    if not suites[0].failures:
        suites += [
            _rscode_suite(rng),
            _repair_suite(rng),
            _schemes_suite(rng),
            _negative_suite(table_path),
        ]
    else:
        suites.append(_negative_suite(None))
    return {
        "ok": all(not s.failures for s in suites),
        "suites": {s.name: s.to_json() for s in suites},
    }
