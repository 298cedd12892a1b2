"""Command-line entry point: ``rsrepair {bounds,build,simulate,selftest}``.

Exit codes: 0 success, 2 infeasible parameters, 3 verification failure, 4 usage.
Errors are written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import io
import itertools
import json
import sys
from math import comb
from typing import Optional

import numpy as np

from rsrepair import __version__
from rsrepair.errors import (
    InfeasibleError,
    InvalidRepairMatrix,
    ReducibleModulusError,
    RepairError,
    UnrecoverableError,
    UsageError,
)
from rsrepair.fields import BASE_MODULI, get_tower, load_field_table
from rsrepair.repair import centralized_repair, repair_many, verify_matrix
from rsrepair.rscode import ErasureDecoder, encode_many, full_length_code
from rsrepair.schemes import (
    CSV_HEADER,
    bounds_table,
    build_multiplier_matrix,
    build_subspace_matrix,
    collision_audit,
    lu_structure_check,
)

EXIT_OK, EXIT_INFEASIBLE, EXIT_VERIFY, EXIT_USAGE = 0, 2, 3, 4
EXHAUSTIVE_SET_LIMIT = 5000
ALL_CODEWORDS_LIMIT_BITS = 12


class CliError(Exception):
    def __init__(self, code: int, reason: str, message: str, **extra):
        super().__init__(message)
        self.code, self.reason, self.extra = code, reason, extra

    def to_json(self) -> dict:
        return {"error": self.reason, "message": str(self), "exit_code": self.code, **self.extra}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, "usage", message)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- configuration -----------------------------------------------------------------------------


def _field_params(args) -> tuple[int, int, int]:
    q, t = args.q, args.t
    if q not in BASE_MODULI:
        raise CliError(EXIT_USAGE, "unknown_field", f"q must be one of {sorted(BASE_MODULI)}")
    table = load_field_table(args.field_table)
    if (q, t) not in table:
        raise CliError(EXIT_USAGE, "unknown_field", f"no field-table entry for q={q}, t={t}")
    n = q**t
    if args.k is not None and args.rate is not None:
        raise CliError(EXIT_USAGE, "usage", "give --k or --rate, not both")
    if args.k is not None:
        k = args.k
    else:
        rate = 0.5 if args.rate is None else args.rate
        k = int(round(rate * n))
    if not 1 <= k < n:
        raise CliError(EXIT_USAGE, "usage", f"need 1 <= k < n={n}, got k={k}")
    return q, t, k


def _construct_code(args):
    q, t, k = _field_params(args)
    bits = t * (q.bit_length() - 1)
    if bits > args.max_construct_bits:
        raise CliError(
            EXIT_USAGE,
            "construction_cap",
            f"GF({q}^{t}) has {bits}-bit elements; construction is capped at {args.max_construct_bits} "
            "bits (raise --max-construct-bits)",
        )
    tower = get_tower(q, t, args.field_table)
    return full_length_code(tower, k)


def _failed_set(args, code) -> tuple[int, ...]:
    if args.failed:
        try:
            idx = [int(x) for x in args.failed.split(",") if x.strip()]
        except ValueError:
            raise CliError(EXIT_USAGE, "usage", f"--failed must be a comma list of integers: {args.failed!r}")
        if len(set(idx)) != len(idx) or any(not 1 <= i <= code.n for i in idx):
            raise CliError(EXIT_USAGE, "usage", f"--failed needs distinct indices in [1, {code.n}]")
        if args.r is not None and args.r != len(idx):
            raise CliError(EXIT_USAGE, "usage", "--r disagrees with the size of --failed")
        return tuple(sorted(idx))
    if args.r is None:
        raise CliError(EXIT_USAGE, "usage", "give --failed or --r")
    if not 1 <= args.r <= code.n:
        raise CliError(EXIT_USAGE, "usage", f"--r must lie in [1, {code.n}]")
    rng = np.random.default_rng([args.seed, 0])
    return tuple(sorted(int(i) + 1 for i in rng.choice(code.n, args.r, replace=False)))


def _schemes(args) -> list[str]:
    return ["subspace", "multiplier"] if args.scheme == "both" else [args.scheme]


def _check_applicable(code, name: str) -> None:
    """The multiplier construction only exists for k = n - n/q; say so before building."""
    if name == "multiplier" and code.k != code.n - code.n // code.tower.q:
        raise UsageError(
            f"the multiplier scheme needs k = n - n/q = {code.n - code.n // code.tower.q}; got k={code.k}"
        )


def _rprime(args):
    if args.rprime is None:
        return None
    return "auto" if args.rprime == "auto" else int(args.rprime)


def _build(code, failed, name: str, args):
    if name == "subspace":
        return build_subspace_matrix(code, failed, r_prime=_rprime(args))
    return build_multiplier_matrix(code, failed, check=False)


def _scheme_record(code, sch, name: str) -> tuple[dict, bool]:
    """Verification block for one built scheme and whether every check passed."""
    report = verify_matrix(code, sch.matrix)
    rec = {
        "scheme": sch.to_json(),
        "verification": report.to_json(),
        "bandwidth_symbols": sch.bandwidth,
        "bandwidth_bits": sch.bandwidth * code.tower.bits,
        "bound_symbols": sch.bound,
        "bound_bits": sch.bound * code.tower.bits,
        "bound_ok": sch.bandwidth <= sch.bound,
    }
    ok = report.ok and rec["bound_ok"]
    if name == "multiplier":
        alphas = [code.alpha(i) for i in sch.failed]
        lu = lu_structure_check(code.tower, sch.matrix.failed_rows, sch.deltas, alphas)
        audit = collision_audit(sch)
        rec["lu_check"] = lu
        rec["audit"] = audit.to_json()
        ok = ok and lu and audit.ok
    rec["ok"] = ok
    return rec, ok


def _code_json(code) -> dict:
    return {**code.describe(), "field_table": {"q": code.tower.q, "t": code.tower.t, "modulus": code.tower.modulus_hex}}


def _skip_or_raise(args, name: str, exc: RepairError) -> dict:
    """With ``--scheme both`` an inapplicable construction is reported, not fatal."""
    if args.scheme != "both" or (isinstance(exc, UsageError) and name != "multiplier"):
        raise exc
    status = "not_applicable" if isinstance(exc, UsageError) else "infeasible"
    return {"scheme": name, "status": status, "reason": str(exc)}


# -- subcommands ----------------------------------------------------------------------------------


def cmd_bounds(args) -> int:
    q, t, k = _field_params(args)
    rows = bounds_table(q, t, k, args.r)
    if args.format == "json":
        text = _dump({"q": q, "t": t, "n": q**t, "k": k, "rows": [row.to_json() for row in rows]})
    else:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in rows:
            buf.write(row.csv_row() + "\n")
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_build(args) -> int:
    code = _construct_code(args)
    failed = _failed_set(args, code)
    if len(failed) > code.n - code.k:
        raise CliError(EXIT_INFEASIBLE, "infeasible", f"r={len(failed)} exceeds n-k={code.n - code.k}")
    records, all_ok = [], True
    for name in _schemes(args):
        try:
            _check_applicable(code, name)
            sch = _build(code, failed, name, args)
        except (InfeasibleError, UnrecoverableError, UsageError) as exc:
            records.append(_skip_or_raise(args, name, exc))
            continue
        rec, ok = _scheme_record(code, sch, name)
        rec["matrix"] = sch.matrix.to_json()
        records.append(rec)
        all_ok = all_ok and ok
    result = {"command": "build", "code": _code_json(code), "failed": list(failed), "schemes": records, "ok": all_ok}
    if args.format == "csv":
        buf = io.StringIO()
        buf.write("scheme,r,bandwidth_symbols,bandwidth_bits,bound_bits,ok\n")
        for rec in records:
            if "ok" in rec:
                buf.write(
                    f"{rec['scheme']['scheme']},{len(failed)},{rec['bandwidth_symbols']},"
                    f"{rec['bandwidth_bits']},{rec['bound_bits']},{str(rec['ok']).lower()}\n"
                )
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_dump(result), args.out)
    return EXIT_OK if all_ok else EXIT_VERIFY


def _basis_codewords(code) -> np.ndarray:
    """Encodings of zeta_m X^i for i < k and every basis element: a B-basis of the code."""
    f = code.tower
    msgs = np.zeros((code.k * f.t, code.k), dtype=np.int64)
    for row, (i, z) in enumerate(itertools.product(range(code.k), f.basis)):
        msgs[row, i] = z
    return encode_many(code, msgs)


def _all_codewords(code) -> np.ndarray:
    msgs = np.array(list(itertools.product(range(code.tower.size), repeat=code.k)), dtype=np.int64)
    return encode_many(code, msgs)


def _simulate_one(code, failed, name, args, words, labels) -> dict:
    sch = _build(code, failed, name, args)
    rec, ok = _scheme_record(code, sch, name)
    idx = sch.matrix.failed
    rec.update({"failed": list(idx), "words": len(words), "exact": 0, "oracle_agree": 0, "first_failure": None})
    if not len(words):
        return rec
    recovered, bw = repair_many(code, words, sch.matrix)
    truth = words[:, [i - 1 for i in idx]]
    oracle = ErasureDecoder(code, idx).decode_many(words)
    exact = np.all(recovered == truth, axis=1)
    agree = np.all(recovered == oracle, axis=1)
    rec["exact"] = int(exact.sum())
    rec["oracle_agree"] = int(agree.sum())
    bad = np.flatnonzero(~(exact & agree))
    if bad.size:
        rec["first_failure"] = labels[int(bad[0])]
    # the per-node transcript path must agree with the batched path
    single = centralized_repair(code, words[0], idx, sch.matrix)
    rec["transcript_path_agrees"] = (
        [single.recovered[i] for i in idx] == recovered[0].tolist() and single.symbols_B == bw
    )
    rec["ok"] = ok and not bad.size and rec["transcript_path_agrees"]
    return rec


def cmd_simulate(args) -> int:
    code = _construct_code(args)
    if args.trials < 0:
        raise CliError(EXIT_USAGE, "usage", "--trials must be >= 0")
    if args.exhaustive:
        r = args.r if args.r is not None else (len(args.failed.split(",")) if args.failed else None)
        if r is None:
            raise CliError(EXIT_USAGE, "usage", "--exhaustive needs --r (or --failed for its size)")
        if r > code.n - code.k:
            raise CliError(EXIT_INFEASIBLE, "infeasible", f"r={r} exceeds n-k={code.n - code.k}")
        if comb(code.n, r) > EXHAUSTIVE_SET_LIMIT:
            raise CliError(EXIT_USAGE, "usage", f"C({code.n},{r}) failure sets exceed {EXHAUSTIVE_SET_LIMIT}")
        sets = list(itertools.combinations(range(1, code.n + 1), r))
        if code.k * code.tower.width <= ALL_CODEWORDS_LIMIT_BITS:
            words, mode = _all_codewords(code), "all_codewords"
        else:
            words, mode = _basis_codewords(code), "basis_codewords"
        extra = [np.random.default_rng([args.seed, trial]) for trial in range(args.trials)]
        if extra:
            msgs = np.vstack([g.integers(0, code.tower.size, (1, code.k)) for g in extra])
            words = np.vstack([words, encode_many(code, msgs)])
        labels = [{"word": i} for i in range(len(words))]
    else:
        failed = _failed_set(args, code)
        if len(failed) > code.n - code.k:
            raise CliError(EXIT_INFEASIBLE, "infeasible", f"r={len(failed)} exceeds n-k={code.n - code.k}")
        sets, mode = [failed], "random"
        msgs = np.zeros((args.trials, code.k), dtype=np.int64)
        for trial in range(args.trials):
            msgs[trial] = np.random.default_rng([args.seed, trial]).integers(0, code.tower.size, code.k)
        words = encode_many(code, msgs) if args.trials else np.zeros((0, code.n), dtype=np.int64)
        labels = [{"trial": i, "seed": [args.seed, i]} for i in range(args.trials)]

    results, all_ok = [], True
    for name in _schemes(args):
        per_set = []
        try:
            _check_applicable(code, name)
            for failed in sets:
                per_set.append(_simulate_one(code, failed, name, args, words, labels))
        except (InfeasibleError, UnrecoverableError, UsageError) as exc:
            results.append(_skip_or_raise(args, name, exc))
            continue
        bws = sorted({rec["bandwidth_symbols"] for rec in per_set})
        summary = {
            "scheme": name,
            "mode": mode,
            "failure_sets": len(per_set),
            "words_per_set": len(words),
            "exact": sum(rec["exact"] for rec in per_set),
            "oracle_agree": sum(rec["oracle_agree"] for rec in per_set),
            "bandwidth_symbols": bws,
            "bound_ok": all(rec["bound_ok"] for rec in per_set),
            "ok": all(rec["ok"] for rec in per_set),
        }
        failures = [
            {"failed": rec["failed"], "at": rec["first_failure"]} for rec in per_set if not rec["ok"]
        ]
        summary["failures"] = failures[:10]
        if len(per_set) == 1:
            rec = per_set[0]
            summary.update(
                {
                    "failed": rec["failed"],
                    "bandwidth_bits": rec["bandwidth_bits"],
                    "bound_symbols": rec["bound_symbols"],
                    "bound_bits": rec["bound_bits"],
                    "verification": rec["verification"],
                }
            )
        results.append(summary)
        all_ok = all_ok and summary["ok"]
    result = {
        "command": "simulate",
        "code": _code_json(code),
        "trials": args.trials,
        "seed": args.seed,
        "results": results,
        "ok": all_ok,
    }
    if args.format == "csv":
        buf = io.StringIO()
        buf.write("scheme,mode,failure_sets,words_per_set,exact,oracle_agree,bandwidth_symbols,bound_ok,ok\n")
        for s in results:
            if "ok" in s:
                bw = ";".join(str(b) for b in s["bandwidth_symbols"])
                buf.write(
                    f"{s['scheme']},{s['mode']},{s['failure_sets']},{s['words_per_set']},{s['exact']},"
                    f"{s['oracle_agree']},{bw},{str(s['bound_ok']).lower()},{str(s['ok']).lower()}\n"
                )
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_dump(result), args.out)
    return EXIT_OK if all_ok else EXIT_VERIFY


def cmd_selftest(args) -> int:
    from rsrepair.selftest import run_selftest

    result = run_selftest(args.field_table, args.seed)
    _emit(_dump(result), args.out)
    return EXIT_OK if result["ok"] else EXIT_VERIFY


# -- argument parsing -------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rsrepair", description="Multiple-failure repair schemes for Reed-Solomon codes.")
    parser.add_argument("--version", action="version", version=f"rsrepair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, *, code=True):
        p.add_argument("--field-table", default=None, help="alternate field-table JSON")
        p.add_argument("--out", default=None, help="write output here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        if code:
            p.add_argument("--q", type=int, default=2)
            p.add_argument("--t", type=int, default=8)
            p.add_argument("--k", type=int, default=None)
            p.add_argument("--rate", type=float, default=None, help="k = round(rate * n); default 0.5")

    b = sub.add_parser("bounds", help="bandwidth bounds per number of failures")
    common(b)
    b.add_argument("--r", type=int, default=None, help="only rows r <= R")
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.set_defaults(func=cmd_bounds)

    for name, func, helptext in (
        ("build", cmd_build, "construct and verify a repair matrix"),
        ("simulate", cmd_simulate, "repair random codewords and compare with the oracle"),
    ):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--scheme", choices=["subspace", "multiplier", "both"], default="both")
        p.add_argument("--failed", default=None, help="comma list of 1-based failed positions")
        p.add_argument("--r", type=int, default=None, help="number of failures (random set from --seed)")
        p.add_argument("--rprime", default=None, help="subspace scheme: integer r' or 'auto'")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--max-construct-bits", type=int, default=12)
        p.set_defaults(func=func)
        if name == "simulate":
            p.add_argument("--trials", type=int, default=100)
            p.add_argument("--exhaustive", action="store_true", help="every failure set of size r")

    s = sub.add_parser("selftest", help="run the invariant suites")
    common(s, code=False)
    s.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[list] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        err = exc
    except ReducibleModulusError as exc:
        err = CliError(EXIT_VERIFY, "reducible_modulus", str(exc))
    except (InfeasibleError, UnrecoverableError) as exc:
        err = CliError(EXIT_INFEASIBLE, "infeasible", str(exc))
    except InvalidRepairMatrix as exc:
        err = CliError(EXIT_VERIFY, "verification_failed", str(exc))
    except RepairError as exc:
        err = CliError(EXIT_USAGE, "usage", str(exc))
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        err = CliError(EXIT_USAGE, "io", f"{type(exc).__name__}: {exc}")
    sys.stderr.write(json.dumps(err.to_json(), sort_keys=True) + "\n")
    return err.code


if __name__ == "__main__":
    sys.exit(main())
