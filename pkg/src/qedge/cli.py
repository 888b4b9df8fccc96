"""Command-line front end: curve sweeps, asymptotes, verification suites, Gram dumps.

Exit codes: 0 success, 1 usage error, 2 partial failure (some rows errored),
3 verification failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .asymptotics import (
    DegeneratePadeError,
    NotTabulatedError,
    large_d_limit,
    p0_known,
    p0_via_integral,
    p0_via_primitive,
)
from .combinatorics import StringParams, overlap_closed, overlap_oracle
from .discrimination import ScenarioSpec, success_curve, total_success
from .gram import (
    build_gram_known,
    build_gram_unknown,
    dump_gram_csv,
    rescale_gram,
    tridiag_inverse_reference,
)

__all__ = ["main", "parse_n_spec", "RunConfig"]

_CSV_HEADER = "N,d,scenario,method,p_success,gap,status"


@dataclass(frozen=True)
class RunConfig:
    """Resolved options of one CLI invocation; defaults are recorded in JSON output."""

    command: str
    scenario: str = "unknown"
    d: int = 2
    n_values: tuple[int, ...] = ()
    method: str = "srm"
    gap_tol: float = 1e-8
    threads: int = 1
    out: Optional[str] = None
    fmt: str = "csv"
    verbose: bool = False
    deterministic: bool = field(default=True, init=False)  # no RNG anywhere


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        raise _UsageError(message)


def parse_n_spec(spec: str) -> list[int]:
    """Parse 'start:stop:step' segments joined by commas into a sorted N list.

    Stops are inclusive; 'start:stop' implies step 1 and a bare integer is a
    single value.  Example: '2:18:2,22:198:4' reproduces the 54-point grid.
    """
    values: list[int] = []
    if not spec.strip():
        raise _UsageError("empty N specification")
    for segment in spec.split(","):
        parts = segment.strip().split(":")
        try:
            nums = [int(p) for p in parts]
        except ValueError as exc:
            raise _UsageError(f"bad N segment {segment!r}") from exc
        if len(nums) == 1:
            values.append(nums[0])
        elif len(nums) in (2, 3):
            start, stop = nums[0], nums[1]
            step = nums[2] if len(nums) == 3 else 1
            if step <= 0 or stop < start:
                raise _UsageError(f"bad N segment {segment!r}")
            values.extend(range(start, stop + 1, step))
        else:
            raise _UsageError(f"bad N segment {segment!r}")
    if any(v < 1 for v in values):
        raise _UsageError("N values must be >= 1")
    out = sorted(set(values))
    if not out:
        raise _UsageError("empty N specification")
    return out


def _build_parser() -> _Parser:
    parser = _Parser(prog="qedge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qedge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    curve = sub.add_parser("curve", help="success probability vs string length")
    curve.add_argument("--scenario", choices=("unknown", "known"), default="unknown")
    curve.add_argument("--d", type=int, default=2)
    curve.add_argument("--n", required=True, help="N range spec, e.g. 2:18:2,22:198:4")
    curve.add_argument("--method", choices=("srm", "sdp"), default="srm")
    curve.add_argument("--gap-tol", type=float, default=1e-8)
    curve.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    curve.add_argument("--out", default=None)
    curve.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    curve.add_argument("--verbose", action="store_true")

    asym = sub.add_parser("asymptote", help="limiting success probabilities for one d")
    asym.add_argument("--d", type=int, required=True)
    asym.add_argument("--estimate-coeffs", action="store_true",
                      help="add numeric low-order series-coefficient estimates")
    asym.add_argument("--out", default=None)
    asym.add_argument("--verbose", action="store_true")

    verify = sub.add_parser("verify", help="run a property suite")
    verify.add_argument("suite", choices=("oracle", "tridiag", "holevo", "all"))
    verify.add_argument("--verbose", action="store_true")

    dump = sub.add_parser("gram-dump", help="dump one Gram block as CSV (debug)")
    dump.add_argument("--scenario", choices=("unknown", "known"), default="unknown")
    dump.add_argument("--d", type=int, default=2)
    dump.add_argument("--n", type=int, required=True)
    dump.add_argument("--block", type=int, required=True,
                      help="irrep lam (unknown) or ntilde0 (known)")
    dump.add_argument("--rescaled", action="store_true")
    dump.add_argument("--out", default=None)
    return parser


def _write_output(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_curve(args) -> int:
    n_values = parse_n_spec(args.n)
    config = RunConfig(command="curve", scenario=args.scenario, d=args.d,
                       n_values=tuple(n_values), method=args.method,
                       gap_tol=args.gap_tol, threads=args.threads,
                       out=args.out, fmt=args.fmt, verbose=args.verbose)
    rows = success_curve(args.scenario, args.d, n_values, args.method,
                         gap_tol=args.gap_tol, threads=max(1, args.threads))
    if args.verbose:
        for row in rows:
            print(
                f"# N={row.N} p={row.p_success:.12g} gap={row.gap:.3g} "
                f"newton_iters={row.iterations} {row.status}",
                file=sys.stderr,
            )
    if args.fmt == "csv":
        buf = io.StringIO()
        buf.write(_CSV_HEADER + "\n")
        for row in rows:
            buf.write(
                f"{row.N},{row.d},{row.scenario},{row.method},"
                f"{row.p_success:.12g},{row.gap:.12g},{row.status}\n"
            )
        _write_output(buf.getvalue(), args.out)
    else:
        doc = {
            "config": _config_dict(config),
            "rows": [
                {"N": row.N, "d": row.d, "scenario": row.scenario, "method": row.method,
                 "p_success": row.p_success, "gap": row.gap, "status": row.status,
                 "iterations": row.iterations}
                for row in rows
            ],
        }
        _write_output(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n", args.out)
    return 0 if all(row.status == "ok" for row in rows) else 2


def _config_dict(config: RunConfig) -> dict:
    return {
        "command": config.command, "scenario": config.scenario, "d": config.d,
        "n_values": list(config.n_values), "method": config.method,
        "gap_tol": config.gap_tol, "threads": config.threads,
        "format": config.fmt, "deterministic": config.deterministic,
        "version": __version__,
    }


def _cmd_asymptote(args) -> int:
    report: dict = {"d": args.d, "large_d": large_d_limit(args.d)}
    report["p0_known"] = p0_known(args.d)
    try:
        integral = p0_via_integral(args.d)
        primitive = p0_via_primitive(args.d)
        report["p0_pade_integral"] = integral.value
        report["p0_pade_primitive"] = primitive.value
        report["error_estimates"] = {
            "integral_spread": integral.error,
            "primitive_spread": primitive.error,
            "cross_route_half_spread": abs(integral.value - primitive.value) / 2.0,
        }
    except NotTabulatedError as exc:
        report["p0_pade_integral"] = None
        report["p0_pade_primitive"] = None
        report["error_estimates"] = None
        report["reason"] = str(exc)
    except DegeneratePadeError as exc:
        report["p0_pade_integral"] = None
        report["p0_pade_primitive"] = None
        report["error_estimates"] = None
        report["reason"] = f"all Pade orders defective: {exc}"
    if args.estimate_coeffs:
        from .asymptotics import estimate_low_order_coeffs

        report["coefficient_estimates"] = [
            {"r": est.r, "value": est.value, "error": est.error}
            for est in estimate_low_order_coeffs(args.d, r_max=3)
        ]
    _write_output(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    return 0


def _cmd_gram_dump(args) -> int:
    if args.scenario == "unknown":
        g = build_gram_unknown(args.n, args.d, args.block)
        if args.rescaled:
            g = rescale_gram(g)
    else:
        g = build_gram_known(args.n, args.d, args.block)
    buf = io.StringIO()
    dump_gram_csv(g, buf)
    _write_output(buf.getvalue(), args.out)
    return 0


def _verify_oracle(verbose: bool) -> tuple[int, int, str]:
    passed = failed = 0
    first = ""
    for n_val in range(2, 13):
        for lam in range(n_val // 2 + 1):
            ks = list(range(max(lam, 1), n_val - lam + 1))
            for i, k in enumerate(ks):
                for k2 in ks[i:]:
                    closed = overlap_closed(n_val, k, k2, lam)
                    orac = overlap_oracle(n_val, k, k2, lam)
                    if abs(closed - orac) <= 1e-12:
                        passed += 1
                    else:
                        failed += 1
                        if not first:
                            first = (f"N={n_val} lam={lam} k={k} k'={k2}: "
                                     f"closed={closed!r} oracle={orac!r}")
    return passed, failed, first


def _verify_tridiag(verbose: bool) -> tuple[int, int, str]:
    passed = failed = 0
    first = ""
    for n_val, d in [(4, 2), (5, 3), (12, 2), (20, 4), (31, 3), (40, 4), (60, 2), (60, 3)]:
        for lam in range(1, n_val // 2 + 1):
            g = rescale_gram(build_gram_unknown(n_val, d, lam))
            if np.linalg.cond(g.dense) > 1e12:
                continue
            dense_inv = np.linalg.inv(g.dense)
            diag, sup = tridiag_inverse_reference(n_val, d, n_val / 2 - lam)
            size = len(diag)
            ref = np.zeros((size, size))
            idx = np.arange(size)
            ref[idx, idx] = diag
            if size > 1:
                ref[idx[:-1], idx[:-1] + 1] = sup
                ref[idx[:-1] + 1, idx[:-1]] = sup
            dev = np.abs(dense_inv - ref).max() / np.abs(dense_inv).max()
            if dev <= 1e-8:
                passed += 1
            else:
                failed += 1
                if not first:
                    first = f"N={n_val} d={d} lam={lam}: relative deviation {dev:.3e}"
    return passed, failed, first


def _verify_holevo(verbose: bool) -> tuple[int, int, str]:
    from .linalg import psd_sqrt

    passed = failed = 0
    first = ""
    for n_val in range(2, 31):
        res = total_success(ScenarioSpec("unknown", StringParams(n_val, 2), "sdp"))
        for label, sol in sorted(res.certificates.items()):
            if sol.iterations == 0 and sol.gap == 0.0:   # exact degenerate-block solution
                checks_ok = True
            else:
                g = build_gram_unknown(n_val, 2, label)
                root = psd_sqrt(g.dense)
                checks_ok = sol.gap <= 1e-8
                for k in range(g.order):
                    rho = np.outer(root[:, k], root[:, k])
                    if np.linalg.eigvalsh(sol.dual - rho).min() < -1e-8:
                        checks_ok = False
                    if abs(np.sum((sol.dual - rho) * sol.primal[k])) > 1e-8:
                        checks_ok = False
            if checks_ok:
                passed += 1
            else:
                failed += 1
                if not first:
                    first = f"N={n_val} lam={label}: gap={sol.gap:.3e}"
        if verbose:
            print(f"# verified N={n_val}", file=sys.stderr)
    return passed, failed, first


def _cmd_verify(args) -> int:
    suites = {
        "oracle": _verify_oracle,
        "tridiag": _verify_tridiag,
        "holevo": _verify_holevo,
    }
    names = list(suites) if args.suite == "all" else [args.suite]
    any_failed = False
    for name in names:
        passed, failed, first = suites[name](args.verbose)
        status = "ok" if failed == 0 else "FAILED"
        print(f"{name}: {passed} passed, {failed} failed [{status}]")
        if failed:
            any_failed = True
            print(f"  first counterexample: {first}")
    return 3 if any_failed else 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.command == "curve":
            return _cmd_curve(args)
        if args.command == "asymptote":
            return _cmd_asymptote(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "gram-dump":
            return _cmd_gram_dump(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, NotTabulatedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 1


if __name__ == "__main__":
    sys.exit(main())
