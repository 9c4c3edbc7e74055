"""Command-line front end.

Subcommands::

    nkcert certify <file> [--modulus <file>] [--eta V] [--json PATH]
    nkcert run <file> [--uncertified] [--max-iter N] [--tol T] [--trace PATH]
                      [--audit strict|record] [--json PATH]
    nkcert sweep --ratio A:B:STEP --leta A:B:STEP [--out PATH]

Exit codes: 0 when the new condition holds (certify) or the audited run
converged cleanly (run), 2 when the program ran but the certificate or the
run failed, 1 on any operational error.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path

from .criteria import (
    EARLIER_ARGYROS_THRESHOLD,
    ARGYROS_THRESHOLD,
    CRITICAL_RATIO,
    NEW_THRESHOLD,
    THRESHOLD_EXPRESSIONS,
    check_argyros,
    check_kantorovich,
    check_new_general,
    check_new_lipschitz,
    compare_criteria,
)
from .driver import AuditMode, NewtonTrace, RunOptions, TraceStatus, run_certified, run_uncertified
from .errors import NKCertError, NotCertified, SpecError
from .majorant import MajorantModel
from .modulus import LinearModulus, LipschitzPair
from .problem import eta_of, load_modulus_file, load_problem_file
from .report import Report

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2

logger = logging.getLogger("nkcert")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _setup(args):
    spec = load_problem_file(args.file)
    modulus = load_modulus_file(args.modulus) if args.modulus else spec.modulus
    if modulus is None:
        raise SpecError("no modulus available: add a 'modulus' entry to the problem file or pass --modulus")
    eta = eta_of(spec.system)
    if args.eta is not None:
        if args.eta < eta:
            raise SpecError(f"--eta {args.eta} is below the first Newton step length {eta:.17g}")
        eta = args.eta
    if eta > spec.system.R:
        raise SpecError(f"eta={eta:.6g} exceeds the domain radius R={spec.system.R:.6g}")
    return spec, MajorantModel(modulus, eta, spec.system.R)


def build_report(spec, model) -> Report:
    certificates = []
    pair = spec.pair
    if pair is not None:
        certificates.append(check_kantorovich(pair, model.eta))
    certificates.append(check_new_general(model))
    certificates.append(check_argyros(model))
    comparison = None
    if pair is not None and pair.l > 0:
        comparison = compare_criteria(pair, model.eta, model.radius)[0]
    return Report(spec.system.name, model.eta, model.modulus.describe(), certificates, comparison)


def print_report(report: Report, out=None):
    out = sys.stdout if out is None else out
    print(f"problem   {report.problem_name}", file=out)
    print(f"modulus   {report.modulus_description}", file=out)
    print(f"eta       {_fmt(report.eta)}", file=out)
    print(file=out)
    print(f"{'criterion':<14}{'passed':>8}{'eta':>14}{'eta_max':>14}{'v_star':>14}", file=out)
    for c in report.certificates:
        print(f"{c.criterion.value:<14}{_fmt(c.passed):>8}{_fmt(c.eta):>14}"
              f"{_fmt(c.eta_max):>14}{_fmt(c.v_star):>14}", file=out)
    print(file=out)
    print(f"thresholds: new l0*eta <= {THRESHOLD_EXPRESSIONS['new']} = {NEW_THRESHOLD:.6g}; "
          f"Kantorovich l*eta <= 0.5; Argyros l0*eta <= {ARGYROS_THRESHOLD:.6g}; "
          f"earlier Argyros bound {THRESHOLD_EXPRESSIONS['earlier_argyros']} = {EARLIER_ARGYROS_THRESHOLD:.6g}",
          file=out)
    if report.comparison is not None:
        v = report.comparison
        print(f"l0/l = {_fmt(v.ratio)} vs critical {THRESHOLD_EXPRESSIONS['critical_ratio']} = "
              f"{CRITICAL_RATIO:.6g}: new condition weaker than Kantorovich: "
              f"{_fmt(v.new_weaker_than_kantorovich)}", file=out)
    if report.trace_summary is not None:
        t = report.trace_summary
        print(f"run: status {t['status']}, {t['iterations']} iterations, residual "
              f"{_fmt(t['final_residual'])}, error bound {_fmt(t['final_error_bound'])}, "
              f"audits passed: {_fmt(t['audits_passed'])}", file=out)


def _write_json(report: Report, path):
    if path:
        Path(path).write_text(report.to_json())


def cmd_certify(args) -> int:
    spec, model = _setup(args)
    report = build_report(spec, model)
    print_report(report)
    _write_json(report, args.json)
    new = next(c for c in report.certificates if c.criterion.value == "NewCondition")
    return EXIT_OK if new.passed else EXIT_FAILED


def trace_rows(trace: NewtonTrace, certified: bool):
    n = trace.iterates[0].size
    header = ["k"] + [f"x{i + 1}" for i in range(n)] + ["step_norm"]
    if certified:
        header += ["v_k", "v_gap"]
    header += ["residual"]
    if certified:
        header += ["step_bound_ok", "ball_ok", "limit_ok"]
    rows = [header]
    vs = trace.majorant_values
    for k, x in enumerate(trace.iterates):
        row = [k] + [repr(float(xi)) for xi in x]
        row.append(repr(trace.step_norms[k]) if k < len(trace.step_norms) else "")
        if certified:
            v_k = vs[k] if k < len(vs) else None
            row.append("" if v_k is None else repr(v_k))
            row.append("" if v_k is None or trace.v_star is None else repr(trace.v_star - v_k))
        row.append(repr(trace.residual_norms[k]))
        if certified:
            a = trace.audits[k] if k < len(trace.audits) else None
            for flag in ("step_bound_ok", "ball_ok", "limit_ok"):
                value = None if a is None else getattr(a, flag)
                row.append("" if value is None else str(value).lower())
        rows.append(row)
    return rows


def write_trace(trace: NewtonTrace, certified: bool, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(trace_rows(trace, certified))


def cmd_run(args) -> int:
    spec, model = _setup(args)
    opts = RunOptions(args.max_iter, args.tol, RunOptions.step_tol, AuditMode(args.audit))
    if args.uncertified:
        trace = run_uncertified(spec.system, opts)
        report = Report(spec.system.name, model.eta, model.modulus.describe())
    else:
        try:
            trace = run_certified(spec.system, model, opts)
        except NotCertified as exc:
            print(f"not certified: {exc}", file=sys.stderr)
            return EXIT_FAILED
        report = Report(spec.system.name, model.eta, model.modulus.describe(),
                        [trace.certificate] if trace.certificate else [])
    report.trace_summary = {
        "status": trace.status.value,
        "iterations": trace.iterations,
        "final_residual": trace.final_residual,
        "final_error_bound": trace.final_error_bound,
        "audits_passed": trace.audits_passed if not args.uncertified else None,
    }
    print_report(report)
    if args.trace:
        write_trace(trace, not args.uncertified, args.trace)
    _write_json(report, args.json)
    ok = trace.status is TraceStatus.CONVERGED and (args.uncertified or trace.audits_passed)
    return EXIT_OK if ok else EXIT_FAILED


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a single value; all values must be > 0."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise SpecError(f"grid {text!r} is not of the form a:b:step") from None
    if len(nums) == 1:
        values = nums
    elif len(nums) == 3:
        a, b, step = nums
        if not (step > 0 and b >= a and all(map(math.isfinite, nums))):
            raise SpecError(f"grid {text!r} needs step > 0 and b >= a")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        values = [a + i * step for i in range(count)]
    else:
        raise SpecError(f"grid {text!r} is not of the form a:b:step")
    if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
        raise SpecError(f"grid {text!r} must contain only positive values")
    return values


def sweep_rows(ratios, letas):
    """Pass/fail of the three criteria on a (l0/l, l*eta) grid with l = 1.

    The ball radius is ``max(1/l0, eta)``: beyond ``1/l0`` the linear
    modulus reaches 1 and no certificate can use the extra room.
    """
    header = ["ratio", "l_eta", "l0_eta", "kantorovich", "new", "argyros", "regime"]
    rows = [header]
    for ratio in ratios:
        if ratio > 1:
            raise SpecError(f"ratio l0/l = {ratio} exceeds 1")
        pair = LipschitzPair(ratio, 1.0)
        for leta in letas:
            eta = leta
            R = max(1.0 / ratio, eta)
            kant = check_kantorovich(pair, eta).passed
            new = check_new_lipschitz(pair, eta, R).passed
            argy = check_argyros(MajorantModel(LinearModulus(ratio), eta, R)).passed
            regime = {(True, True): "both", (True, False): "new_only",
                      (False, True): "kantorovich_only", (False, False): "neither"}[(new, kant)]
            rows.append([repr(ratio), repr(leta), repr(ratio * leta), str(kant).lower(),
                         str(new).lower(), str(argy).lower(), regime])
    return rows


def cmd_sweep(args) -> int:
    rows = sweep_rows(parse_grid(args.ratio), parse_grid(args.leta))
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def create_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nkcert", description="Semilocal convergence certificates for Newton's method")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def problem_args(p):
        p.add_argument("file", help="problem file (JSON)")
        p.add_argument("--modulus", help="modulus file (JSON), overrides the problem's")
        p.add_argument("--eta", type=float, help="use this eta (must be >= the first step length)")
        p.add_argument("--json", help="write the report as JSON to this path")

    p = sub.add_parser("certify", help="evaluate the three convergence criteria")
    problem_args(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("run", help="run Newton's method with majorant audits")
    problem_args(p)
    p.add_argument("--uncertified", action="store_true", help="plain Newton, no audits")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-12, help="residual tolerance")
    p.add_argument("--trace", help="write the iteration trace as CSV to this path")
    p.add_argument("--audit", choices=[m.value for m in AuditMode], default="strict")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="criteria phase diagram over (l0/l, l*eta)")
    p.add_argument("--ratio", required=True, help="l0/l grid a:b:step")
    p.add_argument("--leta", required=True, help="l*eta grid a:b:step")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (NKCertError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
