"""Command line entry point: ``bmcarpet <command> --config FILE ...``.

Exit codes: 0 success, 1 verification failure, 2 configuration or usage error.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager

import numpy as np

from bmcarpet import sampling, spectra, symbolic, verification
from bmcarpet.carpet import DomainError, ValidationError, attractor_profile, full_spectrum_conditions
from bmcarpet.config import ConfigError, RunConfig, load_config
from bmcarpet.output import format_value, write_csv, write_pgm, write_svg
from bmcarpet.render import rasterize

SPECTRUM_HEADER = ("alpha", "dim_H", "dim_P", "P", "regime")
SCAN_HEADER = ("q0", "ratio_A", "alpha", "dim_H", "dim_P", "gap", "regime")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _seed(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return val


def _positive_float(text: str) -> float:
    val = float(text)
    if not val > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="key = value run configuration")
    common.add_argument("--seed", type=_seed, default=0, help="64-bit base seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; 0 = one per CPU")
    common.add_argument("--tol-regime", type=_positive_float, default=1e-9, help="tolerance on |A -+ 1|")
    common.add_argument("--force-regime", choices=spectra.FORCE_CHOICES, default="auto")

    parser = _Parser(prog="bmcarpet", description="Multifractal spectra of two-row self-affine carpet measures.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("spectrum", parents=[common], help="Hausdorff and packing spectra on an alpha grid")
    p.add_argument("--alpha-steps", type=int, default=101)
    p.add_argument("--alpha", type=float, action="append", help="explicit alpha (repeatable); overrides the grid")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")

    p = sub.add_parser("scan-q0", parents=[common], help="spectra at fixed alpha across q0")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--q0-min", type=float, required=True)
    p.add_argument("--q0-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--no-exceptional-row", action="store_true", help="do not insert the exceptional q0")
    p.add_argument("--out", required=True)
    p.add_argument("--svg")

    p = sub.add_parser("conditions", parents=[common], help="report the full-packing-spectrum conditions")
    p.add_argument("--tol", type=_positive_float, default=1e-9)
    p.add_argument("--out")

    p = sub.add_parser("sample", parents=[common], help="sample digit strings or points")
    p.add_argument("--length", type=int, default=1000, help="digits per sample")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--stream", type=int, default=0, help="first stream id")
    p.add_argument("--points", action="store_true", help="emit projected points instead of digits")
    p.add_argument("--delta", type=float, help="sample the oscillating measure with this amplitude")
    p.add_argument("--alpha", type=float, help="level alpha fixing P for --delta")
    p.add_argument("--out", required=True)

    p = sub.add_parser("render", parents=[common], help="PGM image of the carpet")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--suite", choices=verification.SUITES, default="all")
    p.add_argument("--out", help="CSV report")
    return parser


def _need_config(args) -> RunConfig:
    if not args.config:
        raise UsageError(f"{args.command} needs --config")
    return load_config(args.config)


def _check_writable(*paths) -> None:
    for path in paths:
        if path is None:
            continue
        directory = os.path.dirname(os.path.abspath(path))
        if not os.path.isdir(directory) or not os.access(directory, os.W_OK):
            raise ConfigError(f"cannot write {path}: directory missing or read-only")


@contextmanager
def _executor(threads: int):
    if threads < 0:
        raise UsageError("--threads must be >= 0")
    workers = (os.cpu_count() or 1) if threads == 0 else threads
    if workers <= 1:
        yield None
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield pool


def cmd_spectrum(args) -> int:
    cfg = _need_config(args)
    _check_writable(args.out, args.svg)
    meas = cfg.two_row()
    if args.alpha:
        alphas = args.alpha
    else:
        if args.alpha_steps < 1:
            raise UsageError("--alpha-steps must be >= 1")
        alphas = spectra.alpha_grid(meas, args.alpha_steps)
    with _executor(args.threads) as pool:
        curve = spectra.spectrum_curve(meas, alphas, args.tol_regime, args.force_regime, executor=pool)
    rows = [(p.alpha, p.dim_H, p.dim_P, p.P, p.regime) for p in curve]
    write_csv(args.out, SPECTRUM_HEADER, rows)
    if args.svg:
        a = curve.column("alpha")
        write_svg(
            args.svg,
            [("dim_H", a, curve.column("dim_H")), ("dim_P", a, curve.column("dim_P"))],
            "alpha",
            "dimension",
            f"m={meas.m} n={meas.n} n0={meas.n0} n1={meas.n1} q0={meas.q0:.6g}",
        )
    return 0


def scan_q0_values(meas, lo: float, hi: float, steps: int, with_exceptional: bool) -> list[float]:
    if steps < 1:
        raise UsageError("--steps must be >= 1")
    if not (0 < lo <= hi < 1):
        raise UsageError("need 0 < q0-min <= q0-max < 1")
    values = list(np.linspace(lo, hi, steps)) if steps > 1 else [lo]
    if with_exceptional and meas.n0 != meas.n1:
        star = spectra.exceptional_q0(meas.n0, meas.n1, meas.sigma)
        if lo <= star <= hi and all(abs(v - star) > 1e-15 for v in values):
            values.append(star)
    return sorted(float(v) for v in values)


def cmd_scan_q0(args) -> int:
    cfg = _need_config(args)
    _check_writable(args.out, args.svg)
    base = cfg.two_row()
    q0s = scan_q0_values(base, args.q0_min, args.q0_max, args.steps, not args.no_exceptional_row)

    def one(q0):
        meas = base.with_q0(q0)
        pt = spectra.packing_spectrum(meas, args.alpha, args.tol_regime, args.force_regime)
        ra = spectra.ratio_A(meas)
        a_val = ra.value if ra.kind == "finite" else (math.inf if ra.kind == "infinite" else None)
        gap = None if pt.dim_P is None else pt.dim_P - pt.dim_H
        return (q0, a_val, args.alpha, pt.dim_H, pt.dim_P, gap, pt.regime)

    with _executor(args.threads) as pool:
        rows = list(pool.map(one, q0s)) if pool else [one(q) for q in q0s]
    write_csv(args.out, SCAN_HEADER, rows)
    if args.svg:
        q = np.array([r[0] for r in rows])
        dh = np.array([np.nan if r[3] is None else r[3] for r in rows])
        dp = np.array([np.nan if r[4] is None else r[4] for r in rows])
        write_svg(args.svg, [("dim_H", q, dh), ("dim_P", q, dp)], "q0", "dimension", f"alpha={args.alpha:g}")
    return 0


def cmd_conditions(args) -> int:
    cfg = _need_config(args)
    _check_writable(args.out)
    weights = cfg.weights()
    profile = attractor_profile(weights.carpet)
    rep = full_spectrum_conditions(profile, weights, args.tol)
    items = [
        ("classification", rep.classification),
        ("necessary_holds", rep.necessary_holds),
        ("sufficient_holds", rep.sufficient_holds),
        ("row_gap", rep.row_gap),
        ("digit_gap", rep.digit_gap),
        ("common_value_A", rep.common_value_A),
        ("common_value_B", rep.common_value_B),
        ("alpha0", rep.alpha0),
        ("dim_box_packing", profile.dim_box_packing),
        ("dim_hausdorff", profile.dim_hausdorff),
    ]
    for key, val in items:
        print(f"{key} = {format_value(val)}")
    if args.out:
        write_csv(args.out, ("key", "value"), items)
    return 0


def cmd_sample(args) -> int:
    cfg = _need_config(args)
    _check_writable(args.out)
    if args.length < 1 or args.count < 1 or args.stream < 0:
        raise UsageError("--length and --count must be >= 1, --stream >= 0")
    if (args.delta is None) != (args.alpha is None):
        raise UsageError("--delta and --alpha go together")
    if args.delta is not None:
        meas = cfg.two_row()
        P = spectra.fixed_point_P(meas, args.alpha, args.tol_regime)
        spec = sampling.NuDeltaSpec(P, args.delta, meas.sigma)

        def draw(stream):
            return sampling.sample_nu_delta_digits(spec, meas, args.length, stream)

    else:
        weights = cfg.weights()

        def draw(stream):
            return sampling.sample_bernoulli_digits(weights, args.length, stream)

    rows = []
    for k in range(args.count):
        digits = draw(sampling.SeededStream(args.seed, args.stream + k))
        if args.points:
            x, y = symbolic.digits_to_point(digits)
            rows.append((k, x, y))
        else:
            rows.extend((k, pos + 1, int(i), int(j)) for pos, (i, j) in enumerate(zip(digits.rows, digits.cols)))
    header = ("sample", "x", "y") if args.points else ("sample", "position", "row", "col")
    write_csv(args.out, header, rows)
    return 0


def cmd_render(args) -> int:
    cfg = _need_config(args)
    _check_writable(args.out)
    write_pgm(args.out, rasterize(cfg.carpet(), args.size))
    return 0


def cmd_verify(args) -> int:
    if args.config:
        load_config(args.config)
    _check_writable(args.out)
    results = verification.run_suite(args.suite, args.seed, progress=print)
    ok = all(r.passed for r in results)
    if args.out:
        rows = [
            (c.criterion, c.name, c.passed, c.measured, c.tolerance, r.elapsed, c.detail)
            for r in results
            for c in r.checks
        ]
        write_csv(args.out, ("criterion", "check", "passed", "measured", "tolerance", "criterion_seconds", "detail"), rows)
    print(f"overall: {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


COMMANDS = {
    "spectrum": cmd_spectrum,
    "scan-q0": cmd_scan_q0,
    "conditions": cmd_conditions,
    "sample": cmd_sample,
    "render": cmd_render,
    "verify": cmd_verify,
}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, ValidationError, DomainError) as exc:
        msg = " ".join(str(exc).split())
        print(f"bmcarpet: error: {msg}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bmcarpet: error: {exc.strerror or exc}: {exc.filename or ''}".rstrip(": "), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
