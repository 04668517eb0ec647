"""Batch front end.

Subcommands: ml-eval, forward, observe, invert, check, example.  Every
command is deterministic: identical inputs produce byte-identical
outputs.  Exit codes: 0 success, 2 usage/parse, 3 numeric evaluation
failure, 4 model/domain error, 5 inverse-problem precondition failure.
Set FRACORDER_LOG=debug|info|warning to control logging.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .errors import InversePreconditionError, ModelError, NumericError
from .fileio import atomic_write_text, fmt_float
from .forward import (
    fourier_solution_grid,
    observe,
    read_observations_csv,
    read_observations_json,
    spatial_solution,
    write_observations_csv,
    write_observations_json,
)
from .inverse import (
    Tolerances,
    recover_vector_order,
    suggest_observation_time,
    verify_monotonicity,
)
from .mlfunc import evaluate_detailed
from .scenario import SCHEMA_ID, example_scenario_dict, load_scenario
from .symbolkit import check_conditions, diagonalize

log = logging.getLogger("fracorder.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_MODEL = 4
EXIT_INVERSE = 5


def _configure_logging() -> None:
    level_name = os.environ.get("FRACORDER_LOG", "warning").upper()
    level = getattr(logging, level_name, logging.WARNING)
    logging.basicConfig(level=level, format="[%(levelname)s] %(name)s: %(message)s")


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _json_dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _parse_complex(token: str) -> complex:
    try:
        return complex(token.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"cannot parse complex number {token!r}") from exc


def _positive_int(token: str) -> int:
    value = int(token)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _load(args) -> object:
    scenario = load_scenario(args.scenario)
    log.info("loaded scenario from %s", args.scenario)
    return scenario


def cmd_ml_eval(args) -> int:
    rows = []
    for z in args.z:
        res = evaluate_detailed(args.alpha, args.beta, z)
        rows.append((z, res))
    lines = [f"{'z':>28}  {'re(value)':>24}  {'im(value)':>24}  {'regime':>9}  {'err_est':>10}"]
    for z, res in rows:
        lines.append(
            f"{format(z, 'g'):>28}  {fmt_float(res.value.real):>24}  "
            f"{fmt_float(res.value.imag):>24}  {res.regime:>9}  {res.error_estimate:10.2e}"
        )
    _write_or_print("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_example(args) -> int:
    _write_or_print(_json_dump(example_scenario_dict()), args.out)
    return EXIT_OK


def cmd_forward(args) -> int:
    sc = _load(args)
    if sc.order is None:
        raise ModelError("scenario: forward runs need an 'order' entry")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["t"] + [f"xi_{i + 1}" for i in range(sc.box.dim)]
    for j in range(sc.symbol.m):
        header += [f"re_u{j + 1}", f"im_u{j + 1}"]
    writer.writerow(header)
    for t in args.times:
        u_hat = fourier_solution_grid(
            sc.symbol, sc.data, sc.order, t, sc.kind, threads=args.threads
        )
        flat = u_hat.reshape(sc.symbol.m, -1)
        for pos, (idx, xi) in enumerate(sc.box.node_iter()):
            row = [fmt_float(t)] + [fmt_float(v) for v in xi]
            for j in range(sc.symbol.m):
                row += [fmt_float(flat[j, pos].real), fmt_float(flat[j, pos].imag)]
            writer.writerow(row)
    _write_or_print(buf.getvalue(), args.out)

    if args.spatial_out:
        if not (args.x_lower and args.x_upper and args.x_points):
            raise ModelError("--spatial-out needs --x-lower, --x-upper and --x-points")
        axes = [
            np.linspace(lo, hi, n)
            for lo, hi, n in zip(args.x_lower, args.x_upper, args.x_points)
        ]
        sbuf = io.StringIO()
        swriter = csv.writer(sbuf, lineterminator="\n")
        sheader = ["t"] + [f"x_{i + 1}" for i in range(len(axes))]
        for j in range(sc.symbol.m):
            sheader += [f"re_u{j + 1}", f"im_u{j + 1}", f"quad_err{j + 1}"]
        swriter.writerow(sheader)
        for t in args.times:
            for x in np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(axes)):
                u, err = spatial_solution(
                    sc.symbol, sc.data, sc.order, t, x, sc.kind, threads=args.threads
                )
                row = [fmt_float(t)] + [fmt_float(v) for v in x]
                for j in range(sc.symbol.m):
                    row += [fmt_float(u[j].real), fmt_float(u[j].imag), fmt_float(err[j])]
                swriter.writerow(row)
        atomic_write_text(args.spatial_out, sbuf.getvalue())
    return EXIT_OK


def _resolve_t0(sc, suggest: bool):
    if suggest:
        diag = diagonalize(sc.symbol, sc.xi0)
        return suggest_observation_time(sc.kind, sc.beta0, tuple(diag.eigenvalues))
    if sc.t0 is None:
        raise ModelError("scenario: needs 't0' (or pass --suggest-t0)")
    return sc.t0


def cmd_observe(args) -> int:
    sc = _load(args)
    if sc.order is None:
        raise ModelError("scenario: observation runs need an 'order' entry")
    if sc.xi0 is None:
        raise ModelError("scenario: observation runs need 'xi0'")
    t0 = _resolve_t0(sc, args.suggest_t0)
    record = observe(sc.symbol, sc.data, sc.order, t0, sc.xi0, sc.kind)
    if args.out.endswith(".json"):
        write_observations_json([record], args.out)
    else:
        write_observations_csv([record], args.out)
    return EXIT_OK


def _read_records(path: str):
    if path.endswith(".json"):
        return read_observations_json(path)
    return read_observations_csv(path)


def cmd_invert(args) -> int:
    sc = _load(args)
    if args.suggest_t0:
        if sc.xi0 is None:
            raise ModelError("scenario: --suggest-t0 needs 'xi0'")
        diag = diagonalize(sc.symbol, sc.xi0)
        t0 = suggest_observation_time(sc.kind, sc.beta0, tuple(diag.eigenvalues))
        _write_or_print(_json_dump({"suggested_t0": t0, "kind": sc.kind, "beta0": sc.beta0}),
                        args.out)
        return EXIT_OK
    if not args.observation:
        raise ModelError("invert needs --observation (or --suggest-t0)")
    records = _read_records(args.observation)
    if not records:
        raise ModelError(f"{args.observation}: no observation records")
    results = []
    for record in records:
        result = recover_vector_order(
            record, sc.symbol, sc.data, sc.beta0,
            tol=sc.tolerances, expected_kind=sc.kind,
        )
        results.append(result.to_dict())
    payload = results[0] if len(results) == 1 else {
        "schema": "fracorder-recovery/1", "results": results,
    }
    _write_or_print(_json_dump(payload), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    sc = _load(args)
    if sc.xi0 is None:
        raise ModelError("scenario: check needs 'xi0'")
    diag = diagonalize(sc.symbol, sc.xi0)
    report = check_conditions(diag, sc.kind)
    lines = [f"conditions at xi0 = {list(sc.xi0)} (kind = {sc.kind})"]
    for e in report.entries:
        lines.append(
            f"  lambda_{e.index + 1} = {e.lam:.6g}: arg = {e.arg:+.6f}, "
            f"spectral_ok = {e.spectral_ok} (margin {e.spectral_margin:+.3e})"
            + (f", sign_ok = {e.sign_ok} (margin {e.sign_margin:.3e})"
               if e.sign_ok is not None else "")
        )
    if report.degenerate_pairs:
        lines.append(f"  degenerate eigenvalue pairs: {list(report.degenerate_pairs)}")
    certs = []
    if sc.t0 is not None and report.all_ok:
        for lam in diag.eigenvalues:
            cert = verify_monotonicity(sc.kind, complex(lam), sc.t0, sc.beta0)
            certs.append(cert)
            lines.append(
                f"  certificate lambda = {complex(lam):.6g}, t0 = {sc.t0:g}: "
                f"passed = {cert.passed} ({cert.n_samples} samples"
                + (f", {cert.reason}" if cert.reason else "") + ")"
            )
    sys.stdout.write("\n".join(lines) + "\n")
    if args.out:
        payload = {
            "condition_report": report.to_dict(),
            "certificates": [c.to_dict() for c in certs],
            "t0": sc.t0,
            "xi0": list(sc.xi0),
        }
        atomic_write_text(args.out, _json_dump(payload))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracorder",
        description="Forward and inverse solvers for vector-order fractional systems.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", required=True, help="scenario JSON path")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--threads", type=_positive_int, default=1,
                       help="worker threads for grid evaluation")
        p.add_argument("--seed", type=int, default=None,
                       help="reserved; the core has no randomness")

    p = sub.add_parser("ml-eval", help="evaluate Mittag-Leffler values")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--z", type=_parse_complex, nargs="+", required=True)
    common(p, scenario=False)
    p.set_defaults(func=cmd_ml_eval)

    p = sub.add_parser("example", help="emit the ready-made example scenario")
    common(p, scenario=False)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("forward", help="tabulate u_hat(t, xi) over the box")
    p.add_argument("--times", type=float, nargs="*", default=[])
    p.add_argument("--spatial-out", default=None, help="optional spatial CSV path")
    p.add_argument("--x-lower", type=float, nargs="+", default=None)
    p.add_argument("--x-upper", type=float, nargs="+", default=None)
    p.add_argument("--x-points", type=_positive_int, nargs="+", default=None)
    common(p)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("observe", help="generate an observation record")
    p.add_argument("--suggest-t0", action="store_true",
                   help="replace the scenario t0 by a certified suggestion")
    common(p)
    p.set_defaults(func=cmd_observe)

    p = sub.add_parser("invert", help="recover the vector order from an observation")
    p.add_argument("--observation", default=None, help="observation CSV/JSON path")
    p.add_argument("--suggest-t0", action="store_true",
                   help="print a certified observation time and exit")
    common(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("check", help="report spectral/sign conditions and certificates")
    common(p)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"fracorder: numeric evaluation failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ModelError as exc:
        print(f"fracorder: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except InversePreconditionError as exc:
        print(f"fracorder: inverse-problem precondition failure: {exc}", file=sys.stderr)
        return EXIT_INVERSE
    except ValueError as exc:
        print(f"fracorder: invalid argument: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"fracorder: i/o error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    raise SystemExit(main())
