"""Command-line interface.

Subcommands: classify, competitor, minimise, sweep, profile.  Output goes to
``--output`` (written atomically) or standard output; a one-line summary goes
to standard error.  Exit codes: 0 success, 1 numerical failure (a JSON error
object is printed), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

from . import __version__
from .analysis import SWEEP_COLUMNS, SweepConfig, neck_profile, sweep
from .competitors import (
    MixedChoice,
    affine_energy,
    build_competitor_field,
    competitor_shell,
    fit_shell_to_neck,
    half_shell_energy,
    mixed_energy,
    optimal_AB,
    ProlateShell,
)
from .dumps import atomic_write, field_to_bytes, mask_to_text
from .errors import NeckwallError
from .geometry import BulkSpec, NeckParams, ResolutionPolicy, build_domain, rasterize
from .minimiser import SolveOptions, el_residual, initial_state, minimise
from .potential import DoubleWell
from .regimes import PowerLog, ScalingFamily, classify

log = logging.getLogger("neckwall")


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _pair(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError("expected two numbers")
    return vals[0], vals[1]


def _add_output(p, default_format):
    p.add_argument("-o", "--output", help="output file (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--config", help="key=value file; command-line flags take precedence")


def _add_wells(p):
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--well-scale", type=float, default=1.0)


def _add_neck(p):
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)


def _add_family(p):
    for name, power in (("delta", 1.5), ("eta", 2.0)):
        p.add_argument(f"--{name}-prefactor", type=float, default=1.0)
        p.add_argument(f"--{name}-power", type=float, default=power)
        p.add_argument(f"--{name}-log-power", type=float, default=0.0)


def _add_grid(p):
    p.add_argument("--half-extent", type=float, default=1.0, help="bulk cube side L")
    p.add_argument("--flat-radius", type=float, default=None)
    p.add_argument("--neck-only", action="store_true")
    p.add_argument("--min-cells", type=int, default=8)
    p.add_argument("--neck-cells-x", type=int, default=12)
    p.add_argument("--growth", type=float, default=1.25)
    p.add_argument("--max-spacing", type=float, default=None)
    p.add_argument("--max-cells", type=int, default=2_000_000)


def _add_solver(p):
    p.add_argument("--max-iters", type=int, default=50_000)
    p.add_argument("--grad-tol", type=float, default=None)
    p.add_argument("--energy-tol", type=float, default=0.0)
    p.add_argument("--energy-window", type=int, default=10)
    p.add_argument("--ball-radius", type=float, default=None)
    p.add_argument("--preconditioner", choices=("jacobi", "amg", "none"), default="jacobi")
    p.add_argument("--no-potential", action="store_true", help="switch the double-well term off")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neckwall", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("classify", help="classify a power-log scaling family")
    _add_family(p)
    _add_output(p, "json")

    p = sub.add_parser("competitor", help="closed-form competitor energies")
    _add_neck(p)
    _add_wells(p)
    p.add_argument("--kind", choices=("affine", "shell", "mixed"), default="mixed")
    p.add_argument("--A", dest="A", type=float, default=None)
    p.add_argument("--B", dest="B", type=float, default=None)
    p.add_argument("--M", dest="M", type=float, default=None, help="outer prolate coordinate")
    p.add_argument("--discrete", action="store_true", help="also rasterise and evaluate the discrete energy")
    p.add_argument("--dump-field", help="write the sampled field as a binary dump")
    _add_grid(p)
    _add_output(p, "json")

    p = sub.add_parser("minimise", help="minimise from the piecewise-constant state")
    _add_neck(p)
    _add_wells(p)
    _add_grid(p)
    _add_solver(p)
    p.add_argument("--dump-field", help="write the minimised field as a binary dump")
    p.add_argument("--dump-mask", help="write the grid mask as a text dump")
    _add_output(p, "json")

    p = sub.add_parser("sweep", help="minimise along a scaling family")
    _add_family(p)
    _add_wells(p)
    _add_grid(p)
    _add_solver(p)
    p.add_argument("--eps-list", type=_float_list, default=[0.3, 0.2, 0.12])
    p.add_argument("--plateau-mode", choices=("footprint", "shell"), default="footprint")
    p.add_argument("--plateau-radii", type=_pair, default=None)
    _add_output(p, "csv")

    p = sub.add_parser("profile", help="rescaled neck profile (x/eps, v) as CSV")
    _add_neck(p)
    _add_wells(p)
    _add_grid(p)
    _add_solver(p)
    p.add_argument("--source", choices=("minimised", "affine", "shell", "mixed"), default="minimised")
    _add_output(p, "csv")
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _apply_config(subparser, path: str) -> None:
    """Install config values as subcommand defaults, so explicit flags win."""
    cfg = _read_config(path)
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in cfg.items():
        a = actions.get(key)
        if a is None or key in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        if a.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                val = a.type(raw) if a.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"config key {key!r}: {exc}")
            if a.choices and val not in a.choices:
                raise UsageError(f"config key {key!r}: {val!r} not in {list(a.choices)}")
            defaults[key] = val
        a.required = False
    subparser.set_defaults(**defaults)


def _family(args) -> ScalingFamily:
    return ScalingFamily(
        PowerLog(args.delta_prefactor, args.delta_power, args.delta_log_power),
        PowerLog(args.eta_prefactor, args.eta_power, args.eta_log_power),
    )


def _potential(args):
    if getattr(args, "no_potential", False):
        return None
    return DoubleWell(args.alpha, args.beta, args.well_scale)


def _grid(args, neck):
    bulk = BulkSpec(args.half_extent, args.flat_radius)
    policy = ResolutionPolicy(
        min_cells=args.min_cells, neck_cells_x=args.neck_cells_x, growth=args.growth,
        max_spacing=args.max_spacing, max_cells=args.max_cells,
    )
    return rasterize(build_domain(neck, bulk, neck_only=args.neck_only), policy)


def _options(args) -> SolveOptions:
    return SolveOptions(
        max_iters=args.max_iters, grad_tol=args.grad_tol, energy_tol=args.energy_tol,
        energy_window=args.energy_window, ball_radius=args.ball_radius,
        preconditioner=args.preconditioner,
    )


def _neck(args) -> NeckParams:
    return NeckParams(args.eps, args.delta, args.eta)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x == math.inf else None
    return x


def cmd_classify(args):
    rep = classify(_family(args))
    d = rep.to_dict()
    if args.format == "csv":
        return _csv(list(d), [[_clean(v) for v in d.values()]]), f"classify: {rep.tag.value}"
    return _json(d), f"classify: {rep.tag.value}, ell={d['ell']}"


def cmd_competitor(args):
    neck = _neck(args)
    alpha, beta = args.alpha, args.beta
    out = {"kind": args.kind, "eps": neck.eps, "delta": neck.delta, "eta": neck.eta,
           "alpha": alpha, "beta": beta}
    if args.kind == "affine":
        A = alpha if args.A is None else args.A
        B = beta if args.B is None else args.B
        MixedChoice(A, B).check(alpha, beta)
        out.update(A=A, B=B, energy=affine_energy(neck, A, B))
    else:
        if args.kind == "shell":
            A = B = 0.5 * (alpha + beta)
        else:
            opt = optimal_AB(neck, alpha, beta)
            A = opt.A if args.A is None else args.A
            B = opt.B if args.B is None else args.B
        choice = MixedChoice(A, B)
        choice.check(alpha, beta)
        r0 = BulkSpec(args.half_extent, args.flat_radius).r0
        shell = competitor_shell(neck, r0, args.M)
        a, m = fit_shell_to_neck(neck)
        out.update(
            A=A, B=B, a=a, m=m, M=shell.M,
            energy=mixed_energy(neck, choice, alpha, beta, M=shell.M),
            energy_asymptotic=mixed_energy(neck, choice, alpha, beta, asymptotic=True),
            neck_energy=affine_energy(neck, A, B),
            left_shell_energy=half_shell_energy(ProlateShell(a, m, shell.M, A, alpha)),
            right_shell_energy=half_shell_energy(ProlateShell(a, m, shell.M, B, beta)),
        )
    if args.discrete or args.dump_field:
        from .energy import energy

        grid = _grid(args, neck)
        u = build_competitor_field(grid, args.kind, alpha, beta, out["A"], out["B"], out.get("M"))
        out["discrete"] = energy(grid, u, None).to_dict()
        out["n_cells"] = grid.n_active
        if args.dump_field:
            atomic_write(args.dump_field, field_to_bytes(grid, u))
    if args.format == "csv":
        flat = {k: v for k, v in out.items() if not isinstance(v, dict)}
        return _csv(list(flat), [list(flat.values())]), f"competitor {args.kind}: energy={out['energy']:.6g}"
    return _json(out), f"competitor {args.kind}: energy={out['energy']:.6g}"


def _solve(args):
    neck = _neck(args)
    grid = _grid(args, neck)
    u0 = initial_state(grid, args.alpha, args.beta)
    res = minimise(grid, _potential(args), u0, _options(args))
    return grid, res


def cmd_minimise(args):
    grid, res = _solve(args)
    pot = _potential(args)
    out = {
        "n_cells": grid.n_active,
        "breakdown": res.breakdown.to_dict(),
        "diagnostics": res.diagnostics.to_dict(),
        "el_residual": el_residual(grid, res.field, pot),
    }
    if args.dump_field:
        atomic_write(args.dump_field, field_to_bytes(grid, res.field))
    if args.dump_mask:
        atomic_write(args.dump_mask, mask_to_text(grid))
    summary = (f"minimise: {grid.n_active} cells, total={res.breakdown.total:.6g}, "
               f"{res.diagnostics.reason} after {res.diagnostics.iterations} iterations")
    if args.format == "csv":
        flat = {"n_cells": grid.n_active, **res.breakdown.to_dict(),
                "iterations": res.diagnostics.iterations, "reason": res.diagnostics.reason,
                "el_residual": out["el_residual"]}
        return _csv(list(flat), [list(flat.values())]), summary
    return _json(out), summary


def cmd_sweep(args):
    cfg = SweepConfig(
        bulk=BulkSpec(args.half_extent, args.flat_radius),
        policy=ResolutionPolicy(
            min_cells=args.min_cells, neck_cells_x=args.neck_cells_x, growth=args.growth,
            max_spacing=args.max_spacing, max_cells=args.max_cells,
        ),
        options=_options(args),
        plateau_radii=args.plateau_radii,
        plateau_mode=args.plateau_mode,
    )
    rows = sweep(_family(args), args.eps_list, potential=_potential(args),
                 alpha=args.alpha, beta=args.beta, config=cfg)
    failed = sum(r.status != "ok" for r in rows)
    summary = f"sweep: {len(rows)} rows, {failed} failed"
    if args.format == "json":
        return _json([r.to_json_dict() for r in rows]), summary
    return _csv(SWEEP_COLUMNS, [[getattr(r, c) for c in SWEEP_COLUMNS] for r in rows]), summary


def cmd_profile(args):
    if args.source == "minimised":
        grid, res = _solve(args)
        u = res.field
    else:
        grid = _grid(args, _neck(args))
        u = build_competitor_field(grid, args.source, args.alpha, args.beta)
    s, v = neck_profile(grid, u)
    summary = f"profile: {len(s)} slabs from {args.source} field"
    if args.format == "json":
        return _json({"s": s.tolist(), "v": v.tolist()}), summary
    return _csv(("s", "v"), [(repr(float(a)), repr(float(b))) for a, b in zip(s, v)]), summary


COMMANDS = {
    "classify": cmd_classify,
    "competitor": cmd_competitor,
    "minimise": cmd_minimise,
    "sweep": cmd_sweep,
    "profile": cmd_profile,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config and command:
        try:
            sub = parser._subparsers._group_actions[0].choices[command]
            _apply_config(sub, known.config)
        except (UsageError, OSError) as exc:
            print(f"neckwall: error: {exc}", file=sys.stderr)
            return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        text, summary = COMMANDS[args.command](args)
    except (NeckwallError, ValueError, ArithmeticError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(err))
        print(f"neckwall {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    if args.output:
        atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
