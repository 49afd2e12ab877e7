"""Command-line front end.

Every run writes its artifacts plus ``manifest.json`` (all resolved
parameters) into the output directory: ``--out``, else ``$R4BP_OUTPUT_DIR``,
else the current directory.  Parameters may also come from a ``key = value``
file given with ``--config``; flags win over the file.

Exit codes: 0 ok, 2 usage/validation error, 3 numerical stop (singularity or
m1 collision, partial output written), 4 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .analysis import find_equilibria, raster_hill, routh_interval, shared_levels
from .errors import CollisionError, ConvergenceError, DomainError, IntegrationError, R4BPError
from .integrate import IntegratorConfig, _jsonable, integrate_with_regularization
from .model import SynodicState, jacobi_constant
from .orbits import continue_family, ejection_orbit, refine_symmetric_orbit
from .regularization import branch_label, preimages

EXIT_OK, EXIT_USAGE, EXIT_STOP, EXIT_NOCONV = 0, 2, 3, 4
OUTPUT_ENV = "R4BP_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        values = [float(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse numbers from {text!r}") from exc
    if n is not None and len(values) != n:
        raise UsageError(f"expected {n} comma-separated numbers, got {text!r}")
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"non-finite value in {text!r}")
    return values


def read_config(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    A ``manifest.json`` from an earlier run is accepted as well, so a run can
    be repeated from its manifest alone.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            params = json.loads(text)["parameters"]
        except (ValueError, KeyError) as exc:
            raise UsageError(f"{path}: not a manifest") from exc
        return {k: ("" if v is None else str(v)) for k, v in params.items() if k != "command"}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_tolerances(p):
    p.add_argument("--rtol", type=float, default=1e-12, help="relative tolerance (default 1e-12)")
    p.add_argument("--atol", type=float, default=1e-12, help="absolute tolerance (default 1e-12)")
    p.add_argument("--max-step", type=float, default=math.inf, help="largest step size (default unbounded)")
    p.add_argument("--max-steps", type=int, default=1_000_000, help="step budget (default 1e6)")
    p.add_argument("--switch-radius", type=float, default=0.05, help="distance to m2/m3 that triggers the regularized chart")
    p.add_argument("--stop-radius", type=float, default=1e-3, help="distance to m1 that stops integration")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="r4bp", description="Regularized equilateral restricted four-body problem")
    parser.add_argument("--version", action="version", version=f"r4bp {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or .)")
    common.add_argument("--config", default=None, help="key = value parameter file; flags override it")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in the manifest (default 0)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", parents=[common], help="integrate one trajectory")
    p.add_argument("--mu", type=float, required=True, help="mass parameter in [0, 1/2]")
    p.add_argument("--state", required=True, help='initial "x,y,xdot,ydot"')
    p.add_argument("--horizon", type=float, required=True, help="physical time span (negative integrates backwards)")
    p.add_argument("--C", type=float, default=None, help="Jacobi constant (default: from the state)")
    p.add_argument("--regularize", action="store_true", help="switch to the regularized chart near m2/m3")
    _add_tolerances(p)

    p = sub.add_parser("hill", parents=[common], help="rasterize a Hill region")
    p.add_argument("--mu", type=float, required=True, help="mass parameter")
    p.add_argument("--C", type=float, required=True, help="Jacobi constant")
    p.add_argument("--space", choices=("u", "w"), default="u", help="u (translated) or w (regularized) plane")
    p.add_argument("--bounds", default="-2,2,-2,2", help='"xmin,xmax,ymin,ymax" (default -2,2,-2,2)')
    p.add_argument("--resolution", default="512,512", help='"nx,ny" (default 512,512)')

    p = sub.add_parser("equilibria", parents=[common], help="critical points of the effective potential")
    p.add_argument("--mu", type=float, required=True, help="mass parameter in (0, 1/2]")
    p.add_argument("--seeds", type=int, default=50, help="Newton seed grid density per axis (default 50)")

    sub.add_parser("routh", parents=[common], help="critical mass parameter of Routh's criterion")

    p = sub.add_parser("preimage", parents=[common], help="pre-images of u under the Birkhoff map")
    p.add_argument("--u", required=True, help='"re,im" of the point u')

    p = sub.add_parser("eject", parents=[common], help="ejection orbit from m2 or m3")
    p.add_argument("--mu", type=float, required=True, help="mass parameter in (0, 1/2]")
    p.add_argument("--C", type=float, required=True, help="Jacobi constant")
    p.add_argument("--primary", type=int, choices=(2, 3), default=2, help="ejecting primary (default 2)")
    p.add_argument("--angle", type=float, default=0.0, help="physical ejection direction in radians")
    p.add_argument("--horizon", type=float, default=50.0, help="fictitious-time span (default 50)")
    _add_tolerances(p)

    p = sub.add_parser("continue", parents=[common], help="continue a symmetric periodic orbit family in C")
    p.add_argument("--mu", type=float, required=True, help="mass parameter")
    p.add_argument("--x0", type=float, required=True, help="x of the perpendicular x-axis crossing")
    p.add_argument("--ydot0", type=float, required=True, help="guess for ydot at the crossing")
    p.add_argument("--half-period", type=float, required=True, help="guess for the half period")
    p.add_argument("--dC", type=float, required=True, help="signed range of C to cover (sign sets the direction)")
    p.add_argument("--crossing", type=int, default=1, help="x-axis crossing index closing the half orbit (default 1)")
    p.add_argument("--step", type=float, default=1e-2, help="initial continuation step (default 0.01)")
    p.add_argument("--max-orbits", type=int, default=500, help="member limit (default 500)")
    p.add_argument("--min-step", type=float, default=1e-6, help="smallest continuation step before giving up (default 1e-6)")
    p.add_argument("--period-factor", type=float, default=50.0, help="period blow-up threshold relative to seed")
    _add_tolerances(p)
    return parser, sub.choices


def _integrator_config(args) -> IntegratorConfig:
    try:
        return IntegratorConfig(
            rel_tol=args.rtol,
            abs_tol=args.atol,
            max_step=args.max_step,
            max_steps=args.max_steps,
            collision_switch_radius=args.switch_radius,
            singularity_stop_radius=args.stop_radius,
        )
    except DomainError as exc:
        raise UsageError(str(exc)) from exc


def _write(outdir: Path, name: str, text: str, written: list) -> None:
    (outdir / name).write_text(text)
    written.append(name)


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True, allow_nan=True) + "\n"


def cmd_integrate(args, outdir, written, info) -> int:
    x, y, xd, yd = _floats(args.state, 4)
    if args.horizon == 0 or not math.isfinite(args.horizon):
        raise UsageError("--horizon must be finite and non-zero")
    state = SynodicState(x, y, xd, yd, 0.0)
    config = _integrator_config(args)
    if args.C is None:
        args.C = jacobi_constant(state, args.mu)
    code = EXIT_OK
    try:
        traj = integrate_with_regularization(state, args.C, args.horizon, args.mu, config, regularize=args.regularize)
    except IntegrationError as exc:
        traj, code = exc.trajectory, EXIT_STOP
    _write(outdir, "trajectory.csv", traj.to_csv(), written)
    _write(outdir, "events.json", traj.events_json() + "\n", written)
    info["status"] = traj.status
    if traj.status in ("singularity_stop", "collision_m1"):
        code = EXIT_STOP
    return code


def cmd_hill(args, outdir, written, info) -> int:
    bounds = _floats(args.bounds, 4)
    res = _floats(args.resolution, 2)
    if any(r != int(r) for r in res):
        raise UsageError("--resolution needs integers")
    raster = raster_hill(args.space, bounds, [int(r) for r in res], args.C, args.mu)
    _write(outdir, "hill.pgm", raster.to_pgm(), written)
    side = raster.sidecar()
    side["components"] = raster.component_count()
    _write(outdir, "hill.json", _dump(side), written)
    info["components"] = side["components"]
    return EXIT_OK


def cmd_equilibria(args, outdir, written, info) -> int:
    eqs = find_equilibria(args.mu, args.seeds)
    doc = {
        "mu": args.mu,
        "equilibria": [e.to_json() for e in eqs],
        "levels": [{"C": c, "count": n} for c, n in shared_levels(eqs)],
    }
    _write(outdir, "equilibria.json", _dump(doc), written)
    info["count"] = len(eqs)
    return EXIT_OK


def cmd_routh(args, outdir, written, info) -> int:
    doc = {"mu_critical": routh_interval()}
    _write(outdir, "routh.json", _dump(doc), written)
    print(json.dumps(doc))
    return EXIT_OK


def cmd_preimage(args, outdir, written, info) -> int:
    re_, im_ = _floats(args.u, 2)
    u = complex(re_, im_)
    roots = [
        {"root": p.root, "multiplicity": p.multiplicity, "branch": branch_label(p.root, u) if p.multiplicity == 1 else "double"}
        for p in preimages(u)
    ]
    doc = {"u": u, "roots": roots}
    _write(outdir, "preimage.json", _dump(doc), written)
    print(json.dumps(_jsonable(doc)))
    return EXIT_OK


def cmd_eject(args, outdir, written, info) -> int:
    if args.horizon == 0 or not math.isfinite(args.horizon):
        raise UsageError("--horizon must be finite and non-zero")
    config = _integrator_config(args)
    code = EXIT_OK
    try:
        orbit = ejection_orbit(args.primary, args.C, args.angle, args.horizon, args.mu, config)
        traj = orbit.trajectory
    except IntegrationError as exc:
        traj, code = exc.trajectory, EXIT_STOP
    _write(outdir, "trajectory.csv", traj.to_csv(), written)
    _write(outdir, "events.json", traj.events_json() + "\n", written)
    info["status"] = traj.status
    if traj.status in ("singularity_stop", "collision_m1"):
        code = EXIT_STOP
    return code


def cmd_continue(args, outdir, written, info) -> int:
    if args.dC == 0 or not math.isfinite(args.dC):
        raise UsageError("--dC must be finite and non-zero")
    config = _integrator_config(args)
    seed = refine_symmetric_orbit(
        args.x0, args.mu, args.half_period, ydot0=args.ydot0, crossing=args.crossing, config=config, stability=False
    )
    direction = 1 if args.dC > 0 else -1
    family = continue_family(
        seed,
        direction=direction,
        step=args.step,
        c_end=seed.jacobi_constant + args.dC,
        max_orbits=args.max_orbits,
        period_factor=args.period_factor,
        min_step=args.min_step,
        max_step=max(args.step, args.min_step),
        config=config,
    )
    _write(outdir, "family.jsonl", family.to_jsonl(), written)
    info["termination"] = family.termination
    info["members"] = len(family.orbits)
    return EXIT_OK


COMMANDS = {
    "integrate": cmd_integrate,
    "hill": cmd_hill,
    "equilibria": cmd_equilibria,
    "routh": cmd_routh,
    "preimage": cmd_preimage,
    "eject": cmd_eject,
    "continue": cmd_continue,
}


def _apply_config(subparser, values: dict[str, str]) -> None:
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    for key, raw in values.items():
        if key not in actions:
            raise UsageError(f"unknown config key {key!r}")
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.strip().lower() in ("1", "true", "yes", "on")
        elif raw == "":
            value = None
        else:
            # argparse applies ``type`` to string defaults
            value = raw
        action.default = value
        action.required = False


def _prescan_config(argv: list[str]) -> str | None:
    for k, tok in enumerate(argv):
        if tok == "--config" and k + 1 < len(argv):
            return argv[k + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = build_parser()
    try:
        cfg_path = _prescan_config(argv)
        command = next((a for a in argv if not a.startswith("-")), None)
        if cfg_path is not None and command in subparsers:
            _apply_config(subparsers[command], read_config(cfg_path))
    except UsageError as exc:
        print(f"r4bp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    outdir = Path(args.out or os.environ.get(OUTPUT_ENV) or ".")
    written: list[str] = []
    info: dict = {}
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        code = COMMANDS[args.command](args, outdir, written, info)
    except (UsageError, DomainError) as exc:
        print(f"r4bp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, CollisionError) as exc:
        print(f"r4bp: no convergence: {exc}", file=sys.stderr)
        info["error"] = str(exc)
        code = EXIT_NOCONV
    except R4BPError as exc:
        print(f"r4bp: numerical stop: {exc}", file=sys.stderr)
        info["error"] = str(exc)
        code = EXIT_STOP
    except OSError as exc:
        print(f"r4bp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    params = {k: v for k, v in vars(args).items() if k not in ("out", "config")}
    manifest = {
        "version": __version__,
        "command": args.command,
        "parameters": params,
        "outputs": written,
        "result": info,
        "exit_code": code,
    }
    (outdir / "manifest.json").write_text(_dump(manifest))
    return code


if __name__ == "__main__":
    sys.exit(main())
