"""Command-line front end: ``hypernoise <subcommand> ...``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from ._accel import backend_name
from .channels import KINDS
from .experiments import (
    ALIASES,
    DEFAULT_POINTS,
    HEATMAP_ANGLES,
    MAX_S_ANGLES,
    REGISTRY,
    ExperimentSpec,
    emit_plot_script,
    reduced_output,
    base_state,
    reproduce,
    run_experiment,
    write_csv,
)
from .matcore import polarization_part
from .measures import COARSE_RESOLUTION, GENERATOR, correlation_E, simulate_coincidences

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


_FIGURES = sorted(ALIASES, key=lambda a: (len(a), a))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hypernoise",
        description="Path-conditioned noise on hyperentangled photon pairs.",
        epilog=(
            f"Defaults: {DEFAULT_POINTS} p-points for curves, "
            f"{COARSE_RESOLUTION}x{COARSE_RESOLUTION} angle grid for heatmaps. "
            "HYPERNOISE_THREADS caps worker threads; "
            "HYPERNOISE_DISABLE_NUMBA=1 forces the numpy kernels."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("reproduce", help="reproduce a figure as CSV + plot script")
    r.add_argument("--figure", required=True, help=f"'all', {', '.join(_FIGURES)} or a runner name")
    r.add_argument("--out", default="results", type=Path)
    r.add_argument("--points", type=int)
    r.add_argument("--resolution", type=int)
    r.add_argument("--seed", type=int)

    def curve(name, help_):
        c = sub.add_parser(name, help=help_)
        c.add_argument("--noise", choices=KINDS, required=True)
        c.add_argument("--points", type=int, default=DEFAULT_POINTS)
        c.add_argument("--start", type=float, default=0.0)
        c.add_argument("--stop", type=float, default=1.0)
        c.add_argument("--out", type=Path, required=True)
        return c

    curve("negativity-curve", "polarization negativity vs p")
    curve("witness-curve", "witness expectation vs p")
    m = curve("chsh-max-curve", "fixed-angle maximum of S vs p")
    m.add_argument("--theta", type=float, default=MAX_S_ANGLES[0])
    m.add_argument("--delta", type=float, default=MAX_S_ANGLES[1])
    m.add_argument("--resolution", type=int, default=COARSE_RESOLUTION)

    h = sub.add_parser("chsh-heatmap", help="S over (theta', delta') in [0, pi]^2")
    h.add_argument("--noise", choices=KINDS + ("none",), default="none")
    h.add_argument("--p", type=float, default=0.0)
    h.add_argument("--state", choices=("e", "he"), default="e")
    h.add_argument("--theta", type=float, default=HEATMAP_ANGLES[0])
    h.add_argument("--delta", type=float, default=HEATMAP_ANGLES[1])
    h.add_argument("--resolution", type=int, default=COARSE_RESOLUTION)
    h.add_argument("--out", type=Path, required=True)

    s = sub.add_parser("stinespring-curve", help="negativity under the dilated unitary model")
    s.add_argument("--dof", choices=("pol", "path"), required=True)
    s.add_argument("--points", type=int, default=DEFAULT_POINTS)
    s.add_argument("--out", type=Path, required=True)

    c = sub.add_parser("coincidence", help="sample coincidence counts and estimate E")
    c.add_argument("--theta", type=float, required=True)
    c.add_argument("--delta", type=float, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--noise", choices=KINDS + ("none",), default="none")
    c.add_argument("--p", type=float, default=0.0)
    c.add_argument("--state", choices=("e", "he"), default="e")

    sub.add_parser("selftest", help="run the CPTP, closed-form and dilation checks")
    return parser


def _write(results, out: Path):
    out.parent.mkdir(parents=True, exist_ok=True)
    for res in results.values():
        write_csv(res, out)
        emit_plot_script(res, out.with_name(out.stem + "_plot.py"), out.name)
        print(out)


def _cmd_reproduce(args):
    figures = [ALIASES.get(a) for a in _FIGURES] if args.figure == "all" else [args.figure]
    for fig in figures:
        if fig not in REGISTRY and fig not in ALIASES:
            raise UsageError(f"unknown figure id {fig!r}")
        for path in reproduce(
            fig, args.out, points=args.points, resolution=args.resolution, seed=args.seed
        ):
            print(path)


def _cmd_curve(name, args, **extra):
    spec = ExperimentSpec(
        name=name,
        noise=args.noise,
        start=args.start,
        stop=args.stop,
        points=args.points,
        **extra,
    )
    _write(run_experiment(spec), args.out)


def _cmd_heatmap(args):
    noise = None if args.noise == "none" else args.noise
    spec = ExperimentSpec(
        name=f"{args.noise}-heatmap" if noise else "noiseless-heatmap",
        noise=noise,
        states=(args.state,),
        p=args.p,
        theta=args.theta,
        delta=args.delta,
        resolution=args.resolution,
    )
    _write(run_experiment(spec), args.out)


def _cmd_coincidence(args):
    if args.n < 1 or args.seed < 0:
        raise UsageError("--n must be positive and --seed non-negative")
    if args.noise == "none":
        rho = polarization_part(base_state(args.state))
    else:
        rho = reduced_output(args.noise, args.p, args.state)
    counts, est = simulate_coincidences(rho, args.theta, args.delta, args.n, args.seed)
    print(f"generator,{GENERATOR}")
    print("c_hh,c_hv,c_vh,c_vv,n,seed,e_estimate,e_exact")
    exact = correlation_E(rho, args.theta, args.delta)
    print(
        f"{counts.c_hh},{counts.c_hv},{counts.c_vh},{counts.c_vv},"
        f"{counts.n_total},{counts.seed},{est:.12g},{exact:.12g}"
    )


def _cmd_selftest(_args):
    from .selftest import run_all

    ok = True
    for name, passed, detail in run_all():
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        ok &= passed
    print(f"backend: {backend_name()}")
    return EXIT_OK if ok else EXIT_RUNTIME


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cmd = args.command
        if cmd == "reproduce":
            _cmd_reproduce(args)
        elif cmd == "negativity-curve":
            _cmd_curve(f"{args.noise}-negativity", args)
        elif cmd == "witness-curve":
            _cmd_curve(f"{args.noise}-witness", args)
        elif cmd == "chsh-max-curve":
            _cmd_curve(
                f"{args.noise}-max-s", args,
                theta=args.theta, delta=args.delta, resolution=args.resolution,
            )
        elif cmd == "chsh-heatmap":
            _cmd_heatmap(args)
        elif cmd == "stinespring-curve":
            spec = ExperimentSpec(
                name="stinespring-" + ("polarization" if args.dof == "pol" else "path"),
                dof=args.dof, points=args.points
            )
            _write(run_experiment(spec), args.out)
        elif cmd == "coincidence":
            _cmd_coincidence(args)
        elif cmd == "selftest":
            return _cmd_selftest(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError, ArithmeticError) as exc:
        print(f"hypernoise: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
