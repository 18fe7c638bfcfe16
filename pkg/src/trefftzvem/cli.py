"""Command line front end: run registered experiments, list them."""

from __future__ import annotations

import argparse
import sys

from . import experiments


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="trefftz-vem",
        description="Plane-wave virtual element experiments for the "
                    "2D Helmholtz equation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="enumerate registered experiments")

    p_run = sub.add_parser("run", help="run one experiment")
    p_run.add_argument("name", help="experiment name (see `list`)")
    p_run.add_argument("--config", help="JSON config file overriding "
                                        "the built-in defaults")
    p_run.add_argument("--k", type=float, help="wavenumber")
    p_run.add_argument("--q", type=int, help="effective plane-wave degree")
    p_run.add_argument("--sigma", type=float,
                       help="eigenvalue truncation threshold (default 1e-13)")
    p_run.add_argument("--basis", choices=["filtered", "orthonormal"],
                       help="edge basis pipeline")
    p_run.add_argument("--stab", choices=["identity", "drecipe"],
                       help="stabilization variant")
    p_run.add_argument("--theta", type=float, choices=[-1.0, 1.0],
                       help="impedance sign")
    p_run.add_argument("--solution",
                       choices=["u0", "u1", "u2", "u3", "u4"],
                       help="reference solution")
    p_run.add_argument("--scatter", choices=["soft", "hard"],
                       help="scatterer type")
    p_run.add_argument("--incident", choices=["u0", "u1", "u4"],
                       help="incident plane wave for scattering")
    p_run.add_argument("--out", help="output directory "
                                     "(default results/<name>)")
    p_run.add_argument("--mesh", help="mesh file path (replaces the "
                                      "experiment's mesh family)")
    p_run.add_argument("--cartesian", type=int, metavar="N",
                       help="single Cartesian NxN level")
    p_run.add_argument("--hole", type=int, metavar="LEVEL",
                       help="single holed-domain level")
    p_run.add_argument("--graded", nargs=2, metavar=("N", "MU"),
                       help="graded mesh: refinement count and ratio")
    p_run.add_argument("--bc", choices=["D", "N", "R"],
                       help="label applied to all outer boundary edges")
    return parser


def _overrides(args) -> dict:
    over = {}
    for key in ("k", "q", "sigma", "basis", "stab", "theta",
                "solution", "scatter", "incident", "out"):
        val = getattr(args, key)
        if val is not None:
            over[key] = val
    mesh_update = {}
    if args.mesh is not None:
        mesh_update["paths"] = [args.mesh]
    if args.cartesian is not None:
        mesh_update["levels"] = [args.cartesian]
    if args.hole is not None:
        mesh_update["levels"] = [args.hole]
    if args.graded is not None:
        n, mu = args.graded
        mesh_update["levels"] = [int(n)]
        over["probe"] = {"mu": [float(mu)], "n_max": int(n)}
    if args.bc is not None:
        mesh_update["bc"] = args.bc
    if mesh_update:
        over["mesh_update"] = mesh_update
    return over


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        for name in experiments.experiment_names():
            print(f"{name:18s} {experiments.DESCRIPTIONS[name]}")
        return 0
    try:
        experiments.run_experiment(args.name, args.config, _overrides(args))
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return 2
    out = experiments.load_config(args.name, args.config,
                                  _overrides(args)).out_dir
    print(f"wrote {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
