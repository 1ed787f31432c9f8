"""Command-line front end: every capability, machine-readable output.

Subcommands: simulate, asymptotics, ode, clt, lln, cltcheck, sweep, zeros,
figure. Results go to stdout as JSON by default (CSV via --format csv) or to
a file via --out; diagnostics go to stderr. Exit codes: 0 success, 1 domain
error, 2 usage error. Every output is deterministic given the flags and
--seed. RUMORLAB_THREADS caps the replica worker pool.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import asymptotics, fluid, montecarlo
from .clt import DegeneracyError, QuadratureError, clt_pipeline
from .model import InitialConfiguration, ModelParams
from .montecarlo import ExperimentConfig
from .simulate import replicate, simulate_exact

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    """Bad flag combination: reported like an argparse error (exit 2)."""


def _np_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_np_default)


def _add_init_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--standard", action="store_true",
                   help="standard initial configuration (x0=1, everything else 0); "
                        "this is also the default when no fractions are given")
    p.add_argument("--x0", type=float, default=None, help="initial ignorant fraction")
    p.add_argument("--y0", type=float, default=None, help="initial spreader fraction (default 0)")
    p.add_argument("--yi0", type=str, default=None,
                   help="comma-separated aware fractions y_{1,0}..y_{k-1,0} (default all 0)")


def _add_io_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", type=str, default=None, help="write output to this file")


def _init_from_args(args) -> InitialConfiguration:
    k = args.k
    explicit = args.x0 is not None or args.y0 is not None or args.yi0 is not None
    if args.standard and explicit:
        raise UsageError("--standard conflicts with --x0/--y0/--yi0")
    if not explicit:
        return InitialConfiguration.standard(k)
    if args.x0 is None:
        raise UsageError("--x0 is required when giving explicit initial fractions")
    if args.yi0 is not None:
        # an explicitly blank value is more likely an empty shell variable
        # than a request for the all-zero default
        if not args.yi0.strip():
            raise ValueError("--yi0 must not be blank")
        yi0 = tuple(float(v) for v in args.yi0.split(","))
    else:
        yi0 = (0.0,) * (k - 1)
    if len(yi0) != k - 1:
        raise ValueError(f"--yi0 needs exactly k-1={k - 1} entries, got {len(yi0)}")
    y0 = args.y0 if args.y0 is not None else 0.0
    return InitialConfiguration(x0=args.x0, yi0=yi0, y0=y0)


def _aware_headers(k: int) -> list[str]:
    return [f"Y_{i}" for i in range(1, k)]


def _cmd_simulate(args) -> str:
    params = ModelParams(args.k, args.n)
    init = _init_from_args(args)
    counts = montecarlo.initial_counts(init, args.n)
    if args.record:
        if args.mode != "exact" or args.replicas != 1:
            raise UsageError("--record requires --mode exact and --replicas 1")
        if args.format != "csv":
            raise UsageError("trajectory recording outputs CSV; use --format csv")
        outcome = simulate_exact(params, counts, (args.seed, 0), record=True)
        traj = outcome.trajectory
        lines = [",".join(["time", "X", *_aware_headers(args.k), "Y", "Z"])]
        for t, row in zip(traj.times, traj.states):
            lines.append(",".join([f"{t:.10g}", *(str(c) for c in row)]))
        return "\n".join(lines)

    outcomes = replicate(params, counts, args.replicas, args.seed, mode=args.mode)
    if args.format == "csv":
        header = ["replica", "X", *_aware_headers(args.k), "Y", "Z", "jump_count"]
        if args.mode == "exact":
            header.append("absorption_time")
        lines = [",".join(header)]
        for i, o in enumerate(outcomes):
            row = [str(i), *(str(c) for c in o.final_state.counts()), str(o.jump_count)]
            if args.mode == "exact":
                row.append(f"{o.absorption_time:.10g}")
            lines.append(",".join(row))
        return "\n".join(lines)
    return _dump(
        {
            "k": args.k,
            "n": args.n,
            "mode": args.mode,
            "base_seed": args.seed,
            "replicas": [
                {
                    "final_state": {
                        "ignorants": o.final_state.ignorants,
                        "aware": list(o.final_state.aware),
                        "spreaders": o.final_state.spreaders,
                        "stiflers": o.final_state.stiflers,
                    },
                    "jump_count": o.jump_count,
                    "absorption_time": o.absorption_time,
                }
                for o in outcomes
            ],
        }
    )


def _cmd_asymptotics(args) -> str:
    init = _init_from_args(args)
    s = asymptotics.asymptotic_summary(init)
    if args.format == "csv":
        y_join = ";".join(f"{v:.12g}" for v in s.y_inf)
        return (
            "k,x_inf,y_inf,z_inf,tau_inf,degenerate\n"
            f"{s.k},{s.x_inf:.12g},{y_join},{s.z_inf:.12g},{s.tau_inf:.12g},{int(s.degenerate)}"
        )
    return _dump(
        {
            "k": s.k,
            "x0": init.x0,
            "yi0": list(init.yi0),
            "y0": init.y0,
            "x_inf": s.x_inf,
            "y_inf": list(s.y_inf),
            "z_inf": s.z_inf,
            "tau_inf": s.tau_inf,
            "degenerate": s.degenerate,
            "zero_count_bound": list(s.zero_count_bound),
            "zeros": list(s.zeros),
        }
    )


def _cmd_ode(args) -> str:
    init = _init_from_args(args)
    tau = fluid.tau_infinity(init)
    t_end = args.t_end if args.t_end is not None else tau
    if t_end < 0:
        raise ValueError(f"--t-end must be >= 0, got {t_end}")
    if args.step <= 0:
        raise ValueError(f"--step must be positive, got {args.step}")
    times = np.arange(0.0, t_end + 0.5 * args.step, args.step)
    states = fluid.sample_closed_form(times, init)
    if args.format == "csv":
        return "\n".join(fluid.csv_lines(times, states, init.k))
    return _dump({"k": init.k, "tau_inf": tau, "times": times, "states": states})


def _cmd_clt(args) -> str:
    init = _init_from_args(args)
    res = clt_pipeline(init)
    if args.format == "csv":
        lines = ["quantity,row,col,value"]
        lines.append(f"x_inf,0,0,{res.x_inf:.12g}")
        for i, v in enumerate(res.y_inf):
            lines.append(f"y_inf,0,{i},{v:.12g}")
        lines.append(f"tau_inf,0,0,{res.tau_inf:.12g}")
        lines.append(f"delta_inf,0,0,{res.delta_inf:.12g}")
        for name, mat in (("lambda", res.lambda_inf), ("b", res.b_matrix), ("sigma", res.sigma)):
            for i in range(mat.shape[0]):
                for j in range(mat.shape[1]):
                    lines.append(f"{name},{i},{j},{mat[i, j]:.12g}")
        return "\n".join(lines)
    return _dump(res.to_json_dict())


def _experiment(args) -> ExperimentConfig:
    return ExperimentConfig(
        k=args.k,
        n=args.n,
        n_replicas=args.replicas,
        base_seed=args.seed,
        mode=args.mode,
        init=_init_from_args(args),
    )


def _cmd_lln(args) -> str:
    report = montecarlo.run_lln(_experiment(args))
    if args.format == "csv":
        return "\n".join(report.csv_lines())
    return _dump(report.to_json_dict())


def _cmd_cltcheck(args) -> str:
    report = montecarlo.run_clt(_experiment(args))
    if args.format == "csv":
        return "\n".join(report.csv_lines())
    return _dump(report.to_json_dict())


def _sweep_rows(k_min: int, k_max: int) -> list[dict]:
    return [
        {"k": r.k, "x_inf": r.x_inf, "y_inf": list(r.y_inf), "z_inf": r.z_inf}
        for r in montecarlo.sweep_k(k_min, k_max)
    ]


def _cmd_sweep(args) -> str:
    rows = _sweep_rows(args.k_min, args.k_max)
    if args.format == "csv":
        lines = ["k,x_inf,y_inf,z_inf"]
        for r in rows:
            y_join = ";".join(f"{v:.12g}" for v in r["y_inf"])
            lines.append(f"{r['k']},{r['x_inf']:.12g},{y_join},{r['z_inf']:.12g}")
        return "\n".join(lines)
    return _dump({"rows": rows})


def _cmd_zeros(args) -> str:
    init = _init_from_args(args)
    cls = asymptotics.classify_zeros(init, scan_points=args.points)
    if args.format == "csv":
        zeros_join = ";".join(f"{z:.12g}" for z in cls.zeros)
        return (
            "k,x0,y0,sign_changes,family_case,zero_count,zeros\n"
            f"{init.k},{init.x0:.12g},{init.y0:.12g},{cls.sign_changes},"
            f"{cls.family_case or ''},{len(cls.zeros)},{zeros_join}"
        )
    return _dump(
        {
            "k": init.k,
            "x0": init.x0,
            "yi0": list(init.yi0),
            "y0": init.y0,
            "sign_changes": cls.sign_changes,
            "possible_interior_counts": list(cls.possible_interior_counts),
            "family_case": cls.family_case,
            "theorem_counts": list(cls.theorem_counts) if cls.theorem_counts else None,
            "zeros": list(cls.zeros),
            "boundary_zero": cls.boundary_zero,
            "scan_points": cls.scan_points,
        }
    )


# the three f-profiles shown as zero-structure examples: one standard, two
# seeded variants with a small spreader fraction (k = 3 throughout)
_FIGURE3_CONFIGS = (
    InitialConfiguration.standard(3),
    InitialConfiguration(x0=0.95, yi0=(0.0, 0.0), y0=0.02),
    InitialConfiguration(x0=0.95, yi0=(0.0, 0.0), y0=0.01),
)


def _cmd_figure(args) -> str:
    if args.points is None:
        # dense 1-d grid for curves, coarse 2-d grid for the density surface
        args.points = 101 if args.figure == 4 else 1000
    if args.figure == 2:
        rows = _sweep_rows(1, args.k_max)
        if args.format == "csv":
            return "\n".join(["k,x_inf"] + [f"{r['k']},{r['x_inf']:.12g}" for r in rows])
        return _dump({"figure": 2, "rows": rows})

    if args.figure == 3:
        panels = []
        for init in _FIGURE3_CONFIGS:
            xs = np.linspace(init.x0 * 1e-3, init.x0, args.points)
            fs = asymptotics.f_eval(xs, init)
            zeros = asymptotics.classify_zeros(init).zeros
            panels.append(
                {
                    "k": init.k,
                    "x0": init.x0,
                    "y0": init.y0,
                    "x": xs,
                    "f": fs,
                    "zeros": list(zeros),
                }
            )
        if args.format == "csv":
            lines = ["panel,kind,x,value"]
            for p_idx, p in enumerate(panels):
                for x, f in zip(p["x"], p["f"]):
                    lines.append(f"{p_idx},curve,{x:.10g},{f:.10g}")
                for z in p["zeros"]:
                    lines.append(f"{p_idx},zero,{z:.12g},0")
            return "\n".join(lines)
        return _dump({"figure": 3, "panels": panels})

    # figure 4: density of the k=2 terminal Gaussian fluctuation
    res = clt_pipeline(InitialConfiguration.standard(2))
    sig = res.sigma
    det = sig[0, 0] * sig[1, 1] - sig[0, 1] * sig[1, 0]
    inv = np.array([[sig[1, 1], -sig[0, 1]], [-sig[1, 0], sig[0, 0]]]) / det
    su, sv = math.sqrt(sig[0, 0]), math.sqrt(sig[1, 1])
    u = np.linspace(-3.5 * su, 3.5 * su, args.points)
    v = np.linspace(-3.5 * sv, 3.5 * sv, args.points)
    uu, vv = np.meshgrid(u, v, indexing="ij")
    quad = inv[0, 0] * uu**2 + 2.0 * inv[0, 1] * uu * vv + inv[1, 1] * vv**2
    density = np.exp(-0.5 * quad) / (2.0 * math.pi * math.sqrt(det))
    if args.format == "csv":
        lines = ["u,v,density"]
        for i in range(len(u)):
            for j in range(len(v)):
                lines.append(f"{u[i]:.10g},{v[j]:.10g},{density[i, j]:.10g}")
        return "\n".join(lines)
    return _dump({"figure": 4, "sigma": sig, "u": u, "v": v, "density": density})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rumorlab",
        description="k-spreading rumor model: simulation, asymptotics, and CLT checks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the stochastic chain to absorption")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicas", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "embedded"), default="embedded")
    p.add_argument("--record", action="store_true",
                   help="dump the full trajectory (exact mode, single replica, CSV)")
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("asymptotics", help="limiting proportions x_inf, y_inf, z_inf, tau_inf")
    p.add_argument("--k", type=int, required=True)
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_asymptotics)

    p = sub.add_parser("ode", help="closed-form fluid trajectory samples")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t-end", type=float, default=None,
                   help="sample up to this time (default: the absorption time)")
    p.add_argument("--step", type=float, default=0.01)
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_ode)

    p = sub.add_parser("clt", help="fluctuation covariance pipeline (Lambda, delta, B, Sigma)")
    p.add_argument("--k", type=int, required=True)
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_clt)

    p = sub.add_parser("lln", help="Monte Carlo check of the limiting proportions")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicas", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "embedded"), default="embedded")
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_lln)

    p = sub.add_parser("cltcheck", help="Monte Carlo check of the fluctuation covariance")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--replicas", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=("exact", "embedded"), default="embedded")
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_cltcheck)

    p = sub.add_parser("sweep", help="x_inf (and y_inf, z_inf) across k, standard start")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=12)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("zeros", help="zero structure of the final-size function f")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--points", type=int, default=200_000, help="sign-scan resolution")
    _add_init_flags(p)
    _add_io_flags(p)
    p.set_defaults(func=_cmd_zeros)

    p = sub.add_parser("figure", help="data files for the summary figures")
    p.add_argument("--figure", type=int, choices=(2, 3, 4), required=True,
                   help="2: x_inf vs k; 3: f profiles with zeros; 4: k=2 Gaussian density")
    p.add_argument("--k-max", type=int, default=12, help="figure 2 sweep range")
    p.add_argument("--points", type=int, default=None,
                   help="grid resolution (default: 1000 curve points for figure 3, "
                        "101 axis points for figure 4)")
    _add_io_flags(p)
    p.set_defaults(func=_cmd_figure)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse already printed usage/help
        return int(e.code) if e.code is not None else 0
    try:
        text = args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except (ValueError, DegeneracyError, QuadratureError, RuntimeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
