"""Command-line front end: ``canonmoments <subcommand> [options]``.

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

import argparse
import csv
import json
import math
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .dynamics import BarrierSpec, tunneling_run, tunneling_sweep
from .effective import exact_ground_state, ground_state_estimate
from .effpot2 import low_energy_grid, minimize_moment_sector, normal_mode_frequencies
from .errors import MomentError
from .moments import MomentIndex, bracket_single_dof, truncate
from .potentials import BUILTIN_POTENTIALS, coupled_harmonic, make_potential
from .realizations import get_realization, realization_names
from .reconstruction import MomentInput, density_from_moments, gaussian_moments, phase_from_moments
from .thermo import (
    bessel_k0,
    ensemble_averages,
    log_partition_function,
    log_partition_function_quadrature,
    quadrature_averages,
    two_point_function,
)
from .weyl import weyl_bracket_oracle

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


class UsageError(Exception):
    pass


# every subcommand: allowed config keys and their defaults (None = required)
SCHEMAS = {
    "bracket": {},
    "realize": {"realization": None, "point": None},
    "tunnel": {
        "V_top": None,
        "gamma": None,
        "U": None,
        "m": 1.0,
        "model": "all_orders",
        "t_max": 50.0,
        "sweep_param": None,
        "sweep_values": None,
    },
    "thermo": {"beta": 1.0, "omega": 1.0, "m": 1.0, "distances": [], "quadrature": True},
    "effpot": {"V11": None, "V22": None, "V12": None, "hbar": 1.0, "grid": None},
    "ground": {"potential": "abs", "U": 0.25, "m": 1.0, "model": "all_orders", "N": 200, "params": {}},
    "reconstruct": {
        "a": None,
        "b": None,
        "hbar": 1.0,
        "N": 12,
        "q_min": -4.0,
        "q_max": 4.0,
        "n_grid": 801,
        "gaussian_mean": None,
        "gaussian_k": None,
    },
}
OPTIONAL_ALLOWED = {"tunnel": {"sweep_param", "sweep_values"}, "effpot": {"grid"}}


def _load_config(path):
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        if p.suffix.lower() == ".toml":
            return tomllib.loads(text.decode())
        return json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None


def resolve(cmd, config, flags):
    """Merge defaults < config file < command-line flags and validate keys."""
    schema = SCHEMAS[cmd]
    unknown = set(config) - set(schema)
    if unknown:
        raise UsageError(f"unknown config keys for '{cmd}': {sorted(unknown)}")
    out = dict(schema)
    out.update(config)
    out.update({k: v for k, v in flags.items() if v is not None and k in schema})
    for k, v in out.items():
        if v is None and k not in OPTIONAL_ALLOWED.get(cmd, set()):
            if cmd == "effpot" and k in ("V11", "V22", "V12"):
                continue
            if cmd == "reconstruct" and k in ("a", "b", "gaussian_mean", "gaussian_k"):
                continue
            raise UsageError(f"missing required key '{k}' for '{cmd}'")
    return out


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=float) + "\n")


def _manifest(out, cmd, params, args, files):
    data = {
        "command": cmd,
        "parameters": params,
        "seed": args.seed,
        "tolerance": args.tol,
        "files": sorted(files),
        "versions": {
            "canonmoments": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    _write_json(out / "manifest.json", data)


def _outdir(args):
    out = Path(args.out or "canonmoments-out")
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands -------------------------------------------------------------


def cmd_bracket(args, params):
    try:
        A = MomentIndex.parse(args.A, args.dof)
        B = MomentIndex.parse(args.B, args.dof)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.dof == 1 and not args.oracle:
        poly = bracket_single_dof(A, B, args.order)
    else:
        poly = weyl_bracket_oracle(A, B)
        if args.order is not None:
            poly = truncate(poly, args.order)
    print(poly)
    return {"bracket": str(poly)}


def cmd_realize(args, params):
    R = get_realization(params["realization"])
    point = params["point"]
    if not isinstance(point, dict):
        raise UsageError("'point' must be a mapping of chart names to values")
    missing = set(R.chart.names) - set(point)
    extra = set(point) - set(R.chart.names)
    if missing or extra:
        raise UsageError(f"point for {R.name} needs exactly {list(R.chart.names)}")
    state = R.state(R.chart.point(point))
    text = state.to_json()
    print(text)
    return json.loads(text)


def cmd_tunnel(args, params):
    spec = BarrierSpec(float(params["V_top"]), float(params["gamma"]), float(params["U"]), float(params["m"]))
    out = _outdir(args)
    tol = args.tol or 1e-10
    res = tunneling_run(spec, params["model"], float(params["t_max"]), tol)
    traj = res.trajectory
    _write_csv(out / "trajectory.csv", traj.header(), traj.rows())
    summary = {
        "status": res.status,
        "tunneling_time": res.tunneling_time,
        "exit_position": res.exit_position,
        "exit_momentum": res.exit_momentum,
        "q_top": res.q_top,
        "E0": res.E0,
        "energy_drift": traj.energy_drift,
        "time_definition": res.time_definition,
        "events": [{"time": t, "kind": k} for t, k in traj.events],
    }
    _write_json(out / "events.json", summary)
    files = ["trajectory.csv", "events.json"]
    if params.get("sweep_param"):
        values = params.get("sweep_values") or []
        rows = tunneling_sweep(spec, params["sweep_param"], values, params["model"], float(params["t_max"]), tol)
        _write_csv(
            out / "sweep.csv",
            ["param", "time", "exit_q", "exit_pi", "status"],
            [[r.param, r.time, r.exit_q, r.exit_pi, r.status] for r in rows],
        )
        files.append("sweep.csv")
    print(json.dumps({k: v for k, v in summary.items() if k != "events"}, sort_keys=True))
    return summary, files


def cmd_thermo(args, params):
    out = _outdir(args)
    beta, omega = float(params["beta"]), float(params["omega"])
    cf = ensemble_averages(beta, omega)
    row = {
        "beta": beta,
        "omega": omega,
        "Z": math.exp(log_partition_function(beta, omega)),
        "s2": cf.s2,
        "E": cf.E,
        "U": cf.U,
    }
    if params["quadrature"]:
        qa = quadrature_averages(beta, omega)
        row["dZ_rel"] = math.expm1(log_partition_function_quadrature(beta, omega) - log_partition_function(beta, omega))
        row["ds2"] = qa.s2 - cf.s2
        row["dE"] = qa.E - cf.E
        row["dU"] = qa.U - cf.U
    _write_csv(out / "thermo.csv", list(row), [list(row.values())])
    files = ["thermo.csv"]
    m = float(params["m"])
    if params["distances"]:
        rows = []
        for r in params["distances"]:
            g = two_point_function(float(r), m, beta)
            rows.append([float(r), g, bessel_k0(m * float(r)) / (2 * math.pi)])
        _write_csv(out / "two_point.csv", ["r", "G2", "K0_over_2pi"], rows)
        files.append("two_point.csv")
    print(json.dumps(row, sort_keys=True))
    return row, files


def cmd_effpot(args, params):
    hbar = float(params["hbar"])
    if args.coupled_oscillator:
        V = coupled_harmonic(args.omega, args.gamma)
        h = V.hessian(0.0, 0.0)
        exact = 0.5 * hbar * args.omega * (math.sqrt(1 + args.gamma) + math.sqrt(1 - args.gamma))
    else:
        if any(params[k] is None for k in ("V11", "V22", "V12")):
            raise UsageError("give --coupled-oscillator or all of V11, V22, V12")
        from .potentials import Hessian2

        h = Hessian2(float(params["V11"]), float(params["V22"]), float(params["V12"]))
        V = None
        exact = None
    sec = minimize_moment_sector(h, hbar)
    w_hi, w_lo = normal_mode_frequencies(h)
    result = {
        "s1": sec.s1,
        "s2": sec.s2,
        "beta": sec.beta,
        "E": sec.energy,
        "V_low_minus_V": 0.5 * hbar * (w_hi + w_lo),
        "method": sec.method,
    }
    if exact is not None:
        result["exact"] = exact
    files = []
    grid = params.get("grid")
    if grid and V is not None:
        out = _outdir(args)
        q1s = np.linspace(*grid["q1"])
        q2s = np.linspace(*grid["q2"])
        rows = low_energy_grid(V, q1s, q2s, hbar)
        _write_csv(
            out / "v_low.csv",
            ["q1", "q2", "V", "V_low", "s1", "s2", "beta"],
            [[r.q1, r.q2, r.V, r.V_low, r.s1, r.s2, r.beta] for r in rows],
        )
        files.append("v_low.csv")
    print(json.dumps(result, sort_keys=True))
    return result, files


def cmd_ground(args, params):
    try:
        V = make_potential(params["potential"], **params["params"])
    except (KeyError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    est = ground_state_estimate(V, float(params["U"]), float(params["m"]), params["model"])
    exact = exact_ground_state(V, int(params["N"]), m=float(params["m"]))
    result = {"q": est.q, "s": est.s, "E": est.E, "exact": exact, "model": est.model}
    print(json.dumps(result, sort_keys=True))
    return result


def cmd_reconstruct(args, params):
    N = int(params["N"])
    if params["gaussian_mean"] is not None or params["gaussian_k"] is not None:
        mi = gaussian_moments(float(params["gaussian_mean"] or 0.0), float(params["gaussian_k"] or 0.0), max(N, 2), float(params["hbar"]))
    elif params["a"] is not None:
        mi = MomentInput(tuple(params["a"]), tuple(params["b"] or ()), float(params["hbar"]))
    else:
        raise UsageError("give moments 'a' (and optionally 'b') or a Gaussian mean/boost")
    q = np.linspace(float(params["q_min"]), float(params["q_max"]), int(params["n_grid"]))
    dens = density_from_moments(mi, N, q)
    if mi.b:
        ph = phase_from_moments(mi, dens, N)
        dal, al = ph.dalpha_dq, ph.alpha
    else:
        dal = al = np.full_like(q, math.nan)
    out = _outdir(args)
    _write_csv(out / "reconstruction.csv", ["q", "density", "dalpha_dq", "alpha"], zip(q, dens.density, dal, al))
    result = {"norm_raw": dens.norm, "residual": dens.residual, "hankel_ok": dens.hankel_ok}
    print(json.dumps(result, sort_keys=True))
    return result, ["reconstruction.csv"]


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON or TOML parameter file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)

    p = argparse.ArgumentParser(prog="canonmoments", description="Canonical moment variables toolkit")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("bracket", parents=[common], help="moment bracket as a polynomial")
    b.add_argument("A")
    b.add_argument("B")
    b.add_argument("--order", type=int, default=None)
    b.add_argument("--dof", type=int, default=1)
    b.add_argument("--oracle", action="store_true", help="use the operator-algebra oracle")

    r = sub.add_parser("realize", parents=[common], help="moments at a chart point")
    r.add_argument("realization", nargs="?", choices=realization_names())
    r.add_argument("--point", type=json.loads, help="JSON mapping of chart values")

    t = sub.add_parser("tunnel", parents=[common], help="tunneling run in the quartic barrier")
    t.add_argument("--V-top", dest="V_top", type=float)
    t.add_argument("--gamma", type=float)
    t.add_argument("--U", type=float)
    t.add_argument("--m", type=float)
    t.add_argument("--model", choices=["all_orders", "order2", "order3_ansatz"])
    t.add_argument("--t-max", dest="t_max", type=float)

    th = sub.add_parser("thermo", parents=[common], help="thermal averages of one field mode")
    th.add_argument("--beta", type=float)
    th.add_argument("--omega", type=float)
    th.add_argument("--m", type=float)
    th.add_argument("--distances", type=lambda s: [float(v) for v in s.split(",")])

    e = sub.add_parser("effpot", parents=[common], help="two-DOF ground-state moment sector")
    e.add_argument("--coupled-oscillator", action="store_true")
    e.add_argument("--gamma", type=float, default=0.5)
    e.add_argument("--omega", type=float, default=1.0)
    e.add_argument("--V11", type=float)
    e.add_argument("--V22", type=float)
    e.add_argument("--V12", type=float)
    e.add_argument("--hbar", type=float)

    g = sub.add_parser("ground", parents=[common], help="ground-state energy estimates")
    g.add_argument("--potential", choices=sorted(BUILTIN_POTENTIALS))
    g.add_argument("--U", type=float)
    g.add_argument("--m", type=float)
    g.add_argument("--model", choices=["all_orders", "order2"])
    g.add_argument("--N", type=int)

    rc = sub.add_parser("reconstruct", parents=[common], help="density and phase from moments")
    rc.add_argument("--N", type=int)
    rc.add_argument("--gaussian-mean", dest="gaussian_mean", type=float)
    rc.add_argument("--gaussian-k", dest="gaussian_k", type=float)
    return p


COMMANDS = {
    "bracket": cmd_bracket,
    "realize": cmd_realize,
    "tunnel": cmd_tunnel,
    "thermo": cmd_thermo,
    "effpot": cmd_effpot,
    "ground": cmd_ground,
    "reconstruct": cmd_reconstruct,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = _load_config(args.config)
        flags = {k: v for k, v in vars(args).items() if k not in ("cmd", "config", "out", "seed", "tol")}
        params = resolve(args.cmd, config, flags)
        result = COMMANDS[args.cmd](args, params)
        files = []
        if isinstance(result, tuple):
            result, files = result
        if args.out or files:
            out = _outdir(args)
            if not files:
                _write_json(out / "result.json", result)
                files = ["result.json"]
            _manifest(out, args.cmd, params, args, files)
        return 0
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (MomentError, ArithmeticError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (KeyError, ValueError, TypeError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
