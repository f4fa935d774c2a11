"""Command-line front end: ``solve``, ``bruteforce``, ``regress`` and ``bench``.

Exit codes: 0 success, 1 usage error, 2 runtime failure (divergence, size
guard, unreadable input). Options may also come from a JSON ``--config``
file whose keys are the long option names (dashes or underscores); flags
given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import regression as rg
from .engine import SCHEMA_VERSION, GainSchedule, IntegratorConfig
from .errors import IsingError
from .ising import IsingInstance, brute_force_ground, energy, load_instance, random_instance
from .solvers import SOLVERS, default_config, default_params, default_schedule, run_solver

THREADS_ENV = "LAGRANGE_ISING_THREADS"
BENCH_COLUMNS = ("instance", "solver", "seed", "restarts", "best_energy", "best_cut", "wall_time", "error")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _solver_tag(value: str) -> str:
    if value not in SOLVERS:
        raise argparse.ArgumentTypeError(f"unknown solver {value!r}; valid tags: {', '.join(SOLVERS)}")
    return value


def _positive_int(value: str) -> int:
    try:
        v = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {value!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _add_instance_args(p):
    p.add_argument("--instance", help="instance file (Gset text or .json)")
    p.add_argument("--random", type=int, metavar="N", help="use a random N-spin instance instead")
    p.add_argument("--density", type=float, help="edge density for --random (default 0.5)")


def _add_run_args(p):
    p.add_argument("--restarts", type=_positive_int, help="independent trajectories (default 1)")
    p.add_argument("--seed", type=int, help="base seed; restart k uses seed + k (default 0)")
    p.add_argument("--method", choices=("euler", "rk4"))
    p.add_argument("--dt", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--record-every", type=int)
    p.add_argument("--schedule", choices=("constant", "linear_ramp", "adaptive"))
    p.add_argument("--gain-a", type=float, help="schedule intercept")
    p.add_argument("--gain-b", type=float, help="schedule slope")
    p.add_argument("--gamma-max", type=float)
    p.add_argument("--kappa-p", type=float, help="multiplier ascent rate for adaptive schedules")
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="override a solver parameter, e.g. --param beta_sat=0.3 (repeatable)")
    p.add_argument("--no-normalize", action="store_true", default=None,
                   help="hand the raw coupling matrix to the solver")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lagrange-ising", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="run one solver with restarts")
    _add_instance_args(p)
    p.add_argument("--solver", type=_solver_tag)
    _add_run_args(p)
    p.add_argument("--out", help="write the best RunRecord as JSON")
    p.add_argument("--trajectory", help="write (t, L, energy, max_amp) of the best run as CSV")
    p.add_argument("--config", help="JSON file of option defaults")

    p = sub.add_parser("bruteforce", help="exhaustive ground state (n <= 24)")
    _add_instance_args(p)
    p.add_argument("--out", help="write the result as JSON")
    p.add_argument("--config", help="JSON file of option defaults")

    p = sub.add_parser("regress", help="least squares on a spin-encoded weight lattice")
    p.add_argument("--data", help="CSV with feature columns followed by y")
    p.add_argument("--bits", type=_positive_int, help="signed binary digits per weight (default 2)")
    p.add_argument("--msb-power", type=int, help="exponent of the leading digit (default bits - 1)")
    p.add_argument("--solver", type=lambda v: v if v == "bruteforce" else _solver_tag(v),
                   help="'bruteforce' (default) or a solver tag")
    _add_run_args(p)
    p.add_argument("--out", help="write the result as JSON")
    p.add_argument("--config", help="JSON file of option defaults")

    p = sub.add_parser("bench", help="sweep solvers x instances x seeds into a CSV table")
    p.add_argument("--instances", nargs="*", help="instance files")
    p.add_argument("--solvers", nargs="*", type=_solver_tag)
    p.add_argument("--seeds", nargs="*", type=int)
    _add_run_args(p)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--config", help="JSON file of option defaults")
    return parser


def _merge_config(args: argparse.Namespace) -> argparse.Namespace:
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, dest) is None:
            setattr(args, dest, value)
    return args


def _get(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


def _load(args) -> IsingInstance:
    if args.instance and args.random is not None:
        raise UsageError("give either --instance or --random, not both")
    if args.instance:
        return load_instance(args.instance)
    if args.random is not None:
        if args.random < 1:
            raise UsageError("--random needs N >= 1")
        return random_instance(args.random, _get(args, "density", 0.5), seed=_get(args, "seed", 0),
                               name=f"random{args.random}")
    raise UsageError("an instance is required (--instance PATH or --random N)")


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = str(item).partition("=")
        if not sep:
            raise UsageError(f"--param expects KEY=VALUE, got {item!r}")
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def _run_settings(args, solver: str):
    """Integrator config, schedule and parameters with flag overrides applied."""
    base = default_config(solver)
    try:
        cfg = IntegratorConfig(
            method=_get(args, "method", base.method),
            dt=float(_get(args, "dt", base.dt)),
            steps=int(_get(args, "steps", base.steps)),
            record_every=int(_get(args, "record_every", base.record_every)),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    sched = default_schedule(solver, cfg)
    changes = {k: v for k, v in (("kind", args.schedule), ("a", args.gain_a), ("b", args.gain_b),
                                 ("gamma_max", args.gamma_max), ("kappa_p", args.kappa_p)) if v is not None}
    params = default_params(solver)
    overrides = _parse_params(args.param)
    extra = dict(params.extra)
    fields = set(params.__dataclass_fields__) - {"extra"}
    direct = {k: v for k, v in overrides.items() if k in fields}
    extra.update({k: v for k, v in overrides.items() if k not in fields})
    try:
        sched = replace(sched, **changes)
        params = replace(params, extra=extra, **direct)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return cfg, sched, params


def _solve(inst, solver, args, seed):
    cfg, sched, params = _run_settings(args, solver)
    return run_solver(inst, solver, params, cfg, sched, restarts=_get(args, "restarts", 1), seed=seed,
                      normalize=not args.no_normalize)


def _dump(obj, path: Optional[str]):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    return text


def cmd_solve(args) -> int:
    if not args.solver:
        raise UsageError(f"--solver is required; valid tags: {', '.join(SOLVERS)}")
    inst = _load(args)
    res = _solve(inst, args.solver, args, _get(args, "seed", 0))
    best = res.best
    rec = best.to_json(include_samples=False)
    rec["instance"] = inst.name
    rec["restarts"] = len(res.runs)
    rec["runs"] = [r.summary() for r in res.runs]
    _dump(rec, args.out)
    if args.trajectory:
        with open(args.trajectory, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("t", "lagrange", "energy", "max_amp"))
            w.writerows(best.trajectory_rows())
    cut = "n/a" if best.final_cut is None else f"{best.final_cut:g}"
    print(f"solver={args.solver} seed={best.seed} energy={best.final_energy:g} cut={cut}")
    return 0


def cmd_bruteforce(args) -> int:
    inst = _load(args)
    s, e = brute_force_ground(inst)
    rep = energy(inst, s)
    out = {"schema_version": SCHEMA_VERSION, "instance": inst.name, "n": inst.n, "ground_energy": e,
           "ground_cut": rep.cut, "spins": [int(v) for v in s]}
    _dump(out, args.out)
    print(f"ground_energy={e:g} spins={' '.join(f'{int(v):+d}' for v in s)}")
    return 0


def cmd_regress(args) -> int:
    if not args.data:
        raise UsageError("--data CSV is required")
    X, y = rg.read_csv(Path(args.data).read_text())
    prob = rg.RegressionProblem(X, y, bits=_get(args, "bits", 2), msb_power=args.msb_power)
    inst, enc = rg.build_regression_instance(prob)
    solver = _get(args, "solver", "bruteforce")
    if solver == "bruteforce":
        s, _ = brute_force_ground(inst)
    else:
        s = _solve(inst, solver, args, _get(args, "seed", 0)).best.final_spins
    w = rg.decode_weights(enc, s)
    w_star, res_star = rg.least_squares_oracle(prob)
    out = {"schema_version": SCHEMA_VERSION, "solver": solver, "bits": prob.bits, "msb_power": prob.msb_power,
           "w": w.tolist(), "residual": rg.residual(prob, w),
           "oracle_w": w_star.tolist(), "oracle_residual": res_star}
    _dump(out, args.out)
    print(f"w={w.tolist()} residual={out['residual']:g} oracle_residual={res_star:g}")
    return 0


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def cmd_bench(args) -> int:
    instances = _get(args, "instances", [])
    solvers = _get(args, "solvers", [])
    seeds = _get(args, "seeds", [0])
    for tag in solvers:
        _solver_tag_usage(tag)
    tasks = [(path, tag, sd) for path in instances for tag in solvers for sd in seeds]
    if not tasks:
        raise UsageError("empty sweep: need at least one instance, solver and seed")
    restarts = _get(args, "restarts", 1)
    for tag in solvers:
        _run_settings(args, tag)  # surface usage errors before any work starts

    def run(task):
        path, tag, sd = task
        row = {"instance": path, "solver": tag, "seed": sd, "restarts": restarts,
               "best_energy": "", "best_cut": "", "wall_time": "", "error": ""}
        try:
            res = _solve(load_instance(path), tag, args, sd)
            row["best_energy"] = res.best.final_energy
            row["best_cut"] = "" if res.best.final_cut is None else res.best.final_cut
            row["wall_time"] = sum(r.wall_time for r in res.runs)
        except (IsingError, ValueError, OSError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        rows = list(pool.map(run, tasks))  # map keeps the sweep order

    for tag in solvers:
        ok = [r for r in rows if r["solver"] == tag and not r["error"]]
        rows.append({
            "instance": "ALL", "solver": tag, "seed": "", "restarts": restarts,
            "best_energy": min((r["best_energy"] for r in ok), default=""),
            "best_cut": max((r["best_cut"] for r in ok if r["best_cut"] != ""), default=""),
            "wall_time": sum(r["wall_time"] for r in ok),
            "error": "" if ok else "all rows failed",
        })

    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS + ("schema_version",), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({**r, "schema_version": SCHEMA_VERSION})
    finally:
        if fh is not sys.stdout:
            fh.close()
    failed = sum(1 for r in rows[: len(tasks)] if r["error"])
    print(f"{len(tasks)} rows, {failed} failed", file=sys.stderr)
    return 2 if failed == len(tasks) else 0


def _solver_tag_usage(tag):
    if tag not in SOLVERS:
        raise UsageError(f"unknown solver {tag!r}; valid tags: {', '.join(SOLVERS)}")


COMMANDS = {"solve": cmd_solve, "bruteforce": cmd_bruteforce, "regress": cmd_regress, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage().strip())
        args = _merge_config(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (IsingError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
