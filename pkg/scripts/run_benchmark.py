"""Ground-state hit rate of every solver on small random instances.

Each solver runs with its default parameters, schedule and integrator
settings. A hit means the best of ``--restarts`` runs reaches the
brute-force ground energy.

    python scripts/run_benchmark.py --n 10 --count 20 --restarts 8
"""

import argparse
import time

from lagrange_ising import SOLVERS, brute_force_ground, random_instance, run_solver
from lagrange_ising.solvers import AllRunsDivergedError


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=10)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--density", type=float, default=0.5)
    ap.add_argument("--restarts", type=int, default=8)
    ap.add_argument("--seed", type=int, default=700, help="instance k uses seed + k")
    ap.add_argument("--solvers", nargs="*", default=list(SOLVERS))
    args = ap.parse_args()

    insts = [random_instance(args.n, args.density, (-1, 1), seed=args.seed + k) for k in range(args.count)]
    ground = [brute_force_ground(inst)[1] for inst in insts]
    print(f"{'solver':<10} {'hits':>7} {'diverged':>9} {'seconds':>8}")
    for tag in args.solvers:
        hits = diverged = 0
        t0 = time.perf_counter()
        for inst, e0 in zip(insts, ground):
            try:
                res = run_solver(inst, tag, restarts=args.restarts, seed=0, keep_states=False)
            except AllRunsDivergedError:
                diverged += args.restarts
                continue
            hits += res.best.final_energy == e0
            diverged += sum(r.diverged for r in res.runs)
        print(f"{tag:<10} {hits:>3}/{args.count:<3} {diverged:>9} {time.perf_counter() - t0:>8.1f}")


if __name__ == "__main__":
    main()
