"""Trace how multiplier ascent drives polariton amplitudes onto the unit circle.

Integrates ``--count`` independent n=8 instances side by side (one
block-diagonal system) and prints quantiles of the per-instance violation
``max_i |1 - |E_i|^2|`` every ``--every`` steps, together with how many
instances are within ``--tol``.

    python scripts/polariton_feasibility.py --beta 0.13 --gamma0 0.1 --coupling 0.005
"""

import argparse

import numpy as np

from lagrange_ising import random_instance
from lagrange_ising import oscillators as osc
from lagrange_ising.engine import step


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=0.13, help="nonlinear attenuation")
    ap.add_argument("--gamma0", type=float, default=0.1, help="initial multiplier")
    ap.add_argument("--coupling", type=float, default=0.005, help="coupling scale on the unit-norm J")
    ap.add_argument("--kappa-p", type=float, default=0.01)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--every", type=int, default=10_000)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=500)
    ap.add_argument("--tol", type=float, default=1e-2)
    args = ap.parse_args()

    n = 8
    N = n * args.count
    J = np.zeros((N, N))
    for k in range(args.count):
        Jk = random_instance(n, 0.5, (-1, 1), seed=args.seed + k).J
        J[k * n : (k + 1) * n, k * n : (k + 1) * n] = Jk / np.linalg.norm(Jk, 2)
    params = osc.OscParams(beta_sat=args.beta, coupling_scale=args.coupling)
    rng = np.random.default_rng(0)
    y = np.concatenate([rng.uniform(-0.01, 0.01, 2 * N), np.full(N, args.gamma0)])

    def rhs(v, g):
        E = v[:N] + 1j * v[N : 2 * N]
        dE = osc.polariton_rhs(J, params, E, v[2 * N :])
        return np.concatenate([dE.real, dE.imag, osc.multiplier_feedback_rhs(E, args.kappa_p)])

    print(f"{'step':>8} {'min':>9} {'median':>9} {'max':>9} {'feasible':>9}")
    for k in range(1, args.steps + 1):
        y = step(rhs, y, None, args.dt, "rk4")
        if k % args.every == 0:
            E = y[:N] + 1j * y[N : 2 * N]
            v = np.abs(1.0 - np.abs(E) ** 2).reshape(args.count, n).max(axis=1)
            print(f"{k:>8} {v.min():>9.2e} {np.median(v):>9.2e} {v.max():>9.2e} "
                  f"{int(np.sum(v <= args.tol)):>5}/{args.count}")


if __name__ == "__main__":
    main()
