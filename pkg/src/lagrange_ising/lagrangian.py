"""Lagrange and augmented-Lagrange merit functions with descent/ascent dynamics.

Sign convention throughout: ``L(x, lam) = f(x) + sum_i lam_i g_i(x)`` and
``L_c = L + (c/2) sum_i g_i(x)**2``. For the Ising problem ``g_i = 1 - x_i**2``,
which is the same as writing ``-sum_i gamma_i (x_i**2 - 1)`` with the pump gains
``gamma`` in the role of ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, DivergenceError
from .ising import IsingInstance

DEFAULT_PENALTY = 1.0
DEFAULT_KAPPA = 0.05
DEFAULT_KAPPA_P = 0.005
DIVERGENCE_BOUND = 1e6

Vector = np.ndarray


@dataclass(frozen=True)
class LagrangeProblem:
    """Equality-constrained problem ``min f(x)`` s.t. ``g(x) = 0``.

    ``g`` maps a length-``n`` vector to the length-``p`` vector of constraint
    values. ``grad_f`` and ``jac_g`` are optional analytic derivatives; when
    absent, central differences are used.
    """

    f: Callable[[Vector], float]
    g: Callable[[Vector], Vector]
    n: int
    p: int
    penalty_c: float = DEFAULT_PENALTY
    alpha: Optional[Vector] = None
    grad_f: Optional[Callable[[Vector], Vector]] = None
    jac_g: Optional[Callable[[Vector], np.ndarray]] = None

    def __post_init__(self):
        if self.p < 0 or self.n < 1:
            raise ValueError("need n >= 1 and p >= 0")
        if self.penalty_c < 0:
            raise ValueError("penalty_c must be nonnegative")

    def constraints(self, x: Vector) -> Vector:
        if self.p == 0:
            return np.zeros(0)
        return np.asarray(self.g(x), dtype=np.float64).reshape(self.p)

    def gradient_f(self, x: Vector) -> Vector:
        if self.grad_f is not None:
            return np.asarray(self.grad_f(x), dtype=np.float64)
        return fd_gradient(self.f, x)

    def jacobian_g(self, x: Vector) -> np.ndarray:
        if self.p == 0:
            return np.zeros((0, self.n))
        if self.jac_g is not None:
            return np.asarray(self.jac_g(x), dtype=np.float64).reshape(self.p, self.n)
        return fd_jacobian(self.constraints, x, self.p)


@dataclass(frozen=True)
class MultiplierState:
    x: Vector
    lam: Vector

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=np.float64).reshape(-1))


@dataclass(frozen=True)
class KKTReport:
    stationarity: float
    feasibility: float
    passed: bool

    def to_json(self) -> dict:
        return {"stationarity": self.stationarity, "feasibility": self.feasibility, "pass": self.passed}


def problem_from_functions(f, constraints, n, penalty_c=DEFAULT_PENALTY, grad_f=None, jac_g=None):
    """Build a problem from a list of scalar constraint functions."""
    constraints = list(constraints)

    def g(x):
        return np.array([gi(x) for gi in constraints], dtype=np.float64)

    return LagrangeProblem(f, g, n, len(constraints), penalty_c, None, grad_f, jac_g)


def _check(prob: LagrangeProblem, st: MultiplierState) -> None:
    if st.x.shape[0] != prob.n:
        raise DimensionError(f"x has length {st.x.shape[0]}, problem has n={prob.n}")
    if st.lam.shape[0] != prob.p:
        raise DimensionError(f"lambda has length {st.lam.shape[0]}, problem has p={prob.p}")


def ising_lagrange(inst: IsingInstance, alpha=None, penalty_c: float = DEFAULT_PENALTY) -> LagrangeProblem:
    """``f(x) = x'Jx + sum alpha_i x_i**2`` with constraints ``g_i = 1 - x_i**2``."""
    n = inst.n
    alpha = np.zeros(n) if alpha is None else np.asarray(alpha, dtype=np.float64).reshape(-1)
    if alpha.shape[0] != n:
        raise DimensionError(f"alpha has length {alpha.shape[0]}, expected {n}")
    if np.any(alpha < 0):
        raise ValueError("alpha entries must be nonnegative")
    J = inst.J

    def f(x):
        return float(x @ J @ x + alpha @ (x * x))

    def grad_f(x):
        return 2.0 * (J @ x) + 2.0 * alpha * x

    def g(x):
        return 1.0 - x * x

    def jac_g(x):
        return np.diag(-2.0 * x)

    return LagrangeProblem(f, g, n, n, penalty_c, alpha, grad_f, jac_g)


def lagrange_value(prob: LagrangeProblem, st: MultiplierState) -> float:
    _check(prob, st)
    return float(prob.f(st.x)) + float(st.lam @ prob.constraints(st.x))


def augmented_lagrange_value(prob: LagrangeProblem, st: MultiplierState) -> float:
    _check(prob, st)
    g = prob.constraints(st.x)
    return float(prob.f(st.x)) + float(st.lam @ g) + 0.5 * prob.penalty_c * float(g @ g)


def lagrange_gradient_x(prob: LagrangeProblem, st: MultiplierState, augmented: bool = True) -> Vector:
    """``grad_x L_c = grad f + Jg' (lam + c g)``; ``augmented=False`` drops the ``c`` term."""
    _check(prob, st)
    weights = st.lam.copy()
    if augmented and prob.penalty_c:
        weights = weights + prob.penalty_c * prob.constraints(st.x)
    return prob.gradient_f(st.x) + prob.jacobian_g(st.x).T @ weights


def descent_ascent_step(
    prob: LagrangeProblem,
    st: MultiplierState,
    kappa: float = DEFAULT_KAPPA,
    kappa_p: float = DEFAULT_KAPPA_P,
) -> MultiplierState:
    """One explicit step of gradient descent in ``x`` and ascent in ``lam`` on ``L_c``.

    Both updates use the current point, i.e. an Euler step of
    ``dx/dt = -kappa grad_x L_c``, ``dlam/dt = kappa_p g(x)``.
    """
    if kappa <= 0 or kappa_p <= 0:
        raise ValueError("step sizes must be positive")
    grad = lagrange_gradient_x(prob, st)
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise DivergenceError(f"non-finite gradient at index {bad[0]}", index=int(bad[0]))
    x = st.x - kappa * grad
    big = np.flatnonzero(np.abs(x) > DIVERGENCE_BOUND)
    if big.size:
        raise DivergenceError(
            f"|x[{big[0]}]| = {abs(x[big[0]]):.3g} exceeds {DIVERGENCE_BOUND:g}", index=int(big[0])
        )
    lam = st.lam + kappa_p * prob.constraints(st.x)
    return MultiplierState(x, lam)


def run_descent_ascent(
    prob: LagrangeProblem,
    st: MultiplierState,
    steps: int,
    kappa: float = DEFAULT_KAPPA,
    kappa_p: float = DEFAULT_KAPPA_P,
    tol: Optional[float] = None,
) -> tuple[MultiplierState, int]:
    """Iterate :func:`descent_ascent_step`; stop early once both KKT residuals are below ``tol``."""
    for k in range(steps):
        if tol is not None and kkt_check(prob, st, tol).passed:
            return st, k
        st = descent_ascent_step(prob, st, kappa, kappa_p)
    return st, steps


def kkt_check(prob: LagrangeProblem, st: MultiplierState, tol: float = 1e-6) -> KKTReport:
    """First-order stationarity and primal feasibility (equality constraints only)."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    grad = lagrange_gradient_x(prob, st, augmented=False)
    g = prob.constraints(st.x)
    stat = float(np.max(np.abs(grad))) if grad.size else 0.0
    feas = float(np.max(np.abs(g))) if g.size else 0.0
    return KKTReport(stat, feas, stat <= tol and feas <= tol)


def ising_augmented_flow(J, x, lam, penalty_c, kappa=1.0, alpha=None):
    """Closed form of ``-kappa grad_x L_c`` for the Ising augmented Lagrangian.

    ``2 kappa ((lam - alpha) x + c x - c x**3 - J x)``: linear gain, cubic
    saturation and coupling, the shape of the cubic oscillator models.
    """
    x = np.asarray(x, dtype=np.float64)
    gain = np.asarray(lam, dtype=np.float64)
    if alpha is not None:
        gain = gain - alpha
    return 2.0 * kappa * (gain * x + penalty_c * x - penalty_c * x**3 - x @ np.asarray(J).T)


def fd_gradient(fn: Callable[[Vector], float], x, step: float = 1e-6) -> Vector:
    """Central-difference gradient, component ``i`` from ``x +- step e_i``."""
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    xp = x.copy()
    for i in range(x.size):
        xi = x.flat[i]
        xp.flat[i] = xi + step
        up = fn(xp)
        xp.flat[i] = xi - step
        down = fn(xp)
        xp.flat[i] = xi
        if not (np.isfinite(up) and np.isfinite(down)):
            raise DivergenceError(f"non-finite function value near index {i}", index=i)
        grad.flat[i] = (up - down) / (2.0 * step)
    return grad


def fd_jacobian(fn: Callable[[Vector], Vector], x, p: int, step: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    jac = np.empty((p, x.size))
    xp = x.copy()
    for i in range(x.size):
        xi = x[i]
        xp[i] = xi + step
        up = np.asarray(fn(xp), dtype=np.float64)
        xp[i] = xi - step
        down = np.asarray(fn(xp), dtype=np.float64)
        xp[i] = xi
        jac[:, i] = (up - down) / (2.0 * step)
    return jac
