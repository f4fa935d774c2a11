"""Fixed-step time integration, gain schedules and trajectory records."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DivergenceError

SCHEMA_VERSION = 1
PLATEAU_TOL = 1e-12
PLATEAU_SAMPLES = 100

METHODS = ("euler", "rk4")
SCHEDULE_KINDS = ("constant", "linear_ramp", "adaptive")


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk4"
    dt: float = 0.01
    steps: int = 10_000
    record_every: int = 100
    divergence_bound: float = 1e6
    plateau: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


class _Adaptive:
    def __repr__(self):
        return "ADAPTIVE"


ADAPTIVE = _Adaptive()
"""Returned by :func:`schedule_value` when the gain is a co-integrated state variable."""


@dataclass(frozen=True)
class GainSchedule:
    """``constant``: ``a``; ``linear_ramp``: ``min(a + b t, gamma_max)``;
    ``adaptive``: gains start at ``a`` and follow ``dgamma/dt = kappa_p (1 - x^2)``.
    """

    kind: str = "constant"
    a: float = 0.0
    b: float = 0.0
    gamma_max: float = math.inf
    kappa_p: float = 0.01

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; choose from {SCHEDULE_KINDS}")
        if self.kind == "linear_ramp" and self.gamma_max < self.a:
            raise ValueError("gamma_max must be >= a for a ramp")
        if self.kind == "adaptive" and not self.kappa_p > 0:
            raise ValueError("adaptive schedules need kappa_p > 0")


def schedule_value(s: GainSchedule, t: float):
    if t < 0:
        raise ValueError("t must be nonnegative")
    if s.kind == "constant":
        return s.a
    if s.kind == "linear_ramp":
        return min(s.a + s.b * t, s.gamma_max)
    return ADAPTIVE


def ramp_through(target: float, t_end: float, fraction: float = 0.5, a: float = 0.0) -> GainSchedule:
    """Linear ramp from ``a`` that reaches ``target`` at ``fraction * t_end``."""
    return GainSchedule("linear_ramp", a=a, b=(target - a) / (fraction * t_end))


@dataclass
class Sample:
    t: float
    state: np.ndarray
    lagrange: Optional[float] = None
    energy: Optional[float] = None


@dataclass
class RunRecord:
    solver: str
    seed: Optional[int]
    samples: list = field(default_factory=list)
    final_state: Optional[np.ndarray] = None
    final_spins: Optional[np.ndarray] = None
    final_energy: Optional[float] = None
    final_cut: Optional[float] = None
    wall_time: float = 0.0
    diverged: bool = False
    message: str = ""

    def summary(self) -> dict:
        return {
            "solver": self.solver,
            "seed": self.seed,
            "final_energy": self.final_energy,
            "final_cut": self.final_cut,
            "diverged": self.diverged,
            "message": self.message,
            "wall_time": self.wall_time,
        }

    def to_json(self, include_samples: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "solver": self.solver,
            "seed": self.seed,
            "final_energy": self.final_energy,
            "final_cut": self.final_cut,
            "final_spins": None if self.final_spins is None else [int(v) for v in self.final_spins],
            "diverged": self.diverged,
            "message": self.message,
            "wall_time": self.wall_time,
        }
        if include_samples:
            d["samples"] = [
                {
                    "t": s.t,
                    "lagrange": s.lagrange,
                    "energy": s.energy,
                    "max_amp": float(np.max(np.abs(s.state))),
                    "state": np.asarray(s.state).tolist(),
                }
                for s in self.samples
            ]
        return d

    def trajectory_rows(self) -> list[tuple]:
        """``(t, L, energy, max_amp)`` per recorded sample."""
        return [(s.t, s.lagrange, s.energy, float(np.max(np.abs(s.state)))) for s in self.samples]


Rhs = Callable[[np.ndarray, object], np.ndarray]


def step(rhs: Rhs, y: np.ndarray, gain, dt: float, method: str) -> np.ndarray:
    """One fixed step. The gain is held at its step-start value across RK stages."""
    if method == "euler":
        return y + dt * rhs(y, gain)
    h = 0.5 * dt
    k1 = rhs(y, gain)
    k2 = rhs(y + h * k1, gain)
    k3 = rhs(y + h * k2, gain)
    k4 = rhs(y + dt * k3, gain)
    return y + (dt / 6.0) * (k1 + k4 + 2.0 * (k2 + k3))


def _check_bound(y: np.ndarray, bound: float, k: int) -> None:
    # The squared norm bounds every component and is NaN if any component is.
    if not np.vdot(y, y).real <= bound * bound:
        bad = ~np.isfinite(y) | (np.abs(y) > bound)
        if not bad.any():
            return
        idx = tuple(int(i) for i in np.argwhere(bad)[0])
        raise DivergenceError(
            f"component {idx} left the bound {bound:g} at step {k}", index=idx, step=k
        )


def integrate(
    rhs: Rhs,
    state0,
    schedule: GainSchedule,
    cfg: IntegratorConfig,
    *,
    lagrange: Optional[Callable[[np.ndarray, object], float]] = None,
    energy: Optional[Callable[[np.ndarray], float]] = None,
    readout: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    solver: str = "",
    seed: Optional[int] = None,
) -> RunRecord:
    """Integrate ``dy/dt = rhs(y, gain)`` for ``cfg.steps`` fixed steps.

    The schedule is evaluated at the start of every step. Samples are taken at
    ``t = 0`` and every ``record_every`` steps, plus the final state. Optional
    callbacks fill in the merit value, the rounded spins and their energy.
    Raises :class:`DivergenceError` when a component becomes non-finite or
    exceeds ``cfg.divergence_bound``.
    """
    t0 = time.perf_counter()
    y = np.asarray(state0)
    y = np.array(y, dtype=np.result_type(y.dtype, np.float64))
    _check_bound(y, cfg.divergence_bound, 0)
    record = RunRecord(solver=solver, seed=seed)

    def sample(k: int, gain) -> None:
        t = k * cfg.dt
        lval = None if lagrange is None else lagrange(y, gain)
        e = None
        if energy is not None and readout is not None:
            e = energy(readout(y))
        record.samples.append(Sample(t, y.copy(), lval, e))

    flat_run = 0
    constant = schedule.kind == "constant"
    gain = schedule_value(schedule, 0.0)
    sample(0, gain)
    k = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, cfg.steps + 1):
            if not constant:
                gain = schedule_value(schedule, (k - 1) * cfg.dt)
            y = step(rhs, y, gain, cfg.dt, cfg.method)
            _check_bound(y, cfg.divergence_bound, k)
            if k % cfg.record_every == 0 or k == cfg.steps:
                prev = record.samples[-1].lagrange
                sample(k, schedule_value(schedule, k * cfg.dt))
                cur = record.samples[-1].lagrange
                if cfg.plateau and prev is not None and cur is not None:
                    flat_run = flat_run + 1 if abs(cur - prev) < PLATEAU_TOL else 0
                    if flat_run >= PLATEAU_SAMPLES:
                        break
    record.final_state = y
    if readout is not None:
        record.final_spins = readout(y)
        if energy is not None:
            record.final_energy = energy(record.final_spins)
    record.wall_time = time.perf_counter() - t0
    return record


def integrate_batch(rhs: Rhs, Y0: np.ndarray, schedule: GainSchedule, cfg: IntegratorConfig):
    """Advance independent trajectories stacked along axis 0.

    Returns ``(times, snapshots, Y, diverged)`` where ``snapshots`` has shape
    ``(samples, batch, dim)`` and ``diverged`` holds, per row, ``-1`` or the
    step at which that row left the bound. Diverged rows are parked at zero
    so that the remaining rows keep evolving.
    """
    Y = np.array(Y0, dtype=np.float64)
    batch = Y.shape[0]
    diverged = np.full(batch, -1, dtype=np.int64)
    times = [0.0]
    snaps = [Y.copy()]
    for k in range(1, cfg.steps + 1):
        gain = schedule_value(schedule, (k - 1) * cfg.dt)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                Y = step(rhs, Y, gain, cfg.dt, cfg.method)
        except DivergenceError:
            Y = _step_rows(rhs, Y, gain, cfg)
        bad = np.any(~np.isfinite(Y) | (np.abs(Y) > cfg.divergence_bound), axis=1)
        if np.any(bad):
            newly = bad & (diverged < 0)
            diverged[newly] = k
            Y[bad] = 0.0
        if k % cfg.record_every == 0 or k == cfg.steps:
            times.append(k * cfg.dt)
            snaps.append(Y.copy())
    return times, np.array(snaps), Y, diverged


def _step_rows(rhs, Y, gain, cfg):
    # Fallback when the batched RHS rejects the stack: step rows one at a time.
    out = np.empty_like(Y)
    for r in range(Y.shape[0]):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                out[r] = step(rhs, Y[r : r + 1], gain, cfg.dt, cfg.method)[0]
        except DivergenceError:
            out[r] = np.nan
    return out
