"""Solver registry and the multi-restart harness.

Every solver is wrapped as a :class:`Model`: a real stacked state vector, a
vectorised RHS (or a discrete map), a readout to spins and the merit function
reported in trajectory samples.

Models are handed a *native* coupling matrix. Models whose dynamics descend
``-sum J x x`` (radio, fiber, phase, leleu, soljacic) receive ``-J`` so that
every solver minimizes the same energy ``sum J s s``. By default the
native matrix is also divided by its spectral norm, which leaves ground
states unchanged and lets one set of default parameters serve all instances.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import iterators as it
from . import oscillators as osc
from .engine import (
    ADAPTIVE,
    GainSchedule,
    IntegratorConfig,
    RunRecord,
    Sample,
    integrate_batch,
    schedule_value,
)
from .errors import DivergenceError, IsingError
from .ising import IsingInstance, absorb_field, energy, round_to_spins
from .lagrangian import ising_augmented_flow

SOLVERS = ("opo", "radio", "fiber", "phase", "polariton", "leleu", "kerr", "matmul", "soljacic", "lagrange")

NATIVE_SIGN = {
    "opo": 1.0,
    "polariton": 1.0,
    "lagrange": 1.0,
    "matmul": 1.0,
    "radio": -1.0,
    "fiber": -1.0,
    "phase": -1.0,
    "leleu": -1.0,
    "soljacic": -1.0,
    "kerr": 1.0,
}


def default_params(solver: str) -> osc.OscParams:
    """Parameters tuned for a native coupling matrix of unit spectral norm."""
    if solver == "opo":
        return osc.OscParams(alpha=1.0, beta_sat=osc.CUBIC_SATURATION_DEFAULT)
    if solver == "radio":
        return osc.OscParams(alpha=1.0, coupling_scale=1.0)
    if solver == "fiber":
        return osc.OscParams(alpha=1.0)
    if solver == "phase":
        return osc.OscParams(coupling_scale=1.0)
    if solver == "polariton":
        return osc.OscParams(beta_sat=0.13, U=0.0, kappa_p=0.01)
    if solver == "leleu":
        return osc.OscParams(alpha=1.0, beta_leleu=0.1)
    if solver == "kerr":
        return osc.OscParams(K_kerr=1.0, xi0=1.0)
    if solver == "lagrange":
        return osc.OscParams(alpha=0.0, gamma=0.0, extra={"penalty_c": 1.0, "kappa": 0.5})
    if solver == "matmul":
        return osc.OscParams(gamma=1.0, extra={"kappa_dt": 0.05})
    if solver == "soljacic":
        return osc.OscParams(extra={"noise_sigma": 1.0, "noise_decay": True})
    raise ValueError(f"unknown solver {solver!r}; valid tags: {', '.join(SOLVERS)}")


def default_schedule(solver: str, cfg: IntegratorConfig) -> GainSchedule:
    """Gain schedules matched to :func:`default_params` and the run length."""
    t_end = max(cfg.steps * cfg.dt, cfg.dt)
    if solver == "opo":
        return GainSchedule("linear_ramp", a=0.0, b=3.0 / t_end)
    if solver in ("radio", "fiber"):
        # No saturation term: the multiplier feedback is what bounds the amplitudes.
        return GainSchedule("adaptive", a=1.0, kappa_p=0.1)
    if solver == "leleu":
        return GainSchedule("linear_ramp", a=0.0, b=1.0 / t_end, gamma_max=1.0)
    if solver == "phase":
        return GainSchedule("linear_ramp", a=0.0, b=2.0 / t_end)
    if solver == "polariton":
        # Near-critical damping of the amplitude/multiplier pair (beta ~ sqrt(2 kappa')).
        return GainSchedule("adaptive", a=0.1, kappa_p=0.01)
    if solver == "kerr":
        return GainSchedule("linear_ramp", a=0.0, b=3.0 / t_end)
    if solver == "lagrange":
        return GainSchedule("adaptive", a=0.0, kappa_p=0.05)
    if solver == "matmul":
        return GainSchedule("constant", a=1.0)
    if solver == "soljacic":
        return GainSchedule("constant", a=0.0)
    raise ValueError(f"unknown solver {solver!r}; valid tags: {', '.join(SOLVERS)}")


def default_config(solver: str) -> IntegratorConfig:
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; valid tags: {', '.join(SOLVERS)}")
    if solver in ("matmul", "soljacic"):
        return IntegratorConfig(method="euler", dt=1.0, steps=1000, record_every=10)
    return IntegratorConfig(method="rk4", dt=0.05, steps=2000, record_every=20)


@dataclass
class Model:
    """A solver bound to one native coupling matrix."""

    tag: str
    n: int
    dim: int
    kind: str  # "ode" or "map"
    init: Callable[[np.random.Generator], np.ndarray]
    readout: Callable[[np.ndarray], np.ndarray]
    merit: Callable[[np.ndarray, object], float]
    rhs: Optional[Callable] = None
    step_map: Optional[Callable] = None


def _amp_init(n, copies=1, extra=None):
    def init(rng):
        x = osc.initial_state(rng, copies * n)
        return x if extra is None else np.concatenate([x, extra])

    return init


def build_model(solver: str, J: np.ndarray, params: osc.OscParams, schedule: GainSchedule) -> Model:
    """Wrap ``solver`` around the native coupling ``J``."""
    n = J.shape[0]
    adaptive = schedule.kind == "adaptive"
    kp = schedule.kappa_p
    g0 = np.full(n, schedule.a)

    if solver in ("opo", "radio", "fiber"):
        f = {"opo": osc.opo_rhs, "radio": osc.radio_rhs, "fiber": osc.fiber_rhs}[solver]
        merit = {"opo": osc.opo_lagrange, "radio": osc.radio_lagrange, "fiber": osc.fiber_lagrange}[solver]
        if adaptive:

            def rhs(y, gain):
                x, g = y[..., :n], y[..., n:]
                return np.concatenate([f(J, params, x, g), osc.multiplier_feedback_rhs(x, kp)], axis=-1)

            return Model(solver, n, 2 * n, "ode", _amp_init(n, 1, g0), lambda y: round_to_spins(y[:n]),
                         lambda y, gain: merit(J, params, y[:n], y[n:]), rhs=rhs)
        return Model(solver, n, n, "ode", _amp_init(n), round_to_spins,
                     lambda y, gain: merit(J, params, y, gain), rhs=lambda y, gain: f(J, params, y, gain))

    if solver == "phase":
        if adaptive:

            def rhs(y, gain):
                phi, lam = y[..., :n], y[..., n:]
                # Ascent on the phase merit: dL/dlam_i = (1 - cos 2 phi_i) / 2.
                return np.concatenate(
                    [osc.phase_rhs(J, params, phi, lam), 0.5 * kp * (1.0 - np.cos(2.0 * phi))], axis=-1
                )

            return Model(solver, n, 2 * n, "ode", _amp_init(n, 1, g0),
                         lambda y: round_to_spins(y[:n], phase=True),
                         lambda y, gain: osc.phase_lagrange(J, params, y[:n], y[n:]), rhs=rhs)
        return Model(solver, n, n, "ode", _phase_init(n), lambda y: round_to_spins(y, phase=True),
                     lambda y, gain: osc.phase_lagrange(J, params, y, gain),
                     rhs=lambda y, gain: osc.phase_rhs(J, params, y, gain))

    if solver == "polariton":

        def unpack(y):
            return y[..., :n] + 1j * y[..., n : 2 * n]

        if adaptive:

            def rhs(y, gain):
                E = unpack(y)
                dE = osc.polariton_rhs(J, params, E, y[..., 2 * n :])
                return np.concatenate([dE.real, dE.imag, osc.multiplier_feedback_rhs(E, kp)], axis=-1)

            return Model(solver, n, 3 * n, "ode", _amp_init(n, 2, g0), lambda y: round_to_spins(y[:n]),
                         lambda y, gain: osc.polariton_lagrange(J, params, unpack(y), y[2 * n :]), rhs=rhs)

        def rhs(y, gain):
            dE = osc.polariton_rhs(J, params, unpack(y), gain)
            return np.concatenate([dE.real, dE.imag], axis=-1)

        return Model(solver, n, 2 * n, "ode", _amp_init(n, 2), lambda y: round_to_spins(y[:n]),
                     lambda y, gain: osc.polariton_lagrange(J, params, unpack(y), gain), rhs=rhs)

    if solver == "leleu":

        def rhs(y, gain):
            dx, de = osc.leleu_rhs(J, params, y[..., :n], y[..., n:], gain)
            return np.concatenate([dx, de], axis=-1)

        def merit(y, gain):
            x = y[:n]
            g = np.broadcast_to(params.gamma if gain is None else gain, x.shape)
            return float(np.sum((params.alpha - g) * x * x) - x @ J @ x)

        return Model(solver, n, 2 * n, "ode", _amp_init(n, 1, np.ones(n)), lambda y: round_to_spins(y[:n]),
                     merit, rhs=rhs)

    if solver == "kerr":

        def rhs(y, gain):
            dc, ds = osc.kerr_rhs(J, params, y[..., :n], y[..., n:], gain)
            return np.concatenate([dc, ds], axis=-1)

        # The pump amplifies the c + s quadrature, the real axis of the rotated phasor.
        return Model(solver, n, 2 * n, "ode", _amp_init(n, 2), lambda y: round_to_spins(y[:n] + y[n:]),
                     lambda y, gain: osc.kerr_hamiltonian(J, params, y[:n], y[n:], gain), rhs=rhs)

    if solver == "lagrange":
        c = float(params.extra.get("penalty_c", 1.0))
        kappa = float(params.extra.get("kappa", 0.5))
        alpha = np.broadcast_to(np.asarray(params.alpha, dtype=np.float64), (n,))
        lam0 = g0 if schedule.kind == "adaptive" else np.full(n, float(schedule_value(schedule, 0.0)))
        kp_l = kp if schedule.kind == "adaptive" else params.kappa_p

        def rhs(y, gain):
            x, lam = y[..., :n], y[..., n:]
            dx = ising_augmented_flow(J, x, lam, c, kappa, alpha)
            return np.concatenate([dx, kp_l * (1.0 - x * x)], axis=-1)

        def merit(y, gain):
            x, lam = y[:n], y[n:]
            g = 1.0 - x * x
            return float(x @ J @ x + alpha @ (x * x) + lam @ g + 0.5 * c * g @ g)

        return Model(solver, n, 2 * n, "ode", _amp_init(n, 1, lam0), lambda y: round_to_spins(y[:n]),
                     merit, rhs=rhs)

    if solver == "matmul":
        kdt = float(params.extra.get("kappa_dt", 0.05))

        def step_map(y, gain, frac, rng):
            g = params.gamma if gain is None else gain
            E = y + 2.0 * kdt * (g * y - J @ y)
            peak = np.max(np.abs(E))
            return E / peak if peak > 0 else E

        def merit(y, gain):
            g = np.broadcast_to(params.gamma if gain is None else gain, y.shape)
            return float(y @ J @ y - g @ (y * y - 1.0))

        return Model(solver, n, n, "map", _amp_init(n), round_to_spins, merit, step_map=step_map)

    if solver == "soljacic":
        inst_native = IsingInstance(J)
        K = it.build_soljacic_matrix(inst_native, params.extra.get("alpha"))
        twoK = 2.0 * K.A
        sigma = float(params.extra.get("noise_sigma", 0.5))
        decay = bool(params.extra.get("noise_decay", True))

        def step_map(y, gain, frac, rng):
            s = sigma * (1.0 - frac) if decay else sigma
            # Feed the spin image 2E - 1 to the multiplier. A raw {0, 1} input
            # biases every drive toward the row sums of K and freezes the state.
            drive = twoK @ (2.0 * y - 1.0)
            if s > 0:
                drive = drive + rng.normal(0.0, s, size=n)
            return it.heaviside(drive).astype(np.float64)

        def init(rng):
            return rng.integers(0, 2, size=n).astype(np.float64)

        return Model(solver, n, n, "map", init, lambda y: it.binary_to_spins(y.astype(np.int8)),
                     lambda y, gain: it.soljacic_merit(inst_native, K, y), step_map=step_map)

    raise ValueError(f"unknown solver {solver!r}; valid tags: {', '.join(SOLVERS)}")


def _phase_init(n):
    def init(rng):
        return rng.uniform(-np.pi, np.pi, size=n)

    return init


@dataclass
class SolveResult:
    best: RunRecord
    runs: list = field(default_factory=list)

    @property
    def summaries(self) -> list[dict]:
        return [r.summary() for r in self.runs]


class AllRunsDivergedError(DivergenceError):
    def __init__(self, runs):
        self.runs = runs
        detail = "; ".join(f"seed {r.seed}: {r.message}" for r in runs)
        super().__init__(f"all {len(runs)} runs diverged ({detail})")


def native_coupling(inst: IsingInstance, solver: str, normalize: bool = True) -> tuple[np.ndarray, float]:
    """Signed and (optionally) rescaled coupling matrix handed to a model."""
    J = NATIVE_SIGN[solver] * inst.J
    scale = 1.0
    if normalize:
        norm = float(np.linalg.norm(inst.J, 2))
        if norm > 0:
            scale = 1.0 / norm
    return J * scale, scale


def run_solver(
    inst: IsingInstance,
    solver: str,
    params: Optional[osc.OscParams] = None,
    cfg: Optional[IntegratorConfig] = None,
    schedule: Optional[GainSchedule] = None,
    restarts: int = 1,
    seed: int = 0,
    normalize: bool = True,
    keep_states: bool = True,
) -> SolveResult:
    """Run ``restarts`` independent trajectories with seeds ``seed + k``.

    Instances with a field are solved through an ancilla spin and gauge-fixed
    afterwards. The best run is the one with the lowest final energy, ties
    going to the lower seed. Raises :class:`AllRunsDivergedError` if no run
    finishes.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; valid tags: {', '.join(SOLVERS)}")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    cfg = cfg or default_config(solver)
    schedule = schedule or default_schedule(solver, cfg)
    params = params or default_params(solver)

    work = absorb_field(inst) if inst.has_field else inst
    J, _ = native_coupling(work, solver, normalize)
    model = build_model(solver, J, params, schedule)
    seeds = [seed + k for k in range(restarts)]

    t0 = time.perf_counter()
    run = _run_ode if model.kind == "ode" else _run_map
    runs = run(model, seeds, cfg, schedule, work)
    per_run = (time.perf_counter() - t0) / restarts

    for r in runs:
        r.wall_time = per_run
        if r.diverged:
            continue
        if not keep_states:
            for smp in r.samples:
                smp.state = np.empty(0)
        spins = r.final_spins
        if inst.has_field:
            if spins[0] < 0:
                spins = -spins
            spins = spins[1:]
        r.final_spins = spins.astype(np.int8)
        rep = energy(inst, r.final_spins)
        r.final_energy = rep.energy
        r.final_cut = rep.cut

    finished = [r for r in runs if not r.diverged]
    if not finished:
        raise AllRunsDivergedError(runs)
    best = min(finished, key=lambda r: (r.final_energy, r.seed))
    return SolveResult(best, runs)


def _gain_at(schedule: GainSchedule, t: float):
    g = schedule_value(schedule, t)
    return None if g is ADAPTIVE else g


def _sample(model: Model, work: IsingInstance, t: float, y: np.ndarray, gain) -> Sample:
    return Sample(t, y, model.merit(y, gain), energy(work, model.readout(y)).energy)


def _run_ode(model, seeds, cfg, schedule, work) -> list[RunRecord]:
    Y0 = np.stack([model.init(np.random.default_rng(s)) for s in seeds])
    times, snaps, Y, diverged = integrate_batch(model.rhs, Y0, schedule, cfg)
    runs = []
    for r, s in enumerate(seeds):
        rec = RunRecord(solver=model.tag, seed=s)
        if diverged[r] >= 0:
            rec.diverged = True
            rec.message = f"diverged at step {diverged[r]}"
        else:
            rec.samples = [_sample(model, work, t, snap[r], _gain_at(schedule, t)) for t, snap in zip(times, snaps)]
            rec.final_state = Y[r].copy()
            rec.final_spins = model.readout(Y[r])
        runs.append(rec)
    return runs


def _run_map(model, seeds, cfg, schedule, work) -> list[RunRecord]:
    runs = []
    for s in seeds:
        rng = np.random.default_rng(s)
        y = model.init(rng)
        rec = RunRecord(solver=model.tag, seed=s)
        rec.samples.append(_sample(model, work, 0.0, y.copy(), _gain_at(schedule, 0.0)))
        for k in range(1, cfg.steps + 1):
            y = model.step_map(y, _gain_at(schedule, (k - 1) * cfg.dt), (k - 1) / cfg.steps, rng)
            if not np.all(np.isfinite(y)):
                rec.diverged = True
                rec.message = f"non-finite state at step {k}"
                break
            if k % cfg.record_every == 0 or k == cfg.steps:
                t = k * cfg.dt
                rec.samples.append(_sample(model, work, t, y.copy(), _gain_at(schedule, t)))
        if not rec.diverged:
            rec.final_state = y
            rec.final_spins = model.readout(y)
        runs.append(rec)
    return runs


def with_params(params: osc.OscParams, **changes) -> osc.OscParams:
    return replace(params, **changes)


__all__ = [
    "SOLVERS",
    "Model",
    "SolveResult",
    "AllRunsDivergedError",
    "build_model",
    "default_config",
    "default_params",
    "default_schedule",
    "native_coupling",
    "run_solver",
    "IsingError",
]
