"""Right-hand sides of the continuous-time Ising machines and their merit functions.

Every RHS accepts a coupling source (an :class:`IsingInstance` or a bare
matrix) and a state whose last axis indexes oscillators, so a batch of
independent trajectories can be advanced with one call.

Each gradient-flow RHS is paired with the function it descends:

=========  ===============================  ============================
solver     merit function                   relation
=========  ===============================  ============================
opo        :func:`opo_lagrange`             ``rhs = -1/2 grad``
radio      :func:`radio_lagrange`           ``rhs = -1/2 grad``
fiber      :func:`fiber_lagrange`           ``rhs = -1/2 grad``
polariton  :func:`polariton_lagrange`       ``rhs = -1/2 grad`` (U = 0)
phase      :func:`phase_lagrange`           ``rhs = -grad``
=========  ===============================  ============================

The coupling sign differs between models (``-J c`` for opo/polariton,
``+J c`` for radio/fiber/phase/leleu); each merit function carries the sign
that matches its own RHS.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import cmath

import numpy as np

from .errors import DivergenceError, StateError
from .ising import IsingInstance

CUBIC_SATURATION_DEFAULT = 0.2

Coupling = Union[IsingInstance, np.ndarray]


@dataclass(frozen=True)
class OscParams:
    """Physical knobs shared by the oscillator models.

    ``alpha`` and ``gamma`` may be scalars or per-oscillator arrays.
    ``beta_sat`` is the cubic saturation of the OPO model and the nonlinear
    attenuation of the polariton model.
    """

    alpha: Union[float, np.ndarray] = 1.0
    gamma: Union[float, np.ndarray] = 0.0
    coupling_scale: float = 1.0
    beta_sat: float = 0.0
    U: float = 0.0
    K_kerr: float = 1.0
    p_pump: float = 0.0
    xi0: float = 1.0
    beta_leleu: float = 0.1
    kappa_p: float = 0.01
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if np.any(np.asarray(self.alpha) < 0):
            raise ValueError("alpha must be nonnegative")
        if self.beta_sat < 0:
            raise ValueError("beta_sat must be nonnegative")
        if self.beta_leleu < 0:
            raise ValueError("beta_leleu must be nonnegative")
        if not np.isfinite(self.coupling_scale):
            raise ValueError("coupling_scale must be finite")


def coupling_matrix(src: Coupling) -> np.ndarray:
    return src.J if isinstance(src, IsingInstance) else np.asarray(src, dtype=np.float64)


def _couple(J: np.ndarray, x: np.ndarray) -> np.ndarray:
    # sum_j J_ij x_j along the last axis; works for batches. ndarray.dot is
    # markedly cheaper than @ for the small vectors integrated step by step.
    return J.dot(x) if x.ndim == 1 else x.dot(J.T)


def _finite(*arrays) -> None:
    for a in arrays:
        v = np.asarray(a).ravel()
        # One reduction on the hot path: NaN or inf poisons the sum of squares.
        if not cmath.isfinite(v.dot(v)) and not np.isfinite(v).all():
            bad = np.argwhere(~np.isfinite(a))[0]
            raise DivergenceError(f"non-finite state component at {tuple(int(b) for b in bad)}")


def _gain(params: OscParams, gamma):
    return params.gamma if gamma is None else gamma


# ---------------------------------------------------------------- OPO


def opo_rhs(src: Coupling, params: OscParams, c, gamma=None):
    """``dc/dt = (gamma - alpha) c - J c - beta_sat c**3``."""
    c = np.asarray(c, dtype=np.float64)
    _finite(c)
    J = coupling_matrix(src)
    out = (_gain(params, gamma) - params.alpha) * c - _couple(J, c)
    if params.beta_sat:
        out = out - params.beta_sat * c**3
    return out


def opo_dissipation(src: Coupling, params: OscParams, c, gamma=None) -> float:
    """Net power dissipation ``c'Jc + sum (alpha - gamma) c**2`` (gain as negative loss)."""
    J = coupling_matrix(src)
    c = np.asarray(c, dtype=np.float64)
    g = np.broadcast_to(_gain(params, gamma), c.shape)
    a = np.broadcast_to(params.alpha, c.shape)
    return float(c @ J @ c + np.sum((a - g) * c * c))


def opo_lagrange(src: Coupling, params: OscParams, c, gamma=None) -> float:
    """``c'Jc + sum alpha c**2 - sum gamma (c**2 - 1) + beta_sat/2 sum c**4``."""
    J = coupling_matrix(src)
    c = np.asarray(c, dtype=np.float64)
    g = np.broadcast_to(_gain(params, gamma), c.shape)
    a = np.broadcast_to(params.alpha, c.shape)
    val = c @ J @ c + np.sum(a * c * c) - np.sum(g * (c * c - 1.0))
    if params.beta_sat:
        val += 0.5 * params.beta_sat * np.sum(c**4)
    return float(val)


# ---------------------------------------------------------------- radio oscillators (real axis)


def radio_loss(n: int, coupling_scale: float) -> float:
    """Loss through ``n - 1`` coupling resistors in parallel, ``(n-1)/(4 R_c C_0)``."""
    return (n - 1) * coupling_scale


def radio_rhs(src: Coupling, params: OscParams, c, gamma=None):
    """``dc/dt = s J c - alpha c + gamma c`` with ``s = 1/(4 R_c C_0)``."""
    c = np.asarray(c, dtype=np.float64)
    _finite(c)
    J = coupling_matrix(src)
    return params.coupling_scale * _couple(J, c) + (_gain(params, gamma) - params.alpha) * c


def radio_lagrange(src: Coupling, params: OscParams, c, gamma=None) -> float:
    """``-s c'Jc + sum alpha c**2 - sum gamma (c**2 - 1)``, the circuit Lagrangian over ``C_0``."""
    J = coupling_matrix(src)
    c = np.asarray(c, dtype=np.float64)
    g = np.broadcast_to(_gain(params, gamma), c.shape)
    a = np.broadcast_to(params.alpha, c.shape)
    return float(-params.coupling_scale * (c @ J @ c) + np.sum(a * c * c) - np.sum(g * (c * c - 1.0)))


# ---------------------------------------------------------------- multicore fiber


def fiber_rhs(src: Coupling, params: OscParams, mu, gamma=None):
    """``dmu/dt = (gamma - alpha) mu + J mu`` for the polarization difference ``mu``."""
    mu = np.asarray(mu, dtype=np.float64)
    _finite(mu)
    J = coupling_matrix(src)
    return (_gain(params, gamma) - params.alpha) * mu + _couple(J, mu)


def fiber_lagrange(src: Coupling, params: OscParams, mu, gamma=None) -> float:
    """``sum alpha mu**2 - mu'J mu - sum gamma (mu**2 - 1)``.

    The coupling enters with a minus sign so that :func:`fiber_rhs` is exactly
    ``-1/2`` times its gradient.
    """
    J = coupling_matrix(src)
    mu = np.asarray(mu, dtype=np.float64)
    g = np.broadcast_to(_gain(params, gamma), mu.shape)
    a = np.broadcast_to(params.alpha, mu.shape)
    return float(np.sum(a * mu * mu) - mu @ J @ mu - np.sum(g * (mu * mu - 1.0)))


# ---------------------------------------------------------------- phase oscillators (unit circle)


def phase_rhs(src: Coupling, params: OscParams, phi, lam=None):
    """``dphi_i/dt = -(1/R_c) sum_j J_ij sin(phi_i - phi_j) - lam_i sin(2 phi_i)``.

    ``params.coupling_scale`` is ``1/R_c``; the injection-locking strengths
    ``lam`` default to ``params.gamma``.
    """
    phi = np.asarray(phi, dtype=np.float64)
    _finite(phi)
    J = coupling_matrix(src)
    lam = _gain(params, lam)
    # sin(a - b) = sin a cos b - cos a sin b keeps this O(n^2) without an n x n sine table.
    s, c = np.sin(phi), np.cos(phi)
    pair = s * _couple(J, c) - c * _couple(J, s)
    return -params.coupling_scale * pair - lam * np.sin(2.0 * phi)


def phase_lagrange(src: Coupling, params: OscParams, phi, lam=None) -> float:
    """``-(1/2R_c) sum_ij J_ij cos(phi_i - phi_j) + 1/2 sum lam_i (1 - cos 2 phi_i)``.

    :func:`phase_rhs` is exactly ``-grad`` of this function. It equals
    ``-1/2`` times the dissipation form ``(1/R_c) sum J cos + sum lam (cos 2phi - 1)``.
    """
    J = coupling_matrix(src)
    phi = np.asarray(phi, dtype=np.float64)
    lam = np.broadcast_to(_gain(params, lam), phi.shape)
    c, s = np.cos(phi), np.sin(phi)
    coup = c @ J @ c + s @ J @ s
    return float(-0.5 * params.coupling_scale * coup + 0.5 * np.sum(lam * (1.0 - np.cos(2.0 * phi))))


def phase_dissipation(src: Coupling, params: OscParams, phi, lam=None) -> float:
    """Resistor dissipation plus constraint term, ``(1/R_c) sum J cos + sum lam (cos 2phi - 1)``."""
    return -2.0 * phase_lagrange(src, params, phi, lam)


# ---------------------------------------------------------------- polariton condensates


def polariton_rhs(src: Coupling, params: OscParams, E, gamma=None):
    """``dE/dt = (gamma - beta |E|^2) E - i U |E|^2 E - J E``, with ``J`` scaled by ``coupling_scale``."""
    E = np.asarray(E, dtype=np.complex128)
    _finite(E)
    J = params.coupling_scale * coupling_matrix(src)
    mod2 = E.real**2 + E.imag**2
    out = (_gain(params, gamma) - params.beta_sat * mod2) * E - _couple(J, E)
    if params.U:
        out = out - 1j * params.U * mod2 * E
    return out


def polariton_lagrange(src: Coupling, params: OscParams, E, gamma=None) -> float:
    """``1/2 sum J (E_i* E_j + E_i E_j*) + beta/2 sum |E|^4 - sum gamma (|E|^2 - 1)``.

    With ``U = 0``, :func:`polariton_rhs` is ``-1/2`` times the gradient over
    the stacked ``(Re E, Im E)`` coordinates.
    """
    J = params.coupling_scale * coupling_matrix(src)
    E = np.asarray(E, dtype=np.complex128)
    g = np.broadcast_to(_gain(params, gamma), E.shape)
    mod2 = E.real**2 + E.imag**2
    coup = E.real @ J @ E.real + E.imag @ J @ E.imag
    return float(coup + 0.5 * params.beta_sat * np.sum(mod2**2) - np.sum(g * (mod2 - 1.0)))


def multiplier_feedback_rhs(state, kappa_p: float):
    """Multiplier ascent ``dgamma_i/dt = kappa_p (1 - |x_i|^2)`` for real or complex states."""
    if kappa_p <= 0:
        raise ValueError("kappa_p must be positive")
    state = np.asarray(state)
    mod2 = state.real**2 + state.imag**2 if np.iscomplexobj(state) else state * state
    return kappa_p * (1.0 - mod2)


# ---------------------------------------------------------------- Leleu error dynamics


def leleu_rhs(src: Coupling, params: OscParams, x, e=None, gamma=None):
    """``dx/dt = (gamma - alpha) x + e * (J x)``, ``de/dt = beta (1 - x**2) e``."""
    if e is None:
        raise StateError("Leleu dynamics need the error vector e")
    x = np.asarray(x, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    if e.shape != x.shape:
        raise StateError(f"error vector shape {e.shape} does not match x shape {x.shape}")
    _finite(x, e)
    J = coupling_matrix(src)
    dx = (_gain(params, gamma) - params.alpha) * x + e * _couple(J, x)
    de = params.beta_leleu * (1.0 - x * x) * e
    return dx, de


def leleu_split(src: Coupling, e) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Effective coupling ``A_ij = e_i J_ij`` and its symmetric/antisymmetric parts."""
    J = coupling_matrix(src)
    A = np.asarray(e, dtype=np.float64)[:, None] * J
    S = 0.5 * (A + A.T)
    K = 0.5 * (A - A.T)
    return A, S, K


# ---------------------------------------------------------------- Kerr parametric oscillators


def kerr_rhs(src: Coupling, params: OscParams, c, s, p=None):
    """Quadrature equations of coupled Kerr parametric oscillators.

    ``dc/dt = K (c^2 + s^2) s + p s + xi0 J s``
    ``ds/dt = -K (c^2 + s^2) c + p c - xi0 J c``
    """
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    _finite(c, s)
    J = coupling_matrix(src)
    p = params.p_pump if p is None else p
    mod2 = c * c + s * s
    dc = params.K_kerr * mod2 * s + p * s + params.xi0 * _couple(J, s)
    ds = -params.K_kerr * mod2 * c + p * c - params.xi0 * _couple(J, c)
    return dc, ds


def kerr_to_phasor(c, s):
    """Rotate quadratures onto the phasor axes: ``E = exp(-i pi/4) (s + i c)``."""
    return np.exp(-0.25j * np.pi) * (np.asarray(s) + 1j * np.asarray(c))


def kerr_phasor_rhs(src: Coupling, params: OscParams, E, p=None):
    """``dE/dt = p E* + i K |E|^2 E + i xi0 J E`` (time unit fixed so the prefactor is 1)."""
    E = np.asarray(E, dtype=np.complex128)
    J = coupling_matrix(src)
    p = params.p_pump if p is None else p
    mod2 = E.real**2 + E.imag**2
    return p * np.conj(E) + 1j * params.K_kerr * mod2 * E + 1j * params.xi0 * _couple(J, E)


def kerr_hamiltonian(src: Coupling, params: OscParams, c, s, p=None) -> float:
    """Conserved quantity of :func:`kerr_rhs` at fixed pump.

    ``H = K/4 sum (c^2+s^2)^2 + p/2 sum (s^2 - c^2) + xi0/2 (c'Jc + s'Js)``
    with ``dc/dt = dH/ds`` and ``ds/dt = -dH/dc``.
    """
    J = coupling_matrix(src)
    c = np.asarray(c, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    p = params.p_pump if p is None else p
    mod2 = c * c + s * s
    return float(
        0.25 * params.K_kerr * np.sum(mod2**2)
        + 0.5 * p * np.sum(s * s - c * c)
        + 0.5 * params.xi0 * (c @ J @ c + s @ J @ s)
    )


def initial_state(rng: np.random.Generator, shape, amplitude: float = 0.01, complex_: bool = False):
    """Zero-mean uniform noise in ``[-amplitude, amplitude]`` per component."""
    x = rng.uniform(-amplitude, amplitude, size=shape)
    if complex_:
        x = x + 1j * rng.uniform(-amplitude, amplitude, size=shape)
    return x
