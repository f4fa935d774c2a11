"""Discrete-time Ising iterations: gain-compensated matrix multiplication and the
noisy thresholded variant with ``K = sqrt(J + alpha M)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, DivergenceError, NotPSDError
from .ising import IsingInstance
from .jacobi import jacobi_eigh

PSD_TOL = 1e-10
ALPHA_MARGIN = 0.1
_OVERFLOW = 1e300


@dataclass(frozen=True)
class IterationMatrix:
    A: np.ndarray
    kind: str
    alpha_shift: float = 0.0
    kappa_dt: float = 0.0


def build_eq17_matrix(inst: IsingInstance, gamma, kappa_dt: float) -> IterationMatrix:
    """``A_ij = (1 + 2 kappa_dt gamma_i) delta_ij - 2 kappa_dt J_ij``.

    One explicit gradient step on the Lagrangian with gain ``gamma``; the
    optical loop applies it once per round trip.
    """
    if kappa_dt < 0:
        raise ValueError("kappa_dt must be nonnegative")
    n = inst.n
    gamma = np.asarray(gamma, dtype=np.float64)
    if gamma.ndim == 0:
        gamma = np.full(n, float(gamma))
    if gamma.shape != (n,):
        raise DimensionError(f"gamma has shape {gamma.shape}, expected ({n},)")
    A = np.diag(1.0 + 2.0 * kappa_dt * gamma) - 2.0 * kappa_dt * inst.J
    return IterationMatrix(A, "eq17", 0.0, kappa_dt)


def matmul_iterate(M: IterationMatrix, E, steps: int, normalize: bool = True) -> np.ndarray:
    """Apply ``E <- A E`` ``steps`` times, optionally rescaling to unit max-norm each step."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    E = np.asarray(E)
    E = np.array(E, dtype=np.result_type(E.dtype, np.float64))
    for k in range(steps):
        with np.errstate(over="ignore", invalid="ignore"):
            E = M.A @ E
        peak = np.max(np.abs(E))
        if normalize:
            if peak == 0.0:
                return E
            E = E / peak
        elif not np.isfinite(peak) or peak > _OVERFLOW:
            raise DivergenceError(f"matrix iteration overflowed at step {k + 1}", step=k + 1)
    return E


def default_alpha(J) -> float:
    """Smallest shift making ``J + alpha I`` PSD, plus a margin."""
    w, _ = jacobi_eigh(J, PSD_TOL)
    return max(0.0, -float(w[0])) + ALPHA_MARGIN


def build_soljacic_matrix(
    inst: IsingInstance, alpha: Optional[float] = None, M_choice=None
) -> IterationMatrix:
    """``K = sqrt(J + alpha M)`` by Jacobi eigendecomposition.

    ``M`` defaults to the identity; any ``M`` sharing eigenvectors with ``J``
    is accepted. A negative eigenvalue below ``-1e-10`` raises
    :class:`NotPSDError` with the smallest admissible ``alpha``.
    """
    J = inst.J
    n = inst.n
    M = np.eye(n) if M_choice is None else np.asarray(M_choice, dtype=np.float64)
    if M.shape != (n, n):
        raise DimensionError(f"M has shape {M.shape}, expected {(n, n)}")
    if alpha is None:
        alpha = default_alpha(J) if M_choice is None else 0.0
    target = J + alpha * M
    w, V = jacobi_eigh(target, PSD_TOL)
    if w[0] < -PSD_TOL:
        raise NotPSDError(w[0], _min_alpha(J, M))
    K = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T
    K = 0.5 * (K + K.T)
    return IterationMatrix(K, "soljacic", float(alpha), 0.0)


def _min_alpha(J: np.ndarray, M: np.ndarray) -> Optional[float]:
    # In the shared eigenbasis J + alpha M has eigenvalues lam_k + alpha mu_k.
    lam, V = jacobi_eigh(J, PSD_TOL)
    mu = np.einsum("ik,ij,jk->k", V, M, V)
    need = 0.0
    for lk, mk in zip(lam, mu):
        if lk >= 0:
            continue
        if mk <= 0:
            return None
        need = max(need, -lk / mk)
    return need


def heaviside(x) -> np.ndarray:
    """1 for strictly positive entries, else 0."""
    return (np.asarray(x) > 0).astype(np.int8)


def soljacic_iterate(
    K: IterationMatrix,
    state,
    noise_sigma: float = 0.0,
    seed: int = 0,
    steps: int = 1,
    noise_decay: bool = False,
    return_trajectory: bool = False,
):
    """Iterate ``E <- u(2 K E + N)`` with seeded zero-mean Gaussian noise ``N``.

    ``noise_decay`` ramps the noise standard deviation linearly to zero over
    the run. With ``return_trajectory`` the full ``(steps + 1, n)`` history is
    returned instead of the final state.
    """
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    e = np.asarray(state, dtype=np.int8)
    if not np.all((e == 0) | (e == 1)):
        raise ValueError("binary state entries must be 0 or 1")
    rng = np.random.default_rng(seed)
    n = e.shape[0]
    history = [e.copy()] if return_trajectory else None
    twoK = 2.0 * K.A
    for t in range(steps):
        drive = twoK @ e
        if noise_sigma > 0:
            sigma = noise_sigma * (1.0 - t / steps) if noise_decay else noise_sigma
            drive = drive + rng.normal(0.0, sigma, size=n)
        e = heaviside(drive)
        if history is not None:
            history.append(e.copy())
    return np.array(history) if history is not None else e


def soljacic_merit(inst: IsingInstance, K: IterationMatrix, e, beta: float = 1.0, M=None) -> float:
    """Effective merit ``-(beta/2) sum_ij (J + alpha M)_ij E_i E_j``."""
    M = np.eye(inst.n) if M is None else np.asarray(M)
    e = np.asarray(e, dtype=np.float64)
    return float(-0.5 * beta * e @ (inst.J + K.alpha_shift * M) @ e)


def binary_to_spins(state) -> np.ndarray:
    return (2 * np.asarray(state, dtype=np.int8) - 1).astype(np.int8)


def spins_to_binary(s) -> np.ndarray:
    return ((np.asarray(s, dtype=np.int8) + 1) // 2).astype(np.int8)


def find_cycle(K: IterationMatrix, state, max_steps: int) -> tuple[int, int]:
    """Zero-noise orbit analysis: ``(transient_length, cycle_length)``.

    Raises ``RuntimeError`` if no state repeats within ``max_steps``.
    """
    seen = {}
    e = np.asarray(state, dtype=np.int8)
    twoK = 2.0 * K.A
    for t in range(max_steps + 1):
        key = e.tobytes()
        if key in seen:
            return seen[key], t - seen[key]
        seen[key] = t
        e = heaviside(twoK @ e)
    raise RuntimeError(f"no cycle within {max_steps} steps")
