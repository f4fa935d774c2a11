import numpy as np
import pytest
from hypothesis import given, strategies as st

from lagrange_ising import IsingInstance, random_instance
from lagrange_ising.errors import DivergenceError, NotPSDError
from lagrange_ising.iterators import (
    IterationMatrix,
    binary_to_spins,
    build_eq17_matrix,
    build_soljacic_matrix,
    default_alpha,
    find_cycle,
    heaviside,
    matmul_iterate,
    soljacic_iterate,
    soljacic_merit,
    spins_to_binary,
)
from lagrange_ising.jacobi import jacobi_eigh, sqrtm_psd

from .strategies import instances


def dominant_alignment(A, E):
    """Norm of the projection of unit ``E`` onto the dominant eigenspace of symmetric ``A``."""
    w, V = np.linalg.eigh(A)
    top = np.abs(w) >= np.max(np.abs(w)) * (1 - 1e-9)
    P = V[:, top]
    e = E / np.linalg.norm(E)
    return float(np.linalg.norm(P.T @ e))


# ---------------------------------------------------------------- Jacobi


@given(st.integers(1, 9), st.integers(0, 2**31 - 1))
def test_jacobi_matches_numpy(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(n, n))
    A = B + B.T
    w, V = jacobi_eigh(A)
    assert np.allclose(w, np.linalg.eigvalsh(A), atol=1e-9)
    assert np.allclose(V.T @ V, np.eye(n), atol=1e-10)
    assert np.allclose(A @ V, V * w, atol=1e-8)


def test_jacobi_rejects_asymmetric():
    with pytest.raises(ValueError):
        jacobi_eigh([[0.0, 1.0], [0.0, 0.0]])


def test_sqrtm_psd(rng):
    B = rng.normal(size=(6, 6))
    A = B @ B.T
    R = sqrtm_psd(A)
    assert np.max(np.abs(R @ R - A)) <= 1e-8


# ---------------------------------------------------------------- gain-compensated multiplication


def test_gain_compensated_examples():
    inst = random_instance(5, 0.6, seed=1)
    assert np.array_equal(build_eq17_matrix(inst, 1.0, 0.0).A, np.eye(5))
    one = build_eq17_matrix(IsingInstance([[0.0]]), [1.0], 0.05)
    assert one.A[0, 0] == pytest.approx(1.1)
    A = build_eq17_matrix(inst, np.linspace(0, 1, 5), 0.05).A
    assert np.array_equal(A, A.T)


@pytest.mark.parametrize("seed", range(5))
def test_gain_compensated_shares_eigenvectors(seed):
    inst = random_instance(8, 0.5, seed=seed)
    A = build_eq17_matrix(inst, 0.7, 0.05).A
    mu, V = np.linalg.eigh(inst.J)
    AV = A @ V
    lam = np.sum(V * AV, axis=0)
    assert np.max(np.abs(AV - V * lam)) <= 1e-8


def test_matmul_trivial_cases(rng):
    E = rng.normal(size=4)
    M = IterationMatrix(np.eye(4), "eq17")
    assert np.array_equal(matmul_iterate(M, E, 0), E)
    assert np.array_equal(matmul_iterate(M, E, 10, normalize=False), E)


def test_matmul_overflow():
    with pytest.raises(DivergenceError):
        matmul_iterate(IterationMatrix(1e10 * np.eye(2), "eq17"), [1.0, 1.0], 100, normalize=False)


@pytest.mark.parametrize("seed", range(5))
def test_power_iteration_alignment(seed):
    rng = np.random.default_rng(seed)
    B = rng.normal(size=(6, 6))
    M = IterationMatrix(B + B.T, "eq17")
    E = matmul_iterate(M, rng.normal(size=6), 1000)
    assert dominant_alignment(M.A, E) >= 1 - 1e-6


# ---------------------------------------------------------------- thresholded iteration


def test_soljacic_zero_coupling():
    K = build_soljacic_matrix(IsingInstance(np.zeros((3, 3))), alpha=4.0)
    assert np.allclose(K.A, 2 * np.eye(3), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_soljacic_square_root(seed):
    inst = random_instance(8, 0.5, seed=seed)
    K = build_soljacic_matrix(inst)
    target = inst.J + K.alpha_shift * np.eye(8)
    assert np.max(np.abs(K.A @ K.A - target)) <= 1e-8
    assert np.max(np.abs(K.A - K.A.T)) <= 1e-10


def test_soljacic_not_psd():
    inst = random_instance(8, 0.5, seed=3)
    lam_min = np.linalg.eigvalsh(inst.J)[0]
    with pytest.raises(NotPSDError) as exc:
        build_soljacic_matrix(inst, alpha=-lam_min - 0.5)
    assert exc.value.min_alpha == pytest.approx(-lam_min, abs=1e-8)
    assert default_alpha(inst.J) == pytest.approx(-lam_min + 0.1, abs=1e-8)


def test_soljacic_custom_m():
    inst = random_instance(6, 0.6, seed=2)
    mu, V = np.linalg.eigh(inst.J)
    M = V @ np.diag(np.linspace(1, 2, 6)) @ V.T
    M = 0.5 * (M + M.T)
    K = build_soljacic_matrix(inst, alpha=5.0, M_choice=M)
    assert np.max(np.abs(K.A @ K.A - (inst.J + 5.0 * M))) <= 1e-8


def test_soljacic_iterate_examples():
    K = IterationMatrix(np.eye(2), "soljacic")
    assert soljacic_iterate(K, [1, 0]).tolist() == [1, 0]
    K2 = build_soljacic_matrix(random_instance(8, 0.5, seed=4))
    e0 = np.array([1, 0, 1, 1, 0, 0, 1, 0])
    runs = [soljacic_iterate(K2, e0, 0.0, seed=s, steps=50) for s in range(3)]
    assert all(np.array_equal(r, runs[0]) for r in runs)
    a = soljacic_iterate(K2, e0, 0.3, seed=9, steps=50, return_trajectory=True)
    b = soljacic_iterate(K2, e0, 0.3, seed=9, steps=50, return_trajectory=True)
    assert a.shape == (51, 8) and np.array_equal(a, b)
    with pytest.raises(ValueError):
        soljacic_iterate(K2, [2, 0, 0, 0, 0, 0, 0, 0])


def test_soljacic_merit_mostly_non_increasing():
    inst = random_instance(8, 0.5, seed=6)
    K = build_soljacic_matrix(inst)
    traj = soljacic_iterate(K, np.ones(8, dtype=np.int8), 0.01, seed=1, steps=1000, return_trajectory=True)
    h = np.array([soljacic_merit(inst, K, e) for e in traj])
    assert np.mean(np.diff(h) <= 1e-12) > 0.5


@pytest.mark.parametrize("seed", range(6))
def test_cycles_found(seed):
    n = 4 + seed
    K = build_soljacic_matrix(random_instance(n, 0.5, seed=seed))
    e0 = np.random.default_rng(seed).integers(0, 2, n)
    transient, period = find_cycle(K, e0, 2**n)
    assert period >= 1 and transient + period <= 2**n + 1


def test_binary_spin_conversions():
    assert binary_to_spins([1, 0]).tolist() == [1, -1]
    assert binary_to_spins([1, 1, 1]).tolist() == [1, 1, 1]
    assert heaviside([0.0, 1e-300, -1.0]).tolist() == [0, 1, 0]


@given(instances(max_n=6), st.data())
def test_binary_round_trip(inst, data):
    e = np.array(data.draw(st.lists(st.sampled_from([0, 1]), min_size=inst.n, max_size=inst.n)), dtype=np.int8)
    assert np.array_equal(spins_to_binary(binary_to_spins(e)), e)
