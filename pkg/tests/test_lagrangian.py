import numpy as np
import pytest
from hypothesis import given, strategies as st

from lagrange_ising import IsingInstance, random_instance
from lagrange_ising.errors import DimensionError, DivergenceError
from lagrange_ising.lagrangian import (
    MultiplierState,
    augmented_lagrange_value,
    descent_ascent_step,
    fd_gradient,
    ising_augmented_flow,
    ising_lagrange,
    kkt_check,
    lagrange_gradient_x,
    lagrange_value,
    problem_from_functions,
    run_descent_ascent,
)

from .conftest import rel_err
from .strategies import instances, spins


def toy(c=1.0):
    # f = x^2, g = x - 1 with exact derivatives so fixed points are exact.
    return problem_from_functions(
        lambda x: float(x[0] ** 2), [lambda x: x[0] - 1.0], 1, penalty_c=c,
        grad_f=lambda x: 2.0 * x, jac_g=lambda x: np.ones((1, 1)),
    )


EDGE = IsingInstance([[0, 1], [1, 0]])


# ---------------------------------------------------------------- values


@pytest.mark.parametrize("lam,expected", [((0, 0), 2.0), ((3, 5), 2.0)])
def test_ising_lagrange_feasible(lam, expected):
    prob = ising_lagrange(EDGE)
    assert lagrange_value(prob, MultiplierState([1, 1], lam)) == expected


def test_ising_lagrange_infeasible():
    prob = ising_lagrange(EDGE)
    assert lagrange_value(prob, MultiplierState([2, 0], [1, 1])) == -2.0


@pytest.mark.parametrize("x,lam,expected", [(1.0, 7.0, 1.0), (0.0, 2.0, -2.0)])
def test_toy_lagrange(x, lam, expected):
    assert lagrange_value(toy(), MultiplierState([x], [lam])) == expected


def test_no_constraints_is_objective():
    prob = problem_from_functions(lambda x: float(x @ x), [], 3)
    st_ = MultiplierState([1.0, 2.0, 3.0], [])
    assert lagrange_value(prob, st_) == 14.0


def test_augmented_values():
    st_ = MultiplierState([0.3], [1.5])
    assert augmented_lagrange_value(toy(0.0), st_) == lagrange_value(toy(0.0), st_)
    assert augmented_lagrange_value(ising_lagrange(EDGE, penalty_c=2.0), MultiplierState([2, 0], [1, 1])) == 8.0
    for lam, c in [(0.0, 1.0), (-4.0, 10.0), (2.5, 0.1)]:
        assert augmented_lagrange_value(toy(c), MultiplierState([1.0], [lam])) == 1.0


def test_dimension_checks():
    with pytest.raises(DimensionError):
        lagrange_value(ising_lagrange(EDGE), MultiplierState([1, 1, 1], [0, 0]))
    with pytest.raises(DimensionError):
        lagrange_value(ising_lagrange(EDGE), MultiplierState([1, 1], [0]))


@given(instances(max_n=8), st.data())
def test_augmentation_vanishes_on_spins(inst, data):
    s = data.draw(spins(inst.n))
    lam = data.draw(st.lists(st.floats(-5, 5), min_size=inst.n, max_size=inst.n))
    prob = ising_lagrange(inst, penalty_c=3.0)
    st_ = MultiplierState(s, lam)
    assert augmented_lagrange_value(prob, st_) == pytest.approx(lagrange_value(prob, st_), abs=1e-12)


# ---------------------------------------------------------------- gradients


def test_ascent_direction_is_constraint(rng):
    prob = ising_lagrange(random_instance(6, 0.6, seed=2), penalty_c=1.5)
    for _ in range(20):
        x, lam = rng.normal(size=6), rng.normal(size=6)
        fd = fd_gradient(lambda l: augmented_lagrange_value(prob, MultiplierState(x, l)), lam)
        assert rel_err(fd, prob.constraints(x)) <= 1e-6


def test_gradient_x_matches_fd(rng):
    prob = ising_lagrange(random_instance(6, 0.6, seed=3), alpha=np.full(6, 0.4), penalty_c=2.0)
    for _ in range(20):
        x, lam = rng.normal(size=6), rng.normal(size=6)
        fd = fd_gradient(lambda v: augmented_lagrange_value(prob, MultiplierState(v, lam)), x)
        assert rel_err(lagrange_gradient_x(prob, MultiplierState(x, lam)), fd) <= 1e-6


@pytest.mark.parametrize("c", [0.0, 1.0, 2.5])
def test_cubic_flow_is_negative_gradient(rng, c):
    inst = random_instance(8, 0.5, seed=5)
    alpha = rng.uniform(0, 1, 8)
    prob = ising_lagrange(inst, alpha=alpha, penalty_c=c)
    kappa = 0.3
    for _ in range(20):
        x, lam = rng.normal(size=8), rng.normal(size=8)
        fd = fd_gradient(lambda v: augmented_lagrange_value(prob, MultiplierState(v, lam)), x)
        assert rel_err(ising_augmented_flow(inst.J, x, lam, c, kappa, alpha), -kappa * fd) <= 1e-6


def test_fd_gradient_examples(rng):
    assert fd_gradient(lambda x: float(x[0] ** 2), [1.0])[0] == pytest.approx(2.0, abs=1e-6)
    assert not np.any(fd_gradient(lambda x: 3.0, rng.normal(size=4)))
    A = rng.normal(size=(5, 5))
    x = rng.normal(size=5)
    assert rel_err(fd_gradient(lambda v: float(v @ A @ v), x), (A + A.T) @ x) <= 1e-6


def test_fd_gradient_non_finite():
    with pytest.raises(DivergenceError):
        fd_gradient(lambda x: np.inf, [0.0])


# ---------------------------------------------------------------- dynamics


def test_step_at_kkt_point_is_fixed():
    st_ = MultiplierState([1.0], [-2.0])
    out = descent_ascent_step(toy(), st_, 0.5, 0.5)
    assert out.x.tolist() == [1.0] and out.lam.tolist() == [-2.0]


def test_step_arithmetic():
    out = descent_ascent_step(toy(0.0), MultiplierState([0.0], [0.0]), 0.5, 0.5)
    assert out.x.tolist() == [0.0]
    assert out.lam.tolist() == [-0.5]


def test_step_divergence():
    prob = problem_from_functions(lambda x: float(-1e8 * x[0] ** 2), [], 1)
    with pytest.raises(DivergenceError):
        descent_ascent_step(prob, MultiplierState([1.0], []), 0.5, 0.5)


def test_toy_converges():
    st_, k = run_descent_ascent(toy(), MultiplierState([0.0], [0.0]), 100_000, tol=1e-7)
    assert k < 100_000
    assert abs(st_.x[0] - 1.0) <= 1e-6 and abs(st_.lam[0] + 2.0) <= 1e-6


# ---------------------------------------------------------------- KKT


def test_kkt_examples():
    rep = kkt_check(toy(), MultiplierState([1.0], [-2.0]))
    assert rep.passed and rep.stationarity == 0 and rep.feasibility == 0
    rep = kkt_check(toy(), MultiplierState([0.5], [-2.0]))
    assert not rep.passed and rep.feasibility == 0.5
    assert set(rep.to_json()) == {"stationarity", "feasibility", "pass"}


@given(instances(max_n=8), st.data())
def test_kkt_feasible_on_spins(inst, data):
    s = data.draw(spins(inst.n))
    lam = data.draw(st.lists(st.floats(-3, 3), min_size=inst.n, max_size=inst.n))
    assert kkt_check(ising_lagrange(inst), MultiplierState(s, lam)).feasibility == 0
