"""Hypothesis strategies shared by the test modules."""

import numpy as np
from hypothesis import strategies as st

from lagrange_ising import IsingInstance


@st.composite
def instances(draw, min_n=1, max_n=8, weights=(-1.0, 0.0, 1.0), field=False):
    n = draw(st.integers(min_n, max_n))
    upper = draw(st.lists(st.sampled_from(weights), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2))
    J = np.zeros((n, n))
    J[np.triu_indices(n, 1)] = upper
    J = J + J.T
    h = None
    if field:
        h = draw(st.lists(st.integers(-3, 3), min_size=n, max_size=n).filter(any))
    return IsingInstance(J, h)


@st.composite
def spins(draw, n):
    return np.array(draw(st.lists(st.sampled_from([-1, 1]), min_size=n, max_size=n)), dtype=np.int8)
