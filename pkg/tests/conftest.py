"""Shared generators for randomized property checks."""

import numpy as np
import pytest

from qdesign import TabulatedQuantizer, is_admissible, piecewise_linear


def random_wide_tabulated(rng: np.random.Generator) -> TabulatedQuantizer:
    """Monotone antisymmetric quantizer tabulated on [-X, 0] with X > 1.

    Monotone gamma makes g monotone under any symmetric noise, so the result
    is admissible; the positive left-edge value guarantees probability mass
    below -1 (support wider than the unit interval).
    """
    X = float(rng.uniform(1.2, 3.0))
    n = int(rng.integers(6, 14))
    inner = np.sort(rng.random(n - 2)) * X - X
    nodes = np.concatenate([[-X], inner, [0.0]])
    assert np.all(np.diff(nodes) > 0)
    vals = 0.02 + np.sort(rng.uniform(0.0, 0.46, n))
    vals[-1] = 0.5
    return TabulatedQuantizer(tuple(nodes), tuple(vals))


def random_feasible_slopes(rng: np.random.Generator, K: int) -> np.ndarray:
    """Slope vector satisfying the probability and continuity constraints."""
    y = np.concatenate([[0.0], rng.random(K - 1), [0.5]])
    m = K * np.diff(y)
    m *= (K / 2.0) / m.sum()
    return m


def random_admissible_pw(rng: np.random.Generator, noise, K: int = 10, L: int = 60):
    """Rejection-sample a feasible piecewise-linear quantizer admissible under noise."""
    for _ in range(200):
        q = piecewise_linear(random_feasible_slopes(rng, K))
        if is_admissible(q, noise, L):
            return q
    raise AssertionError("could not draw an admissible quantizer in 200 attempts")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
