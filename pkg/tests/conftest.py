"""Shared fixtures: reference instances, random generators and oracles."""

from __future__ import annotations

import numpy as np
import pytest
from scipy.optimize import linprog

from pufferkit import ConditionalPrior, PufferfishInstance, SecretPairScenario

# The two constructed prior pairs used throughout: a max-support-distance-1
# pair, and a worst-case pair whose plan reaches the full alphabet distance.
TABLE1_PI = (0.52, 0.48)
TABLE1_PJ = (0.5, 0.5)
TABLE2_PI = (0.50001, 0.0, 0.00001, 0.49998)
TABLE2_PJ = (0.49996, 0.00001, 0.0, 0.50003)


def make_scenario(p_i, p_j, rho="rho", s_i="s_i", s_j="s_j") -> SecretPairScenario:
    return SecretPairScenario(
        rho_id=rho,
        s_i_label=s_i,
        s_j_label=s_j,
        prior_i=ConditionalPrior(p_i),
        prior_j=ConditionalPrior(p_j),
    )


def make_instance(p_i, p_j) -> PufferfishInstance:
    return PufferfishInstance((make_scenario(p_i, p_j),))


@pytest.fixture
def table1_scenario() -> SecretPairScenario:
    return make_scenario(TABLE1_PI, TABLE1_PJ)


@pytest.fixture
def table1_instance() -> PufferfishInstance:
    return make_instance(TABLE1_PI, TABLE1_PJ)


@pytest.fixture
def table2_scenario() -> SecretPairScenario:
    return make_scenario(TABLE2_PI, TABLE2_PJ)


@pytest.fixture
def table2_instance() -> PufferfishInstance:
    return make_instance(TABLE2_PI, TABLE2_PJ)


def random_scenario(rng: np.random.Generator, n_min=2, n_max=10) -> SecretPairScenario:
    """A full-support random scenario; distinct priors almost surely."""
    n = int(rng.integers(n_min, n_max + 1))
    p_i = rng.random(n) + 0.05
    p_j = rng.random(n) + 0.05
    return make_scenario(p_i / p_i.sum(), p_j / p_j.sum())


def lp_coupling_cost(p_i: np.ndarray, p_j: np.ndarray) -> float:
    """Independent oracle: minimum expected |x - x'| over all couplings, by LP."""
    n = len(p_i)
    idx = np.arange(n)
    cost = np.abs(idx[:, None] - idx[None, :]).ravel().astype(float)
    a_eq = np.zeros((2 * n, n * n))
    for x in range(n):
        a_eq[x, x * n : (x + 1) * n] = 1.0  # row sums
    for xp in range(n):
        a_eq[n + xp, xp::n] = 1.0  # column sums
    b_eq = np.concatenate([p_i, p_j])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.success, res.message
    return float(res.fun)


def grid_log_ratio(scenario: SecretPairScenario, theta: float, total_points=100_000):
    """Independent oracle for the audit supremum: a dense grid over [-5n, 6n].

    The grid spacing is 1/m with integer m, so every alphabet point lies
    exactly on the grid; interior points then probe the between-breakpoint
    behaviour of the ratio.
    """
    n = max(scenario.alphabet_size - 1, 1)
    span = 11 * n
    m = max((total_points - 1) // span, 1)
    y = np.arange(span * m + 1, dtype=float) / m - 5 * n
    support = np.arange(scenario.alphabet_size, dtype=float)
    w = -np.abs(y[:, None] - support[None, :]) / theta

    def logmix(pmf):
        mask = pmf > 0
        ww = w[:, mask]
        mx = ww.max(axis=1)
        return mx + np.log((pmf[mask] * np.exp(ww - mx[:, None])).sum(axis=1))

    ratio = logmix(scenario.prior_i.pmf) - logmix(scenario.prior_j.pmf)
    return y, ratio
