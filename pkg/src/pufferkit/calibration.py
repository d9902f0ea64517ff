"""Laplace scale calibration for pufferfish privacy.

Three calibrations are provided for a privacy budget epsilon (nats):

* ``theta_l1``: max pairwise alphabet distance over epsilon, ignoring priors.
* ``theta_w1``: max support distance of the optimal transport plan over epsilon.
* ``theta_relaxed``: the smallest scale keeping every per-column average
  ``f_x'(theta) = sum_x (e^{|x-x'|/theta} - e^eps) * plan(x, x')`` non-positive,
  found by a bracketed Brent search in the t = e^{1/theta} domain.

The relaxed scale is never larger than the W1 scale and is typically much
smaller when the plan concentrates near the diagonal.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllDegenerateError,
    DegenerateColumnError,
    NotOrderOneError,
)
from .priors import PufferfishInstance, SecretPairScenario
from .transport import SUPPORT_THRESHOLD, TransportPlan, kantorovich_plan
from .validation import check_epsilon, check_theta, check_tolerance

__all__ = [
    "DEFAULT_NU",
    "THETA_TOL",
    "F_TOL",
    "MAX_ITERATIONS",
    "ColumnRoot",
    "ScenarioCalibration",
    "CalibrationResult",
    "theta_l1",
    "theta_w1",
    "f_column",
    "bracket",
    "brent_root",
    "theta_relaxed",
    "closed_form_n1",
    "noise_reduction_bounds",
]

# Bracket-width tolerance in the t domain, and derived tolerances for
# assertions on theta (THETA_TOL) and on f values (F_TOL).
DEFAULT_NU = 1e-12
THETA_TOL = 1e-8
F_TOL = 1e-10

MAX_ITERATIONS = 200

# Columns whose off-diagonal mass is at most this are constant in theta.
_DEGENERATE_MASS = 1e-15

# Exponents beyond this would overflow a double; the gap saturates instead.
_EXP_LIMIT = 700.0

_EPS = sys.float_info.epsilon


@dataclass(frozen=True)
class ColumnRoot:
    """Root of one column's gap function, with its bracket."""

    x_prime: int
    theta_root: float
    bracket_low: float
    bracket_high: float
    phi: float
    degenerate: bool
    iterations: int = 0
    hit_max_iterations: bool = False

    def to_dict(self) -> dict:
        return {
            "x_prime": self.x_prime,
            "theta_root": self.theta_root,
            "bracket_low": self.bracket_low,
            "bracket_high": self.bracket_high,
            "phi": self.phi,
            "degenerate": self.degenerate,
            "iterations": self.iterations,
            "hit_max_iterations": self.hit_max_iterations,
        }


@dataclass(frozen=True)
class ScenarioCalibration:
    """Per-scenario roots for both directions of the secret pair."""

    rho_id: str
    s_i_label: str
    s_j_label: str
    alphabet_size: int
    plan_max_distance: int
    forward_roots: tuple[ColumnRoot, ...]
    reverse_roots: tuple[ColumnRoot, ...]
    binding_direction: str | None
    binding_x_prime: int | None
    theta: float

    def roots(self, direction: str) -> tuple[ColumnRoot, ...]:
        return self.forward_roots if direction == "forward" else self.reverse_roots

    def to_dict(self) -> dict:
        return {
            "rho": self.rho_id,
            "s_i": self.s_i_label,
            "s_j": self.s_j_label,
            "alphabet_size": self.alphabet_size,
            "plan_max_distance": self.plan_max_distance,
            "forward_roots": [r.to_dict() for r in self.forward_roots],
            "reverse_roots": [r.to_dict() for r in self.reverse_roots],
            "binding_direction": self.binding_direction,
            "binding_x_prime": self.binding_x_prime,
            "theta": self.theta,
        }


@dataclass(frozen=True)
class CalibrationResult:
    """Scales from all three mechanisms at one privacy budget."""

    epsilon: float
    theta_l1: float
    theta_w1: float
    theta_relaxed: float
    delta: float
    tolerance: float
    per_scenario: tuple[ScenarioCalibration, ...]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "theta_l1": self.theta_l1,
            "theta_w1": self.theta_w1,
            "theta_relaxed": self.theta_relaxed,
            "delta": self.delta,
            "tolerance": self.tolerance,
            "per_scenario": [s.to_dict() for s in self.per_scenario],
        }


def theta_l1(instance: PufferfishInstance, epsilon: float) -> float:
    """Scale from the maximum pairwise alphabet distance, priors ignored."""
    check_epsilon(epsilon)
    return (instance.alphabet_size - 1) / epsilon


def theta_w1(instance: PufferfishInstance, epsilon: float) -> float:
    """Scale from the worst support distance of each scenario's optimal plan."""
    check_epsilon(epsilon)
    n_pi = max(kantorovich_plan(s).max_distance for s in instance.scenarios)
    return n_pi / epsilon


def _column_terms(plan: TransportPlan, x_prime: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Support entries of one column as (distances, masses).

    Entries at or below the support threshold are differencing residue and are
    excluded, matching the support set used for the W1 scale.
    """
    col = plan.matrix[:, x_prime]
    idx = np.nonzero(col > SUPPORT_THRESHOLD)[0]
    dists = tuple(int(abs(i - x_prime)) for i in idx)
    masses = tuple(float(col[i]) for i in idx)
    return dists, masses


def _gap(dists, masses, neg_mass: float, ln_t: float, epsilon: float) -> float:
    """sum(mass * e^{d * ln_t}) - e^eps * neg_mass, saturating on overflow.

    When the largest exponent would overflow, the positive sum dominates the
    bounded negative part (neg_mass <= 1), so the sign is positive; the value
    saturates to +inf rather than raising.
    """
    if dists and max(dists) * ln_t > _EXP_LIMIT:
        return math.inf
    total = 0.0
    for d, m in zip(dists, masses):
        total += m * math.exp(d * ln_t)
    return total - math.exp(epsilon) * neg_mass


def f_column(plan: TransportPlan, x_prime: int, theta: float, epsilon: float) -> float:
    """Column gap ``sum_x (e^{|x-x'|/theta} - e^eps) * plan(x, x')``.

    Strictly decreasing in theta whenever the column has off-diagonal mass.
    """
    check_theta(theta)
    check_epsilon(epsilon)
    dists, masses = _column_terms(plan, x_prime)
    return _gap(dists, masses, sum(masses), 1.0 / theta, epsilon)


def _column_split(plan: TransportPlan, x_prime: int) -> tuple[float, float]:
    """Diagonal and off-diagonal support mass of one column."""
    dists, masses = _column_terms(plan, x_prime)
    diag = sum(m for d, m in zip(dists, masses) if d == 0)
    offdiag = sum(m for d, m in zip(dists, masses) if d > 0)
    return diag, offdiag


def _check_plan_matches(plan: TransportPlan, scenario: SecretPairScenario, x_prime: int):
    if not 0 <= x_prime < plan.alphabet_size:
        raise IndexError(f"column {x_prime} out of range for alphabet {plan.alphabet_size}")
    if abs(plan.col_marginal[x_prime] - scenario.prior_j.pmf[x_prime]) > 1e-6:
        raise ValueError(
            "plan and scenario disagree: column marginal "
            f"{plan.col_marginal[x_prime]!r} vs prior {scenario.prior_j.pmf[x_prime]!r} "
            f"at {x_prime} (was the plan built from this scenario?)"
        )


def _bracket_phi(diag: float, offdiag: float, epsilon: float) -> float:
    col_mass = diag + offdiag
    return math.log((math.exp(epsilon) * col_mass - diag) / offdiag)


def bracket(
    plan: TransportPlan,
    scenario: SecretPairScenario,
    x_prime: int,
    epsilon: float,
) -> tuple[float, float, float]:
    """Root bracket (theta_a, theta_b, phi) for one non-degenerate column.

    phi compares the column's mass with and without the budget applied; the
    root always lies in [1/phi, n/phi] where n is the plan's max support
    distance, because every off-diagonal term sits at distance between 1 and n.
    """
    check_epsilon(epsilon)
    _check_plan_matches(plan, scenario, x_prime)
    diag, offdiag = _column_split(plan, x_prime)
    if offdiag <= _DEGENERATE_MASS:
        raise DegenerateColumnError(
            f"column {x_prime} has no off-diagonal mass; its gap is constant in theta"
        )
    phi = _bracket_phi(diag, offdiag, epsilon)
    return 1.0 / phi, plan.max_distance / phi, phi


def _brent_t(g, t_lo: float, t_hi: float, nu: float) -> tuple[float, float, int, bool]:
    """Brent search for the root of increasing g on [t_lo, t_hi].

    Candidates come from inverse quadratic interpolation, then the secant,
    then bisection; any candidate outside the open bracket is replaced by the
    midpoint, and a step is forced to bisection when the bracket has not
    halved over the last two iterations. Stops when the bracket width falls
    below nu plus the unavoidable machine-epsilon term.

    Returns (t_neg, t_pos, iterations, hit_cap): the final bracket endpoints
    with g(t_neg) <= 0 <= g(t_pos).
    """
    f_lo = g(t_lo)
    f_hi = g(t_hi)
    if f_hi <= 0.0:
        # The analytic upper endpoint already satisfies the condition.
        return t_hi, t_hi, 0, False
    if f_lo >= 0.0:
        # Root at (or within float noise of) the lower endpoint.
        return t_lo, t_lo, 0, False

    # b carries the smaller |f|, c the contrapoint of opposite sign.
    if abs(f_lo) <= abs(f_hi):
        b, fb, c, fc = t_lo, f_lo, t_hi, f_hi
    else:
        b, fb, c, fc = t_hi, f_hi, t_lo, f_lo
    a, fa = c, fc

    width_older = math.inf
    width_old = math.inf
    iterations = 0
    hit_cap = False
    while abs(b - c) > nu + 2.0 * _EPS * abs(b):
        if iterations >= MAX_ITERATIONS:
            hit_cap = True
            break
        iterations += 1
        width = abs(b - c)
        force_bisect = width > 0.5 * width_older

        if force_bisect:
            t_new = 0.5 * (b + c)
        elif fa != fc and fb != fc and fa != fb:
            t_new = (
                a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
            )
        elif fa != fb:
            t_new = (a * fb - b * fa) / (fb - fa)
        else:
            t_new = 0.5 * (b + c)
        lo, hi = (b, c) if b < c else (c, b)
        if not (lo < t_new < hi):  # also rejects nan/inf from saturated f values
            t_new = 0.5 * (b + c)
        if not (lo < t_new < hi):
            break  # bracket narrower than one float step

        f_new = g(t_new)
        a, fa = b, fb
        if f_new == 0.0:
            b, fb = t_new, f_new
            c, fc = t_new, f_new
            break
        if (f_new > 0.0) == (fb > 0.0):
            b, fb = t_new, f_new  # same side as b: tighten that end
        else:
            c, fc = b, fb  # crossed the root: old b becomes the contrapoint
            b, fb = t_new, f_new
        if abs(fc) < abs(fb):
            b, fb, c, fc = c, fc, b, fb
        width_older = width_old
        width_old = width

    if fb <= 0.0:
        t_neg, t_pos = b, c
    else:
        t_neg, t_pos = c, b
    return t_neg, t_pos, iterations, hit_cap


def brent_root(
    plan: TransportPlan,
    scenario: SecretPairScenario,
    x_prime: int,
    epsilon: float,
    nu: float = DEFAULT_NU,
) -> ColumnRoot:
    """Root of one column's gap function, from the safe side.

    Degenerate columns (no off-diagonal mass) are satisfied by any scale and
    contribute 0. Otherwise the search runs in the t = e^{1/theta} domain over
    the bracket, and of the two final endpoints the larger theta is returned
    so the column gap at the result is non-positive.
    """
    check_epsilon(epsilon)
    check_tolerance(nu)
    _check_plan_matches(plan, scenario, x_prime)
    diag, offdiag = _column_split(plan, x_prime)
    if offdiag <= _DEGENERATE_MASS:
        return ColumnRoot(
            x_prime=x_prime, theta_root=0.0, bracket_low=0.0, bracket_high=0.0,
            phi=0.0, degenerate=True,
        )
    phi = _bracket_phi(diag, offdiag, epsilon)
    n_pi = plan.max_distance
    theta_a, theta_b = 1.0 / phi, n_pi / phi

    dists, masses = _column_terms(plan, x_prime)
    col_mass = sum(masses)

    def g(t: float) -> float:
        return _gap(dists, masses, col_mass, math.log(t), epsilon)

    # t decreases as theta grows: theta_b maps to the small-t end.
    t_lo = math.exp(phi / n_pi)
    t_hi = math.exp(phi)
    t_neg, t_pos, iterations, hit_cap = _brent_t(g, t_lo, t_hi, nu)
    # g(t_neg) <= 0, so the corresponding (larger) theta satisfies the column.
    theta_root = max(1.0 / math.log(t_neg), 1.0 / math.log(t_pos))
    return ColumnRoot(
        x_prime=x_prime,
        theta_root=theta_root,
        bracket_low=theta_a,
        bracket_high=theta_b,
        phi=phi,
        degenerate=False,
        iterations=iterations,
        hit_max_iterations=hit_cap,
    )


def _scenario_roots(
    scenario: SecretPairScenario, epsilon: float, nu: float
) -> tuple[TransportPlan, tuple[ColumnRoot, ...], tuple[ColumnRoot, ...]]:
    plan_fwd = kantorovich_plan(scenario)
    plan_rev = kantorovich_plan(scenario.swapped())
    fwd = tuple(
        brent_root(plan_fwd, scenario, x, epsilon, nu)
        for x in range(scenario.alphabet_size)
    )
    rev = tuple(
        brent_root(plan_rev, scenario.swapped(), x, epsilon, nu)
        for x in range(scenario.alphabet_size)
    )
    return plan_fwd, fwd, rev


def theta_relaxed(
    instance: PufferfishInstance,
    epsilon: float,
    nu: float = DEFAULT_NU,
) -> CalibrationResult:
    """Calibrate the relaxed mechanism over every scenario and both directions.

    The likelihood-ratio requirement is two-sided and the column gaps are not
    symmetric in the pair, so each scenario is calibrated as given and with
    its priors swapped; the result is the maximum root found anywhere.
    """
    check_epsilon(epsilon)
    check_tolerance(nu)
    details: list[ScenarioCalibration] = []
    for scenario in instance.scenarios:
        plan, fwd, rev = _scenario_roots(scenario, epsilon, nu)
        binding_direction: str | None = None
        binding_x: int | None = None
        theta_scenario = 0.0
        for direction, roots in (("forward", fwd), ("reverse", rev)):
            for root in roots:
                if not root.degenerate and root.theta_root > theta_scenario:
                    theta_scenario = root.theta_root
                    binding_direction = direction
                    binding_x = root.x_prime
        details.append(
            ScenarioCalibration(
                rho_id=scenario.rho_id,
                s_i_label=scenario.s_i_label,
                s_j_label=scenario.s_j_label,
                alphabet_size=scenario.alphabet_size,
                plan_max_distance=plan.max_distance,
                forward_roots=fwd,
                reverse_roots=rev,
                binding_direction=binding_direction,
                binding_x_prime=binding_x,
                theta=theta_scenario,
            )
        )
    relaxed = max(d.theta for d in details)
    n_pi = max(d.plan_max_distance for d in details)
    w1 = n_pi / epsilon
    l1 = (instance.alphabet_size - 1) / epsilon
    return CalibrationResult(
        epsilon=epsilon,
        theta_l1=l1,
        theta_w1=w1,
        theta_relaxed=relaxed,
        delta=w1 - relaxed,
        tolerance=nu,
        per_scenario=tuple(details),
    )


def closed_form_n1(plan: TransportPlan, scenario: SecretPairScenario, epsilon: float) -> float:
    """Exact relaxed scale when the plan's max support distance is 1.

    Every off-diagonal term then sits at distance exactly 1 and each column's
    root is 1/phi in closed form; the scale is the max over non-degenerate
    columns. Raises NotOrderOneError for other plans.
    """
    check_epsilon(epsilon)
    if plan.max_distance != 1:
        raise NotOrderOneError(
            f"closed form needs max support distance 1, plan has {plan.max_distance}"
        )
    best = 0.0
    for x_prime in range(plan.alphabet_size):
        diag, offdiag = _column_split(plan, x_prime)
        if offdiag <= _DEGENERATE_MASS:
            continue
        ratio = diag / offdiag
        best = max(best, 1.0 / math.log(math.exp(epsilon) + (math.exp(epsilon) - 1.0) * ratio))
    return best


def noise_reduction_bounds(result: CalibrationResult) -> tuple[float, float]:
    """Bracket the noise reduction delta using the per-column brackets.

    Every column root lies in [1/phi, n/phi], so delta = theta_w1 - theta_relaxed
    lies between n/eps - n/min(phi) and n/eps - 1/min(phi).
    """
    phis = [
        root.phi
        for detail in result.per_scenario
        for roots in (detail.forward_roots, detail.reverse_roots)
        for root in roots
        if not root.degenerate
    ]
    if not phis:
        raise AllDegenerateError("every column is degenerate; delta is 0 with no bracket")
    n_pi = max(d.plan_max_distance for d in result.per_scenario)
    phi_min = min(phis)
    base = n_pi / result.epsilon
    return base - n_pi / phi_min, base - 1.0 / phi_min
