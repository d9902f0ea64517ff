"""Kantorovich optimal transport plans between two discrete priors.

For one-dimensional distributions with the |x - x'| ground cost, the optimal
coupling is built directly from the two cumulative mass functions: the joint
CMF is the pointwise minimum of the marginal CMFs, and the plan follows by
inclusion-exclusion differencing. No linear program is solved here.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConditionNotMetError
from .priors import SecretPairScenario

__all__ = [
    "SUPPORT_THRESHOLD",
    "TransportPlan",
    "kantorovich_plan",
    "worst_case_condition",
    "worst_case_plan",
    "mass_split",
]

# Entries at or below this level are floating residue from CMF differencing,
# not support points; counting them would inflate the max support distance.
SUPPORT_THRESHOLD = 1e-12

_MASS_TOL = 1e-9
_MARGINAL_TOL = 1e-9


@dataclass(frozen=True)
class TransportPlan:
    """A dense optimal coupling with cached marginals and support metadata."""

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray
    support: tuple[tuple[int, int], ...]
    max_distance: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"plan matrix must be square, got shape {m.shape}")
        if np.any(m < 0):
            raise ValueError("plan entries must be non-negative")
        if abs(float(m.sum()) - 1.0) > _MASS_TOL:
            raise ValueError(f"plan mass must be 1 within {_MASS_TOL}, got {m.sum()!r}")
        for arr in (m, self.row_marginal, self.col_marginal):
            arr.flags.writeable = False

    @property
    def alphabet_size(self) -> int:
        return int(self.matrix.shape[0])

    def transport_cost(self) -> float:
        """Expected |x - x'| under the plan (the 1-Wasserstein distance)."""
        n = self.alphabet_size
        idx = np.arange(n)
        return float(np.sum(np.abs(idx[:, None] - idx[None, :]) * self.matrix))

    def column(self, x_prime: int) -> np.ndarray:
        return self.matrix[:, x_prime]

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "support": [list(pair) for pair in self.support],
            "max_distance": self.max_distance,
        }

    def dump_json(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")

    def dump_csv(self, path: str | Path) -> None:
        """Matrix dump; row index is x, column index is x'."""
        n = self.alphabet_size
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x"] + [str(j) for j in range(n)])
            for x in range(n):
                writer.writerow([x] + [repr(v) for v in self.matrix[x]])


def _finalize_plan(matrix: np.ndarray, scenario: SecretPairScenario) -> TransportPlan:
    # Differencing is exact in reals but leaves tiny negative residue in floats.
    matrix = np.where((matrix < 0) & (matrix >= -SUPPORT_THRESHOLD), 0.0, matrix)
    row = matrix.sum(axis=1)
    col = matrix.sum(axis=0)
    if np.max(np.abs(row - scenario.prior_i.pmf)) > _MARGINAL_TOL:
        raise ValueError("row marginals do not match the first prior")
    if np.max(np.abs(col - scenario.prior_j.pmf)) > _MARGINAL_TOL:
        raise ValueError("column marginals do not match the second prior")
    support = tuple(
        (int(x), int(xp))
        for x, xp in np.argwhere(matrix > SUPPORT_THRESHOLD)
    )
    max_distance = max((abs(x - xp) for x, xp in support), default=0)
    return TransportPlan(
        matrix=matrix,
        row_marginal=row,
        col_marginal=col,
        support=support,
        max_distance=int(max_distance),
    )


def kantorovich_plan(scenario: SecretPairScenario) -> TransportPlan:
    """The optimal coupling of the scenario's two priors under the |x - x'| cost.

    The joint CMF is min(F_i(x), F_j(x')); the plan is its second difference.
    """
    cmf_i = scenario.prior_i.cmf()
    cmf_j = scenario.prior_j.cmf()
    n = scenario.alphabet_size
    joint = np.zeros((n + 1, n + 1))
    joint[1:, 1:] = np.minimum.outer(cmf_i, cmf_j)
    matrix = joint[1:, 1:] - joint[:-1, 1:] - joint[1:, :-1] + joint[:-1, :-1]
    return _finalize_plan(matrix, scenario)


def worst_case_condition(scenario: SecretPairScenario) -> bool:
    """Whether the plan provably reaches the full alphabet distance.

    Holds when the first prior's mass at 0 exceeds everything the second prior
    places below the top symbol, which forces coupling mass onto (0, n).
    """
    p_i0 = float(scenario.prior_i.pmf[0])
    p_jn = float(scenario.prior_j.pmf[-1])
    return p_i0 - (1.0 - p_jn) > SUPPORT_THRESHOLD


def worst_case_plan(scenario: SecretPairScenario) -> TransportPlan:
    """Closed-form optimal coupling in the worst case.

    Row 0 absorbs the second prior below the top symbol, column n absorbs the
    first prior above 0, and the corner (0, n) carries the overlap excess.
    Raises ConditionNotMetError when worst_case_condition fails.
    """
    if not worst_case_condition(scenario):
        raise ConditionNotMetError(
            "worst-case plan requires prior_i[0] > 1 - prior_j[n]"
        )
    p_i = scenario.prior_i.pmf
    p_j = scenario.prior_j.pmf
    n = scenario.alphabet_size - 1
    matrix = np.zeros((n + 1, n + 1))
    matrix[0, :n] = p_j[:n]
    matrix[1:, n] = p_i[1:]
    matrix[0, n] = p_i[0] + p_j[n] - 1.0
    return _finalize_plan(matrix, scenario)


def mass_split(plan: TransportPlan, x_prime: int) -> tuple[float, float]:
    """Split one column's marginal into diagonal and off-diagonal mass."""
    n = plan.alphabet_size
    if not 0 <= x_prime < n:
        raise IndexError(f"column index {x_prime} out of range for alphabet {n}")
    diag = float(plan.matrix[x_prime, x_prime])
    offdiag = max(float(plan.col_marginal[x_prime]) - diag, 0.0)
    return diag, offdiag
