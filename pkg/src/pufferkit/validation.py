"""Input validation helpers used by the estimator, the CLI and the core modules."""

from __future__ import annotations

import numpy as np

from .errors import (
    NonPositiveEpsilonError,
    NonPositiveThetaError,
    NonPositiveToleranceError,
)

PMF_TOL = 1e-9


def check_epsilon(epsilon: float) -> float:
    if not epsilon > 0:
        raise NonPositiveEpsilonError(f"epsilon must be > 0, got {epsilon}")
    return float(epsilon)


def check_theta(theta: float) -> float:
    if not theta > 0:
        raise NonPositiveThetaError(f"theta must be > 0, got {theta}")
    return float(theta)


def check_tolerance(nu: float) -> float:
    if not nu > 0:
        raise NonPositiveToleranceError(f"tolerance must be > 0, got {nu}")
    return float(nu)


def as_pmf(values, tol: float = PMF_TOL) -> np.ndarray:
    """Return a validated, read-only probability vector."""
    pmf = np.asarray(values, dtype=float)
    if pmf.ndim != 1 or pmf.size == 0:
        raise ValueError("a pmf must be a non-empty 1-D vector")
    if np.any(pmf < 0):
        raise ValueError("pmf entries must be non-negative")
    total = float(pmf.sum())
    if abs(total - 1.0) > tol:
        raise ValueError(f"pmf must sum to 1 within {tol}, got sum {total!r}")
    pmf = pmf.copy()
    pmf.flags.writeable = False
    return pmf


def as_column(X) -> np.ndarray:
    """Coerce a 1-D array or single-column 2-D array into a 1-D array."""
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a single column, got shape {arr.shape}")
    return arr
