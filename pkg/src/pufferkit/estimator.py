"""Scikit-learn style transformer wrapping the full privatization pipeline.

Fitting learns empirical priors of the public column conditioned on every
secret value, calibrates a Laplace scale protecting all secret pairs, and
audits it. Transforming encodes new public values and releases them with
additive noise. The transformer composes with pipelines and grid search
through the usual get_params/set_params machinery.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .audit import AuditReport, verify_pufferfish
from .calibration import DEFAULT_NU, theta_l1, theta_relaxed, theta_w1
from .errors import AuditFailureError
from .priors import (
    ConditionalPrior,
    PufferfishInstance,
    SecretPairScenario,
    apply_encoding,
    encode_values,
    prior_from_counts,
)
from .release import sample_laplace
from .validation import as_column, check_epsilon

__all__ = ["PufferfishLaplaceMechanism"]


class PufferfishLaplaceMechanism(BaseEstimator, TransformerMixin):
    """Release a public column under pufferfish privacy for its secret pairs.

    Parameters
    ----------
    epsilon : float
        Privacy budget in nats.
    mechanism : {"relaxed", "w1", "l1"}
        Noise calibration: the relaxed per-column averaging mechanism, the
        optimal-transport support bound, or the raw alphabet-distance bound.
    nu : float
        Root-finding tolerance for the relaxed mechanism.
    random_state : int
        Seed of the deterministic noise stream used by transform.
    encoding : dict or sequence, optional
        Explicit category order for the public column; by default observed
        values are sorted (numerically when possible).
    bins : int, optional
        Discretize a numeric public column into this many uniform bins.
    audit : bool
        Exactly verify the calibrated scale during fit (on by default).
    """

    def __init__(
        self,
        epsilon: float = 1.0,
        mechanism: str = "relaxed",
        nu: float = DEFAULT_NU,
        random_state: int = 0,
        encoding=None,
        bins: int | None = None,
        audit: bool = True,
    ):
        self.epsilon = epsilon
        self.mechanism = mechanism
        self.nu = nu
        self.random_state = random_state
        self.encoding = encoding
        self.bins = bins
        self.audit = audit

    def fit(self, X, y):
        """Learn priors from (public values X, secret labels y) and calibrate."""
        check_epsilon(self.epsilon)
        if self.mechanism not in ("relaxed", "w1", "l1"):
            raise ValueError(f"unknown mechanism {self.mechanism!r}")
        public = as_column(X)
        secrets = as_column(y)
        if public.shape[0] != secrets.shape[0]:
            raise ValueError(
                f"X and y disagree on sample count: {public.shape[0]} != {secrets.shape[0]}"
            )
        if public.shape[0] == 0:
            raise ValueError("cannot fit on an empty column")

        codes, used = encode_values(public, encoding=self.encoding, bins=self.bins)
        if used["mode"] == "bins":
            n_levels = used["bins"]
        else:
            n_levels = max(used["table"].values()) + 1

        labels = sorted({str(s) for s in secrets})
        if len(labels) < 2:
            raise ValueError("need at least two distinct secret values to protect")
        counts = {label: np.zeros(n_levels, dtype=int) for label in labels}
        for s, code in zip(secrets, codes):
            counts[str(s)][code] += 1
        priors = {label: prior_from_counts(c) for label, c in counts.items()}

        scenarios = tuple(
            SecretPairScenario(
                rho_id="empirical",
                s_i_label=a,
                s_j_label=b,
                prior_i=priors[a],
                prior_j=priors[b],
            )
            for k, a in enumerate(labels)
            for b in labels[k + 1 :]
        )
        instance = PufferfishInstance(scenarios)

        calibration = None
        if self.mechanism == "relaxed":
            calibration = theta_relaxed(instance, self.epsilon, self.nu)
            theta = calibration.theta_relaxed
        elif self.mechanism == "w1":
            theta = theta_w1(instance, self.epsilon)
        else:
            theta = theta_l1(instance, self.epsilon)

        if self.audit and theta > 0:
            report = verify_pufferfish(instance, theta, self.epsilon)
            if not report.overall_pass:
                raise AuditFailureError(
                    f"calibrated scale {theta!r} fails the exact audit"
                )

        self.encoding_ = used
        self.secret_values_ = tuple(labels)
        self.priors_ = priors
        self.instance_ = instance
        self.calibration_ = calibration
        self.theta_ = float(theta)
        self.n_features_in_ = 1
        return self

    def _check_fitted(self):
        if not hasattr(self, "theta_"):
            raise NotFittedError(
                "this PufferfishLaplaceMechanism instance is not fitted yet"
            )

    def transform(self, X):
        """Encode public values and release them with additive Laplace noise.

        Deterministic for a given random_state; returns a (n, 1) float array.
        """
        self._check_fitted()
        public = as_column(X)
        codes = apply_encoding(public, self.encoding_)
        if self.theta_ > 0:
            noise = sample_laplace(self.theta_, self.random_state, codes.shape[0])
        else:
            noise = np.zeros(codes.shape[0])
        return (codes.astype(float) + noise).reshape(-1, 1)

    def privacy_report(self) -> AuditReport:
        """Exact audit of the fitted scale against the fitted instance."""
        self._check_fitted()
        return verify_pufferfish(self.instance_, self.theta_, self.epsilon)
