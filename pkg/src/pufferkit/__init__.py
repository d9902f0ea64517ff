"""Laplace noise calibration, auditing and release for pufferfish privacy.

The public attribute lives on a discrete alphabet {0, ..., n}; adversary
beliefs are conditional priors of that attribute given each secret. Three
noise calibrations are provided (raw alphabet distance, optimal-transport
support distance, and a relaxed per-column averaging mechanism), together
with an exact audit of the resulting privacy guarantee, reproducible noised
releases, and an experiment runner.
"""

from .audit import (
    AuditReport,
    RelaxationProfile,
    ScenarioAudit,
    output_log_density,
    relaxation_profile,
    verify_pufferfish,
    verify_relaxed_condition,
)
from .calibration import (
    CalibrationResult,
    ColumnRoot,
    ScenarioCalibration,
    bracket,
    brent_root,
    closed_form_n1,
    f_column,
    noise_reduction_bounds,
    theta_l1,
    theta_relaxed,
    theta_w1,
)
from .errors import (
    AllDegenerateError,
    AuditFailureError,
    ConditionNotMetError,
    DegenerateColumnError,
    EmptySupportError,
    IngestionError,
    NonPositiveEpsilonError,
    NonPositiveThetaError,
    NonPositiveToleranceError,
    NotOrderOneError,
    PufferkitError,
)
from .estimator import PufferfishLaplaceMechanism
from .experiments import (
    DatasetSpec,
    ExperimentConfig,
    ResultTable,
    builtin_config,
    emit_outputs,
    load_config,
    run_experiment,
)
from .priors import (
    ConditionalPrior,
    IngestionRecord,
    PufferfishInstance,
    SecretPairScenario,
    apply_encoding,
    dump_instance,
    encode_values,
    ingest_csv,
    ingest_csv_record,
    load_instance,
    prior_from_counts,
)
from .release import ReleaseRecord, privatize, sample_laplace, splitmix64_stream
from .transport import (
    TransportPlan,
    kantorovich_plan,
    mass_split,
    worst_case_condition,
    worst_case_plan,
)

__version__ = "0.1.0"

__all__ = [
    "AllDegenerateError",
    "AuditFailureError",
    "AuditReport",
    "CalibrationResult",
    "ColumnRoot",
    "ConditionNotMetError",
    "ConditionalPrior",
    "DatasetSpec",
    "DegenerateColumnError",
    "EmptySupportError",
    "ExperimentConfig",
    "IngestionError",
    "IngestionRecord",
    "NonPositiveEpsilonError",
    "NonPositiveThetaError",
    "NonPositiveToleranceError",
    "NotOrderOneError",
    "PufferfishInstance",
    "PufferfishLaplaceMechanism",
    "PufferkitError",
    "RelaxationProfile",
    "ReleaseRecord",
    "ResultTable",
    "ScenarioAudit",
    "ScenarioCalibration",
    "SecretPairScenario",
    "TransportPlan",
    "apply_encoding",
    "bracket",
    "brent_root",
    "builtin_config",
    "closed_form_n1",
    "dump_instance",
    "emit_outputs",
    "encode_values",
    "f_column",
    "ingest_csv",
    "ingest_csv_record",
    "kantorovich_plan",
    "load_config",
    "load_instance",
    "mass_split",
    "noise_reduction_bounds",
    "output_log_density",
    "privatize",
    "prior_from_counts",
    "relaxation_profile",
    "run_experiment",
    "sample_laplace",
    "splitmix64_stream",
    "theta_l1",
    "theta_relaxed",
    "theta_w1",
    "verify_pufferfish",
    "verify_relaxed_condition",
    "worst_case_condition",
    "worst_case_plan",
]
