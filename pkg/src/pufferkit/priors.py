"""Adversary prior models for pufferfish privacy instances.

A pufferfish instance bundles, for each adversary belief, a pair of secrets
together with the two conditional distributions of the public attribute given
each secret. The public attribute lives on the integer alphabet {0, ..., n}.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import EmptySupportError, IngestionError
from .validation import as_pmf

__all__ = [
    "ConditionalPrior",
    "SecretPairScenario",
    "PufferfishInstance",
    "IngestionRecord",
    "prior_from_counts",
    "encode_values",
    "apply_encoding",
    "ingest_csv",
    "ingest_csv_record",
    "load_instance",
    "dump_instance",
]


@dataclass(frozen=True)
class ConditionalPrior:
    """Distribution of the public attribute conditioned on one secret value."""

    pmf: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pmf", as_pmf(self.pmf))

    @property
    def alphabet_size(self) -> int:
        return int(self.pmf.shape[0])

    def cmf(self) -> np.ndarray:
        return np.cumsum(self.pmf)


@dataclass(frozen=True)
class SecretPairScenario:
    """One adversary belief with a protected secret pair and its two priors."""

    rho_id: str
    s_i_label: str
    s_j_label: str
    prior_i: ConditionalPrior
    prior_j: ConditionalPrior

    def __post_init__(self):
        if self.s_i_label == self.s_j_label:
            raise ValueError("secret pair labels must differ")
        if self.prior_i.alphabet_size != self.prior_j.alphabet_size:
            raise ValueError(
                "priors must share one alphabet: "
                f"{self.prior_i.alphabet_size} != {self.prior_j.alphabet_size}"
            )

    @property
    def alphabet_size(self) -> int:
        return self.prior_i.alphabet_size

    def swapped(self) -> "SecretPairScenario":
        """The same pair viewed in the opposite direction (secrets exchanged)."""
        return SecretPairScenario(
            rho_id=self.rho_id,
            s_i_label=self.s_j_label,
            s_j_label=self.s_i_label,
            prior_i=self.prior_j,
            prior_j=self.prior_i,
        )


@dataclass(frozen=True)
class PufferfishInstance:
    """A set of scenarios sharing one alphabet; the privacy budget is supplied per call."""

    scenarios: tuple[SecretPairScenario, ...]

    def __post_init__(self):
        scenarios = tuple(self.scenarios)
        if not scenarios:
            raise ValueError("an instance needs at least one scenario")
        sizes = {s.alphabet_size for s in scenarios}
        if len(sizes) != 1:
            raise ValueError(f"scenarios must share one alphabet size, got {sorted(sizes)}")
        object.__setattr__(self, "scenarios", scenarios)

    @property
    def alphabet_size(self) -> int:
        return self.scenarios[0].alphabet_size


def prior_from_counts(counts: Sequence[int]) -> ConditionalPrior:
    """Normalize non-negative counts into a ConditionalPrior.

    Raises EmptySupportError when every count is zero.
    """
    arr = np.asarray(counts, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("counts must be a non-empty 1-D sequence")
    if np.any(arr < 0):
        raise ValueError("counts must be non-negative")
    total = arr.sum()
    if total <= 0:
        raise EmptySupportError("cannot normalize all-zero counts")
    return ConditionalPrior(pmf=arr / total)


def encode_values(
    values: Sequence,
    encoding: Mapping[str, int] | Sequence | None = None,
    bins: int | None = None,
) -> tuple[np.ndarray, dict]:
    """Map raw public-attribute values onto {0, ..., n}.

    Three modes, in priority order:
      * ``encoding`` given: an explicit category -> integer map (or an ordered
        sequence of categories). Values are matched by string form.
      * ``bins`` given: values are parsed as floats and placed into uniform-width
        bins over [min, max]; the maximum lands in the last bin.
      * neither: observed categories sorted (numerically when every value parses
        as a number, lexicographically otherwise).

    Returns the integer codes and the encoding actually used, so callers can
    report it and reproduce the run.
    """
    raw = [str(v) for v in values]
    if encoding is not None and bins is not None:
        raise ValueError("supply either an encoding or a bin count, not both")

    if bins is not None:
        if bins < 1:
            raise ValueError("bins must be >= 1")
        try:
            numeric = np.asarray([float(v) for v in raw], dtype=float)
        except ValueError as exc:
            raise IngestionError(f"bins requested but a value is not numeric: {exc}") from exc
        lo, hi = float(numeric.min()), float(numeric.max())
        if hi == lo:
            codes = np.zeros(len(raw), dtype=int)
        else:
            codes = np.minimum((bins * (numeric - lo) / (hi - lo)).astype(int), bins - 1)
        used = {"mode": "bins", "bins": int(bins), "min": lo, "max": hi}
        return codes, used

    if encoding is not None:
        if isinstance(encoding, Mapping):
            table = {str(k): int(v) for k, v in encoding.items()}
        else:
            table = {str(k): i for i, k in enumerate(encoding)}
        missing = sorted({v for v in raw if v not in table})
        if missing:
            raise IngestionError(f"values with no encoding entry: {missing}")
    else:
        observed = sorted(set(raw))
        try:
            observed.sort(key=float)
        except ValueError:
            pass  # non-numeric categories stay in lexicographic order
        table = {v: i for i, v in enumerate(observed)}
    codes = np.asarray([table[v] for v in raw], dtype=int)
    return codes, {"mode": "categories", "table": table}


def apply_encoding(values: Sequence, used: Mapping) -> np.ndarray:
    """Encode new values with an encoding previously returned by encode_values.

    Bin edges learned before are reused (values outside the range clip into
    the edge bins); unknown categories raise IngestionError.
    """
    raw = [str(v) for v in values]
    if used["mode"] == "bins":
        numeric = np.asarray([float(v) for v in raw], dtype=float)
        lo, hi, bins = used["min"], used["max"], used["bins"]
        if hi == lo:
            return np.zeros(len(raw), dtype=int)
        codes = (bins * (numeric - lo) / (hi - lo)).astype(int)
        return np.clip(codes, 0, bins - 1)
    table = used["table"]
    missing = sorted({v for v in raw if v not in table})
    if missing:
        raise IngestionError(f"values with no encoding entry: {missing}")
    return np.asarray([table[v] for v in raw], dtype=int)


@dataclass(frozen=True)
class IngestionRecord:
    """A scenario built from a CSV file plus everything needed to reproduce it."""

    scenario: SecretPairScenario
    encoding: dict
    rows_used: dict = field(default_factory=dict)
    rows_dropped: int = 0


def ingest_csv_record(
    path: str | Path,
    sensitive_col: str,
    public_col: str,
    secret_pair: tuple[str, str],
    encoding: Mapping[str, int] | Sequence | None = None,
    bins: int | None = None,
    rho_id: str = "empirical",
    delimiter: str = ",",
    column_names: Sequence[str] | None = None,
) -> IngestionRecord:
    """Build a SecretPairScenario from row counts in a CSV file.

    Rows with an empty cell in either column are dropped and counted. The two
    priors are the per-secret normalized counts of the encoded public column.
    ``column_names`` assigns headers to a header-less file.
    """
    s_i, s_j = str(secret_pair[0]), str(secret_pair[1])
    with open(path, newline="", encoding="utf-8") as fh:
        if column_names is None:
            reader = csv.DictReader(fh, delimiter=delimiter, skipinitialspace=True)
        else:
            reader = csv.DictReader(
                fh, fieldnames=list(column_names), delimiter=delimiter, skipinitialspace=True
            )
        if reader.fieldnames is None:
            raise IngestionError(f"{path}: file is empty")
        # tolerate stray whitespace around header names
        by_stripped = {f.strip(): f for f in reader.fieldnames}
        for col in (sensitive_col, public_col):
            if col not in by_stripped:
                raise IngestionError(
                    f"{path}: missing column {col!r} (have {sorted(by_stripped)})"
                )
        s_key = by_stripped[sensitive_col]
        p_key = by_stripped[public_col]
        rows = []
        dropped = 0
        for row in reader:
            sval = (row.get(s_key) or "").strip()
            pval = (row.get(p_key) or "").strip()
            if not sval or not pval:
                dropped += 1
                continue
            rows.append((sval, pval))

    public_values = [p for _, p in rows]
    if not public_values:
        raise IngestionError(f"{path}: no usable rows")
    codes, used_encoding = encode_values(public_values, encoding=encoding, bins=bins)
    if used_encoding["mode"] == "bins":
        n_levels = used_encoding["bins"]
    else:
        n_levels = max(used_encoding["table"].values()) + 1

    counts = {s_i: np.zeros(n_levels, dtype=int), s_j: np.zeros(n_levels, dtype=int)}
    for (sval, _), code in zip(rows, codes):
        if sval in counts:
            counts[sval][code] += 1
    for label, cnt in counts.items():
        if cnt.sum() == 0:
            raise IngestionError(f"{path}: secret value {label!r} never appears in {sensitive_col!r}")

    scenario = SecretPairScenario(
        rho_id=rho_id,
        s_i_label=s_i,
        s_j_label=s_j,
        prior_i=prior_from_counts(counts[s_i]),
        prior_j=prior_from_counts(counts[s_j]),
    )
    rows_used = {s_i: int(counts[s_i].sum()), s_j: int(counts[s_j].sum())}
    return IngestionRecord(
        scenario=scenario, encoding=used_encoding, rows_used=rows_used, rows_dropped=dropped
    )


def ingest_csv(
    path: str | Path,
    sensitive_col: str,
    public_col: str,
    secret_pair: tuple[str, str],
    encoding: Mapping[str, int] | Sequence | None = None,
    bins: int | None = None,
    rho_id: str = "empirical",
) -> SecretPairScenario:
    """Like ingest_csv_record but returning only the scenario."""
    return ingest_csv_record(
        path, sensitive_col, public_col, secret_pair,
        encoding=encoding, bins=bins, rho_id=rho_id,
    ).scenario


def load_instance(path: str | Path) -> PufferfishInstance:
    """Read an instance from its JSON file format.

    The document is ``{"scenarios": [{"rho", "s_i", "s_j", "p_i", "p_j"}, ...]}``
    with plain decimal pmf arrays.
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    scenarios = [
        SecretPairScenario(
            rho_id=str(entry["rho"]),
            s_i_label=str(entry["s_i"]),
            s_j_label=str(entry["s_j"]),
            prior_i=ConditionalPrior(pmf=entry["p_i"]),
            prior_j=ConditionalPrior(pmf=entry["p_j"]),
        )
        for entry in doc["scenarios"]
    ]
    return PufferfishInstance(scenarios=tuple(scenarios))


def dump_instance(instance: PufferfishInstance, path: str | Path) -> None:
    """Write an instance in the JSON file format accepted by load_instance."""
    doc = {
        "scenarios": [
            {
                "rho": s.rho_id,
                "s_i": s.s_i_label,
                "s_j": s.s_j_label,
                "p_i": s.prior_i.pmf.tolist(),
                "p_j": s.prior_j.pmf.tolist(),
            }
            for s in instance.scenarios
        ]
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
