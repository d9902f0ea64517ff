"""End-to-end experiment runner: calibrate over a budget grid, audit, emit tables.

Configs come from inline priors or from CSV ingestion specs. Every relaxed
scale is audited before anything is written; an audit failure aborts the run.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .audit import verify_pufferfish
from .calibration import DEFAULT_NU, theta_l1, theta_relaxed, theta_w1
from .errors import AuditFailureError, IngestionError, PufferkitError
from .priors import (
    ConditionalPrior,
    IngestionRecord,
    PufferfishInstance,
    SecretPairScenario,
    ingest_csv_record,
)

__all__ = [
    "MECHANISMS",
    "DEFAULT_EPSILON_GRID",
    "DatasetSpec",
    "ExperimentConfig",
    "ResultTable",
    "run_experiment",
    "emit_outputs",
    "builtin_config",
    "load_config",
]

MECHANISMS = ("l1", "w1", "relaxed")
DEFAULT_EPSILON_GRID = tuple(round(0.1 * k, 10) for k in range(1, 11))

RESULT_HEADER = (
    "epsilon",
    "theta_l1",
    "theta_w1",
    "theta_relaxed",
    "delta",
    "reduction_vs_w1_pct",
    "reduction_vs_l1_pct",
)


@dataclass(frozen=True)
class DatasetSpec:
    """Pinned ingestion recipe for one CSV-backed scenario."""

    path: str
    sensitive_col: str
    public_col: str
    secret_pair: tuple[str, str]
    encoding: dict | list | None = None
    bins: int | None = None
    rho_id: str = "empirical"
    delimiter: str = ","
    column_names: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """One named experiment: an instance source, a budget grid and mechanisms."""

    name: str
    epsilon_grid: tuple[float, ...] = DEFAULT_EPSILON_GRID
    mechanisms: tuple[str, ...] = MECHANISMS
    nu: float = DEFAULT_NU
    instance: PufferfishInstance | None = None
    datasets: tuple[DatasetSpec, ...] = ()

    def __post_init__(self):
        grid = tuple(float(e) for e in self.epsilon_grid)
        if not grid or any(e <= 0 for e in grid) or any(
            grid[k] >= grid[k + 1] for k in range(len(grid) - 1)
        ):
            raise ValueError("epsilon_grid must be non-empty, positive and strictly increasing")
        unknown = set(self.mechanisms) - set(MECHANISMS)
        if unknown:
            raise ValueError(f"unknown mechanisms: {sorted(unknown)}")
        if not self.mechanisms:
            raise ValueError("at least one mechanism is required")
        if self.instance is None and not self.datasets:
            raise ValueError("config needs inline scenarios or dataset specs")
        object.__setattr__(self, "epsilon_grid", grid)
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))


@dataclass(frozen=True)
class ResultTable:
    """Scale per (mechanism, epsilon) plus relative reductions in percent."""

    name: str
    epsilon_grid: tuple[float, ...]
    mechanisms: tuple[str, ...]
    theta: dict[str, tuple[float, ...]]
    reduction_vs_w1_pct: tuple[float, ...] | None
    reduction_vs_l1_pct: tuple[float, ...] | None
    ingestion: tuple[dict, ...] = ()

    def delta(self) -> tuple[float, ...] | None:
        if "w1" not in self.theta or "relaxed" not in self.theta:
            return None
        return tuple(
            w - r for w, r in zip(self.theta["w1"], self.theta["relaxed"])
        )

    def row(self, k: int) -> dict:
        out: dict = {"epsilon": self.epsilon_grid[k]}
        for mech in MECHANISMS:
            out[f"theta_{mech}"] = self.theta[mech][k] if mech in self.theta else None
        d = self.delta()
        out["delta"] = d[k] if d is not None else None
        out["reduction_vs_w1_pct"] = (
            self.reduction_vs_w1_pct[k] if self.reduction_vs_w1_pct else None
        )
        out["reduction_vs_l1_pct"] = (
            self.reduction_vs_l1_pct[k] if self.reduction_vs_l1_pct else None
        )
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "epsilon_grid": list(self.epsilon_grid),
            "mechanisms": list(self.mechanisms),
            "rows": [self.row(k) for k in range(len(self.epsilon_grid))],
            "ingestion": list(self.ingestion),
        }

    def format_text(self) -> str:
        """Fixed two-decimal table, one row per mechanism."""
        lines = [
            self.name
            + "  (epsilon: "
            + ", ".join(f"{e:g}" for e in self.epsilon_grid)
            + ")"
        ]
        for mech in self.mechanisms:
            cells = "  ".join(f"{v:6.2f}" for v in self.theta[mech])
            lines.append(f"  {mech:>7}: {cells}")
        return "\n".join(lines)


def _build_instance(config: ExperimentConfig) -> tuple[PufferfishInstance, tuple[dict, ...]]:
    if config.instance is not None:
        return config.instance, ()
    records: list[IngestionRecord] = []
    for spec in config.datasets:
        records.append(
            ingest_csv_record(
                spec.path,
                spec.sensitive_col,
                spec.public_col,
                spec.secret_pair,
                encoding=spec.encoding,
                bins=spec.bins,
                rho_id=spec.rho_id,
                delimiter=spec.delimiter,
                column_names=spec.column_names,
            )
        )
    instance = PufferfishInstance(tuple(r.scenario for r in records))
    reports = tuple(
        {
            "rho": r.scenario.rho_id,
            "encoding": r.encoding,
            "rows_used": r.rows_used,
            "rows_dropped": r.rows_dropped,
        }
        for r in records
    )
    return instance, reports


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Calibrate every requested mechanism on the grid, auditing relaxed scales.

    Raises AuditFailureError if any relaxed scale fails the exact audit, and
    propagates ingestion and calibration errors with the config name attached.
    """
    try:
        instance, ingestion = _build_instance(config)
    except (IngestionError, OSError) as exc:
        raise IngestionError(f"{config.name}: {exc}") from exc

    theta: dict[str, list[float]] = {m: [] for m in config.mechanisms}
    for eps in config.epsilon_grid:
        try:
            if "l1" in theta:
                theta["l1"].append(theta_l1(instance, eps))
            if "w1" in theta:
                theta["w1"].append(theta_w1(instance, eps))
            if "relaxed" in theta:
                result = theta_relaxed(instance, eps, config.nu)
                if result.theta_relaxed > 0:
                    report = verify_pufferfish(instance, result.theta_relaxed, eps)
                    if not report.overall_pass:
                        worst = max(report.per_scenario, key=lambda s: s.max_log_ratio)
                        raise AuditFailureError(
                            f"{config.name}: relaxed scale {result.theta_relaxed!r} at "
                            f"epsilon={eps} fails the audit "
                            f"(max log-ratio {worst.max_log_ratio!r} for rho={worst.rho_id})"
                        )
                theta["relaxed"].append(result.theta_relaxed)
        except AuditFailureError:
            raise
        except PufferkitError as exc:
            raise type(exc)(f"{config.name}: epsilon={eps}: {exc}") from exc

    def reductions(baseline: str) -> tuple[float, ...] | None:
        if baseline not in theta or "relaxed" not in theta:
            return None
        out = []
        for base, rel in zip(theta[baseline], theta["relaxed"]):
            out.append(100.0 * (base - rel) / base if base > 0 else 0.0)
        return tuple(out)

    return ResultTable(
        name=config.name,
        epsilon_grid=config.epsilon_grid,
        mechanisms=config.mechanisms,
        theta={m: tuple(v) for m, v in theta.items()},
        reduction_vs_w1_pct=reductions("w1"),
        reduction_vs_l1_pct=reductions("l1"),
        ingestion=ingestion,
    )


def emit_outputs(table: ResultTable, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write the table as csv, json or plotdata files; returns the paths."""
    if fmt not in ("csv", "json", "plotdata"):
        raise ValueError(f"unknown format {fmt!r}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out_dir / f"{table.name}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(table.to_dict(), fh, indent=2)
            fh.write("\n")
        return [path]
    suffix = "plot.csv" if fmt == "plotdata" else "csv"
    path = out_dir / f"{table.name}.{suffix}"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_HEADER)
        for k in range(len(table.epsilon_grid)):
            row = table.row(k)
            writer.writerow(
                ["" if row[col] is None else repr(row[col]) for col in RESULT_HEADER]
            )
    return [path]


def _inline_config(name: str, p_i, p_j, s_i: str, s_j: str) -> ExperimentConfig:
    scenario = SecretPairScenario(
        rho_id=name,
        s_i_label=s_i,
        s_j_label=s_j,
        prior_i=ConditionalPrior(p_i),
        prior_j=ConditionalPrior(p_j),
    )
    return ExperimentConfig(name=name, instance=PufferfishInstance((scenario,)))


_CENSUS_COLUMNS = (
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
)


def builtin_config(name: str, data_dir: str | Path | None = None) -> ExperimentConfig:
    """Named experiment presets.

    ``table1`` and ``table2`` are the two constructed prior pairs. ``student``,
    ``census`` and ``bank`` are pinned ingestion recipes for the corresponding
    UCI files, which the caller supplies under ``data_dir`` (they are never
    downloaded): student-por.csv, adult.data and bank-full.csv.
    """
    if name == "table1":
        return _inline_config("table1", [0.52, 0.48], [0.5, 0.5], "s_i", "s_j")
    if name == "table2":
        return _inline_config(
            "table2",
            [0.50001, 0.0, 0.00001, 0.49998],
            [0.49996, 0.00001, 0.0, 0.50003],
            "s_i",
            "s_j",
        )
    data_dir = Path(data_dir) if data_dir is not None else Path(".")
    if name == "student":
        spec = DatasetSpec(
            path=str(data_dir / "student-por.csv"),
            sensitive_col="higher",
            public_col="romantic",
            secret_pair=("yes", "no"),
            encoding={"no": 0, "yes": 1},
            rho_id="student",
            delimiter=";",
        )
    elif name == "census":
        spec = DatasetSpec(
            path=str(data_dir / "adult.data"),
            sensitive_col="marital-status",
            public_col="workclass",
            secret_pair=("Married-civ-spouse", "Never-married"),
            rho_id="census",
            column_names=_CENSUS_COLUMNS,
        )
    elif name == "bank":
        spec = DatasetSpec(
            path=str(data_dir / "bank-full.csv"),
            sensitive_col="loan",
            public_col="marital",
            secret_pair=("no", "yes"),
            rho_id="bank",
            delimiter=";",
        )
    else:
        raise ValueError(f"unknown builtin experiment {name!r}")
    return ExperimentConfig(name=name, datasets=(spec,))


def load_config(path: str | Path) -> ExperimentConfig:
    """Read an experiment config from JSON.

    The document carries ``name``, optional ``epsilon_grid``, ``mechanisms``
    and ``nu``, and either inline ``scenarios`` (same shape as an instance
    file) or ``datasets`` (ingestion specs with ``path``, ``sensitive_col``,
    ``public_col``, ``secret_pair`` and optional ``encoding``, ``bins``,
    ``rho``, ``delimiter``, ``column_names``).
    """
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    instance = None
    if "scenarios" in doc:
        instance = PufferfishInstance(
            tuple(
                SecretPairScenario(
                    rho_id=str(s["rho"]),
                    s_i_label=str(s["s_i"]),
                    s_j_label=str(s["s_j"]),
                    prior_i=ConditionalPrior(s["p_i"]),
                    prior_j=ConditionalPrior(s["p_j"]),
                )
                for s in doc["scenarios"]
            )
        )
    datasets = tuple(
        DatasetSpec(
            path=str(d["path"]),
            sensitive_col=str(d["sensitive_col"]),
            public_col=str(d["public_col"]),
            secret_pair=(str(d["secret_pair"][0]), str(d["secret_pair"][1])),
            encoding=d.get("encoding"),
            bins=d.get("bins"),
            rho_id=str(d.get("rho", "empirical")),
            delimiter=str(d.get("delimiter", ",")),
            column_names=tuple(d["column_names"]) if d.get("column_names") else None,
        )
        for d in doc.get("datasets", ())
    )
    return ExperimentConfig(
        name=str(doc["name"]),
        epsilon_grid=tuple(doc.get("epsilon_grid", DEFAULT_EPSILON_GRID)),
        mechanisms=tuple(doc.get("mechanisms", MECHANISMS)),
        nu=float(doc.get("nu", DEFAULT_NU)),
        instance=instance,
        datasets=datasets,
    )
