"""Command line interface.

Subcommands: calibrate, audit, profile, privatize, experiment. Machine-readable
JSON goes to stdout; human-oriented one-liners go to stderr. Exit codes: 0 on
success, 2 when an audit fails, 3 when ingestion fails.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .audit import relaxation_profile, verify_pufferfish
from .calibration import DEFAULT_NU, theta_l1, theta_relaxed, theta_w1
from .errors import AuditFailureError, IngestionError
from .experiments import builtin_config, emit_outputs, load_config, run_experiment
from .priors import load_instance
from .release import privatize
from .transport import kantorovich_plan

EXIT_OK = 0
EXIT_AUDIT_FAIL = 2
EXIT_INGESTION_FAIL = 3


def _cmd_calibrate(args) -> int:
    instance = load_instance(args.instance)
    out: dict = {"epsilon": args.epsilon, "mechanism": args.mechanism}
    if args.mechanism in ("l1", "all"):
        out["theta_l1"] = theta_l1(instance, args.epsilon)
    if args.mechanism in ("w1", "all"):
        out["theta_w1"] = theta_w1(instance, args.epsilon)
    if args.mechanism in ("relaxed", "all"):
        result = theta_relaxed(instance, args.epsilon, args.nu)
        out.update(result.to_dict())
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    cells = "  ".join(
        f"{key}={out[key]:.4f}"
        for key in ("theta_l1", "theta_w1", "theta_relaxed", "delta")
        if key in out
    )
    print(f"epsilon={args.epsilon:g}  {cells}", file=sys.stderr)
    return EXIT_OK


def _cmd_audit(args) -> int:
    instance = load_instance(args.instance)
    report = verify_pufferfish(instance, args.theta, args.epsilon)
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    verdict = "PASS" if report.overall_pass else "FAIL"
    print(
        f"audit {verdict}: theta={args.theta:g} epsilon={args.epsilon:g} "
        f"max_log_ratio={max(s.max_log_ratio for s in report.per_scenario):.6g}",
        file=sys.stderr,
    )
    return EXIT_OK if report.overall_pass else EXIT_AUDIT_FAIL


def _cmd_profile(args) -> int:
    instance = load_instance(args.instance)
    if not 0 <= args.scenario < len(instance.scenarios):
        raise SystemExit(f"scenario index {args.scenario} out of range")
    scenario = instance.scenarios[args.scenario]
    plan = kantorovich_plan(scenario)
    profile = relaxation_profile(plan, args.theta, args.epsilon)
    profile.dump_csv(args.out)
    print(f"wrote profile for rho={scenario.rho_id!r} to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_privatize(args) -> int:
    with open(args.csv, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or args.column not in reader.fieldnames:
            raise IngestionError(
                f"{args.csv}: missing column {args.column!r} (have {reader.fieldnames})"
            )
        rows = list(reader)
        fieldnames = list(reader.fieldnames)
    try:
        values = [float(row[args.column]) for row in rows]
    except ValueError as exc:
        raise IngestionError(
            f"{args.csv}: column {args.column!r} must be numeric: {exc}"
        ) from exc
    record = privatize(values, args.theta, args.seed)
    for row, released in zip(rows, record.released):
        row[args.column] = repr(float(released))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)
    print(
        f"released {len(rows)} rows: theta={args.theta:g} seed={args.seed} "
        f"empirical_mse={record.empirical_mse:.6g} theoretical_mse={record.theoretical_mse:.6g}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.builtin:
        config = builtin_config(args.builtin, data_dir=args.data_dir)
    else:
        config = load_config(args.config)
    table = run_experiment(config)
    for fmt in ("csv", "json", "plotdata"):
        emit_outputs(table, fmt, args.out_dir)
    print(table.format_text(), file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pufferkit",
        description="Laplace noise calibration and auditing for pufferfish privacy",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="compute noise scales for an instance file")
    p.add_argument("--instance", required=True, help="instance JSON file")
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--mechanism", choices=["l1", "w1", "relaxed", "all"], default="all")
    p.add_argument("--nu", type=float, default=DEFAULT_NU)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("audit", help="exactly verify a scale against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("profile", help="export per-pair averaged terms at one scale")
    p.add_argument("--instance", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--scenario", type=int, default=0, help="scenario index (default 0)")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("privatize", help="release a numeric CSV column with noise")
    p.add_argument("--csv", required=True)
    p.add_argument("--column", required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_privatize)

    p = sub.add_parser("experiment", help="run a full budget-grid experiment")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="experiment config JSON")
    group.add_argument(
        "--builtin", choices=["table1", "table2", "student", "census", "bank"]
    )
    p.add_argument("--out-dir", required=True)
    p.add_argument("--data-dir", default=None, help="directory holding dataset files")
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AuditFailureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AUDIT_FAIL
    except (IngestionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INGESTION_FAIL


if __name__ == "__main__":
    sys.exit(main())
