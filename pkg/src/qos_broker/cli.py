"""Command line interface: qos-broker serve | scenario | rank | sweep | report."""

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from qos_broker.broker.coordinator import Broker
from qos_broker.config import ENV_VARS, TRUE_VALUES, BrokerConfig
from qos_broker.errors import BrokerError
from qos_broker.logs import configure_logging
from qos_broker.qos.attributes import AttributeCatalog, QoSVector, default_catalog, load_catalog
from qos_broker.qos.profiles import load_profile
from qos_broker.selection.ranking import rank_offerings
from qos_broker.selection.sweep import beta_grid, sensitivity_sweep, sweep_to_csv
from qos_broker.selection.utility import display_utility
from qos_broker.simulation.scenario import load_scenario, run_scenario

PROG = "qos-broker"


def load_offerings(path: Path, catalog: AttributeCatalog) -> list[tuple[str, QoSVector]]:
    """Read ``{"offerings": [{"provider_id", "qos"}]}`` (or the bare list)."""
    with open(path) as f:
        data = json.load(f)
    entries = data["offerings"] if isinstance(data, dict) else data
    return [(entry["provider_id"], catalog.vector(entry["qos"])) for entry in entries]


def _catalog(args: argparse.Namespace) -> AttributeCatalog:
    return load_catalog(args.catalog) if args.catalog else default_catalog()


def _emit(payload: Any) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_rank(args: argparse.Namespace) -> int:
    catalog = _catalog(args)
    profile = load_profile(args.profile, catalog)
    ranking = rank_offerings(load_offerings(args.offerings, catalog), profile)

    print(f"threshold {display_utility(ranking.threshold)} ({ranking.threshold:.6f})")
    print(f"{'rank':<6}{'provider':<12}{'utility':<9}{'exact':<10}accepted")
    for position, entry in enumerate(ranking.entries, start=1):
        print(
            f"{position:<6}{entry.provider_id:<12}{entry.score.display:<9}"
            f"{entry.utility:<10.6f}{'yes' if entry.accepted else 'no'}"
        )
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    catalog = _catalog(args)
    profile = load_profile(args.profile, catalog)
    grid = beta_grid(args.beta_min, args.beta_max, args.beta_step)
    table = sensitivity_sweep(load_offerings(args.offerings, catalog), profile, grid)
    sys.stdout.write(sweep_to_csv(table))
    return 0


def cmd_scenario_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.file)
    run = run_scenario(scenario, args.data_dir)

    if args.transcript:
        args.transcript.write_text(run.transcript_lines())

    _emit(
        {
            "summary": run.summary,
            "assertions": [result.model_dump(mode="json") for result in run.assertions],
        }
    )
    failed = [r for r in run.assertions if not r.passed]
    if failed:
        print(f"{PROG}: error: {len(failed)} assertion(s) failed", file=sys.stderr)
        return 1
    return 0


def _broker(args: argparse.Namespace) -> Broker:
    return Broker(
        BrokerConfig.from_env(
            data_dir=args.data_dir,
            tiers_path=getattr(args, "tiers", None),
            log_level=args.log_level,
        )
    )


def cmd_report_usage(args: argparse.Namespace) -> int:
    broker = _broker(args)
    _emit(broker.usage_report(args.group, args.start, args.end).model_dump(mode="json"))
    return 0


def cmd_report_compliance(args: argparse.Namespace) -> int:
    broker = _broker(args)
    report = broker.compliance_report(args.contract_id, args.start, args.end)
    _emit(report.model_dump(mode="json"))
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from qos_broker.broker.server import run_server

    config = BrokerConfig.from_env(
        data_dir=args.data_dir,
        host=args.host,
        port=args.port,
        tiers_path=args.tiers,
        max_rounds=args.max_rounds,
        violation_threshold=args.violation_threshold,
        credit_per_violation=args.credit_per_violation,
        log_level=args.log_level,
    )
    run_server(config)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="QoS-driven cloud service broker")
    parser.add_argument("--log-level", default=None, help="Log level (default INFO)")
    parser.add_argument("--log-json", action="store_true", help="Log JSON lines to stderr")
    commands = parser.add_subparsers(dest="command", required=True)

    serve = commands.add_parser("serve", help="Start the broker HTTP API")
    serve.add_argument("--data-dir", type=Path, default=None)
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--tiers", type=Path, default=None, help="Tier table JSON")
    serve.add_argument("--max-rounds", type=int, default=None)
    serve.add_argument("--violation-threshold", type=int, default=None)
    serve.add_argument("--credit-per-violation", type=float, default=None)
    serve.set_defaults(handler=cmd_serve)

    scenario = commands.add_parser("scenario", help="Simulation scenarios")
    scenario_commands = scenario.add_subparsers(dest="scenario_command", required=True)
    scenario_run = scenario_commands.add_parser("run", help="Run a scenario file")
    scenario_run.add_argument("file", type=Path)
    scenario_run.add_argument("--transcript", type=Path, default=None, help="Write JSON lines")
    scenario_run.add_argument("--data-dir", type=Path, default=None)
    scenario_run.set_defaults(handler=cmd_scenario_run)

    for name, handler, help_text in (
        ("rank", cmd_rank, "Rank offerings against a profile"),
        ("sweep", cmd_sweep, "Utility of every offering as a uniform sensitivity varies (CSV)"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("offerings", type=Path)
        sub.add_argument("profile", type=Path)
        sub.add_argument("--catalog", type=Path, default=None)
        sub.set_defaults(handler=handler)
        if name == "sweep":
            sub.add_argument("--beta-min", type=float, default=0.0)
            sub.add_argument("--beta-max", type=float, default=3.0)
            sub.add_argument("--beta-step", type=float, default=0.1)

    report = commands.add_parser("report", help="Usage and compliance reports")
    report_commands = report.add_subparsers(dest="report_command", required=True)

    usage = report_commands.add_parser("usage", help="Usage per service type and provider")
    usage.add_argument("--group", default=None)
    usage.add_argument("--from", dest="start", required=True)
    usage.add_argument("--to", dest="end", required=True)
    usage.add_argument("--data-dir", type=Path, default=None)
    usage.set_defaults(handler=cmd_report_usage)

    compliance = report_commands.add_parser("compliance", help="Compliance of one contract")
    compliance.add_argument("contract_id")
    compliance.add_argument("--from", dest="start", default=None)
    compliance.add_argument("--to", dest="end", default=None)
    compliance.add_argument("--data-dir", type=Path, default=None)
    compliance.set_defaults(handler=cmd_report_compliance)

    return parser


def _one_line(error: Exception) -> str:
    if isinstance(error, ValidationError):
        return "; ".join(
            f"{'.'.join(str(part) for part in e['loc']) or 'input'}: {e['msg']}"
            for e in error.errors()
        )
    if isinstance(error, OSError) and error.filename:
        return f"{error.strerror or error}: {error.filename}"
    return " ".join(str(error).split())


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit status."""
    args = build_parser().parse_args(argv)
    default_level = "INFO" if args.command == "serve" else "WARNING"
    level = args.log_level or os.environ.get(ENV_VARS["log_level"]) or default_level
    json_output = args.log_json or os.environ.get(ENV_VARS["log_json"], "").lower() in TRUE_VALUES
    configure_logging(level, json_output=json_output)

    try:
        return int(args.handler(args))
    except (BrokerError, OSError, json.JSONDecodeError, ValidationError, KeyError) as e:
        print(f"{PROG}: error: {_one_line(e)}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
