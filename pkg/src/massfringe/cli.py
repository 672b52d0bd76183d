"""Command-line front end.

``massfringe run <scenario.yaml>`` executes an experiment and writes its
CSV/JSON outputs.  With ``--server URL`` the scenario is posted to a
running service instead and the returned result is written locally, so
the CLI stays a thin client of the same runners the service exposes.
Exit status: 0 success, 1 validation error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from .errors import ScenarioError, SimulationError
from .experiments import run_scenario, write_outputs
from .scenario import load_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="massfringe",
        description="Matter-wave interferometry simulator for composite "
                    "particles with internal mass spectra")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file")
    run.add_argument("scenario", help="path to the scenario YAML file")
    run.add_argument("--output-dir", default=".",
                     help="directory for the output files (default: .)")
    run.add_argument("--override", action="append", default=[],
                     metavar="KEY=VALUE",
                     help="dotted-path scenario override, e.g. "
                          "worldline.accel=1e-5 (repeatable)")
    run.add_argument("--quiet", action="store_true",
                     help="suppress progress output")
    run.add_argument("--server", default=None, metavar="URL",
                     help="post the scenario to a running service instead "
                          "of computing locally")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _run_remote(scenario, server: str) -> dict:
    import httpx

    resp = httpx.post(f"{server.rstrip('/')}/run",
                      json=scenario.model_dump(), timeout=None)
    if resp.status_code == 422:
        raise ScenarioError(f"server rejected scenario: {resp.text}")
    if resp.status_code != 200:
        raise SimulationError(f"server error {resp.status_code}: {resp.text}")
    return resp.json()


def _cmd_run(args) -> int:
    try:
        scenario = load_scenario(args.scenario, overrides=args.override)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        if args.server:
            payload = _run_remote(scenario, args.server)
            files = write_outputs(payload["result"], payload["experiment"],
                                  args.output_dir)
        else:
            _, files = run_scenario(scenario, args.output_dir)
    except ScenarioError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SimulationError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2
    if not args.quiet:
        print(f"experiment: {scenario.experiment}")
        for f in files:
            print(f"wrote {f}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("massfringe.service:app", host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    return _cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
