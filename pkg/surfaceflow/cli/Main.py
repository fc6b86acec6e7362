# -*- coding: utf-8 -*-
# Generic/Built-in
import argparse
import logging
import sys

from ..lib.FlowExceptions import FlowError, ConfigurationError, FingerprintMismatchError
from .Scenario import load_scenario
from . import Runner

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2
EXIT_MISMATCH = 3

_log = logging.getLogger(__name__)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="surfaceflow",
        description="Simulate conformal Ricci flow on disks and the plane and verify "
                    "its curvature, area and comparison bounds.")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads for ladder rungs and checks")
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario and verify its bounds")
    run.add_argument("scenario", help="scenario TOML file")
    run.add_argument("--out", default=None, help="run directory (default from scenario)")

    verify = commands.add_parser("verify", help="re-check a stored run without simulating")
    verify.add_argument("directory")
    verify.add_argument("--checks", default=None,
                        help="comma separated bound ids (default: the scenario's)")

    export = commands.add_parser("export-plots", help="write plot-ready CSV tables")
    export.add_argument("directory")
    return parser


def _conclude(reports):
    failed = Runner.failed_ids(reports)
    for bound_id in failed:
        print(bound_id, file=sys.stderr)
    return EXIT_FAILED if failed else EXIT_OK


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            scenario = load_scenario(args.scenario).with_output(args.out, args.threads)
            return _conclude(Runner.run(scenario))
        if args.command == "verify":
            return _conclude(Runner.verify(args.directory, args.checks, args.threads))
        Runner.export_plots(args.directory)
        return EXIT_OK
    except ConfigurationError as error:
        print(error.msg, file=sys.stderr)
        return EXIT_INVALID
    except FingerprintMismatchError as error:
        print(error.msg, file=sys.stderr)
        return EXIT_MISMATCH
    except FlowError as error:
        _log.error(error.msg)
        print(error.msg, file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
