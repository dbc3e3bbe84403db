"""Command-line front end.

Subcommands:

* ``run``       simulate an experiment, write the report JSON
* ``exact``     write the exact outcome table for a configuration
* ``security``  write the state-distinguishability metrics
* ``compare``   sifting efficiency next to the reference protocols

Exit status: 0 on success with no abort, 3 when the error estimate aborts
the run (eavesdropper suspected), 2 for usage or configuration errors,
1 for I/O failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Optional, Sequence

from .analysis import efficiency_comparison, exact_table, security_metrics
from .config import ConfigError, parse_config
from .protocol import ExperimentResult, RoundRecord, run_experiment

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_ABORT = 3

CSV_HEADER = ["index", "alice_bit", "bob_bit", "outcome", "kept", "alice_key", "bob_key"]


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--seed", type=int, help="master RNG seed")
    parser.add_argument("--rounds", type=int, help="number of protocol rounds")
    parser.add_argument("--mode", choices=["michelson", "mach_zehnder"])
    parser.add_argument("--source", choices=["single_photon", "coherent"])
    parser.add_argument("--mu", type=float, help="mean photon number (coherent source)")
    parser.add_argument("--t-a", dest="t_a", type=float, help="arm-a transmittance")
    parser.add_argument("--t-b", dest="t_b", type=float, help="arm-b transmittance")
    parser.add_argument("--eta", type=float, help="detector efficiency")
    parser.add_argument("--dark", type=float, help="dark-count probability per gate")
    parser.add_argument("--phase-noise-sigma", dest="phase_noise_sigma", type=float)
    parser.add_argument("--static-phase", dest="static_phase", type=float)
    parser.add_argument("--eve", choices=["none", "intercept_resend", "pns_tap"])
    parser.add_argument("--eve-tap-t", dest="eve_tap_t", type=float)
    parser.add_argument("--sample-fraction", dest="sample_fraction", type=float)
    parser.add_argument("--qber-threshold", dest="qber_threshold", type=float)


_OVERRIDE_KEYS = (
    "mode", "source", "mu", "rounds", "t_a", "t_b", "eta", "dark",
    "phase_noise_sigma", "static_phase", "eve", "eve_tap_t",
    "sample_fraction", "qber_threshold", "seed",
)


def _config_from_args(args: argparse.Namespace):
    overrides = {key: getattr(args, key, None) for key in _OVERRIDE_KEYS}
    return parse_config(args.config, overrides)


def _emit_json(document: dict, out_path: Optional[str]) -> None:
    text = json.dumps(document, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _write_round_log(path: str, records: Sequence[RoundRecord]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.index,
                    r.alice_bit,
                    r.bob_bit,
                    r.outcome.value,
                    int(r.kept),
                    "" if r.alice_key_bit is None else r.alice_key_bit,
                    "" if r.bob_key_bit is None else r.bob_key_bit,
                ]
            )


def _run_and_report(args: argparse.Namespace) -> ExperimentResult:
    config = _config_from_args(args)
    return run_experiment(config, workers=args.workers)


def _cmd_run(args: argparse.Namespace) -> int:
    result = _run_and_report(args)
    _emit_json(result.report.to_dict(), args.out)
    if args.log:
        _write_round_log(args.log, result.records)
    return EXIT_ABORT if result.report.qber.abort else EXIT_OK


def _cmd_exact(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    _emit_json(exact_table(config).to_dict(), args.out)
    return EXIT_OK


def _cmd_security(args: argparse.Namespace) -> int:
    _emit_json(security_metrics(), args.out)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    if args.report:
        try:
            with open(args.report) as handle:
                report = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed report JSON {args.report}: {exc}") from exc
        comparison = efficiency_comparison(report)
        abort = bool(report.get("qber", {}).get("abort", False))
    else:
        result = _run_and_report(args)
        comparison = efficiency_comparison(result.report)
        abort = result.report.qber.abort
    _emit_json(comparison, args.out)
    return EXIT_ABORT if abort else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasekey",
        description="Interference-routed quantum key distribution simulator",
        epilog="exit status: 0 ok, 3 abort (eavesdropper suspected), "
        "2 usage/config error, 1 I/O error",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate an experiment and report statistics")
    _add_config_flags(p_run)
    p_run.add_argument("--out", metavar="PATH", help="report JSON path (default stdout)")
    p_run.add_argument("--log", metavar="PATH", help="write per-round CSV log")
    p_run.add_argument("--workers", type=int, default=1, help="parallel workers")
    p_run.set_defaults(handler=_cmd_run)

    p_exact = sub.add_parser("exact", help="exact outcome table, no sampling")
    _add_config_flags(p_exact)
    p_exact.add_argument("--out", metavar="PATH")
    p_exact.set_defaults(handler=_cmd_exact)

    p_sec = sub.add_parser("security", help="arm-b distinguishability metrics")
    p_sec.add_argument("--out", metavar="PATH")
    p_sec.set_defaults(handler=_cmd_security)

    p_cmp = sub.add_parser("compare", help="efficiency against reference protocols")
    _add_config_flags(p_cmp)
    p_cmp.add_argument("--report", metavar="PATH", help="reuse an existing report JSON")
    p_cmp.add_argument("--out", metavar="PATH")
    p_cmp.add_argument("--workers", type=int, default=1)
    p_cmp.set_defaults(handler=_cmd_compare)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
