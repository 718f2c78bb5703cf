"""Command-line harness.

Subcommands:

``run``      stream packets (pcap or generated) through an NF with contracts
``gen``      write a deterministic synthetic pcap
``bench``    time ingress-contract / transform / egress-contract phases
``explain``  print an NF's elaborated contract

Exit codes: 0 = clean run, 1 = contract violations occurred, 2 =
configuration or elaboration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .engine import BuildMode
from .exceptions import PktCheckError
from .generator import GeneratorSpec, generate_records
from .nfs import NF_FACTORIES, make_nf
from .contracts import explain_contract
from .pcap import write_pcap
from .pipeline import RunConfig, bench, run_pipeline
from .registry import standard_registry

_MODES = {"dev": BuildMode.DEVELOPMENT, "prod": BuildMode.PRODUCTION}


def _add_generator_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--count", type=int, default=100,
                        help="number of packets to generate (default 100)")
    parser.add_argument("--seed", type=int, default=0,
                        help="generator seed (default 0)")
    parser.add_argument("--template", choices=("tcp6", "srv6"), default="tcp6",
                        help="packet template (default tcp6)")
    parser.add_argument("--payload-len", type=int, default=1300,
                        help="fixed IPv6 payload length (default 1300)")
    parser.add_argument("--payload-len-range", nargs=2, type=int,
                        metavar=("LO", "HI"),
                        help="random IPv6 payload length range (overrides --payload-len)")


def _generator_spec(args) -> GeneratorSpec:
    payload = (
        tuple(args.payload_len_range)
        if args.payload_len_range is not None
        else args.payload_len
    )
    return GeneratorSpec(
        count=args.count,
        template=args.template,
        payload_len=payload,
        seed=args.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pktcheck",
        description="Contract-checked packet processing harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run packets through an NF")
    run_p.add_argument("--nf", required=True, choices=sorted(NF_FACTORIES))
    run_p.add_argument("--in", dest="input_path",
                       help="input pcap (omit to use the generator flags)")
    run_p.add_argument("--out", dest="output_path", help="output pcap path")
    run_p.add_argument("--mode", choices=sorted(_MODES), default="dev")
    run_p.add_argument("--policy", choices=("drop", "continue", "abort"),
                       default="continue")
    run_p.add_argument("--format", choices=("text", "json"), default="text")
    run_p.add_argument("--workers", type=int, default=1)
    _add_generator_flags(run_p)

    gen_p = sub.add_parser("gen", help="generate a synthetic pcap")
    gen_p.add_argument("--out", dest="output_path", required=True)
    _add_generator_flags(gen_p)

    bench_p = sub.add_parser("bench", help="benchmark contract overhead")
    bench_p.add_argument("--nf", required=True, choices=sorted(NF_FACTORIES))
    bench_p.add_argument("--in", dest="input_path",
                         help="input pcap (omit to use the generator flags)")
    bench_p.add_argument("--reps", type=int, default=1,
                         help="repetitions per measurement (default 1)")
    bench_p.add_argument("--format", choices=("text", "json"), default="text")
    _add_generator_flags(bench_p)

    explain_p = sub.add_parser("explain", help="print an NF's elaborated contract")
    explain_p.add_argument("--nf", required=True, choices=sorted(NF_FACTORIES))

    return parser


def _cmd_run(args) -> int:
    config = RunConfig(
        nf_name=args.nf,
        input_path=args.input_path,
        generator=None if args.input_path else _generator_spec(args),
        output_path=args.output_path,
        mode=_MODES[args.mode],
        policy=args.policy,
        workers=args.workers,
    )
    summary = run_pipeline(config)
    if args.format == "json":
        print(json.dumps(summary.to_json(), indent=2))
    else:
        for violation in summary.violations:
            print(violation.text())
        for index, reason in summary.drops:
            print(f"packet {index} dropped by transform: {reason}")
        print(
            f"{summary.nf_name}: in={summary.packets_in} "
            f"out={summary.packets_out} dropped={summary.packets_dropped} "
            f"violations={len(summary.violations)} mode={summary.mode.value} "
            f"policy={summary.policy}"
        )
        if summary.aborted:
            print("run aborted at first violating packet")
    return summary.exit_code()


def _cmd_gen(args) -> int:
    records = generate_records(_generator_spec(args))
    write_pcap(args.output_path, records)
    print(f"wrote {len(records)} packets to {args.output_path}")
    return 0


def _cmd_bench(args) -> int:
    if args.input_path:
        from .pcap import read_pcap

        records = read_pcap(args.input_path)
    else:
        records = generate_records(_generator_spec(args))
    report = bench(args.nf, records, repetitions=args.reps)
    if args.format == "json":
        print(json.dumps(report, indent=2))
    else:
        print(f"bench {report['nf']}: {report['packets']} packets x "
              f"{report['repetitions']} repetitions")
        for phase, stats in report["phases"].items():
            print(f"  {phase:22s} mean={stats['mean_ns']:14.0f} ns  "
                  f"stdev={stats['stdev_ns']:12.0f} ns")
        on = report["contracts_on_total_ns"]["mean_ns"]
        off = report["contracts_off_total_ns"]["mean_ns"]
        share = report["ingress_share_of_contract_overhead"]
        print(f"  contracts on  total    mean={on:14.0f} ns")
        print(f"  contracts off total    mean={off:14.0f} ns")
        print(f"  ingress share of contract overhead: {share:.1%}")
    return 0


def _cmd_explain(args) -> int:
    registry = standard_registry()
    nf = make_nf(args.nf, registry)
    print(explain_contract(nf.contract))
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "gen": _cmd_gen,
    "bench": _cmd_bench,
    "explain": _cmd_explain,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PktCheckError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
