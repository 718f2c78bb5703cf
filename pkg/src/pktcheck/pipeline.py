"""Packet pipeline: drive an NF over a packet stream with its contracts.

Per packet in Development mode the flow is ingress contract → transform →
egress contract (the egress phase applies to rewritten packets, whose
shape the contract describes). In Production only the transform runs.

Violation policies:

``continue``
    Emit every packet the transform produces; report violations.
``drop``
    Violating packets are not emitted.
``abort``
    Stop the run at the first violating packet (which is not emitted).

Independently of policy, a transform may drop a packet itself (e.g. a
full SRv6 segment list); such drops are counted and carry a reason but
are not contract violations.

The summary always conserves packets: in == out + dropped.
"""

from __future__ import annotations

import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .engine import BuildMode, ContractRuntime, Violation, run_egress, run_ingress
from .exceptions import ConfigError
from .generator import GeneratorSpec, generate_records
from .headers import Packet
from .nfs import NetworkFunction, make_nf
from .pcap import PcapRecord, read_pcap, write_pcap
from .registry import Registry, standard_registry

POLICIES = ("drop", "continue", "abort")


@dataclass
class RunConfig:
    """Everything one `run` needs: the NF, where packets come from and go,
    the build mode, and how to react to violations."""

    nf_name: str
    input_path: str | None = None
    generator: GeneratorSpec | None = None
    output_path: str | None = None
    mode: BuildMode = BuildMode.DEVELOPMENT
    policy: str = "continue"
    workers: int = 1
    nf_options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ConfigError(
                f"unknown policy {self.policy!r} (known: {', '.join(POLICIES)})"
            )
        if (self.input_path is None) == (self.generator is None):
            raise ConfigError(
                "exactly one input source required: a pcap path or a generator spec"
            )
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class RunSummary:
    nf_name: str
    mode: BuildMode
    policy: str
    packets_in: int = 0
    packets_out: int = 0
    packets_dropped: int = 0
    violations: list[Violation] = field(default_factory=list)
    violations_by_check: dict[str, int] = field(default_factory=dict)
    drops: list[tuple[int, str]] = field(default_factory=list)
    timings: dict[str, int] = field(
        default_factory=lambda: {
            "ingress_contract_ns": 0,
            "transform_ns": 0,
            "egress_contract_ns": 0,
        }
    )
    snapshots_built: int = 0
    checks_evaluated: int = 0
    aborted: bool = False
    out_records: list[PcapRecord] = field(default_factory=list)

    def exit_code(self) -> int:
        return 1 if self.violations else 0

    def to_json(self) -> dict:
        return {
            "nf": self.nf_name,
            "mode": self.mode.value,
            "policy": self.policy,
            "packets_in": self.packets_in,
            "packets_out": self.packets_out,
            "packets_dropped": self.packets_dropped,
            "violations": [v.to_json() for v in self.violations],
            "violations_by_check": dict(self.violations_by_check),
            "transform_drops": [
                {"packet_index": index, "reason": reason}
                for index, reason in self.drops
            ],
            "timings": dict(self.timings),
            "snapshots_built": self.snapshots_built,
            "checks_evaluated": self.checks_evaluated,
            "aborted": self.aborted,
        }


@dataclass
class _PacketOutcome:
    violations: list[Violation]
    out_data: bytes | None
    drop_reason: str | None
    ingress_ns: int
    transform_ns: int
    egress_ns: int


def _check_key(violation: Violation) -> str:
    index = "order" if violation.check_index is None else violation.check_index
    return f"{violation.phase}#{index}"


def _process_one(
    nf: NetworkFunction,
    data: bytes,
    registry: Registry,
    runtime: ContractRuntime,
    index: int,
) -> _PacketOutcome:
    packet = Packet.from_bytes(data)
    violations: list[Violation] = []
    snapshot = None
    ingress_ns = egress_ns = 0

    if runtime.development and nf.contract is not None:
        t0 = time.perf_counter_ns()
        violations, snapshot = run_ingress(
            nf.contract, packet, registry, runtime, packet_index=index
        )
        ingress_ns = time.perf_counter_ns() - t0

    t0 = time.perf_counter_ns()
    result = nf.apply(packet)
    transform_ns = time.perf_counter_ns() - t0

    if result.dropped:
        return _PacketOutcome(
            violations, None, result.drop_reason, ingress_ns, transform_ns, 0
        )

    if runtime.development and nf.contract is not None and result.rewritten:
        t0 = time.perf_counter_ns()
        violations = violations + run_egress(
            nf.contract, result.packet, snapshot, registry, runtime,
            packet_index=index,
        )
        egress_ns = time.perf_counter_ns() - t0

    return _PacketOutcome(
        violations,
        bytes(result.packet.data),
        None,
        ingress_ns,
        transform_ns,
        egress_ns,
    )


def run_records(
    nf: NetworkFunction,
    records: list[PcapRecord],
    registry: Registry,
    *,
    runtime: ContractRuntime | None = None,
    policy: str = "continue",
    workers: int = 1,
) -> RunSummary:
    """Run every record through the NF and aggregate a RunSummary."""
    if policy not in POLICIES:
        raise ConfigError(f"unknown policy {policy!r}")
    if workers > 1 and policy == "abort":
        raise ConfigError("abort policy requires a single worker")
    if runtime is None:
        runtime = ContractRuntime()
    summary = RunSummary(nf_name=nf.name, mode=runtime.mode, policy=policy)

    def ingest(record_index_pairs):
        for record, outcome in record_index_pairs:
            summary.packets_in += 1
            runtime.mark_packet_flow()
            summary.timings["ingress_contract_ns"] += outcome.ingress_ns
            summary.timings["transform_ns"] += outcome.transform_ns
            summary.timings["egress_contract_ns"] += outcome.egress_ns
            for violation in outcome.violations:
                summary.violations.append(violation)
                key = _check_key(violation)
                summary.violations_by_check[key] = (
                    summary.violations_by_check.get(key, 0) + 1
                )
            if outcome.out_data is None:
                summary.packets_dropped += 1
                summary.drops.append(
                    (summary.packets_in - 1, outcome.drop_reason or "")
                )
            elif outcome.violations and policy in ("drop", "abort"):
                summary.packets_dropped += 1
            else:
                summary.packets_out += 1
                summary.out_records.append(
                    PcapRecord(
                        data=outcome.out_data,
                        ts_sec=record.ts_sec,
                        ts_usec=record.ts_usec,
                    )
                )
            if outcome.violations and policy == "abort":
                summary.aborted = True
                return

    if workers == 1:
        def sequential():
            for index, record in enumerate(records):
                yield record, _process_one(nf, record.data, registry, runtime, index)
        ingest(sequential())
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = pool.map(
                lambda pair: _process_one(
                    nf, pair[1].data, registry, runtime, pair[0]
                ),
                enumerate(records),
            )
            ingest(zip(records, outcomes))

    summary.snapshots_built = runtime.snapshots_built
    summary.checks_evaluated = runtime.checks_evaluated
    return summary


def _load_records(config: RunConfig) -> list[PcapRecord]:
    if config.input_path is not None:
        return read_pcap(config.input_path)
    return generate_records(config.generator)


def run_pipeline(
    config: RunConfig, registry: Registry | None = None
) -> RunSummary:
    """Build the NF (elaborating its contract), then stream the configured
    input through it. Elaboration failures surface before any I/O."""
    if registry is None:
        registry = standard_registry()
    nf = make_nf(config.nf_name, registry, **config.nf_options)
    records = _load_records(config)
    runtime = ContractRuntime(config.mode)
    summary = run_records(
        nf,
        records,
        registry,
        runtime=runtime,
        policy=config.policy,
        workers=config.workers,
    )
    if config.output_path is not None:
        write_pcap(config.output_path, summary.out_records)
    return summary


def bench(
    nf_name: str,
    records: list[PcapRecord],
    registry: Registry | None = None,
    *,
    repetitions: int = 1,
    nf_options: dict | None = None,
) -> dict:
    """Time the three pipeline phases over ``repetitions`` full passes.

    Contracts-on passes run in Development, contracts-off in Production;
    the report carries per-phase mean/stdev and the ingress share of
    total contract overhead.
    """
    if repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if registry is None:
        registry = standard_registry()
    nf = make_nf(nf_name, registry, **(nf_options or {}))

    phase_samples = {"ingress_contract_ns": [], "transform_ns": [], "egress_contract_ns": []}
    on_totals, off_totals = [], []
    for _ in range(repetitions):
        on = run_records(
            nf, records, registry, runtime=ContractRuntime(BuildMode.DEVELOPMENT)
        )
        off = run_records(
            nf, records, registry, runtime=ContractRuntime(BuildMode.PRODUCTION)
        )
        for phase in phase_samples:
            phase_samples[phase].append(on.timings[phase])
        on_totals.append(sum(on.timings.values()))
        off_totals.append(off.timings["transform_ns"])

    def stats(samples):
        return {
            "mean_ns": statistics.fmean(samples),
            "stdev_ns": statistics.stdev(samples) if len(samples) > 1 else 0.0,
        }

    ingress_mean = statistics.fmean(phase_samples["ingress_contract_ns"])
    egress_mean = statistics.fmean(phase_samples["egress_contract_ns"])
    contract_overhead = ingress_mean + egress_mean
    return {
        "nf": nf_name,
        "packets": len(records),
        "repetitions": repetitions,
        "phases": {phase: stats(samples) for phase, samples in phase_samples.items()},
        "contracts_on_total_ns": stats(on_totals),
        "contracts_off_total_ns": stats(off_totals),
        "contract_overhead_ns": contract_overhead,
        "ingress_share_of_contract_overhead": (
            ingress_mean / contract_overhead if contract_overhead else 0.0
        ),
    }
