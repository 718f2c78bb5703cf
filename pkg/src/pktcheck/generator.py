"""Deterministic synthetic packet generation.

Two templates:

``tcp6``
    Eth/IPv6/TCP with a valid TCP checksum. ``payload_len`` sets the IPv6
    payload length (TCP header + application bytes), so ``payload_len=1300``
    makes a packet that trips the MTU threshold of ``mtu-too-big``.

``srv6``
    Eth/IPv6/SRv6 routing header (1–4 segments) followed by opaque
    payload bytes.

Generation is reproducible: the same GeneratorSpec (including seed)
yields the same byte stream. Timestamps are sequential microseconds so
pcap output is stable too.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .checksum import pseudo_header_checksum
from .exceptions import ConfigError
from .headers import (
    ETHERTYPE_IPV6,
    PROTO_SRV6,
    PROTO_NONE,
    PROTO_TCP,
    EthHdr,
    Ipv6Hdr,
    Packet,
    Srv6RoutingHdr,
    TcpHdr,
)
from .pcap import PcapRecord

TEMPLATES = ("tcp6", "srv6")

#: Smallest IPv6 payload per template: a bare TCP header, or an SRv6
#: routing header with one segment.
_MIN_PAYLOAD = {"tcp6": TcpHdr.MIN_SIZE, "srv6": Srv6RoutingHdr.MIN_SIZE + 16}

TCP_FLAG_PSH_ACK = 0x018


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate: template, count, payload length (fixed or range),
    and the RNG seed."""

    count: int
    template: str = "tcp6"
    payload_len: int | tuple[int, int] = 1300
    seed: int = 0

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise ConfigError(
                f"unknown template {self.template!r} (known: {', '.join(TEMPLATES)})"
            )
        if self.count < 0:
            raise ConfigError("count must be non-negative")
        lo, hi = self.payload_bounds()
        if lo > hi:
            raise ConfigError(f"empty payload length range {self.payload_len!r}")
        minimum = _MIN_PAYLOAD[self.template]
        if lo < minimum:
            raise ConfigError(
                f"payload length {lo} below template minimum {minimum} "
                f"for {self.template!r}"
            )
        if hi > 65535:
            raise ConfigError("payload length exceeds the 16-bit IPv6 field")

    def payload_bounds(self) -> tuple[int, int]:
        if isinstance(self.payload_len, int):
            return self.payload_len, self.payload_len
        lo, hi = self.payload_len
        return lo, hi


def _random_mac(rng: random.Random) -> bytes:
    # Locally administered unicast (02:...), never a real vendor OUI.
    return bytes([0x02]) + rng.randbytes(5)


def _random_addr(rng: random.Random) -> bytes:
    # 2001:db8::/32 documentation prefix.
    return bytes([0x20, 0x01, 0x0D, 0xB8]) + rng.randbytes(12)


def _pick_payload_len(spec: GeneratorSpec, rng: random.Random) -> int:
    lo, hi = spec.payload_bounds()
    return lo if lo == hi else rng.randint(lo, hi)


def _gen_tcp6(spec: GeneratorSpec, rng: random.Random) -> bytes:
    payload_len = _pick_payload_len(spec, rng)
    src, dst = _random_addr(rng), _random_addr(rng)
    app_bytes = rng.randbytes(payload_len - TcpHdr.MIN_SIZE)
    tcp = TcpHdr(
        src_port=rng.randint(1024, 65535),
        dst_port=rng.choice((80, 443, 8080)),
        seq=rng.getrandbits(32),
        ack=rng.getrandbits(32),
        data_offset=5,
        flags=TCP_FLAG_PSH_ACK,
        window=rng.randint(1024, 65535),
        checksum=0,
        urgent_ptr=0,
    )
    segment = tcp.emit() + app_bytes
    tcp_checksum = pseudo_header_checksum(src, dst, len(segment), PROTO_TCP, segment)
    segment = replace(tcp, checksum=tcp_checksum).emit() + app_bytes
    ipv6 = Ipv6Hdr(
        src=src,
        dst=dst,
        payload_len=payload_len,
        next_header=PROTO_TCP,
        hop_limit=64,
    )
    eth = EthHdr(dst=_random_mac(rng), src=_random_mac(rng), ether_type=ETHERTYPE_IPV6)
    return eth.emit() + ipv6.emit() + segment


def _gen_srv6(spec: GeneratorSpec, rng: random.Random) -> bytes:
    payload_len = _pick_payload_len(spec, rng)
    # Fit 1..4 segments inside the requested IPv6 payload length.
    max_segments = min(4, (payload_len - Srv6RoutingHdr.MIN_SIZE) // 16)
    n_segments = rng.randint(1, max(1, max_segments))
    srh = Srv6RoutingHdr(
        next_header=PROTO_NONE,
        segments_left=rng.randint(0, n_segments),
        segments=[_random_addr(rng) for _ in range(n_segments)],
        tag=rng.getrandbits(16),
    )
    srh_bytes = srh.emit()
    rest = rng.randbytes(payload_len - len(srh_bytes))
    ipv6 = Ipv6Hdr(
        src=_random_addr(rng),
        dst=_random_addr(rng),
        payload_len=payload_len,
        next_header=PROTO_SRV6,
        hop_limit=64,
    )
    eth = EthHdr(dst=_random_mac(rng), src=_random_mac(rng), ether_type=ETHERTYPE_IPV6)
    return eth.emit() + ipv6.emit() + srh_bytes + rest


_TEMPLATE_BUILDERS = {"tcp6": _gen_tcp6, "srv6": _gen_srv6}


def generate(spec: GeneratorSpec) -> list[Packet]:
    """Generate ``spec.count`` packets; identical specs yield identical bytes."""
    rng = random.Random(spec.seed)
    builder = _TEMPLATE_BUILDERS[spec.template]
    return [Packet.from_bytes(builder(spec, rng)) for _ in range(spec.count)]


def generate_records(spec: GeneratorSpec) -> list[PcapRecord]:
    """Generate packets wrapped in pcap records with sequential timestamps."""
    return [
        PcapRecord(data=bytes(packet.data), ts_sec=0, ts_usec=index)
        for index, packet in enumerate(generate(spec))
    ]
