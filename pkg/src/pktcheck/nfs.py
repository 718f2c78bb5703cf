"""Example network functions with contracts attached.

Two NFs are provided, addressable by name:

``mtu-too-big``
    Rewrites oversized Eth/IPv6/TCP packets into ICMPv6 Packet Too Big
    replies returned to the sender (Ethernet and IPv6 addresses swapped,
    payload truncated to fit the IPv6 minimum MTU). Undersized or
    non-matching packets pass through untouched.

``srv6-change-pkt``
    Appends one segment to an SRv6 routing header and keeps the dependent
    fields consistent: last entry, header length, and the enclosing IPv6
    payload length. Its egress contract asserts each delta against the
    ingress snapshot, which is what catches the classic bug of growing
    the segment list while forgetting the outer length field.

Factory functions accept fault-injection flags (``omit_ipv6_swap``,
``omit_payload_len_update``, ...) that produce deliberately buggy variants
for exercising the contract machinery. Transforms are pure functions of
the packet bytes: they never consult the ingress snapshot, so behavior is
identical whether contracts run or not.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

from .checksum import pseudo_header_checksum
from .contracts import Contract, elaborate, parse_contract_spec
from .exceptions import ConfigError, ParseError
from .headers import (
    ETH_HDR_SIZE,
    ETHERTYPE_IPV6,
    IPV6_HDR_SIZE,
    IPV6_MIN_MTU,
    PROTO_ICMPV6,
    PROTO_SRV6,
    PROTO_TCP,
    EthHdr,
    Icmpv6PktTooBig,
    Ipv6Hdr,
    Packet,
)
from .registry import Registry

#: Largest invoking-packet slice that keeps the ICMPv6 reply's IPv6 payload
#: at exactly IPV6_MIN_MTU - IPV6_HDR_SIZE bytes.
MAX_INVOKING_BYTES = IPV6_MIN_MTU - IPV6_HDR_SIZE - Icmpv6PktTooBig.MIN_SIZE

#: SRv6 hdr_ext_len is an 8-bit field counting 8-byte units, two per
#: 16-byte segment; the list is full once another segment would not fit.
MAX_SRV6_SEGMENTS = 0xFF // 2


@dataclass
class TransformResult:
    """Outcome of one NF transform application.

    ``packet`` is the outgoing packet (None when dropped); ``rewritten``
    says whether the NF produced a new packet shape — the egress contract
    describes rewritten packets only, so pass-throughs skip it.
    """

    packet: Packet | None
    rewritten: bool = False
    drop_reason: str | None = None

    @property
    def dropped(self) -> bool:
        return self.packet is None


@dataclass(frozen=True)
class NetworkFunction:
    """A named transform plus its elaborated contract (None = uncontracted)."""

    name: str
    transform: Callable[[Packet], TransformResult]
    contract: Contract | None
    contract_text: str | None = None

    def apply(self, packet: Packet) -> TransformResult:
        return self.transform(packet)


def _passthrough(packet: Packet) -> TransformResult:
    return TransformResult(packet=packet, rewritten=False)


# --- mtu-too-big -------------------------------------------------------------

MTU_TOO_BIG_CONTRACT = """
check(IPV6_MIN_MTU = 1280, ETH_HDR_SIZE = 14)
pre {
    order: [EthHdr => Ipv6Hdr => TcpHdr<Ipv6Hdr>],
    checks: [(payload_len[Ipv6Hdr], >, IPV6_MIN_MTU)]
}
post {
    order: [EthHdr => Ipv6Hdr => Icmpv6PktTooBig<Ipv6Hdr>],
    checks: [(checksum[Icmpv6PktTooBig], neq, checksum[TcpHdr<Ipv6Hdr>]),
             (payload_len[Ipv6Hdr], ==, 1240),
             (src[Ipv6Hdr], ==, dst[Ipv6Hdr]),
             (dst[Ipv6Hdr], ==, src[Ipv6Hdr]),
             (.src[EthHdr], ==, .dst[EthHdr]),
             (.dst[EthHdr], ==, .src[EthHdr])]
}
static: [IPV6_MIN_MTU + ETH_HDR_SIZE == 1294]
"""


def _parse_tcp6(packet: Packet):
    """Parse Eth/IPv6/TCP; return (eth, ipv6, tcp) or None if the packet
    is something else."""
    try:
        packet.reset_chain()
        eth, _ = packet.parse_header("EthHdr")
        if eth.ether_type != ETHERTYPE_IPV6:
            return None
        ipv6, _ = packet.parse_header("Ipv6Hdr")
        if ipv6.next_header != PROTO_TCP:
            return None
        tcp, _ = packet.parse_header("TcpHdr")
    except ParseError:
        return None
    return eth, ipv6, tcp


def send_too_big(
    packet: Packet,
    *,
    omit_ipv6_swap: bool = False,
    omit_eth_swap: bool = False,
) -> TransformResult:
    """Turn an oversized TCP/IPv6 packet into an ICMPv6 Packet Too Big reply.

    Packets that are not Eth/IPv6/TCP, or whose IPv6 payload length does
    not exceed the minimum MTU, pass through unchanged. The reply carries
    as much of the invoking packet as fits while keeping the reply's own
    IPv6 payload at exactly 1240 bytes, and is addressed back to the
    sender. The ``omit_*`` flags suppress the address swaps, simulating
    the bug the egress contract exists to catch.
    """
    parsed = _parse_tcp6(packet)
    if parsed is None:
        return _passthrough(packet)
    eth, ipv6, _ = parsed
    if ipv6.payload_len <= IPV6_MIN_MTU:
        return _passthrough(packet)

    if omit_eth_swap:
        new_eth = EthHdr(dst=eth.dst, src=eth.src, ether_type=ETHERTYPE_IPV6)
    else:
        new_eth = EthHdr(dst=eth.src, src=eth.dst, ether_type=ETHERTYPE_IPV6)
    new_src, new_dst = (
        (ipv6.src, ipv6.dst) if omit_ipv6_swap else (ipv6.dst, ipv6.src)
    )
    new_ipv6 = Ipv6Hdr(
        src=new_src,
        dst=new_dst,
        payload_len=IPV6_MIN_MTU - IPV6_HDR_SIZE,
        next_header=PROTO_ICMPV6,
        hop_limit=64,
    )

    invoking_avail = min(
        ETH_HDR_SIZE + IPV6_HDR_SIZE + ipv6.payload_len, len(packet.data)
    ) - ETH_HDR_SIZE
    invoking = bytes(
        packet.data[ETH_HDR_SIZE : ETH_HDR_SIZE + min(invoking_avail, MAX_INVOKING_BYTES)]
    )
    icmp = Icmpv6PktTooBig(checksum=0, mtu=IPV6_MIN_MTU, invoking_packet=invoking)
    body = icmp.emit()
    icmp = replace(
        icmp,
        checksum=pseudo_header_checksum(
            new_ipv6.src, new_ipv6.dst, len(body), PROTO_ICMPV6, body
        ),
    )
    out = Packet.from_bytes(new_eth.emit() + new_ipv6.emit() + icmp.emit())
    return TransformResult(packet=out, rewritten=True)


# --- srv6-change-pkt ---------------------------------------------------------

#: Default segment appended by srv6-change-pkt: a stable documentation-range
#: address so identical inputs yield identical outputs.
DEFAULT_SEGMENT = bytes.fromhex("20010db8000000000000000000000099")


def _srv6_contract(visit_new: bool) -> str:
    sl_rhs = "segments_left[Srv6RoutingHdr] + 1" if visit_new else (
        "segments_left[Srv6RoutingHdr]"
    )
    return f"""
check(SEG_BYTES = 16, SRV6_TYPE = 4)
pre {{
    order: [EthHdr => Ipv6Hdr => Srv6RoutingHdr],
    checks: [(routing_type[Srv6RoutingHdr], ==, SRV6_TYPE),
             (segments_left[Srv6RoutingHdr], <=, last_entry[Srv6RoutingHdr] + 1)]
}}
post {{
    order: [EthHdr => Ipv6Hdr => Srv6RoutingHdr],
    checks: [(payload_len[Ipv6Hdr], ==, payload_len[Ipv6Hdr] + SEG_BYTES),
             (hdr_ext_len[Srv6RoutingHdr], ==, hdr_ext_len[Srv6RoutingHdr] + 2),
             (last_entry[Srv6RoutingHdr], ==, last_entry[Srv6RoutingHdr] + 1),
             (segments_left[Srv6RoutingHdr], ==, {sl_rhs})]
}}
static: [SEG_BYTES * 8 == 128]
"""


def srv6_add_segment(
    packet: Packet,
    *,
    segment: bytes = DEFAULT_SEGMENT,
    visit_new: bool = False,
    omit_payload_len_update: bool = False,
) -> TransformResult:
    """Append ``segment`` to the packet's SRv6 routing header.

    Growing the segment list ripples into three other fields: last entry
    and the extension-header length inside the routing header, and the
    payload length of the enclosing IPv6 header. ``visit_new`` additionally
    bumps segments-left so the new segment is actually visited; otherwise
    the insert is pure record-keeping. A full segment list (another entry
    would overflow the 8-bit length) drops the packet with a reason.

    ``omit_payload_len_update`` leaves the IPv6 payload length stale — the
    consequence bug the egress contract flags on every affected packet.
    """
    try:
        packet.reset_chain()
        eth, _ = packet.parse_header("EthHdr")
        if eth.ether_type != ETHERTYPE_IPV6:
            return _passthrough(packet)
        ipv6, _ = packet.parse_header("Ipv6Hdr")
        if ipv6.next_header != PROTO_SRV6:
            return _passthrough(packet)
        srh, _ = packet.parse_header("Srv6RoutingHdr")
    except ParseError:
        return _passthrough(packet)

    if len(srh.segments) + 1 > MAX_SRV6_SEGMENTS:
        return TransformResult(
            packet=None,
            rewritten=False,
            drop_reason=(
                f"segment list full: {len(srh.segments)} segments; appending "
                "would overflow the routing header's 8-bit length field"
            ),
        )

    new_srh = replace(
        srh,
        segments=list(srh.segments) + [bytes(segment)],
        segments_left=srh.segments_left + (1 if visit_new else 0),
    )
    new_payload_len = ipv6.payload_len if omit_payload_len_update else (
        ipv6.payload_len + len(segment)
    )
    new_ipv6 = replace(ipv6, payload_len=new_payload_len)
    srh_entry = packet.chain[2]
    rest = bytes(packet.data[srh_entry.offset + srh_entry.length :])
    out = Packet.from_bytes(
        eth.emit() + new_ipv6.emit() + new_srh.emit() + rest
    )
    return TransformResult(packet=out, rewritten=True)


# --- catalog -----------------------------------------------------------------


def make_mtu_too_big(
    registry: Registry,
    *,
    omit_ipv6_swap: bool = False,
    omit_eth_swap: bool = False,
    name: str = "mtu-too-big",
) -> NetworkFunction:
    text = MTU_TOO_BIG_CONTRACT
    spec = parse_contract_spec(text, nf_name=name, registry=registry)
    contract = elaborate(spec, registry)

    def transform(packet: Packet) -> TransformResult:
        return send_too_big(
            packet, omit_ipv6_swap=omit_ipv6_swap, omit_eth_swap=omit_eth_swap
        )

    return NetworkFunction(
        name=name, transform=transform, contract=contract, contract_text=text
    )


def make_srv6_change_pkt(
    registry: Registry,
    *,
    segment: bytes = DEFAULT_SEGMENT,
    visit_new: bool = False,
    omit_payload_len_update: bool = False,
    name: str = "srv6-change-pkt",
) -> NetworkFunction:
    text = _srv6_contract(visit_new)
    spec = parse_contract_spec(text, nf_name=name, registry=registry)
    contract = elaborate(spec, registry)

    def transform(packet: Packet) -> TransformResult:
        return srv6_add_segment(
            packet,
            segment=segment,
            visit_new=visit_new,
            omit_payload_len_update=omit_payload_len_update,
        )

    return NetworkFunction(
        name=name, transform=transform, contract=contract, contract_text=text
    )


NF_FACTORIES: dict[str, Callable[..., NetworkFunction]] = {
    "mtu-too-big": make_mtu_too_big,
    "srv6-change-pkt": make_srv6_change_pkt,
}


def make_nf(name: str, registry: Registry, **options) -> NetworkFunction:
    """Build a catalog NF by name; options reach the factory unchanged."""
    try:
        factory = NF_FACTORIES[name]
    except KeyError:
        raise ConfigError(
            f"unknown NF {name!r} (known: {', '.join(sorted(NF_FACTORIES))})"
        ) from None
    return factory(registry, **options)
