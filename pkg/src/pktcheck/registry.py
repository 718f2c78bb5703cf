"""Header descriptor registry: predecessor rules, field accessors, and the
order checks run at elaboration time and per packet.

``verify_order`` runs once, when a pipeline is constructed; ``parse_chain``
and ``match_chain`` are the per-packet operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import headers
from .exceptions import ChainOrderError, ParseError, RegistryError
from .headers import (
    EthHdr,
    Icmpv6PktTooBig,
    Ipv6Hdr,
    Packet,
    Srv6RoutingHdr,
    TcpHdr,
)

INT = "int"
BYTES = "bytes"


@dataclass(frozen=True)
class FieldAccessor:
    """Named extraction of one value from a decoded header."""

    name: str
    kind: str  # INT or BYTES
    get: callable


@dataclass
class HeaderDescriptor:
    """Registry entry for one header type.

    ``size_rule`` is a constant byte count or a function of the decoded
    header, so variable-length headers need no special-casing.
    ``protocol_number`` is the value identifying this header in its
    predecessor's linkage field; ``linkage_accessor`` names this header's
    own next-protocol field, if it has one.
    """

    header_type: str
    size_rule: int | callable
    permitted_predecessors: frozenset[str]
    accessors: dict[str, FieldAccessor]
    parameter_slot: str | None = None
    protocol_number: int | None = None
    linkage_accessor: str | None = None

    def is_chain_root(self) -> bool:
        return not self.permitted_predecessors

    def size_of(self, header) -> int:
        if callable(self.size_rule):
            return self.size_rule(header)
        return self.size_rule


@dataclass(frozen=True)
class OrderElement:
    header_type: str
    param: str | None = None

    def __str__(self) -> str:
        if self.param:
            return f"{self.header_type}<{self.param}>"
        return self.header_type


@dataclass(frozen=True)
class OrderSpec:
    """Expected header sequence, e.g. [EthHdr => Ipv6Hdr => TcpHdr<Ipv6Hdr>]."""

    elements: tuple[OrderElement, ...]

    def __post_init__(self):
        if not self.elements:
            raise RegistryError("an order spec cannot be empty")

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def __str__(self) -> str:
        return "[" + " => ".join(str(e) for e in self.elements) + "]"


def order(*specs: str | tuple[str, str]) -> OrderSpec:
    """Build an OrderSpec from type names or (type, param) pairs."""
    elements = []
    for spec in specs:
        if isinstance(spec, tuple):
            elements.append(OrderElement(spec[0], spec[1]))
        else:
            elements.append(OrderElement(spec))
    return OrderSpec(tuple(elements))


class Registry:
    """Write-once store of header descriptors.

    Registration happens during setup; the registry is frozen before
    elaboration and shared read-only afterwards.
    """

    def __init__(self):
        self._descriptors: dict[str, HeaderDescriptor] = {}
        self._frozen = False

    def register(self, descriptor: HeaderDescriptor) -> HeaderDescriptor:
        if self._frozen:
            raise RegistryError("registry is frozen; no further registrations")
        if descriptor.header_type in self._descriptors:
            raise RegistryError(f"duplicate header type {descriptor.header_type!r}")
        known = set(self._descriptors) | {descriptor.header_type}
        for pred in descriptor.permitted_predecessors:
            if pred not in known:
                raise RegistryError(
                    f"{descriptor.header_type} names unknown predecessor {pred!r}"
                )
        if descriptor.parameter_slot and descriptor.parameter_slot not in known:
            raise RegistryError(
                f"{descriptor.header_type} names unknown parameter type "
                f"{descriptor.parameter_slot!r}"
            )
        self._descriptors[descriptor.header_type] = descriptor
        return descriptor

    def freeze(self) -> "Registry":
        self._frozen = True
        return self

    @property
    def frozen(self) -> bool:
        return self._frozen

    def get(self, header_type: str) -> HeaderDescriptor:
        try:
            return self._descriptors[header_type]
        except KeyError:
            raise RegistryError(f"unknown header type {header_type!r}") from None

    def known(self, header_type: str) -> bool:
        return header_type in self._descriptors

    def accessor(self, header_type: str, name: str) -> FieldAccessor:
        descriptor = self.get(header_type)
        try:
            return descriptor.accessors[name]
        except KeyError:
            raise RegistryError(
                f"header {header_type} has no accessor {name!r} "
                f"(known: {', '.join(sorted(descriptor.accessors))})"
            ) from None


def verify_order(registry: Registry, spec: OrderSpec) -> None:
    """Validate an order spec against the registry's predecessor rules.

    Runs at elaboration/pipeline-construction time, never per packet.
    Raises ChainOrderError naming the offending adjacent pair.
    """
    for element in spec:
        if not registry.known(element.header_type):
            raise ChainOrderError(
                None, element.header_type, None,
                f"unknown header type {element.header_type!r} in order {spec}",
            )
        if element.param is not None and not registry.known(element.param):
            raise ChainOrderError(
                None, element.param, None,
                f"unknown parameter type {element.param!r} in order {spec}",
            )
    for i in range(1, len(spec)):
        prev = spec.elements[i - 1]
        curr = spec.elements[i]
        descriptor = registry.get(curr.header_type)
        if prev.header_type not in descriptor.permitted_predecessors:
            raise ChainOrderError(
                i, curr.header_type, prev.header_type,
                f"{curr.header_type} cannot follow {prev.header_type}: permitted "
                f"predecessors are "
                f"{{{', '.join(sorted(descriptor.permitted_predecessors)) or 'none (chain root)'}}}",
            )
    for i, element in enumerate(spec):
        if element.param is not None:
            earlier = {e.header_type for e in spec.elements[:i]}
            if element.param not in earlier:
                raise ChainOrderError(
                    i, element.param, None,
                    f"{element} names parameter {element.param} but no earlier "
                    f"element in {spec} provides it",
                )
    first = spec.elements[0]
    if not registry.get(first.header_type).is_chain_root():
        raise ChainOrderError(
            0, first.header_type, None,
            f"{first.header_type} is not a chain root and cannot start {spec}",
        )


def parse_chain(packet: Packet, spec: OrderSpec, registry: Registry) -> list:
    """Parse ``packet`` header-by-header along the declared order.

    Resets any existing chain. Each adjacent pair is cross-checked through
    the predecessor's linkage field (ether_type / next_header) against the
    successor's protocol number, so a packet whose bytes happen to decode
    under the wrong type still fails cleanly. Returns the decoded headers;
    raises ChainOrderError at the offending index.
    """
    packet.reset_chain()
    decoded = []
    prev_descriptor = None
    prev_header = None
    for i, element in enumerate(spec):
        descriptor = registry.get(element.header_type)
        if prev_descriptor is not None and prev_descriptor.linkage_accessor:
            expected_proto = descriptor.protocol_number
            if expected_proto is not None:
                linkage = prev_descriptor.accessors[prev_descriptor.linkage_accessor]
                actual = linkage.get(prev_header)
                if actual != expected_proto:
                    raise ChainOrderError(
                        i, element.header_type, None,
                        f"order mismatch at index {i}: {prev_descriptor.header_type} "
                        f"{prev_descriptor.linkage_accessor}={actual:#x} does not "
                        f"announce {element.header_type} "
                        f"(protocol {expected_proto:#x})",
                    )
        try:
            header, _ = packet.parse_header(element.header_type)
        except ParseError as exc:
            raise ChainOrderError(
                i, element.header_type, None,
                f"order mismatch at index {i}: cannot parse "
                f"{element.header_type}: {exc}",
            ) from exc
        decoded.append(header)
        prev_descriptor = descriptor
        prev_header = header
    return decoded


def match_chain(packet: Packet, spec: OrderSpec) -> None:
    """Check that the packet's parsed chain equals the declared order, element for element.

    Parameter types (e.g. TcpHdr<Ipv6Hdr>) must appear earlier in the
    chain. Raises ChainOrderError at the mismatching index.
    """
    chain = packet.chain
    if len(chain) != len(spec):
        raise ChainOrderError(
            min(len(chain), len(spec)), str(spec), None,
            f"chain length {len(chain)} does not match order {spec} "
            f"({len(spec)} headers)",
        )
    for i, (entry, element) in enumerate(zip(chain, spec)):
        if entry.header_type != element.header_type:
            raise ChainOrderError(
                i, element.header_type, entry.header_type,
                f"order mismatch at index {i}: expected {element.header_type}, "
                f"found {entry.header_type}",
            )
        if element.param is not None:
            earlier = {e.header_type for e in chain[:i]}
            if element.param not in earlier:
                raise ChainOrderError(
                    i, element.param, None,
                    f"order mismatch at index {i}: {element} expects "
                    f"{element.param} earlier in the chain",
                )


def _accessors(kinds: dict[str, tuple[str, callable]]) -> dict[str, FieldAccessor]:
    return {
        name: FieldAccessor(name, kind, fn) for name, (kind, fn) in kinds.items()
    }


def standard_registry() -> Registry:
    """Registry of the framework's five header types.

    Predecessor sets generalize single-predecessor declarations so that
    extension headers chain: SRv6 may follow IPv6 or another SRv6 header,
    and TCP may sit under either.
    """
    reg = Registry()
    reg.register(HeaderDescriptor(
        header_type="EthHdr",
        size_rule=EthHdr.SIZE,
        permitted_predecessors=frozenset(),
        parameter_slot=None,
        protocol_number=None,
        linkage_accessor="ether_type",
        accessors=_accessors({
            "dst": (BYTES, lambda h: h.dst),
            "src": (BYTES, lambda h: h.src),
            "ether_type": (INT, lambda h: h.ether_type),
        }),
    ))
    reg.register(HeaderDescriptor(
        header_type="Ipv6Hdr",
        size_rule=Ipv6Hdr.SIZE,
        permitted_predecessors=frozenset({"EthHdr"}),
        parameter_slot=None,
        protocol_number=headers.ETHERTYPE_IPV6,
        linkage_accessor="next_header",
        accessors=_accessors({
            "version": (INT, lambda h: h.version),
            "traffic_class": (INT, lambda h: h.traffic_class),
            "flow_label": (INT, lambda h: h.flow_label),
            "payload_len": (INT, lambda h: h.payload_len),
            "next_header": (INT, lambda h: h.next_header),
            "hop_limit": (INT, lambda h: h.hop_limit),
            "src": (BYTES, lambda h: h.src),
            "dst": (BYTES, lambda h: h.dst),
        }),
    ))
    reg.register(HeaderDescriptor(
        header_type="Srv6RoutingHdr",
        size_rule=lambda h: Srv6RoutingHdr.MIN_SIZE + 8 * h.hdr_ext_len,
        permitted_predecessors=frozenset({"Ipv6Hdr", "Srv6RoutingHdr"}),
        parameter_slot=None,
        protocol_number=headers.PROTO_SRV6,
        linkage_accessor="next_header",
        accessors=_accessors({
            "next_header": (INT, lambda h: h.next_header),
            "hdr_ext_len": (INT, lambda h: h.hdr_ext_len),
            "routing_type": (INT, lambda h: h.routing_type),
            "segments_left": (INT, lambda h: h.segments_left),
            "last_entry": (INT, lambda h: h.last_entry),
            "flags": (INT, lambda h: h.flags),
            "tag": (INT, lambda h: h.tag),
        }),
    ))
    reg.register(HeaderDescriptor(
        header_type="TcpHdr",
        size_rule=lambda h: h.data_offset * 4,
        permitted_predecessors=frozenset({"Ipv6Hdr", "Srv6RoutingHdr"}),
        parameter_slot="Ipv6Hdr",
        protocol_number=headers.PROTO_TCP,
        linkage_accessor=None,
        accessors=_accessors({
            "src_port": (INT, lambda h: h.src_port),
            "dst_port": (INT, lambda h: h.dst_port),
            "seq": (INT, lambda h: h.seq),
            "ack": (INT, lambda h: h.ack),
            "data_offset": (INT, lambda h: h.data_offset),
            "flags": (INT, lambda h: h.flags),
            "window": (INT, lambda h: h.window),
            "checksum": (INT, lambda h: h.checksum),
            "urgent_ptr": (INT, lambda h: h.urgent_ptr),
        }),
    ))
    reg.register(HeaderDescriptor(
        header_type="Icmpv6PktTooBig",
        size_rule=lambda h: Icmpv6PktTooBig.MIN_SIZE + len(h.invoking_packet),
        permitted_predecessors=frozenset({"Ipv6Hdr"}),
        parameter_slot="Ipv6Hdr",
        protocol_number=headers.PROTO_ICMPV6,
        linkage_accessor=None,
        accessors=_accessors({
            "msg_type": (INT, lambda h: h.msg_type),
            "code": (INT, lambda h: h.code),
            "checksum": (INT, lambda h: h.checksum),
            "mtu": (INT, lambda h: h.mtu),
        }),
    ))
    return reg.freeze()
