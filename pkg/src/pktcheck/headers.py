"""Byte-level packet model: header structs, parse/emit, and the parsed chain.

Wire layouts follow Ethernet II, the 40-byte fixed IPv6 header, TCP,
ICMPv6 Packet Too Big (type 2, code 0), and the SRv6 Routing extension
header (routing type 4). All multi-byte integers are big-endian on the
wire and are decoded to host ints.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

from .exceptions import EmitError, ParseError

ETH_HDR_SIZE = 14
IPV6_HDR_SIZE = 40
IPV6_MIN_MTU = 1280

ETHERTYPE_IPV6 = 0x86DD
PROTO_TCP = 6
PROTO_SRV6 = 43
PROTO_ICMPV6 = 58
PROTO_NONE = 59

ICMPV6_PKT_TOO_BIG = 2
SRV6_ROUTING_TYPE = 4


def _need(buf, offset, n, what):
    if offset + n > len(buf):
        raise ParseError(
            f"truncated {what}: need {n} bytes at offset {offset}, "
            f"have {len(buf) - offset}"
        )


def _check_range(value, bits, what):
    if not 0 <= value < (1 << bits):
        raise EmitError(f"{what} out of range for {bits}-bit field: {value}")


@dataclass
class EthHdr:
    """Ethernet II header: dst MAC, src MAC, ethertype. 14 bytes."""

    dst: bytes
    src: bytes
    ether_type: int

    SIZE = ETH_HDR_SIZE

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["EthHdr", int]:
        _need(buf, offset, cls.SIZE, "Ethernet header")
        dst = bytes(buf[offset : offset + 6])
        src = bytes(buf[offset + 6 : offset + 12])
        (ether_type,) = struct.unpack_from("!H", buf, offset + 12)
        return cls(dst, src, ether_type), cls.SIZE

    def emit(self) -> bytes:
        if len(self.dst) != 6 or len(self.src) != 6:
            raise EmitError("MAC addresses must be 6 bytes")
        _check_range(self.ether_type, 16, "ether_type")
        return self.dst + self.src + struct.pack("!H", self.ether_type)


@dataclass
class Ipv6Hdr:
    """Fixed 40-byte IPv6 header. ``payload_len`` counts every byte after it."""

    src: bytes
    dst: bytes
    payload_len: int
    next_header: int
    hop_limit: int
    version: int = 6
    traffic_class: int = 0
    flow_label: int = 0

    SIZE = IPV6_HDR_SIZE

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["Ipv6Hdr", int]:
        _need(buf, offset, cls.SIZE, "IPv6 header")
        v_tc_fl, payload_len, next_header, hop_limit = struct.unpack_from(
            "!IHBB", buf, offset
        )
        version = v_tc_fl >> 28
        if version != 6:
            raise ParseError(f"IPv6 version nibble is {version}, expected 6")
        hdr = cls(
            src=bytes(buf[offset + 8 : offset + 24]),
            dst=bytes(buf[offset + 24 : offset + 40]),
            payload_len=payload_len,
            next_header=next_header,
            hop_limit=hop_limit,
            version=version,
            traffic_class=(v_tc_fl >> 20) & 0xFF,
            flow_label=v_tc_fl & 0xFFFFF,
        )
        return hdr, cls.SIZE

    def emit(self) -> bytes:
        if self.version != 6:
            raise EmitError(f"IPv6 version must be 6, got {self.version}")
        _check_range(self.traffic_class, 8, "traffic_class")
        _check_range(self.flow_label, 20, "flow_label")
        _check_range(self.payload_len, 16, "payload_len")
        _check_range(self.next_header, 8, "next_header")
        _check_range(self.hop_limit, 8, "hop_limit")
        if len(self.src) != 16 or len(self.dst) != 16:
            raise EmitError("IPv6 addresses must be 16 bytes")
        v_tc_fl = (self.version << 28) | (self.traffic_class << 20) | self.flow_label
        return (
            struct.pack(
                "!IHBB", v_tc_fl, self.payload_len, self.next_header, self.hop_limit
            )
            + self.src
            + self.dst
        )


@dataclass
class TcpHdr:
    """TCP header over IPv6. Options are carried as opaque bytes.

    ``flags`` is the 9-bit NS..FIN block; ``data_offset`` is the header
    length in 32-bit words, so the serialized size is data_offset * 4.
    """

    src_port: int
    dst_port: int
    seq: int
    ack: int
    data_offset: int
    flags: int
    window: int
    checksum: int
    urgent_ptr: int
    options: bytes = b""

    MIN_SIZE = 20

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["TcpHdr", int]:
        _need(buf, offset, cls.MIN_SIZE, "TCP header")
        src_port, dst_port, seq, ack, off_flags, window, checksum, urgent = (
            struct.unpack_from("!HHIIHHHH", buf, offset)
        )
        data_offset = off_flags >> 12
        if data_offset < 5:
            raise ParseError(f"TCP data offset {data_offset} below minimum 5")
        size = data_offset * 4
        _need(buf, offset, size, "TCP header with options")
        return (
            cls(
                src_port=src_port,
                dst_port=dst_port,
                seq=seq,
                ack=ack,
                data_offset=data_offset,
                flags=off_flags & 0x1FF,
                window=window,
                checksum=checksum,
                urgent_ptr=urgent,
                options=bytes(buf[offset + cls.MIN_SIZE : offset + size]),
            ),
            size,
        )

    def emit(self) -> bytes:
        _check_range(self.src_port, 16, "src_port")
        _check_range(self.dst_port, 16, "dst_port")
        _check_range(self.seq, 32, "seq")
        _check_range(self.ack, 32, "ack")
        _check_range(self.data_offset, 4, "data_offset")
        _check_range(self.flags, 9, "flags")
        _check_range(self.window, 16, "window")
        _check_range(self.checksum, 16, "checksum")
        _check_range(self.urgent_ptr, 16, "urgent_ptr")
        if self.data_offset < 5:
            raise EmitError(f"TCP data offset {self.data_offset} below minimum 5")
        if self.data_offset * 4 != self.MIN_SIZE + len(self.options):
            raise EmitError(
                f"TCP data offset {self.data_offset} disagrees with "
                f"{len(self.options)} option bytes"
            )
        return (
            struct.pack(
                "!HHIIHHHH",
                self.src_port,
                self.dst_port,
                self.seq,
                self.ack,
                (self.data_offset << 12) | self.flags,
                self.window,
                self.checksum,
                self.urgent_ptr,
            )
            + self.options
        )


@dataclass
class Icmpv6PktTooBig:
    """ICMPv6 Packet Too Big message: type 2, code 0, 32-bit MTU, then as
    much of the invoking packet as fits the minimum-MTU reply budget."""

    checksum: int
    mtu: int
    invoking_packet: bytes
    msg_type: int = ICMPV6_PKT_TOO_BIG
    code: int = 0

    MIN_SIZE = 8

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["Icmpv6PktTooBig", int]:
        _need(buf, offset, cls.MIN_SIZE, "ICMPv6 Packet Too Big header")
        msg_type, code, checksum, mtu = struct.unpack_from("!BBHI", buf, offset)
        if msg_type != ICMPV6_PKT_TOO_BIG or code != 0:
            raise ParseError(
                f"not an ICMPv6 Packet Too Big message: type {msg_type}, code {code}"
            )
        size = len(buf) - offset
        return (
            cls(
                checksum=checksum,
                mtu=mtu,
                invoking_packet=bytes(buf[offset + cls.MIN_SIZE :]),
                msg_type=msg_type,
                code=code,
            ),
            size,
        )

    def emit(self) -> bytes:
        if self.msg_type != ICMPV6_PKT_TOO_BIG or self.code != 0:
            raise EmitError(
                f"Packet Too Big requires type 2 code 0, "
                f"got type {self.msg_type} code {self.code}"
            )
        _check_range(self.checksum, 16, "checksum")
        _check_range(self.mtu, 32, "mtu")
        if self.MIN_SIZE + len(self.invoking_packet) > IPV6_MIN_MTU - IPV6_HDR_SIZE:
            raise EmitError(
                "Packet Too Big body exceeds the minimum-MTU reply budget of "
                f"{IPV6_MIN_MTU - IPV6_HDR_SIZE} bytes"
            )
        return (
            struct.pack("!BBHI", self.msg_type, self.code, self.checksum, self.mtu)
            + self.invoking_packet
        )


@dataclass
class Srv6RoutingHdr:
    """IPv6 Segment Routing header (routing type 4).

    Serialized size is 8 + 8 * hdr_ext_len; the segment list holds
    last_entry + 1 addresses of 16 bytes each, so hdr_ext_len is twice
    the segment count.
    """

    next_header: int
    segments_left: int
    segments: list[bytes]
    flags: int = 0
    tag: int = 0
    routing_type: int = SRV6_ROUTING_TYPE

    MIN_SIZE = 8

    @property
    def hdr_ext_len(self) -> int:
        return 2 * len(self.segments)

    @property
    def last_entry(self) -> int:
        return len(self.segments) - 1

    @classmethod
    def parse(cls, buf: bytes, offset: int = 0) -> tuple["Srv6RoutingHdr", int]:
        _need(buf, offset, cls.MIN_SIZE, "SRv6 routing header")
        next_header, hdr_ext_len, routing_type, segments_left, last_entry, flags, tag = (
            struct.unpack_from("!BBBBBBH", buf, offset)
        )
        if routing_type != SRV6_ROUTING_TYPE:
            raise ParseError(
                f"routing type {routing_type}, expected {SRV6_ROUTING_TYPE} (SRv6)"
            )
        if hdr_ext_len < 2 or hdr_ext_len % 2:
            raise ParseError(
                f"SRv6 header extension length {hdr_ext_len} cannot hold "
                "16-byte segments"
            )
        size = cls.MIN_SIZE + 8 * hdr_ext_len
        _need(buf, offset, size, "SRv6 routing header segments")
        n_segments = hdr_ext_len // 2
        if last_entry != n_segments - 1:
            raise ParseError(
                f"SRv6 last entry {last_entry} disagrees with "
                f"{n_segments} segments"
            )
        if segments_left > last_entry + 1:
            raise ParseError(
                f"SRv6 segments left {segments_left} exceeds "
                f"segment count {n_segments}"
            )
        base = offset + cls.MIN_SIZE
        segments = [bytes(buf[base + 16 * i : base + 16 * (i + 1)]) for i in range(n_segments)]
        return (
            cls(
                next_header=next_header,
                segments_left=segments_left,
                segments=segments,
                flags=flags,
                tag=tag,
                routing_type=routing_type,
            ),
            size,
        )

    def emit(self) -> bytes:
        if self.routing_type != SRV6_ROUTING_TYPE:
            raise EmitError(f"routing type must be {SRV6_ROUTING_TYPE}")
        if not self.segments:
            raise EmitError("SRv6 routing header requires at least one segment")
        if any(len(s) != 16 for s in self.segments):
            raise EmitError("SRv6 segments must be 16-byte addresses")
        _check_range(self.next_header, 8, "next_header")
        _check_range(self.hdr_ext_len, 8, "hdr_ext_len")
        _check_range(self.last_entry, 8, "last_entry")
        _check_range(self.segments_left, 8, "segments_left")
        _check_range(self.flags, 8, "flags")
        _check_range(self.tag, 16, "tag")
        if self.segments_left > self.last_entry + 1:
            raise EmitError(
                f"segments left {self.segments_left} exceeds "
                f"segment count {len(self.segments)}"
            )
        return (
            struct.pack(
                "!BBBBBBH",
                self.next_header,
                self.hdr_ext_len,
                self.routing_type,
                self.segments_left,
                self.last_entry,
                self.flags,
                self.tag,
            )
            + b"".join(self.segments)
        )


HEADER_TYPES = {
    "EthHdr": EthHdr,
    "Ipv6Hdr": Ipv6Hdr,
    "TcpHdr": TcpHdr,
    "Icmpv6PktTooBig": Icmpv6PktTooBig,
    "Srv6RoutingHdr": Srv6RoutingHdr,
}


@dataclass
class ChainEntry:
    """One parsed header's position in a packet."""

    header_type: str
    occurrence: int
    offset: int
    length: int


@dataclass
class Packet:
    """An owned byte buffer plus the chain of headers parsed out of it.

    A fresh packet is unparsed: empty chain, ``payload_offset == 0``.
    Parsing appends chain entries and advances ``payload_offset`` past the
    last parsed header. Decoding never mutates the buffer; in-place
    mutation goes through :meth:`set_header` / :meth:`set_field`, which
    re-encode a header of unchanged size over its slice.
    """

    data: bytearray
    chain: list[ChainEntry] = field(default_factory=list)
    payload_offset: int = 0

    @classmethod
    def from_bytes(cls, data: bytes) -> "Packet":
        return cls(data=bytearray(data))

    def __len__(self) -> int:
        return len(self.data)

    def reset_chain(self) -> None:
        self.chain.clear()
        self.payload_offset = 0

    def parse_header(self, header_type: str, at_offset: int | None = None):
        """Decode one header at ``at_offset`` (default: current payload
        offset), append its chain entry, and return (header, consumed)."""
        cls = HEADER_TYPES.get(header_type)
        if cls is None:
            raise ParseError(f"unknown header type {header_type!r}")
        offset = self.payload_offset if at_offset is None else at_offset
        header, consumed = cls.parse(self.data, offset)
        occurrence = sum(1 for e in self.chain if e.header_type == header_type)
        self.chain.append(ChainEntry(header_type, occurrence, offset, consumed))
        self.payload_offset = offset + consumed
        return header, consumed

    def find(self, header_type: str, occurrence: int = 0) -> ChainEntry | None:
        for entry in self.chain:
            if entry.header_type == header_type and entry.occurrence == occurrence:
                return entry
        return None

    def decode(self, entry: ChainEntry):
        """Re-decode the header value at a chain entry from the buffer."""
        header, _ = HEADER_TYPES[entry.header_type].parse(self.data, entry.offset)
        return header

    def header(self, header_type: str, occurrence: int = 0):
        entry = self.find(header_type, occurrence)
        if entry is None:
            raise ParseError(
                f"{header_type}#{occurrence} is not in the parsed chain"
            )
        return self.decode(entry)

    def set_header(self, entry: ChainEntry, header) -> None:
        """Re-encode ``header`` in place over the entry's byte slice.

        The serialized size must match the entry; size-changing edits
        require rebuilding the packet.
        """
        encoded = header.emit()
        if len(encoded) != entry.length:
            raise EmitError(
                f"in-place update of {entry.header_type} would change its size "
                f"({entry.length} -> {len(encoded)} bytes)"
            )
        self.data[entry.offset : entry.offset + entry.length] = encoded

    def set_field(self, header_type: str, occurrence: int, field_name: str, value) -> None:
        entry = self.find(header_type, occurrence)
        if entry is None:
            raise ParseError(f"{header_type}#{occurrence} is not in the parsed chain")
        self.set_header(entry, replace(self.decode(entry), **{field_name: value}))

    def payload(self) -> bytes:
        """Bytes past the last parsed header."""
        return bytes(self.data[self.payload_offset :])

    def check_chain_invariants(self) -> None:
        """Raise if chain offsets overlap, run backwards, or overrun the buffer."""
        cursor = 0
        for entry in self.chain:
            if entry.offset < cursor:
                raise ParseError(
                    f"chain entry {entry.header_type} at {entry.offset} "
                    f"overlaps the previous header (expected >= {cursor})"
                )
            if entry.offset + entry.length > len(self.data):
                raise ParseError(
                    f"chain entry {entry.header_type} overruns the buffer"
                )
            cursor = entry.offset + entry.length
        if self.chain and self.payload_offset != cursor:
            raise ParseError(
                f"payload offset {self.payload_offset} disagrees with the "
                f"chain end {cursor}"
            )
