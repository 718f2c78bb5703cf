"""Internet checksum arithmetic (RFC 1071) and the IPv6 pseudo-header rule."""

from __future__ import annotations

import struct

from .exceptions import EmitError

TCP_PROTO = 6
ICMPV6_PROTO = 58


def internet_checksum(data: bytes) -> int:
    """One's-complement of the one's-complement 16-bit sum of ``data``.

    Odd-length input is padded with a trailing zero byte for summation.
    A result of 0xFFFF (zero sum) is returned as-is.
    """
    if len(data) % 2:
        data = data + b"\x00"
    total = sum(struct.unpack(f"!{len(data) // 2}H", data))
    total = (total & 0xFFFF) + (total >> 16)
    total += total >> 16
    return ~total & 0xFFFF


def pseudo_header_checksum(
    src: bytes, dst: bytes, upper_len: int, next_header: int, upper_layer_bytes: bytes
) -> int:
    """Checksum over the IPv6 pseudo-header followed by the upper-layer bytes.

    The pseudo-header is src | dst | 32-bit upper-layer length | 3 zero
    bytes | next-header. The checksum field inside ``upper_layer_bytes``
    must already be zeroed by the caller.
    """
    if len(src) != 16 or len(dst) != 16:
        raise EmitError("pseudo-header addresses must be 16 bytes")
    if upper_len != len(upper_layer_bytes):
        raise EmitError(
            f"upper-layer length mismatch: declared {upper_len}, "
            f"got {len(upper_layer_bytes)} bytes"
        )
    pseudo = src + dst + struct.pack("!I3xB", upper_len, next_header)
    return internet_checksum(pseudo + upper_layer_bytes)
