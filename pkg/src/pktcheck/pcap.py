"""Classic pcap file I/O (the 24-byte-global-header format, not pcapng).

Files are written little-endian with magic 0xA1B2C3D4, version 2.4,
microsecond timestamps, and link type 1 (Ethernet). Reading accepts
either byte order, keyed off the magic. Record bytes and timestamps
round-trip exactly.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator

from .exceptions import PcapError

PCAP_MAGIC = 0xA1B2C3D4
VERSION_MAJOR = 2
VERSION_MINOR = 4
LINKTYPE_ETHERNET = 1
SNAPLEN = 65535

_GLOBAL_HDR = struct.Struct("<IHHiIII")
_GLOBAL_HDR_BE = struct.Struct(">IHHiIII")
_RECORD_HDR = struct.Struct("<IIII")
_RECORD_HDR_BE = struct.Struct(">IIII")


@dataclass
class PcapRecord:
    """One captured packet: microsecond timestamp plus raw bytes."""

    data: bytes
    ts_sec: int = 0
    ts_usec: int = 0


def _open(target, mode: str):
    if isinstance(target, (str, Path)):
        return open(target, mode), True
    return target, False


def write_pcap(target: str | Path | BinaryIO, records: Iterable[PcapRecord]) -> int:
    """Write records to a classic pcap file; returns the record count."""
    fobj, owned = _open(target, "wb")
    try:
        fobj.write(
            _GLOBAL_HDR.pack(
                PCAP_MAGIC, VERSION_MAJOR, VERSION_MINOR, 0, 0, SNAPLEN,
                LINKTYPE_ETHERNET,
            )
        )
        count = 0
        for record in records:
            fobj.write(
                _RECORD_HDR.pack(
                    record.ts_sec, record.ts_usec, len(record.data), len(record.data)
                )
            )
            fobj.write(record.data)
            count += 1
        return count
    finally:
        if owned:
            fobj.close()


def read_pcap(target: str | Path | BinaryIO) -> list[PcapRecord]:
    """Read every record of a classic pcap file (either byte order)."""
    return list(iter_pcap(target))


def iter_pcap(target: str | Path | BinaryIO) -> Iterator[PcapRecord]:
    fobj, owned = _open(target, "rb")
    try:
        head = fobj.read(_GLOBAL_HDR.size)
        if len(head) < _GLOBAL_HDR.size:
            raise PcapError("truncated pcap global header")
        magic_le = struct.unpack("<I", head[:4])[0]
        if magic_le == PCAP_MAGIC:
            ghdr, rhdr = _GLOBAL_HDR, _RECORD_HDR
        elif struct.unpack(">I", head[:4])[0] == PCAP_MAGIC:
            ghdr, rhdr = _GLOBAL_HDR_BE, _RECORD_HDR_BE
        else:
            raise PcapError(f"bad pcap magic 0x{magic_le:08X}")
        _, _, _, _, _, _, linktype = ghdr.unpack(head)
        if linktype != LINKTYPE_ETHERNET:
            raise PcapError(f"unsupported link type {linktype} (expected Ethernet)")
        index = 0
        while True:
            rec_head = fobj.read(rhdr.size)
            if not rec_head:
                return
            if len(rec_head) < rhdr.size:
                raise PcapError(f"truncated record header at record {index}")
            ts_sec, ts_usec, incl_len, orig_len = rhdr.unpack(rec_head)
            data = fobj.read(incl_len)
            if len(data) < incl_len:
                raise PcapError(
                    f"truncated record {index}: expected {incl_len} bytes, "
                    f"got {len(data)}"
                )
            yield PcapRecord(data=data, ts_sec=ts_sec, ts_usec=ts_usec)
            index += 1
    finally:
        if owned:
            fobj.close()


def pcap_bytes(records: Iterable[PcapRecord]) -> bytes:
    """Serialize records to in-memory pcap bytes (handy for comparisons)."""
    buf = io.BytesIO()
    write_pcap(buf, records)
    return buf.getvalue()
