#!/usr/bin/env python3
"""Snapshot-relative checks: catching a stale length field.

`srv6-change-pkt` appends one segment to an SRv6 routing header. Three
fields must track that change together: the IPv6 payload length (+16),
the routing header's own length (+2 units of 8 bytes), and its last-entry
index (+1). The egress contract states each delta relative to the ingress
snapshot, so a transform that updates the structure but forgets the
IPv6 length is caught on every packet.
"""

from pktcheck import (
    GeneratorSpec,
    explain_contract,
    generate_records,
    make_nf,
    run_records,
)
from pktcheck.registry import standard_registry


def main() -> None:
    registry = standard_registry()
    records = generate_records(
        GeneratorSpec(count=5, template="srv6", payload_len=(24, 200), seed=6)
    )

    print("== the contract: every rhs below reads the snapshot ==")
    nf = make_nf("srv6-change-pkt", registry)
    print(explain_contract(nf.contract))

    print("== correct transform: all deltas hold ==")
    summary = run_records(nf, records, registry)
    for before, after in zip(records, summary.out_records):
        old_len = int.from_bytes(before.data[18:20], "big")
        new_len = int.from_bytes(after.data[18:20], "big")
        print(f"  payload_len {old_len:3d} -> {new_len:3d}   "
              f"hdr_ext_len {before.data[55]} -> {after.data[55]}   "
              f"last_entry {before.data[58]} -> {after.data[58]}")
    print(f"  violations: {len(summary.violations)}")

    print("\n== mutant that forgets the IPv6 payload length ==")
    mutant = make_nf("srv6-change-pkt", registry, omit_payload_len_update=True)
    summary = run_records(mutant, records, registry)
    for violation in summary.violations:
        print(f"  {violation.text()}")
    caught = {v.packet_index for v in summary.violations}
    print(f"  -> caught on {len(caught)} of {len(records)} packets")


if __name__ == "__main__":
    main()
