"""TLB coherence for migrations, plus the conventional shootdown cost model.

When a migration starts or completes, the coherence module walks every core's
TLB and patches the copies of the affected entry in place, so no TLB is ever
invalidated on the migration path. Broadcasts are atomic with respect to trace
events (they run between accesses, never inside one) and idempotent.

The shootdown() path models what a conventional design pays instead: the entry
is dropped from every holding TLB and a fixed interrupt cost is charged per
initiating event.
"""
from __future__ import annotations

from typing import Optional

from .geometry import PhysicalFrame

BROADCAST_COST = 10
PER_CORE_ACK_COST = 1
SHOOTDOWN_COST = 4000


class CoherenceViolation(AssertionError):
    pass


class TlbCoherenceModule:
    def __init__(self, tlbs, broadcast_cost: int = BROADCAST_COST,
                 per_core_cost: int = PER_CORE_ACK_COST,
                 shootdown_cost: int = SHOOTDOWN_COST):
        self.tlbs = tlbs
        self.broadcast_cost = broadcast_cost
        self.per_core_cost = per_core_cost
        self.shootdown_cost = shootdown_cost
        self.start_broadcasts = 0
        self.complete_broadcasts = 0
        self.entry_updates = 0
        self.shootdown_events = 0
        self.shootdown_invalidations = 0

    def _ack_latency(self) -> int:
        return self.broadcast_cost + self.per_core_cost * len(self.tlbs)

    def broadcast_start(self, vpn: int, ua: int) -> int:
        """Set the ongoing flag in every TLB copy of the entry; returns latency."""
        self.start_broadcasts += 1
        for tlb in self.tlbs:
            entry = tlb.peek(vpn)
            if entry is not None:
                if not entry.ongoing:
                    self.entry_updates += 1
                entry.ongoing = True
        return self._ack_latency()

    def broadcast_complete(self, vpn: int, ua: int, ra: PhysicalFrame) -> int:
        """Install the new remap in every TLB copy and clear the ongoing flag."""
        self.complete_broadcasts += 1
        for tlb in self.tlbs:
            entry = tlb.peek(vpn)
            if entry is not None:
                entry.ra = ra
                entry.migrated = True
                entry.ongoing = False
                self.entry_updates += 1
        self._check_agreement(vpn, ra)
        return self._ack_latency()

    def _check_agreement(self, vpn: int, ra: PhysicalFrame) -> None:
        # invariant checked at every completion: no holder still sees the page
        # as in flight, and every holder agrees on the remapped frame
        for core, tlb in enumerate(self.tlbs):
            entry = tlb.peek(vpn)
            if entry is None:
                continue
            if entry.ongoing:
                raise CoherenceViolation(
                    f"core {core} TLB still marks vpn {vpn:#x} in flight after completion")
            if entry.ra != ra:
                raise CoherenceViolation(
                    f"core {core} TLB disagrees on remap for vpn {vpn:#x}: "
                    f"{entry.ra} vs {ra}")

    def shootdown(self, vpn: int) -> tuple[int, int]:
        """Conventional-path invalidation: (holders invalidated, cycle cost)."""
        self.shootdown_events += 1
        invalidated = 0
        for tlb in self.tlbs:
            if tlb.invalidate(vpn):
                invalidated += 1
        self.shootdown_invalidations += invalidated
        return invalidated, self.shootdown_cost
