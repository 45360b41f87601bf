"""Extended page table and per-core extended TLBs.

Every valid entry maps a virtual page to its stable unified page id (UA) plus
the remap state: an optional remapped frame, and the migrated / ongoing /
pair / buffer-residency flags. TLB entries are copies of the page-table fields
(minus pair and residency, which only the page table keeps); the coherence
module is responsible for keeping the copies in sync when migrations start and
complete.

Cache lookups use the UA exclusively. The remapped frame is consulted only on
the memory side of an LLC miss, and only when the migrated flag is set.
"""
from __future__ import annotations

import heapq
from collections import OrderedDict
from typing import Callable, NamedTuple, Optional

from .geometry import MemoryGeometry, PhysicalFrame, Tier, default_frame_of

TLB_ENTRIES_DEFAULT = 4096


class PageFaultError(Exception):
    """Raised by ept_lookup when no valid entry exists for a vpn."""

    def __init__(self, vpn: int):
        super().__init__(f"no valid mapping for vpn {vpn:#x}")
        self.vpn = vpn


class StateError(RuntimeError):
    pass


class ConflictError(RuntimeError):
    pass


class CapacityError(RuntimeError):
    pass


class EptEntry:
    __slots__ = ("vpn", "ua", "valid", "dirty", "ra", "migrated", "ongoing",
                 "pair", "residency", "last_access_cycle")

    def __init__(self, vpn: int, ua: int):
        self.vpn = vpn
        self.ua = ua
        self.valid = True
        self.dirty = False
        self.ra: Optional[PhysicalFrame] = None
        self.migrated = False
        self.ongoing = False
        self.pair = False
        self.residency = 0
        self.last_access_cycle = 0

    def flag_tuple(self) -> tuple[int, int, int, int]:
        """(migrated, ongoing, pair, residency) in table order."""
        return (int(self.migrated), int(self.ongoing), int(self.pair), self.residency)

    def __repr__(self):
        return (f"EptEntry(vpn={self.vpn:#x}, ua={self.ua}, ra={self.ra}, "
                f"flags={self.flag_tuple()})")


class TlbEntry:
    __slots__ = ("vpn", "ua", "ra", "migrated", "ongoing", "dirty")

    def __init__(self, vpn: int, ua: int, ra: Optional[PhysicalFrame],
                 migrated: bool, ongoing: bool):
        self.vpn = vpn
        self.ua = ua
        self.ra = ra
        self.migrated = migrated
        self.ongoing = ongoing
        self.dirty = False


class Tlb:
    """Fully associative, LRU replacement, one per core."""

    def __init__(self, capacity: int = TLB_ENTRIES_DEFAULT):
        if capacity <= 0:
            raise ValueError("TLB capacity must be positive")
        self.capacity = capacity
        self.entries: OrderedDict[int, TlbEntry] = OrderedDict()
        self.hits = 0
        self.misses = 0

    def lookup(self, vpn: int) -> Optional[TlbEntry]:
        entry = self.entries.get(vpn)
        if entry is None:
            self.misses += 1
            return None
        self.entries.move_to_end(vpn)
        self.hits += 1
        return entry

    def peek(self, vpn: int) -> Optional[TlbEntry]:
        """Lookup without touching recency or counters (coherence traffic)."""
        return self.entries.get(vpn)

    def fill(self, entry: TlbEntry) -> None:
        if entry.vpn in self.entries:
            self.entries.move_to_end(entry.vpn)
            self.entries[entry.vpn] = entry
            return
        if len(self.entries) >= self.capacity:
            self.entries.popitem(last=False)
        self.entries[entry.vpn] = entry

    def invalidate(self, vpn: int) -> bool:
        return self.entries.pop(vpn, None) is not None


# Memory-side targets produced by resolve_memory_target / intercept_access.

class FrameAccess(NamedTuple):
    frame: PhysicalFrame
    line: int


class BufferAccess(NamedTuple):
    residency: int  # 1 = hot buffer, 0 = cold buffer
    line: int


class StallUntilBuffered(NamedTuple):
    ready_at: int
    line: int


class TranslateOutcome(NamedTuple):
    ua: int
    tlb_hit: bool
    entry: EptEntry


class TranslationState:
    """Page table, per-core TLBs, UA allocation, and fault handling."""

    def __init__(self, geom: MemoryGeometry, cores: int,
                 tlb_entries: int = TLB_ENTRIES_DEFAULT):
        self.geom = geom
        self.ept: dict[int, EptEntry] = {}
        self.tlbs = [Tlb(tlb_entries) for _ in range(cores)]
        self.ua_to_vpn: dict[int, int] = {}
        self._free_uas: list[int] = []      # min-heap, allocated ascending
        self._next_ua = 0                   # lazily extends the free pool
        self._burned_uas: set[int] = set()  # see reserve_ua
        self.fast_resident: set[int] = set()  # vpns whose effective frame is fast
        self.page_walks = 0
        self.page_faults = 0
        self.fault_tlb_invalidations = 0
        self.fault_victim_writebacks = 0
        # wired by the engine: coherence module and fault-eviction callback
        self.tcm = None
        self.on_evict_page: Optional[Callable[[EptEntry], None]] = None
        self.fault_victim_filter: Optional[Callable[[int], bool]] = None

    # -- lookups ---------------------------------------------------------

    def tlb_lookup(self, core: int, vpn: int) -> Optional[TlbEntry]:
        return self.tlbs[core].lookup(vpn)

    def ept_lookup(self, vpn: int) -> EptEntry:
        self.page_walks += 1
        entry = self.ept.get(vpn)
        if entry is None or not entry.valid:
            raise PageFaultError(vpn)
        return entry

    def tlb_fill_from(self, core: int, entry: EptEntry) -> TlbEntry:
        copy = TlbEntry(entry.vpn, entry.ua, entry.ra, entry.migrated, entry.ongoing)
        self.tlbs[core].fill(copy)
        return copy

    def translate_for_cache(self, core: int, vpn: int) -> TranslateOutcome:
        """Normal translation: UA for cache indexing, filling the TLB on a walk.

        Never returns a physical frame; the remap side is resolved separately
        and only on an LLC miss.
        """
        cached = self.tlb_lookup(core, vpn)
        if cached is not None:
            entry = self.ept[vpn]
            return TranslateOutcome(cached.ua, True, entry)
        entry = self.ept_lookup(vpn)  # raises PageFaultError if unmapped
        self.tlb_fill_from(core, entry)
        return TranslateOutcome(entry.ua, False, entry)

    def effective_frame(self, entry: EptEntry) -> PhysicalFrame:
        if entry.migrated:
            assert entry.ra is not None
            return entry.ra
        return default_frame_of(entry.ua, self.geom)

    # -- mapping / faults ------------------------------------------------

    def reserve_ua(self, ua: int) -> None:
        """Withdraw an unallocated ua from the free pool.

        Needed when a one-way migration claims a free fast frame: the frame's
        default ua must never be handed to a faulting page afterwards, or two
        pages would share the frame.
        """
        self._burned_uas.add(ua)

    def _alloc_ua(self) -> Optional[int]:
        while self._free_uas:
            ua = heapq.heappop(self._free_uas)
            if ua not in self.ua_to_vpn and ua not in self._burned_uas:
                return ua
        while self._next_ua < self.geom.total_pages:
            ua = self._next_ua
            self._next_ua += 1
            # explicit map_page(ua=...) calls can outrun the lazy counter
            if ua not in self._burned_uas and ua not in self.ua_to_vpn:
                return ua
        return None

    def map_page(self, vpn: int, ua: Optional[int] = None, now: int = 0) -> EptEntry:
        """Create a valid entry for vpn at the given (or next free) UA."""
        existing = self.ept.get(vpn)
        if existing is not None and existing.valid:
            raise ConflictError(f"vpn {vpn:#x} already mapped")
        if ua is None:
            ua = self._alloc_ua()
            if ua is None:
                raise CapacityError("no free unified page ids")
        elif ua in self.ua_to_vpn:
            raise ConflictError(f"ua {ua} already in use")
        entry = EptEntry(vpn, ua)
        entry.last_access_cycle = now
        self.ept[vpn] = entry
        self.ua_to_vpn[ua] = vpn
        if default_frame_of(ua, self.geom).tier is Tier.FAST:
            self.fast_resident.add(vpn)
        return entry

    def handle_page_fault(self, vpn: int, now: int) -> EptEntry:
        """Allocate a mapping for vpn, evicting the LRU resident page if full.

        The evicted page loses its page-table entry, every TLB copy, and (via
        the engine-wired callback) its cached lines. The new entry takes over
        the victim's UA and inherits its effective frame, so the page lands
        where the victim lived.
        """
        existing = self.ept.get(vpn)
        if existing is not None and existing.valid:
            return existing  # back-to-back fault on the same vpn: already served
        self.page_faults += 1
        ua = self._alloc_ua()
        if ua is not None:
            return self.map_page(vpn, ua, now)

        victim = self._pick_fault_victim()
        if victim is None:
            raise CapacityError("memory full and no evictable page")
        inherited_ra, inherited_migrated = victim.ra, victim.migrated
        victim_ua = victim.ua
        self._evict(victim)
        entry = EptEntry(vpn, victim_ua)
        entry.last_access_cycle = now
        entry.ra = inherited_ra
        entry.migrated = inherited_migrated
        self.ept[vpn] = entry
        self.ua_to_vpn[victim_ua] = vpn
        if self.effective_frame(entry).tier is Tier.FAST:
            self.fast_resident.add(vpn)
        return entry

    def _pick_fault_victim(self) -> Optional[EptEntry]:
        best = None
        for entry in self.ept.values():
            if not entry.valid or entry.ongoing:
                continue
            if self.fault_victim_filter is not None and not self.fault_victim_filter(entry.vpn):
                continue
            if best is None or (entry.last_access_cycle, entry.vpn) < (best.last_access_cycle, best.vpn):
                best = entry
        return best

    def _evict(self, entry: EptEntry) -> None:
        if entry.dirty:
            self.fault_victim_writebacks += 1
        entry.valid = False
        del self.ept[entry.vpn]
        del self.ua_to_vpn[entry.ua]
        self.fast_resident.discard(entry.vpn)
        for tlb in self.tlbs:
            if tlb.invalidate(entry.vpn):
                self.fault_tlb_invalidations += 1
        if self.on_evict_page is not None:
            self.on_evict_page(entry)

    # -- migration-side flag transitions ---------------------------------

    def mark_migration_start(self, vpn: int, pair: bool, residency: int) -> int:
        """Set the in-flight flags on an entry and broadcast to TLB holders.

        Returns the coherence ack latency (simulated time, not core cycles).
        """
        entry = self.ept.get(vpn)
        if entry is None or not entry.valid:
            raise StateError(f"cannot start migration for unmapped vpn {vpn:#x}")
        if entry.ongoing:
            raise ConflictError(f"vpn {vpn:#x} already has a migration in flight")
        entry.ongoing = True
        entry.pair = pair
        entry.residency = residency
        if self.tcm is not None:
            return self.tcm.broadcast_start(vpn, entry.ua)
        return 0

    def set_remap_address(self, vpn: int, ra: PhysicalFrame) -> None:
        """Record the destination frame while the move is still in flight."""
        entry = self.ept[vpn]
        entry.ra = ra

    def mark_migration_complete(self, vpn: int, ra: PhysicalFrame, pair: bool) -> int:
        """Final flag flip at job retirement; broadcasts the new mapping."""
        entry = self.ept.get(vpn)
        if entry is None or not entry.valid:
            raise StateError(f"cannot complete migration for unmapped vpn {vpn:#x}")
        # legitimate completions either carry the in-flight flag or are the
        # quiet half of a first-time pair, recognizable by the ra staged on it
        # mid-flight
        if not entry.ongoing and not (pair and not entry.migrated and entry.ra == ra):
            raise StateError(f"no migration in flight for vpn {vpn:#x}")
        entry.ra = ra
        entry.migrated = True
        entry.ongoing = False
        entry.pair = pair
        entry.residency = 0
        if ra.tier is Tier.FAST:
            self.fast_resident.add(vpn)
        else:
            self.fast_resident.discard(vpn)
        if self.tcm is not None:
            return self.tcm.broadcast_complete(vpn, entry.ua, ra)
        return 0

    def resident_pages(self) -> int:
        return len(self.ept)


def resolve_memory_target(entry: EptEntry, line: int, geom: MemoryGeometry, job=None):
    """Memory-side address decision for one line of a quiesced or in-flight page.

    For a page with no migration in flight this is pure flag dispatch: the
    remapped frame iff migrated, the UA's home frame otherwise. For a page
    belonging to an active job, the job's line-location answer is authoritative
    (destination frame once the line's bit is set, owning buffer while staged,
    otherwise the source frame for an incoming page or a stall for a victim
    line that has not reached the hot buffer yet).
    """
    if job is not None and job.involves_vpn(entry.vpn):
        return job.line_target(entry.vpn, line)
    if entry.migrated:
        return FrameAccess(entry.ra, line)
    return FrameAccess(default_frame_of(entry.ua, geom), line)
