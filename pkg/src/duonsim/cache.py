"""Inclusive two-level cache hierarchy tagged by unified page ids.

Private L1s (one per core) in front of one shared LLC. Line addresses are
UA-based (ua * lines_per_page + line), which is the whole point of the flat
address space: page migration never changes a tag, so nothing here is ever
invalidated on the migration path. Accesses are blocking; lines carry their
current 64-bit value so the functional oracle can check every read.
"""
from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass

# record layout inside a set: line_addr -> [dirty, value]


@dataclass(frozen=True)
class CacheConfig:
    l1_size: int = 32 * 1024
    l1_assoc: int = 4
    l1_latency: int = 2
    llc_size: int = 16 * 1024 * 1024
    llc_assoc: int = 16
    llc_latency: int = 21
    line_size: int = 64

    def __post_init__(self):
        if self.line_size <= 0 or self.line_size & (self.line_size - 1):
            raise ValueError(f"line_size must be a power of two, got {self.line_size}")
        for prefix in ("l1", "llc"):
            size = getattr(self, f"{prefix}_size")
            assoc = getattr(self, f"{prefix}_assoc")
            lat = getattr(self, f"{prefix}_latency")
            if assoc <= 0 or size <= 0:
                raise ValueError(f"{prefix} size/assoc must be positive")
            if size % (assoc * self.line_size):
                raise ValueError(f"{prefix}_size {size} not divisible by assoc*line_size")
            if lat < 0:
                raise ValueError(f"{prefix}_latency must be >= 0")


class SetAssocCache:
    def __init__(self, size: int, assoc: int, line_size: int):
        self.assoc = assoc
        self.num_sets = size // (assoc * line_size)
        self.sets: dict[int, OrderedDict] = {}

    def lookup(self, line_addr: int):
        s = self.sets.get(line_addr % self.num_sets)
        if s is None:
            return None
        rec = s.get(line_addr)
        if rec is not None:
            s.move_to_end(line_addr)
        return rec

    def peek(self, line_addr: int):
        s = self.sets.get(line_addr % self.num_sets)
        return s.get(line_addr) if s is not None else None

    def insert(self, line_addr: int, dirty: bool, value: int):
        """Install a line, returning (line_addr, dirty, value) of any LRU victim."""
        idx = line_addr % self.num_sets
        s = self.sets.get(idx)
        if s is None:
            s = self.sets[idx] = OrderedDict()
        if line_addr in s:
            s.move_to_end(line_addr)
            s[line_addr] = [dirty, value]
            return None
        evicted = None
        if len(s) >= self.assoc:
            ev_addr, ev_rec = s.popitem(last=False)
            evicted = (ev_addr, ev_rec[0], ev_rec[1])
        s[line_addr] = [dirty, value]
        return evicted

    def invalidate(self, line_addr: int):
        s = self.sets.get(line_addr % self.num_sets)
        if s is None:
            return None
        return s.pop(line_addr, None)

    def valid_lines(self) -> int:
        return sum(len(s) for s in self.sets.values())


class CacheHierarchy:
    def __init__(self, cfg: CacheConfig, cores: int, lines_per_page: int):
        self.cfg = cfg
        self.lines_per_page = lines_per_page
        self.l1s = [SetAssocCache(cfg.l1_size, cfg.l1_assoc, cfg.line_size)
                    for _ in range(cores)]
        self.llc = SetAssocCache(cfg.llc_size, cfg.llc_assoc, cfg.line_size)
        self.l1_hits = [0] * cores
        self.l1_misses = [0] * cores
        self.llc_hits = [0] * cores
        self.llc_misses = [0] * cores
        # invalidation attribution, kept separate on purpose
        self.invalidations_migration = 0
        self.invalidations_fault = 0

    def probe(self, core: int, line_addr: int):
        """Walk L1 then LLC, counting. Returns ('l1'|'llc', record) or ('miss', None)."""
        rec = self.l1s[core].lookup(line_addr)
        if rec is not None:
            self.l1_hits[core] += 1
            return "l1", rec
        self.l1_misses[core] += 1
        rec = self.llc.lookup(line_addr)
        if rec is not None:
            self.llc_hits[core] += 1
            return "llc", rec
        self.llc_misses[core] += 1
        return "miss", None

    def fill(self, core: int, line_addr: int, value: int):
        """Install a line into LLC (if absent) and the core's L1.

        Returns [(line_addr, value)] writebacks that must go to memory: dirty
        LLC victims, merged with any dirtier L1 copy found on back-invalidation.
        """
        writebacks = []
        if self.llc.peek(line_addr) is None:
            evicted = self.llc.insert(line_addr, False, value)
            if evicted is not None:
                ev_addr, ev_dirty, ev_value = evicted
                # inclusive: purge every L1 copy, freshest dirty data wins
                for l1 in self.l1s:
                    rec = l1.invalidate(ev_addr)
                    if rec is not None and rec[0]:
                        ev_dirty, ev_value = True, rec[1]
                if ev_dirty:
                    writebacks.append((ev_addr, ev_value))
        ev1 = self.l1s[core].insert(line_addr, False, value)
        if ev1 is not None:
            ev_addr, ev_dirty, ev_value = ev1
            if ev_dirty:
                llc_rec = self.llc.peek(ev_addr)
                assert llc_rec is not None, "inclusion violated on L1 writeback"
                llc_rec[0] = True
                llc_rec[1] = ev_value
        return writebacks

    def write_l1(self, core: int, line_addr: int, value: int) -> None:
        rec = self.l1s[core].peek(line_addr)
        assert rec is not None, "write_l1 on a line that is not resident"
        rec[0] = True
        rec[1] = value

    def invalidate_page_lines(self, ua: int, reason: str):
        """Drop every cached line of a page. Returns (invalidated, writebacks).

        writebacks is [(line, value)] for lines that were dirty somewhere; an
        L1 copy's data supersedes the LLC copy of the same line.
        """
        base = ua * self.lines_per_page
        invalidated = 0
        writebacks = []
        for line in range(self.lines_per_page):
            la = base + line
            dirty_value = None
            for l1 in self.l1s:
                rec = l1.invalidate(la)
                if rec is not None:
                    invalidated += 1
                    if rec[0]:
                        dirty_value = rec[1]
            rec = self.llc.invalidate(la)
            if rec is not None:
                invalidated += 1
                if rec[0] and dirty_value is None:
                    dirty_value = rec[1]
            if dirty_value is not None:
                writebacks.append((line, dirty_value))
        if reason == "migration":
            self.invalidations_migration += invalidated
        elif reason == "fault":
            self.invalidations_fault += invalidated
        return invalidated, writebacks

    def check_inclusion(self) -> bool:
        """Every L1-resident line must also be LLC-resident (test hook)."""
        for l1 in self.l1s:
            for s in l1.sets.values():
                for la in s:
                    if self.llc.peek(la) is None:
                        return False
        return True
