"""Hot-page selection policies and the baseline remap-table bookkeeping.

Four policies decide when a slow-tier page earns promotion:

  none         never migrate (reference point)
  threshold    promote the moment a page's running access count reaches the
               threshold
  epoch        at each epoch boundary, promote every page whose count in the
               closing epoch reached the threshold, hottest first
  adapt-thold  threshold policy whose trigger count retunes itself every few
               epochs from the measured IPC trend

The baseline (non-duon) mode also owns a bounded remap table here. Once it
fills to half capacity the entries reconcile into the canonical map, which is
the step that pays TLB shootdowns and cache-line invalidations; the remap-aware
mode never executes that path.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

from .geometry import PhysicalFrame
from .translation import CapacityError


class PolicyKind(Enum):
    NO_MIGRATION = "none"
    THRESHOLD = "threshold"
    EPOCH = "epoch"
    ADAPT_THOLD = "adapt-thold"


@dataclass
class PolicyConfig:
    kind: PolicyKind = PolicyKind.THRESHOLD
    duon: bool = True
    threshold: int = 64
    epoch_us: float = 10_000.0
    epoch_blocking: bool = False
    adapt_period_epochs: int = 4
    adapt_min_threshold: int = 16
    adapt_max_threshold: int = 512
    adapt_deadband: float = 0.005
    remap_capacity: int = 4096
    shootdown_cost: int = 4000
    line_invalidate_cost: int = 20

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = PolicyKind(self.kind)
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.epoch_us <= 0:
            raise ValueError("epoch_us must be positive")
        if not (1 <= self.adapt_min_threshold <= self.adapt_max_threshold):
            raise ValueError("adapt threshold bounds out of order")
        if self.adapt_period_epochs < 1:
            raise ValueError("adapt_period_epochs must be >= 1")
        if self.remap_capacity < 2:
            raise ValueError("remap_capacity must be >= 2")
        if self.shootdown_cost < 0 or self.line_invalidate_cost < 0:
            raise ValueError("costs must be non-negative")


class RemapTable:
    """Bounded ua -> frame overrides, folded into a canonical map on reconcile."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.entries: dict[int, PhysicalFrame] = {}
        self.canonical: dict[int, PhysicalFrame] = {}
        self.inserts = 0

    @property
    def occupancy(self) -> int:
        return len(self.entries)

    @property
    def needs_reconcile(self) -> bool:
        return 2 * len(self.entries) >= self.capacity

    def lookup(self, ua: int):
        hit = self.entries.get(ua)
        if hit is not None:
            return hit
        return self.canonical.get(ua)

    def insert(self, ua: int, frame: PhysicalFrame) -> None:
        if ua not in self.entries and len(self.entries) >= self.capacity:
            raise CapacityError("remap table full; reconcile did not run")
        self.entries[ua] = frame
        self.inserts += 1

    def drain(self) -> list[tuple[int, PhysicalFrame]]:
        moved = list(self.entries.items())
        self.canonical.update(self.entries)
        self.entries.clear()
        return moved


class ReconcileReport(NamedTuple):
    entries: int
    tlb_shootdowns: int          # per-core invalidation receptions
    cache_lines_invalidated: int
    overhead_cycles: int


def reconcile(remap: RemapTable, tcm, cache, translation, cfg: PolicyConfig,
              write_line: Callable[[PhysicalFrame, int, int], None]) -> ReconcileReport:
    """Fold the remap table into the canonical map, paying the coherence bill.

    Each drained entry costs one full shootdown round plus one invalidation per
    cached line of the page; dirty lines flush to the page's current frame.
    """
    receptions = 0
    lines = 0
    cycles = 0
    pending = list(remap.entries.items())
    for ua, frame in pending:
        vpn = translation.ua_to_vpn.get(ua)
        if vpn is not None:
            holders, cost = tcm.shootdown(vpn)
            receptions += holders
            cycles += cost
        else:
            cycles += cfg.shootdown_cost
        invalidated, dirty = cache.invalidate_page_lines(ua, reason="migration")
        lines += invalidated
        cycles += invalidated * cfg.line_invalidate_cost
        for line, value in dirty:
            write_line(frame, line, value)
    remap.drain()
    return ReconcileReport(len(pending), receptions, lines, cycles)


class MigrationPolicy:
    """Per-page hotness counters plus the promote/don't-promote decision."""

    def __init__(self, cfg: PolicyConfig):
        self.cfg = cfg
        self.kind = cfg.kind
        self.threshold = cfg.threshold
        self.counts: dict[int, int] = {}
        self.epoch_counts: dict[int, int] = {}
        self.candidates_emitted = 0
        self.threshold_history: list[int] = [cfg.threshold]
        self._prev_window_ipc: float | None = None

    def record_access(self, ua: int, page_is_fast: bool) -> bool:
        """Count one access; True if this page just became a candidate."""
        kind = self.kind
        if kind is PolicyKind.NO_MIGRATION:
            return False
        if kind is PolicyKind.EPOCH:
            self.epoch_counts[ua] = self.epoch_counts.get(ua, 0) + 1
            return False
        count = self.counts.get(ua, 0) + 1
        self.counts[ua] = count
        # fires exactly once, at the crossing; later accesses overshoot
        if count == self.threshold and not page_is_fast:
            self.candidates_emitted += 1
            return True
        return False

    def epoch_candidates(self, page_is_fast: Callable[[int], bool]) -> list[int]:
        """Epoch-boundary batch: hottest first, UA breaks ties; counters reset."""
        if self.kind is not PolicyKind.EPOCH:
            return []
        picked = [(count, ua) for ua, count in self.epoch_counts.items()
                  if count >= self.threshold and not page_is_fast(ua)]
        picked.sort(key=lambda item: (-item[0], item[1]))
        self.epoch_counts.clear()
        self.candidates_emitted += len(picked)
        return [ua for _, ua in picked]

    def reset_page(self, ua: int) -> None:
        self.counts.pop(ua, None)
        self.epoch_counts.pop(ua, None)

    def adapt(self, window_ipc: float) -> int:
        """Retune the trigger threshold from the IPC trend between windows."""
        cfg = self.cfg
        prev = self._prev_window_ipc
        self._prev_window_ipc = window_ipc
        if prev is not None and prev > 0:
            ratio = window_ipc / prev
            if ratio > 1.0 + cfg.adapt_deadband:
                self.threshold = max(cfg.adapt_min_threshold, self.threshold // 2)
            elif ratio < 1.0 - cfg.adapt_deadband:
                self.threshold = min(cfg.adapt_max_threshold, self.threshold * 2)
        self.threshold_history.append(self.threshold)
        return self.threshold
