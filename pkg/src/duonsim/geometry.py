"""Unified flat address space over a fast and a slow memory tier.

Pages are identified by a unified page id (UA) that stays stable for the life of
a page; caches tag by UA, so moving a page between tiers never touches cached
state. Each UA has a default home frame (fast tier first, then slow); a page
that has been migrated carries a remapped frame in its page-table entry instead.

The storage-overhead helpers account for the extra per-page and per-TLB-entry
bits the remap mechanism needs: a remapped frame number plus four page flags in
each page-table entry, and a slow-tier-wide frame number plus three flags in
each TLB entry.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

# migrated, ongoing migration, pair, buffer residency
EPT_FLAG_BITS = 4
# migrated, ongoing migration, remap-valid
TLB_FLAG_BITS = 3

KIB = 1024
MIB = 1024 ** 2
GIB = 1024 ** 3


class Tier(Enum):
    FAST = "fast"
    SLOW = "slow"


class PhysicalFrame(NamedTuple):
    tier: Tier
    frame: int


def bits_for(count: int) -> int:
    """Bits needed to number `count` distinct items (0 for 0 or 1 items)."""
    return (count - 1).bit_length() if count > 1 else 0


@dataclass(frozen=True)
class MemoryGeometry:
    fast_capacity: int
    slow_capacity: int
    page_size: int = 4096

    def __post_init__(self):
        if self.page_size <= 0 or self.page_size & (self.page_size - 1):
            raise ValueError(f"page_size must be a power of two, got {self.page_size}")
        for name in ("fast_capacity", "slow_capacity"):
            cap = getattr(self, name)
            if cap < 0 or cap % self.page_size:
                raise ValueError(f"{name} must be a non-negative multiple of page_size, got {cap}")

    @property
    def fast_pages(self) -> int:
        return self.fast_capacity // self.page_size

    @property
    def slow_pages(self) -> int:
        return self.slow_capacity // self.page_size

    @property
    def total_pages(self) -> int:
        return self.fast_pages + self.slow_pages

    @property
    def ra_bits_fast(self) -> int:
        return bits_for(self.fast_pages)

    @property
    def ra_bits_slow(self) -> int:
        return bits_for(self.slow_pages)

    @property
    def page_shift(self) -> int:
        return self.page_size.bit_length() - 1


def default_frame_of(ua: int, geom: MemoryGeometry) -> PhysicalFrame:
    """Home frame of a unified page id: fast frames first, then slow."""
    if ua < 0 or ua >= geom.total_pages:
        raise ValueError(f"ua {ua} out of range [0, {geom.total_pages})")
    if ua < geom.fast_pages:
        return PhysicalFrame(Tier.FAST, ua)
    return PhysicalFrame(Tier.SLOW, ua - geom.fast_pages)


def ua_of_frame(frame: PhysicalFrame, geom: MemoryGeometry) -> int:
    """Inverse of default_frame_of."""
    if frame.tier is Tier.FAST:
        if not 0 <= frame.frame < geom.fast_pages:
            raise ValueError(f"fast frame {frame.frame} out of range")
        return frame.frame
    if not 0 <= frame.frame < geom.slow_pages:
        raise ValueError(f"slow frame {frame.frame} out of range")
    return geom.fast_pages + frame.frame


def ept_storage_overhead(geom: MemoryGeometry) -> int:
    """Extra page-table bytes for remap support across every page of both tiers.

    Fast-tier pages can be remapped anywhere in the slow tier and vice versa, so
    a fast page's entry grows by the fast-frame-number width and a slow page's
    entry by the slow-frame-number width, plus the four flags each.
    """
    bits = geom.fast_pages * (geom.ra_bits_fast + EPT_FLAG_BITS)
    bits += geom.slow_pages * (geom.ra_bits_slow + EPT_FLAG_BITS)
    return (bits + 7) // 8


def tlb_storage_overhead(entries: int, geom: MemoryGeometry) -> int:
    """Extra TLB bytes: each entry holds a slow-tier-wide frame number + 3 flags."""
    if entries < 0:
        raise ValueError("entries must be >= 0")
    bits = entries * (geom.ra_bits_slow + TLB_FLAG_BITS)
    return (bits + 7) // 8


def conventional_tlb_bytes(entries: int, geom: MemoryGeometry, va_bits: int = 48) -> int:
    """Size of a plain TLB holding vpn, unified page id, valid and dirty bits."""
    vpn_bits = va_bits - geom.page_shift
    bits = entries * (vpn_bits + bits_for(geom.total_pages) + 2)
    return (bits + 7) // 8


@dataclass(frozen=True)
class OverheadReport:
    ept_extension_bytes: int
    tlb_extension_bytes: int
    ept_fraction_of_memory: float
    # both percentage interpretations of the TLB extension
    tlb_fraction_of_extended: float
    tlb_fraction_of_conventional: float


def overhead_report(geom: MemoryGeometry, tlb_entries: int) -> OverheadReport:
    ept = ept_storage_overhead(geom)
    tlb = tlb_storage_overhead(tlb_entries, geom)
    total_mem = geom.fast_capacity + geom.slow_capacity
    conv = conventional_tlb_bytes(tlb_entries, geom)
    return OverheadReport(
        ept_extension_bytes=ept,
        tlb_extension_bytes=tlb,
        ept_fraction_of_memory=ept / total_mem if total_mem else 0.0,
        tlb_fraction_of_extended=tlb / (conv + tlb) if conv + tlb else 0.0,
        tlb_fraction_of_conventional=tlb / conv if conv else 0.0,
    )
