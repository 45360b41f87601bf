"""Synthetic trace generation and the on-disk trace format.

Traces are plain text: a `#duon-trace v1` header line, then one access per
line as `core,op,vaddr_hex,icount` (op is R or W, icount is the number of
instructions the core issues before this access), LF-terminated.

Each core owns a private slice of the footprint: with P = footprint // cores,
core c touches only vpns [c*P, (c+1)*P). Skewed patterns rank pages by
hotness and shuffle the rank-to-page assignment per slice, so the hot pages
of different cores land on unrelated addresses. Keeping writers disjoint is
what lets one functional oracle serve every policy mode: there is no cache
coherence between cores, so a shared writable line would be underdefined.

Generation is bit-exact: core c uses a SplitMix64 stream seeded with
((seed << 32) + c) mod 2^64 and draws, in order, the rank shuffle, then per
event the rank, the page offset, the R/W flip, and the icount.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import NamedTuple, TextIO

from .rng import MASK64, SplitMix64

TRACE_HEADER = "#duon-trace v1"

PATTERNS = ("uniform", "zipf", "hotset", "phased")


class TraceFormatError(ValueError):
    pass


class TraceEvent(NamedTuple):
    core: int
    is_write: bool
    vaddr: int
    icount: int


@dataclass
class TraceSpec:
    pattern: str = "zipf"
    cores: int = 16
    footprint_pages: int = 8192
    events_per_core: int = 10_000
    seed: int = 0
    write_fraction: float = 0.3
    mean_icount: int = 8
    page_size: int = 4096
    zipf_s: float = 1.0
    hot_fraction: float = 0.1
    hot_bias: float = 0.9
    phase_events: int = 2000

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown pattern {self.pattern!r}; pick one of {PATTERNS}")
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.footprint_pages < self.cores:
            raise ValueError("footprint_pages must be >= cores (one page per core minimum)")
        if self.events_per_core < 0:
            raise ValueError("events_per_core must be >= 0")
        if not 0.0 <= self.write_fraction <= 1.0:
            raise ValueError("write_fraction must be in [0, 1]")
        if self.mean_icount < 1:
            raise ValueError("mean_icount must be >= 1")
        if self.zipf_s <= 0:
            raise ValueError("zipf_s must be positive")
        if not 0.0 < self.hot_fraction <= 1.0:
            raise ValueError("hot_fraction must be in (0, 1]")
        if not 0.0 <= self.hot_bias <= 1.0:
            raise ValueError("hot_bias must be in [0, 1]")
        if self.phase_events < 1:
            raise ValueError("phase_events must be >= 1")

    @property
    def pages_per_core(self) -> int:
        return self.footprint_pages // self.cores


def _zipf_cdf(n: int, s: float) -> list[float]:
    weights = [1.0 / (r + 1) ** s for r in range(n)]
    total = sum(weights)
    cdf = []
    acc = 0.0
    for w in weights:
        acc += w
        cdf.append(acc / total)
    cdf[-1] = 1.0
    return cdf


def _rank_for(spec: TraceSpec, rng: SplitMix64, index: int, cdf) -> int:
    p = spec.pages_per_core
    pattern = spec.pattern
    if pattern == "uniform":
        return rng.randrange(p)
    if pattern == "zipf":
        return bisect.bisect_left(cdf, rng.random())
    hot = max(1, int(p * spec.hot_fraction))
    if rng.random() < spec.hot_bias:
        rank = rng.randrange(hot)
    else:
        rank = hot + rng.randrange(p - hot) if p > hot else rng.randrange(hot)
    if pattern == "phased":
        # the hot window slides by one hot-set width each phase
        shift = (index // spec.phase_events) * hot
        rank = (rank + shift) % p
    return rank


def generate_trace(spec: TraceSpec) -> list[TraceEvent]:
    """Events in round-robin core order; per-core order is generation order."""
    cdf = _zipf_cdf(spec.pages_per_core, spec.zipf_s) if spec.pattern == "zipf" else None
    per_core: list[list[TraceEvent]] = []
    for core in range(spec.cores):
        rng = SplitMix64(((spec.seed << 32) + core) & MASK64)
        base_vpn = core * spec.pages_per_core
        rank_to_page = list(range(spec.pages_per_core))
        rng.shuffle(rank_to_page)
        events = []
        for i in range(spec.events_per_core):
            rank = _rank_for(spec, rng, i, cdf)
            vpn = base_vpn + rank_to_page[rank]
            offset = rng.randrange(spec.page_size)
            is_write = rng.random() < spec.write_fraction
            icount = rng.geometric(spec.mean_icount)
            events.append(TraceEvent(core, is_write, (vpn << 12) | offset, icount))
        per_core.append(events)
    out = []
    for i in range(spec.events_per_core):
        for core in range(spec.cores):
            out.append(per_core[core][i])
    return out


def write_trace(fh: TextIO, events: list[TraceEvent]) -> None:
    fh.write(TRACE_HEADER + "\n")
    for ev in events:
        op = "W" if ev.is_write else "R"
        fh.write(f"{ev.core},{op},0x{ev.vaddr:X},{ev.icount}\n")


def read_trace(fh: TextIO) -> list[TraceEvent]:
    header = fh.readline().rstrip("\n")
    if header != TRACE_HEADER:
        raise TraceFormatError(
            f"line 1: expected {TRACE_HEADER!r} header, got {header!r}")
    events = []
    for lineno, raw in enumerate(fh, start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise TraceFormatError(f"line {lineno}: expected 4 comma fields, got {len(parts)}")
        core_s, op, vaddr_s, icount_s = (p.strip() for p in parts)
        try:
            core = int(core_s)
            vaddr = int(vaddr_s, 16)
            icount = int(icount_s)
        except ValueError as exc:
            raise TraceFormatError(f"line {lineno}: {exc}") from None
        if core < 0:
            raise TraceFormatError(f"line {lineno}: negative core id")
        if vaddr < 0:
            raise TraceFormatError(f"line {lineno}: negative address")
        if icount < 0:
            raise TraceFormatError(f"line {lineno}: negative icount")
        if op not in ("R", "W"):
            raise TraceFormatError(f"line {lineno}: op must be R or W, got {op!r}")
        events.append(TraceEvent(core, op == "W", vaddr, icount))
    return events


def split_by_core(events: list[TraceEvent], cores: int) -> list[list[TraceEvent]]:
    streams: list[list[TraceEvent]] = [[] for _ in range(cores)]
    for ev in events:
        if ev.core >= cores:
            raise TraceFormatError(
                f"event names core {ev.core} but the simulation has {cores} cores")
        streams[ev.core].append(ev)
    return streams
