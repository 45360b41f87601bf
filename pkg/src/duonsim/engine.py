"""Deterministic multi-core trace-driven simulation loop.

One run interleaves per-core event streams in global cycle order (lowest
core-local clock issues next, lowest core id on ties), charges every latency
into one of five per-core buckets (issue, cache, memory, stall, overhead), and
drives the hotness policy and the migration engine as side effects of the
accesses. The ledger invariant - cycles == issue + cache + memory + stall +
overhead, per core - is asserted at the end of every run.

A flat functional oracle shadows the run: each write stores a value derived
bit-exactly from (core, per-core event index), and every simulated read is
compared against the flat model on the spot. Any divergence between the
migration machinery and plain memory semantics aborts the run with a
diagnostic. The value formula, documented for reimplementors:

    value_for(core, k) = mix64(((core + 1) << 40) + k)  mod 2^64

with mix64 the splitmix64 finalizer (see rng module). Reads of never-written
lines see 0. The oracle is line-granular (key = vaddr >> 6 at the default 64 B
line), which is sound because trace generation gives each core a private page
range; there is no inter-core cache coherence in this model.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

from .backing import FrameStore
from .cache import CacheConfig, CacheHierarchy
from .coherence import TlbCoherenceModule
from .geometry import (MemoryGeometry, PhysicalFrame, Tier, default_frame_of)
from .migration import FrameOccupancy, MigrationEngine
from .policy import (MigrationPolicy, PolicyConfig, PolicyKind, RemapTable,
                     reconcile)
from .rng import mix64
from .translation import CapacityError, PageFaultError, TranslationState
from .workload import TraceEvent


def ns_to_cycles(ns, ghz) -> int:
    """Nanoseconds to core cycles, rounding the exact decimal product.

    Uses Fraction(str(x)) so 80 ns at 3.2 GHz is exactly 256, never 257 via
    binary-float dust.
    """
    return round(Fraction(str(ns)) * Fraction(str(ghz)))


@dataclass(frozen=True)
class LatencyTable:
    fast_read: int = 90
    fast_write: int = 90
    slow_read: int = 256
    slow_write: int = 800
    buffer_access: int = 10
    page_walk: int = 100
    ext_lookup: int = 1

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"latency {name} must be a non-negative integer, got {v!r}")


def hbm_pcm_latencies(ghz: float = 3.2) -> LatencyTable:
    """Fast tier from HBM row timings (tRCD+tCAS = 28 ns), slow from PCM 80/250 ns."""
    return LatencyTable(
        fast_read=ns_to_cycles(28, ghz),
        fast_write=ns_to_cycles(28, ghz),
        slow_read=ns_to_cycles(80, ghz),
        slow_write=ns_to_cycles(250, ghz),
    )


def hbm_ddr4_latencies(ghz: float = 3.2) -> LatencyTable:
    """Fast tier HBM as above; slow tier DDR4-like flat 103-cycle access."""
    fast = ns_to_cycles(28, ghz)
    return LatencyTable(fast_read=fast, fast_write=fast, slow_read=103, slow_write=103)


def epoch_length_cycles(epoch_us, ghz) -> int:
    cycles = Fraction(str(epoch_us)) * Fraction(str(ghz)) * 1000
    n = int(cycles)
    if n < 1:
        raise ValueError(f"epoch of {epoch_us} us at {ghz} GHz is shorter than one cycle")
    return n


@dataclass
class SimConfig:
    geometry: MemoryGeometry
    cache: CacheConfig = field(default_factory=CacheConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    latencies: LatencyTable = field(default_factory=LatencyTable)
    cores: int = 16
    core_freq_ghz: float = 3.2
    tlb_entries: int = 4096
    seed: int = 0
    premap: bool = True
    check_oracle: bool = True
    record_access_detail: bool = False
    migration_queue_capacity: int = 64

    def __post_init__(self):
        if self.cores < 1:
            raise ValueError("cores must be >= 1")
        if self.core_freq_ghz <= 0:
            raise ValueError("core_freq_ghz must be positive")
        if self.tlb_entries < 1:
            raise ValueError("tlb_entries must be >= 1")
        if self.geometry.page_size < self.cache.line_size:
            raise ValueError("page_size must be >= cache line_size")
        if self.migration_queue_capacity < 0:
            raise ValueError("migration_queue_capacity must be >= 0")
        # validates the unit conversion early so bad configs fail fast
        epoch_length_cycles(self.policy.epoch_us, self.core_freq_ghz)


class OracleMismatch(AssertionError):
    def __init__(self, core: int, event_index: int, vpn: int, expected: int, got: int):
        super().__init__(
            f"read mismatch: core {core} event {event_index} vpn {vpn:#x}: "
            f"expected {expected:#x}, got {got:#x}")
        self.core = core
        self.event_index = event_index
        self.vpn = vpn
        self.expected = expected
        self.got = got


class LedgerError(AssertionError):
    pass


class AccessDetail(NamedTuple):
    core: int
    index: int
    vpn: int
    ua: int
    tlb_hit: bool
    level: str              # 'l1' | 'llc' | 'mem'
    mem_kind: Optional[str]  # None | 'frame' | 'job'
    frame: Optional[PhysicalFrame]
    stall: int


def value_for(core: int, index: int) -> int:
    """The oracle's write value for a core's k-th trace event (bit-exact)."""
    return mix64(((core + 1) << 40) + index)


def oracle_replay(traces: list[list[TraceEvent]], line_size: int = 64) -> dict[int, int]:
    """Flat, migration-free functional model: final value per line key.

    Sound only for traces whose writers are disjoint per line (the generator
    guarantees per-core page ranges), since per-core replay ignores global
    interleaving.
    """
    shift = line_size.bit_length() - 1
    mem: dict[int, int] = {}
    for core, stream in enumerate(traces):
        for index, ev in enumerate(stream):
            if ev.is_write:
                mem[ev.vaddr >> shift] = value_for(core, index)
    return mem


STATS_COLUMNS = ("core", "instructions", "cycles", "ipc", "issue_cycles",
                 "cache_cycles", "memory_cycles", "stall_cycles",
                 "overhead_cycles", "l1_hits", "l1_misses", "llc_hits",
                 "llc_misses", "tlb_hits", "tlb_misses")

MIGRATIONS_COLUMNS = ("hot_vpn", "victim_vpn", "pair", "start_cycle",
                      "end_cycle", "stalled_requests", "buffer_served",
                      "redirected")


@dataclass
class SimStats:
    cores: int
    instructions: list[int]
    cycles: list[int]
    issue_cycles: list[int]
    cache_cycles: list[int]
    memory_cycles: list[int]
    stall_cycles: list[int]
    overhead_cycles: list[int]
    l1_hits: list[int]
    l1_misses: list[int]
    llc_hits: list[int]
    llc_misses: list[int]
    tlb_hits: list[int]
    tlb_misses: list[int]
    ipc_per_core: list[float]
    aggregate_ipc: float
    total_instructions: int
    max_cycles: int
    # migration side
    migration_count: int
    remigration_count: int
    pair_migrations: int
    migrations_dropped_overflow: int
    migrations_dropped_stale: int
    migration_stall_cycles: int
    buffer_served: int
    redirected: int
    wait_max: int
    migq_reads_fast: int
    migq_reads_slow: int
    candidates_emitted: int
    threshold_final: int
    # coherence / baseline overheads
    shootdown_events: int
    tlb_shootdowns: int
    shootdown_cycles: int
    lines_invalidated: int
    invalidation_cycles: int
    fault_lines_invalidated: int
    tcm_broadcasts: int
    tcm_entry_updates: int
    reconcile_count: int
    reconcile_cycles: int
    # translation
    page_walks: int
    page_faults: int
    fault_tlb_invalidations: int
    fault_victim_writebacks: int
    # epochs and verification
    epochs: int
    overhead_cycles_per_epoch: list[int]
    checked_reads: int
    job_records: list[dict]
    access_details: Optional[list[AccessDetail]] = None

    def stats_rows(self) -> list[list]:
        """Per-core rows plus one aggregate row, in the frozen column order."""
        rows = []
        for c in range(self.cores):
            rows.append([
                c, self.instructions[c], self.cycles[c],
                f"{self.ipc_per_core[c]:.6f}", self.issue_cycles[c],
                self.cache_cycles[c], self.memory_cycles[c],
                self.stall_cycles[c], self.overhead_cycles[c],
                self.l1_hits[c], self.l1_misses[c], self.llc_hits[c],
                self.llc_misses[c], self.tlb_hits[c], self.tlb_misses[c],
            ])
        rows.append([
            "all", self.total_instructions, self.max_cycles,
            f"{self.aggregate_ipc:.6f}", sum(self.issue_cycles),
            sum(self.cache_cycles), sum(self.memory_cycles),
            sum(self.stall_cycles), sum(self.overhead_cycles),
            sum(self.l1_hits), sum(self.l1_misses), sum(self.llc_hits),
            sum(self.llc_misses), sum(self.tlb_hits), sum(self.tlb_misses),
        ])
        return rows

    def migration_rows(self) -> list[list]:
        rows = []
        for rec in self.job_records:
            rows.append([rec["hot_vpn"],
                         "" if rec["victim_vpn"] is None else rec["victim_vpn"],
                         rec["pair"], rec["start_cycle"], rec["end_cycle"],
                         rec["stalled_requests"], rec["buffer_served"],
                         rec["redirected"]])
        return rows


class Simulator:
    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        geom = cfg.geometry
        self.geom = geom
        self.page_shift = geom.page_shift
        self.line_shift = cfg.cache.line_size.bit_length() - 1
        self.lines_per_page = geom.page_size // cfg.cache.line_size
        self.duon = cfg.policy.duon

        self.backing = FrameStore(self.lines_per_page)
        self.ts = TranslationState(geom, cfg.cores, cfg.tlb_entries)
        self.tcm = TlbCoherenceModule(self.ts.tlbs,
                                      shootdown_cost=cfg.policy.shootdown_cost)
        if self.duon:
            self.ts.tcm = self.tcm  # migration flag broadcasts exist only here
        self.hier = CacheHierarchy(cfg.cache, cfg.cores, self.lines_per_page)
        self.occupancy = FrameOccupancy(geom)
        self.mig = MigrationEngine(geom, cfg.latencies, self.backing, self.ts,
                                   self.occupancy, duon=self.duon,
                                   lines_per_page=self.lines_per_page,
                                   queue_capacity=cfg.migration_queue_capacity)
        self.mig.on_retire = self._on_job_retire
        self.mig.frame_of = self._frame_for_entry
        self.policy = MigrationPolicy(cfg.policy)
        self.remap: Optional[RemapTable] = \
            None if self.duon else RemapTable(cfg.policy.remap_capacity)
        self.ts.on_evict_page = self._on_fault_evict
        self.ts.fault_victim_filter = lambda vpn: not self.mig.is_protected(vpn)

        cores = cfg.cores
        self.clocks = [0] * cores
        self.instructions = [0] * cores
        self.issue_b = [0] * cores
        self.cache_b = [0] * cores
        self.memory_b = [0] * cores
        self.stall_b = [0] * cores
        self.overhead_b = [0] * cores
        self.pending_penalty = [0] * cores
        self.events_done = [0] * cores

        self.oracle: dict[int, int] = {}
        # Contents of pages evicted by a fault, keyed by vpn, restored on the
        # next fault-in of that vpn. Keeps the memory system lossless so the
        # shadow oracle stays valid across evict/re-fault cycles.
        self.swap: dict[int, dict[int, int]] = {}
        self.checked_reads = 0
        self.reconcile_count = 0
        self.reconcile_cycles = 0
        self.epoch_cycles = epoch_length_cycles(cfg.policy.epoch_us, cfg.core_freq_ghz)
        self._next_epoch = self.epoch_cycles
        self._epochs = 0
        self._overhead_mark = 0
        self._window_instr_mark = 0
        self._window_time_mark = 0
        self.epoch_series: list[int] = []
        self.access_details: Optional[list[AccessDetail]] = \
            [] if cfg.record_access_detail else None
        self.trace_log = None  # optional text sink, one line per event

    # -- wiring callbacks ------------------------------------------------

    def _frame_for_entry(self, entry) -> PhysicalFrame:
        if self.duon:
            return self.ts.effective_frame(entry)
        hit = self.remap.lookup(entry.ua)
        return hit if hit is not None else default_frame_of(entry.ua, self.geom)

    def _on_fault_evict(self, entry) -> None:
        _, dirty = self.hier.invalidate_page_lines(entry.ua, reason="fault")
        frame = self._frame_for_entry(entry)
        for line, value in dirty:
            self.backing.write_line(frame, line, value)
        # Page out: the frame is about to be recycled for the faulting page,
        # so it must come back zeroed; the victim's content stays reachable
        # for a later re-fault.
        content = self.backing.take_page(frame)
        if content:
            self.swap[entry.vpn] = content

    def _on_job_retire(self, job, t: int) -> None:
        pol = self.policy
        pol.reset_page(job.hot_ua)
        if job.pair:
            pol.reset_page(job.victim_ua)
        if not self.duon:
            self.remap.insert(job.hot_ua, job.hot_dst)
            self.ts.fast_resident.add(job.hot_vpn)
            if job.pair:
                self.remap.insert(job.victim_ua, job.victim_dst)
                self.ts.fast_resident.discard(job.victim_vpn)
            if self.remap.needs_reconcile:
                self._reconcile(t)

    def _reconcile(self, t: int) -> None:
        report = reconcile(self.remap, self.tcm, self.hier, self.ts,
                           self.cfg.policy, self.backing.write_line)
        self.reconcile_count += 1
        self.reconcile_cycles += report.overhead_cycles
        base, rem = divmod(report.overhead_cycles, self.cfg.cores)
        for c in range(self.cfg.cores):
            share = base + (1 if c < rem else 0)
            self.overhead_b[c] += share
            self.pending_penalty[c] += share

    def _ua_is_fast(self, ua: int) -> bool:
        vpn = self.ts.ua_to_vpn.get(ua)
        return vpn is not None and vpn in self.ts.fast_resident

    def _epoch_boundary(self, te: int) -> None:
        self._epochs += 1
        total_overhead = sum(self.overhead_b)
        self.epoch_series.append(total_overhead - self._overhead_mark)
        self._overhead_mark = total_overhead
        pol = self.policy
        cfg = self.cfg.policy
        if pol.kind is PolicyKind.EPOCH:
            for ua in pol.epoch_candidates(self._ua_is_fast):
                self.mig.request_migration(ua, te)
            if cfg.epoch_blocking and (self.mig.active is not None or self.mig.queue):
                self.mig.drain()
                last = max((r["end_cycle"] for r in self.mig.job_records), default=te)
                pen = max(0, last - te)
                for c in range(self.cfg.cores):
                    self.overhead_b[c] += pen
                    self.pending_penalty[c] += pen
        elif pol.kind is PolicyKind.ADAPT_THOLD and \
                self._epochs % cfg.adapt_period_epochs == 0:
            instr = sum(self.instructions)
            dt = te - self._window_time_mark
            di = instr - self._window_instr_mark
            if dt > 0:
                pol.adapt(di / dt)
            self._window_time_mark = te
            self._window_instr_mark = instr

    # -- main loop -------------------------------------------------------

    def run(self, traces: list[list[TraceEvent]]) -> SimStats:
        cfg = self.cfg
        if len(traces) != cfg.cores:
            raise ValueError(f"need {cfg.cores} per-core streams, got {len(traces)}")
        if cfg.premap:
            vpns = sorted({ev.vaddr >> self.page_shift
                           for stream in traces for ev in stream})
            if len(vpns) > self.geom.total_pages:
                raise CapacityError(
                    f"trace touches {len(vpns)} pages but memory holds "
                    f"{self.geom.total_pages}")
            for vpn in vpns:
                entry = self.ts.map_page(vpn)
                self.occupancy.mark_used(default_frame_of(entry.ua, self.geom))
        heap = [(0, c) for c in range(cfg.cores) if traces[c]]
        heapq.heapify(heap)
        ptrs = [0] * cfg.cores
        while heap:
            clock, core = heapq.heappop(heap)
            pen = self.pending_penalty[core]
            if pen:
                # reconcile bill lands before the core's next event issues
                self.pending_penalty[core] = 0
                heapq.heappush(heap, (clock + pen, core))
                continue
            self.mig.advance(clock)
            while clock >= self._next_epoch:
                self._epoch_boundary(self._next_epoch)
                self._next_epoch += self.epoch_cycles
            ev = traces[core][ptrs[core]]
            ptrs[core] += 1
            new_clock = self._step(core, ev, clock)
            self.clocks[core] = new_clock
            if ptrs[core] < len(traces[core]):
                heapq.heappush(heap, (new_clock, core))
        self.mig.drain()
        for c in range(cfg.cores):
            if self.pending_penalty[c]:
                self.clocks[c] += self.pending_penalty[c]
                self.pending_penalty[c] = 0
        return self._build_stats()

    def _step(self, core: int, ev: TraceEvent, now: int) -> int:
        lat = self.cfg.latencies
        cache_cfg = self.cfg.cache
        icount = ev.icount
        self.instructions[core] += icount
        self.issue_b[core] += icount
        at = now + icount
        cache_add = 0
        mem_add = 0
        stall_add = 0

        vpn = ev.vaddr >> self.page_shift
        line = (ev.vaddr >> self.line_shift) & (self.lines_per_page - 1)
        ts = self.ts

        cached = ts.tlb_lookup(core, vpn)
        if cached is not None:
            tlb_hit = True
            entry = ts.ept[vpn]
        else:
            tlb_hit = False
            cache_add += lat.page_walk
            try:
                entry = ts.ept_lookup(vpn)
            except PageFaultError:
                flush_before = ts.fault_victim_writebacks
                entry = ts.handle_page_fault(vpn, at)
                frame = self._frame_for_entry(entry)
                self.occupancy.mark_used(frame)
                if ts.fault_victim_writebacks > flush_before:
                    mem_add += lat.slow_write  # dirty page-out of the evicted page
                stash = self.swap.pop(vpn, None)
                if stash is not None:  # page-in of previously evicted content
                    for ln, value in stash.items():
                        self.backing.write_line(frame, ln, value)
            ts.tlb_fill_from(core, entry)
        ua = entry.ua
        entry.last_access_cycle = at
        if ev.is_write:
            entry.dirty = True

        candidate = False
        if self.policy.kind is not PolicyKind.NO_MIGRATION:
            candidate = self.policy.record_access(ua, vpn in ts.fast_resident)

        la = ua * self.lines_per_page + line
        level, rec = self.hier.probe(core, la)
        cache_add += cache_cfg.l1_latency
        value = None
        mem_kind = None
        detail_frame = None
        if level == "l1":
            value = rec[1]
        elif level == "llc":
            cache_add += cache_cfg.llc_latency
            value = rec[1]
            wbs = self.hier.fill(core, la, value)
            if wbs:
                mem_add += self._route_writebacks(wbs, at + cache_add)
        else:
            cache_add += cache_cfg.llc_latency
            if self.duon:
                # LLC miss: second lookup resolves the memory-side address
                second = ts.tlbs[core].peek(vpn)
                cache_add += lat.ext_lookup if second is not None else lat.page_walk
            at_mem = at + cache_add
            self.mig.advance(at_mem)
            job = self.mig.active
            if job is not None and job.involves_vpn(vpn):
                value, mlat, stall, deferred = \
                    self.mig.intercept_fill(core, vpn, line, at_mem)
                stall_add += stall
                if deferred:
                    frame = self._frame_for_entry(entry)
                    value = self.backing.read_line(frame, line)
                    mlat = lat.fast_read if frame.tier is Tier.FAST else lat.slow_read
                    detail_frame, mem_kind = frame, "frame"
                else:
                    mem_kind = "job"
                mem_add += mlat
            else:
                frame = self._frame_for_entry(entry)
                value = self.backing.read_line(frame, line)
                mem_add += lat.fast_read if frame.tier is Tier.FAST else lat.slow_read
                detail_frame, mem_kind = frame, "frame"
            wbs = self.hier.fill(core, la, value)
            if wbs:
                mem_add += self._route_writebacks(wbs, at_mem)

        index = self.events_done[core]
        key = ev.vaddr >> self.line_shift
        if ev.is_write:
            wv = value_for(core, index)
            self.hier.write_l1(core, la, wv)
            if self.cfg.check_oracle:
                self.oracle[key] = wv
        elif self.cfg.check_oracle:
            expected = self.oracle.get(key, 0)
            self.checked_reads += 1
            if value != expected:
                raise OracleMismatch(core, index, vpn, expected, value)
        self.events_done[core] = index + 1

        self.cache_b[core] += cache_add
        self.memory_b[core] += mem_add
        self.stall_b[core] += stall_add
        new_clock = at + cache_add + mem_add + stall_add
        if candidate:
            self.mig.request_migration(ua, new_clock)
        if self.access_details is not None:
            self.access_details.append(AccessDetail(
                core, index, vpn, ua, tlb_hit, level, mem_kind, detail_frame,
                stall_add))
        if self.trace_log is not None:
            op = "W" if ev.is_write else "R"
            self.trace_log.write(
                f"{core},{index},{now},{op},0x{ev.vaddr:X},{level},{stall_add}\n")
        return new_clock

    def _route_writebacks(self, wbs, at: int) -> int:
        total = 0
        lat = self.cfg.latencies
        for la, value in wbs:
            ua_wb, line_wb = divmod(la, self.lines_per_page)
            vpn_wb = self.ts.ua_to_vpn.get(ua_wb)
            if vpn_wb is None:
                continue  # page torn down; its fault eviction already flushed
            job = self.mig.active
            if job is not None and job.involves_vpn(vpn_wb):
                total += self.mig.intercept_writeback(vpn_wb, line_wb, value, at)
            else:
                entry = self.ts.ept[vpn_wb]
                frame = self._frame_for_entry(entry)
                self.backing.write_line(frame, line_wb, value)
                total += lat.fast_write if frame.tier is Tier.FAST else lat.slow_write
        return total

    # -- results ---------------------------------------------------------

    def verify_final_memory(self) -> list[tuple[int, int, int]]:
        """Read every oracle line back through the hierarchy; [] iff clean.

        Mapped pages are read through cache-then-frame with L1 dirt winning;
        fault-evicted pages are read from their swapped-out image. The inline
        per-read check is the primary guarantee, this is an independent
        end-state sweep.
        """
        mismatches = []
        ratio = self.page_shift - self.line_shift
        for key, expected in self.oracle.items():
            vpn = key >> ratio
            line = key & (self.lines_per_page - 1)
            entry = self.ts.ept.get(vpn)
            if entry is None or not entry.valid:
                got = self.swap.get(vpn, {}).get(line, 0)
                if got != expected:
                    mismatches.append((vpn, line, got))
                continue
            la = entry.ua * self.lines_per_page + line
            got = None
            for l1 in self.hier.l1s:
                rec = l1.peek(la)
                if rec is not None and rec[0]:
                    got = rec[1]
                    break
            if got is None:
                rec = self.hier.llc.peek(la)
                if rec is not None:
                    # an L1 clean copy matches LLC; LLC may carry folded dirt
                    got = rec[1]
            if got is None:
                got = self.backing.read_line(self._frame_for_entry(entry), line)
            if got != expected:
                mismatches.append((vpn, line, got))
        return mismatches

    def _build_stats(self) -> SimStats:
        cores = self.cfg.cores
        for c in range(cores):
            total = (self.issue_b[c] + self.cache_b[c] + self.memory_b[c] +
                     self.stall_b[c] + self.overhead_b[c])
            if total != self.clocks[c]:
                raise LedgerError(
                    f"core {c}: cycle ledger off by {self.clocks[c] - total} "
                    f"(clock {self.clocks[c]}, buckets {total})")
        total_instr = sum(self.instructions)
        max_cycles = max(self.clocks) if self.clocks else 0
        ipc = [self.instructions[c] / self.clocks[c] if self.clocks[c] else 0.0
               for c in range(cores)]
        mig = self.mig
        tcm = self.tcm
        ts = self.ts
        return SimStats(
            cores=cores,
            instructions=list(self.instructions),
            cycles=list(self.clocks),
            issue_cycles=list(self.issue_b),
            cache_cycles=list(self.cache_b),
            memory_cycles=list(self.memory_b),
            stall_cycles=list(self.stall_b),
            overhead_cycles=list(self.overhead_b),
            l1_hits=list(self.hier.l1_hits),
            l1_misses=list(self.hier.l1_misses),
            llc_hits=list(self.hier.llc_hits),
            llc_misses=list(self.hier.llc_misses),
            tlb_hits=[t.hits for t in ts.tlbs],
            tlb_misses=[t.misses for t in ts.tlbs],
            ipc_per_core=ipc,
            aggregate_ipc=(total_instr / max_cycles) if max_cycles else 0.0,
            total_instructions=total_instr,
            max_cycles=max_cycles,
            migration_count=mig.migration_count,
            remigration_count=mig.remigration_count,
            pair_migrations=sum(1 for r in mig.job_records if r["pair"]),
            migrations_dropped_overflow=mig.dropped_overflow,
            migrations_dropped_stale=mig.dropped_stale,
            migration_stall_cycles=sum(self.stall_b),
            buffer_served=sum(r["buffer_served"] for r in mig.job_records),
            redirected=sum(r["redirected"] for r in mig.job_records),
            wait_max=mig.wait_queue.max_wait,
            migq_reads_fast=mig.migq.reads_fast,
            migq_reads_slow=mig.migq.reads_slow,
            candidates_emitted=self.policy.candidates_emitted,
            threshold_final=self.policy.threshold,
            shootdown_events=tcm.shootdown_events,
            tlb_shootdowns=tcm.shootdown_invalidations,
            shootdown_cycles=tcm.shootdown_events * tcm.shootdown_cost,
            lines_invalidated=self.hier.invalidations_migration,
            invalidation_cycles=(self.hier.invalidations_migration *
                                 self.cfg.policy.line_invalidate_cost),
            fault_lines_invalidated=self.hier.invalidations_fault,
            tcm_broadcasts=tcm.start_broadcasts + tcm.complete_broadcasts,
            tcm_entry_updates=tcm.entry_updates,
            reconcile_count=self.reconcile_count,
            reconcile_cycles=self.reconcile_cycles,
            page_walks=ts.page_walks,
            page_faults=ts.page_faults,
            fault_tlb_invalidations=ts.fault_tlb_invalidations,
            fault_victim_writebacks=ts.fault_victim_writebacks,
            epochs=self._epochs,
            overhead_cycles_per_epoch=list(self.epoch_series),
            checked_reads=self.checked_reads,
            job_records=list(mig.job_records),
            access_details=self.access_details,
        )


def run_simulation(cfg: SimConfig, traces: list[list[TraceEvent]]) -> SimStats:
    return Simulator(cfg).run(traces)
