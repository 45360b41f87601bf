"""Page migration: pair swaps in five steps, staging buffers, bit vectors.

A job moves one hot page from the slow tier into the fast tier. If a free fast
frame exists the job is one-way; otherwise the LRU fast-resident page is
displaced and the two pages swap effective frames:

  step 1  decide (hot page chosen, victim selected)
  step 2  victim lines copy fast frame -> hot buffer, one line per fast-tier
          read slot; victim requests to un-staged lines hold until the line
          lands in the buffer
  step 3  hot-page lines copy slow frame -> cold buffer -> fast frame; requests
          are served from the slow frame until a line's bit sets, then from the
          fast frame
  step 4  hot buffer drains into the hot page's old slow frame
  step 5  flags flip (migrated=1, ongoing=0), TLB holders are patched, waiters
          are drained, the job retires

Per-line bits set exactly when a line lands in its destination frame; while a
bit is clear the owning buffer (hot for the victim, cold for the incoming page)
serves staged lines. Only the victim carries in-flight page-table flags during
a first-time pair migration; the engine routes around the incoming page by
consulting the active job, not its flags. One job runs at a time; candidates
queue FIFO behind it, capacity-bounded, overflow dropped and counted.
"""
from __future__ import annotations

from collections import deque
from enum import Enum
from typing import NamedTuple, Optional

from .geometry import (MemoryGeometry, PhysicalFrame, Tier, default_frame_of,
                       ua_of_frame)
from .translation import (BufferAccess, CapacityError, FrameAccess,
                          StallUntilBuffered, StateError)

HOT = 1
COLD = 0
ADMISSION_QUEUE_CAPACITY = 64

# schedule event kinds, applied strictly in time order
_S2_BUF = 0     # victim line lands in hot buffer
_S3_BUF = 1     # incoming line lands in cold buffer
_S3_FRAME = 2   # incoming line lands in fast frame (bit sets)
_S4_FRAME = 3   # victim line drains to slow frame (bit sets)
_RETIRE = 4


class BitVector:
    __slots__ = ("lines", "bits")

    def __init__(self, lines: int):
        self.lines = lines
        self.bits = 0

    def set(self, i: int) -> None:
        mask = 1 << i
        assert not self.bits & mask, "bit vector bits only ever rise during a job"
        self.bits |= mask

    def test(self, i: int) -> bool:
        return bool(self.bits & (1 << i))

    def count(self) -> int:
        return self.bits.bit_count()

    def all_set(self) -> bool:
        return self.bits == (1 << self.lines) - 1

    def reset(self) -> None:
        self.bits = 0


class TransferBuffer:
    """One page worth of staging lines (hot: outgoing victim, cold: incoming)."""

    def __init__(self, residency: int, capacity_lines: int):
        self.residency = residency
        self.capacity_lines = capacity_lines
        self.owner_vpn: Optional[int] = None
        self.lines: dict[int, int] = {}

    def acquire(self, vpn: int) -> None:
        if self.owner_vpn is not None:
            raise StateError("buffer already owned by another job")
        self.owner_vpn = vpn

    def release(self) -> None:
        assert not self.lines, "buffer released while still holding lines"
        self.owner_vpn = None

    def put(self, line: int, value: int) -> None:
        if len(self.lines) >= self.capacity_lines:
            raise CapacityError("transfer buffer overflow")
        self.lines[line] = value

    def take(self, line: int) -> int:
        return self.lines.pop(line)

    def has(self, line: int) -> bool:
        return line in self.lines

    def write(self, line: int, value: int) -> None:
        # a write to a staged line persists into the destination when it drains
        assert line in self.lines
        self.lines[line] = value


class WaitRecord(NamedTuple):
    core: int
    vpn: int
    line: int
    enqueued_at: int
    served_at: int


class WaitQueue:
    def __init__(self):
        self.records: list[WaitRecord] = []
        self.total_wait = 0
        self.max_wait = 0

    def record(self, core: int, vpn: int, line: int, enq: int, served: int) -> None:
        self.records.append(WaitRecord(core, vpn, line, enq, served))
        wait = served - enq
        self.total_wait += wait
        if wait > self.max_wait:
            self.max_wait = wait

    def __len__(self):
        return len(self.records)


class MigrationQueue:
    """Controller-issued line-read requests, FIFO per memory tier."""

    def __init__(self):
        self.reads_fast = 0
        self.reads_slow = 0
        self._last_issue = {Tier.FAST: -1, Tier.SLOW: -1}

    def issue(self, tier: Tier, t: int) -> None:
        assert t >= self._last_issue[tier], "per-tier read requests must stay FIFO"
        self._last_issue[tier] = t
        if tier is Tier.FAST:
            self.reads_fast += 1
        else:
            self.reads_slow += 1


class RejectReason(Enum):
    ALREADY_FAST = "already-fast"
    IN_FLIGHT = "in-flight"
    QUEUE_FULL = "queue-full"
    NO_CAPACITY = "no-capacity"


class AdmitResult(NamedTuple):
    status: str                      # "started" | "queued" | "rejected"
    job: Optional["MigrationJob"]
    reason: Optional[RejectReason]


class FrameOccupancy:
    """Free fast-tier frames, handed out lowest-id first."""

    def __init__(self, geom: MemoryGeometry):
        self.free_fast: set[int] = set(range(geom.fast_pages))
        self._scan = 0
        self._limit = geom.fast_pages

    def mark_used(self, frame: PhysicalFrame) -> None:
        if frame.tier is Tier.FAST:
            self.free_fast.discard(frame.frame)

    def take_free_fast(self) -> Optional[int]:
        while self._scan < self._limit and self._scan not in self.free_fast:
            self._scan += 1
        if self._scan >= self._limit:
            if not self.free_fast:
                return None
            frame = min(self.free_fast)
        else:
            frame = self._scan
        self.free_fast.discard(frame)
        return frame


class MigrationJob:
    __slots__ = ("hot_vpn", "hot_ua", "victim_vpn", "victim_ua", "pair",
                 "re_migration", "hot_src", "hot_dst", "victim_dst",
                 "bitvec_in", "bitvec_out", "hot_buffer", "cold_buffer",
                 "schedule", "ptr", "step", "start_time", "transfer_end",
                 "retire_time", "s2_land", "stalled_requests", "buffer_served",
                 "redirected")

    def __init__(self, hot_vpn, hot_ua, hot_src, hot_dst, lines_per_page,
                 victim_vpn=None, victim_ua=None, victim_dst=None,
                 re_migration=False):
        self.hot_vpn = hot_vpn
        self.hot_ua = hot_ua
        self.victim_vpn = victim_vpn
        self.victim_ua = victim_ua
        self.pair = victim_vpn is not None
        self.re_migration = re_migration
        self.hot_src: PhysicalFrame = hot_src          # slow tier
        self.hot_dst: PhysicalFrame = hot_dst          # fast tier (victim's old frame if pair)
        self.victim_dst: Optional[PhysicalFrame] = victim_dst  # hot page's old frame
        self.bitvec_in = BitVector(lines_per_page)
        self.bitvec_out = BitVector(lines_per_page)
        self.hot_buffer: Optional[TransferBuffer] = None
        self.cold_buffer: Optional[TransferBuffer] = None
        self.schedule: list[tuple[int, int, int]] = []
        self.ptr = 0
        self.step = 1
        self.start_time = 0
        self.transfer_end = 0
        self.retire_time = 0
        self.s2_land: list[int] = []
        self.stalled_requests = 0
        self.buffer_served = 0
        self.redirected = 0

    def involves_vpn(self, vpn: int) -> bool:
        return vpn == self.hot_vpn or vpn == self.victim_vpn

    def involves_ua(self, ua: int) -> bool:
        return ua == self.hot_ua or ua == self.victim_ua

    def line_target(self, vpn: int, line: int):
        """Where one line of an in-flight page lives right now."""
        if vpn == self.hot_vpn:
            if self.bitvec_in.test(line):
                return FrameAccess(self.hot_dst, line)
            if self.cold_buffer is not None and self.cold_buffer.has(line):
                return BufferAccess(COLD, line)
            return FrameAccess(self.hot_src, line)  # source still authoritative
        assert vpn == self.victim_vpn
        if self.bitvec_out.test(line):
            return FrameAccess(self.victim_dst, line)
        if self.hot_buffer is not None and self.hot_buffer.has(line):
            return BufferAccess(HOT, line)
        # not staged yet: on hold until the line reaches the hot buffer
        return StallUntilBuffered(self.s2_land[line], line)


class MigrationEngine:
    """Owns the single active job, the admission queue, and the buffers."""

    def __init__(self, geom: MemoryGeometry, lat, backing, translation,
                 occupancy: FrameOccupancy, duon: bool, lines_per_page: int,
                 queue_capacity: int = ADMISSION_QUEUE_CAPACITY):
        self.geom = geom
        self.lat = lat
        self.backing = backing
        self.translation = translation
        self.occupancy = occupancy
        self.duon = duon
        self.lines_per_page = lines_per_page
        self.queue_capacity = queue_capacity
        self.hot_buffer = TransferBuffer(HOT, lines_per_page)
        self.cold_buffer = TransferBuffer(COLD, lines_per_page)
        self.active: Optional[MigrationJob] = None
        self.queue: deque[int] = deque()       # hot UAs awaiting admission
        self.pending_uas: set[int] = set()
        self.wait_queue = WaitQueue()
        self.migq = MigrationQueue()
        self.migration_count = 0
        self.remigration_count = 0
        self.dropped_overflow = 0
        self.dropped_stale = 0
        self.job_records: list[dict] = []
        self.on_retire = None   # wired by the simulator
        # frame resolver for quiesced pages; the simulator overrides this in
        # baseline mode, where the remap table (not the page table) decides
        self.frame_of = translation.effective_frame

    # -- admission -------------------------------------------------------

    def request_migration(self, hot_ua: int, now: int) -> AdmitResult:
        vpn = self.translation.ua_to_vpn.get(hot_ua)
        if vpn is None:
            return AdmitResult("rejected", None, RejectReason.ALREADY_FAST)
        entry = self.translation.ept[vpn]
        if self.frame_of(entry).tier is Tier.FAST:
            return AdmitResult("rejected", None, RejectReason.ALREADY_FAST)
        if entry.ongoing or hot_ua in self.pending_uas or \
                (self.active is not None and self.active.involves_vpn(vpn)):
            return AdmitResult("rejected", None, RejectReason.IN_FLIGHT)
        if self.active is None:
            job = self._start_job(hot_ua, now)
            if job is None:
                return AdmitResult("rejected", None, RejectReason.NO_CAPACITY)
            return AdmitResult("started", job, None)
        if len(self.queue) >= self.queue_capacity:
            self.dropped_overflow += 1
            return AdmitResult("rejected", None, RejectReason.QUEUE_FULL)
        self.queue.append(hot_ua)
        self.pending_uas.add(hot_ua)
        return AdmitResult("queued", None, None)

    def is_protected(self, vpn: int) -> bool:
        """True if fault eviction must leave this page alone."""
        if self.active is not None and self.active.involves_vpn(vpn):
            return True
        entry = self.translation.ept.get(vpn)
        return entry is not None and entry.ua in self.pending_uas

    def select_victim(self, hot_vpn: int) -> Optional[int]:
        """LRU fast-resident page; ties broken by lowest vpn."""
        best = None
        best_key = None
        ept = self.translation.ept
        for vpn in self.translation.fast_resident:
            if vpn == hot_vpn:
                continue
            entry = ept[vpn]
            if entry.ongoing:
                continue
            key = (entry.last_access_cycle, vpn)
            if best_key is None or key < best_key:
                best, best_key = vpn, key
        return best

    def _start_job(self, hot_ua: int, now: int) -> Optional[MigrationJob]:
        ts = self.translation
        hot_vpn = ts.ua_to_vpn[hot_ua]
        hot_entry = ts.ept[hot_vpn]
        hot_src = self.frame_of(hot_entry)
        assert hot_src.tier is Tier.SLOW
        re_mig = hot_entry.migrated

        free_frame = self.occupancy.take_free_fast()
        if free_frame is not None:
            dst = PhysicalFrame(Tier.FAST, free_frame)
            ts.reserve_ua(ua_of_frame(dst, self.geom))
            job = MigrationJob(hot_vpn, hot_ua, hot_src, dst,
                               self.lines_per_page, re_migration=re_mig)
        else:
            victim_vpn = self.select_victim(hot_vpn)
            if victim_vpn is None:
                return None
            victim_entry = ts.ept[victim_vpn]
            victim_src = self.frame_of(victim_entry)
            assert victim_src.tier is Tier.FAST
            job = MigrationJob(hot_vpn, hot_ua, hot_src, victim_src,
                               self.lines_per_page, victim_vpn=victim_vpn,
                               victim_ua=victim_entry.ua, victim_dst=hot_src,
                               re_migration=re_mig)

        ack = 0
        if self.duon:
            if job.pair:
                ack += ts.mark_migration_start(job.victim_vpn, pair=True, residency=HOT)
            if not job.pair or re_mig:
                # one-way movers and re-migrations carry the in-flight flag;
                # a first-time pair migration flags only the victim
                ack += ts.mark_migration_start(hot_vpn, pair=job.pair, residency=COLD)

        self._build_schedule(job, now + ack)
        job.hot_buffer = self.hot_buffer
        job.cold_buffer = self.cold_buffer
        if job.pair:
            self.hot_buffer.acquire(job.victim_vpn)
        self.cold_buffer.acquire(hot_vpn)
        job.step = 2 if job.pair else 3
        self.active = job
        self.migration_count += 1
        if re_mig:
            self.remigration_count += 1
        return job

    def _build_schedule(self, job: MigrationJob, start: int) -> None:
        lat = self.lat
        lpp = self.lines_per_page
        sched = []
        job.start_time = start
        t = start
        if job.pair:
            job.s2_land = [start + (i + 1) * lat.fast_read + lat.buffer_access
                           for i in range(lpp)]
            for i, land in enumerate(job.s2_land):
                sched.append((land, _S2_BUF, i))
            t = job.s2_land[-1]
        s3_frame_land = 0
        for i in range(lpp):
            buf_land = t + (i + 1) * lat.slow_read
            s3_frame_land = buf_land + lat.fast_write
            sched.append((buf_land, _S3_BUF, i))
            sched.append((s3_frame_land, _S3_FRAME, i))
        t = s3_frame_land
        if job.pair:
            drains = [s3_frame_land + lat.buffer_access + (i + 1) * lat.slow_write
                      for i in range(lpp)]
            for i, d in enumerate(drains):
                sched.append((d, _S4_FRAME, i))
            t = drains[-1]
        sched.append((t, _RETIRE, 0))
        sched.sort(key=lambda e: e[0])  # stable: build order breaks ties
        job.schedule = sched
        job.transfer_end = t

    # -- time advancement ------------------------------------------------

    def advance(self, now: int) -> None:
        """Materialize every scheduled transfer with completion time <= now."""
        while self.active is not None:
            job = self.active
            sched = job.schedule
            progressed = False
            while job.ptr < len(sched) and sched[job.ptr][0] <= now:
                t, kind, line = sched[job.ptr]
                job.ptr += 1
                self._apply(job, t, kind, line)
                progressed = True
                if self.active is not job:
                    break  # job retired; outer loop picks up any successor
            if self.active is job or not progressed:
                return

    def _apply(self, job: MigrationJob, t: int, kind: int, line: int) -> None:
        backing = self.backing
        if kind == _S2_BUF:
            self.migq.issue(Tier.FAST, t)
            self.hot_buffer.put(line, backing.read_line(job.hot_dst, line))
        elif kind == _S3_BUF:
            if job.step < 3:
                job.step = 3
            self.migq.issue(Tier.SLOW, t)
            self.cold_buffer.put(line, backing.read_line(job.hot_src, line))
        elif kind == _S3_FRAME:
            backing.write_line(job.hot_dst, line, self.cold_buffer.take(line))
            job.bitvec_in.set(line)
            if job.bitvec_in.all_set():
                self._transfers_done(job)
        elif kind == _S4_FRAME:
            backing.write_line(job.victim_dst, line, self.hot_buffer.take(line))
            job.bitvec_out.set(line)
        elif kind == _RETIRE:
            self._retire(job, t)

    def _transfers_done(self, job: MigrationJob) -> None:
        # step 3 -> 4 boundary: the incoming page is fully fast-resident and the
        # remapped addresses become visible (migrated still clear until step 5)
        if self.duon:
            self.translation.set_remap_address(job.hot_vpn, job.hot_dst)
            if job.pair:
                self.translation.set_remap_address(job.victim_vpn, job.victim_dst)
        if job.pair:
            job.step = 4

    def _retire(self, job: MigrationJob, t: int) -> None:
        ts = self.translation
        job.step = 5
        ack = 0
        if self.duon:
            if job.pair:
                ack += ts.mark_migration_complete(job.victim_vpn, job.victim_dst, pair=True)
            ack += ts.mark_migration_complete(job.hot_vpn, job.hot_dst, pair=job.pair)
        job.retire_time = t + ack
        if not job.pair:
            # the hot page's old slow frame keeps belonging to its UA; nothing
            # else can be placed there, so no frame returns to the free pool
            pass
        job.bitvec_in.reset()
        job.bitvec_out.reset()
        if job.pair:
            self.hot_buffer.release()
        self.cold_buffer.release()
        self.job_records.append({
            "hot_vpn": job.hot_vpn,
            "victim_vpn": job.victim_vpn if job.pair else None,
            "pair": int(job.pair),
            "start_cycle": job.start_time,
            "end_cycle": job.retire_time,
            "stalled_requests": job.stalled_requests,
            "buffer_served": job.buffer_served,
            "redirected": job.redirected,
        })
        self.active = None
        if self.on_retire is not None:
            self.on_retire(job, job.retire_time)
        self._admit_next(job.retire_time)

    def _admit_next(self, now: int) -> None:
        ts = self.translation
        while self.queue and self.active is None:
            ua = self.queue.popleft()
            self.pending_uas.discard(ua)
            vpn = ts.ua_to_vpn.get(ua)
            if vpn is None:
                self.dropped_stale += 1
                continue
            entry = ts.ept[vpn]
            if self.frame_of(entry).tier is Tier.FAST or entry.ongoing:
                self.dropped_stale += 1
                continue
            if self._start_job(ua, now) is None:
                self.dropped_stale += 1

    # -- demand-access interception --------------------------------------

    def intercept_fill(self, core: int, vpn: int, line: int, at: int):
        """Route a demand fill for a line of an in-flight page.

        Returns (value, memory_latency, stall_cycles, deferred). When deferred
        is True the job retired while the request was on hold and the caller
        must resolve the line through the page table as usual; only the stall
        cycles are meaningful then.
        """
        job = self.active
        assert job is not None and job.involves_vpn(vpn), \
            "intercept_fill on a page with no migration in flight"
        target = job.line_target(vpn, line)
        if isinstance(target, StallUntilBuffered):
            ready = target.ready_at
            stall = max(0, ready - at)
            job.stalled_requests += 1
            self.wait_queue.record(core, vpn, line, at, ready)
            self.advance(ready)  # the line lands in the hot buffer right now
            job = self.active
            if job is None or not job.involves_vpn(vpn):
                return None, 0, stall, True
            target = job.line_target(vpn, line)
            assert not isinstance(target, StallUntilBuffered)
            value, mem_lat = self._serve(job, target)
            return value, mem_lat, stall, False
        value, mem_lat = self._serve(job, target)
        return value, mem_lat, 0, False

    def _serve(self, job: MigrationJob, target):
        if isinstance(target, BufferAccess):
            buf = self.hot_buffer if target.residency == HOT else self.cold_buffer
            job.buffer_served += 1
            return buf.lines[target.line], self.lat.buffer_access
        assert isinstance(target, FrameAccess)
        job.redirected += 1
        lat = self.lat.fast_read if target.frame.tier is Tier.FAST else self.lat.slow_read
        return self.backing.read_line(target.frame, target.line), lat

    def intercept_writeback(self, vpn: int, line: int, value: int, at: int) -> int:
        """Route a dirty eviction of a line of an in-flight page; returns latency."""
        job = self.active
        assert job is not None and job.involves_vpn(vpn)
        target = job.line_target(vpn, line)
        if isinstance(target, StallUntilBuffered):
            # writeback to a victim line that has not staged yet: the source
            # frame is still authoritative and step 2 will carry the new value
            frame = job.hot_dst  # victim's source frame
            self.backing.write_line(frame, line, value)
            return self.lat.fast_write
        if isinstance(target, BufferAccess):
            buf = self.hot_buffer if target.residency == HOT else self.cold_buffer
            buf.write(target.line, value)
            job.buffer_served += 1
            return self.lat.buffer_access
        assert isinstance(target, FrameAccess)
        self.backing.write_line(target.frame, target.line, value)
        job.redirected += 1
        return self.lat.fast_write if target.frame.tier is Tier.FAST else self.lat.slow_write

    def drain(self) -> None:
        """Run every queued and active job to retirement (end of trace)."""
        guard = 0
        while self.active is not None:
            self.advance(self.active.schedule[-1][0])
            guard += 1
            assert guard < 1_000_000, "migration drain failed to make progress"
