"""Trace-driven simulator for flat-address tiered memory.

A multi-core, cycle-accounting model of a two-tier main memory (fast + slow in
one flat physical address space) where page migration is handled by a remapping
layer in the extended page table and TLBs, so migrating a page never requires a
TLB shootdown or a cache invalidation. Baseline modes model the conventional
alternative: a bounded remap table whose reconciliation pays both costs.
"""

from .backing import FrameStore
from .cache import CacheConfig, CacheHierarchy
from .coherence import CoherenceViolation, TlbCoherenceModule
from .config import (ConfigError, PRESETS, build_sim_config, default_document,
                     document_from, parse_size, preset_document)
from .engine import (AccessDetail, LatencyTable, LedgerError, OracleMismatch,
                     SimConfig, SimStats, Simulator, hbm_ddr4_latencies,
                     hbm_pcm_latencies, ns_to_cycles, oracle_replay,
                     run_simulation, value_for)
from .geometry import (MemoryGeometry, OverheadReport, PhysicalFrame, Tier,
                       conventional_tlb_bytes, default_frame_of,
                       ept_storage_overhead, overhead_report,
                       tlb_storage_overhead, ua_of_frame)
from .migration import (AdmitResult, BitVector, MigrationEngine, MigrationJob,
                        RejectReason, TransferBuffer)
from .policy import (MigrationPolicy, PolicyConfig, PolicyKind, RemapTable,
                     reconcile)
from .rng import SplitMix64, mix64
from .translation import (BufferAccess, CapacityError, ConflictError,
                          EptEntry, FrameAccess, PageFaultError, StateError,
                          StallUntilBuffered, Tlb, TlbEntry, TranslationState,
                          resolve_memory_target)
from .workload import (TRACE_HEADER, TraceEvent, TraceFormatError, TraceSpec,
                       generate_trace, read_trace, split_by_core, write_trace)

__version__ = "0.1.0"

__all__ = [
    "AccessDetail", "AdmitResult", "BitVector", "BufferAccess", "CacheConfig",
    "CacheHierarchy", "CapacityError", "CoherenceViolation", "ConfigError",
    "ConflictError", "EptEntry", "FrameAccess", "FrameStore", "LatencyTable",
    "LedgerError", "MemoryGeometry", "MigrationEngine", "MigrationJob",
    "MigrationPolicy", "OracleMismatch", "OverheadReport", "PRESETS",
    "PageFaultError", "PhysicalFrame", "PolicyConfig", "PolicyKind",
    "RejectReason", "RemapTable", "SimConfig", "SimStats", "Simulator",
    "SplitMix64", "StallUntilBuffered", "StateError", "TRACE_HEADER", "Tier",
    "Tlb", "TlbCoherenceModule", "TlbEntry", "TraceEvent", "TraceFormatError",
    "TraceSpec", "TranslationState", "TransferBuffer", "build_sim_config",
    "conventional_tlb_bytes", "default_document", "default_frame_of",
    "document_from", "ept_storage_overhead", "generate_trace",
    "hbm_ddr4_latencies", "hbm_pcm_latencies", "mix64", "ns_to_cycles",
    "oracle_replay", "overhead_report", "parse_size", "preset_document",
    "read_trace", "reconcile", "resolve_memory_target", "run_simulation",
    "split_by_core", "tlb_storage_overhead", "ua_of_frame", "value_for",
    "write_trace",
]
