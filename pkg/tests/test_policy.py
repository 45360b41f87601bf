"""Promotion policies, the adaptive trigger, and remap-table reconcile."""
import pytest

from duonsim import (MigrationPolicy, PhysicalFrame, PolicyConfig, PolicyKind,
                     RemapTable, Tier, reconcile)
from duonsim.policy import ReconcileReport
from duonsim.translation import CapacityError


def make_policy(**kw):
    return MigrationPolicy(PolicyConfig(**kw))


# -- config ----------------------------------------------------------------


def test_config_accepts_kind_strings():
    cfg = PolicyConfig(kind="epoch")
    assert cfg.kind is PolicyKind.EPOCH


@pytest.mark.parametrize("kw", [
    {"threshold": 0},
    {"epoch_us": 0},
    {"adapt_min_threshold": 0},
    {"adapt_min_threshold": 64, "adapt_max_threshold": 32},
    {"adapt_period_epochs": 0},
    {"remap_capacity": 1},
    {"shootdown_cost": -1},
    {"line_invalidate_cost": -1},
])
def test_config_rejects_bad_values(kw):
    with pytest.raises(ValueError):
        PolicyConfig(**kw)


# -- threshold trigger -----------------------------------------------------


def test_threshold_fires_exactly_at_crossing():
    pol = make_policy(kind="threshold", threshold=3)
    hits = [pol.record_access(7, page_is_fast=False) for _ in range(5)]
    assert hits == [False, False, True, False, False]
    assert pol.candidates_emitted == 1


def test_threshold_never_fires_for_fast_pages():
    pol = make_policy(kind="threshold", threshold=2)
    assert not any(pol.record_access(7, page_is_fast=True) for _ in range(4))


def test_no_migration_counts_nothing():
    pol = make_policy(kind="none")
    assert not any(pol.record_access(7, page_is_fast=False) for _ in range(100))
    assert pol.counts == {} and pol.epoch_counts == {}


def test_reset_page_restarts_the_count():
    pol = make_policy(kind="threshold", threshold=2)
    pol.record_access(7, page_is_fast=False)
    pol.reset_page(7)
    assert not pol.record_access(7, page_is_fast=False)
    assert pol.record_access(7, page_is_fast=False)


# -- epoch batching --------------------------------------------------------


def test_epoch_recording_defers_to_boundary():
    pol = make_policy(kind="epoch", threshold=64)
    for ua, n in ((5, 70), (9, 64), (2, 10)):
        for _ in range(n):
            assert not pol.record_access(ua, page_is_fast=False)
    assert pol.epoch_candidates(lambda ua: False) == [5, 9]
    # boundary consumed the counters
    assert pol.epoch_counts == {}
    assert pol.epoch_candidates(lambda ua: False) == []
    assert pol.candidates_emitted == 2


def test_epoch_orders_by_count_then_ua():
    pol = make_policy(kind="epoch", threshold=1)
    for ua, n in ((8, 5), (3, 5), (1, 2)):
        for _ in range(n):
            pol.record_access(ua, page_is_fast=False)
    assert pol.epoch_candidates(lambda ua: False) == [3, 8, 1]


def test_epoch_skips_pages_already_fast():
    pol = make_policy(kind="epoch", threshold=2)
    for _ in range(3):
        pol.record_access(4, page_is_fast=False)
        pol.record_access(6, page_is_fast=False)
    assert pol.epoch_candidates(lambda ua: ua == 4) == [6]


def test_epoch_candidates_empty_for_other_kinds():
    pol = make_policy(kind="threshold")
    pol.record_access(4, page_is_fast=False)
    assert pol.epoch_candidates(lambda ua: False) == []


# -- adaptive threshold ----------------------------------------------------


def test_adapt_moves_with_the_ipc_trend():
    pol = make_policy(kind="adapt-thold", threshold=64)
    assert pol.adapt(1.00) == 64          # first window: nothing to compare
    assert pol.adapt(1.10) == 32          # improving: migrate more eagerly
    assert pol.adapt(1.00) == 64          # regressing: back off
    assert pol.adapt(1.002) == 64         # within deadband: hold
    assert pol.threshold_history == [64, 64, 32, 64, 64]


def test_adapt_clamps_to_bounds():
    pol = make_policy(kind="adapt-thold", threshold=16,
                      adapt_min_threshold=16, adapt_max_threshold=32)
    pol.adapt(1.0)
    assert pol.adapt(2.0) == 16           # halving stops at the floor
    assert pol.adapt(1.0) == 32
    assert pol.adapt(0.5) == 32           # doubling stops at the ceiling


def test_adapt_ignores_zero_previous_window():
    pol = make_policy(kind="adapt-thold", threshold=64)
    pol.adapt(0.0)
    assert pol.adapt(1.0) == 64


# -- remap table -----------------------------------------------------------

F = [PhysicalFrame(Tier.FAST, i) for i in range(8)]


def test_remap_lookup_prefers_live_entries():
    rt = RemapTable(capacity=8)
    assert rt.lookup(5) is None
    rt.insert(5, F[1])
    assert rt.lookup(5) == F[1]
    rt.drain()
    assert rt.lookup(5) == F[1]           # canonical keeps the mapping
    rt.insert(5, F[2])
    assert rt.lookup(5) == F[2]           # live entry shadows canonical


def test_remap_reconcile_level_is_half_capacity():
    rt = RemapTable(capacity=8)
    for ua in range(3):
        rt.insert(ua, F[ua])
        assert not rt.needs_reconcile
    rt.insert(3, F[3])
    assert rt.needs_reconcile
    assert rt.drain() == [(ua, F[ua]) for ua in range(4)]
    assert rt.occupancy == 0 and not rt.needs_reconcile


def test_remap_overflow_without_reconcile_is_an_error():
    rt = RemapTable(capacity=2)
    rt.insert(0, F[0])
    rt.insert(1, F[1])
    rt.insert(1, F[2])                    # rewriting a held slot is fine
    with pytest.raises(CapacityError):
        rt.insert(2, F[3])


# -- reconcile costing -----------------------------------------------------


class _FanoutTcm:
    def __init__(self, holders, cost):
        self.holders = holders
        self.cost = cost
        self.calls = 0

    def shootdown(self, vpn):
        self.calls += 1
        return self.holders, self.cost


class _PageCache:
    def __init__(self, lines, dirty=()):
        self.lines = lines
        self.dirty = list(dirty)

    def invalidate_page_lines(self, ua, reason):
        assert reason == "migration"
        return self.lines, self.dirty


class _Mapped:
    def __init__(self, uas):
        self.ua_to_vpn = {ua: 0x100 + ua for ua in uas}


def test_reconcile_bill_for_ten_pages_sixteen_cores():
    cfg = PolicyConfig(shootdown_cost=4000, line_invalidate_cost=20)
    rt = RemapTable(capacity=64)
    for ua in range(10):
        rt.insert(ua, PhysicalFrame(Tier.FAST, ua))
    rep = reconcile(rt, _FanoutTcm(16, 4000), _PageCache(64),
                    _Mapped(range(10)), cfg, write_line=lambda *a: None)
    assert rep == ReconcileReport(entries=10, tlb_shootdowns=160,
                                  cache_lines_invalidated=640,
                                  overhead_cycles=10 * 4000 + 640 * 20)
    assert rep.overhead_cycles == 52_800
    assert rt.occupancy == 0
    assert rt.canonical[3] == PhysicalFrame(Tier.FAST, 3)


def test_reconcile_flushes_dirty_lines_to_current_frame():
    cfg = PolicyConfig()
    rt = RemapTable(capacity=8)
    rt.insert(4, F[2])
    flushed = []
    reconcile(rt, _FanoutTcm(1, 4000), _PageCache(2, dirty=[(7, 0xAB)]),
              _Mapped([4]), cfg, write_line=lambda f, l, v: flushed.append((f, l, v)))
    assert flushed == [(F[2], 7, 0xAB)]


def test_reconcile_unmapped_page_still_pays_broadcast():
    cfg = PolicyConfig(shootdown_cost=100, line_invalidate_cost=1)
    rt = RemapTable(capacity=8)
    rt.insert(9, F[1])
    tcm = _FanoutTcm(16, 100)
    rep = reconcile(rt, tcm, _PageCache(0), _Mapped([]), cfg,
                    write_line=lambda *a: None)
    assert tcm.calls == 0                 # nothing mapped, no real broadcast
    assert rep.tlb_shootdowns == 0
    assert rep.overhead_cycles == 100
