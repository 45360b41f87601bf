"""Two-level inclusive hierarchy: hits, evictions, back-invalidation, sweeps."""
import pytest

from duonsim import CacheConfig, CacheHierarchy
from duonsim.cache import SetAssocCache


def small_hier(cores=2):
    # 2-way 128 B L1 (4 sets? no: 128/64/2 = 1 set), 4-way 512 B LLC
    cfg = CacheConfig(l1_size=128, l1_assoc=2, llc_size=512, llc_assoc=4,
                      line_size=64)
    return CacheHierarchy(cfg, cores, lines_per_page=64)


def test_config_validation():
    with pytest.raises(ValueError):
        CacheConfig(l1_size=100, l1_assoc=2)       # not a multiple of lines
    with pytest.raises(ValueError):
        CacheConfig(l1_assoc=0)
    with pytest.raises(ValueError):
        CacheConfig(line_size=48)
    CacheConfig(l1_latency=0, llc_latency=0)       # zero latency is allowed


def test_set_assoc_lru_eviction_order():
    c = SetAssocCache(256, 2, 64)                  # 2 sets, 2 ways
    assert c.insert(0, False, 10) is None          # set 0
    assert c.insert(2, False, 30) is None          # set 0, second way
    c.lookup(0)                                    # 0 now MRU
    ev = c.insert(4, False, 50)                    # set 0 full: evicts 2
    assert ev == (2, False, 30)
    assert c.peek(0) is not None and c.peek(4) is not None


def test_probe_counts_levels():
    h = small_hier()
    assert h.probe(0, 5) == ("miss", None)
    h.fill(0, 5, 111)
    level, rec = h.probe(0, 5)
    assert level == "l1" and rec[1] == 111
    # the other core misses its L1 but hits the shared level
    level2, rec2 = h.probe(1, 5)
    assert level2 == "llc" and rec2[1] == 111
    assert h.l1_hits[0] == 1 and h.llc_hits[1] == 1
    assert h.l1_misses == [1, 1]


def test_fill_keeps_inclusion():
    h = small_hier(cores=1)
    for la in range(12):
        h.fill(0, la, la)
        assert h.check_inclusion()


def test_llc_eviction_back_invalidates_l1():
    h = small_hier(cores=1)
    h.fill(0, 0, 1)
    h.write_l1(0, 0, 99)                 # dirty in L1, clean in LLC
    # lines 0,4,8,12 share an LLC set (4 ways) and L1 set (2 ways)
    for la in (4, 8, 12):
        h.fill(0, la, la)
    wbs = h.fill(0, 16, 16)              # LLC evicts line 0
    assert wbs == [(0, 99)]              # freshest (L1) data written back
    assert h.l1s[0].peek(0) is None      # inclusion preserved by purge
    assert h.check_inclusion()


def test_clean_llc_eviction_is_silent():
    h = small_hier(cores=1)
    for la in (0, 4, 8, 12):
        h.fill(0, la, la)
    assert h.fill(0, 16, 16) == []


def test_l1_eviction_folds_dirt_into_llc():
    h = small_hier(cores=1)
    h.fill(0, 0, 1)
    h.write_l1(0, 0, 77)
    h.fill(0, 2, 2)                      # L1 set 0 (2 ways) now 0,2
    h.fill(0, 4, 4)                      # evicts 0 from L1
    rec = h.llc.peek(0)
    assert rec == [True, 77]             # dirt moved down, not lost


def test_invalidate_page_lines_l1_supersedes_llc():
    h = small_hier(cores=2)
    # ua 0 covers line addresses 0..63
    h.fill(0, 3, 10)
    h.write_l1(0, 3, 111)                # dirty L1 copy
    h.fill(1, 7, 20)                     # clean elsewhere
    count, wbs = h.invalidate_page_lines(0, reason="migration")
    assert count == 4                    # two lines, two levels each
    assert (3, 111) in wbs
    assert 7 not in [line for line, _ in wbs]   # clean line: no writeback
    assert h.invalidations_migration == 4
    assert h.probe(0, 3) == ("miss", None)
    assert h.l1_misses[0] == 1 and h.llc_misses[0] == 1


def test_invalidate_reason_attribution():
    h = small_hier()
    h.fill(0, 1, 5)
    h.invalidate_page_lines(0, reason="fault")
    assert h.invalidations_fault == 2 and h.invalidations_migration == 0


def test_invalidate_empty_page():
    h = small_hier()
    assert h.invalidate_page_lines(3, reason="migration") == (0, [])


def test_write_l1_requires_residency():
    h = small_hier()
    with pytest.raises(AssertionError):
        h.write_l1(0, 9, 1)
