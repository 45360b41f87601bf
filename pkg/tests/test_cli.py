"""Command-line behavior: outputs, determinism, exit codes."""
import csv

import pytest

from duonsim import TRACE_HEADER
from duonsim.cli import main
from duonsim.engine import MIGRATIONS_COLUMNS, STATS_COLUMNS


def tiny_args(out_dir, extra=()):
    """A run small enough for test time but busy enough to migrate."""
    args = [
        "--override", "sim.cores=2",
        "--override", "sim.tlb_entries=16",
        "--override", "geometry.fast=64KiB",
        "--override", "geometry.slow=256KiB",
        "--override", "cache.l1_size=1KiB",
        "--override", "cache.l1_assoc=2",
        "--override", "cache.llc_size=8KiB",
        "--override", "cache.llc_assoc=4",
        "--override", "policy.threshold=8",
        "--override", "trace.footprint_pages=32",
        "--override", "trace.events_per_core=300",
        "--out", str(out_dir),
    ]
    args.extend(extra)
    return args


# -- overhead --------------------------------------------------------------


def test_overhead_defaults_print_exact_csv(capsys):
    assert main(["overhead"]) == 0
    out = capsys.readouterr().out
    assert out == ("ept_bytes,tlb_bytes,fraction\n"
                   "14352384,12800,0.000786276\n")


def test_overhead_preset_and_verbose(capsys):
    assert main(["overhead", "--preset", "config2", "--verbose"]) == 0
    captured = capsys.readouterr()
    assert captured.out.splitlines()[1] == "13795328,12800,0.000790640"
    assert "tlb_fraction_of_extended=0.290698" in captured.err
    assert "tlb_fraction_of_conventional=0.409836" in captured.err


def test_overhead_writes_csv_when_asked(tmp_path, capsys):
    assert main(["overhead", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "overhead.csv").read_text()
    assert text == ("ept_bytes,tlb_bytes,fraction\n"
                    "14352384,12800,0.000786276\n")


def test_overhead_rejects_empty_geometry(capsys):
    assert main(["overhead", "--fast", "0", "--slow", "0"]) == 2
    assert "error:" in capsys.readouterr().err


# -- gen-trace -------------------------------------------------------------


def test_gen_trace_writes_header_and_warns_on_default_seed(tmp_path, capsys):
    out = tmp_path / "t.trace"
    assert main(["gen-trace", str(out), "--cores", "2",
                 "--footprint-pages", "8", "--events-per-core", "50"]) == 0
    captured = capsys.readouterr()
    assert "no --seed given, defaulting to 0" in captured.err
    lines = out.read_text().splitlines()
    assert lines[0] == TRACE_HEADER
    assert len(lines) == 1 + 2 * 50


def test_gen_trace_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.trace", tmp_path / "b.trace"
    common = ["--cores", "2", "--footprint-pages", "8",
              "--events-per-core", "50", "--seed", "7"]
    assert main(["gen-trace", str(a)] + common) == 0
    assert main(["gen-trace", str(b)] + common) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "defaulting" not in capsys.readouterr().err


# -- simulate --------------------------------------------------------------


def test_simulate_writes_the_three_outputs(tmp_path, capsys):
    assert main(["simulate"] + tiny_args(tmp_path)) == 0
    out = capsys.readouterr().out
    assert out.startswith("aggregate_ipc=")
    with open(tmp_path / "stats.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == STATS_COLUMNS
    assert len(rows) == 1 + 2 + 1          # header, two cores, aggregate
    assert rows[-1][0] == "all"
    with open(tmp_path / "migrations.csv", newline="") as fh:
        mig_rows = list(csv.reader(fh))
    assert tuple(mig_rows[0]) == MIGRATIONS_COLUMNS
    assert len(mig_rows) > 1               # the tiny workload does migrate
    summary = (tmp_path / "summary.md").read_text()
    assert summary.startswith("# Simulation summary")
    assert "aggregate IPC" in summary


def test_simulate_stats_are_byte_identical_across_runs(tmp_path, capsys):
    assert main(["simulate"] + tiny_args(tmp_path / "a")) == 0
    assert main(["simulate"] + tiny_args(tmp_path / "b")) == 0
    capsys.readouterr()
    for name in ("stats.csv", "migrations.csv"):
        assert (tmp_path / "a" / name).read_bytes() == \
               (tmp_path / "b" / name).read_bytes()


def test_simulate_consumes_trace_files(tmp_path, capsys):
    trace = tmp_path / "t.trace"
    assert main(["gen-trace", str(trace), "--cores", "2",
                 "--footprint-pages", "32", "--events-per-core", "100",
                 "--seed", "3"]) == 0
    cfg = tmp_path / "c.json"
    cfg.write_text('{"trace": {"file": "%s"}}' % trace)
    args = ["simulate", "--config", str(cfg), "--out", str(tmp_path / "out"),
            "--override", "sim.cores=2",
            "--override", "geometry.fast=64KiB",
            "--override", "geometry.slow=256KiB"]
    assert main(args) == 0
    assert (tmp_path / "out" / "stats.csv").exists()


def test_simulate_trace_log(tmp_path, capsys):
    assert main(["simulate", "--trace-log"] + tiny_args(tmp_path)) == 0
    log = (tmp_path / "trace_log.txt").read_text().splitlines()
    assert len(log) == 2 * 300
    assert log[0].count(",") == 6


# -- sweep -----------------------------------------------------------------


def test_sweep_normalizes_against_the_named_baseline(tmp_path, capsys):
    extra = ["--axis", "policy.duon=true,false",
             "--baseline", "policy.duon=false"]
    assert main(["sweep"] + tiny_args(tmp_path, extra)) == 0
    with open(tmp_path / "sweep.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["policy.duon", "aggregate_ipc", "normalized_ipc",
                       "migrations", "shootdown_events", "reconciles"]
    assert len(rows) == 3
    by_mode = {row[0]: row for row in rows[1:]}
    assert by_mode["false"][2] == "1.000000"
    assert float(by_mode["true"][2]) > 0
    assert "sweep: 2 points" in capsys.readouterr().out


def test_sweep_rejects_unknown_axis_key(tmp_path, capsys):
    extra = ["--axis", "policy.bogus=1,2"]
    assert main(["sweep"] + tiny_args(tmp_path, extra)) == 2
    assert "not a config key" in capsys.readouterr().err


# -- dump-ept and report ---------------------------------------------------


def test_dump_ept_lists_every_mapped_page(tmp_path, capsys):
    assert main(["dump-ept"] + tiny_args(tmp_path)) == 0
    with open(tmp_path / "ept.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:4] == ["vpn", "ua", "valid", "dirty"]
    assert len(rows) == 1 + 32             # every premapped page
    migrated = [r for r in rows[1:] if r[4] == "1"]
    assert migrated and all(r[8] in ("fast", "slow") for r in migrated)


def test_report_renders_any_tool_csv(tmp_path, capsys):
    assert main(["simulate"] + tiny_args(tmp_path)) == 0
    capsys.readouterr()
    assert main(["report", str(tmp_path / "stats.csv")]) == 0
    out = capsys.readouterr().out
    assert "instructions" in out
    assert "(3 rows)" in out


def test_report_missing_file_is_an_input_error(tmp_path, capsys):
    assert main(["report", str(tmp_path / "nope.csv")]) == 2


# -- exit codes ------------------------------------------------------------


def test_bad_override_exits_2(tmp_path, capsys):
    assert main(["simulate", "--override", "sim.banana=1",
                 "--out", str(tmp_path)]) == 2
    assert "sim.banana" in capsys.readouterr().err


def test_conflicting_config_sources_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text("{}")
    assert main(["simulate", "--config", str(cfg),
                 "--preset", "config1", "--out", str(tmp_path)]) == 2


def test_consistency_failure_exits_3(tmp_path, capsys):
    """A hand-written trace with a cross-core read of another core's write
    trips the value checker; the tool must say so and exit 3."""
    trace = tmp_path / "bad.trace"
    trace.write_text(f"{TRACE_HEADER}\n"
                     "0,R,0x0,1\n0,W,0x0,1\n"
                     "1,R,0x1000,1\n1,R,0x0,1\n")
    cfg = tmp_path / "c.json"
    cfg.write_text('{"trace": {"file": "%s"}}' % trace)
    rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path),
               "--override", "sim.cores=2",
               "--override", "geometry.fast=16KiB",
               "--override", "geometry.slow=16KiB",
               "--override", "policy.kind=none"])
    assert rc == 3
    assert "consistency failure" in capsys.readouterr().err
