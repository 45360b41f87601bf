"""Command-line front end.

Subcommands:

  simulate    one run; writes stats.csv, migrations.csv, summary.md
  sweep       cross-product of config axes; writes sweep.csv with normalized IPC
  overhead    storage-overhead calculator (CSV on stdout)
  gen-trace   synthetic trace file generator
  dump-ept    run a simulation, then dump the final page-table state as CSV
  report      pretty-print any CSV this tool wrote

Exit codes: 0 success, 2 configuration/input errors, 3 internal consistency
failures (oracle mismatch, coherence violation, ledger imbalance).
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .coherence import CoherenceViolation
from .config import (ConfigError, PRESETS, build_sim_config, document_from,
                     parse_size)
from .engine import (LedgerError, MIGRATIONS_COLUMNS, OracleMismatch,
                     STATS_COLUMNS, SimStats, Simulator)
from .geometry import MemoryGeometry, overhead_report
from .policy import PolicyKind
from .workload import (TraceFormatError, TraceSpec, generate_trace, read_trace,
                       split_by_core, write_trace)

OVERHEAD_COLUMNS = ("ept_bytes", "tlb_bytes", "fraction")
SWEEP_BASE_COLUMNS = ("aggregate_ipc", "normalized_ipc", "migrations",
                      "shootdown_events", "reconciles")


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON experiment config")
    p.add_argument("--preset", choices=PRESETS, help="built-in base config")
    p.add_argument("--override", metavar="KEY=VALUE", action="append",
                   default=[], help="config override, repeatable")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--seed", type=int, metavar="U64", help="simulation seed")


def _document(args):
    overrides = list(args.override)
    if args.seed is not None:
        overrides.append(f"sim.seed={args.seed}")
    doc = document_from(args.config, args.preset, overrides)
    if args.out:
        doc["output"]["dir"] = args.out
    return doc


def _load_events(trace_source, cores: int):
    kind, payload = trace_source
    if kind == "file":
        with open(payload, "r", encoding="utf-8") as fh:
            events = read_trace(fh)
    else:
        events = generate_trace(payload)
    return split_by_core(events, cores)


def _run_one(doc):
    sim_cfg, trace_source, out_dir = build_sim_config(doc)
    streams = _load_events(trace_source, sim_cfg.cores)
    sim = Simulator(sim_cfg)
    return sim, sim.run(streams), out_dir


def _summary_md(doc, stats: SimStats) -> str:
    sim_cfg, _, _ = build_sim_config(doc)
    geom = sim_cfg.geometry
    rep = overhead_report(geom, sim_cfg.tlb_entries)
    pol = doc["policy"]
    lines = [
        "# Simulation summary",
        "",
        "## Configuration",
        "",
        f"- cores: {sim_cfg.cores} at {sim_cfg.core_freq_ghz} GHz",
        f"- memory: {geom.fast_capacity} B fast + {geom.slow_capacity} B slow, "
        f"{geom.page_size} B pages",
        f"- policy: {pol['kind']} (duon={str(pol['duon']).lower()}, "
        f"threshold={pol['threshold']}, epoch={pol['epoch_us']} us)",
        f"- seed: {doc['sim']['seed']}",
        "",
        "## Results",
        "",
        f"- aggregate IPC: {stats.aggregate_ipc:.6f}",
        f"- instructions: {stats.total_instructions}",
        f"- cycles (max over cores): {stats.max_cycles}",
        f"- migrations: {stats.migration_count} "
        f"({stats.pair_migrations} pair, {stats.remigration_count} repeat)",
        f"- migration candidates emitted: {stats.candidates_emitted} "
        f"(dropped: {stats.migrations_dropped_overflow} overflow, "
        f"{stats.migrations_dropped_stale} stale)",
        f"- migration stall cycles: {stats.migration_stall_cycles} "
        f"(max single wait: {stats.wait_max})",
        f"- buffer-served requests: {stats.buffer_served}; "
        f"redirected to frames: {stats.redirected}",
        f"- TLB shootdowns: {stats.shootdown_events} events, "
        f"{stats.tlb_shootdowns} entry invalidations, "
        f"{stats.shootdown_cycles} cycles",
        f"- migration cache invalidations: {stats.lines_invalidated} lines, "
        f"{stats.invalidation_cycles} cycles",
        f"- reconciliations: {stats.reconcile_count} "
        f"({stats.reconcile_cycles} cycles)",
        f"- coherence broadcasts: {stats.tcm_broadcasts} "
        f"({stats.tcm_entry_updates} TLB entries patched in place)",
        f"- page walks: {stats.page_walks}; faults: {stats.page_faults}",
        f"- final threshold: {stats.threshold_final}",
        "",
        "## Storage overhead (this geometry)",
        "",
        f"- page-table extension: {rep.ept_extension_bytes} bytes "
        f"({rep.ept_fraction_of_memory:.6%} of memory)",
        f"- TLB extension: {rep.tlb_extension_bytes} bytes "
        f"({rep.tlb_fraction_of_extended:.2%} of the extended TLB, "
        f"{rep.tlb_fraction_of_conventional:.2%} of a conventional TLB)",
        "",
        "## Overhead cycles per epoch",
        "",
    ]
    if stats.overhead_cycles_per_epoch:
        for i, v in enumerate(stats.overhead_cycles_per_epoch):
            lines.append(f"- epoch {i}: {v}")
    else:
        lines.append("- (run shorter than one epoch)")
    lines.append("")
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    doc = _document(args)
    sim_cfg, trace_source, out_dir = build_sim_config(doc)
    streams = _load_events(trace_source, sim_cfg.cores)
    os.makedirs(out_dir, exist_ok=True)
    sim = Simulator(sim_cfg)
    log_fh = None
    if args.trace_log:
        log_fh = open(os.path.join(out_dir, "trace_log.txt"), "w",
                      encoding="utf-8")
        sim.trace_log = log_fh
    try:
        stats = sim.run(streams)
    finally:
        if log_fh is not None:
            log_fh.close()
    _write_csv(os.path.join(out_dir, "stats.csv"), STATS_COLUMNS,
               stats.stats_rows())
    _write_csv(os.path.join(out_dir, "migrations.csv"), MIGRATIONS_COLUMNS,
               stats.migration_rows())
    with open(os.path.join(out_dir, "summary.md"), "w", encoding="utf-8") as fh:
        fh.write(_summary_md(doc, stats))
    print(f"aggregate_ipc={stats.aggregate_ipc:.6f}")
    return 0


def _parse_axis(text: str):
    if "=" not in text:
        raise ConfigError(f"axis {text!r}: expected KEY=V1,V2,...")
    key, raw = text.split("=", 1)
    values = []
    for piece in raw.split(","):
        try:
            values.append(json.loads(piece))
        except json.JSONDecodeError:
            values.append(piece)
    if not values:
        raise ConfigError(f"axis {key}: no values")
    return key.strip(), values


def _sweep_point(base_doc, assignments):
    doc = json.loads(json.dumps(base_doc))
    for key, value in assignments:
        section, field = key.split(".", 1)
        doc.setdefault(section, {})[field] = value
    return doc


def _sweep_worker(doc_json: str) -> dict:
    doc = json.loads(doc_json)
    _, stats, _ = _run_one(doc)
    return {
        "aggregate_ipc": stats.aggregate_ipc,
        "migrations": stats.migration_count,
        "shootdown_events": stats.shootdown_events,
        "reconciles": stats.reconcile_count,
    }


def cmd_sweep(args) -> int:
    doc = _document(args)
    axes = [_parse_axis(a) for a in args.axis]
    if not axes:
        raise ConfigError("sweep needs at least one --axis KEY=V1,V2,...")
    from .config import default_document
    defaults = default_document()
    for key, _ in axes:
        if "." not in key:
            raise ConfigError(f"axis key {key!r} must be section.key")
        section, field = key.split(".", 1)
        # fail before any run starts if the key is bogus
        if section not in defaults or field not in defaults[section]:
            raise ConfigError(f"axis key {key!r} is not a config key")
    baseline = None
    if args.baseline:
        baseline = {}
        for spec in args.baseline:
            key, values = _parse_axis(spec)
            if len(values) != 1:
                raise ConfigError(f"baseline {spec!r}: give exactly one value")
            baseline[key] = values[0]
    out_dir = doc["output"]["dir"]
    os.makedirs(out_dir, exist_ok=True)
    keys = [k for k, _ in axes]
    value_lists = [vs for _, vs in axes]
    points = list(itertools.product(*value_lists))
    docs = [_sweep_point(doc, list(zip(keys, combo))) for combo in points]
    payloads = [json.dumps(d, sort_keys=True) for d in docs]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_worker, payloads))
    else:
        results = [_sweep_worker(p) for p in payloads]

    by_combo = {combo: res for combo, res in zip(points, results)}

    def partner_of(combo):
        if baseline is None:
            return points[0]
        partner = list(combo)
        for i, key in enumerate(keys):
            if key in baseline:
                partner[i] = baseline[key]
        return tuple(partner)

    rows = []
    for combo in points:
        res = by_combo[combo]
        partner = by_combo.get(partner_of(combo))
        if partner is not None and partner["aggregate_ipc"] > 0:
            norm = f"{res['aggregate_ipc'] / partner['aggregate_ipc']:.6f}"
        else:
            norm = ""
        rows.append([json.dumps(v) if isinstance(v, bool) else v for v in combo] +
                    [f"{res['aggregate_ipc']:.6f}", norm, res["migrations"],
                     res["shootdown_events"], res["reconciles"]])
    _write_csv(os.path.join(out_dir, "sweep.csv"),
               tuple(keys) + SWEEP_BASE_COLUMNS, rows)
    print(f"sweep: {len(points)} points -> {os.path.join(out_dir, 'sweep.csv')}")
    return 0


def cmd_overhead(args) -> int:
    if args.preset:
        from .config import preset_document
        doc = preset_document(args.preset)
        fast = parse_size(doc["geometry"]["fast"], "geometry.fast")
        slow = parse_size(doc["geometry"]["slow"], "geometry.slow")
        page = parse_size(doc["geometry"]["page_size"], "geometry.page_size")
    else:
        fast = parse_size(args.fast, "--fast")
        slow = parse_size(args.slow, "--slow")
        page = parse_size(args.page, "--page")
    if fast == 0 and slow == 0:
        raise ConfigError("empty geometry: --fast and --slow are both zero")
    geom = MemoryGeometry(fast, slow, page)
    rep = overhead_report(geom, args.tlb_entries)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(OVERHEAD_COLUMNS)
    writer.writerow([rep.ept_extension_bytes, rep.tlb_extension_bytes,
                     f"{rep.ept_fraction_of_memory:.9f}"])
    if args.verbose:
        print(f"tlb_fraction_of_extended={rep.tlb_fraction_of_extended:.6f}",
              file=sys.stderr)
        print(f"tlb_fraction_of_conventional={rep.tlb_fraction_of_conventional:.6f}",
              file=sys.stderr)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_csv(os.path.join(args.out, "overhead.csv"), OVERHEAD_COLUMNS,
                   [[rep.ept_extension_bytes, rep.tlb_extension_bytes,
                     f"{rep.ept_fraction_of_memory:.9f}"]])
    return 0


def cmd_gen_trace(args) -> int:
    if args.seed is None:
        print("gen-trace: no --seed given, defaulting to 0", file=sys.stderr)
        seed = 0
    else:
        seed = args.seed
    spec = TraceSpec(
        pattern=args.pattern, cores=args.cores,
        footprint_pages=args.footprint_pages,
        events_per_core=args.events_per_core, seed=seed,
        write_fraction=args.write_fraction, mean_icount=args.mean_icount,
        zipf_s=args.zipf_s, hot_fraction=args.hot_fraction,
        hot_bias=args.hot_bias, phase_events=args.phase_events)
    events = generate_trace(spec)
    with open(args.out_file, "w", encoding="utf-8", newline="") as fh:
        write_trace(fh, events)
    print(f"gen-trace: wrote {len(events)} events to {args.out_file}")
    return 0


EPT_COLUMNS = ("vpn", "ua", "valid", "dirty", "migrated", "ongoing", "pair",
               "residency", "ra_tier", "ra_frame")


def cmd_dump_ept(args) -> int:
    doc = _document(args)
    sim, stats, out_dir = _run_one(doc)
    rows = []
    for vpn in sorted(sim.ts.ept):
        e = sim.ts.ept[vpn]
        ra_tier = "" if e.ra is None else e.ra.tier.name.lower()
        ra_frame = "" if e.ra is None else e.ra.frame
        rows.append([e.vpn, e.ua, int(e.valid), int(e.dirty), int(e.migrated),
                     int(e.ongoing), int(e.pair), e.residency, ra_tier, ra_frame])
    if args.out:
        out_dir = args.out
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "ept.csv")
    _write_csv(path, EPT_COLUMNS, rows)
    print(f"dump-ept: {len(rows)} entries -> {path}")
    return 0


def cmd_report(args) -> int:
    with open(args.input, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"{args.input}: empty file")
    header, body = rows[0], rows[1:]
    widths = [len(h) for h in header]
    for row in body:
        if len(row) != len(header):
            raise ConfigError(
                f"{args.input}: row has {len(row)} fields, header has {len(header)}")
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    def fmt(row):
        return "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
    print(fmt(header))
    print("  ".join("-" * w for w in widths))
    for row in body:
        print(fmt(row))
    print(f"({len(body)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duonsim",
        description="Trace-driven simulator for flat-address tiered memory "
                    "with remap-aware page migration.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation")
    _add_common(p)
    p.add_argument("--trace-log", action="store_true",
                   help="write per-event log lines to the output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a config cross-product")
    _add_common(p)
    p.add_argument("--axis", metavar="KEY=V1,V2,...", action="append",
                   default=[], help="sweep axis, repeatable")
    p.add_argument("--baseline", metavar="KEY=VALUE", action="append",
                   default=[], help="baseline coordinate for normalized IPC")
    p.add_argument("--jobs", type=int, default=1, metavar="N",
                   help="concurrent runs")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("overhead", help="storage-overhead calculator")
    p.add_argument("--fast", default="1GiB", help="fast-tier capacity")
    p.add_argument("--slow", default="16GiB", help="slow-tier capacity")
    p.add_argument("--page", default="4KiB", help="page size")
    p.add_argument("--tlb-entries", type=int, default=4096)
    p.add_argument("--preset", choices=PRESETS,
                   help="take the geometry from a preset")
    p.add_argument("--out", metavar="DIR", help="also write overhead.csv here")
    p.add_argument("--verbose", action="store_true",
                   help="print both TLB storage ratios to stderr")
    p.set_defaults(func=cmd_overhead)

    p = sub.add_parser("gen-trace", help="generate a synthetic trace file")
    p.add_argument("out_file", metavar="OUT")
    p.add_argument("--pattern", default="zipf",
                   choices=("uniform", "zipf", "hotset", "phased"))
    p.add_argument("--cores", type=int, default=16)
    p.add_argument("--footprint-pages", type=int, default=8192)
    p.add_argument("--events-per-core", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--write-fraction", type=float, default=0.3)
    p.add_argument("--mean-icount", type=int, default=8)
    p.add_argument("--zipf-s", type=float, default=1.0)
    p.add_argument("--hot-fraction", type=float, default=0.1)
    p.add_argument("--hot-bias", type=float, default=0.9)
    p.add_argument("--phase-events", type=int, default=2000)
    p.set_defaults(func=cmd_gen_trace)

    p = sub.add_parser("dump-ept", help="simulate, then dump the page table")
    _add_common(p)
    p.set_defaults(func=cmd_dump_ept)

    p = sub.add_parser("report", help="pretty-print a CSV written by this tool")
    p.add_argument("input", metavar="CSV")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, TraceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OracleMismatch, CoherenceViolation, LedgerError) as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
