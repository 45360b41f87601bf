"""Experiment configuration: JSON document, presets, overrides, validation.

One document describes a whole run. Sections: `sim` (cores, frequency, seed),
`geometry`, `cache`, `policy`, `latencies`, `trace` (inline generator spec or
a trace file path), `output`. Unknown sections or keys are rejected with the
offending dotted path. Byte sizes accept integers or strings like "1GiB",
"256MiB", "4KiB".

Presets mirror the three studied memory configurations:

  config1   1 GiB fast + 16 GiB slow, PCM-like slow timings (256/800 cycles)
  config2   256 MiB fast + 16 GiB slow, PCM-like
  config3   1 GiB fast + 16 GiB slow, DDR4-like slow timings (103/103)
"""
from __future__ import annotations

import json
import re

from .cache import CacheConfig
from .engine import LatencyTable, SimConfig
from .geometry import MemoryGeometry
from .policy import PolicyConfig
from .workload import TraceSpec


class ConfigError(ValueError):
    """Invalid configuration; the message names the dotted field path."""


_SIZE_RE = re.compile(r"^\s*(\d+)\s*(B|KB|KiB|MB|MiB|GB|GiB)?\s*$")
_SIZE_UNITS = {None: 1, "B": 1,
               "KB": 1000, "KiB": 1024,
               "MB": 1000 ** 2, "MiB": 1024 ** 2,
               "GB": 1000 ** 3, "GiB": 1024 ** 3}


def parse_size(value, path: str = "size") -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a byte size, got a boolean")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        m = _SIZE_RE.match(value)
        if m:
            return int(m.group(1)) * _SIZE_UNITS[m.group(2)]
    raise ConfigError(f"{path}: cannot parse {value!r} as a byte size")


def default_document() -> dict:
    return {
        "sim": {
            "cores": 16,
            "core_freq_ghz": 3.2,
            "tlb_entries": 4096,
            "seed": 0,
            "premap": True,
            "check_oracle": True,
            "migration_queue_capacity": 64,
        },
        "geometry": {
            "fast": "1GiB",
            "slow": "16GiB",
            "page_size": "4KiB",
        },
        "cache": {
            "l1_size": "32KiB",
            "l1_assoc": 4,
            "l1_latency": 2,
            "llc_size": "16MiB",
            "llc_assoc": 16,
            "llc_latency": 21,
            "line_size": 64,
        },
        "policy": {
            "kind": "threshold",
            "duon": True,
            "threshold": 64,
            "epoch_us": 10000,
            "epoch_blocking": False,
            "adapt_period_epochs": 4,
            "adapt_min_threshold": 16,
            "adapt_max_threshold": 512,
            "adapt_deadband": 0.005,
            "remap_capacity": 4096,
            "shootdown_cost": 4000,
            "line_invalidate_cost": 20,
        },
        "latencies": {
            "fast_read": 90,
            "fast_write": 90,
            "slow_read": 256,
            "slow_write": 800,
            "buffer_access": 10,
            "page_walk": 100,
            "ext_lookup": 1,
        },
        "trace": {
            "pattern": "zipf",
            "footprint_pages": 8192,
            "events_per_core": 10000,
            "write_fraction": 0.3,
            "mean_icount": 8,
            "zipf_s": 1.0,
            "hot_fraction": 0.1,
            "hot_bias": 0.9,
            "phase_events": 2000,
        },
        "output": {
            "dir": "out",
        },
    }


PRESETS = ("config1", "config2", "config3")


def preset_document(name: str) -> dict:
    doc = default_document()
    if name == "config1":
        pass
    elif name == "config2":
        doc["geometry"]["fast"] = "256MiB"
    elif name == "config3":
        doc["latencies"]["slow_read"] = 103
        doc["latencies"]["slow_write"] = 103
    else:
        raise ConfigError(f"unknown preset {name!r}; choose one of {PRESETS}")
    return doc


# per-key checks: (allowed types, extra keys allowed in trace alternative)
_SIZE_KEYS = {
    "geometry": {"fast", "slow", "page_size"},
    "cache": {"l1_size", "llc_size"},
}

_BOOL_KEYS = {("sim", "premap"), ("sim", "check_oracle"),
              ("policy", "duon"), ("policy", "epoch_blocking")}

_STR_KEYS = {("policy", "kind"), ("trace", "pattern"), ("trace", "file"),
             ("output", "dir")}

_FLOAT_KEYS = {("sim", "core_freq_ghz"), ("policy", "epoch_us"),
               ("policy", "adapt_deadband"), ("trace", "write_fraction"),
               ("trace", "zipf_s"), ("trace", "hot_fraction"),
               ("trace", "hot_bias")}


def _check_value(section: str, key: str, value) -> None:
    path = f"{section}.{key}"
    if key in _SIZE_KEYS.get(section, ()):
        parse_size(value, path)
        return
    if (section, key) in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false, got {value!r}")
        return
    if (section, key) in _STR_KEYS:
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return
    if (section, key) in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer, got {value!r}")


def validate_document(doc: dict) -> None:
    defaults = default_document()
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object")
    for section, content in doc.items():
        if section not in defaults:
            raise ConfigError(f"{section}: unknown section")
        if not isinstance(content, dict):
            raise ConfigError(f"{section}: expected an object")
        known = set(defaults[section])
        if section == "trace":
            known |= {"file", "seed", "cores"}
        for key, value in content.items():
            if key not in known:
                raise ConfigError(f"{section}.{key}: unknown key")
            _check_value(section, key, value)
    trace = doc.get("trace", {})
    if "file" in trace:
        extra = set(trace) - {"file"}
        if extra:
            raise ConfigError(
                f"trace.file excludes inline generator keys (found {sorted(extra)})")


def merge_document(doc: dict) -> dict:
    """Overlay a (validated) partial document onto the defaults."""
    merged = default_document()
    for section, content in doc.items():
        if section == "trace" and "file" in content:
            merged["trace"] = dict(content)  # file form replaces the inline spec
            continue
        merged[section].update(content)
    return merged


def load_document(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    validate_document(doc)
    return doc


def apply_override(doc: dict, assignment: str) -> None:
    """Apply one `section.key=value` override; values parse as JSON when they can."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r}: expected section.key=value")
    path, raw = assignment.split("=", 1)
    parts = path.strip().split(".")
    if len(parts) != 2:
        raise ConfigError(f"override {assignment!r}: key must be section.key")
    section, key = parts
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    doc.setdefault(section, {})[key] = value
    validate_document({section: {key: value}})


def build_sim_config(doc: dict):
    """Turn a merged document into (SimConfig, trace_source, output_dir).

    trace_source is ("file", path) or ("spec", TraceSpec).
    """
    try:
        geom = MemoryGeometry(
            parse_size(doc["geometry"]["fast"], "geometry.fast"),
            parse_size(doc["geometry"]["slow"], "geometry.slow"),
            parse_size(doc["geometry"]["page_size"], "geometry.page_size"))
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from None
    c = doc["cache"]
    try:
        cache = CacheConfig(
            l1_size=parse_size(c["l1_size"], "cache.l1_size"),
            l1_assoc=c["l1_assoc"], l1_latency=c["l1_latency"],
            llc_size=parse_size(c["llc_size"], "cache.llc_size"),
            llc_assoc=c["llc_assoc"], llc_latency=c["llc_latency"],
            line_size=c["line_size"])
    except ValueError as exc:
        raise ConfigError(f"cache: {exc}") from None
    p = doc["policy"]
    try:
        policy = PolicyConfig(
            kind=p["kind"], duon=p["duon"], threshold=p["threshold"],
            epoch_us=p["epoch_us"], epoch_blocking=p["epoch_blocking"],
            adapt_period_epochs=p["adapt_period_epochs"],
            adapt_min_threshold=p["adapt_min_threshold"],
            adapt_max_threshold=p["adapt_max_threshold"],
            adapt_deadband=p["adapt_deadband"],
            remap_capacity=p["remap_capacity"],
            shootdown_cost=p["shootdown_cost"],
            line_invalidate_cost=p["line_invalidate_cost"])
    except ValueError as exc:
        raise ConfigError(f"policy: {exc}") from None
    try:
        lat = LatencyTable(**doc["latencies"])
    except ValueError as exc:
        raise ConfigError(f"latencies: {exc}") from None
    s = doc["sim"]
    try:
        sim = SimConfig(
            geometry=geom, cache=cache, policy=policy, latencies=lat,
            cores=s["cores"], core_freq_ghz=s["core_freq_ghz"],
            tlb_entries=s["tlb_entries"], seed=s["seed"], premap=s["premap"],
            check_oracle=s["check_oracle"],
            migration_queue_capacity=s["migration_queue_capacity"])
    except ValueError as exc:
        raise ConfigError(f"sim: {exc}") from None
    t = doc["trace"]
    if "file" in t:
        trace_source = ("file", t["file"])
    else:
        try:
            spec = TraceSpec(
                pattern=t["pattern"], cores=t.get("cores", sim.cores),
                footprint_pages=t["footprint_pages"],
                events_per_core=t["events_per_core"],
                seed=t.get("seed", sim.seed),
                write_fraction=t["write_fraction"],
                mean_icount=t["mean_icount"], page_size=geom.page_size,
                zipf_s=t["zipf_s"], hot_fraction=t["hot_fraction"],
                hot_bias=t["hot_bias"], phase_events=t["phase_events"])
        except ValueError as exc:
            raise ConfigError(f"trace: {exc}") from None
        trace_source = ("spec", spec)
    return sim, trace_source, doc["output"]["dir"]


def document_from(config_path=None, preset=None, overrides=()) -> dict:
    """Standard CLI path: file or preset (or pure defaults), then overrides."""
    if config_path is not None and preset is not None:
        raise ConfigError("give either a config file or a preset, not both")
    if config_path is not None:
        doc = load_document(config_path)
    elif preset is not None:
        doc = preset_document(preset)
    else:
        doc = {}
    for assignment in overrides:
        apply_override(doc, assignment)
    merged = merge_document(doc)
    validate_document(merged)
    return merged
