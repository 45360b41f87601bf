"""Config document handling: sizes, presets, overrides, build."""
import json

import pytest

from duonsim import (ConfigError, PRESETS, build_sim_config, default_document,
                     document_from, parse_size, preset_document)
from duonsim.config import (apply_override, load_document, merge_document,
                            validate_document)


# -- sizes -----------------------------------------------------------------


@pytest.mark.parametrize("text,expect", [
    ("1GiB", 1 << 30),
    ("256MiB", 256 << 20),
    ("4KiB", 4096),
    ("16GB", 16 * 10 ** 9),
    ("2KB", 2000),
    ("512B", 512),
    ("123", 123),
    (4096, 4096),
])
def test_parse_size_accepts_common_forms(text, expect):
    assert parse_size(text) == expect


@pytest.mark.parametrize("bad", ["1.5GiB", "GiB", "-1KiB", "1 TiB", True, None])
def test_parse_size_rejects_garbage(bad):
    with pytest.raises(ConfigError, match="geometry.fast"):
        parse_size(bad, "geometry.fast")


# -- documents -------------------------------------------------------------


def test_default_document_validates_and_builds():
    doc = default_document()
    validate_document(doc)
    sim, (kind, spec), outdir = build_sim_config(doc)
    assert sim.cores == 16
    assert sim.geometry.fast_capacity == 1 << 30
    assert kind == "spec" and spec.cores == 16 and outdir == "out"


def test_presets_cover_the_three_memory_setups():
    assert PRESETS == ("config1", "config2", "config3")
    one, _, _ = build_sim_config(preset_document("config1"))
    two, _, _ = build_sim_config(preset_document("config2"))
    three, _, _ = build_sim_config(preset_document("config3"))
    assert one.geometry.fast_pages == (1 << 30) // 4096
    assert two.geometry.fast_capacity == 256 << 20
    assert one.latencies.slow_read == 256 and one.latencies.slow_write == 800
    assert three.latencies.slow_read == 103 and three.latencies.slow_write == 103
    assert three.geometry == one.geometry
    with pytest.raises(ConfigError, match="config9"):
        preset_document("config9")


def test_unknown_keys_name_their_dotted_path():
    with pytest.raises(ConfigError, match="policy.thresold"):
        validate_document({"policy": {"thresold": 3}})
    with pytest.raises(ConfigError, match="^memory"):
        validate_document({"memory": {}})
    with pytest.raises(ConfigError, match="latencies.fast_read"):
        validate_document({"latencies": {"fast_read": "quick"}})


def test_type_errors_name_their_dotted_path():
    with pytest.raises(ConfigError, match="policy.duon"):
        validate_document({"policy": {"duon": 1}})
    with pytest.raises(ConfigError, match="sim.cores"):
        validate_document({"sim": {"cores": 2.5}})


def test_trace_file_excludes_inline_keys():
    validate_document({"trace": {"file": "t.trace"}})
    with pytest.raises(ConfigError, match="trace.file excludes"):
        validate_document({"trace": {"file": "t.trace", "pattern": "zipf"}})


def test_merge_keeps_unmentioned_defaults():
    merged = merge_document({"sim": {"cores": 4}})
    assert merged["sim"]["cores"] == 4
    assert merged["sim"]["tlb_entries"] == 4096
    assert merged["cache"]["line_size"] == 64


def test_merge_trace_file_replaces_generator_spec():
    merged = merge_document({"trace": {"file": "t.trace"}})
    assert merged["trace"] == {"file": "t.trace"}
    _, (kind, path), _ = build_sim_config(merged)
    assert (kind, path) == ("file", "t.trace")


# -- overrides -------------------------------------------------------------


def test_override_parses_json_values():
    doc = {}
    apply_override(doc, "sim.cores=4")
    apply_override(doc, "policy.duon=false")
    apply_override(doc, "geometry.fast=256MiB")   # bare string value
    assert doc == {"sim": {"cores": 4}, "policy": {"duon": False},
                   "geometry": {"fast": "256MiB"}}


@pytest.mark.parametrize("bad,needle", [
    ("sim.cores", "expected section.key=value"),
    ("cores=4", "must be section.key"),
    ("sim.cores.deep=4", "must be section.key"),
    ("latencies.fast_read=quick", "latencies.fast_read"),
    ("sim.banana=1", "sim.banana"),
])
def test_override_errors(bad, needle):
    with pytest.raises(ConfigError, match=needle):
        apply_override({}, bad)


def test_document_from_layers_preset_then_overrides():
    doc = document_from(preset="config2", overrides=("sim.cores=4",
                                                     "policy.kind=epoch"))
    sim, _, _ = build_sim_config(doc)
    assert sim.geometry.fast_capacity == 256 << 20
    assert sim.cores == 4
    assert sim.policy.kind.value == "epoch"


def test_document_from_rejects_file_plus_preset(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text("{}")
    with pytest.raises(ConfigError, match="not both"):
        document_from(config_path=str(cfg), preset="config1")


def test_load_document_roundtrip(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"sim": {"cores": 2}}))
    assert load_document(str(cfg)) == {"sim": {"cores": 2}}
    cfg.write_text("{nope")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_document(str(cfg))


def test_build_reports_semantic_errors_with_section():
    doc = merge_document({"policy": {"threshold": 0}})
    with pytest.raises(ConfigError, match="policy: threshold"):
        build_sim_config(doc)
    doc = merge_document({"geometry": {"page_size": 1000}})
    with pytest.raises(ConfigError, match="geometry:"):
        build_sim_config(doc)


def test_trace_spec_inherits_sim_seed_and_cores():
    doc = merge_document({"sim": {"cores": 4, "seed": 9}})
    _, (_, spec), _ = build_sim_config(doc)
    assert spec.cores == 4 and spec.seed == 9
    doc = merge_document({"trace": {"cores": 2, "seed": 1}})
    _, (_, spec2), _ = build_sim_config(doc)
    assert spec2.cores == 2 and spec2.seed == 1
