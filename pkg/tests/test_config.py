"""Config round-trips, hashing, presets, and report serialization."""

import json

import numpy as np
import pytest

from specgal.admissibility import check
from specgal.config import (
    ExperimentConfig,
    config_hash,
    from_dict,
    load_config,
    preset,
    preset_names,
    save_config,
)
from specgal.drift import DriftSpec
from specgal.errors import ConfigInvalid
from specgal.reports import csv_text, environment_versions, manifest_dict
from specgal.spectral import OperatorSpec


def _config(**overrides):
    base = dict(
        name="roundtrip",
        operator=OperatorSpec(family="heat", m=2, beta=1.0, gamma=0.25),
        drift=DriftSpec(kind="b_r", theta=0.75, r=1.0, g=(1.0, 0.5), h=(0.2,)),
        seed=7,
        statement="heat",
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_json_file_roundtrip_is_lossless(tmp_path):
    cfg = _config()
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_roundtrip_preserves_hash(tmp_path):
    cfg = _config()
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    assert config_hash(load_config(path)) == config_hash(cfg)


def test_hash_changes_with_seed():
    assert config_hash(_config(seed=7)) != config_hash(_config(seed=8))


def test_hash_is_hex_digest():
    digest = config_hash(_config())
    assert len(digest) == 64
    int(digest, 16)


def test_unknown_key_rejected():
    data = _config().to_dict()
    data["typo_field"] = 1
    with pytest.raises(ConfigInvalid, match="typo_field"):
        from_dict(data, "<test>")


def test_missing_seed_rejected():
    data = _config().to_dict()
    del data["seed"]
    with pytest.raises(ConfigInvalid, match="seed"):
        from_dict(data, "<test>")


def test_seed_must_be_integer():
    with pytest.raises(ConfigInvalid, match="seed"):
        _config(seed="13")
    with pytest.raises(ConfigInvalid, match="seed"):
        _config(seed=True)


def test_ladder_must_increase():
    with pytest.raises(ConfigInvalid, match="increasing"):
        _config(ladder=(8, 8, 16))


def test_steps_ladder_must_divide_max():
    with pytest.raises(ConfigInvalid, match="divide"):
        _config(steps_ladder=(24, 64, 256))


def test_malformed_file_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigInvalid):
        load_config(path)


def test_preset_names_cover_contract():
    names = preset_names()
    for expected in (
        "heat-m1",
        "heat-m2",
        "heat-m3",
        "damped-wave-1d",
        "beam-m1",
        "beam-m2",
        "beam-m3",
        "counterexample",
    ):
        assert expected in names


def test_unknown_preset_lists_available():
    with pytest.raises(ConfigInvalid, match="heat-m1"):
        preset("heat-m9")


def test_preset_seed_override():
    cfg = preset("heat-m1", seed=123)
    assert cfg.seed == 123
    assert cfg != preset("heat-m1")


def test_every_preset_statement_is_covered():
    # each preset declares the statement it exercises; the declared
    # statement must actually cover the preset's parameters
    for name in preset_names():
        cfg = preset(name)
        report = check(cfg.operator, cfg.drift)
        assert report.verdict(cfg.statement).admissible, (name, cfg.statement)


def test_every_preset_roundtrips(tmp_path):
    for name in preset_names():
        cfg = preset(name)
        path = tmp_path / f"{name}.json"
        save_config(cfg, path)
        assert load_config(path) == cfg


def test_csv_text_embeds_hash_and_is_deterministic():
    cols = {"a": [1, 2], "b": [0.5, float("nan")], "ok": [True, False]}
    text = csv_text(cols, "deadbeef")
    assert text.splitlines()[0] == "# config_hash=deadbeef"
    assert text.splitlines()[1] == "a,b,ok"
    assert text == csv_text(cols, "deadbeef")
    assert "nan" in text.splitlines()[3]


def test_csv_rejects_ragged_and_comma_cells():
    with pytest.raises(ValueError):
        csv_text({"a": [1, 2], "b": [1]}, "x")
    with pytest.raises(ValueError):
        csv_text({"a": ["bad,cell"]}, "x")


def test_csv_floats_roundtrip_exactly():
    values = [0.1, 1.0 / 3.0, 2.0**-40]
    text = csv_text({"v": values}, "h")
    parsed = [float(line) for line in text.splitlines()[2:]]
    assert parsed == values


def test_environment_versions_reports_packages():
    versions = environment_versions()
    assert set(versions) == {"python", "numpy", "scipy", "specgal"}
    assert versions["numpy"] == np.__version__


def test_manifest_contains_required_fields():
    cfg = _config()
    manifest = manifest_dict(
        cfg, config_hash(cfg), {"admissible": True}, "spectrum",
        ["out/spectrum.csv"], 0.25, threads=2, extra={"k": 1},
    )
    for key in (
        "command", "name", "statement", "seed", "threads", "config_hash",
        "config", "versions", "admissibility", "outputs", "wall_time_s",
        "extra",
    ):
        assert key in manifest
    assert manifest["seed"] == 7
    assert manifest["threads"] == 2
    assert json.dumps(manifest)  # JSON-serializable end to end
