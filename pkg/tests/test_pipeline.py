import json

import numpy as np
import pytest

from obench.errors import ConfigError, KindMismatchError, StepExecutionError
from obench.obg import write_grid, write_track
from obench.pipeline import (PipelineConfig, check_kinds, parse_config,
                             parse_yaml_subset, run_pipeline)

from conftest import EPOCH, make_field, make_track

# ---------------------------------------------------------------------------
# YAML subset parser

RECIPE = """\
# evaluation recipe transliterated to registry names
input: study.obg
output: out.json
steps:
  - op: validate_latlon
  - op: validate_time
    params: {epoch: "2012-10-01T00:00:00Z"}
  - op: sel_domain
    params:
      lat: [33, 43]
      lon: [-65, -55]
  - op: regrid_to_grid
    params: {grid: ref.obg}
  - op: fill_nans
    params: {method: gauss_seidel}
  - op: latlon_deg2m
  - op: time_rescale
    params: {freq: 1, unit: days}
  - op: psd_isotropic
    params: {reference: ref.obg}
  - op: resolved_scale
"""


def test_yaml_scalars_and_flow():
    doc = parse_yaml_subset(
        "a: 1\nb: 2.5\nc: true\nd: null\ne: \"x y\"\nf: [1, 2.0, no_quotes]\n"
        "g: {k: v, n: -3}\n")
    assert doc == {"a": 1, "b": 2.5, "c": True, "d": None, "e": "x y",
                   "f": [1, 2.0, "no_quotes"], "g": {"k": "v", "n": -3}}


def test_yaml_nested_blocks():
    doc = parse_yaml_subset("top:\n  inner:\n    - 1\n    - 2\n  other: x\n")
    assert doc == {"top": {"inner": [1, 2], "other": "x"}}


def test_yaml_comments_and_blank_lines():
    doc = parse_yaml_subset("# header\n\na: 1  # trailing\n\n# done\n")
    assert doc == {"a": 1}


def test_yaml_anchor_and_tag_rejected():
    with pytest.raises(ConfigError):
        parse_yaml_subset("a: &anchor 1\n")
    with pytest.raises(ConfigError):
        parse_yaml_subset("a: !!int 1\n")


def test_yaml_duplicate_key_rejected():
    with pytest.raises(ConfigError):
        parse_yaml_subset("a: 1\na: 2\n")


def test_yaml_tab_indent_rejected():
    with pytest.raises(ConfigError):
        parse_yaml_subset("a:\n\tb: 1\n")


def test_yaml_timestamp_scalar_in_flow():
    doc = parse_yaml_subset('t: {epoch: "2012-10-01T00:00:00Z"}\n')
    assert doc["t"]["epoch"] == "2012-10-01T00:00:00Z"


# ---------------------------------------------------------------------------
# Config validation

def test_recipe_parses_nine_steps():
    cfg = parse_config(RECIPE)
    assert len(cfg.steps) == 9
    assert [s.op for s in cfg.steps] == [
        "validate_latlon", "validate_time", "sel_domain", "regrid_to_grid",
        "fill_nans", "latlon_deg2m", "time_rescale", "psd_isotropic",
        "resolved_scale"]


def test_empty_steps_is_valid_noop():
    cfg = parse_config("input: a.obg\noutput: b.obg\nsteps: []\n")
    assert cfg.steps == ()


def test_unknown_op_named_with_path():
    with pytest.raises(ConfigError) as err:
        parse_config("steps:\n  - op: frobnicate\n")
    assert "steps[0].op" in str(err.value)


def test_unknown_param_named_with_path():
    with pytest.raises(ConfigError) as err:
        parse_config("steps:\n  - op: fill_nans\n    params: {tool: hammer}\n")
    assert "steps[0].params.tool" in str(err.value)


def test_missing_required_param():
    with pytest.raises(ConfigError) as err:
        parse_config("steps:\n  - op: derive\n")
    assert "steps[0].params.var" in str(err.value)


def test_unknown_top_level_key():
    with pytest.raises(ConfigError):
        parse_config("inputs: a.obg\nsteps: []\n")


def test_kind_mismatch_detected_preflight():
    cfg = parse_config(
        "steps:\n"
        "  - op: regrid_to_track\n"
        "    params: {track: t.csv}\n"
        "  - op: psd_isotropic\n")
    with pytest.raises(KindMismatchError) as err:
        check_kinds(cfg, "grid")
    assert "steps[1]" in str(err.value)


def test_kind_mismatch_never_touches_input(tmp_path):
    cfg = parse_config(
        "input: missing.obg\noutput: out.csv\nsteps:\n"
        "  - op: regrid_to_track\n"
        "    params: {track: t.csv}\n"
        "  - op: psd_isotropic\n")
    # the input file does not exist; pre-flight must fail before opening it
    with pytest.raises(KindMismatchError):
        run_pipeline(cfg, base_dir=tmp_path)


# ---------------------------------------------------------------------------
# Runner

def test_identity_pipeline_manifest(tmp_path):
    fld = make_field(np.random.default_rng(0).normal(size=(2, 4, 4)))
    write_grid(fld, tmp_path / "in.obg")
    cfg = parse_config(
        "input: in.obg\noutput: out.obg\nsteps:\n"
        "  - op: validate_latlon\n"
        "  - op: validate_latlon\n")
    value, manifest = run_pipeline(cfg, base_dir=tmp_path)
    assert len(manifest["steps"]) == 2
    assert np.array_equal(value.data, fld.data)
    assert (tmp_path / "out.obg").exists()
    for entry in manifest["steps"]:
        assert set(entry) == {"op", "params", "in_hash", "out_hash", "ms"}


def test_manifest_hash_chain(tmp_path):
    fld = make_field(np.random.default_rng(1).normal(size=(2, 4, 4)))
    write_grid(fld, tmp_path / "in.obg")
    cfg = parse_config(
        "input: in.obg\nsteps:\n"
        "  - op: validate_latlon\n"
        "  - op: latlon_deg2m\n"
        "  - op: time_rescale\n    params: {freq: 1, unit: days}\n")
    _, manifest = run_pipeline(cfg, base_dir=tmp_path)
    steps = manifest["steps"]
    for a, b in zip(steps, steps[1:]):
        assert a["out_hash"] == b["in_hash"]
    # identity rescale does not change canonical bytes
    assert steps[2]["in_hash"] == steps[2]["out_hash"]


def test_step_error_reports_index(tmp_path):
    fld = make_field(np.full((1, 4, 4), np.nan))
    write_grid(fld, tmp_path / "in.obg")
    cfg = parse_config("input: in.obg\nsteps:\n  - op: fill_nans\n")
    with pytest.raises(StepExecutionError) as err:
        run_pipeline(cfg, base_dir=tmp_path)
    assert err.value.index == 0 and err.value.op == "fill_nans"


def test_eval_recipe_end_to_end(tmp_path):
    rng = np.random.default_rng(7)
    truth = make_field(rng.normal(size=(6, 24, 24)))
    write_grid(truth, tmp_path / "ref.obg")
    # study: slightly smoothed truth
    study = truth.with_data(truth.data + 0.02 * rng.normal(size=truth.shape))
    write_grid(study, tmp_path / "study.obg")
    cfg = parse_config(
        "input: study.obg\noutput: scale.json\nsteps:\n"
        "  - op: validate_latlon\n"
        "  - op: fill_nans\n"
        "  - op: latlon_deg2m\n"
        "  - op: psd_isotropic\n    params: {reference: ref.obg}\n"
        "  - op: resolved_scale\n")
    value, manifest = run_pipeline(cfg, base_dir=tmp_path)
    assert "lambda_r_km" in value
    assert manifest["steps"][-1]["op"] == "resolved_scale"
    saved = json.loads((tmp_path / "scale.json").read_text())
    assert saved == value


def test_track_pipeline_subset_and_regrid(tmp_path):
    fld = make_field(np.random.default_rng(3).normal(size=(3, 8, 8)))
    write_grid(fld, tmp_path / "ref.obg")
    n = 40
    rng = np.random.default_rng(4)
    track = make_track(np.sort(rng.uniform(0, 2, n)),
                       rng.uniform(33.0, 33.2, n), rng.uniform(-65.0, -64.8, n),
                       rng.normal(size=n))
    write_track(track, tmp_path / "obs.csv")
    cfg = parse_config(
        "input: obs.csv\noutput: gridded.obg\nsteps:\n"
        "  - op: validate_latlon\n"
        "  - op: subset_track\n    params: {num_samples: 20, seed: 1}\n"
        "  - op: regrid_to_grid\n    params: {grid: ref.obg}\n")
    value, manifest = run_pipeline(cfg, base_dir=tmp_path)
    assert value.shape == fld.shape
    assert (tmp_path / "gridded.obg").exists()
