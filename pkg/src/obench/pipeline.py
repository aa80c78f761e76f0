"""Declarative sequential pipelines: config parsing, op registry, runner.

Configs are a strict YAML subset (block and flow mappings/sequences,
plain scalars, comments; no anchors, tags, or multi-document streams).
Every op name lives in a closed registry; value kinds must chain from
step to step, and the whole config validates before any input file is
touched.  The runner records a manifest with content hashes per step.
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import grid as grid_ops
from . import obg, physics, regrid, spectral
from .errors import (ConfigError, KindMismatchError, StepExecutionError,
                     UnresolvedScaleError, ValidationError)
from .grid import DomainBox, GriddedField
from .regrid import interp_trilinear

# ---------------------------------------------------------------------------
# YAML-subset parser


@dataclass
class _Line:
    no: int
    indent: int
    text: str


def _strip_comment(raw: str) -> str:
    out = []
    quote = None
    for i, ch in enumerate(raw):
        if quote:
            out.append(ch)
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
            out.append(ch)
            continue
        if ch == "#" and (i == 0 or raw[i - 1] in " \t"):
            break
        out.append(ch)
    return "".join(out).rstrip()


def _prepare_lines(text: str) -> list[_Line]:
    lines = []
    for no, raw in enumerate(text.split("\n"), start=1):
        content = _strip_comment(raw)
        if not content.strip():
            continue
        stripped = content.lstrip(" ")
        indent = len(content) - len(stripped)
        if "\t" in content[: indent + 1]:
            raise ConfigError(f"line {no}: tabs are not allowed in indentation")
        lines.append(_Line(no, indent, stripped))
    return lines


_INT_RE = re.compile(r"^[-+]?\d+$")
_FLOAT_RE = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")
_BOOLS = {"true": True, "True": True, "false": False, "False": False}
_NULLS = {"null", "~", "None"}


def _parse_scalar(text: str, no: int):
    text = text.strip()
    if text.startswith(("&", "*", "!")):
        raise ConfigError(f"line {no}: anchors and tags are not supported")
    if text[0] in "\"'":
        if len(text) >= 2 and text[-1] == text[0]:
            return text[1:-1]
        raise ConfigError(f"line {no}: unterminated quoted scalar")
    if text in _BOOLS:
        return _BOOLS[text]
    if text in _NULLS:
        return None
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    return text


class _FlowParser:
    def __init__(self, text: str, no: int):
        self.text = text
        self.no = no
        self.pos = 0

    def fail(self, msg: str):
        raise ConfigError(f"line {self.no}: {msg}")

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def parse(self):
        value = self.value()
        self.skip_ws()
        if self.pos != len(self.text):
            self.fail(f"trailing characters after flow value: {self.text[self.pos:]!r}")
        return value

    def value(self):
        self.skip_ws()
        if self.pos >= len(self.text):
            self.fail("unexpected end of flow value")
        ch = self.text[self.pos]
        if ch == "{":
            return self.mapping()
        if ch == "[":
            return self.sequence()
        if ch in "\"'":
            return self.quoted(ch)
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ",}]:":
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == ":" \
                and self.pos + 1 < len(self.text) and self.text[self.pos + 1] not in " ,}]":
            # colon inside a bare token (e.g. a timestamp); keep consuming
            while self.pos < len(self.text) and self.text[self.pos] not in ",}]":
                self.pos += 1
        token = self.text[start: self.pos].strip()
        if not token:
            self.fail("empty flow scalar")
        return _parse_scalar(token, self.no)

    def quoted(self, q: str) -> str:
        self.pos += 1
        out = []
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == q:
                self.pos += 1
                return "".join(out)
            out.append(ch)
            self.pos += 1
        self.fail("unterminated quoted string")

    def mapping(self) -> dict:
        self.pos += 1
        out: dict = {}
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "}":
            self.pos += 1
            return out
        while True:
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] in "\"'":
                key = self.quoted(self.text[self.pos])
            else:
                start = self.pos
                while self.pos < len(self.text) and self.text[self.pos] != ":":
                    self.pos += 1
                key = self.text[start: self.pos].strip()
            self.skip_ws()
            if self.pos >= len(self.text) or self.text[self.pos] != ":":
                self.fail("expected ':' in flow mapping")
            self.pos += 1
            if key in out:
                self.fail(f"duplicate key {key!r}")
            out[key] = self.value()
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                continue
            if self.pos < len(self.text) and self.text[self.pos] == "}":
                self.pos += 1
                return out
            self.fail("expected ',' or '}' in flow mapping")

    def sequence(self) -> list:
        self.pos += 1
        out: list = []
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "]":
            self.pos += 1
            return out
        while True:
            out.append(self.value())
            self.skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] == ",":
                self.pos += 1
                continue
            if self.pos < len(self.text) and self.text[self.pos] == "]":
                self.pos += 1
                return out
            self.fail("expected ',' or ']' in flow sequence")


def _split_mapping_entry(text: str) -> tuple[str, str] | None:
    """Split 'key: rest' at a top-level colon; None if not a mapping entry."""
    quote = None
    depth = 0
    for i, ch in enumerate(text):
        if quote:
            if ch == quote:
                quote = None
            continue
        if ch in "\"'":
            quote = ch
        elif ch in "{[":
            depth += 1
        elif ch in "}]":
            depth -= 1
        elif ch == ":" and depth == 0:
            if i + 1 == len(text) or text[i + 1] == " ":
                return text[:i].strip(), text[i + 1:].strip()
    return None


class _BlockParser:
    def __init__(self, lines: list[_Line]):
        self.lines = lines
        self.n = len(lines)

    def parse(self):
        if not self.lines:
            return {}
        value, idx = self.block(0, self.lines[0].indent)
        if idx != self.n:
            ln = self.lines[idx]
            raise ConfigError(f"line {ln.no}: unexpected indentation")
        return value

    def block(self, idx: int, indent: int):
        ln = self.lines[idx]
        if ln.indent != indent:
            raise ConfigError(f"line {ln.no}: unexpected indentation")
        if ln.text == "-" or ln.text.startswith("- "):
            return self.sequence(idx, indent)
        return self.mapping(idx, indent, None)

    def value_of(self, idx: int, indent: int, rest: str, no: int):
        """Value for an entry whose inline part is ``rest``; nested if empty."""
        if rest:
            if rest[0] in "{[":
                return _FlowParser(rest, no).parse(), idx + 1
            return _parse_scalar(rest, no), idx + 1
        if idx + 1 < self.n and self.lines[idx + 1].indent > indent:
            return self.block(idx + 1, self.lines[idx + 1].indent)
        return None, idx + 1

    def mapping(self, idx: int, indent: int, first: tuple[str, str] | None):
        out: dict = {}
        while idx < self.n or first is not None:
            if first is not None:
                key, rest = first
                no = self.lines[idx].no
                first = None
                value, idx = self.value_of(idx, indent, rest, no)
            else:
                ln = self.lines[idx]
                if ln.indent < indent:
                    break
                if ln.indent > indent:
                    raise ConfigError(f"line {ln.no}: unexpected indentation")
                entry = _split_mapping_entry(ln.text)
                if entry is None:
                    raise ConfigError(f"line {ln.no}: expected 'key: value'")
                key, rest = entry
                if not key:
                    raise ConfigError(f"line {ln.no}: empty mapping key")
                value, idx = self.value_of(idx, indent, rest, ln.no)
            if key in out:
                raise ConfigError(f"duplicate key {key!r}")
            out[key] = value
        return out, idx

    def sequence(self, idx: int, indent: int):
        out: list = []
        while idx < self.n:
            ln = self.lines[idx]
            if ln.indent != indent or not (ln.text == "-" or ln.text.startswith("- ")):
                if ln.indent >= indent:
                    raise ConfigError(f"line {ln.no}: expected '- ' sequence item")
                break
            rest = ln.text[1:].strip()
            inner = indent + (len(ln.text) - len(ln.text[1:].lstrip()))
            if not rest:
                value, idx = self.value_of(idx, indent, "", ln.no)
            else:
                entry = _split_mapping_entry(rest)
                if entry is not None and rest[0] not in "{[\"'":
                    value, idx = self.mapping(idx, inner, entry)
                else:
                    value, idx = self.value_of(idx, indent, rest, ln.no)
            out.append(value)
        return out, idx


def parse_yaml_subset(text: str):
    """Parse the strict YAML subset used for pipeline configs."""
    return _BlockParser(_prepare_lines(text)).parse()


# ---------------------------------------------------------------------------
# Pipeline config and registry


@dataclass(frozen=True)
class PipelineStep:
    op: str
    params: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    steps: tuple[PipelineStep, ...]
    input: str | None = None
    output: str | None = None


@dataclass(frozen=True)
class ParamSpec:
    type: str
    required: bool = False
    default: object = None


@dataclass(frozen=True)
class OpEntry:
    name: str
    fn: Callable
    in_kinds: frozenset
    out_kind: Callable[[Mapping, str], str]
    schema: Mapping[str, ParamSpec]


_PARAM_TYPES = {
    "str": str,
    "int": int,
    "float": (int, float),
    "bool": bool,
    "list": list,
}


def _validate_params(entry: OpEntry, params: Mapping, where: str) -> dict:
    out = {}
    for key, value in params.items():
        if key not in entry.schema:
            raise ConfigError(f"{where}.params.{key}: unknown parameter for {entry.name!r}")
        spec = entry.schema[key]
        if spec.type != "any" and not isinstance(value, _PARAM_TYPES[spec.type]) \
                or isinstance(value, bool) and spec.type in ("int", "float"):
            raise ConfigError(f"{where}.params.{key}: expected {spec.type}, got {value!r}")
        out[key] = value
    for key, spec in entry.schema.items():
        if key not in out:
            if spec.required:
                raise ConfigError(f"{where}.params.{key}: missing required parameter")
            if spec.default is not None:
                out[key] = spec.default
    return out


def _same_kind(params: Mapping, in_kind: str) -> str:
    return in_kind


def _fixed(kind: str):
    return lambda params, in_kind: kind


def _psd_out(params: Mapping, in_kind: str) -> str:
    return "score" if params.get("reference") else "spectrum"


@dataclass
class PipelineContext:
    base_dir: Path

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


def _load_reference_grid(params: Mapping, ctx: PipelineContext) -> GriddedField:
    return obg.read_grid(ctx.resolve(str(params["reference"])))


def _positional_subset(ref_vals: np.ndarray, like_vals: np.ndarray,
                       name: str) -> np.ndarray:
    pos = np.searchsorted(ref_vals, like_vals)
    pos = np.clip(pos, 0, ref_vals.size - 1)
    if not np.allclose(ref_vals[pos], like_vals, rtol=0, atol=1e-9):
        raise ValidationError(f"reference axis {name} does not cover the study axis")
    return pos


def _align_reference(ref: GriddedField, like: GriddedField) -> GriddedField:
    """Subselect ref onto like's geometry.

    Time is matched by value (both are days since a shared epoch).  Spatial
    axes are matched by value when the units agree; when the study has
    already been converted to meters, the reference is adopted cell for
    cell, which presumes the study was regridded onto the reference grid
    earlier in the pipeline (the documented recipe order).
    """
    if ref.epoch != like.epoch:
        raise ValidationError("reference and study epochs differ; validate_time first")
    tpos = _positional_subset(ref.time.values, like.time.values, "time")
    if ref.lat.units == like.lat.units and ref.lon.units == like.lon.units:
        ypos = _positional_subset(ref.lat.values, like.lat.values, "lat")
        xpos = _positional_subset(ref.lon.values, like.lon.values, "lon")
    else:
        if (len(ref.lat), len(ref.lon)) != (len(like.lat), len(like.lon)):
            raise ValidationError(
                "reference grid shape does not match the study; regrid onto the "
                "reference grid before converting coordinates")
        ypos = np.arange(len(like.lat))
        xpos = np.arange(len(like.lon))
    data = ref.data[np.ix_(tpos, ypos, xpos)]
    return like.with_data(data, var=ref.var, units=ref.units)


def regrid_grid_to_grid(fld: GriddedField, like: GriddedField) -> GriddedField:
    """Spatially resample a grid onto like's lat/lon axes (time kept)."""
    ny, nx = len(like.lat), len(like.lon)
    lat_g, lon_g = np.meshgrid(like.lat.values, like.lon.values, indexing="ij")
    out = np.empty((fld.shape[0], ny, nx))
    for t in range(fld.shape[0]):
        tcol = np.full(ny * nx, fld.time.values[t])
        out[t] = interp_trilinear(fld, tcol, lat_g.ravel(), lon_g.ravel()).reshape(ny, nx)
    return GriddedField(var=fld.var, units=fld.units, time=fld.time, lat=like.lat,
                        lon=like.lon, data=out, epoch=fld.epoch, attrs=dict(fld.attrs))


def _op_sel_domain(value, params, ctx):
    box = DomainBox(
        lat=tuple(params["lat"]),
        lon=tuple(params["lon"]),
        time=tuple(params["time"]) if params.get("time") else None,
    )
    return grid_ops.sel_domain(value, box)


def _op_regrid_to_grid(value, params, ctx):
    like = _load_reference_grid({"reference": params["grid"]}, ctx)
    if isinstance(value, GriddedField):
        return regrid_grid_to_grid(value, like)
    return regrid.regrid_to_grid(value, like)


def _op_fill_nans(value, params, ctx):
    if params.get("method", "gauss_seidel") != "gauss_seidel":
        raise ValidationError(f"fill_nans: unknown method {params.get('method')!r}")
    return regrid.fill_nans_gauss_seidel(value, tol=float(params.get("tol", regrid.FILL_TOL)),
                                         max_iters=int(params.get("max_iters",
                                                                  regrid.FILL_MAX_ITERS)))


def _psd_op(geometry: str):
    fn = {"isotropic": spectral.psd_isotropic,
          "lon_time": spectral.psd_spacetime,
          "lon_lat": spectral.psd_latlon}[geometry]

    def run(value, params, ctx):
        window = bool(params.get("window", True))
        if params.get("reference"):
            ref = _align_reference(_load_reference_grid(params, ctx), value)
            return spectral.psd_score(ref, value, geometry=geometry, window=window)
        return fn(value, window=window)

    return run


def _op_psd_alongtrack(value, params, ctx):
    truth = obg.read_track(ctx.resolve(str(params["truth"])), epoch=value.epoch)
    _, curve = spectral.psd_alongtrack(
        truth, value, segment_len=int(params.get("segment_len", spectral.SEGMENT_SAMPLES)),
        window=bool(params.get("window", True)))
    return curve


def _op_resolved_scale(value, params, ctx):
    if value.axis2 is not None:
        lam_x, lam_t = spectral.resolved_scales_lon_time(value)
        return {"lambda_x_km": lam_x.value if lam_x else None,
                "lambda_t_days": lam_t.value if lam_t else None,
                "flags": {"lambda_x": lam_x.flag if lam_x else "unresolved",
                          "lambda_t": lam_t.flag if lam_t else "unresolved"}}
    try:
        scale = spectral.resolved_scale(value)
    except UnresolvedScaleError as exc:
        return {"value": None, "flag": "unresolved", "detail": str(exc)}
    key = {"isotropic": "lambda_r_km", "alongtrack": "lambda_a_km"}.get(
        value.geometry, "lambda_km" if scale.units == "km" else "lambda_days")
    return {key: scale.value, "flag": scale.flag}


def _op_nrmse_score(value, params, ctx):
    ref = _align_reference(_load_reference_grid(params, ctx), value)
    _, mean, std = spectral.nrmse_score_series(ref, value)
    return {"nrmse_mean": mean, "nrmse_std": std}


def _build_registry() -> dict[str, OpEntry]:
    entries = [
        OpEntry("validate_latlon", lambda v, p, c: grid_ops.validate_latlon(v),
                frozenset({"grid", "track"}), _same_kind, {}),
        OpEntry("validate_time", lambda v, p, c: grid_ops.validate_time(v, str(p["epoch"])),
                frozenset({"grid", "track"}), _same_kind,
                {"epoch": ParamSpec("str", required=True)}),
        OpEntry("sel_domain", _op_sel_domain, frozenset({"grid", "track"}), _same_kind,
                {"lat": ParamSpec("list", required=True),
                 "lon": ParamSpec("list", required=True),
                 "time": ParamSpec("list")}),
        OpEntry("subset_track",
                lambda v, p, c: grid_ops.subset_track(v, int(p["num_samples"]),
                                                      int(p.get("seed", 0))),
                frozenset({"track"}), _fixed("track"),
                {"num_samples": ParamSpec("int", required=True),
                 "seed": ParamSpec("int", default=0)}),
        OpEntry("regrid_to_grid", _op_regrid_to_grid, frozenset({"grid", "track"}),
                _fixed("grid"), {"grid": ParamSpec("str", required=True)}),
        OpEntry("regrid_to_track",
                lambda v, p, c: regrid.regrid_to_track(
                    v, obg.read_track(c.resolve(str(p["track"])), epoch=v.epoch)),
                frozenset({"grid"}), _fixed("track"),
                {"track": ParamSpec("str", required=True)}),
        OpEntry("fill_nans", _op_fill_nans, frozenset({"grid"}), _fixed("grid"),
                {"method": ParamSpec("str", default="gauss_seidel"),
                 "tol": ParamSpec("float", default=regrid.FILL_TOL),
                 "max_iters": ParamSpec("int", default=regrid.FILL_MAX_ITERS)}),
        OpEntry("latlon_deg2m", lambda v, p, c: grid_ops.latlon_deg2m(v),
                frozenset({"grid"}), _fixed("grid"), {}),
        OpEntry("time_rescale",
                lambda v, p, c: grid_ops.time_rescale(v, float(p.get("freq", 1)),
                                                      str(p.get("unit", "days"))),
                frozenset({"grid", "track"}), _same_kind,
                {"freq": ParamSpec("float", default=1), "unit": ParamSpec("str", default="days")}),
        OpEntry("derive", lambda v, p, c: physics.derive(v, str(p["var"])),
                frozenset({"grid"}), _fixed("grid"),
                {"var": ParamSpec("str", required=True)}),
        OpEntry("psd_isotropic", _psd_op("isotropic"), frozenset({"grid"}), _psd_out,
                {"reference": ParamSpec("str"), "window": ParamSpec("bool", default=True)}),
        OpEntry("psd_spacetime", _psd_op("lon_time"), frozenset({"grid"}), _psd_out,
                {"reference": ParamSpec("str"), "window": ParamSpec("bool", default=True)}),
        OpEntry("psd_latlon", _psd_op("lon_lat"), frozenset({"grid"}), _psd_out,
                {"reference": ParamSpec("str"), "window": ParamSpec("bool", default=True)}),
        OpEntry("psd_alongtrack", _op_psd_alongtrack, frozenset({"track"}), _fixed("score"),
                {"truth": ParamSpec("str", required=True),
                 "segment_len": ParamSpec("int", default=spectral.SEGMENT_SAMPLES),
                 "window": ParamSpec("bool", default=True)}),
        OpEntry("resolved_scale", _op_resolved_scale, frozenset({"score"}),
                _fixed("scalar"), {}),
        OpEntry("nrmse_score", _op_nrmse_score, frozenset({"grid"}), _fixed("scalar"),
                {"reference": ParamSpec("str", required=True)}),
    ]
    return {e.name: e for e in entries}


REGISTRY = _build_registry()


def parse_config(text: str) -> PipelineConfig:
    """Parse and validate a pipeline config against the registry."""
    raw = parse_yaml_subset(text)
    if not isinstance(raw, dict):
        raise ConfigError("pipeline config must be a mapping")
    for key in raw:
        if key not in ("input", "output", "steps"):
            raise ConfigError(f"unknown key {key!r}")
    steps_raw = raw.get("steps", [])
    if steps_raw is None:
        steps_raw = []
    if not isinstance(steps_raw, list):
        raise ConfigError("steps: expected a sequence")
    steps = []
    for i, entry in enumerate(steps_raw):
        where = f"steps[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected a mapping with an 'op' key")
        for key in entry:
            if key not in ("op", "params"):
                raise ConfigError(f"{where}.{key}: unknown key")
        op = entry.get("op")
        if not isinstance(op, str):
            raise ConfigError(f"{where}.op: missing op name")
        if op not in REGISTRY:
            raise ConfigError(f"{where}.op: unknown op {op!r}")
        params_raw = entry.get("params") or {}
        if not isinstance(params_raw, dict):
            raise ConfigError(f"{where}.params: expected a mapping")
        params = _validate_params(REGISTRY[op], params_raw, where)
        steps.append(PipelineStep(op=op, params=params))
    inp = raw.get("input")
    out = raw.get("output")
    if inp is not None and not isinstance(inp, str):
        raise ConfigError("input: expected a path string")
    if out is not None and not isinstance(out, str):
        raise ConfigError("output: expected a path string")
    return PipelineConfig(steps=tuple(steps), input=inp, output=out)


def check_kinds(cfg: PipelineConfig, initial_kind: str) -> str:
    """Pre-flight kind chaining; returns the final kind."""
    kind = initial_kind
    for i, step in enumerate(cfg.steps):
        entry = REGISTRY[step.op]
        if kind not in entry.in_kinds:
            raise KindMismatchError(
                f"steps[{i}] ({step.op}): expects {sorted(entry.in_kinds)}, got {kind!r}")
        kind = entry.out_kind(step.params, kind)
    return kind


def canonical_bytes(value, kind: str) -> bytes:
    if kind == "grid":
        return obg.grid_to_bytes(value)
    if kind == "track":
        return obg.track_to_bytes(value)
    if kind in ("spectrum", "score"):
        return value.to_csv().encode("utf-8")
    if kind == "scalar":
        return (json.dumps(value, sort_keys=True) + "\n").encode("utf-8")
    raise ValidationError(f"cannot serialize kind {kind!r}")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_pipeline(cfg: PipelineConfig, base_dir: str | Path = ".",
                 initial=None, initial_kind: str | None = None):
    """Execute a validated config; returns (final value, manifest dict).

    The input may be given in memory via ``initial``/``initial_kind``;
    otherwise it is loaded from ``cfg.input``.  Kind chaining is checked
    before any file is opened.
    """
    ctx = PipelineContext(base_dir=Path(base_dir))
    if initial is None:
        if cfg.input is None:
            raise ConfigError("pipeline config has no input")
        initial_kind = obg.sniff_kind(cfg.input)
    elif initial_kind is None:
        raise ValidationError("initial_kind required with an in-memory input")
    final_kind = check_kinds(cfg, initial_kind)

    if initial is None:
        path = ctx.resolve(cfg.input)
        value = obg.read_grid(path) if initial_kind == "grid" else obg.read_track(path)
    else:
        value = initial
    kind = initial_kind
    manifest = {"steps": []}
    current_hash = _sha256(canonical_bytes(value, kind))
    for i, step in enumerate(cfg.steps):
        entry = REGISTRY[step.op]
        t0 = time.perf_counter()
        try:
            value = entry.fn(value, step.params, ctx)
        except Exception as exc:
            raise StepExecutionError(i, step.op, exc) from exc
        ms = (time.perf_counter() - t0) * 1000.0
        kind = entry.out_kind(step.params, kind)
        out_hash = _sha256(canonical_bytes(value, kind))
        manifest["steps"].append({
            "op": step.op,
            "params": dict(step.params),
            "in_hash": current_hash,
            "out_hash": out_hash,
            "ms": round(ms, 3),
        })
        current_hash = out_hash
    if cfg.output is not None:
        out_path = ctx.resolve(cfg.output)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(canonical_bytes(value, kind))
    return value, manifest
