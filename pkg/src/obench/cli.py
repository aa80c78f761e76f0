"""Command-line surface tying the toolkit together.

Exit codes: 0 success, 1 domain error, 2 usage error.  Logs go to stderr;
data goes to files or stdout only.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import obg, pipeline
from .errors import ObenchError
from .evaluate import evaluate_ose, evaluate_osse
from .grid import GriddedField
from .patcher import PatchSpec, get_patch, iter_patches, patch_count, reconstruct
from .physics import derive
from .report import parse_reports, render_report
from .simulate import NoiseSpec, generate_constellation, load_pattern_arg, sample_field

log = logging.getLogger("obench")

PRESET_NAMES = ("gulfstream-osse-eval", "gulfstream-ose-task")


def thread_count() -> int:
    raw = os.environ.get("OBENCH_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _load_preset(name: str) -> str:
    fname = name.replace("-", "_") + ".yaml"
    ref = resources.files("obench").joinpath("presets", fname)
    if not ref.is_file():
        raise ObenchError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return ref.read_text()


def _cmd_pipeline(args) -> int:
    if args.config:
        text = Path(args.config).read_text()
        base_dir = Path(args.config).parent
    else:
        text = _load_preset(args.preset)
        base_dir = Path.cwd()
    if args.ref:
        text = text.replace("${ref}", str(args.ref))
    elif "${ref}" in text:
        raise ObenchError("this config needs --ref to point at the reference grid")
    cfg = pipeline.parse_config(text)
    if args.input:
        cfg = pipeline.PipelineConfig(steps=cfg.steps, input=str(args.input),
                                      output=cfg.output)
    if args.output:
        cfg = pipeline.PipelineConfig(steps=cfg.steps, input=cfg.input,
                                      output=str(args.output))
    value, manifest = pipeline.run_pipeline(cfg, base_dir=base_dir)
    manifest_path = (Path(cfg.output).with_suffix(Path(cfg.output).suffix + ".manifest.json")
                     if cfg.output else None)
    text_out = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    if manifest_path:
        manifest_path.write_text(text_out)
        log.info("wrote %s and manifest %s", cfg.output, manifest_path)
    else:
        sys.stdout.write(text_out)
    return 0


def _cmd_eval(args) -> int:
    ref = obg.read_grid(args.ref)
    study = obg.read_grid(args.study)
    track = obg.read_track(args.track, epoch=ref.epoch) if args.track else None
    report, diag = evaluate_osse(ref, study, experiment=args.experiment,
                                 algorithm=args.algorithm, track=track,
                                 segment_len=args.segment_len)
    rendered = render_report([report], args.format)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(rendered)
        log.info("wrote %s", out)
        if not args.no_figures:
            from .figures import render_diagnostics
            for p in render_diagnostics(diag, out.with_suffix("")):
                log.info("wrote %s", p)
    else:
        sys.stdout.write(rendered)
    return 0


def _cmd_eval_ose(args) -> int:
    study = obg.read_grid(args.study)
    track = obg.read_track(args.track, epoch=study.epoch)
    report, diag = evaluate_ose(study, track, experiment=args.experiment,
                                algorithm=args.algorithm, segment_len=args.segment_len)
    rendered = render_report([report], args.format)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(rendered)
        if not args.no_figures:
            from .figures import render_diagnostics
            render_diagnostics(diag, out.with_suffix(""))
    else:
        sys.stdout.write(rendered)
    return 0


def _cmd_derive(args) -> int:
    fld = obg.read_grid(args.input)
    obg.write_grid(derive(fld, args.var), args.output)
    log.info("wrote %s", args.output)
    return 0


def _read_spec(arg: str) -> PatchSpec:
    path = Path(arg)
    text = path.read_text() if path.exists() else arg
    return PatchSpec.from_json(text)


def _cmd_patch_info(args) -> int:
    fld = obg.read_grid(args.input)
    spec = _read_spec(args.spec)
    resolved = spec.resolve(fld.shape)
    info = {
        "count": patch_count(spec, fld),
        "dims": {
            name: {"size": size, "patch": patch, "stride": stride}
            for name, (size, patch, stride) in zip(("time", "lat", "lon"), resolved)
        },
    }
    sys.stdout.write(json.dumps(info, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_patch_extract(args) -> int:
    fld = obg.read_grid(args.input)
    spec = _read_spec(args.spec)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    seq = iter_patches(spec, fld)
    indices = [args.index] if args.index is not None else range(len(seq))
    for i in indices:
        view = get_patch(spec, fld, i)
        patch_field = GriddedField(var=fld.var, units=fld.units, time=view.coords[0],
                                   lat=view.coords[1], lon=view.coords[2],
                                   data=view.data, epoch=fld.epoch, attrs=fld.attrs)
        obg.write_grid(patch_field, outdir / f"patch_{i:06d}.obg")
    log.info("wrote %d patches to %s", len(list(indices)), outdir)
    return 0


def _cmd_patch_reconstruct(args) -> int:
    like = obg.read_grid(args.like)
    spec = _read_spec(args.spec)
    pattern = re.compile(r"patch_(\d+)\.obg$")
    pieces = []
    for path in sorted(Path(args.patches).glob("patch_*.obg")):
        m = pattern.search(path.name)
        if not m:
            continue
        pieces.append((int(m.group(1)), obg.read_grid(path).data))
    out = reconstruct(spec, like, pieces, weight=args.weight)
    obg.write_grid(out, args.output)
    log.info("reconstructed %d patches into %s", len(pieces), args.output)
    return 0


def _cmd_simulate(args) -> int:
    ref = obg.read_grid(args.ref)
    patterns = load_pattern_arg(args.pattern)
    from .grid import DomainBox
    lat, lon = ref.lat.values, ref.lon.values
    box = DomainBox(lat=(float(lat.min()), float(lat.max())),
                    lon=(float(lon.min()), float(lon.max())))
    t = ref.time.values
    t0 = float(args.start) if args.start is not None else float(t.min())
    t1 = float(args.end) if args.end is not None else float(t.max())
    times, lats, lons = generate_constellation(patterns, box, t0, t1)
    noise = (NoiseSpec(kind="gaussian", std=args.noise_std, seed=args.seed)
             if args.noise_std > 0 else NoiseSpec())
    track = sample_field(ref, times, lats, lons, noise)
    obg.write_track(track, args.out)
    log.info("wrote %d observations to %s", len(track), args.out)
    return 0


def _cmd_report_merge(args) -> int:
    reports = []
    for path in args.reports:
        reports.extend(parse_reports(Path(path).read_text()))
    rendered = render_report(reports, args.format)
    if args.out:
        Path(args.out).write_text(rendered)
    else:
        sys.stdout.write(rendered)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="obench",
        description="Benchmarking toolkit for gridded sea-surface-height fields.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="run a declarative pipeline config")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--config", help="path to a pipeline YAML config")
    group.add_argument("--preset", choices=PRESET_NAMES, help="bundled task preset")
    p.add_argument("--input", help="override the config's input path")
    p.add_argument("--output", help="override the config's output path")
    p.add_argument("--ref", help="reference grid substituted for ${ref} placeholders")
    p.set_defaults(fn=_cmd_pipeline)

    p = sub.add_parser("eval", help="score a study grid against a reference grid")
    p.add_argument("--ref", required=True, help="reference (truth) OBG grid")
    p.add_argument("--study", required=True, help="study (reconstruction) OBG grid")
    p.add_argument("--track", help="withheld observation track CSV for lambda_a")
    p.add_argument("--experiment", default="OSSE")
    p.add_argument("--algorithm", default="study")
    p.add_argument("--segment-len", type=int, default=256)
    p.add_argument("--out", help="report output path (stdout if omitted)")
    p.add_argument("--format", default="markdown", choices=("markdown", "md", "csv", "json"))
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering PNG diagnostics next to --out")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("eval-ose", help="score a study grid along a withheld track")
    p.add_argument("--study", required=True)
    p.add_argument("--track", required=True)
    p.add_argument("--experiment", default="OSE")
    p.add_argument("--algorithm", default="study")
    p.add_argument("--segment-len", type=int, default=256)
    p.add_argument("--out")
    p.add_argument("--format", default="markdown", choices=("markdown", "md", "csv", "json"))
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=_cmd_eval_ose)

    p = sub.add_parser("derive", help="derive a physical variable from SSH")
    p.add_argument("--var", required=True,
                   choices=("sla", "u", "v", "ke", "vort", "ens", "strain", "ow"))
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(fn=_cmd_derive)

    p = sub.add_parser("patch", help="sliding-window extraction and reconstruction")
    psub = p.add_subparsers(dest="patch_command", required=True)
    q = psub.add_parser("info", help="window count and per-dim geometry")
    q.add_argument("--spec", required=True, help="patch spec JSON (inline or file)")
    q.add_argument("--input", required=True)
    q.set_defaults(fn=_cmd_patch_info)
    q = psub.add_parser("extract", help="write windows as OBG files")
    q.add_argument("--spec", required=True)
    q.add_argument("--input", required=True)
    q.add_argument("--outdir", required=True)
    q.add_argument("--index", type=int, help="extract a single window")
    q.set_defaults(fn=_cmd_patch_extract)
    q = psub.add_parser("reconstruct", help="rebuild a field from patch files")
    q.add_argument("--spec", required=True)
    q.add_argument("--like", required=True, help="geometry donor OBG grid")
    q.add_argument("--patches", required=True, help="directory of patch_*.obg files")
    q.add_argument("--weight", default="uniform", choices=("uniform", "triangular"))
    q.add_argument("--output", required=True)
    q.set_defaults(fn=_cmd_patch_reconstruct)

    p = sub.add_parser("simulate", help="sample pseudo-observations along tracks")
    p.add_argument("--ref", required=True, help="reference OBG grid to observe")
    p.add_argument("--pattern", required=True,
                   help="nadir-4sat | swot-like | pattern JSON file")
    p.add_argument("--noise-std", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=float, help="period start, days since epoch")
    p.add_argument("--end", type=float, help="period end, days since epoch")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("report", help="report utilities")
    rsub = p.add_subparsers(dest="report_command", required=True)
    q = rsub.add_parser("merge", help="merge JSON reports into one table")
    q.add_argument("reports", nargs="+")
    q.add_argument("--format", default="markdown", choices=("markdown", "md", "csv", "json"))
    q.add_argument("--out")
    q.set_defaults(fn=_cmd_report_merge)

    return parser


def cli_dispatch(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.fn(args)
    except ObenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_dispatch())
