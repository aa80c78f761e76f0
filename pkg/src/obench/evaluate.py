"""Assemble leaderboard rows from reference / study fields and tracks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

log = logging.getLogger(__name__)

from .errors import UnresolvedScaleError, ValidationError
from .grid import AlongTrackSet, GriddedField, latlon_deg2m
from .regrid import regrid_to_track
from .report import EvalReport
from .spectral import (PsdScoreCurve, SpectrumResult, nrmse, nrmse_score_series,
                       psd_alongtrack, psd_isotropic, psd_score, resolved_scale,
                       resolved_scales_lon_time)


@dataclass(frozen=True)
class EvalDiagnostics:
    """Curves behind a leaderboard row, for figures and CSV export."""

    nrmse_scores: np.ndarray | None = None
    psd_truth: SpectrumResult | None = None
    score_isotropic: PsdScoreCurve | None = None
    score_spacetime: PsdScoreCurve | None = None
    psd_track: SpectrumResult | None = None
    score_track: PsdScoreCurve | None = None


def _same_axes(a: GriddedField, b: GriddedField) -> bool:
    return all(np.array_equal(ax_a.values, ax_b.values)
               for ax_a, ax_b in zip(a.axes, b.axes))


def _scale_or_none(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except UnresolvedScaleError:
        return None


def evaluate_osse(truth: GriddedField, study: GriddedField, experiment: str,
                  algorithm: str, track: AlongTrackSet | None = None,
                  window: bool = True, segment_len: int = 256,
                  ) -> tuple[EvalReport, EvalDiagnostics]:
    """Full-field OSSE scoring: nRMSE series plus gridded resolved scales.

    ``truth`` and ``study`` must share axes exactly (regrid first).  When a
    withheld observation track is supplied, the along-track score lambda_a
    is computed as well; OSSE leaderboards normally leave it absent.
    """
    if not _same_axes(truth, study):
        raise ValidationError("truth and study are on different grids; regrid first")
    scores, mean, std = nrmse_score_series(truth, study)

    truth_m = latlon_deg2m(truth) if truth.lat.units.startswith("deg") else truth
    study_m = latlon_deg2m(study) if study.lat.units.startswith("deg") else study

    spec_truth = psd_isotropic(truth_m, window=window)
    curve_iso = psd_score(truth_m, study_m, geometry="isotropic", window=window)
    curve_st = psd_score(truth_m, study_m, geometry="lon_time", window=window)

    flags: dict[str, str] = {}
    lam_r = _scale_or_none(resolved_scale, curve_iso)
    flags["lambda_r"] = lam_r.flag if lam_r else "unresolved"
    lam_x, lam_t = resolved_scales_lon_time(curve_st)
    flags["lambda_x"] = lam_x.flag if lam_x else "unresolved"
    flags["lambda_t"] = lam_t.flag if lam_t else "unresolved"

    psd_track_res = score_track = None
    lam_a = None
    if track is not None:
        pred_track = regrid_to_track(study, track)
        try:
            psd_track_res, score_track = psd_alongtrack(track, pred_track,
                                                        segment_len=segment_len,
                                                        window=window)
        except ValidationError as exc:
            # short regional passes may not fill two segments; report the
            # row without lambda_a rather than aborting the evaluation
            log.warning("along-track score skipped: %s", exc)
            flags["lambda_a"] = "insufficient_segments"
        else:
            lam_a = _scale_or_none(resolved_scale, score_track)
            flags["lambda_a"] = lam_a.flag if lam_a else "unresolved"

    report = EvalReport(
        experiment=experiment, algorithm=algorithm,
        nrmse_mean=mean, nrmse_std=std,
        lambda_a_km=lam_a.value if lam_a else None,
        lambda_r_km=lam_r.value if lam_r else None,
        lambda_x_km=lam_x.value if lam_x else None,
        lambda_t_days=lam_t.value if lam_t else None,
        flags=flags,
    )
    diag = EvalDiagnostics(nrmse_scores=scores, psd_truth=spec_truth,
                           score_isotropic=curve_iso, score_spacetime=curve_st,
                           psd_track=psd_track_res, score_track=score_track)
    return report, diag


def evaluate_ose(study: GriddedField, track: AlongTrackSet, experiment: str,
                 algorithm: str, window: bool = True, segment_len: int = 256,
                 ) -> tuple[EvalReport, EvalDiagnostics]:
    """Observation-only scoring along a withheld track: nRMSE and lambda_a."""
    pred_track = regrid_to_track(study, track)
    score = 1.0 - nrmse(track.value, pred_track.value)
    psd_track_res, score_track = psd_alongtrack(track, pred_track,
                                                segment_len=segment_len, window=window)
    lam_a = _scale_or_none(resolved_scale, score_track)
    report = EvalReport(
        experiment=experiment, algorithm=algorithm, nrmse_mean=score,
        lambda_a_km=lam_a.value if lam_a else None,
        flags={"lambda_a": lam_a.flag if lam_a else "unresolved"},
    )
    diag = EvalDiagnostics(psd_track=psd_track_res, score_track=score_track)
    return report, diag
