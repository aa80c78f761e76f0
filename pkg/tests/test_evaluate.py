import numpy as np
import pytest

from obench.errors import ValidationError
from obench.evaluate import evaluate_ose, evaluate_osse
from obench.report import render_markdown
from obench.simulate import NoiseSpec, sample_field

from conftest import make_field


def eddy_truth(rng, nt=10, n=32):
    """Small advecting-bump truth field on a degree grid."""
    fld = make_field(np.zeros((nt, n, n)), lat_start=35.0, lon_start=-62.0)
    lat = fld.lat.values
    lon = fld.lon.values
    data = np.zeros((nt, n, n))
    centers = rng.uniform(0.2, 0.8, size=(3, 2))
    vel = rng.uniform(-0.01, 0.01, size=(3, 2))
    amps = rng.uniform(-0.4, 0.4, 3)
    width = 0.12
    yy = (lat - lat[0]) / (lat[-1] - lat[0])
    xx = (lon - lon[0]) / (lon[-1] - lon[0])
    for t in range(nt):
        for c in range(3):
            cy = centers[c, 0] + vel[c, 0] * t
            cx = centers[c, 1] + vel[c, 1] * t
            data[t] += amps[c] * np.exp(-((yy[:, None] - cy) ** 2
                                          + (xx[None, :] - cx) ** 2) / (2 * width ** 2))
    return fld.with_data(data)


def test_identity_study_scores_one(rng):
    truth = eddy_truth(rng)
    report, diag = evaluate_osse(truth, truth, "OSSE", "identity")
    assert report.nrmse_mean == 1.0
    assert report.nrmse_std == 0.0
    assert report.flags["lambda_r"] == "grid_scale"
    assert report.flags["lambda_x"] == "grid_scale"
    assert report.flags["lambda_t"] == "grid_scale"
    text = render_markdown([report])
    assert "1.00 ± 0.00" in text


def test_climatology_study_scores_lower(rng):
    truth = eddy_truth(rng)
    clim = truth.with_data(np.tile(truth.data.mean(axis=0, keepdims=True),
                                   (truth.shape[0], 1, 1)))
    ident, _ = evaluate_osse(truth, truth, "OSSE", "identity")
    worse, _ = evaluate_osse(truth, clim, "OSSE", "climatology")
    assert worse.nrmse_mean < ident.nrmse_mean
    assert worse.flags["lambda_t"] == "unresolved"


def test_mismatched_grids_rejected(rng):
    truth = eddy_truth(rng)
    other = make_field(np.zeros(truth.shape), lat_start=10.0)
    with pytest.raises(ValidationError):
        evaluate_osse(truth, other, "OSSE", "x")


def test_osse_with_track_lambda_a(rng):
    truth = eddy_truth(rng, nt=12, n=48)
    # long, dense synthetic track inside the field's hull
    n = 700
    lat = np.full(n, 36.0)
    lon = np.linspace(truth.lon.values[0], truth.lon.values[-1], n)
    times = np.linspace(0.0, 10.0, n)
    track = sample_field(truth, times, lat, lon, NoiseSpec())
    report, diag = evaluate_osse(truth, truth, "OSSE", "identity", track=track,
                                 segment_len=64)
    assert report.lambda_a_km is not None
    assert report.flags["lambda_a"] == "grid_scale"
    assert diag.score_track is not None


def test_osse_track_too_short_degrades_gracefully(rng):
    truth = eddy_truth(rng, nt=6, n=32)
    n = 100  # way below two default 256-sample segments
    lat = np.full(n, 36.0)
    lon = np.linspace(truth.lon.values[0], truth.lon.values[-1], n)
    track = sample_field(truth, np.linspace(0, 5, n), lat, lon, NoiseSpec())
    report, diag = evaluate_osse(truth, truth, "OSSE", "identity", track=track)
    assert report.lambda_a_km is None
    assert report.flags["lambda_a"] == "insufficient_segments"
    assert report.nrmse_mean == 1.0  # the rest of the row still computed


def test_evaluate_ose(rng):
    truth = eddy_truth(rng, nt=12, n=48)
    n = 700
    lat = np.full(n, 36.0)
    lon = np.linspace(truth.lon.values[0], truth.lon.values[-1], n)
    times = np.linspace(0.0, 10.0, n)
    track = sample_field(truth, times, lat, lon, NoiseSpec())
    report, _ = evaluate_ose(truth, track, "OSE", "identity", segment_len=64)
    assert report.nrmse_mean > 0.999
    assert report.lambda_r_km is None  # OSE rows carry only lambda_a
    assert report.lambda_a_km is not None
