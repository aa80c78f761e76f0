"""Skill scores and wavenumber power spectral density metrics.

All PSD variants share one normalization: the two-sided power of a
conditioned plane integrates to its variance (sum PSD * dk per axis), and
folding or radial binning preserves that integral exactly.  The Hann
window, when enabled, carries the 1/mean(w^2) energy correction.  Score
curves are 1 - PSD(error)/PSD(truth), and resolved scales are read off at
the 0.5 threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnresolvedScaleError, ValidationError
from .grid import AlongTrackSet, EARTH_RADIUS_M, GriddedField, uniform_spacing

RESOLVED_THRESHOLD = 0.5
SEGMENT_SAMPLES = 256
SCORE_FLOOR = 1e-15

GEOMETRIES = ("isotropic", "lon_time", "lon_lat", "alongtrack")

WAVENUMBER_UNITS = "cycles m-1"
FREQUENCY_UNITS = "cycles day-1"


@dataclass(frozen=True)
class SpectrumResult:
    """PSD values over one or two strictly increasing spectral axes."""

    geometry: str
    axis1: np.ndarray
    axis1_name: str
    axis1_units: str
    psd: np.ndarray
    axis2: np.ndarray | None = None
    axis2_name: str = ""
    axis2_units: str = ""

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ValidationError(f"unknown spectrum geometry {self.geometry!r}")
        a1 = np.asarray(self.axis1, dtype=np.float64)
        psd = np.asarray(self.psd, dtype=np.float64)
        object.__setattr__(self, "axis1", a1)
        object.__setattr__(self, "psd", psd)
        if np.any(np.diff(a1) <= 0):
            raise ValidationError("spectral axis1 must be strictly increasing")
        if self.axis2 is not None:
            a2 = np.asarray(self.axis2, dtype=np.float64)
            object.__setattr__(self, "axis2", a2)
            if np.any(np.diff(a2) <= 0):
                raise ValidationError("spectral axis2 must be strictly increasing")
            if psd.shape != (a1.size, a2.size):
                raise ValidationError("psd shape does not match spectral axes")
        elif psd.shape != a1.shape:
            raise ValidationError("psd shape does not match spectral axis")
        if np.any(psd < 0):
            raise ValidationError("psd must be non-negative")

    def to_csv(self) -> str:
        lines = []
        if self.axis2 is None:
            lines.append(f"{self.axis1_name},psd")
            for k, p in zip(self.axis1, self.psd):
                lines.append(f"{k!r},{p!r}")
        else:
            lines.append(f"{self.axis1_name},{self.axis2_name},psd")
            for i, k in enumerate(self.axis1):
                for j, f2 in enumerate(self.axis2):
                    lines.append(f"{k!r},{f2!r},{self.psd[i, j]!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PsdScoreCurve:
    """Scale-dependent score 1 - PSD(err)/PSD(truth) on spectrum axes."""

    geometry: str
    axis1: np.ndarray
    axis1_name: str
    axis1_units: str
    score: np.ndarray
    axis2: np.ndarray | None = None
    axis2_name: str = ""
    axis2_units: str = ""

    def __post_init__(self):
        a1 = np.asarray(self.axis1, dtype=np.float64)
        score = np.asarray(self.score, dtype=np.float64)
        object.__setattr__(self, "axis1", a1)
        object.__setattr__(self, "score", score)
        if self.axis2 is not None:
            object.__setattr__(self, "axis2", np.asarray(self.axis2, dtype=np.float64))
        with np.errstate(invalid="ignore"):
            if np.any(score[np.isfinite(score)] > 1.0 + 1e-12):
                raise ValidationError("psd score cannot exceed 1")

    def to_csv(self) -> str:
        lines = []
        if self.axis2 is None:
            lines.append(f"{self.axis1_name},score")
            for k, s in zip(self.axis1, self.score):
                lines.append(f"{k!r},{s!r}")
        else:
            lines.append(f"{self.axis1_name},{self.axis2_name},score")
            for i, k in enumerate(self.axis1):
                for j, f2 in enumerate(self.axis2):
                    lines.append(f"{k!r},{f2!r},{self.score[i, j]!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ResolvedScale:
    """A resolved wavelength (km) or period (days) with its crossing flag."""

    value: float
    units: str
    flag: str = "resolved"


def _joint_valid(truth: np.ndarray, pred: np.ndarray) -> np.ndarray:
    return np.isfinite(truth) & np.isfinite(pred)


def rmse(truth: np.ndarray, pred: np.ndarray) -> float:
    """Root mean squared error over jointly valid cells."""
    truth = np.asarray(truth, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    ok = _joint_valid(truth, pred)
    if not ok.any():
        raise ValidationError("rmse: no jointly valid cells")
    diff = truth[ok] - pred[ok]
    return float(np.sqrt(np.mean(diff ** 2)))


def nrmse(truth: np.ndarray, pred: np.ndarray) -> float:
    """RMSE normalized by the RMS of the truth over the same cells."""
    truth = np.asarray(truth, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    ok = _joint_valid(truth, pred)
    if not ok.any():
        raise ValidationError("nrmse: no jointly valid cells")
    denom = float(np.sqrt(np.mean(truth[ok] ** 2)))
    if denom == 0.0:
        raise ValidationError("nrmse: rms(truth) is zero")
    return rmse(truth, pred) / denom


def nrmse_score_series(truth: GriddedField, pred: GriddedField):
    """Per-time-step spatial nRMSE scores with their mean and population std.

    Returns (scores array, mean, std).
    """
    if truth.shape != pred.shape:
        raise ValidationError("nrmse_score_series: shapes differ")
    scores = np.array([
        1.0 - nrmse(truth.data[t], pred.data[t]) for t in range(truth.shape[0])
    ])
    return scores, float(scores.mean()), float(scores.std())


def format_mean_std(mean: float, std: float | None) -> str:
    if std is None:
        return f"{mean:.2f}"
    return f"{mean:.2f} ± {std:.2f}"


def _hann(n: int) -> np.ndarray:
    # hanning(2) is [0, 0], which would zero the data and blow up the
    # energy correction; degenerate axes go unwindowed instead
    if n < 3:
        return np.ones(n)
    return np.hanning(n)


def _detrend_linear(arr: np.ndarray, axis: int) -> np.ndarray:
    """Remove the least-squares linear trend along one axis."""
    n = arr.shape[axis]
    if n < 2:
        return arr - arr
    x = np.arange(n, dtype=np.float64)
    xc = x - x.mean()
    moved = np.moveaxis(arr, axis, 0)
    slope = (xc[:, None] * (moved.reshape(n, -1))).sum(axis=0) / (xc ** 2).sum()
    mean = moved.reshape(n, -1).mean(axis=0)
    fit = mean[None, :] + xc[:, None] * slope[None, :]
    out = moved.reshape(n, -1) - fit
    return np.moveaxis(out.reshape(moved.shape), 0, axis)


def _check_no_nan(fld: GriddedField, what: str):
    if np.isnan(fld.data).any():
        raise ValidationError(f"{what}: field contains NaNs; fill them first")


def _plane_psd(plane: np.ndarray, d0: float, d1: float, window: bool,
               detrend: bool) -> np.ndarray:
    """Two-sided PSD of a 2-D plane, sum(PSD)*dk0*dk1 == conditioned variance."""
    n0, n1 = plane.shape
    if detrend:
        g = _detrend_linear(_detrend_linear(plane, 0), 1)
    else:
        g = plane - plane.mean()
    corr = 1.0
    if window:
        w = np.outer(_hann(n0), _hann(n1))
        g = g * w
        corr = 1.0 / np.mean(w ** 2)
    f = np.fft.fft2(g)
    return (np.abs(f) ** 2) * (d0 * d1) * corr / (n0 * n1)


def _fold_axis(psd: np.ndarray, n: int, axis: int) -> np.ndarray:
    """Fold a two-sided FFT axis onto non-negative frequencies, power-preserving."""
    moved = np.moveaxis(psd, axis, 0)
    half = n // 2
    out = np.empty((half + 1,) + moved.shape[1:])
    out[0] = moved[0]
    for k in range(1, half + (n % 2)):
        out[k] = moved[k] + moved[n - k]
    if n % 2 == 0 and half >= 1:
        out[half] = moved[half]
    return np.moveaxis(out, 0, axis)


def psd_isotropic(fld: GriddedField, window: bool = True) -> SpectrumResult:
    """Radially binned spatial PSD, averaged over time slices.

    Per slice: remove the mean, optional Hann window with energy
    correction, 2-D DFT, then sum the two-sided power into
    floor(min(ny, nx)/2) linear radial bins.  Bin values carry units of
    power per radial wavenumber, so sum(psd) * dk_r equals the slice
    variance when the window is off.
    """
    _check_no_nan(fld, "psd_isotropic")
    if fld.lat.units != "m" or fld.lon.units != "m":
        raise ValidationError("psd_isotropic: axes must be in meters")
    dy = uniform_spacing(fld.lat.values, "psd_isotropic lat")
    dx = uniform_spacing(fld.lon.values, "psd_isotropic lon")
    nt, ny, nx = fld.shape
    ky = np.fft.fftfreq(ny, dy)
    kx = np.fft.fftfreq(nx, dx)
    kr = np.hypot(ky[:, None], kx[None, :])
    nbins = min(ny, nx) // 2
    if nbins < 1:
        raise ValidationError("psd_isotropic: grid too small to bin")
    kr_max = float(kr.max())
    edges = np.linspace(0.0, kr_max, nbins + 1)
    dkr = edges[1] - edges[0]
    bin_idx = np.minimum((kr / dkr).astype(np.intp), nbins - 1).ravel()
    cell = (1.0 / (ny * dy)) * (1.0 / (nx * dx))

    acc = np.zeros(nbins)
    for t in range(nt):
        p2 = _plane_psd(fld.data[t], dy, dx, window, detrend=False)
        acc += np.bincount(bin_idx, weights=p2.ravel(), minlength=nbins)
    psd = acc * cell / dkr / nt
    centers = 0.5 * (edges[:-1] + edges[1:])
    return SpectrumResult(geometry="isotropic", axis1=centers, axis1_name="k_r",
                          axis1_units=WAVENUMBER_UNITS, psd=psd)


def psd_spacetime(fld: GriddedField, window: bool = True) -> SpectrumResult:
    """Zonal-wavenumber / frequency PSD, averaged over latitude rows.

    Each (time, lon) plane is linearly detrended along both axes, Hann
    windowed, transformed, and folded onto non-negative frequencies.
    """
    _check_no_nan(fld, "psd_spacetime")
    if fld.lon.units != "m":
        raise ValidationError("psd_spacetime: lon axis must be in meters")
    if fld.time.units != "days":
        raise ValidationError("psd_spacetime: time axis must be in days")
    dt = uniform_spacing(fld.time.values, "psd_spacetime time")
    dx = uniform_spacing(fld.lon.values, "psd_spacetime lon")
    nt, ny, nx = fld.shape
    acc = None
    for j in range(ny):
        p2 = _plane_psd(fld.data[:, j, :], dt, dx, window, detrend=True)
        folded = _fold_axis(_fold_axis(p2, nt, 0), nx, 1)
        acc = folded if acc is None else acc + folded
    psd = acc / ny
    freqs = np.fft.rfftfreq(nt, dt)
    kx = np.fft.rfftfreq(nx, dx)
    return SpectrumResult(geometry="lon_time", axis1=kx, axis1_name="k_x",
                          axis1_units=WAVENUMBER_UNITS, psd=psd.T,
                          axis2=freqs, axis2_name="f", axis2_units=FREQUENCY_UNITS)


def psd_latlon(fld: GriddedField, window: bool = True) -> SpectrumResult:
    """Zonal / meridional wavenumber PSD, averaged over time slices."""
    _check_no_nan(fld, "psd_latlon")
    if fld.lat.units != "m" or fld.lon.units != "m":
        raise ValidationError("psd_latlon: axes must be in meters")
    dy = uniform_spacing(fld.lat.values, "psd_latlon lat")
    dx = uniform_spacing(fld.lon.values, "psd_latlon lon")
    nt, ny, nx = fld.shape
    acc = None
    for t in range(nt):
        p2 = _plane_psd(fld.data[t], dy, dx, window, detrend=True)
        folded = _fold_axis(_fold_axis(p2, ny, 0), nx, 1)
        acc = folded if acc is None else acc + folded
    psd = acc / nt
    ky = np.fft.rfftfreq(ny, dy)
    kx = np.fft.rfftfreq(nx, dx)
    return SpectrumResult(geometry="lon_lat", axis1=kx, axis1_name="k_x",
                          axis1_units=WAVENUMBER_UNITS, psd=psd.T,
                          axis2=ky, axis2_name="k_y", axis2_units=WAVENUMBER_UNITS)


def _score_from_psd(truth: np.ndarray, err: np.ndarray) -> np.ndarray:
    floor = SCORE_FLOOR * truth.max() if truth.size else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        score = 1.0 - err / truth
    return np.where(truth < floor, np.nan, score)


def psd_score(truth: GriddedField, pred: GriddedField, geometry: str = "isotropic",
              window: bool = True) -> PsdScoreCurve:
    """Scale-dependent score 1 - PSD(truth - pred)/PSD(truth)."""
    if truth.shape != pred.shape:
        raise ValidationError("psd_score: fields have different shapes")
    err = truth.with_data(truth.data - pred.data)
    fn = {"isotropic": psd_isotropic, "lon_time": psd_spacetime,
          "lon_lat": psd_latlon}.get(geometry)
    if fn is None:
        raise ValidationError(f"psd_score: unsupported geometry {geometry!r}")
    spec_t = fn(truth, window=window)
    spec_e = fn(err, window=window)
    return PsdScoreCurve(geometry=geometry, axis1=spec_t.axis1,
                         axis1_name=spec_t.axis1_name, axis1_units=spec_t.axis1_units,
                         score=_score_from_psd(spec_t.psd, spec_e.psd),
                         axis2=spec_t.axis2, axis2_name=spec_t.axis2_name,
                         axis2_units=spec_t.axis2_units)


def _haversine_m(lat1, lon1, lat2, lon2) -> np.ndarray:
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlmb = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(a))


def _segments(n: int, gaps: np.ndarray, med: float, seg_len: int) -> list[np.ndarray]:
    """Non-overlapping seg_len-sample index blocks within contiguous runs."""
    breaks = np.nonzero(gaps >= 2.0 * med)[0] + 1
    out = []
    for start, stop in zip(np.r_[0, breaks], np.r_[breaks, n]):
        run = stop - start
        for s in range(run // seg_len):
            out.append(np.arange(start + s * seg_len, start + (s + 1) * seg_len))
    return out


def psd_alongtrack(truth: AlongTrackSet, pred: AlongTrackSet,
                   segment_len: int = SEGMENT_SAMPLES,
                   window: bool = True) -> tuple[SpectrumResult, PsdScoreCurve]:
    """Along-track PSD of the truth and the matching score curve.

    Both tracks must sit on identical sample points.  The records are
    split into contiguous runs wherever the great-circle gap reaches twice
    the median spacing, chopped into non-overlapping ``segment_len``-sample
    segments, mean-removed, Hann windowed, and transformed against
    along-track distance; PSDs average over segments.
    """
    if not (np.array_equal(truth.time, pred.time)
            and np.array_equal(truth.lat, pred.lat)
            and np.array_equal(truth.lon, pred.lon)):
        raise ValidationError("psd_alongtrack: tracks are not on identical points")
    ok = np.isfinite(truth.value) & np.isfinite(pred.value)
    tv, pv = truth.value[ok], pred.value[ok]
    lat, lon = truth.lat[ok], truth.lon[ok]
    n = tv.size
    if n < 2 * segment_len:
        raise ValidationError("psd_alongtrack: fewer than 2 usable segments")
    gaps = _haversine_m(lat[:-1], lon[:-1], lat[1:], lon[1:])
    med = float(np.median(gaps))
    if med <= 0:
        raise ValidationError("psd_alongtrack: degenerate along-track spacing")
    segs = _segments(n, gaps, med, segment_len)
    if len(segs) < 2:
        raise ValidationError("psd_alongtrack: fewer than 2 usable segments")

    w = _hann(segment_len) if window else np.ones(segment_len)
    corr = 1.0 / np.mean(w ** 2)
    half = segment_len // 2
    scale = np.ones(half + 1)
    scale[1:] = 2.0
    if segment_len % 2 == 0:
        scale[-1] = 1.0

    def one_sided(series: np.ndarray) -> np.ndarray:
        g = (series - series.mean()) * w
        f = np.fft.rfft(g)
        return scale * (np.abs(f) ** 2) * med * corr / segment_len

    acc_t = np.zeros(half + 1)
    acc_e = np.zeros(half + 1)
    for seg in segs:
        acc_t += one_sided(tv[seg])
        acc_e += one_sided(tv[seg] - pv[seg])
    psd_t = acc_t / len(segs)
    psd_e = acc_e / len(segs)
    k = np.fft.rfftfreq(segment_len, med)
    spectrum = SpectrumResult(geometry="alongtrack", axis1=k, axis1_name="k_s",
                              axis1_units=WAVENUMBER_UNITS, psd=psd_t)
    curve = PsdScoreCurve(geometry="alongtrack", axis1=k, axis1_name="k_s",
                          axis1_units=WAVENUMBER_UNITS,
                          score=_score_from_psd(psd_t, psd_e))
    return spectrum, curve


def _scale_units(axis_units: str) -> tuple[str, float]:
    if axis_units == WAVENUMBER_UNITS:
        return "km", 1e-3
    if axis_units == FREQUENCY_UNITS:
        return "days", 1.0
    raise ValidationError(f"resolved_scale: unknown axis units {axis_units!r}")


def _resolve_1d(k: np.ndarray, score: np.ndarray, axis_units: str) -> ResolvedScale:
    units, factor = _scale_units(axis_units)
    keep = (k > 0) & np.isfinite(score)
    k, score = k[keep], score[keep]
    if k.size == 0:
        raise UnresolvedScaleError("no defined score bins at positive wavenumber")
    crossing = None
    for i in range(k.size - 1):
        if score[i] >= RESOLVED_THRESHOLD and score[i + 1] < RESOLVED_THRESHOLD:
            frac = (RESOLVED_THRESHOLD - score[i]) / (score[i + 1] - score[i])
            crossing = k[i] + frac * (k[i + 1] - k[i])
            break
    if crossing is not None:
        return ResolvedScale(value=(1.0 / crossing) * factor, units=units)
    if np.all(score < RESOLVED_THRESHOLD):
        raise UnresolvedScaleError("score never reaches 0.5: unresolved at all scales")
    return ResolvedScale(value=(1.0 / k[-1]) * factor, units=units, flag="grid_scale")


def resolved_scale(curve: PsdScoreCurve) -> ResolvedScale:
    """Wavelength (or period) of the first downward crossing of score 0.5.

    Scanning runs from the longest to the shortest scale with linear
    interpolation in (k, score).  A curve that stays above 0.5 resolves to
    the grid scale (flagged); one that never reaches 0.5 raises
    :class:`UnresolvedScaleError`.
    """
    if curve.axis2 is not None:
        raise ValidationError("resolved_scale: use resolved_scales_lon_time for 2-D curves")
    return _resolve_1d(curve.axis1, curve.score, curve.axis1_units)


def resolved_scales_lon_time(
        curve: PsdScoreCurve) -> tuple[ResolvedScale | None, ResolvedScale | None]:
    """Reduce a lon_time score plane to (lambda_x, lambda_t).

    lambda_x reads the frequency-averaged score against zonal wavenumber;
    lambda_t reads the wavenumber-averaged score against frequency.  An
    axis whose marginal never reaches the threshold comes back None.
    """
    if curve.geometry != "lon_time" or curve.axis2 is None:
        raise ValidationError("resolved_scales_lon_time: expected a lon_time score plane")
    with np.errstate(all="ignore"):
        score_kx = np.nanmean(curve.score, axis=1)
        score_f = np.nanmean(curve.score, axis=0)
    out = []
    for axis, score, units in ((curve.axis1, score_kx, curve.axis1_units),
                               (curve.axis2, score_f, curve.axis2_units)):
        try:
            out.append(_resolve_1d(axis, score, units))
        except UnresolvedScaleError:
            out.append(None)
    return out[0], out[1]
