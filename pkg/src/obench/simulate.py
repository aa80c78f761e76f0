"""Pseudo-observation simulation: synthetic satellite tracks over a grid.

Ground tracks are straight lines in the local tangent plane of the domain
box, alternating between the +inclination and -inclination headings, with
pass offsets interleaved so the pattern repeats after one repeat cycle.
Sampled values are trilinear interpolations of the reference field plus
optional Gaussian noise from a seeded SplitMix64 / Box-Muller stream.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from math import gcd
from pathlib import Path

import numpy as np

from . import timeutil
from .errors import EmptyDomainError, ValidationError
from .grid import (DEG2RAD, EARTH_RADIUS_M, AlongTrackSet, DomainBox, GriddedField,
                   _readonly)
from .regrid import interp_trilinear

EARTH_CIRCUMFERENCE_M = 2.0 * math.pi * EARTH_RADIUS_M

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * _MIX1 & 0xFFFFFFFFFFFFFFFF
    z = (z ^ (z >> 27)) * _MIX2 & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


class Prng:
    """SplitMix64 stream feeding Box-Muller for Gaussian draws.

    Output k mixes state ``seed + (k+1) * gamma``, so the scalar stream and
    the vectorized helpers below produce identical sequences.  Gaussian
    draws consume two uniforms each and return the cosine branch.
    """

    def __init__(self, seed: int):
        self._state = seed & 0xFFFFFFFFFFFFFFFF

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & 0xFFFFFFFFFFFFFFFF
        return _mix64(self._state)

    def uniform(self) -> float:
        """Uniform in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * 2.0 ** -53

    def gaussian(self) -> float:
        u1 = self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def randbelow(self, n: int) -> int:
        """Unbiased integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValidationError("randbelow: n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n


def _gaussian_block(seed: int, n: int) -> np.ndarray:
    """First n Gaussian draws of Prng(seed), computed vectorized."""
    if n == 0:
        return np.empty(0)
    k = np.arange(1, 2 * n + 1, dtype=np.uint64)
    z = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + k * np.uint64(_GAMMA)) & _MASK64
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)) & _MASK64
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)) & _MASK64
    z = z ^ (z >> np.uint64(31))
    u = ((z >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53
    u1, u2 = u[0::2], u[1::2]
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass(frozen=True)
class SwathSpec:
    """Across-track replication geometry for wide-swath patterns."""

    half_width: float
    across_spacing: float
    nadir_gap: float = 0.0

    def __post_init__(self):
        if self.half_width < 0 or self.across_spacing <= 0 or self.nadir_gap < 0:
            raise ValidationError("swath: widths must be >= 0 and spacing > 0")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"
    std: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.std < 0:
            raise ValidationError("noise std must be >= 0")


@dataclass(frozen=True)
class TrackPattern:
    """Geometry of one simulated altimeter.

    ``passes_per_cycle`` straight passes are laid per repeat cycle,
    alternating +/- inclination headings, with across-domain offsets
    interleaved by a coprime stride so coverage builds up evenly before
    the pattern repeats.
    """

    kind: str = "nadir"
    inclination: float = 66.0
    along_track_spacing: float = 6_000.0
    repeat_cycle: float = 10.0
    ground_speed: float = 6_600.0
    passes_per_cycle: int = 6
    phase: float = 0.0
    swath: SwathSpec | None = None

    def __post_init__(self):
        if self.kind not in ("nadir", "swath"):
            raise ValidationError(f"unknown track kind {self.kind!r}")
        if not 0.0 < self.inclination < 180.0:
            raise ValidationError("inclination must be in (0, 180) degrees")
        if self.along_track_spacing <= 0 or self.ground_speed <= 0:
            raise ValidationError("spacing and ground speed must be positive")
        if self.repeat_cycle <= 0 or self.passes_per_cycle <= 0:
            raise ValidationError("repeat cycle and passes per cycle must be positive")
        if self.kind == "swath" and self.swath is None:
            raise ValidationError("swath pattern requires a SwathSpec")

    def to_json(self) -> str:
        raw = {
            "kind": self.kind,
            "inclination": self.inclination,
            "along_track_spacing": self.along_track_spacing,
            "repeat_cycle": self.repeat_cycle,
            "ground_speed": self.ground_speed,
            "passes_per_cycle": self.passes_per_cycle,
            "phase": self.phase,
        }
        if self.swath is not None:
            raw["swath"] = {
                "half_width": self.swath.half_width,
                "across_spacing": self.swath.across_spacing,
                "nadir_gap": self.swath.nadir_gap,
            }
        return json.dumps(raw, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TrackPattern":
        raw = json.loads(text)
        swath = raw.pop("swath", None)
        if swath is not None:
            swath = SwathSpec(**swath)
        return cls(swath=swath, **raw)


def preset_patterns(name: str) -> list[TrackPattern]:
    """Named constellations; values are artifact presets.

    The four nadir phases stagger by quarter pass-slots (1/24 cycle), so no
    two satellites ever cross the domain at the same instant; commensurate
    phases would interleave distant ground tracks in the time-sorted output
    and distort along-track spacing statistics.
    """
    if name == "nadir-4sat":
        return [TrackPattern(kind="nadir", inclination=66.0, phase=p)
                for p in (0.0, 1.0 / 24.0, 1.0 / 12.0, 1.0 / 8.0)]
    if name == "swot-like":
        return [TrackPattern(kind="swath", inclination=66.0,
                             along_track_spacing=2_000.0, repeat_cycle=21.0,
                             passes_per_cycle=12,
                             swath=SwathSpec(half_width=120_000.0,
                                             across_spacing=2_000.0,
                                             nadir_gap=20_000.0))]
    raise ValidationError(f"unknown track preset {name!r}")


def _interleave_stride(n: int) -> int:
    """Coprime stride nearest to the golden-ratio fraction of n."""
    if n <= 2:
        return 1
    target = max(1, round(0.618 * n))
    best, best_d = 1, n
    for s in range(1, n):
        if gcd(s, n) == 1:
            d = abs(s - target)
            if d < best_d:
                best, best_d = s, d
    return best

def _clip_segment(x0: float, y0: float, dx: float, dy: float,
                  w: float, h: float) -> tuple[float, float] | None:
    """Intersect the line (x0,y0) + s*(dx,dy) with [0,w] x [0,h]."""
    s_lo, s_hi = -math.inf, math.inf
    for origin, d, hi in ((x0, dx, w), (y0, dy, h)):
        if d == 0.0:
            if not 0.0 <= origin <= hi:
                return None
            continue
        a = (0.0 - origin) / d
        b = (hi - origin) / d
        s_lo = max(s_lo, min(a, b))
        s_hi = min(s_hi, max(a, b))
    if not s_lo < s_hi:
        return None
    return s_lo, s_hi


def _tangent_plane(box: DomainBox) -> tuple[float, float, float]:
    lat0, lat1 = box.lat
    lon0, lon1 = box.lon
    mean_lat = 0.5 * (lat0 + lat1)
    width = (lon1 - lon0) * DEG2RAD * EARTH_RADIUS_M * math.cos(mean_lat * DEG2RAD)
    height = (lat1 - lat0) * DEG2RAD * EARTH_RADIUS_M
    return width, height, mean_lat


def generate_tracks(pattern: TrackPattern, box: DomainBox, t_start: float,
                    t_end: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample points (time, lat, lon) for one pattern over a period in days.

    The pass schedule lives on an absolute clock (days since the epoch the
    caller works in), so any window cuts a consistent snapshot of the same
    eternal pattern.
    """
    if t_end <= t_start:
        return np.empty(0), np.empty(0), np.empty(0)
    width, height, mean_lat = _tangent_plane(box)
    n_cycle = pattern.passes_per_cycle
    dt_pass = pattern.repeat_cycle / n_cycle
    stride = _interleave_stride(n_cycle)
    speed_days = pattern.ground_speed * 86400.0
    half_span = math.hypot(width, height) / speed_days

    margin = math.ceil(half_span / dt_pass) + 1
    k_min = math.floor((t_start - pattern.phase * pattern.repeat_cycle) / dt_pass) - margin
    k_max = math.ceil((t_end - pattern.phase * pattern.repeat_cycle) / dt_pass) + margin

    times, xs, ys = [], [], []
    for k in range(k_min, k_max + 1):
        t_cross = pattern.phase * pattern.repeat_cycle + (k + 0.5) * dt_pass
        if t_cross + half_span < t_start or t_cross - half_span > t_end:
            continue
        frac = ((k % n_cycle) * stride % n_cycle + 0.5) / n_cycle
        x_mid = frac * width
        heading = pattern.inclination if k % 2 == 0 else -pattern.inclination
        rad = heading * DEG2RAD
        dx, dy = math.sin(rad), math.cos(rad)
        seg = _clip_segment(x_mid, height / 2.0, dx, dy, width, height)
        if seg is None:
            continue
        s_lo, s_hi = seg
        n_pts = int(math.floor((s_hi - s_lo) / pattern.along_track_spacing)) + 1
        s = s_lo + pattern.along_track_spacing * np.arange(n_pts)
        t = t_cross + s / speed_days
        keep = (t >= t_start) & (t <= t_end)
        if not keep.any():
            continue
        px = x_mid + s[keep] * dx
        py = height / 2.0 + s[keep] * dy
        pt = t[keep]
        if pattern.kind == "swath":
            sw = pattern.swath
            j_lo = max(1, math.ceil(sw.nadir_gap / sw.across_spacing))
            j_hi = math.floor(sw.half_width / sw.across_spacing)
            offsets = [j * sw.across_spacing for j in range(j_lo, j_hi + 1)]
            offsets = [-o for o in reversed(offsets)] + \
                ([0.0] if sw.nadir_gap == 0.0 else []) + offsets
            perp_x, perp_y = dy, -dx
            for o in offsets:
                qx = px + o * perp_x
                qy = py + o * perp_y
                ok = (qx >= 0.0) & (qx <= width) & (qy >= 0.0) & (qy <= height)
                times.append(pt[ok])
                xs.append(qx[ok])
                ys.append(qy[ok])
        else:
            times.append(pt)
            xs.append(px)
            ys.append(py)
    if not times:
        return np.empty(0), np.empty(0), np.empty(0)
    t = np.concatenate(times)
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    lat = box.lat[0] + y / (DEG2RAD * EARTH_RADIUS_M)
    lon = box.lon[0] + x / (DEG2RAD * EARTH_RADIUS_M * math.cos(mean_lat * DEG2RAD))
    order = np.argsort(t, kind="stable")
    return t[order], lat[order], lon[order]


def generate_constellation(patterns: list[TrackPattern], box: DomainBox,
                           t_start: float, t_end: float):
    """Union of several patterns' sample points, sorted by time."""
    parts = [generate_tracks(p, box, t_start, t_end) for p in patterns]
    t = np.concatenate([p[0] for p in parts]) if parts else np.empty(0)
    lat = np.concatenate([p[1] for p in parts]) if parts else np.empty(0)
    lon = np.concatenate([p[2] for p in parts]) if parts else np.empty(0)
    order = np.argsort(t, kind="stable")
    return t[order], lat[order], lon[order]


def sample_field(fld: GriddedField, times: np.ndarray, lats: np.ndarray,
                 lons: np.ndarray, noise: NoiseSpec = NoiseSpec()) -> AlongTrackSet:
    """Observe a field at the given points: trilinear value plus noise.

    Points that interpolate to NaN (outside the hull or fully masked) are
    dropped; the count lands in a log message.  Noise draws are made per
    input point before dropping, so the realization at a surviving point
    does not depend on how many other points were dropped.
    """
    times = np.asarray(times, dtype=np.float64)
    vals = interp_trilinear(fld, times, lats, lons)
    if noise.kind == "gaussian" and noise.std > 0.0:
        vals = vals + noise.std * _gaussian_block(noise.seed, times.size)
    keep = np.isfinite(vals)
    dropped = int(times.size - keep.sum())
    if dropped:
        import logging
        logging.getLogger(__name__).info(
            "sample_field: dropped %d of %d NaN samples", dropped, times.size)
    return AlongTrackSet(time=times[keep], lat=np.asarray(lats)[keep],
                         lon=np.asarray(lons)[keep], value=vals[keep],
                         epoch=fld.epoch, var=fld.var, units=fld.units)


def osse_split(fld: GriddedField, eval_start: str, eval_end: str,
               spinup_days: float = 0.0) -> tuple[GriddedField, GriddedField]:
    """Partition a field's time axis into (train, eval) views.

    The eval view is the closed period [eval_start, eval_end]; the train
    view is everything outside [eval_start - spinup_days, eval_end], so the
    eval reference never leaks into a training export.
    """
    epoch = fld.epoch_dt()
    t0 = timeutil.date_to_days(eval_start, epoch)
    t1 = timeutil.date_to_days(eval_end, epoch)
    if t1 < t0:
        raise ValidationError("eval_end before eval_start")
    t = fld.time.values
    eval_mask = (t >= t0) & (t <= t1)
    if not eval_mask.any():
        raise EmptyDomainError("evaluation period is disjoint from the time axis")
    train_mask = (t < t0 - spinup_days) | (t > t1)
    return _time_subset(fld, train_mask), _time_subset(fld, eval_mask)


def _time_subset(fld: GriddedField, mask: np.ndarray) -> GriddedField:
    from .grid import CoordAxis
    return replace(fld, time=CoordAxis("time", fld.time.values[mask], fld.time.units),
                   data=_readonly(fld.data[mask]))


def load_pattern_arg(arg: str | Path) -> list[TrackPattern]:
    """Resolve a CLI --pattern argument: preset name or JSON file path."""
    text = str(arg)
    if text in ("nadir-4sat", "swot-like"):
        return preset_patterns(text)
    path = Path(text)
    if path.exists():
        raw = json.loads(path.read_text())
        if isinstance(raw, list):
            return [TrackPattern.from_json(json.dumps(entry)) for entry in raw]
        return [TrackPattern.from_json(json.dumps(raw))]
    raise ValidationError(f"unknown pattern {text!r}: not a preset or JSON file")
