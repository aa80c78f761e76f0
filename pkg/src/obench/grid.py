"""Core data model: gridded fields, along-track sets, and coordinate ops.

The canonical layout for gridded data is a float64 array of shape
``[time, lat, lon]`` with strictly increasing coordinate axes.  Missing
values are IEEE-754 NaN everywhere; infinities are rejected.  All types
are immutable after construction and every operation returns a new value.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Iterable, Mapping

import numpy as np

from . import timeutil
from .errors import EmptyDomainError, ValidationError

log = logging.getLogger(__name__)

EARTH_RADIUS_M = 6_371_000.0
DEG2RAD = math.pi / 180.0

_TIME_UNIT_DAYS = {"days": 1.0, "hours": 1.0 / 24.0, "seconds": 1.0 / 86400.0}


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=np.float64)
    if out is arr or out.base is arr:
        out = out.copy()
    out.setflags(write=False)
    return out


def _is_monotonic(values: np.ndarray) -> tuple[bool, bool]:
    """Return (strictly increasing, strictly decreasing)."""
    if values.size < 2:
        return True, True
    d = np.diff(values)
    return bool(np.all(d > 0)), bool(np.all(d < 0))


@dataclass(frozen=True)
class CoordAxis:
    """A named, strictly monotonic 1-D coordinate axis.

    Latitude and longitude are in degrees unless converted to meters;
    time is float days since the owning object's epoch unless rescaled.
    On input, longitudes may lie anywhere in [-180, 360) and lat/lon may
    be descending; ``validate_latlon`` canonicalizes to the ascending
    [-180, 180) convention.
    """

    name: str
    values: np.ndarray
    units: str

    def __post_init__(self):
        if self.name not in ("time", "lat", "lon"):
            raise ValidationError(f"unknown axis name {self.name!r}")
        vals = _readonly(np.atleast_1d(np.asarray(self.values, dtype=np.float64)))
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1:
            raise ValidationError(f"axis {self.name}: values must be 1-D")
        if not np.all(np.isfinite(vals)):
            raise ValidationError(f"axis {self.name}: non-finite coordinate values")
        inc, dec = _is_monotonic(vals)
        if not (inc or dec):
            raise ValidationError(f"axis {self.name}: values not strictly monotonic")
        if self.name == "lat" and self.units.startswith("deg") and vals.size:
            if vals.min() < -90.0 or vals.max() > 90.0:
                raise ValidationError("axis lat: values outside [-90, 90]")
        if self.name == "lon" and self.units.startswith("deg") and vals.size:
            if vals.min() < -180.0 or vals.max() >= 360.0:
                raise ValidationError("axis lon: values outside [-180, 360)")

    def __len__(self) -> int:
        return self.values.size

    @property
    def ascending(self) -> bool:
        return self.values.size < 2 or self.values[1] > self.values[0]


def _axis(name: str, values, units: str | None = None) -> CoordAxis:
    if units is None:
        units = "days" if name == "time" else "degrees"
    return CoordAxis(name, np.asarray(values, dtype=np.float64), units)


@dataclass(frozen=True)
class GriddedField:
    """A 3-D scalar field on a regular (time, lat, lon) grid."""

    var: str
    units: str
    time: CoordAxis
    lat: CoordAxis
    lon: CoordAxis
    data: np.ndarray
    epoch: str
    attrs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        data = _readonly(np.asarray(self.data, dtype=np.float64))
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "attrs", dict(self.attrs))
        expected = (len(self.time), len(self.lat), len(self.lon))
        if data.shape != expected:
            raise ValidationError(
                f"data shape {data.shape} does not match axes {expected}"
            )
        if np.isinf(data).any():
            raise ValidationError("data contains infinities; missing values are NaN")
        if len(self.time) > 1 and not self.time.ascending:
            raise ValidationError("grid time axis must be strictly increasing")
        timeutil.parse_epoch(self.epoch)
        for ax, nm in ((self.time, "time"), (self.lat, "lat"), (self.lon, "lon")):
            if ax.name != nm:
                raise ValidationError(f"axis order must be (time, lat, lon); got {ax.name}")

    @property
    def axes(self) -> tuple[CoordAxis, CoordAxis, CoordAxis]:
        return (self.time, self.lat, self.lon)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape  # type: ignore[return-value]

    def epoch_dt(self) -> datetime:
        return timeutil.parse_epoch(self.epoch)

    def with_data(self, data: np.ndarray, var: str | None = None,
                  units: str | None = None) -> "GriddedField":
        """Same geometry, new payload (and optionally a new variable label)."""
        return replace(self, data=_readonly(data),
                       var=self.var if var is None else var,
                       units=self.units if units is None else units)


@dataclass(frozen=True)
class AlongTrackSet:
    """Time-ordered sparse observations as parallel column arrays."""

    time: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    value: np.ndarray
    epoch: str
    var: str = "ssh"
    units: str = "m"

    def __post_init__(self):
        cols = {}
        n = None
        for name in ("time", "lat", "lon", "value"):
            arr = _readonly(np.atleast_1d(np.asarray(getattr(self, name), dtype=np.float64)))
            cols[name] = arr
            if arr.ndim != 1:
                raise ValidationError(f"track column {name} must be 1-D")
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise ValidationError("track columns must have equal length")
            object.__setattr__(self, name, arr)
        if n and np.any(np.diff(cols["time"]) < 0):
            raise ValidationError("track records must be sorted ascending by time")
        if n:
            if not np.all(np.isfinite(cols["time"])):
                raise ValidationError("track times must be finite")
            lat, lon = cols["lat"], cols["lon"]
            if not np.all(np.isfinite(lat)) or not np.all(np.isfinite(lon)):
                raise ValidationError("track coordinates must be finite")
            if lat.min() < -90.0 or lat.max() > 90.0:
                raise ValidationError("track lat outside [-90, 90]")
            if lon.min() < -180.0 or lon.max() >= 360.0:
                raise ValidationError("track lon outside [-180, 360)")
        timeutil.parse_epoch(self.epoch)

    def __len__(self) -> int:
        return self.time.size

    def epoch_dt(self) -> datetime:
        return timeutil.parse_epoch(self.epoch)

    @classmethod
    def from_records(cls, records: Iterable[tuple[float, float, float, float]],
                     epoch: str, var: str = "ssh", units: str = "m") -> "AlongTrackSet":
        """Build from (time, lat, lon, value) tuples, sorting stably by time."""
        rows = list(records)
        if not rows:
            empty = np.empty(0)
            return cls(empty, empty, empty, empty, epoch, var, units)
        arr = np.asarray(rows, dtype=np.float64)
        order = np.argsort(arr[:, 0], kind="stable")
        arr = arr[order]
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], epoch, var, units)


@dataclass(frozen=True)
class DomainBox:
    """A closed lat/lon (and optionally time) selection box."""

    lat: tuple[float, float]
    lon: tuple[float, float]
    time: tuple[str, str] | None = None

    def __post_init__(self):
        for name in ("lat", "lon"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValidationError(f"box {name}: min must be < max")
        if self.time is not None:
            t0, t1 = self.time
            e = timeutil.parse_epoch("1970-01-01T00:00:00Z")
            if not timeutil.date_to_days(t0, e) < timeutil.date_to_days(t1, e):
                raise ValidationError("box time: start must be < end")


def _wrap_lon(values: np.ndarray) -> np.ndarray:
    return (values + 180.0) % 360.0 - 180.0


def validate_latlon(obj):
    """Canonicalize lat/lon: wrap lon to [-180, 180), sort axes ascending.

    Grid data is permuted consistently with any axis reordering.
    Idempotent: applying twice equals applying once.
    """
    if isinstance(obj, GriddedField):
        if not (obj.lat.units.startswith("deg") and obj.lon.units.startswith("deg")):
            raise ValidationError("validate_latlon: axes must be in degrees")
        lat_vals = obj.lat.values
        lon_vals = _wrap_lon(obj.lon.values)
        data = obj.data
        if lat_vals.size > 1 and lat_vals[1] < lat_vals[0]:
            lat_vals = lat_vals[::-1]
            data = data[:, ::-1, :]
        lon_order = np.argsort(lon_vals, kind="stable")
        lon_sorted = lon_vals[lon_order]
        if lon_sorted.size > 1 and np.any(np.diff(lon_sorted) == 0):
            raise ValidationError("duplicate lon values after wrapping")
        if not np.array_equal(lon_order, np.arange(lon_order.size)):
            data = data[:, :, lon_order]
        lat_ax = CoordAxis("lat", lat_vals, obj.lat.units)
        lon_ax = CoordAxis("lon", lon_sorted, obj.lon.units)
        return replace(obj, lat=lat_ax, lon=lon_ax, data=_readonly(data))
    if isinstance(obj, AlongTrackSet):
        return replace(obj, lon=_readonly(_wrap_lon(obj.lon)))
    raise TypeError(f"validate_latlon: unsupported type {type(obj).__name__}")


def validate_time(obj, epoch: str):
    """Re-anchor the time axis as float days since ``epoch``.

    Grid time must come out strictly increasing; track times may tie.
    """
    new_dt = timeutil.parse_epoch(epoch)
    if isinstance(obj, GriddedField):
        offset = timeutil.epoch_offset_days(obj.epoch_dt(), new_dt)
        vals = obj.time.values + offset
        if vals.size > 1 and np.any(np.diff(vals) <= 0):
            raise ValidationError("non-monotonic grid time axis")
        return replace(obj, time=CoordAxis("time", vals, obj.time.units), epoch=epoch)
    if isinstance(obj, AlongTrackSet):
        offset = timeutil.epoch_offset_days(obj.epoch_dt(), new_dt)
        vals = obj.time + offset
        if vals.size > 1 and np.any(np.diff(vals) < 0):
            raise ValidationError("non-monotonic track time values")
        return replace(obj, time=_readonly(vals), epoch=epoch)
    raise TypeError(f"validate_time: unsupported type {type(obj).__name__}")


def _axis_range_mask(values: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (values >= lo) & (values <= hi)


def sel_domain(obj, box: DomainBox):
    """Select exactly the samples with coordinates inside the closed box."""
    if isinstance(obj, GriddedField):
        lat_m = _axis_range_mask(obj.lat.values, *box.lat)
        lon_m = _axis_range_mask(obj.lon.values, *box.lon)
        if box.time is not None:
            e = obj.epoch_dt()
            t0 = timeutil.date_to_days(box.time[0], e)
            t1 = timeutil.date_to_days(box.time[1], e)
            time_m = _axis_range_mask(obj.time.values, t0, t1)
        else:
            time_m = np.ones(len(obj.time), dtype=bool)
        if not (lat_m.any() and lon_m.any() and time_m.any()):
            raise EmptyDomainError("selection box matches no grid samples")
        data = obj.data[np.ix_(time_m, lat_m, lon_m)]
        return replace(
            obj,
            time=CoordAxis("time", obj.time.values[time_m], obj.time.units),
            lat=CoordAxis("lat", obj.lat.values[lat_m], obj.lat.units),
            lon=CoordAxis("lon", obj.lon.values[lon_m], obj.lon.units),
            data=_readonly(data),
        )
    if isinstance(obj, AlongTrackSet):
        mask = _axis_range_mask(obj.lat, *box.lat) & _axis_range_mask(obj.lon, *box.lon)
        if box.time is not None:
            e = obj.epoch_dt()
            t0 = timeutil.date_to_days(box.time[0], e)
            t1 = timeutil.date_to_days(box.time[1], e)
            mask &= _axis_range_mask(obj.time, t0, t1)
        if not mask.any():
            raise EmptyDomainError("selection box matches no track records")
        return replace(obj, time=_readonly(obj.time[mask]), lat=_readonly(obj.lat[mask]),
                       lon=_readonly(obj.lon[mask]), value=_readonly(obj.value[mask]))
    raise TypeError(f"sel_domain: unsupported type {type(obj).__name__}")


def subset_track(track: AlongTrackSet, num_samples: int, seed: int) -> AlongTrackSet:
    """Deterministic random subset of a track, re-sorted by time.

    Sampling is a Fisher-Yates shuffle over record indices driven by the
    SplitMix64 stream, taking the first ``num_samples`` entries.
    """
    from .simulate import Prng  # local import: grid has no other simulate dependency

    n = len(track)
    if num_samples >= n:
        return track
    if num_samples < 0:
        raise ValidationError("num_samples must be >= 0")
    prng = Prng(seed)
    idx = np.arange(n)
    for i in range(n - 1, 0, -1):
        j = prng.randbelow(i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    chosen = np.sort(idx[:num_samples])
    order = np.argsort(track.time[chosen], kind="stable")
    chosen = chosen[order]
    return replace(track, time=_readonly(track.time[chosen]),
                   lat=_readonly(track.lat[chosen]),
                   lon=_readonly(track.lon[chosen]),
                   value=_readonly(track.value[chosen]))


def mean_latitude_deg(fld: GriddedField) -> float:
    """Domain-mean latitude in degrees, surviving meter conversion via attrs."""
    if fld.lat.units.startswith("deg"):
        return float(fld.lat.values.mean())
    if "mean_lat_deg" in fld.attrs:
        return float(fld.attrs["mean_lat_deg"])
    raise ValidationError("field has meter axes but no mean_lat_deg attribute")


def latlon_deg2m(fld: GriddedField) -> GriddedField:
    """Convert degree axes to local tangent-plane meters.

    y = (lat - lat_min) * pi/180 * R and x = (lon - lon_min) * pi/180 * R *
    cos(mean lat).  Data values are untouched; only axes and units change.
    """
    if not (fld.lat.units.startswith("deg") and fld.lon.units.startswith("deg")):
        raise ValidationError("latlon_deg2m: axes already in meters")
    lat = fld.lat.values
    lon = fld.lon.values
    mean_lat = float(lat.mean())
    y = (lat - lat.min()) * DEG2RAD * EARTH_RADIUS_M
    x = (lon - lon.min()) * DEG2RAD * EARTH_RADIUS_M * math.cos(mean_lat * DEG2RAD)
    attrs = dict(fld.attrs)
    attrs["mean_lat_deg"] = repr(mean_lat)
    return replace(fld, lat=CoordAxis("lat", y, "m"), lon=CoordAxis("lon", x, "m"),
                   attrs=attrs)


def time_rescale(obj, freq: float, unit: str):
    """Divide the time axis by ``freq`` expressed in ``unit``."""
    if unit not in _TIME_UNIT_DAYS:
        raise ValidationError(f"time_rescale: unknown unit {unit!r}")
    if freq <= 0:
        raise ValidationError("time_rescale: freq must be positive")
    factor = freq * _TIME_UNIT_DAYS[unit]
    if isinstance(obj, GriddedField):
        vals = obj.time.values / factor
        return replace(obj, time=CoordAxis("time", vals, unit))
    if isinstance(obj, AlongTrackSet):
        return replace(obj, time=_readonly(obj.time / factor))
    raise TypeError(f"time_rescale: unsupported type {type(obj).__name__}")


def uniform_spacing(values: np.ndarray, what: str) -> float:
    """Mean spacing of an axis, verifying near-uniformity."""
    if values.size < 2:
        raise ValidationError(f"{what}: need at least 2 samples for a spacing")
    d = np.diff(values)
    step = float(d.mean())
    if np.any(np.abs(d - step) > 1e-6 * abs(step)):
        raise ValidationError(f"{what}: axis spacing is not uniform")
    return step


def grid_like(template: GriddedField, data: np.ndarray, var: str,
              units: str) -> GriddedField:
    """New field sharing a template's axes/epoch with fresh payload."""
    return GriddedField(var=var, units=units, time=template.time, lat=template.lat,
                        lon=template.lon, data=data, epoch=template.epoch,
                        attrs=dict(template.attrs))
