"""Bit-exact file I/O: the OBG v1 grid container and the track CSV format.

OBG v1 layout: ASCII magic ``OBGRID01``, an 8-byte little-endian unsigned
header length, a UTF-8 JSON header, then the payload as little-endian
float64 in C row-major order.  Write-then-read is the identity on every
payload byte and on the header JSON after canonical key ordering.

Track CSV: exact header ``time,lat,lon,ssh``, ISO-8601 UTC times with a
trailing Z, '.' decimal separator, LF line endings.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from . import timeutil
from .errors import ObgParseError, ValidationError
from .grid import AlongTrackSet, CoordAxis, GriddedField

MAGIC = b"OBGRID01"
TRACK_HEADER = "time,lat,lon,ssh"

_DEFAULT_AXIS_UNITS = {"time": "days", "lat": "degrees", "lon": "degrees"}


def _header_dict(fld: GriddedField) -> dict:
    attrs = dict(fld.attrs)
    for ax in fld.axes:
        if ax.units != _DEFAULT_AXIS_UNITS[ax.name]:
            attrs[f"units_{ax.name}"] = ax.units
    return {
        "var": fld.var,
        "units": fld.units,
        "dims": ["time", "lat", "lon"],
        "shape": list(fld.shape),
        "epoch": fld.epoch,
        "time": fld.time.values.tolist(),
        "lat": fld.lat.values.tolist(),
        "lon": fld.lon.values.tolist(),
        "attrs": attrs,
    }


def grid_to_bytes(fld: GriddedField) -> bytes:
    header = json.dumps(_header_dict(fld), sort_keys=True,
                        separators=(",", ":"), ensure_ascii=False).encode("utf-8")
    payload = np.ascontiguousarray(fld.data, dtype="<f8").tobytes()
    return MAGIC + struct.pack("<Q", len(header)) + header + payload


def write_grid(fld: GriddedField, path: str | Path) -> None:
    Path(path).write_bytes(grid_to_bytes(fld))


def grid_from_bytes(buf: bytes) -> GriddedField:
    if len(buf) < len(MAGIC) + 8 or buf[: len(MAGIC)] != MAGIC:
        raise ObgParseError("magic", "bad magic; not an OBG v1 file")
    (hlen,) = struct.unpack_from("<Q", buf, len(MAGIC))
    hstart = len(MAGIC) + 8
    if hstart + hlen > len(buf):
        raise ObgParseError("header", "declared header length exceeds file size")
    try:
        header = json.loads(buf[hstart : hstart + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ObgParseError("header", f"invalid JSON header: {exc}") from exc
    for key in ("var", "units", "dims", "shape", "epoch", "time", "lat", "lon", "attrs"):
        if key not in header:
            raise ObgParseError(key, "missing header field")
    if header["dims"] != ["time", "lat", "lon"]:
        raise ObgParseError("dims", f"expected ['time','lat','lon'], got {header['dims']}")
    shape = header["shape"]
    if (not isinstance(shape, list) or len(shape) != 3
            or not all(isinstance(s, int) and s >= 0 for s in shape)):
        raise ObgParseError("shape", f"invalid shape {shape!r}")
    axes = {}
    for name in ("time", "lat", "lon"):
        vals = np.asarray(header[name], dtype=np.float64)
        units = header["attrs"].get(f"units_{name}", _DEFAULT_AXIS_UNITS[name])
        try:
            axes[name] = CoordAxis(name, vals, units)
        except ValidationError as exc:
            raise ObgParseError(name, str(exc)) from exc
    count = shape[0] * shape[1] * shape[2]
    payload = buf[hstart + hlen :]
    if len(payload) != count * 8:
        raise ObgParseError(
            "payload length",
            f"expected {count} float64 values ({count * 8} bytes), got {len(payload)} bytes",
        )
    data = np.frombuffer(payload, dtype="<f8").reshape(shape)
    attrs = {k: v for k, v in header["attrs"].items() if not k.startswith("units_")}
    try:
        return GriddedField(var=header["var"], units=header["units"], time=axes["time"],
                            lat=axes["lat"], lon=axes["lon"], data=data,
                            epoch=header["epoch"], attrs=attrs)
    except ValidationError as exc:
        raise ObgParseError("field", str(exc)) from exc


def read_grid(path: str | Path) -> GriddedField:
    return grid_from_bytes(Path(path).read_bytes())


def _format_value(x: float) -> str:
    return repr(float(x))


def track_to_bytes(track: AlongTrackSet) -> bytes:
    epoch = track.epoch_dt()
    out = io.StringIO()
    out.write(TRACK_HEADER + "\n")
    for i in range(len(track)):
        stamp = timeutil.days_to_iso(float(track.time[i]), epoch)
        out.write(f"{stamp},{_format_value(track.lat[i])},"
                  f"{_format_value(track.lon[i])},{_format_value(track.value[i])}\n")
    return out.getvalue().encode("utf-8")


def write_track(track: AlongTrackSet, path: str | Path) -> None:
    Path(path).write_bytes(track_to_bytes(track))


def track_from_bytes(buf: bytes, epoch: str | None = None, var: str = "ssh",
                     units: str = "m") -> AlongTrackSet:
    """Parse a track CSV; rows are re-sorted by time.

    If ``epoch`` is omitted it defaults to midnight UTC of the first row's
    date, so epoch-aligned files round-trip exactly.
    """
    text = buf.decode("utf-8")
    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != TRACK_HEADER:
        raise ObgParseError("header", f"first line must be {TRACK_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ObgParseError("row", f"line {lineno}: expected 4 columns")
        rows.append((lineno, parts))
    if epoch is None:
        epoch = "1970-01-01T00:00:00Z"
        if rows:
            derived = rows[0][1][0][:10] + "T00:00:00Z"
            try:
                timeutil.parse_epoch(derived)
                epoch = derived
            except ValidationError:
                pass  # per-row parsing below reports the offending line
    epoch_dt = timeutil.parse_epoch(epoch)
    times, lats, lons, vals = [], [], [], []
    for lineno, parts in rows:
        try:
            times.append(timeutil.iso_to_days(parts[0], epoch_dt))
        except ValidationError as exc:
            raise ObgParseError("time", f"line {lineno}: {exc}") from exc
        try:
            lat, lon, ssh = (float(p) for p in parts[1:])
        except ValueError as exc:
            raise ObgParseError("value", f"line {lineno}: {exc}") from exc
        if not -90.0 <= lat <= 90.0:
            raise ObgParseError("lat", f"line {lineno}: lat {lat} outside [-90, 90]")
        if not -180.0 <= lon < 360.0:
            raise ObgParseError("lon", f"line {lineno}: lon {lon} outside [-180, 360)")
        lats.append(lat)
        lons.append(lon)
        vals.append(ssh)
    arr_t = np.asarray(times, dtype=np.float64)
    order = np.argsort(arr_t, kind="stable")
    return AlongTrackSet(
        time=arr_t[order],
        lat=np.asarray(lats, dtype=np.float64)[order],
        lon=np.asarray(lons, dtype=np.float64)[order],
        value=np.asarray(vals, dtype=np.float64)[order],
        epoch=epoch, var=var, units=units,
    )


def read_track(path: str | Path, epoch: str | None = None) -> AlongTrackSet:
    return track_from_bytes(Path(path).read_bytes(), epoch=epoch)


def sniff_kind(path: str | Path) -> str:
    """Guess the value kind of a data file from its extension."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obg":
        return "grid"
    if suffix == ".csv":
        return "track"
    raise ValidationError(f"cannot infer data kind from extension {suffix!r}")
