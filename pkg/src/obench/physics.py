"""Physical variables derived from sea surface height by finite differences.

Derivatives use second-order central stencils in the interior and
second-order four-point one-sided stencils at the boundaries whose
leading error term is matched to the interior's (h^2/6) f''': vorticity,
strain, and Okubo-Weiss chain two first derivatives, and an edge stencil
with a mismatched error coefficient leaves a non-smooth O(h^2) error
whose re-differentiation degrades the chain to first order at the
border.  With the matched stencil the whole chain stays second order in
the max norm.  NaNs propagate through every stencil that touches them;
nothing is silently filled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import GriddedField, latlon_deg2m, mean_latitude_deg

GRAVITY = 9.81                      # m s-2
EARTH_ROTATION = 7.292115e-5        # rad s-1
MIN_ABS_MEAN_LAT_DEG = 1.0

DERIVED_VARS = ("sla", "u", "v", "ke", "vort", "ens", "strain", "ow")

_UNITS = {
    "sla": "m",
    "u": "m s-1",
    "v": "m s-1",
    "ke": "m2 s-2",
    "vort": "s-1",
    "ens": "s-2",
    "strain": "s-1",
    "ow": "s-2",
}


@dataclass(frozen=True)
class PhysConstants:
    """Gravity and the mean-latitude Coriolis parameter."""

    g: float = GRAVITY
    omega: float = EARTH_ROTATION
    f0: float = 0.0

    @classmethod
    def from_field(cls, fld: GriddedField) -> "PhysConstants":
        lat = mean_latitude_deg(fld)
        if abs(lat) < MIN_ABS_MEAN_LAT_DEG:
            raise ValidationError(
                f"mean latitude {lat:.3f} deg too close to the equator; f0 ~ 0"
            )
        f0 = 2.0 * EARTH_ROTATION * math.sin(lat * math.pi / 180.0)
        return cls(f0=f0)


def _require_meters(fld: GriddedField):
    if fld.lat.units != "m" or fld.lon.units != "m":
        raise ValidationError("derivatives need meter axes; apply latlon_deg2m first")


def derivative(data: np.ndarray, coords: np.ndarray, axis: int) -> np.ndarray:
    """First derivative along one axis of a (time, lat, lon) array.

    Central differences in the interior.  At the ends, the one-sided
    stencil (-4 f0 + 7 f1 - 4 f2 + f3) / (2h) is used: second order, with
    the same (h^2/6) f''' leading error as the central stencil, so the
    derivative's error field stays smooth up to the border.  Axes shorter
    than four samples and non-uniform axes fall back to numpy's scheme.
    """
    n = data.shape[axis]
    if n < 2:
        raise ValidationError("derivative: axis needs at least 2 samples")
    d = np.diff(coords)
    h = float(d.mean())
    if not np.all(np.abs(d - h) <= 1e-9 * abs(h)):
        return np.gradient(data, coords, axis=axis, edge_order=2)
    if n < 4:
        return np.gradient(data, h, axis=axis, edge_order=2 if n > 2 else 1)
    f = np.moveaxis(data, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-4.0 * f[0] + 7.0 * f[1] - 4.0 * f[2] + f[3]) / (2.0 * h)
    out[-1] = (4.0 * f[-1] - 7.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def _ddx(fld: GriddedField) -> np.ndarray:
    return derivative(fld.data, fld.lon.values, axis=2)


def _ddy(fld: GriddedField) -> np.ndarray:
    return derivative(fld.data, fld.lat.values, axis=1)


def sla(fld: GriddedField) -> GriddedField:
    """Anomaly with respect to the spatial mean of each time step."""
    data = fld.data
    with np.errstate(all="ignore"):
        means = np.nanmean(data, axis=(1, 2), keepdims=True)
    return fld.with_data(data - means, var="sla", units=_UNITS["sla"])


def geostrophic_uv(fld: GriddedField,
                   const: PhysConstants | None = None) -> tuple[GriddedField, GriddedField]:
    """Zonal and meridional geostrophic velocities from SSH gradients."""
    _require_meters(fld)
    if const is None:
        const = PhysConstants.from_field(fld)
    u = -(const.g / const.f0) * _ddy(fld)
    v = (const.g / const.f0) * _ddx(fld)
    return (fld.with_data(u, var="u", units=_UNITS["u"]),
            fld.with_data(v, var="v", units=_UNITS["v"]))


def kinetic_energy(u: GriddedField, v: GriddedField) -> GriddedField:
    ke = 0.5 * (u.data ** 2 + v.data ** 2)
    return u.with_data(ke, var="ke", units=_UNITS["ke"])


def relative_vorticity(u: GriddedField, v: GriddedField) -> GriddedField:
    zeta = _ddx(v) - _ddy(u)
    return u.with_data(zeta, var="vort", units=_UNITS["vort"])


def enstrophy(zeta: GriddedField) -> GriddedField:
    return zeta.with_data(0.5 * zeta.data ** 2, var="ens", units=_UNITS["ens"])


def strain(u: GriddedField, v: GriddedField) -> GriddedField:
    """Total strain magnitude sqrt(normal^2 + shear^2)."""
    sn = _ddx(u) - _ddy(v)
    ss = _ddx(v) + _ddy(u)
    return u.with_data(np.sqrt(sn ** 2 + ss ** 2), var="strain", units=_UNITS["strain"])


def strain_components(u: GriddedField, v: GriddedField) -> tuple[np.ndarray, np.ndarray]:
    return _ddx(u) - _ddy(v), _ddx(v) + _ddy(u)


def okubo_weiss(u: GriddedField, v: GriddedField, zeta: GriddedField) -> GriddedField:
    sn, ss = strain_components(u, v)
    ow = sn ** 2 + ss ** 2 - zeta.data ** 2
    return u.with_data(ow, var="ow", units=_UNITS["ow"])


def derive(fld: GriddedField, var: str) -> GriddedField:
    """Dispatch to the derived variables, composing in dependency order.

    Accepts degree or meter axes; degree fields are converted internally
    for the derivative spacing and the result keeps the input geometry.
    """
    if var not in DERIVED_VARS:
        raise ValidationError(f"unknown derived variable {var!r}; "
                              f"expected one of {', '.join(DERIVED_VARS)}")
    if var == "sla":
        return sla(fld)
    work = fld
    if fld.lat.units.startswith("deg"):
        work = latlon_deg2m(fld)
    const = PhysConstants.from_field(work)
    u, v = geostrophic_uv(work, const)
    if var == "u":
        out = u
    elif var == "v":
        out = v
    elif var == "ke":
        out = kinetic_energy(u, v)
    elif var == "vort":
        out = relative_vorticity(u, v)
    elif var == "ens":
        out = enstrophy(relative_vorticity(u, v))
    elif var == "strain":
        out = strain(u, v)
    else:
        out = okubo_weiss(u, v, relative_vorticity(u, v))
    return fld.with_data(out.data, var=out.var, units=out.units)
