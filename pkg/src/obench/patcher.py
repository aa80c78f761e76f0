"""Coordinate-aware sliding-window extraction and weighted reconstruction.

Windows are linearized row-major over the fixed (time, lat, lon) dimension
order.  Reconstruction averages overlapping patches with uniform or
triangular weights; cells covered by no patch come back NaN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .grid import CoordAxis, GriddedField, _readonly

DIM_ORDER = ("time", "lat", "lon")
WEIGHT_MODES = ("uniform", "triangular")


@dataclass(frozen=True)
class PatchSpec:
    """Per-dimension patch and stride sizes, in grid cells.

    Dimensions absent from ``patches`` default to the full dimension size
    with an equal stride (one window).  With ``check_full_scan`` set, every
    dimension must tile exactly: (size - patch) % stride == 0.
    """

    patches: Mapping[str, int]
    strides: Mapping[str, int] = field(default_factory=dict)
    check_full_scan: bool = False

    def __post_init__(self):
        object.__setattr__(self, "patches", dict(self.patches))
        object.__setattr__(self, "strides", dict(self.strides))
        for name, mapping in (("patches", self.patches), ("strides", self.strides)):
            for dim, n in mapping.items():
                if dim not in DIM_ORDER:
                    raise ValidationError(f"{name}: unknown dimension {dim!r}")
                if not isinstance(n, (int, np.integer)) or n <= 0:
                    raise ValidationError(f"{name}[{dim}]: must be a positive integer")
        for dim in self.strides:
            if dim not in self.patches:
                raise ValidationError(f"strides[{dim}] given without a patch size")

    def resolve(self, shape: Sequence[int]) -> tuple[tuple[int, int, int], ...]:
        """Per-dim (size, patch, stride) in (time, lat, lon) order."""
        out = []
        for dim, size in zip(DIM_ORDER, shape):
            patch = self.patches.get(dim, size)
            stride = self.strides.get(dim, patch if dim in self.patches else size)
            if patch > size:
                raise ValidationError(f"patch size {patch} exceeds {dim} size {size}")
            if self.check_full_scan and (size - patch) % stride != 0:
                raise ValidationError(
                    f"full scan violated on {dim}: ({size} - {patch}) % {stride} != 0"
                )
            out.append((size, patch, stride))
        return tuple(out)

    def to_json(self) -> str:
        dims = {
            dim: {"patch": self.patches[dim],
                  "stride": self.strides.get(dim, self.patches[dim])}
            for dim in DIM_ORDER if dim in self.patches
        }
        return json.dumps({"dims": dims, "check_full_scan": self.check_full_scan},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PatchSpec":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid patch spec JSON: {exc}") from exc
        if not isinstance(raw, dict) or "dims" not in raw:
            raise ValidationError("patch spec JSON must be an object with 'dims'")
        patches, strides = {}, {}
        for dim, entry in raw["dims"].items():
            patches[dim] = entry["patch"]
            if "stride" in entry:
                strides[dim] = entry["stride"]
        return cls(patches, strides, bool(raw.get("check_full_scan", False)))


@dataclass(frozen=True)
class PatchView:
    """One extracted window with its parent coordinates."""

    index: int
    offsets: tuple[int, int, int]
    data: np.ndarray
    coords: tuple[CoordAxis, CoordAxis, CoordAxis]

    def __post_init__(self):
        object.__setattr__(self, "data", _readonly(self.data))
        expected = tuple(len(ax) for ax in self.coords)
        if self.data.shape != expected:
            raise ValidationError(
                f"patch data shape {self.data.shape} does not match coords {expected}"
            )


def _counts(resolved) -> tuple[int, int, int]:
    return tuple((size - patch) // stride + 1 for size, patch, stride in resolved)


def patch_count(spec: PatchSpec, field_or_shape) -> int:
    """Number of windows: prod over dims of floor((S - P) / T) + 1."""
    shape = (field_or_shape.shape if isinstance(field_or_shape, GriddedField)
             else tuple(field_or_shape))
    counts = _counts(spec.resolve(shape))
    return int(np.prod(counts))


def get_patch(spec: PatchSpec, fld: GriddedField, idx: int) -> PatchView:
    """Extract window ``idx`` (row-major over per-dim window counts)."""
    resolved = spec.resolve(fld.shape)
    counts = _counts(resolved)
    total = int(np.prod(counts))
    if not 0 <= idx < total:
        raise ValidationError(f"patch index {idx} out of range [0, {total})")
    multi = np.unravel_index(idx, counts)
    offsets = tuple(int(m) * stride for m, (_, _, stride) in zip(multi, resolved))
    slices = tuple(slice(off, off + patch)
                   for off, (_, patch, _) in zip(offsets, resolved))
    coords = tuple(
        CoordAxis(ax.name, ax.values[sl], ax.units)
        for ax, sl in zip(fld.axes, slices)
    )
    return PatchView(index=idx, offsets=offsets, data=fld.data[slices], coords=coords)


class PatchSequence(Sequence):
    """Restartable, length-known view over all windows of a field."""

    def __init__(self, spec: PatchSpec, fld: GriddedField):
        self._spec = spec
        self._field = fld
        self._len = patch_count(spec, fld)

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, idx: int) -> PatchView:
        if idx < 0:
            idx += self._len
        return get_patch(self._spec, self._field, idx)

    def __iter__(self) -> Iterator[PatchView]:
        for i in range(self._len):
            yield self[i]


def iter_patches(spec: PatchSpec, fld: GriddedField) -> PatchSequence:
    return PatchSequence(spec, fld)


def _triangular_1d(p: int) -> np.ndarray:
    j = np.arange(p, dtype=np.float64)
    tri = np.minimum(j + 1, p - j)
    return tri / tri.max()


def _weights(resolved, mode: str) -> np.ndarray:
    shape = tuple(patch for _, patch, _ in resolved)
    if mode == "uniform":
        return np.ones(shape)
    w = np.ones(shape)
    for axis, (_, patch, _) in enumerate(resolved):
        tri = _triangular_1d(patch)
        w = w * tri.reshape([-1 if a == axis else 1 for a in range(3)])
    return w


def reconstruct(spec: PatchSpec, like: GriddedField,
                patches: Iterable[tuple[int, np.ndarray]],
                weight: str = "uniform") -> GriddedField:
    """Weighted overlap-average of patches onto the geometry of ``like``.

    Each cell is sum(w * v) / sum(w) over the patches covering it; cells
    covered by no patch are NaN.  Duplicate indices are an error.
    """
    if weight not in WEIGHT_MODES:
        raise ValidationError(f"unknown weight mode {weight!r}")
    resolved = spec.resolve(like.shape)
    counts = _counts(resolved)
    total = int(np.prod(counts))
    pshape = tuple(patch for _, patch, _ in resolved)
    w = _weights(resolved, weight)
    num = np.zeros(like.shape)
    den = np.zeros(like.shape)
    seen = set()
    for idx, data in patches:
        if not 0 <= idx < total:
            raise ValidationError(f"patch index {idx} out of range [0, {total})")
        if idx in seen:
            raise ValidationError(f"duplicate patch index {idx}")
        seen.add(idx)
        arr = np.asarray(data, dtype=np.float64)
        if arr.shape != pshape:
            raise ValidationError(
                f"patch {idx}: data shape {arr.shape} does not match {pshape}"
            )
        multi = np.unravel_index(idx, counts)
        slices = tuple(slice(int(m) * stride, int(m) * stride + patch)
                       for m, (_, patch, stride) in zip(multi, resolved))
        num[slices] += w * arr
        den[slices] += w
    covered = den > 0
    out = np.full(like.shape, np.nan)
    out[covered] = num[covered] / den[covered]
    return like.with_data(out)
