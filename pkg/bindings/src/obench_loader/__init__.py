"""Dataloader-friendly bindings over obench grids and the patcher.

The surface is deliberately small: ``open_dataset`` gives a read-only
handle on an OBG grid, and ``Patcher`` is a length-known, indexable
sequence of patch arrays with a ``reconstruct`` going back to a full
field.  Items are fresh writable copies, so training code may mutate them
freely.  Wrap a ``Patcher`` in your framework's dataset class yourself;
nothing here depends on any tensor library.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from obench.grid import GriddedField
from obench.obg import read_grid
from obench.patcher import PatchSpec, get_patch, patch_count, reconstruct

__all__ = ["open_dataset", "DatasetHandle", "PatchSpec", "Patcher"]

__version__ = "0.1.0"


class DatasetHandle:
    """Read-only view of a gridded dataset."""

    def __init__(self, field: GriddedField):
        self.field = field

    @classmethod
    def open(cls, path: str | Path) -> "DatasetHandle":
        return cls(read_grid(path))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.field.shape

    @property
    def values(self) -> np.ndarray:
        return self.field.data

    @property
    def time(self) -> np.ndarray:
        return self.field.time.values

    @property
    def lat(self) -> np.ndarray:
        return self.field.lat.values

    @property
    def lon(self) -> np.ndarray:
        return self.field.lon.values


def open_dataset(path: str | Path) -> DatasetHandle:
    """Open an OBG grid as a dataset handle."""
    return DatasetHandle.open(path)


class Patcher(Sequence):
    """Length-known window sequence over a grid, with reconstruction.

    ``patcher[i]`` is the i-th window's data as a writable float64 copy in
    (time, lat, lon) order.  ``reconstruct(items)`` accepts the items back
    in index order (or explicit (index, data) pairs) and delegates to the
    library's weighted overlap-average.
    """

    def __init__(self, source: DatasetHandle | GriddedField,
                 patches: Mapping[str, int],
                 strides: Mapping[str, int] | None = None,
                 check_full_scan: bool = False):
        self.field = source.field if isinstance(source, DatasetHandle) else source
        self.spec = PatchSpec(patches=patches, strides=strides or {},
                              check_full_scan=check_full_scan)
        self._len = patch_count(self.spec, self.field)

    def __len__(self) -> int:
        return self._len

    def __getitem__(self, idx: int) -> np.ndarray:
        if idx < 0:
            idx += self._len
        return np.array(get_patch(self.spec, self.field, idx).data)

    def __iter__(self) -> Iterator[np.ndarray]:
        for i in range(self._len):
            yield self[i]

    def reconstruct(self, items: Iterable, weight: str = "uniform") -> GriddedField:
        pieces = []
        for k, item in enumerate(items):
            if isinstance(item, tuple):
                pieces.append((int(item[0]), np.asarray(item[1])))
            else:
                pieces.append((k, np.asarray(item)))
        return reconstruct(self.spec, self.field, pieces, weight=weight)
