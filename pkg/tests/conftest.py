import numpy as np
import pytest

from obench.grid import AlongTrackSet, CoordAxis, GriddedField

EPOCH = "2012-10-01T00:00:00Z"


def make_field(data, lat_start=33.0, lon_start=-65.0, step=0.05, epoch=EPOCH,
               var="ssh", units="m", attrs=None):
    """GriddedField on a degree grid with daily time steps."""
    data = np.asarray(data, dtype=np.float64)
    nt, ny, nx = data.shape
    return GriddedField(
        var=var, units=units,
        time=CoordAxis("time", np.arange(nt, dtype=np.float64), "days"),
        lat=CoordAxis("lat", lat_start + step * np.arange(ny), "degrees"),
        lon=CoordAxis("lon", lon_start + step * np.arange(nx), "degrees"),
        data=data, epoch=epoch, attrs=attrs or {},
    )


def make_meter_field(data, dx=5500.0, dy=5500.0, mean_lat=38.0, epoch=EPOCH,
                     var="ssh", units="m"):
    """GriddedField already on meter axes, tagged with its mean latitude."""
    data = np.asarray(data, dtype=np.float64)
    nt, ny, nx = data.shape
    return GriddedField(
        var=var, units=units,
        time=CoordAxis("time", np.arange(nt, dtype=np.float64), "days"),
        lat=CoordAxis("lat", dy * np.arange(ny), "m"),
        lon=CoordAxis("lon", dx * np.arange(nx), "m"),
        data=data, epoch=epoch, attrs={"mean_lat_deg": repr(mean_lat)},
    )


def make_track(times, lats, lons, values, epoch=EPOCH):
    return AlongTrackSet(time=np.asarray(times, float), lat=np.asarray(lats, float),
                         lon=np.asarray(lons, float), value=np.asarray(values, float),
                         epoch=epoch)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
