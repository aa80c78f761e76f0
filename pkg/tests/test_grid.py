import math

import numpy as np
import pytest

from obench.errors import EmptyDomainError, ValidationError
from obench.grid import (DEG2RAD, EARTH_RADIUS_M, CoordAxis, DomainBox, GriddedField,
                         latlon_deg2m, sel_domain, subset_track, time_rescale,
                         validate_latlon, validate_time)
from obench.simulate import Prng

from conftest import EPOCH, make_field, make_track


def test_axis_rejects_non_monotonic():
    with pytest.raises(ValidationError):
        CoordAxis("lat", [1.0, 1.0, 2.0], "degrees")
    with pytest.raises(ValidationError):
        CoordAxis("time", [0.0, 2.0, 1.0], "days")


def test_axis_range_checks():
    with pytest.raises(ValidationError):
        CoordAxis("lat", [-91.0, 0.0], "degrees")
    with pytest.raises(ValidationError):
        CoordAxis("lon", [350.0, 361.0], "degrees")
    CoordAxis("lon", [300.0, 320.0], "degrees")  # wrap-range input is fine


def test_field_shape_and_inf_checks():
    good = make_field(np.zeros((2, 3, 4)))
    with pytest.raises(ValidationError):
        GriddedField(var="ssh", units="m", time=good.time, lat=good.lat,
                     lon=good.lon, data=np.zeros((2, 3, 5)), epoch=EPOCH)
    data = np.zeros((1, 2, 2))
    data[0, 0, 0] = np.inf
    with pytest.raises(ValidationError):
        make_field(data)


def test_field_data_is_immutable():
    fld = make_field(np.zeros((1, 2, 2)))
    with pytest.raises(ValueError):
        fld.data[0, 0, 0] = 1.0


def test_validate_latlon_wraps_lon():
    fld = make_field(np.arange(6.0).reshape(1, 2, 3), lon_start=0.0)
    fld = GriddedField(var="ssh", units="m", time=fld.time, lat=fld.lat,
                       lon=CoordAxis("lon", [300.0, 310.0, 320.0], "degrees"),
                       data=fld.data, epoch=EPOCH)
    out = validate_latlon(fld)
    assert np.allclose(out.lon.values, [-60.0, -50.0, -40.0])
    assert np.array_equal(out.data, fld.data)


def test_validate_latlon_reorders_wrapped_lon():
    fld = GriddedField(
        var="ssh", units="m",
        time=CoordAxis("time", [0.0], "days"),
        lat=CoordAxis("lat", [10.0, 11.0], "degrees"),
        lon=CoordAxis("lon", [170.0, 180.0, 190.0], "degrees"),
        data=np.arange(6.0).reshape(1, 2, 3), epoch=EPOCH)
    out = validate_latlon(fld)
    assert np.allclose(out.lon.values, [-180.0, -170.0, 170.0])
    # columns for 180 and 190 move to the front
    assert np.array_equal(out.data[0], fld.data[0][:, [1, 2, 0]])


def test_validate_latlon_flips_descending_lat():
    fld = GriddedField(
        var="ssh", units="m",
        time=CoordAxis("time", [0.0], "days"),
        lat=CoordAxis("lat", [43.0, 42.0, 41.0], "degrees"),
        lon=CoordAxis("lon", [-65.0, -64.0], "degrees"),
        data=np.arange(6.0).reshape(1, 3, 2), epoch=EPOCH)
    out = validate_latlon(fld)
    assert np.allclose(out.lat.values, [41.0, 42.0, 43.0])
    assert np.array_equal(out.data[0], fld.data[0][::-1])


def test_validate_latlon_idempotent():
    fld = make_field(np.random.default_rng(0).normal(size=(2, 3, 4)))
    once = validate_latlon(fld)
    twice = validate_latlon(once)
    assert np.array_equal(once.data, twice.data)
    assert np.array_equal(once.lon.values, twice.lon.values)


def test_validate_latlon_rejects_meter_axes():
    fld = latlon_deg2m(make_field(np.zeros((1, 3, 3))))
    with pytest.raises(ValidationError):
        validate_latlon(fld)


def test_validate_latlon_duplicate_after_wrap():
    fld = GriddedField(
        var="ssh", units="m",
        time=CoordAxis("time", [0.0], "days"),
        lat=CoordAxis("lat", [0.0, 1.0], "degrees"),
        lon=CoordAxis("lon", [-60.0, 300.0], "degrees"),
        data=np.zeros((1, 2, 2)), epoch=EPOCH)
    with pytest.raises(ValidationError):
        validate_latlon(fld)


def test_validate_time_reanchors():
    fld = make_field(np.zeros((2, 2, 2)), epoch="2012-10-02T00:00:00Z")
    out = validate_time(fld, "2012-10-01T00:00:00Z")
    assert np.allclose(out.time.values, [1.0, 2.0])
    assert out.epoch == "2012-10-01T00:00:00Z"


def test_validate_time_half_day_steps():
    fld = make_field(np.zeros((3, 2, 2)))
    fld = GriddedField(var="ssh", units="m",
                       time=CoordAxis("time", [0.0, 0.5, 1.0], "days"),
                       lat=fld.lat, lon=fld.lon, data=fld.data, epoch=EPOCH)
    out = validate_time(fld, EPOCH)
    assert np.allclose(out.time.values, [0.0, 0.5, 1.0])


def test_validate_time_duplicate_track_times_ok():
    track = make_track([0.0, 0.0, 1.0], [34.0] * 3, [-60.0] * 3, [1.0, 2.0, 3.0])
    out = validate_time(track, "2012-09-30T00:00:00Z")
    assert np.allclose(out.time, [1.0, 1.0, 2.0])


def test_sel_domain_gulfstream_box_on_global_grid():
    # Global 0.05-degree grid of cell centers: the Gulfstream box cuts 200x200.
    lat = -90.0 + 0.025 + 0.05 * np.arange(3600)
    lon = -180.0 + 0.025 + 0.05 * np.arange(7200)
    fld = GriddedField(var="ssh", units="m",
                       time=CoordAxis("time", [0.0], "days"),
                       lat=CoordAxis("lat", lat, "degrees"),
                       lon=CoordAxis("lon", lon, "degrees"),
                       data=np.zeros((1, 3600, 7200)), epoch=EPOCH)
    box = DomainBox(lat=(33.0, 43.0), lon=(-65.0, -55.0))
    out = sel_domain(fld, box)
    assert out.shape == (1, 200, 200)


def test_sel_domain_full_extent_identity():
    fld = make_field(np.random.default_rng(1).normal(size=(2, 4, 5)))
    box = DomainBox(lat=(float(fld.lat.values.min()), float(fld.lat.values.max())),
                    lon=(float(fld.lon.values.min()), float(fld.lon.values.max())))
    out = sel_domain(fld, box)
    assert np.array_equal(out.data, fld.data)


def test_sel_domain_empty_errors():
    fld = make_field(np.zeros((1, 3, 3)))
    with pytest.raises(EmptyDomainError):
        sel_domain(fld, DomainBox(lat=(80.0, 85.0), lon=(0.0, 5.0)))


def test_sel_domain_track_time_box():
    track = make_track([0.0, 1.0, 2.0], [34.0] * 3, [-60.0] * 3, [1.0, 2.0, 3.0])
    box = DomainBox(lat=(30.0, 40.0), lon=(-65.0, -55.0),
                    time=("2012-10-01", "2012-10-02"))
    out = sel_domain(track, box)
    assert np.allclose(out.value, [1.0, 2.0])


def test_subset_track_identity_when_enough():
    track = make_track([0.0, 1.0], [34.0, 34.0], [-60.0, -60.0], [1.0, 2.0])
    assert subset_track(track, 5, seed=0) is track


def test_subset_track_deterministic():
    n = 50
    track = make_track(np.arange(n, dtype=float), [34.0] * n, [-60.0] * n,
                       np.arange(n, dtype=float))
    a = subset_track(track, 10, seed=7)
    b = subset_track(track, 10, seed=7)
    assert np.array_equal(a.time, b.time)
    c = subset_track(track, 10, seed=8)
    assert not np.array_equal(a.time, c.time)


def test_subset_track_matches_prng_trace():
    # Independent step-by-step Fisher-Yates trace over 10 indices, seed 0.
    def mix(state):
        state = (state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return state, z ^ (z >> 31)

    state = 0
    idx = list(range(10))
    for i in range(9, 0, -1):
        limit = (1 << 64) - ((1 << 64) % (i + 1))
        while True:
            state, u = mix(state)
            if u < limit:
                break
        j = u % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    expected = sorted(idx[:4])

    track = make_track(np.arange(10, dtype=float), [34.0] * 10, [-60.0] * 10,
                       np.arange(10, dtype=float))
    out = subset_track(track, 4, seed=0)
    assert list(out.time.astype(int)) == expected


def test_prng_trace_matches_reference_stream():
    # First outputs of SplitMix64 seeded with 0, from the published algorithm.
    prng = Prng(0)
    def ref(state):
        state = (state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return state, z ^ (z >> 31)
    s = 0
    for _ in range(5):
        s, expected = ref(s)
        assert prng.next_u64() == expected


def test_latlon_deg2m_spacing():
    fld = make_field(np.zeros((1, 8, 8)), lat_start=37.825, step=0.05)
    out = latlon_deg2m(fld)
    dy = out.lat.values[1] - out.lat.values[0]
    expected_dy = 0.05 * DEG2RAD * EARTH_RADIUS_M
    assert abs(dy - expected_dy) < 1e-6
    assert abs(expected_dy - 5559.75) < 0.01
    mean_lat = fld.lat.values.mean()
    dx = out.lon.values[1] - out.lon.values[0]
    assert abs(dx - expected_dy * math.cos(mean_lat * DEG2RAD)) < 1e-6


def test_latlon_deg2m_origin_and_data():
    fld = make_field(np.random.default_rng(2).normal(size=(1, 4, 4)))
    out = latlon_deg2m(fld)
    assert out.lat.values[0] == 0.0
    assert out.lon.values[0] == 0.0
    assert np.array_equal(out.data, fld.data)
    assert out.lat.units == "m"


def test_latlon_deg2m_twice_errors():
    fld = make_field(np.zeros((1, 2, 2)))
    once = latlon_deg2m(fld)
    with pytest.raises(ValidationError):
        latlon_deg2m(once)


def test_time_rescale():
    fld = make_field(np.zeros((2, 2, 2)))
    hours = time_rescale(fld, 1, "hours")
    assert np.allclose(hours.time.values, [0.0, 24.0])
    ident = time_rescale(fld, 1, "days")
    assert np.allclose(ident.time.values, fld.time.values)
    track = make_track([0.5], [34.0], [-60.0], [1.0])
    secs = time_rescale(track, 1, "seconds")
    assert np.allclose(secs.time, [43200.0])
