import numpy as np
import pytest

from obench.errors import ValidationError
from obench.timeutil import (date_to_days, days_to_iso, epoch_offset_days,
                             format_epoch, iso_to_days, parse_epoch)

EPOCH = parse_epoch("2012-10-01T00:00:00Z")


def test_whole_day_formats_cleanly():
    assert days_to_iso(21.0, EPOCH) == "2012-10-22T00:00:00Z"
    assert days_to_iso(0.0, EPOCH) == "2012-10-01T00:00:00Z"


def test_half_day_and_seconds():
    assert days_to_iso(0.5, EPOCH) == "2012-10-01T12:00:00Z"
    assert iso_to_days("2012-10-01T12:00:00Z", EPOCH) == 0.5


def test_fractional_seconds_trimmed():
    # 0.25 + 2^-10 days is dyadic, and times 86400 lands on x.375 seconds
    stamp = days_to_iso(0.25 + 2.0 ** -10, EPOCH)
    assert stamp == "2012-10-01T06:01:24.375Z"
    assert iso_to_days(stamp, EPOCH) == 0.25 + 2.0 ** -10


def test_random_roundtrip_exact(rng):
    days = np.concatenate([
        rng.uniform(0, 1, 200),
        rng.uniform(0, 5000, 200),
        np.array([0.0, 1e-6, 12345.6789]),
    ])
    for d in days:
        d = float(d)
        assert iso_to_days(days_to_iso(d, EPOCH), EPOCH) == d


def test_negative_offsets_roundtrip():
    for d in (-0.5, -3.25, -1e-3):
        assert iso_to_days(days_to_iso(d, EPOCH), EPOCH) == d


def test_epoch_parse_and_format():
    e = parse_epoch("2016-12-01T06:30:15Z")
    assert format_epoch(e) == "2016-12-01T06:30:15Z"
    with pytest.raises(ValidationError):
        parse_epoch("2016-12-01T06:30:15.5Z")  # fractional epochs rejected
    with pytest.raises(ValidationError):
        parse_epoch("2016-13-01T00:00:00Z")


def test_date_shorthand():
    assert date_to_days("2012-10-22", EPOCH) == 21.0


def test_epoch_offset_exact():
    a = parse_epoch("2012-10-02T00:00:00Z")
    assert epoch_offset_days(a, EPOCH) == 1.0
    b = parse_epoch("2012-10-01T06:00:00Z")
    assert epoch_offset_days(b, EPOCH) == 0.25
