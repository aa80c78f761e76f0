"""Exact conversions between float days-since-epoch and ISO-8601 UTC stamps.

Timestamps are rendered with at most 18 fractional-second digits, computed
through exact decimal arithmetic so that any realistic float64 day offset
survives a round trip through its ISO string unchanged.
"""

import re
from datetime import datetime, timedelta, timezone
from decimal import ROUND_FLOOR, ROUND_HALF_EVEN, Decimal, localcontext

from .errors import ValidationError

SECONDS_PER_DAY = 86400

_ISO_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[T ](\d{2}):(\d{2}):(\d{2})(?:\.(\d+))?(Z|\+00:00)$"
)

_FRAC_QUANTUM = Decimal("1e-18")


def parse_epoch(text: str) -> datetime:
    """Parse a whole-second ISO-8601 UTC epoch string."""
    m = _ISO_RE.match(text)
    if m is None:
        raise ValidationError(f"invalid UTC timestamp: {text!r}")
    if m.group(7):
        raise ValidationError(f"epoch must be whole-second: {text!r}")
    y, mo, d, h, mi, s = (int(m.group(i)) for i in range(1, 7))
    try:
        return datetime(y, mo, d, h, mi, s, tzinfo=timezone.utc)
    except ValueError as exc:
        raise ValidationError(f"invalid UTC timestamp: {text!r} ({exc})") from exc


def format_epoch(epoch: datetime) -> str:
    return epoch.strftime("%Y-%m-%dT%H:%M:%SZ")


def days_to_iso(days: float, epoch: datetime) -> str:
    """Render ``epoch + days`` as an ISO-8601 UTC stamp with trailing Z.

    Trailing zeros of the fractional second are stripped; whole seconds
    render without a fractional part at all.
    """
    with localcontext() as ctx:
        ctx.prec = 120
        seconds = Decimal(days) * SECONDS_PER_DAY
        int_secs = int(seconds.to_integral_value(rounding=ROUND_FLOOR))
        frac = (seconds - int_secs).quantize(_FRAC_QUANTUM, rounding=ROUND_HALF_EVEN)
    if frac == 1:
        int_secs += 1
        frac = Decimal(0)
    stamp = (epoch + timedelta(seconds=int_secs)).strftime("%Y-%m-%dT%H:%M:%S")
    if frac != 0:
        digits = f"{frac:.18f}"[2:].rstrip("0")
        stamp += "." + digits
    return stamp + "Z"


def iso_to_days(text: str, epoch: datetime) -> float:
    """Parse an ISO-8601 UTC stamp into float days since ``epoch``."""
    m = _ISO_RE.match(text)
    if m is None:
        raise ValidationError(f"invalid UTC timestamp: {text!r}")
    y, mo, d, h, mi, s = (int(m.group(i)) for i in range(1, 7))
    try:
        dt = datetime(y, mo, d, h, mi, s, tzinfo=timezone.utc)
    except ValueError as exc:
        raise ValidationError(f"invalid UTC timestamp: {text!r} ({exc})") from exc
    delta = dt - epoch
    int_secs = delta.days * SECONDS_PER_DAY + delta.seconds
    frac = Decimal("0." + m.group(7)) if m.group(7) else Decimal(0)
    with localcontext() as ctx:
        ctx.prec = 60
        return float((int_secs + frac) / SECONDS_PER_DAY)


def date_to_days(text: str, epoch: datetime) -> float:
    """Like :func:`iso_to_days` but also accepts bare ``YYYY-MM-DD`` dates."""
    if re.fullmatch(r"\d{4}-\d{2}-\d{2}", text):
        text = text + "T00:00:00Z"
    return iso_to_days(text, epoch)


def epoch_offset_days(old: datetime, new: datetime) -> float:
    """Exact day offset between two whole-second epochs."""
    delta = old - new
    with localcontext() as ctx:
        ctx.prec = 60
        secs = Decimal(delta.days) * SECONDS_PER_DAY + delta.seconds
        return float(secs / SECONDS_PER_DAY)
