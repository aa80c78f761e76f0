"""Leaderboard rows and their Markdown / CSV / JSON renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ValidationError
from .spectral import RESOLVED_THRESHOLD, format_mean_std

COLUMNS = ("Experiment", "Algorithm", "nRMSE Score",
           "λ_a [km]", "λ_r [km]", "λ_x [km]", "λ_t [days]")

_SCALE_FIELDS = ("lambda_a_km", "lambda_r_km", "lambda_x_km", "lambda_t_days")


@dataclass(frozen=True)
class EvalReport:
    """One leaderboard row: nRMSE score plus resolved scales.

    Resolved scales are optional (OSE runs lack the gridded ones; OSSE
    runs lack the along-track one) and render as "-" when absent.  The
    0.5 score threshold behind every resolved scale is recorded on the
    row itself.
    """

    experiment: str
    algorithm: str
    nrmse_mean: float
    nrmse_std: float | None = None
    lambda_a_km: float | None = None
    lambda_r_km: float | None = None
    lambda_x_km: float | None = None
    lambda_t_days: float | None = None
    threshold: float = RESOLVED_THRESHOLD
    flags: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.nrmse_mean > 1.0 + 1e-12:
            raise ValidationError("nrmse score cannot exceed 1")
        for name in _SCALE_FIELDS:
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValidationError(f"{name} must be positive when present")
        object.__setattr__(self, "flags", dict(self.flags))

    def to_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "algorithm": self.algorithm,
            "nrmse_mean": self.nrmse_mean,
            "nrmse_std": self.nrmse_std,
            "lambda_a_km": self.lambda_a_km,
            "lambda_r_km": self.lambda_r_km,
            "lambda_x_km": self.lambda_x_km,
            "lambda_t_days": self.lambda_t_days,
            "threshold": self.threshold,
            "flags": dict(self.flags),
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "EvalReport":
        return cls(
            experiment=raw["experiment"],
            algorithm=raw["algorithm"],
            nrmse_mean=raw["nrmse_mean"],
            nrmse_std=raw.get("nrmse_std"),
            lambda_a_km=raw.get("lambda_a_km"),
            lambda_r_km=raw.get("lambda_r_km"),
            lambda_x_km=raw.get("lambda_x_km"),
            lambda_t_days=raw.get("lambda_t_days"),
            threshold=raw.get("threshold", RESOLVED_THRESHOLD),
            flags=raw.get("flags", {}),
        )


def _format_scale(value: float | None) -> str:
    if value is None:
        return "-"
    text = f"{value:.1f}".rstrip("0").rstrip(".")
    return text if text else "0"


def _row_cells(r: EvalReport) -> list[str]:
    return [
        r.experiment,
        r.algorithm,
        format_mean_std(r.nrmse_mean, r.nrmse_std),
        _format_scale(r.lambda_a_km),
        _format_scale(r.lambda_r_km),
        _format_scale(r.lambda_x_km),
        _format_scale(r.lambda_t_days),
    ]


def render_markdown(reports: Iterable[EvalReport]) -> str:
    lines = ["| " + " | ".join(COLUMNS) + " |",
             "|" + "|".join("---" for _ in COLUMNS) + "|"]
    reports = list(reports)
    for r in reports:
        lines.append("| " + " | ".join(_row_cells(r)) + " |")
    lines.append("")
    lines.append(f"Resolved scales use the {RESOLVED_THRESHOLD} PSD-score threshold.")
    return "\n".join(lines) + "\n"


def _csv_quote(cell: str) -> str:
    if any(c in cell for c in ",\"\r\n"):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def render_csv(reports: Iterable[EvalReport]) -> str:
    rows = [COLUMNS] + [_row_cells(r) for r in reports]
    return "\r\n".join(",".join(_csv_quote(c) for c in row) for row in rows) + "\r\n"


def render_json(reports: Iterable[EvalReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"


def render_report(reports: Iterable[EvalReport], fmt: str = "markdown") -> str:
    fmt = {"md": "markdown"}.get(fmt, fmt)
    if fmt == "markdown":
        return render_markdown(reports)
    if fmt == "csv":
        return render_csv(reports)
    if fmt == "json":
        return render_json(reports)
    raise ValidationError(f"unknown report format {fmt!r}")


def parse_reports(text: str) -> list[EvalReport]:
    raw = json.loads(text)
    if isinstance(raw, Mapping):
        raw = [raw]
    return [EvalReport.from_dict(entry) for entry in raw]
