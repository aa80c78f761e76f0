import json

import pytest

from obench.errors import ValidationError
from obench.report import (EvalReport, parse_reports, render_csv, render_json,
                           render_markdown, render_report)

REFERENCE_OSSE_NADIR = [
    EvalReport("OSSE NADIR", "OI", 0.92, lambda_r_km=123.0, lambda_x_km=174.0,
               lambda_t_days=10.8),
    EvalReport("OSSE NADIR", "MIOST", 0.93, lambda_r_km=100.0, lambda_x_km=157.0,
               lambda_t_days=10.1),
    EvalReport("OSSE NADIR", "BFNQG", 0.93, lambda_r_km=88.0, lambda_x_km=139.0,
               lambda_t_days=10.4),
    EvalReport("OSSE NADIR", "4DVarNet", 0.94, lambda_r_km=65.0, lambda_x_km=117.0,
               lambda_t_days=7.7),
]


def test_markdown_rows_render_reference_leaderboard():
    text = render_markdown(REFERENCE_OSSE_NADIR)
    lines = text.splitlines()
    assert lines[0] == ("| Experiment | Algorithm | nRMSE Score | λ_a [km] "
                        "| λ_r [km] | λ_x [km] | λ_t [days] |")
    assert lines[2] == "| OSSE NADIR | OI | 0.92 | - | 123 | 174 | 10.8 |"
    assert lines[3] == "| OSSE NADIR | MIOST | 0.93 | - | 100 | 157 | 10.1 |"
    assert lines[4] == "| OSSE NADIR | BFNQG | 0.93 | - | 88 | 139 | 10.4 |"
    assert lines[5] == "| OSSE NADIR | 4DVarNet | 0.94 | - | 65 | 117 | 7.7 |"


def test_markdown_with_std_rendering():
    row = EvalReport("OSSE NADIR", "4DVarNet", 0.95, nrmse_std=0.01,
                     lambda_x_km=117.0, lambda_t_days=7.7)
    text = render_markdown([row])
    assert "| OSSE NADIR | 4DVarNet | 0.95 ± 0.01 | - | - | 117 | 7.7 |" in text


def test_ose_row_has_dash_grid_scales():
    row = EvalReport("OSE NADIR", "4DVarNet", 0.91, lambda_a_km=98.0)
    text = render_markdown([row])
    assert "| OSE NADIR | 4DVarNet | 0.91 | 98 | - | - | - |" in text


def test_empty_report_list_is_header_only():
    text = render_markdown([])
    lines = text.splitlines()
    assert lines[0].startswith("| Experiment")
    assert lines[1].startswith("|---")
    assert "threshold" in lines[-1] or "0.5" in lines[-1]


def test_json_roundtrip_identity():
    text = render_json(REFERENCE_OSSE_NADIR)
    back = parse_reports(text)
    assert back == REFERENCE_OSSE_NADIR


def test_csv_rfc4180():
    text = render_csv([EvalReport("OSSE, NADIR", "OI", 0.92)])
    assert "\r\n" in text
    assert '"OSSE, NADIR"' in text


def test_render_report_dispatch():
    assert render_report([], "md").startswith("| Experiment")
    assert render_report([], "csv").startswith("Experiment,")
    assert json.loads(render_report([], "json")) == []
    with pytest.raises(ValidationError):
        render_report([], "xml")


def test_report_invariants():
    with pytest.raises(ValidationError):
        EvalReport("x", "y", 1.2)
    with pytest.raises(ValidationError):
        EvalReport("x", "y", 0.9, lambda_r_km=-3.0)


def test_threshold_recorded():
    row = EvalReport("OSSE", "study", 0.9)
    assert row.threshold == 0.5
    raw = json.loads(render_json([row]))
    assert raw[0]["threshold"] == 0.5
