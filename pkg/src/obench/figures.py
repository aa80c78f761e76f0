"""Diagnostic figures rendered to files alongside the delimited reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import EvalDiagnostics
from .spectral import RESOLVED_THRESHOLD, PsdScoreCurve, SpectrumResult

DPI = 150


def _save(fig, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)


def save_nrmse_series(scores: np.ndarray, path: str | Path, label: str = "study"):
    fig, ax = plt.subplots(figsize=(5.0, 3.0))
    ax.plot(np.arange(scores.size), scores, lw=1.2, label=label)
    ax.set_xlabel("evaluation time step")
    ax.set_ylabel("nRMSE score")
    ax.set_ylim(min(0.0, scores.min()), 1.02)
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    _save(fig, Path(path))


def _wavelength_km(k: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return 1.0 / k / 1000.0


def save_spectrum(spec: SpectrumResult, path: str | Path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    if spec.axis2 is None:
        keep = spec.axis1 > 0
        ax.loglog(spec.axis1[keep], spec.psd[keep], lw=1.2)
        ax.set_xlabel(f"{spec.axis1_name} [{spec.axis1_units}]")
        ax.set_ylabel("PSD")
    else:
        k1 = spec.axis1[1:] if spec.axis1[0] == 0 else spec.axis1
        k2 = spec.axis2[1:] if spec.axis2[0] == 0 else spec.axis2
        p = spec.psd[-k1.size:, -k2.size:]
        mesh = ax.pcolormesh(k1, k2, np.log10(np.maximum(p.T, 1e-300)),
                             shading="auto", cmap="viridis")
        fig.colorbar(mesh, ax=ax, label="log10 PSD")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(f"{spec.axis1_name} [{spec.axis1_units}]")
        ax.set_ylabel(f"{spec.axis2_name} [{spec.axis2_units}]")
    ax.grid(alpha=0.3, which="both")
    _save(fig, Path(path))


def save_score_curve(curve: PsdScoreCurve, path: str | Path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    keep = (curve.axis1 > 0) & np.isfinite(curve.score)
    lam = _wavelength_km(curve.axis1[keep])
    ax.semilogx(lam, curve.score[keep], lw=1.2)
    ax.axhline(RESOLVED_THRESHOLD, color="k", ls="--", lw=0.8,
               label=f"threshold {RESOLVED_THRESHOLD}")
    ax.invert_xaxis()
    ax.set_xlabel("wavelength [km]")
    ax.set_ylabel("PSD score")
    ax.set_ylim(-0.1, 1.05)
    ax.grid(alpha=0.3, which="both")
    ax.legend(frameon=False)
    _save(fig, Path(path))


def save_score_plane(curve: PsdScoreCurve, path: str | Path):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    k1 = curve.axis1[1:] if curve.axis1[0] == 0 else curve.axis1
    k2 = curve.axis2[1:] if curve.axis2[0] == 0 else curve.axis2
    s = curve.score[-k1.size:, -k2.size:]
    mesh = ax.pcolormesh(k1, k2, s.T, shading="auto", vmin=0.0, vmax=1.0,
                         cmap="RdYlGn")
    fig.colorbar(mesh, ax=ax, label="PSD score")
    with np.errstate(invalid="ignore"):
        ax.contour(k1, k2, s.T, levels=[RESOLVED_THRESHOLD], colors="k",
                   linewidths=0.8)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(f"{curve.axis1_name} [{curve.axis1_units}]")
    ax.set_ylabel(f"{curve.axis2_name} [{curve.axis2_units}]")
    _save(fig, Path(path))


def render_diagnostics(diag: EvalDiagnostics, stem: Path) -> list[Path]:
    """Write every available diagnostic next to the report; returns the paths."""
    written = []
    if diag.nrmse_scores is not None:
        p = stem.with_name(stem.name + "_nrmse.png")
        save_nrmse_series(diag.nrmse_scores, p)
        written.append(p)
    if diag.psd_truth is not None:
        p = stem.with_name(stem.name + "_psd_isotropic.png")
        save_spectrum(diag.psd_truth, p)
        written.append(p)
    if diag.score_isotropic is not None:
        p = stem.with_name(stem.name + "_score_isotropic.png")
        save_score_curve(diag.score_isotropic, p)
        written.append(p)
    if diag.score_spacetime is not None:
        p = stem.with_name(stem.name + "_score_spacetime.png")
        save_score_plane(diag.score_spacetime, p)
        written.append(p)
    if diag.psd_track is not None:
        p = stem.with_name(stem.name + "_psd_alongtrack.png")
        save_spectrum(diag.psd_track, p)
        written.append(p)
    if diag.score_track is not None:
        p = stem.with_name(stem.name + "_score_alongtrack.png")
        save_score_curve(diag.score_track, p)
        written.append(p)
    return written
