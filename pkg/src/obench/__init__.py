"""obench: benchmarking toolkit for gridded sea-surface-height fields."""

from .errors import (ConfigError, EmptyDomainError, KindMismatchError, ObenchError,
                     ObgParseError, StepExecutionError, UnresolvedScaleError,
                     ValidationError)
from .grid import (AlongTrackSet, CoordAxis, DomainBox, GriddedField, latlon_deg2m,
                   sel_domain, subset_track, time_rescale, validate_latlon,
                   validate_time)
from .obg import read_grid, read_track, write_grid, write_track
from .patcher import (PatchSequence, PatchSpec, PatchView, get_patch, iter_patches,
                      patch_count, reconstruct)
from .physics import (PhysConstants, derive, enstrophy, geostrophic_uv,
                      kinetic_energy, okubo_weiss, relative_vorticity, sla, strain)
from .regrid import fill_nans_gauss_seidel, regrid_to_grid, regrid_to_track
from .report import EvalReport, parse_reports, render_report
from .simulate import (NoiseSpec, Prng, SwathSpec, TrackPattern, generate_constellation,
                       generate_tracks, osse_split, preset_patterns, sample_field)
from .spectral import (PsdScoreCurve, ResolvedScale, SpectrumResult, nrmse,
                       nrmse_score_series, psd_alongtrack, psd_isotropic, psd_latlon,
                       psd_score, psd_spacetime, resolved_scale,
                       resolved_scales_lon_time, rmse)
from .evaluate import EvalDiagnostics, evaluate_ose, evaluate_osse
from .pipeline import PipelineConfig, parse_config, run_pipeline

__version__ = "0.1.0"
