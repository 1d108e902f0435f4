"""Waveguide-invariant passive acoustic ranging from single-receiver spectrograms."""

from .core import (
    BandPartition,
    ComplexSurface,
    EstimateResult,
    ParameterHypothesis,
    SearchGrid,
    StriationMatrix,
    WIRangeError,
    partition_bands,
)
from .estimate import estimate_range, estimate_wi, run_track, track_rmse
from .ingest import StftParams, load_groundtruth, load_surface, save_surface, stft
from .likelihood import joint_loglik, rayleigh_logpdf, rayleigh_mle
from .simulate import SceneConfig, reference_scene, synth_surface
from .tonal import estimate_range_tonal, estimate_wi_tonal, mnr, noise_sigma, rice_lambda_estimate, rice_logpdf
from .transform import build_striation_matrix, range_axis, valid_striation_count, wi_project
from .whiten import half_iqr, whiten

__version__ = "0.1.0"
