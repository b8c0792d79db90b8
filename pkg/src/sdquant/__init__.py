"""Sigma-Delta quantization of random frame expansions and quantized compressed sensing."""

from .cs_pipeline import CsRunResult, CsSweepConfig, cs_error_sweep, robust_decode, two_stage_decode
from .ensembles import FrameEnsembleSpec, SparseSignalSpec, draw_frame, draw_sparse_signal
from .frame_pipeline import (
    FrameRunResult,
    FrameSweepConfig,
    frame_error_sweep,
    run_frame_quantization,
    select_order,
)
from .linalg import (
    difference_matrix,
    inverse_difference_power,
    pseudo_inverse,
    smallest_singular_value,
    sobolev_dual,
    svd,
)
from .quantization import (
    Alphabet,
    FilterPair,
    SigmaDeltaTrace,
    coarse_sigma_delta,
    design_coarse_filter,
    greedy_sigma_delta,
    make_alphabet,
    scalar_quantize,
)

__all__ = [
    "Alphabet", "CsRunResult", "CsSweepConfig", "FilterPair", "FrameEnsembleSpec",
    "FrameRunResult", "FrameSweepConfig", "SigmaDeltaTrace", "SparseSignalSpec",
    "coarse_sigma_delta", "cs_error_sweep", "design_coarse_filter", "difference_matrix",
    "draw_frame", "draw_sparse_signal", "frame_error_sweep", "greedy_sigma_delta",
    "inverse_difference_power", "make_alphabet", "pseudo_inverse", "robust_decode",
    "run_frame_quantization", "scalar_quantize", "select_order", "smallest_singular_value",
    "sobolev_dual", "svd", "two_stage_decode",
]
