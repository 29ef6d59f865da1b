"""Sequence-matching loop closure detection.

Matches image sequences between two traversals of a route using per-frame
descriptor vectors: a full-sweep matcher, a windowed accelerated matcher,
and an online variant that adapts its candidate-range count to the scene.
"""

from .accel import AccelParams, CandidateSet, match_accelerated, seed_candidates
from .backend import available_backends, get_kernels
from .descriptor import (
    Descriptor,
    DescriptorSet,
    PixelDescriptorConfig,
    load_descriptor_file,
    normalize,
    pixel_descriptor,
    read_pgm,
    save_descriptor_file,
    validate_dim,
    write_pgm,
)
from .diffmatrix import DifferenceMatrix, build_columns, build_full, entry
from .evaluate import EvalReport, GroundTruth, emit_plot, label_matches, pr_curve
from .online import AdaptState, KTrace, OnlineParams, change_degree, match_online
from .seqmatch import (
    Instrumentation,
    MatcherParams,
    MatchResult,
    SeqScore,
    cal_seq_dif,
    count_distance_evals,
    match_all,
    sweep_speeds,
)
from .synth import SynthConfig, generate_pair, write_dataset

__version__ = "0.1.0"

__all__ = [
    "AccelParams",
    "AdaptState",
    "CandidateSet",
    "Descriptor",
    "DescriptorSet",
    "DifferenceMatrix",
    "EvalReport",
    "GroundTruth",
    "Instrumentation",
    "KTrace",
    "MatchResult",
    "MatcherParams",
    "OnlineParams",
    "PixelDescriptorConfig",
    "SeqScore",
    "SynthConfig",
    "available_backends",
    "build_columns",
    "build_full",
    "cal_seq_dif",
    "change_degree",
    "count_distance_evals",
    "emit_plot",
    "entry",
    "generate_pair",
    "get_kernels",
    "label_matches",
    "load_descriptor_file",
    "match_accelerated",
    "match_all",
    "match_online",
    "normalize",
    "pixel_descriptor",
    "pr_curve",
    "read_pgm",
    "save_descriptor_file",
    "seed_candidates",
    "sweep_speeds",
    "validate_dim",
    "write_dataset",
    "write_pgm",
]
