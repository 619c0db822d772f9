"""Trajectory generation from few demonstrations via per-frame recurrent
RealNVP flows and a learned shift-attention schedule, with TP-GMM baselines
and a simulated docker benchmark suite."""

from .geometry import (
    Dataset,
    Demonstration,
    Frame,
    FrameVarianceProfile,
    TaskQuery,
    Trajectory,
    load_dataset,
    local_sets,
    resample,
    save_dataset,
    to_global,
    to_local,
    variance_profile,
)
from .flow import RealNVPFlow
from .attention import SALAT, SALIT, load_bundle, save_bundle
from .tpgmm import TPGMM

__all__ = [
    "Dataset",
    "Demonstration",
    "Frame",
    "FrameVarianceProfile",
    "TaskQuery",
    "Trajectory",
    "load_dataset",
    "local_sets",
    "resample",
    "save_dataset",
    "to_global",
    "to_local",
    "variance_profile",
    "RealNVPFlow",
    "SALAT",
    "SALIT",
    "TPGMM",
    "load_bundle",
    "save_bundle",
]

__version__ = "0.1.0"
