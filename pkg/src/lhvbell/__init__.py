"""Local hidden-variable model for Bell polarization states.

Hidden directions on the circle are read by each detector in its own chart;
the charts are related by a nonlinear, measure-preserving circle map whose
four-step cycle does not close. That is enough to reproduce
``E = -cos(delta - phi)`` and reach the Tsirelson value with purely local
responses.
"""

from .chsh import (
    TSIRELSON,
    ChshSettings,
    CycleParams,
    chsh_statistic,
    compose_settings,
    geometric_phase_profile,
    holonomy_cycle,
    model_chsh,
    per_config_classical,
    per_config_model,
)
from .distribution import cdf, density, sample
from .experiment import (
    CorrelationEstimate,
    JointDistribution,
    classical_correlation,
    exact_correlation,
    incoherent_correlation,
    joint_probabilities,
    mc_correlation,
    response,
    simulate_pair,
)
from .rng import RngStream
from .transform import (
    ExperimentSetting,
    branch_of,
    frame_map,
    l_inverse,
    l_transform,
    q_sign,
    wrap_angle,
)

__version__ = "0.1.0"

__all__ = [
    "TSIRELSON",
    "ChshSettings",
    "CorrelationEstimate",
    "CycleParams",
    "ExperimentSetting",
    "JointDistribution",
    "RngStream",
    "branch_of",
    "cdf",
    "chsh_statistic",
    "classical_correlation",
    "compose_settings",
    "density",
    "exact_correlation",
    "frame_map",
    "geometric_phase_profile",
    "holonomy_cycle",
    "incoherent_correlation",
    "joint_probabilities",
    "l_inverse",
    "l_transform",
    "mc_correlation",
    "model_chsh",
    "per_config_classical",
    "per_config_model",
    "q_sign",
    "response",
    "sample",
    "simulate_pair",
    "wrap_angle",
]
