"""Full-lag matching filters for data comparison.

Comparison of equally shaped signals through the convolutional filter that
best maps one onto the other: a filter-identity loss with an analytic
gradient, a translation-invariant distance, and a non-parametric Langevin
generator, plus desk-scale experiment harnesses behind the ``wienerlab`` CLI.
"""

from .spectral import (
    LagFilter,
    LagGrid,
    Signal,
    Spectrum,
    WindowSpec,
    center_zero_lag,
    fft_forward,
    fft_inverse,
    make_window,
    pad_to_full_lag,
    uncenter_zero_lag,
)
from .wiener import (
    WienerConfig,
    concentration,
    delta_filter,
    rayleigh_quotient,
    ti_distance,
    wiener_filter,
    wiener_filter_direct,
    wiener_loss,
)
from .gradients import (
    GradientResult,
    check_gradient,
    grad_energy,
    grad_wiener_loss,
)
from .diffusion import EnergyModel, Schedule, Trajectory, cosine_schedule, energy, langevin_step, run_diffusion
from .knn import DistanceSpec, LabeledSet, evaluate_accuracy, knn_classify, make_translated_set

__version__ = "0.1.0"

__all__ = [
    "Signal",
    "Spectrum",
    "LagGrid",
    "LagFilter",
    "WindowSpec",
    "WienerConfig",
    "pad_to_full_lag",
    "fft_forward",
    "fft_inverse",
    "center_zero_lag",
    "uncenter_zero_lag",
    "make_window",
    "delta_filter",
    "wiener_filter",
    "wiener_filter_direct",
    "rayleigh_quotient",
    "wiener_loss",
    "ti_distance",
    "concentration",
    "GradientResult",
    "grad_wiener_loss",
    "grad_energy",
    "check_gradient",
    "EnergyModel",
    "Schedule",
    "Trajectory",
    "cosine_schedule",
    "energy",
    "langevin_step",
    "run_diffusion",
    "LabeledSet",
    "DistanceSpec",
    "knn_classify",
    "make_translated_set",
    "evaluate_accuracy",
    "__version__",
]
