"""Analytic gradients of the filter-based functionals, plus a finite-difference harness.

The matching filter depends on the differentiated signal only through the
spectral numerator, which is linear in it. Every gradient here is therefore
one adjoint pass: the per-lag cotangent is carried back through the inverse
transform by multiplying with S / (|S|^2 + lam) in the frequency domain
(the adjoint of the forward quotient, S being the spectrum of the padded
fixed signal), then cropped to the unpadded extents (the adjoint of zero
padding). Derivation in docs/gradient_note.md.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from .errors import ConfigError, ShapeError, SingularSystemError, UndefinedQuotientError
from .spectral import LagFilter, LagGrid, Signal
from .wiener import IMAG_RESIDUE_TOL, WienerConfig, delta_filter

if TYPE_CHECKING:
    from .diffusion import EnergyModel

__all__ = [
    "GradientResult",
    "EnergyBreakdown",
    "grad_wiener_loss",
    "energy_breakdown",
    "grad_energy",
    "check_gradient",
    "GradientCheckReport",
]


@dataclass(frozen=True, eq=False)
class GradientResult:
    """Gradient with respect to the varying signal plus the functional's value there."""

    grad: Signal
    value: float


def _pad_planes(s: Signal) -> np.ndarray:
    out = np.zeros((s.channels,) + tuple(2 * n for n in s.shape))
    out[(slice(None),) + tuple(slice(0, n) for n in s.shape)] = s.planes
    return out


def _spectra(fixed: Signal, cfg: WienerConfig):
    """Spectrum S of the padded fixed signal and the real denominator |S|^2 + lam."""
    s = _pad_planes(fixed)
    axes = tuple(range(1, s.ndim))
    S = np.fft.fftn(s, axes=axes)
    den = (np.conj(S) * S).real + cfg.lam
    if cfg.lam == 0.0 and np.any(den == 0.0):
        raise SingularSystemError("zero denominator bin with lambda = 0")
    return S, den


def _filter_planes(varying: Signal, S: np.ndarray, den: np.ndarray, lam: float) -> np.ndarray:
    """Centered matching-filter planes, varying signal in the numerator."""
    p = _pad_planes(varying)
    axes = tuple(range(1, p.ndim))
    P = np.fft.fftn(p, axes=axes)
    v = np.fft.ifftn((np.conj(S) * P + lam) / den, axes=axes)
    resid = float(np.max(np.abs(v.imag)))
    if resid > IMAG_RESIDUE_TOL:
        raise SingularSystemError(f"imaginary residue {resid:.3e} after deconvolution")
    shifts = tuple(n // 2 for n in p.shape[1:])
    return np.roll(v.real, shifts, axis=axes)


def _pullback(g_centered: np.ndarray, S: np.ndarray, den: np.ndarray, shape) -> np.ndarray:
    """Adjoint pass: centered per-lag cotangent -> gradient on the unpadded planes."""
    axes = tuple(range(1, g_centered.ndim))
    shifts = tuple(-(n // 2) for n in g_centered.shape[1:])
    g_raw = np.roll(g_centered, shifts, axis=axes)
    gP = np.fft.ifftn((S / den) * np.fft.fftn(g_raw, axes=axes), axes=axes).real
    return gP[(slice(None),) + tuple(slice(0, n) for n in shape)]


def grad_wiener_loss(
    prediction: Signal, target: Signal, whitening: LagFilter, cfg: WienerConfig
) -> GradientResult:
    """Analytic gradient of the whitened filter-identity loss wrt the prediction.

    The loss is a convex quadratic in the prediction (the filter is linear in
    it), so this gradient vanishes exactly at prediction == target.
    """
    if prediction.shape != target.shape or prediction.channels != target.channels:
        raise ShapeError(
            f"shape mismatch: prediction {prediction.shape}x{prediction.channels} "
            f"vs target {target.shape}x{target.channels}"
        )
    S, den = _spectra(target, cfg)
    grid = LagGrid(S.shape[1:])
    if whitening.grid.extents != grid.extents:
        raise ShapeError(
            f"whitening extents {whitening.grid.extents} != padded extents {grid.extents}"
        )
    v = _filter_planes(prediction, S, den, cfg.lam)
    residual = v - delta_filter(grid, prediction.channels).data
    weighted = whitening.data * residual
    value = 0.5 * float(np.sum(weighted**2))
    g_v = whitening.data * weighted
    grad = _pullback(g_v, S, den, prediction.shape)
    return GradientResult(Signal(grad.ravel(), prediction.shape, prediction.channels), value)


@dataclass(frozen=True, eq=False)
class EnergyBreakdown:
    """Energy value, its gradient, and per-defining-sample diagnostics."""

    value: float
    grad: Signal
    sample_energies: np.ndarray
    sample_concentrations: np.ndarray


def energy_breakdown(x: Signal, model: "EnergyModel") -> EnergyBreakdown:
    """Evaluate the dataset energy sum, its gradient, and per-sample terms.

    Each defining sample contributes half its penalty quotient plus the
    zero-lag amplitude correction gamma/2 * (v0 - 1)^2. All samples are
    processed as one stacked batch; the reported order is the dataset index
    order.
    """
    ref = model.defining_samples[0]
    if x.shape != ref.shape or x.channels != ref.channels:
        raise ShapeError(
            f"signal shape {x.shape}x{x.channels} does not match defining samples "
            f"{ref.shape}x{ref.channels}"
        )
    lam = model.wiener_cfg.lam
    gamma = model.gamma
    pen = model.penalty.data  # (1, *padded)
    grid = model.penalty.grid
    S, den = model.sample_spectra  # (n, C, *padded)
    n_samples = S.shape[0]
    channels = x.channels
    axes = tuple(range(2, S.ndim))
    zero_idx = (slice(None), slice(None)) + grid.zero_lag_index

    p = _pad_planes(x)
    P = np.fft.fftn(p, axes=tuple(range(1, p.ndim)))  # (C, *padded)
    raw = np.fft.ifftn((np.conj(S) * P + lam) / den, axes=axes)
    resid = float(np.max(np.abs(raw.imag)))
    if resid > IMAG_RESIDUE_TOL:
        raise SingularSystemError(f"imaginary residue {resid:.3e} after deconvolution")
    v = np.roll(raw.real, grid.zero_lag_index, axis=axes)  # (n, C, *padded) centered

    norms = np.sum(v**2, axis=axes, keepdims=True)
    if np.any(norms == 0.0):
        raise UndefinedQuotientError("all-zero matching filter in energy sum")
    quot = np.sum((pen * v) ** 2, axis=axes, keepdims=True) / norms
    v0 = v[zero_idx]  # (n, C)
    energies = 0.5 * np.mean(quot, axis=(1,) + axes) + 0.5 * gamma * np.mean(
        (v0 - 1.0) ** 2, axis=1
    )
    concentrations = np.mean(v0**2 / norms.reshape(n_samples, channels), axis=1)

    # d(R/2)/dv = (pen^2 v - R v) / ||v||^2 ; amplitude term adds gamma (v0 - 1) at zero lag
    g_v = (pen**2 * v - quot * v) / norms / channels
    g_v[zero_idx] += gamma * (v0 - 1.0) / channels
    g_raw = np.roll(g_v, tuple(-(k // 2) for k in grid.extents), axis=axes)
    # sum of per-sample pullbacks == one inverse transform of the summed spectra
    G = np.sum((S / den) * np.fft.fftn(g_raw, axes=axes), axis=0)
    g_pad = np.fft.ifftn(G, axes=tuple(range(1, G.ndim))).real
    grad_planes = g_pad[(slice(None),) + tuple(slice(0, n) for n in x.shape)]

    value = float(np.sum(energies))
    grad = Signal(grad_planes.ravel(), x.shape, x.channels)
    return EnergyBreakdown(value, grad, energies, concentrations)


def grad_energy(x: Signal, model: "EnergyModel") -> GradientResult:
    """Gradient of the dataset energy with respect to the diffusing signal."""
    bd = energy_breakdown(x, model)
    return GradientResult(bd.grad, bd.value)


@dataclass(frozen=True)
class GradientCheckReport:
    max_rel_error: float
    mean_rel_error: float
    n_elements: int


def check_gradient(
    f: Callable[[Signal], float], analytic: Signal, x: Signal, h: float = 1e-5
) -> GradientCheckReport:
    """Central finite differences per element against a supplied analytic gradient.

    rel = |a - n| / max(|a|, |n|, 1e-12). Report only; never raises on error
    magnitude. Meaningful for inputs scaled to order one.
    """
    if h <= 0:
        raise ConfigError(f"step h must be > 0, got {h}")
    a = analytic.data
    num = np.empty_like(a)
    base = x.data
    for i in range(base.size):
        up = base.copy()
        up[i] += h
        dn = base.copy()
        dn[i] -= h
        num[i] = (
            f(Signal(up, x.shape, x.channels)) - f(Signal(dn, x.shape, x.channels))
        ) / (2.0 * h)
    rel = np.abs(a - num) / np.maximum(np.maximum(np.abs(a), np.abs(num)), 1e-12)
    return GradientCheckReport(float(rel.max()), float(rel.mean()), base.size)
