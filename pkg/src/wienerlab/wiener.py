"""Data-matching full-lag filters and the comparison functionals built on them.

The matching filter between two equally shaped signals is the convolutional
filter v minimizing ||Y v - x||^2, where Y is circular convolution with the
padded source. Solved two ways:

  * ``wiener_filter``: spectral quotient (conj(S)*X + lam) / (|S|^2 + lam),
    inverse-transformed and centered. O(N log N).
  * ``wiener_filter_direct``: the same least-squares problem assembled as an
    explicit circulant system and solved densely. O(N^3); exists purely as an
    exact cross-check of the fast path.

The stabilizer ``lam`` is added to numerator and denominator so that
identical inputs always yield the unit zero-lag spike (the convolutional
identity), for every lam >= 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    OracleSizeError,
    ShapeError,
    SingularSystemError,
    UndefinedQuotientError,
)
from .spectral import LagFilter, LagGrid, Signal, pad_to_full_lag

__all__ = [
    "WienerConfig",
    "delta_filter",
    "wiener_filter",
    "wiener_filter_direct",
    "rayleigh_quotient",
    "wiener_loss",
    "ti_distance",
    "concentration",
]

ORACLE_SIZE_CAP = 4096  # padded elements per channel; dense solve is O(n^3)
IMAG_RESIDUE_TOL = 1e-8


@dataclass(frozen=True)
class WienerConfig:
    """Stabilizer magnitude and the (single) supported matching direction."""

    lam: float = 1.0
    direction: str = "match_source_to_target"

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError(f"lambda must be >= 0, got {self.lam}")
        if self.direction != "match_source_to_target":
            raise ConfigError(f"unknown direction {self.direction!r}")


def delta_filter(grid: LagGrid, channels: int = 1) -> LagFilter:
    """Unit spike at the zero-lag bin: the convolutional identity."""
    data = np.zeros((channels,) + grid.extents)
    data[(slice(None),) + grid.zero_lag_index] = 1.0
    return LagFilter(data, grid)


def _check_pair(target: Signal, source: Signal) -> None:
    if target.shape != source.shape:
        raise ShapeError(f"shape mismatch: target {target.shape} vs source {source.shape}")
    if target.channels != source.channels:
        raise ShapeError(
            f"channel mismatch: target {target.channels} vs source {source.channels}"
        )


def _centered(raw_planes: np.ndarray, grid: LagGrid) -> LagFilter:
    axes = tuple(range(1, raw_planes.ndim))
    return LagFilter(np.roll(raw_planes, grid.zero_lag_index, axis=axes), grid)


def wiener_filter(target: Signal, source: Signal, cfg: WienerConfig) -> LagFilter:
    """Per-channel filter that convolves `source` to best approximate `target`.

    Both inputs are padded to full-lag size internally; the result lives on
    the centered lag grid of the padded extents.
    """
    _check_pair(target, source)
    t = pad_to_full_lag(target).planes
    s = pad_to_full_lag(source).planes
    axes = tuple(range(1, t.ndim))
    T = np.fft.fftn(t, axes=axes)
    S = np.fft.fftn(s, axes=axes)
    den = (np.conj(S) * S).real + cfg.lam
    if cfg.lam == 0.0 and np.any(den == 0.0):
        raise SingularSystemError("zero denominator bin with lambda = 0")
    v = np.fft.ifftn((np.conj(S) * T + cfg.lam) / den, axes=axes)
    resid = float(np.max(np.abs(v.imag)))
    if resid > IMAG_RESIDUE_TOL:
        raise SingularSystemError(f"imaginary residue {resid:.3e} after deconvolution")
    grid = LagGrid(t.shape[1:])
    return _centered(v.real, grid)


def _circulant_1d(s: np.ndarray) -> np.ndarray:
    n = s.size
    i = np.arange(n)
    return s[(i[:, None] - i[None, :]) % n]


def _circulant_2d(s: np.ndarray) -> np.ndarray:
    h, w = s.shape
    r = np.arange(h)
    c = np.arange(w)
    dr = (r[:, None] - r[None, :]) % h  # (h, h)
    dc = (c[:, None] - c[None, :]) % w  # (w, w)
    # Y[(r,c),(r',c')] = s[(r-r')%h, (c-c')%w], flattened row-major
    return s[dr[:, None, :, None], dc[None, :, None, :]].reshape(h * w, h * w)


def wiener_filter_direct(target: Signal, source: Signal, cfg: WienerConfig) -> LagFilter:
    """Dense circulant least-squares reference for ``wiener_filter``.

    Solves (Y^T Y + lam I) v = Y^T x + lam * delta by LU factorization, with Y
    the circulant convolution matrix of the padded source. Kept deliberately
    independent of the spectral path.
    """
    _check_pair(target, source)
    t = pad_to_full_lag(target).planes
    s = pad_to_full_lag(source).planes
    n = int(np.prod(t.shape[1:]))
    if n > ORACLE_SIZE_CAP:
        raise OracleSizeError(f"padded size {n} exceeds dense-solve cap {ORACLE_SIZE_CAP}")
    grid = LagGrid(t.shape[1:])
    delta = np.zeros(n)
    delta[0] = 1.0  # zero lag in raw (uncentered) layout
    out = np.empty_like(t)
    for c in range(t.shape[0]):
        plane = s[c]
        Y = _circulant_1d(plane) if plane.ndim == 1 else _circulant_2d(plane)
        A = Y.T @ Y + cfg.lam * np.eye(n)
        b = Y.T @ t[c].ravel() + cfg.lam * delta
        try:
            v = np.linalg.solve(A, b)
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(f"dense system is singular: {exc}") from exc
        out[c] = v.reshape(t.shape[1:])
    return _centered(out, grid)


def rayleigh_quotient(v: LagFilter, penalty: LagFilter) -> float:
    """||penalty (x) v||^2 / ||v||^2, averaged over channels.

    Scale-invariant: insensitive to the filter's overall amplitude, sensitive
    only to where its energy sits on the lag grid.
    """
    if penalty.grid.extents != v.grid.extents:
        raise ShapeError(
            f"penalty extents {penalty.grid.extents} != filter extents {v.grid.extents}"
        )
    axes = tuple(range(1, v.data.ndim))
    norms = np.sum(v.data**2, axis=axes)
    if np.any(norms == 0.0):
        raise UndefinedQuotientError("quotient undefined for an all-zero filter")
    num = np.sum((penalty.data * v.data) ** 2, axis=axes)
    return float(np.mean(num / norms))


def _loss_single(
    prediction: Signal, target: Signal, whitening: LagFilter, cfg: WienerConfig, swap: bool
) -> float:
    v = (
        wiener_filter(target, prediction, cfg)
        if swap
        else wiener_filter(prediction, target, cfg)
    )
    if whitening.grid.extents != v.grid.extents:
        raise ShapeError(
            f"whitening extents {whitening.grid.extents} != padded extents {v.grid.extents}"
        )
    residual = v.data - delta_filter(v.grid, v.channels).data
    return 0.5 * float(np.sum((whitening.data * residual) ** 2))


def wiener_loss(
    prediction,
    target,
    whitening: LagFilter,
    cfg: WienerConfig,
    swap: bool = False,
) -> float:
    """Half the squared whitened distance between the matching filter and the identity.

    Zero exactly when prediction == target. Accepts a pair of signals or a
    pair of equal-length signal lists (batch); batches reduce by mean over
    samples, channels by sum.
    """
    if isinstance(prediction, Signal):
        return _loss_single(prediction, target, whitening, cfg, swap)
    if len(prediction) != len(target):
        raise ShapeError(f"batch length mismatch: {len(prediction)} vs {len(target)}")
    if not prediction:
        raise ConfigError("empty batch")
    vals = [_loss_single(p, t, whitening, cfg, swap) for p, t in zip(prediction, target)]
    return float(np.mean(vals))


def ti_distance(a: Signal, b: Signal, cfg: WienerConfig) -> float:
    """Negative maximum of the standardized matching filter.

    Sensitive to how focused the filter's energy is, blind to where the focus
    sits, hence invariant to rigid translation of either signal. Lower means
    more similar; the self-distance -sqrt(nbins - 1) is the global minimum.
    """
    v = wiener_filter(a, b, cfg)
    axes = tuple(range(1, v.data.ndim))
    mu = np.mean(v.data, axis=axes, keepdims=True)
    sigma = np.std(v.data, axis=axes, keepdims=True)
    vals = []
    for c in range(v.channels):
        if sigma[c].ravel()[0] == 0.0:
            warnings.warn("constant matching filter; distance defaulting to 0", RuntimeWarning)
            vals.append(0.0)
        else:
            vals.append(-float(np.max((v.data[c] - mu[c]) / sigma[c])))
    return float(np.mean(vals))


def concentration(v: LagFilter) -> float:
    """Fraction of squared filter energy at the zero-lag bin, in [0, 1]."""
    axes = tuple(range(1, v.data.ndim))
    norms = np.sum(v.data**2, axis=axes)
    if np.any(norms == 0.0):
        raise UndefinedQuotientError("concentration undefined for an all-zero filter")
    return float(np.mean(v.zero_lag_values() ** 2 / norms))
