"""Shape-safe real grids, the FFT contract, full-lag padding, and centered-lag indexing.

Everything downstream works on signals padded to twice their extent per
dimension, so that the circular convolution implied by the Fourier path
approximates linear convolution. Filters and weight windows live on a lag
grid whose zero-lag bin sits at floor(extent/2) in each dimension.

FFT convention used library-wide: forward unnormalized, inverse scaled by
1/N (numpy's default). Quotient-based filters are invariant to this choice,
but the effective magnitude of additive stabilizers is not, so the
convention is fixed here once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericalError, ShapeError

__all__ = [
    "Signal",
    "Spectrum",
    "LagGrid",
    "LagFilter",
    "WindowSpec",
    "pad_to_full_lag",
    "fft_forward",
    "fft_inverse",
    "center_zero_lag",
    "uncenter_zero_lag",
    "make_window",
]


@dataclass(frozen=True, eq=False)
class Signal:
    """Real-valued grid: flat float64 data + extents + independent channel planes."""

    data: np.ndarray
    shape: tuple[int, ...]
    channels: int = 1

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        if not (1 <= len(self.shape) <= 2):
            raise ShapeError(f"signals must be rank 1 or 2, got extents {self.shape}")
        if any(n <= 0 for n in self.shape):
            raise ShapeError(f"extents must be positive, got {self.shape}")
        if self.channels < 1:
            raise ShapeError(f"channel count must be >= 1, got {self.channels}")
        data = np.ascontiguousarray(self.data, dtype=np.float64).ravel()
        expected = self.channels * int(np.prod(self.shape))
        if data.size != expected:
            raise ShapeError(
                f"data length {data.size} != channels*prod(shape) = {expected}"
            )
        if not np.all(np.isfinite(data)):
            raise ConfigError("signal values must be finite")
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, arr) -> "Signal":
        """Single-channel signal whose extents are the array's shape."""
        arr = np.asarray(arr, dtype=np.float64)
        return cls(arr.ravel(), arr.shape, 1)

    @classmethod
    def from_planes(cls, planes) -> "Signal":
        """Multi-channel signal from an array shaped (channels, *extents)."""
        planes = np.asarray(planes, dtype=np.float64)
        return cls(planes.ravel(), planes.shape[1:], planes.shape[0])

    @property
    def planes(self) -> np.ndarray:
        """View shaped (channels, *extents)."""
        return self.data.reshape((self.channels,) + self.shape)

    def plane(self, c: int = 0) -> np.ndarray:
        return self.planes[c]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Complex transform of a padded signal, one plane per channel."""

    data: np.ndarray  # (channels, *shape) complex128
    shape: tuple[int, ...]

    @property
    def channels(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class LagGrid:
    """Padded extents plus the centered zero-lag coordinate."""

    extents: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "extents", tuple(int(n) for n in self.extents))
        if not (1 <= len(self.extents) <= 2):
            raise ShapeError(f"lag grids must be rank 1 or 2, got {self.extents}")

    @property
    def zero_lag_index(self) -> tuple[int, ...]:
        return tuple(n // 2 for n in self.extents)

    def lag_l1(self) -> np.ndarray:
        """Per-bin Manhattan distance from the zero-lag bin."""
        axes = [np.abs(np.arange(n) - n // 2) for n in self.extents]
        grids = np.meshgrid(*axes, indexing="ij")
        return sum(grids).astype(np.float64)


@dataclass(frozen=True, eq=False)
class LagFilter:
    """Real grid over centered lags, one plane per channel."""

    data: np.ndarray  # (channels, *extents)
    grid: LagGrid

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == len(self.grid.extents):
            data = data[np.newaxis]
        if data.shape[1:] != self.grid.extents:
            raise ShapeError(
                f"filter extents {data.shape[1:]} != grid extents {self.grid.extents}"
            )
        if not np.all(np.isfinite(data)):
            raise ConfigError("filter values must be finite")
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    def zero_lag_values(self) -> np.ndarray:
        """Zero-lag coefficient per channel."""
        idx = (slice(None),) + self.grid.zero_lag_index
        return self.data[idx]


@dataclass(frozen=True)
class WindowSpec:
    """Diagonal per-lag weight window parameterization.

    family "laplace": w(tau) = epsilon + exp(-||tau||_1 / b), peaked at zero-lag.
    family "inverted_laplace": w(tau) = 1 - exp(-||tau||_1 / b), zero at zero-lag.
    """

    family: str
    b: float
    epsilon: float = 0.0

    def __post_init__(self):
        if self.family not in ("laplace", "inverted_laplace"):
            raise ConfigError(f"unknown window family {self.family!r}")
        if self.b <= 0:
            raise ConfigError(f"window scale b must be > 0, got {self.b}")
        if self.epsilon < 0:
            raise ConfigError(f"window floor epsilon must be >= 0, got {self.epsilon}")


def pad_to_full_lag(s: Signal) -> Signal:
    """Zero-pad each dimension to twice its extent, content kept at the origin corner."""
    if len(s.shape) > 2:
        raise ShapeError(f"rank {len(s.shape)} signals are unsupported")
    padded_shape = tuple(2 * n for n in s.shape)
    out = np.zeros((s.channels,) + padded_shape)
    out[(slice(None),) + tuple(slice(0, n) for n in s.shape)] = s.planes
    return Signal(out.ravel(), padded_shape, s.channels)


def fft_forward(s: Signal) -> Spectrum:
    """Forward transform per channel plane (unnormalized)."""
    planes = s.planes
    if not np.all(np.isfinite(planes)):
        raise ConfigError("non-finite input to fft_forward")
    axes = tuple(range(1, planes.ndim))
    return Spectrum(np.fft.fftn(planes, axes=axes), s.shape)


def fft_inverse(sp: Spectrum, imag_tol: float = 1e-10) -> Signal:
    """Inverse transform (scaled 1/N); imaginary residue checked then discarded."""
    if not np.all(np.isfinite(sp.data)):
        raise ConfigError("non-finite input to fft_inverse")
    axes = tuple(range(1, sp.data.ndim))
    out = np.fft.ifftn(sp.data, axes=axes)
    resid = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if resid > imag_tol:
        raise NumericalError(
            f"imaginary residue {resid:.3e} exceeds tolerance {imag_tol:.1e}"
        )
    return Signal(out.real.ravel(), sp.shape, sp.channels)


def center_zero_lag(raw: Signal, g: LagGrid) -> LagFilter:
    """Cyclic shift so the convolutional zero-lag bin sits at the grid center."""
    if raw.shape != g.extents:
        raise ShapeError(f"raw extents {raw.shape} != grid extents {g.extents}")
    shift = g.zero_lag_index
    axes = tuple(range(1, len(g.extents) + 1))
    return LagFilter(np.roll(raw.planes, shift, axis=axes), g)


def uncenter_zero_lag(f: LagFilter) -> Signal:
    """Inverse of center_zero_lag: zero-lag bin returned to the origin corner."""
    shift = tuple(-k for k in f.grid.zero_lag_index)
    axes = tuple(range(1, len(f.grid.extents) + 1))
    planes = np.roll(f.data, shift, axis=axes)
    return Signal(planes.ravel(), f.grid.extents, f.channels)


def make_window(spec: WindowSpec, g: LagGrid) -> LagFilter:
    """Evaluate a weight window over the centered lag grid (single plane)."""
    l1 = g.lag_l1()
    if spec.family == "laplace":
        w = spec.epsilon + np.exp(-l1 / spec.b)
    else:
        w = 1.0 - np.exp(-l1 / spec.b)
    return LagFilter(w[np.newaxis], g)
