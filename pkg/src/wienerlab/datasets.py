"""Built-in desk-scale data: procedural digit images and toy cluster latents.

Digits are rendered from a 5x7 bitmap font with per-sample intensity scaling,
one-pixel placement jitter, and additive noise, so classes have genuine
intra-class variation without any external dataset.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .knn import LabeledSet
from .spectral import Signal

__all__ = ["digit_glyph", "make_digit_set", "two_cluster_latents"]

_GLYPHS = [
    # 5x7 rows per digit, 0..9
    ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
    ["11110", "00001", "00001", "01110", "00001", "00001", "11110"],
    ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
]


def digit_glyph(d: int) -> np.ndarray:
    """The 7x5 binary bitmap of digit d."""
    if not (0 <= d <= 9):
        raise ConfigError(f"digit must be 0..9, got {d}")
    return np.array([[float(c) for c in row] for row in _GLYPHS[d]])


def make_digit_set(
    n: int,
    size: int = 8,
    seed: int = 0,
    noise: float = 0.05,
    jitter: bool = True,
    intensity: tuple[float, float] = (0.7, 1.0),
) -> LabeledSet:
    """n digit images on a size x size canvas, classes drawn round-robin.

    Values lie in [0, 1]. Deterministic under seed.
    """
    if size < 8:
        raise ConfigError(f"canvas must be at least 8 pixels, got {size}")
    if n < 1:
        raise ConfigError(f"need at least one sample, got {n}")
    rng = np.random.default_rng(seed)
    signals = []
    labels = []
    row0 = (size - 7) // 2
    col0 = (size - 5) // 2
    for i in range(n):
        d = i % 10
        glyph = digit_glyph(d)
        dr = int(rng.integers(0, 2)) if jitter else 0
        dc = int(rng.integers(-1, 2)) if jitter else 0
        r = min(max(row0 + dr, 0), size - 7)
        c = min(max(col0 + dc, 0), size - 5)
        img = np.zeros((size, size))
        img[r : r + 7, c : c + 5] = glyph * rng.uniform(*intensity)
        if noise > 0:
            img = img + rng.normal(0.0, noise, size=img.shape)
        img = np.clip(img, 0.0, 1.0)
        signals.append(Signal.from_array(img))
        labels.append(d)
    return LabeledSet(signals, labels)


def two_cluster_latents(
    n: int, dim: int = 8, separation: float = 2.0, spread: float = 0.15, seed: int = 0
) -> tuple[list[Signal], list[int]]:
    """n latent vectors split evenly between two well-separated clusters.

    Cluster centers are two fixed rough patterns (deterministic for a given
    dim) scaled by `separation`; samples add isotropic Gaussian jitter of std
    `spread`. Returns signals plus their cluster ids. Centers are deliberately
    not sign-opposites: the quotient part of the diffusion energy is blind to
    overall sign, which would merge mirrored clusters.
    """
    if n < 2:
        raise ConfigError(f"need at least 2 samples, got {n}")
    pattern_rng = np.random.default_rng(90210)
    center_a = separation * pattern_rng.uniform(-1.3, 1.3, size=dim)
    center_b = separation * pattern_rng.uniform(-1.3, 1.3, size=dim)
    rng = np.random.default_rng(seed)
    signals = []
    ids = []
    for i in range(n):
        cid = i % 2
        center = center_a if cid == 0 else center_b
        signals.append(Signal(center + rng.normal(0.0, spread, size=dim), (dim,)))
        ids.append(cid)
    return signals, ids
