"""Brute-force k-nearest-neighbour classification with pluggable distances.

Includes synthesis of translated test sets: images are zero-padded, then
rigidly shifted by per-image random integer offsets, which is the mechanism
that defeats element-wise distances while leaving the filter-based
translation-invariant distance unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError
from .spectral import Signal
from .wiener import WienerConfig, ti_distance

__all__ = [
    "LabeledSet",
    "DistanceSpec",
    "EvalResult",
    "distance",
    "knn_classify",
    "make_translated_set",
    "evaluate_accuracy",
]

N_CLASSES = 10


@dataclass(frozen=True, eq=False)
class LabeledSet:
    """Uniformly shaped signals with class ids in 0..9."""

    signals: list[Signal]
    labels: list[int]

    def __post_init__(self):
        if len(self.signals) != len(self.labels):
            raise ConfigError(
                f"{len(self.signals)} signals vs {len(self.labels)} labels"
            )
        if self.signals:
            first = self.signals[0]
            for s in self.signals[1:]:
                if s.shape != first.shape or s.channels != first.channels:
                    raise ShapeError("labeled set signals must share one shape")
        for lab in self.labels:
            if not (0 <= int(lab) < N_CLASSES):
                raise ConfigError(f"label {lab} outside class range 0..{N_CLASSES - 1}")
        object.__setattr__(self, "labels", [int(l) for l in self.labels])

    def __len__(self) -> int:
        return len(self.signals)


@dataclass(frozen=True)
class DistanceSpec:
    kind: str = "manhattan"
    wiener_cfg: WienerConfig = field(default_factory=WienerConfig)

    def __post_init__(self):
        if self.kind not in ("manhattan", "euclidean", "wiener_ti"):
            raise ConfigError(f"unknown distance kind {self.kind!r}")


def distance(a: Signal, b: Signal, spec: DistanceSpec) -> float:
    if a.shape != b.shape or a.channels != b.channels:
        raise ShapeError(f"shape mismatch: {a.shape} vs {b.shape}")
    if spec.kind == "manhattan":
        return float(np.sum(np.abs(a.data - b.data)))
    if spec.kind == "euclidean":
        return float(np.linalg.norm(a.data - b.data))
    return ti_distance(a, b, spec.wiener_cfg)


def _ti_distances_to_set(query: Signal, train: list[Signal], cfg: WienerConfig) -> np.ndarray:
    """All filter-based distances from one query to a training set in one batch.

    Same quantity as calling ti_distance per pair; the padded training spectra
    and the query spectrum are just computed once and broadcast.
    """
    assert query.channels == 1, "batch path handles single-channel sets"
    padded = tuple(2 * n for n in query.shape)
    q = np.zeros(padded)
    q[tuple(slice(0, n) for n in query.shape)] = query.plane()
    Q = np.fft.fftn(q)

    stack = np.zeros((len(train),) + padded)
    region = (slice(None),) + tuple(slice(0, n) for n in query.shape)
    stack[region] = np.stack([t.plane() for t in train])
    axes = tuple(range(1, stack.ndim))
    S = np.fft.fftn(stack, axes=axes)
    den = (np.conj(S) * S).real + cfg.lam
    if cfg.lam == 0.0 and np.any(den == 0.0):
        raise ConfigError("lambda = 0 with zero spectrum bins in training set")
    v = np.fft.ifftn((np.conj(S) * Q + cfg.lam) / den, axes=axes).real
    flat = v.reshape(len(train), -1)
    mu = flat.mean(axis=1, keepdims=True)
    sigma = flat.std(axis=1, keepdims=True)
    sigma[sigma == 0.0] = np.inf  # constant filter -> distance 0 by convention
    return -np.max((flat - mu) / sigma, axis=1)


def _distances_to_set(query: Signal, train: list[Signal], spec: DistanceSpec) -> np.ndarray:
    if spec.kind == "wiener_ti" and query.channels == 1:
        return _ti_distances_to_set(query, train, spec.wiener_cfg)
    return np.array([distance(query, t, spec) for t in train])


def _vote(dists: np.ndarray, labels: list[int], k: int) -> int:
    """Majority vote; ties by smallest summed distance, then lowest class id."""
    order = np.argsort(dists, kind="stable")[:k]
    counts = np.zeros(N_CLASSES, dtype=int)
    sums = np.zeros(N_CLASSES)
    for i in order:
        counts[labels[i]] += 1
        sums[labels[i]] += dists[i]
    best = counts.max()
    tied = [c for c in range(N_CLASSES) if counts[c] == best]
    if len(tied) == 1:
        return tied[0]
    min_sum = min(sums[c] for c in tied)
    return min(c for c in tied if sums[c] == min_sum)


def knn_classify(train: LabeledSet, query: Signal, k: int, dist: DistanceSpec) -> int:
    if len(train) == 0:
        raise ConfigError("empty training set")
    if not (1 <= k <= len(train)):
        raise ConfigError(f"k must be in 1..{len(train)}, got {k}")
    return _vote(_distances_to_set(query, train.signals, dist), train.labels, k)


def make_translated_set(
    base: LabeledSet, max_shift: int, pad: int, seed: int
) -> LabeledSet:
    """Zero-pad every image by `pad` on all sides, then shift each by a uniform
    random integer offset in [-max_shift, max_shift]^2. Deterministic under seed."""
    if max_shift < 0 or pad < 0:
        raise ConfigError("max_shift and pad must be >= 0")
    if max_shift > pad:
        raise ConfigError(f"max_shift {max_shift} exceeds pad {pad}")
    if not base.signals or len(base.signals[0].shape) != 2:
        raise ShapeError("translated sets are defined for nonempty 2-d image sets")
    rng = np.random.default_rng(seed)
    out = []
    for s in base.signals:
        planes = np.pad(s.planes, ((0, 0), (pad, pad), (pad, pad)))
        dr, dc = rng.integers(-max_shift, max_shift + 1, size=2)
        planes = np.roll(planes, (int(dr), int(dc)), axis=(1, 2))
        out.append(Signal.from_planes(planes))
    return LabeledSet(out, list(base.labels))


@dataclass(frozen=True, eq=False)
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # confusion[true, predicted]
    predictions: list[int]


def evaluate_accuracy(
    train: LabeledSet, test: LabeledSet, k: int, dist: DistanceSpec
) -> EvalResult:
    """Fraction of correct predictions plus the per-class confusion matrix."""
    if len(train) == 0 or len(test) == 0:
        raise ConfigError("empty train or test set")
    if train.signals[0].shape != test.signals[0].shape:
        raise ShapeError(
            f"train shape {train.signals[0].shape} != test shape {test.signals[0].shape}"
        )
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    predictions = []
    correct = 0
    for sig, lab in zip(test.signals, test.labels):
        pred = knn_classify(train, sig, k, dist)
        predictions.append(pred)
        confusion[lab, pred] += 1
        correct += int(pred == lab)
    return EvalResult(correct / len(test), confusion, predictions)
