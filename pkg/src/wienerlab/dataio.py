"""File formats: IDX image/label ingestion, binary PGM, the model binary, CSV.

IDX files follow the big-endian layout (magic 0x00000803 for images,
0x00000801 for labels) and may be gzip-compressed. Pixels are scaled to
[0, 1] on read; writes clamp to [0, 1] and quantize to 8 bits.
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError
from .knn import LabeledSet
from .spectral import Signal
from .trainer import DenseAutoencoder

__all__ = [
    "read_idx_images",
    "read_idx_labels",
    "ingest_idx",
    "read_pgm",
    "write_pgm",
    "save_model",
    "load_model",
    "write_csv",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
MODEL_MAGIC = b"WNAE"
MODEL_VERSION = 1


def _read_bytes(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        return gzip.decompress(raw)
    return raw


def _be32(buf: bytes, offset: int) -> int:
    if offset + 4 > len(buf):
        raise FormatError("truncated header", offset=offset)
    return struct.unpack_from(">I", buf, offset)[0]


def read_idx_images(path) -> np.ndarray:
    """(count, rows, cols) array of float64 pixels in [0, 1]."""
    buf = _read_bytes(path)
    magic = _be32(buf, 0)
    if magic != IDX_IMAGE_MAGIC:
        raise FormatError(f"bad image magic 0x{magic:08x}", offset=0)
    count = _be32(buf, 4)
    rows = _be32(buf, 8)
    cols = _be32(buf, 12)
    expected = 16 + count * rows * cols
    if len(buf) < expected:
        raise FormatError(
            f"truncated image data: have {len(buf)} bytes, need {expected}", offset=len(buf)
        )
    pixels = np.frombuffer(buf, dtype=np.uint8, count=count * rows * cols, offset=16)
    return pixels.reshape(count, rows, cols).astype(np.float64) / 255.0


def read_idx_labels(path) -> np.ndarray:
    buf = _read_bytes(path)
    magic = _be32(buf, 0)
    if magic != IDX_LABEL_MAGIC:
        raise FormatError(f"bad label magic 0x{magic:08x}", offset=0)
    count = _be32(buf, 4)
    if len(buf) < 8 + count:
        raise FormatError(
            f"truncated label data: have {len(buf)} bytes, need {8 + count}", offset=len(buf)
        )
    return np.frombuffer(buf, dtype=np.uint8, count=count, offset=8).astype(int)


def ingest_idx(images_path, labels_path=None) -> LabeledSet:
    """Load an image/label IDX pair as a labeled set.

    When labels_path is omitted it is derived from the images path by the
    conventional 'images-idx3' -> 'labels-idx1' naming.
    """
    if labels_path is None:
        name = str(images_path)
        derived = name.replace("images-idx3", "labels-idx1")
        if derived == name:
            raise FormatError(f"cannot derive a labels path from {name!r}")
        labels_path = derived
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"count mismatch: {images.shape[0]} images vs {labels.shape[0]} labels"
        )
    return LabeledSet([Signal.from_array(img) for img in images], labels.tolist())


def read_pgm(path) -> Signal:
    """Binary P5 image scaled to [0, 1]."""
    buf = Path(path).read_bytes()
    if buf[:2] != b"P5":
        raise FormatError("not a binary PGM (P5) file", offset=0)
    # header: magic, width, height, maxval as whitespace-separated tokens,
    # with optional '#' comment lines
    pos = 2
    tokens = []
    while len(tokens) < 3:
        if pos >= len(buf):
            raise FormatError("truncated PGM header", offset=pos)
        c = buf[pos : pos + 1]
        if c == b"#":
            while pos < len(buf) and buf[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(buf) and not buf[pos : pos + 1].isspace():
                pos += 1
            tokens.append(buf[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"non-numeric PGM header field: {exc}", offset=pos) from exc
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, expected 255", offset=pos)
    need = width * height
    data = np.frombuffer(buf, dtype=np.uint8, count=-1, offset=pos)
    if data.size < need:
        raise FormatError(
            f"truncated PGM payload: have {data.size} pixels, need {need}", offset=pos
        )
    img = data[:need].reshape(height, width).astype(np.float64) / 255.0
    return Signal.from_array(img)


def write_pgm(path, s: Signal) -> None:
    """Clamp to [0, 1], quantize to 8 bits, write binary P5 (first channel)."""
    plane = s.planes[0]
    if plane.ndim == 1:
        plane = plane[np.newaxis, :]
    q = np.round(np.clip(plane, 0.0, 1.0) * 255.0).astype(np.uint8)
    height, width = q.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode())
        f.write(q.tobytes())


def save_model(path, model: DenseAutoencoder) -> None:
    """Versioned flat binary: magic, version, layer widths, little-endian f64 params."""
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(struct.pack("<I", MODEL_VERSION))
        f.write(struct.pack("<I", len(model.widths)))
        f.write(struct.pack(f"<{len(model.widths)}I", *model.widths))
        f.write(model.flat_params().astype("<f8").tobytes())


def load_model(path, activation: str = "mish") -> DenseAutoencoder:
    buf = Path(path).read_bytes()
    if buf[:4] != MODEL_MAGIC:
        raise FormatError("bad model magic", offset=0)
    version = struct.unpack_from("<I", buf, 4)[0]
    if version != MODEL_VERSION:
        raise FormatError(f"unsupported model version {version}", offset=4)
    n_widths = struct.unpack_from("<I", buf, 8)[0]
    widths = struct.unpack_from(f"<{n_widths}I", buf, 12)
    pos = 12 + 4 * n_widths
    model = DenseAutoencoder.initialize(widths, activation=activation, seed=0)
    theta = np.frombuffer(buf, dtype="<f8", offset=pos)
    if theta.size != model.n_params:
        raise FormatError(
            f"parameter payload has {theta.size} values, expected {model.n_params}", offset=pos
        )
    model.set_flat_params(theta.astype(np.float64))
    return model


def write_csv(path, header: list[str], rows) -> None:
    """Plain CSV with a header row; floats via repr for lossless round-trips."""
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in row) + "\n")
