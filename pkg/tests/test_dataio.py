import gzip
import struct

import numpy as np
import pytest

from wienerlab.dataio import (
    ingest_idx,
    load_model,
    read_idx_images,
    read_idx_labels,
    read_pgm,
    save_model,
    write_csv,
    write_pgm,
)
from wienerlab.errors import FormatError
from wienerlab.spectral import Signal
from wienerlab.trainer import DenseAutoencoder


def idx_image_bytes(images: np.ndarray) -> bytes:
    n, rows, cols = images.shape
    return struct.pack(">IIII", 0x00000803, n, rows, cols) + images.astype(np.uint8).tobytes()


def idx_label_bytes(labels) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">II", 0x00000801, labels.size) + labels.tobytes()


class TestIdx:
    def test_header_and_shapes(self, tmp_path):
        imgs = np.arange(2 * 28 * 28, dtype=np.uint8).reshape(2, 28, 28)
        p = tmp_path / "two-images-idx3-ubyte"
        p.write_bytes(idx_image_bytes(imgs))
        out = read_idx_images(p)
        assert out.shape == (2, 28, 28)
        assert out.max() <= 1.0 and out.min() >= 0.0
        np.testing.assert_allclose(out * 255.0, imgs, atol=1e-12)

    def test_gzip_transparent(self, tmp_path):
        imgs = np.full((3, 4, 4), 128, dtype=np.uint8)
        p = tmp_path / "imgs.gz"
        p.write_bytes(gzip.compress(idx_image_bytes(imgs)))
        assert read_idx_images(p).shape == (3, 4, 4)

    def test_bad_magic_reports_offset(self, tmp_path):
        p = tmp_path / "bad"
        p.write_bytes(struct.pack(">IIII", 0xDEADBEEF, 1, 2, 2) + b"\x00" * 4)
        with pytest.raises(FormatError) as err:
            read_idx_images(p)
        assert err.value.offset == 0

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "short"
        p.write_bytes(struct.pack(">IIII", 0x00000803, 2, 4, 4) + b"\x00" * 10)
        with pytest.raises(FormatError):
            read_idx_images(p)

    def test_ingest_pairs_images_with_labels(self, tmp_path):
        imgs = np.random.default_rng(0).integers(0, 256, size=(5, 6, 6)).astype(np.uint8)
        (tmp_path / "t-images-idx3-ubyte").write_bytes(idx_image_bytes(imgs))
        (tmp_path / "t-labels-idx1-ubyte").write_bytes(idx_label_bytes([0, 1, 2, 3, 4]))
        ls = ingest_idx(tmp_path / "t-images-idx3-ubyte")
        assert len(ls) == 5
        assert ls.labels == [0, 1, 2, 3, 4]
        assert ls.signals[0].shape == (6, 6)

    def test_count_mismatch(self, tmp_path):
        imgs = np.zeros((3, 2, 2), dtype=np.uint8)
        (tmp_path / "a-images-idx3-ubyte").write_bytes(idx_image_bytes(imgs))
        (tmp_path / "a-labels-idx1-ubyte").write_bytes(idx_label_bytes([1, 2]))
        with pytest.raises(FormatError):
            ingest_idx(tmp_path / "a-images-idx3-ubyte")

    def test_label_magic_checked(self, tmp_path):
        p = tmp_path / "labels"
        p.write_bytes(struct.pack(">II", 0x00000803, 2) + b"\x00\x01")
        with pytest.raises(FormatError):
            read_idx_labels(p)


class TestPgm:
    def test_roundtrip_within_quantization(self, tmp_path):
        img = np.random.default_rng(1).random((9, 7))
        p = tmp_path / "img.pgm"
        write_pgm(p, Signal.from_array(img))
        back = read_pgm(p)
        assert back.shape == (9, 7)
        assert np.abs(back.plane() - img).max() <= 1.0 / 255.0

    def test_write_clamps(self, tmp_path):
        img = np.array([[-0.5, 0.5], [1.5, 1.0]])
        p = tmp_path / "clamp.pgm"
        write_pgm(p, Signal.from_array(img))
        back = read_pgm(p).plane()
        assert back[0, 0] == 0.0 and back[1, 0] == 1.0

    def test_header_comments_tolerated(self, tmp_path):
        p = tmp_path / "c.pgm"
        p.write_bytes(b"P5\n# a comment\n2 2\n255\n" + bytes([0, 128, 255, 64]))
        img = read_pgm(p).plane()
        assert img.shape == (2, 2)
        assert img[0, 1] == pytest.approx(128 / 255)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "x.pgm"
        p.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 12)
        with pytest.raises(FormatError):
            read_pgm(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "t.pgm"
        p.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 5)
        with pytest.raises(FormatError):
            read_pgm(p)


class TestModelBinary:
    def test_roundtrip(self, tmp_path):
        model = DenseAutoencoder.initialize((10, 4, 10), seed=3)
        p = tmp_path / "m.wnae"
        save_model(p, model)
        back = load_model(p)
        assert back.widths == (10, 4, 10)
        np.testing.assert_array_equal(back.flat_params(), model.flat_params())

    def test_magic_checked(self, tmp_path):
        p = tmp_path / "bad.wnae"
        p.write_bytes(b"XXXX" + b"\x00" * 16)
        with pytest.raises(FormatError):
            load_model(p)

    def test_payload_length_checked(self, tmp_path):
        model = DenseAutoencoder.initialize((4, 4), seed=4)
        p = tmp_path / "short.wnae"
        save_model(p, model)
        p.write_bytes(p.read_bytes()[:-8])
        with pytest.raises(FormatError):
            load_model(p)


class TestCsv:
    def test_floats_roundtrip_via_repr(self, tmp_path):
        p = tmp_path / "t.csv"
        value = 0.1 + 0.2  # not exactly representable as "0.3"
        write_csv(p, ["a", "b"], [(1, value)])
        lines = p.read_text().strip().splitlines()
        assert lines[0] == "a,b"
        assert float(lines[1].split(",")[1]) == value
