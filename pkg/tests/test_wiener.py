import numpy as np
import pytest
import hypothesis
from hypothesis import strategies as st

from wienerlab.errors import (
    OracleSizeError,
    ShapeError,
    SingularSystemError,
    UndefinedQuotientError,
)
from wienerlab.spectral import LagFilter, LagGrid, Signal, WindowSpec, make_window
from wienerlab.wiener import (
    WienerConfig,
    concentration,
    delta_filter,
    rayleigh_quotient,
    ti_distance,
    wiener_filter,
    wiener_filter_direct,
    wiener_loss,
)


def random_signal(shape, seed):
    return Signal.from_array(np.random.default_rng(seed).random(shape))


def margin_image(n, margin, seed):
    """Image with a zero border so translations never wrap in padded space."""
    img = np.zeros((n, n))
    img[: n - margin, : n - margin] = np.random.default_rng(seed).random((n - margin, n - margin))
    return img


class TestWienerFilter:
    @pytest.mark.parametrize("lam", [1e-3, 1.0, 250.0])
    def test_identity_gives_delta(self, lam):
        y = random_signal((9, 9), 10)
        v = wiener_filter(y, y, WienerConfig(lam=lam))
        d = delta_filter(v.grid)
        assert np.abs(v.data - d.data).max() < 1e-10

    def test_translation_gives_shifted_delta(self):
        img = margin_image(16, 5, 11)
        y = Signal.from_array(img)
        x = Signal.from_array(np.roll(img, (2, 4), axis=(0, 1)))
        v = wiener_filter(x, y, WienerConfig(lam=1e-12))
        expected = np.roll(delta_filter(v.grid).data, (2, 4), axis=(1, 2))
        assert np.abs(v.data - expected).max() < 1e-9

    def test_matches_direct_oracle_1d(self):
        rng = np.random.default_rng(12)
        for lam in (0.5,):
            n = 12
            x = Signal(rng.random(n), (n,))
            y = Signal(rng.random(n), (n,))
            vf = wiener_filter(x, y, WienerConfig(lam=lam))
            vd = wiener_filter_direct(x, y, WienerConfig(lam=lam))
            scale = np.abs(vd.data).max()
            assert np.abs(vf.data - vd.data).max() / scale < 1e-8

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            wiener_filter(random_signal((4, 4), 0), random_signal((5, 5), 1), WienerConfig())

    def test_lambda_zero_zero_bin_is_singular(self):
        y = Signal(np.zeros(8), (8,))
        x = random_signal((8,), 3)
        with pytest.raises(SingularSystemError):
            wiener_filter(x, y, WienerConfig(lam=0.0))

    def test_multichannel_filters_are_per_plane(self):
        rng = np.random.default_rng(13)
        planes = rng.random((3, 6, 6))
        s = Signal.from_planes(planes)
        v = wiener_filter(s, s, WienerConfig(lam=1.0))
        assert v.channels == 3
        for c in range(3):
            single = wiener_filter(
                Signal.from_array(planes[c]), Signal.from_array(planes[c]), WienerConfig(lam=1.0)
            )
            np.testing.assert_allclose(v.data[c], single.data[0], atol=1e-14)


class TestDirectOracle:
    def test_identity_any_lambda(self):
        y = random_signal((6,), 20)
        v = wiener_filter_direct(y, y, WienerConfig(lam=3.0))
        d = delta_filter(v.grid)
        assert np.abs(v.data - d.data).max() < 1e-10

    def test_size_cap(self):
        big = random_signal((64, 64), 21)  # padded 128x128 = 16384 > 4096
        with pytest.raises(OracleSizeError):
            wiener_filter_direct(big, big, WienerConfig(lam=1.0))

    @pytest.mark.parametrize("lam", [0.1, 1.0, 250.0])
    def test_oracle_equivalence_1d_sweep(self, lam):
        rng = np.random.default_rng(22)
        for _ in range(5):
            n = int(rng.integers(8, 33))
            x = Signal(rng.random(n), (n,))
            y = Signal(rng.random(n), (n,))
            vf = wiener_filter(x, y, WienerConfig(lam=lam))
            vd = wiener_filter_direct(x, y, WienerConfig(lam=lam))
            assert np.abs(vf.data - vd.data).max() / np.abs(vd.data).max() < 1e-8

    def test_oracle_equivalence_2d(self):
        rng = np.random.default_rng(23)
        for _ in range(3):
            x = Signal.from_array(rng.random((6, 6)))
            y = Signal.from_array(rng.random((6, 6)))
            vf = wiener_filter(x, y, WienerConfig(lam=1.0))
            vd = wiener_filter_direct(x, y, WienerConfig(lam=1.0))
            assert np.abs(vf.data - vd.data).max() / np.abs(vd.data).max() < 1e-8


class TestRayleighQuotient:
    def test_delta_with_zero_center_penalty_is_zero(self):
        g = LagGrid((8, 8))
        v = delta_filter(g)
        pen = make_window(WindowSpec("inverted_laplace", b=2.0), g)
        assert rayleigh_quotient(v, pen) == 0.0

    def test_one_hot_off_center(self):
        g = LagGrid((8,))
        data = np.zeros(8)
        data[6] = 2.5  # lag +2
        v = LagFilter(data, g)
        pen = make_window(WindowSpec("inverted_laplace", b=2.0), g)
        expect = (1.0 - np.exp(-1.0)) ** 2
        assert rayleigh_quotient(v, pen) == pytest.approx(expect, rel=1e-12)

    def test_two_bin_example(self):
        g = LagGrid((2,))
        v = LagFilter(np.array([1.0, 1.0]), g)
        pen = LagFilter(np.array([0.0, 0.7]), g)
        assert rayleigh_quotient(v, pen) == pytest.approx(0.7**2 / 2)

    def test_zero_filter_undefined(self):
        g = LagGrid((4,))
        with pytest.raises(UndefinedQuotientError):
            rayleigh_quotient(LagFilter(np.zeros(4), g), delta_filter(g))

    @hypothesis.given(c=st.floats(-10, 10).filter(lambda c: abs(c) > 1e-3), seed=st.integers(0, 99))
    def test_scale_invariance(self, c, seed):
        g = LagGrid((12,))
        rng = np.random.default_rng(seed)
        v = LagFilter(rng.standard_normal(12), g)
        pen = make_window(WindowSpec("inverted_laplace", b=1.5), g)
        scaled = LagFilter(c * v.data[0], g)
        assert rayleigh_quotient(scaled, pen) == pytest.approx(
            rayleigh_quotient(v, pen), rel=1e-9
        )


class TestWienerLoss:
    def whitening(self, shape, spec=("laplace", 2.0, 0.1)):
        return make_window(WindowSpec(*spec), LagGrid(tuple(2 * n for n in shape)))

    def test_zero_at_equality(self):
        y = random_signal((8, 8), 30)
        w = self.whitening(y.shape)
        assert wiener_loss(y, y, w, WienerConfig(lam=5.0)) == pytest.approx(0.0, abs=1e-25)

    def test_shift_by_three_frozen_value(self):
        # translated pair -> filter is a delta at lag 3; with inverted_laplace(b=2)
        # whitening the loss is (1 - exp(-1.5))^2 / 2 = 0.30176...; frozen after
        # computing it with both the fast path and the quadrature-free formula
        rng = np.random.default_rng(31)
        y = np.zeros(16)
        y[:12] = rng.random(12)
        x = np.roll(y, 3)
        w = make_window(WindowSpec("inverted_laplace", b=2.0), LagGrid((32,)))
        loss = wiener_loss(
            Signal(x, (16,)), Signal(y, (16,)), w, WienerConfig(lam=1e-12)
        )
        assert loss == pytest.approx(0.5 * (1.0 - np.exp(-1.5)) ** 2, abs=1e-9)
        assert loss == pytest.approx(0.301763, abs=5e-7)

    def test_nonnegative_and_zero_only_at_delta(self):
        rng = np.random.default_rng(32)
        w = self.whitening((6, 6))
        for _ in range(50):
            a = Signal.from_array(rng.random((6, 6)))
            b = Signal.from_array(rng.random((6, 6)))
            val = wiener_loss(a, b, w, WienerConfig(lam=1.0))
            assert val >= 0.0
            assert val > 1e-8  # random pairs never produce the identity filter

    def test_batch_reduces_by_mean(self):
        rng = np.random.default_rng(33)
        preds = [Signal.from_array(rng.random((6, 6))) for _ in range(3)]
        targs = [Signal.from_array(rng.random((6, 6))) for _ in range(3)]
        w = self.whitening((6, 6))
        cfg = WienerConfig(lam=1.0)
        batch = wiener_loss(preds, targs, w, cfg)
        singles = [wiener_loss(p, t, w, cfg) for p, t in zip(preds, targs)]
        assert batch == pytest.approx(np.mean(singles), rel=1e-12)

    def test_swap_direction_changes_filter_argument_order(self):
        a = random_signal((8,), 34)
        b = random_signal((8,), 35)
        w = self.whitening((8,))
        cfg = WienerConfig(lam=1.0)
        assert wiener_loss(a, b, w, cfg, swap=True) == pytest.approx(
            wiener_loss(b, a, w, cfg), rel=1e-12
        )


class TestTiDistance:
    def test_self_distance_hits_global_minimum(self):
        y = random_signal((12, 12), 40)
        val = ti_distance(y, y, WienerConfig(lam=1.0))
        nbins = 24 * 24
        assert val == pytest.approx(-np.sqrt(nbins - 1), rel=1e-9)

    def test_translation_invariance(self):
        img = margin_image(16, 5, 41)
        y = Signal.from_array(img)
        cfg = WienerConfig(lam=1e-12)
        base = ti_distance(y, y, cfg)
        for k in [(1, 0), (0, 3), (4, 4), (5, 2)]:
            shifted = Signal.from_array(np.roll(img, k, axis=(0, 1)))
            assert ti_distance(shifted, y, cfg) == pytest.approx(base, abs=1e-9)

    def test_noise_is_farther_than_self(self):
        rng = np.random.default_rng(42)
        cfg = WienerConfig(lam=1.0)
        wins = 0
        for _ in range(100):
            y = Signal.from_array(rng.random((12, 12)))
            noise = Signal.from_array(rng.random((12, 12)))
            wins += int(ti_distance(y, y, cfg) <= ti_distance(noise, y, cfg))
        assert wins >= 99

    def test_constant_filter_returns_zero_with_warning(self):
        # all-zero target with lam=0 produces the all-zero (constant) filter
        a = Signal(np.zeros(8), (8,))
        b = random_signal((8,), 43)
        with pytest.warns(RuntimeWarning):
            val = ti_distance(a, b, WienerConfig(lam=0.0))
        assert val == 0.0


class TestConcentration:
    def test_delta_is_one(self):
        assert concentration(delta_filter(LagGrid((8, 8)))) == pytest.approx(1.0)

    def test_uniform_is_one_over_n(self):
        g = LagGrid((10,))
        v = LagFilter(np.full(10, 0.3), g)
        assert concentration(v) == pytest.approx(0.1)

    def test_shifted_delta_is_zero(self):
        g = LagGrid((8,))
        data = np.zeros(8)
        data[2] = 1.0
        assert concentration(LagFilter(data, g)) == 0.0

    def test_zero_filter_undefined(self):
        with pytest.raises(UndefinedQuotientError):
            concentration(LagFilter(np.zeros(8), LagGrid((8,))))
