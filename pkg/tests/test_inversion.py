"""
Tests for the exponential-polynomial algebra and transform inversion.

What this tests:
- Erlang building blocks against scipy.stats
- Functionals: evaluate, mean, stop-loss, quantile, Laplace transform
- Convolution closed forms (equal and distinct rates)
- Partial-fraction inversion with atoms, repeated poles and bad poles
- Exact stop-loss transform of D = A - B
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from common.errors import InvalidModelError, PoleOnAxis
from services.inversion import (
    ExpPolyMix,
    add,
    convolve,
    density_from_tail,
    difference_mean,
    difference_stop_loss,
    erlang_density,
    erlang_tail,
    evaluate,
    expect_shifted,
    integrate_tail,
    invert_tail,
    laplace,
    mean,
    quantile,
    rescale,
    scale,
    stop_loss,
)
from services.models import build_scenario, kibble_moran, mm1
from services.polyrat import Polynomial, RationalFn, Root, RootSet

U = np.array([0.0, 0.3, 1.0, 2.5, 6.0])


@pytest.mark.unit
class TestExpPolyMix:
    """Test construction and functionals."""

    def test_positive_rates_rejected(self):
        """Test terms must decay."""
        with pytest.raises(ValueError):
            ExpPolyMix.from_terms([(1.0, 0, 0.5)])

    @pytest.mark.parametrize("order", [1, 3, 6])
    def test_erlang_tail_matches_scipy(self, order):
        """Test the Erlang tail against the gamma survival function."""
        np.testing.assert_allclose(evaluate(erlang_tail(order, 2.0), U), stats.gamma.sf(U, order, scale=0.5), atol=1e-13)

    def test_erlang_density_matches_scipy(self):
        """Test the Erlang density against the gamma pdf."""
        np.testing.assert_allclose(evaluate(erlang_density(3, 1.5), U), stats.gamma.pdf(U, 3, scale=1 / 1.5), atol=1e-13)

    def test_mean_and_stop_loss(self):
        """Test E X and E(X - t)+ for Erlang(2, 1): mean 2, stop-loss (2 + t) e^{-t}."""
        tail = erlang_tail(2, 1.0)
        assert mean(tail) == pytest.approx(2.0)
        np.testing.assert_allclose(stop_loss(tail, U), (2.0 + U) * np.exp(-U), atol=1e-12)
        with pytest.raises(ValueError):
            stop_loss(tail, -1.0)

    def test_quantile(self):
        """Test exponential quantile and the atom short-cut."""
        assert quantile(erlang_tail(1, 2.0), 0.95) == pytest.approx(np.log(20.0) / 2.0, abs=1e-9)
        atom_heavy = ExpPolyMix.from_terms([(0.02, 0, -1.0)], atom0=0.98)
        assert quantile(atom_heavy, 0.95) == 0.0
        with pytest.raises(ValueError):
            quantile(erlang_tail(1, 1.0), 1.0)

    def test_laplace_of_density(self):
        """Test the Laplace transform of an Erlang density."""
        s = np.array([0.5, 1.0 + 1.0j])
        np.testing.assert_allclose(laplace(erlang_density(3, 2.0), s), (2.0 / (2.0 + s)) ** 3, rtol=1e-12)

    def test_add_and_scale(self):
        """Test sums merge equal terms and scale keeps or replaces the atom."""
        f = add(erlang_tail(1, 1.0), erlang_tail(1, 1.0))
        assert len(f) == 1
        g = scale(ExpPolyMix.from_terms([(1.0, 0, -1.0)], atom0=0.5), 2.0, atom=0.1)
        assert g.atom0 == 0.1
        assert evaluate(g, 0.0) == pytest.approx(2.0)

    def test_rescale(self):
        """Test the tail of 2X from the tail of X."""
        tail = erlang_tail(2, 1.0)
        np.testing.assert_allclose(evaluate(rescale(tail, 2.0), U), evaluate(tail, U / 2.0), atol=1e-14)

    def test_density_integral_inverse(self):
        """Test integrating the density recovers the tail."""
        tail = erlang_tail(3, 1.2)
        back = integrate_tail(density_from_tail(tail))
        np.testing.assert_allclose(evaluate(back, U), evaluate(tail, U), atol=1e-12)

    def test_expect_shifted(self):
        """Test E exp(-(t + Y)) = exp(-t)/2 for Y ~ Exp(1)."""
        g = ExpPolyMix.from_terms([(1.0, 0, -1.0)])
        np.testing.assert_allclose(expect_shifted(g, erlang_density(1, 1.0), U), np.exp(-U) / 2.0, atol=1e-14)


@pytest.mark.unit
class TestConvolution:
    """Test convolution closed forms."""

    def test_distinct_rates(self):
        """Test Exp(1) * Exp(2) = 2 (e^{-u} - e^{-2u})."""
        f = convolve(erlang_density(1, 1.0), erlang_density(1, 2.0))
        np.testing.assert_allclose(evaluate(f, U), 2.0 * (np.exp(-U) - np.exp(-2.0 * U)), atol=1e-13)

    def test_equal_rates(self):
        """Test Exp(1) * Erlang(2, 1) = Erlang(3, 1)."""
        f = convolve(erlang_density(1, 1.0), erlang_density(2, 1.0))
        np.testing.assert_allclose(evaluate(f, U), evaluate(erlang_density(3, 1.0), U), atol=1e-13)

    def test_atoms(self):
        """Test point masses convolve with densities and with each other."""
        law = ExpPolyMix.from_terms([(0.5, 0, -1.0)], atom0=0.5)  # 0.5 delta + 0.5 Exp(1)
        out = convolve(law, erlang_density(1, 1.0))
        assert out.atom0 == 0.0
        expected = 0.5 * np.exp(-U) + 0.5 * U * np.exp(-U)
        np.testing.assert_allclose(evaluate(out, U), expected, atol=1e-13)
        assert convolve(law, law).atom0 == pytest.approx(0.25)

    @staticmethod
    def _random_law(rng, atom):
        """Mixture of two Erlang laws with distinct rates, plus an optional point mass at 0."""
        rates = rng.choice([0.5, 1.0, 1.7, 2.5], size=2, replace=False)
        orders = rng.integers(1, 4, size=2)
        w = rng.uniform(0.2, 0.8)
        law = add(scale(erlang_density(int(orders[0]), rates[0]), w), scale(erlang_density(int(orders[1]), rates[1]), 1.0 - w))
        return scale(law, 1.0 - atom, atom=atom)

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_commutative(self, seed):
        """Test f * g = g * f on random mixtures."""
        rng = np.random.default_rng(seed)
        f, g = self._random_law(rng, 0.3), self._random_law(rng, 0.0)
        fg, gf = convolve(f, g), convolve(g, f)
        np.testing.assert_allclose(evaluate(fg, U), evaluate(gf, U), atol=1e-10)
        assert fg.atom0 == pytest.approx(gf.atom0)

    @pytest.mark.parametrize("seed", [4, 5, 6])
    def test_associative(self, seed):
        """Test (f * g) * h = f * (g * h) on random mixtures."""
        rng = np.random.default_rng(seed)
        f, g, h = self._random_law(rng, 0.2), self._random_law(rng, 0.0), self._random_law(rng, 0.4)
        left = convolve(convolve(f, g), h)
        right = convolve(f, convolve(g, h))
        np.testing.assert_allclose(evaluate(left, U), evaluate(right, U), atol=1e-10)
        assert left.atom0 == pytest.approx(right.atom0)


@pytest.mark.unit
class TestInversion:
    """Test partial-fraction inversion."""

    def test_exponential(self):
        """Test 2/(2 + s) inverts to e^{-2u}."""
        tail = invert_tail(RationalFn(Polynomial([2.0]), Polynomial([2.0, 1.0])))
        assert tail.atom0 == 0.0
        np.testing.assert_allclose(evaluate(tail, U), np.exp(-2.0 * U), atol=1e-13)

    def test_repeated_pole(self):
        """Test 1/(1 + s)^3 with a known triple pole inverts to the Erlang(3, 1) tail."""
        lst = RationalFn(Polynomial([1.0]), Polynomial.from_roots([-1.0] * 3), RootSet((Root(-1 + 0j, 3),)))
        np.testing.assert_allclose(evaluate(invert_tail(lst), U), evaluate(erlang_tail(3, 1.0), U), atol=1e-12)

    def test_atom_at_zero(self):
        """Test (1 + s/2)/(1 + s) = 1/2 + 1/2 Exp(1)."""
        tail = invert_tail(RationalFn(Polynomial([1.0, 0.5]), Polynomial([1.0, 1.0])))
        assert tail.atom0 == pytest.approx(0.5)
        np.testing.assert_allclose(evaluate(tail, U), 0.5 * np.exp(-U), atol=1e-13)

    def test_complex_poles_give_real_tail(self):
        """Test a conjugate pole pair inverts to a real tail that round-trips through the transform."""
        # LST with poles -1 +- 1j, L(0) = 1
        den = Polynomial.from_roots([-1 + 1j, -1 - 1j]).real()
        lst = RationalFn(Polynomial([2.0]), den)
        tail = invert_tail(lst)
        for s in (0.5, 1.0, 3.0):
            assert laplace(tail, s, include_atom=False).real == pytest.approx((1.0 - lst(s).real) / s, rel=1e-10)
        assert evaluate(tail, 0.0) == pytest.approx(1.0)

    def test_pole_in_right_half_plane(self):
        """Test a pole with Re >= 0 raises PoleOnAxis."""
        with pytest.raises(PoleOnAxis):
            invert_tail(RationalFn(Polynomial([1.0]), Polynomial([1.0, -1.0])))

    def test_unnormalized_rejected(self):
        """Test L(0) != 1 is refused."""
        with pytest.raises(ValueError):
            invert_tail(RationalFn(Polynomial([2.0]), Polynomial([1.0, 1.0])))

    def test_high_order_zero(self):
        """Test (1 + s/2)^6 / (1 + s)^7 with a known six-fold zero round-trips through the transform."""
        num = Polynomial.from_roots([-2.0] * 6, lead=2.0**-6)
        den = Polynomial.from_roots([-1.0] * 7)
        lst = RationalFn(num, den, RootSet((Root(-1 + 0j, 7),)), RootSet((Root(-2 + 0j, 6),)))
        tail = invert_tail(lst)
        assert evaluate(tail, 0.0) == pytest.approx(1.0, abs=1e-12)
        for s in (0.5, 1.0, 3.0):
            assert laplace(tail, s, include_atom=False).real == pytest.approx((1.0 - lst(s).real) / s, rel=1e-10)


@pytest.mark.unit
class TestDifferenceStopLoss:
    """Test E(D - t)+ for D = A - B."""

    def test_exponential_pair_closed_form(self):
        """Test A ~ Exp(1), B ~ Exp(2): 2/3 e^{-t} for t >= 0, 1/2 - t + e^{2t}/6 for t < 0."""
        m = mm1(1.0, 2.0)
        t = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
        expected = np.where(t >= 0, 2.0 / 3.0 * np.exp(-t), 0.5 - t + np.exp(2.0 * t) / 6.0)
        np.testing.assert_allclose(difference_stop_loss(m, t), expected, atol=1e-12)
        assert difference_mean(m) == pytest.approx(0.5)

    def test_continuity_at_zero(self):
        """Test the two branches agree at t = 0."""
        m = build_scenario("negative", 3, [0.2, 0.5, 0.3], 1.0, 2.0)
        left = difference_stop_loss(m, -1e-9)
        right = difference_stop_loss(m, 0.0)
        assert left == pytest.approx(right, abs=1e-8)

    def test_scalar_input(self):
        """Test a scalar t returns a float."""
        assert isinstance(difference_stop_loss(mm1(1.0, 2.0), 0.5), float)

    def test_large_negative_t_is_linear(self):
        """Test E(D - t)+ ~ E D - t far to the left."""
        m = build_scenario("positive", 2, [0.5, 0.5], 1.0, 2.0)
        assert difference_stop_loss(m, -40.0) == pytest.approx(difference_mean(m) + 40.0, abs=1e-10)

    def test_phase_type_refused(self):
        """Test phase-type mixing has no finite component list."""
        with pytest.raises(InvalidModelError):
            difference_mean(kibble_moran(2, 0.5, 1.0, 2.0))

    @pytest.mark.parametrize("kind", ["positive", "independent", "negative"])
    def test_convex_and_nonincreasing(self, kind):
        """Test E(D - t)+ has slopes in [-1, 0] that never decrease."""
        m = build_scenario(kind, 3, [0.2, 0.5, 0.3], 1.0, 2.0)
        t = np.linspace(-6.0, 6.0, 121)
        slopes = np.diff(difference_stop_loss(m, t)) / np.diff(t)
        assert np.all(slopes <= 1e-12)
        assert np.all(slopes >= -1.0 - 1e-12)
        assert np.all(np.diff(slopes) >= -1e-10)

    def test_waiting_stop_loss_shape(self):
        """Test E(W - t)+ of an Erlang mixture tail is convex and nonincreasing."""
        tail = add(scale(erlang_tail(3, 1.0), 0.6), scale(erlang_tail(1, 2.5), 0.4))
        t = np.linspace(0.0, 10.0, 101)
        sl = stop_loss(tail, t)
        assert np.all(np.diff(sl) <= 1e-14)
        assert np.all(np.diff(sl, n=2) >= -1e-12)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
