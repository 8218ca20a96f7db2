"""
Tests for the dependence models.

What this tests:
- Mixing distributions (finite support, discrete phase-type)
- Builders and parameter validation
- Y-transform, marginal and joint transforms against direct formulas
- Moments and the stability guard
- JSON model files (schema validation, round trip)
- Exact samplers (pairs and stationary first pair)
"""

import json
import sys
from pathlib import Path

import numpy as np
import pytest

# Add project root to path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from common.errors import InvalidDistribution, InvalidModelError, SingularMatrix, StabilityViolation
from services.inversion import evaluate, erlang_tail
from services.models import (
    FAMILY_INDEPENDENT,
    FAMILY_KIBBLE_MORAN,
    FAMILY_NEGATIVE,
    DiscretePhaseType,
    FiniteSupport,
    build_dph_scenario,
    build_scenario,
    check_stability,
    cheriyan_ramabhadran,
    joint_lst,
    kibble_moran,
    load_model,
    marginal_b_lst,
    marginal_b_tail,
    mm1,
    model_from_dict,
    model_to_dict,
    moments,
    sample_pairs,
    sample_residual_pairs,
    uniform_scenario,
    y_transform,
    y_transform_at,
)


@pytest.mark.unit
class TestMixing:
    """Test mixing distributions."""

    def test_finite_support_moments(self):
        """Test mean and variance of a finite mixing law."""
        mix = FiniteSupport((0.25, 0.25, 0.5))
        assert mix.K == 3
        assert mix.mean() == pytest.approx(2.25)
        assert mix.variance() == pytest.approx(0.25 * 1 + 0.25 * 4 + 0.5 * 9 - 2.25**2)

    def test_symmetry(self):
        """Test symmetric and non-symmetric weights."""
        assert FiniteSupport((0.2, 0.6, 0.2)).is_symmetric()
        assert not FiniteSupport((0.7, 0.3)).is_symmetric()

    def test_weights_must_sum_to_one(self):
        """Test invalid weights raise InvalidDistribution."""
        with pytest.raises(InvalidDistribution):
            FiniteSupport((0.5, 0.6))
        with pytest.raises(InvalidDistribution):
            FiniteSupport((1.5, -0.5))

    def test_geometric_phase_type(self):
        """Test a one-state DPH is geometric: mean 1/p, pgf p z / (1 - (1-p) z)."""
        p = 0.4
        mix = DiscretePhaseType(np.array([1.0]), np.array([[1.0 - p]]))
        assert mix.mean() == pytest.approx(1.0 / p)
        assert mix.variance() == pytest.approx((1.0 - p) / p**2)
        z = 0.3
        assert mix.pgf(z) == pytest.approx(p * z / (1.0 - (1.0 - p) * z))

    def test_resolvent_polynomials(self):
        """Test N(w)/chi(w) equals alpha (wI - T)^-1 t at a few points."""
        T = np.array([[0.2, 0.3], [0.1, 0.4]])
        mix = DiscretePhaseType(np.array([0.6, 0.4]), T)
        N, chi = mix.resolvent_polynomials()
        for w in (1.5, 2.0 + 1.0j, 3.0):
            direct = mix.alpha @ np.linalg.solve(w * np.eye(2) - T, mix.exit_vector)
            assert N(w) / chi(w) == pytest.approx(direct)

    def test_triangular_eigen_roots(self):
        """Test the diagonal of a bidiagonal T gives one eigenvalue of full multiplicity."""
        mix = kibble_moran(3, 0.5, 1.0, 2.0).mixing
        roots = mix.eigen_roots()
        assert len(roots) == 1
        assert roots[0].multiplicity == 3
        assert roots[0].location == pytest.approx(0.5)

    def test_singular_resolvent_rejected(self):
        """Test I - T singular raises SingularMatrix."""
        with pytest.raises((SingularMatrix, InvalidModelError)):
            DiscretePhaseType(np.array([1.0]), np.array([[1.0]]))


@pytest.mark.unit
class TestBuilders:
    """Test builders and validation."""

    def test_components_negative(self):
        """Test the negative scenario pairs order i with K + 1 - i."""
        m = uniform_scenario("negative", 3, 1.0, 2.0)
        assert m.family == FAMILY_NEGATIVE
        assert [(c.a_order, c.b_order) for c in m.components] == [(1, 3), (2, 2), (3, 1)]

    def test_components_independent(self):
        """Test the independent scenario has K^2 components with product weights."""
        m = build_scenario("independent", 2, [0.3, 0.7], 1.0, 2.0)
        assert m.family == FAMILY_INDEPENDENT
        weights = {(c.a_order, c.b_order): c.weight for c in m.components}
        assert weights[(1, 2)] == pytest.approx(0.21)
        assert sum(weights.values()) == pytest.approx(1.0)

    def test_zero_weights_dropped(self):
        """Test components of zero weight are skipped."""
        m = build_scenario("positive", 2, [1.0, 0.0], 1.0, 2.0)
        assert len(m.components) == 1

    def test_invalid_rates(self):
        """Test nonpositive rates raise InvalidModelError."""
        with pytest.raises(InvalidModelError):
            build_scenario("positive", 1, [1.0], -1.0, 2.0)

    def test_weight_count_mismatch(self):
        """Test K must match the number of weights."""
        with pytest.raises(InvalidDistribution):
            build_scenario("positive", 3, [0.5, 0.5], 1.0, 2.0)

    def test_negative_needs_finite_support(self):
        """Test phase-type mixing is refused for the negative scenario."""
        with pytest.raises(InvalidModelError):
            build_dph_scenario("negative", [1.0], [[0.5]], 1.0, 2.0)

    def test_phase_type_defect_rejected(self):
        """Test alpha summing below 1 (M = 0 possible) is refused."""
        with pytest.raises(InvalidDistribution):
            build_dph_scenario("positive", [0.5], [[0.5]], 1.0, 2.0)

    def test_kibble_moran_family(self):
        """Test Kibble-Moran keeps order and p."""
        m = kibble_moran(2, 0.5, 1.0, 2.0)
        assert m.family == FAMILY_KIBBLE_MORAN
        assert m.order == 2
        assert m.mixing.mean() == pytest.approx(4.0)


@pytest.mark.unit
class TestTransforms:
    """Test transforms against direct formulas."""

    @pytest.mark.parametrize("kind", ["positive", "independent", "negative"])
    def test_y_transform_matches_joint(self, kind):
        """Test E exp(-sY) = E exp(sA - sB/c) for the mixed-Erlang scenarios."""
        m = build_scenario(kind, 3, [0.2, 0.5, 0.3], 1.0, 2.0, c=1.5)
        yt = y_transform(m)
        for s in (0.3, -0.7, 0.2 + 0.4j):
            assert yt(s) == pytest.approx(joint_lst(m, -s, s / m.c), rel=1e-10)

    def test_y_transform_at_zero(self):
        """Test the transform equals 1 at s = 0."""
        for m in (mm1(1.0, 2.0), kibble_moran(2, 0.5, 1.0, 3.0), cheriyan_ramabhadran((1, 2, 1), (1.0, 0.5, 2.0))):
            assert y_transform(m)(0.0) == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "m",
        [
            uniform_scenario("positive", 4, 0.5, 1.0),
            uniform_scenario("independent", 3, 1.0, 2.0, c=1.5),
            build_scenario("negative", 3, [0.2, 0.5, 0.3], 0.75, 1.0),
            kibble_moran(2, 0.5, 1.0, 3.0),
            cheriyan_ramabhadran((1, 2, 1), (1.0, 0.5, 2.0), c=2.0),
        ],
        ids=["positive", "independent", "negative", "kibble-moran", "cheriyan"],
    )
    def test_slope_at_zero_is_minus_mean(self, m):
        """Test d/ds E exp(-sY) at 0 equals -E Y, by central differences and in closed form."""
        yt = y_transform(m)
        h = 1e-5
        slope = (complex(yt(h)) - complex(yt(-h))).real / (2 * h)
        assert slope == pytest.approx(-moments(m).EY, rel=1e-6)
        assert complex(yt.derivative_at(0.0)).real == pytest.approx(-moments(m).EY, rel=1e-10)

    def test_transform_at_point_matches_rational_form(self):
        """Test y_transform_at agrees with f/g away from the poles."""
        m = kibble_moran(2, 0.5, 1.0, 3.0)
        yt = y_transform(m)
        for s in (0.3, -0.4, 0.1 + 0.2j):
            assert y_transform_at(m, s) == pytest.approx(complex(yt(s)), rel=1e-10)

    def test_phase_type_positive_matches_joint(self):
        """Test the resolvent construction for Kibble-Moran against the direct resolvent."""
        m = kibble_moran(2, 0.4, 1.0, 3.0)
        yt = y_transform(m)
        for s in (0.25, -1.0, 0.1 - 0.3j):
            assert yt(s) == pytest.approx(joint_lst(m, -s, s), rel=1e-9)

    def test_phase_type_independent_matches_joint(self):
        """Test the independent phase-type transform is a product of pgfs."""
        m = build_dph_scenario("independent", [1.0], [[0.5]], 1.0, 3.0)
        yt = y_transform(m)
        for s in (0.2, -0.5):
            assert yt(s) == pytest.approx(joint_lst(m, -s, s), rel=1e-9)

    def test_cheriyan_matches_joint(self):
        """Test the Cheriyan-Ramabhadran transform with c != 1."""
        m = cheriyan_ramabhadran((1, 2, 1), (1.0, 0.5, 2.0), c=2.0)
        yt = y_transform(m)
        for s in (0.2, -0.4):
            assert yt(s) == pytest.approx(joint_lst(m, -s, s / m.c), rel=1e-9)

    def test_known_denominator_roots(self):
        """Test the Y-transform carries its pole set with full multiplicities."""
        m = uniform_scenario("positive", 4, 1.0, 2.0)
        poles = y_transform(m).poles()
        assert poles.count == y_transform(m).den.degree
        assert sorted(r.multiplicity for r in poles) == [4, 4]

    def test_marginal_b_tail(self):
        """Test the B tail of a pair mixture is the Erlang mixture and matches the transform route."""
        m = build_scenario("positive", 2, [0.4, 0.6], 1.0, 2.0)
        u = np.array([0.0, 0.5, 2.0])
        expected = 0.4 * evaluate(erlang_tail(1, 2.0), u) + 0.6 * evaluate(erlang_tail(2, 2.0), u)
        np.testing.assert_allclose(evaluate(marginal_b_tail(m), u), expected, atol=1e-12)
        assert marginal_b_lst(m)(0.0) == pytest.approx(1.0)

    def test_marginal_b_tail_phase_type(self):
        """Test the phase-type B tail starts at 1 and has mean E M / mu."""
        from services.inversion import mean

        m = kibble_moran(2, 0.5, 1.0, 3.0)
        tail = marginal_b_tail(m)
        assert evaluate(tail, 0.0) == pytest.approx(1.0, abs=1e-9)
        assert mean(tail) == pytest.approx(4.0 / 3.0, rel=1e-9)


@pytest.mark.unit
class TestMoments:
    """Test moments and stability."""

    def test_mm1_moments(self):
        """Test M/M/1: rho = lambda/mu, no correlation."""
        mom = moments(mm1(1.0, 2.0))
        assert mom.EA == pytest.approx(1.0)
        assert mom.EB == pytest.approx(0.5)
        assert mom.rho == pytest.approx(0.5)
        assert mom.EY == pytest.approx(-0.5)

    def test_correlation_signs(self):
        """Test positive, zero and negative correlation across scenarios."""
        corr = {k: moments(uniform_scenario(k, 4, 1.0, 2.0)).corr for k in ("positive", "independent", "negative")}
        assert corr["positive"] > 0
        assert corr["independent"] == pytest.approx(0.0, abs=1e-14)
        assert corr["negative"] < 0

    def test_phase_type_moments_match_finite(self):
        """Test Kibble-Moran with p = 1 has the moments of the positive scenario with M = m."""
        km = moments(kibble_moran(2, 1.0, 1.0, 3.0))
        pos = moments(build_scenario("positive", 2, [0.0, 1.0], 1.0, 3.0))
        assert km.EA == pytest.approx(pos.EA)
        assert km.VarB == pytest.approx(pos.VarB)
        assert km.Cov == pytest.approx(pos.Cov)

    def test_stability_guard(self):
        """Test rho >= 1 raises StabilityViolation."""
        with pytest.raises(StabilityViolation):
            check_stability(mm1(2.0, 1.0))
        with pytest.raises(StabilityViolation):
            check_stability(mm1(1.0, 1.0))

    def test_speed_enters_rho(self):
        """Test rho = E B / (c E A)."""
        assert moments(mm1(1.0, 1.0, c=2.0)).rho == pytest.approx(0.5)


@pytest.mark.unit
class TestModelFiles:
    """Test JSON model files."""

    def test_round_trip(self, tmp_path):
        """Test model_to_dict -> file -> load_model reproduces the model."""
        m = build_scenario("negative", 3, [0.2, 0.6, 0.2], 0.5, 1.0, c=1.0)
        path = tmp_path / "model.json"
        path.write_text(json.dumps(model_to_dict(m)))
        loaded = load_model(path)
        assert loaded.family == m.family
        assert loaded.mixing.weights == m.mixing.weights
        assert loaded.lam == m.lam

    def test_lambda_alias(self):
        """Test the 'lambda' key is accepted."""
        m = model_from_dict({"family": "KibbleMoran", "lambda": 1.0, "mu": 2.0, "m": 2, "p": 0.5})
        assert m.lam == 1.0
        assert m.order == 2

    def test_unknown_field_rejected(self):
        """Test extra keys are refused."""
        with pytest.raises(InvalidModelError):
            model_from_dict({"family": "MixedErlangPositive", "lambda": 1.0, "mu": 2.0, "weights": [1.0], "speed": 2})

    def test_missing_field_reported(self):
        """Test missing required fields are listed."""
        with pytest.raises(InvalidModelError) as exc:
            model_from_dict({"family": "MixedErlangPositive", "lambda": 1.0, "mu": 2.0})
        assert exc.value.details["missing"] == ["weights"]

    def test_invalid_json(self, tmp_path):
        """Test malformed JSON raises InvalidModelError."""
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(InvalidModelError):
            load_model(path)

    def test_cheriyan_from_dict(self):
        """Test the Cheriyan-Ramabhadran schema."""
        m = model_from_dict({"family": "CheriyanRamabhadran", "orders": [1, 2, 1], "beta": [1.0, 0.5, 2.0]})
        assert m.cr_orders == (1, 2, 1)


@pytest.mark.unit
class TestSampling:
    """Test exact samplers against moments."""

    N = 200_000

    @pytest.mark.parametrize("kind", ["positive", "independent", "negative"])
    def test_pair_moments(self, kind):
        """Test sample means and covariance within a few standard errors."""
        m = uniform_scenario(kind, 3, 1.0, 2.0)
        mom = moments(m)
        rng = np.random.default_rng(7)
        a, b = sample_pairs(m, self.N, rng)
        assert abs(a.mean() - mom.EA) < 5 * np.sqrt(mom.VarA / self.N)
        assert abs(b.mean() - mom.EB) < 5 * np.sqrt(mom.VarB / self.N)
        cov = np.cov(a, b)[0, 1]
        assert abs(cov - mom.Cov) < 0.02

    def test_phase_type_pairs(self):
        """Test Kibble-Moran draws have the phase-type mean."""
        m = kibble_moran(2, 0.5, 1.0, 3.0)
        a, b = sample_pairs(m, self.N, np.random.default_rng(3))
        assert abs(a.mean() - 4.0) < 5 * np.sqrt(moments(m).VarA / self.N)

    def test_residual_pair_mean(self):
        """Test E A_res = E A^2 / (2 E A) for the stationary first pair."""
        m = uniform_scenario("positive", 2, 1.0, 2.0)
        mom = moments(m)
        a, _ = sample_residual_pairs(m, self.N, np.random.default_rng(11))
        expected = (mom.VarA + mom.EA**2) / (2 * mom.EA)
        assert abs(a.mean() - expected) < 5 * a.std() / np.sqrt(self.N)

    def test_residual_pair_phase_type(self):
        """Test the size-biased phase-type sampler: E A_res = E A^2 / (2 E A)."""
        m = kibble_moran(2, 0.5, 1.0, 3.0)
        mom = moments(m)
        a, _ = sample_residual_pairs(m, self.N, np.random.default_rng(5))
        expected = (mom.VarA + mom.EA**2) / (2 * mom.EA)
        assert abs(a.mean() - expected) < 5 * a.std() / np.sqrt(self.N)

    @pytest.mark.parametrize(
        "m",
        [
            uniform_scenario("positive", 3, 1.0, 2.0),
            build_scenario("negative", 3, [0.2, 0.5, 0.3], 1.0, 2.0),
            kibble_moran(2, 0.5, 1.0, 3.0),
            cheriyan_ramabhadran((1, 1, 1), (1.0, 0.5, 1.0)),
        ],
        ids=["positive", "negative", "kibble-moran", "cheriyan"],
    )
    def test_empirical_joint_transform(self, m):
        """Test the sample mean of exp(-s1 A - s2 B) against joint_lst on a small grid."""
        a, b = sample_pairs(m, self.N, np.random.default_rng(17))
        for s1, s2 in ((0.5, 0.5), (1.0, 0.2), (0.2, 1.0)):
            values = np.exp(-s1 * a - s2 * b)
            tol = 5 * values.std() / np.sqrt(self.N)
            assert abs(values.mean() - joint_lst(m, s1, s2).real) < tol

    def test_deterministic(self):
        """Test identical seeds give identical draws."""
        m = uniform_scenario("independent", 2, 1.0, 2.0)
        a1, b1 = sample_pairs(m, 100, np.random.default_rng(1))
        a2, b2 = sample_pairs(m, 100, np.random.default_rng(1))
        np.testing.assert_array_equal(a1, a2)
        np.testing.assert_array_equal(b1, b2)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
