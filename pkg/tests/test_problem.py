import numpy as np
import pytest

from layeredbvp.errors import AssumptionViolated, QuadratureUnderResolved
from layeredbvp.problem import (
    QuadSpec,
    Regime,
    RegimeLabel,
    TwoParamProblem,
    classify_regime,
    compute_mu,
    energy_norm,
    layer_sample_grid,
    layer_widths,
    problem_from_dict,
    problem_to_dict,
    validate_assumptions,
)
from layeredbvp.series import Affine, Constant, Polynomial, Rational


def constant_problem(eps1=1.0, eps2=1.0, f=1.0):
    return TwoParamProblem(eps1, eps2, Constant(1.0), Constant(1.0), Constant(f))


class TestValidateAssumptions:
    def test_constants(self):
        rep = validate_assumptions(constant_problem())
        assert rep.beta == pytest.approx(1.0)
        assert rep.gamma == pytest.approx(1.0)
        assert rep.rho == pytest.approx(1.0)
        assert rep.satisfied

    def test_affine_convection(self):
        p = TwoParamProblem(0.5, 1.0, Affine(2.0, 1.0), Constant(1.0), Constant(1.0))
        rep = validate_assumptions(p)
        assert rep.rho == pytest.approx(1.0 - 0.5 * 1.0)
        assert rep.satisfied

    def test_violation_raises_with_location(self):
        p = TwoParamProblem(0.1, 0.1, Constant(1.0), Polynomial([0.0, 1.0]), Constant(1.0))
        with pytest.raises(AssumptionViolated) as exc:
            validate_assumptions(p)
        assert "c(x)" in str(exc.value)
        assert exc.value.location == pytest.approx(0.0, abs=1e-6)

    def test_non_strict_reports(self):
        p = TwoParamProblem(0.1, 0.1, Constant(1.0), Polynomial([0.0, 1.0]), Constant(1.0))
        rep = validate_assumptions(p, strict=False)
        assert not rep.satisfied
        assert rep.satisfied == (rep.beta > 0 and rep.gamma > 0 and rep.rho > 0)

    def test_fitted_growth_reasonable(self):
        # 1/(1+x): |g^(n)|/n! peaks at x=0 where it equals 1 for all n
        p = TwoParamProblem(0.5, 0.5, Constant(1.0), Rational([1.0], [1.0, 1.0]), Constant(1.0))
        rep = validate_assumptions(p)
        assert 0.8 <= rep.fitted_gamma_c <= 1.2
        assert rep.fitted_gamma_b == 0.0  # constant: no derivative growth

    def test_grid_points_precondition(self):
        with pytest.raises(ValueError):
            validate_assumptions(constant_problem(), grid_points=1)


class TestComputeMu:
    def test_golden_ratio_values(self):
        mu = compute_mu(constant_problem(1.0, 1.0))
        assert mu.mu0 == pytest.approx((np.sqrt(5) - 1) / 2, rel=1e-10)
        assert mu.mu1 == pytest.approx((np.sqrt(5) + 1) / 2, rel=1e-10)

    def test_closed_form_small_parameters(self):
        mu = compute_mu(constant_problem(0.01, 0.1))
        want0 = (-0.1 + np.sqrt(0.01 + 0.04)) / 0.02
        want1 = (0.1 + np.sqrt(0.01 + 0.04)) / 0.02
        assert mu.mu0 == pytest.approx(want0, rel=1e-10)
        assert mu.mu1 == pytest.approx(want1, rel=1e-10)

    def test_basic_inequalities(self):
        for eps1 in [1.0, 1e-2, 1e-4, 1e-6]:
            for eps2 in [1.0, 1e-1, 1e-2]:
                mu = compute_mu(constant_problem(eps1, eps2))
                assert eps2 * mu.mu0 <= 1 + 1e-12
                assert np.sqrt(eps1) * mu.mu0 <= 1 + 1e-12

    def test_mu1_monotone_as_eps1_decreases(self):
        vals = [compute_mu(constant_problem(e1, 0.1)).mu1 for e1 in [1e-1, 1e-2, 1e-3, 1e-4]]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_variable_coefficient_minimizer(self):
        # c increasing: both roots smallest at x = 0
        p = TwoParamProblem(0.01, 0.1, Constant(1.0), Affine(1.0, 1.0), Constant(1.0))
        mu = compute_mu(p)
        assert mu.argmin0 == pytest.approx(0.0, abs=1e-8)


class TestClassify:
    def test_table_rows(self):
        assert classify_regime(1e-6, 1e-2).index == 1
        assert classify_regime(1e-4, 1e-2).index == 2
        assert classify_regime(1e-2, 1e-3).index == 3

    def test_labels(self):
        r1 = classify_regime(1e-6, 1e-2)
        assert r1.label is RegimeLabel.CONVECTION_REACTION_DIFFUSION
        assert not r1.convection_diffusion
        r_cd = classify_regime(1e-4, 1.0)
        assert r_cd.convection_diffusion
        assert classify_regime(1e-2, 1e-3).label is RegimeLabel.REACTION_DIFFUSION

    def test_scale_consistency_and_monotone(self):
        # depends only on r (and eps2 for the extra flag); monotone across labels
        pairs = [(1e-6, 1e-2), (2e-6, np.sqrt(2) * 1e-2)]
        idx = {classify_regime(e1, e2).index for e1, e2 in pairs}
        assert len(idx) == 1
        rs = [1e-3, 0.05, 0.1, 0.5, 5.0, 10.0, 1e3]
        indices = [classify_regime(r * 0.01**2, 0.01).index for r in rs]
        assert indices == sorted(indices)

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            classify_regime(0.1, 0.1, thresholds=(2.0, 10.0))


class TestEnergyNorm:
    def test_zero(self):
        p = constant_problem()
        assert energy_norm(lambda x, d: np.zeros_like(x), p) == 0.0

    def test_hand_integrated_default(self):
        # w = x(1-x): int w'^2 = 1/3, int w^2 = 1/30
        p = constant_problem(1.0, 1.0)
        w = lambda x, d: x * (1 - x) if d == 0 else 1 - 2 * x
        got = energy_norm(w, p)
        assert got == pytest.approx(np.sqrt(11.0 / 30.0), rel=1e-12)

    def test_hand_integrated_paper_variant(self):
        p = constant_problem(1.0, 1.0)
        w = lambda x, d: x * (1 - x) if d == 0 else 1 - 2 * x
        got = energy_norm(w, p, variant="paper")
        assert got == pytest.approx(np.sqrt(1.0 / 3.0 + 1.0 / 3.0 + 1.0 / 30.0), rel=1e-12)

    def test_dominates_l2(self):
        p = constant_problem(0.5, 0.5)
        for w in [
            lambda x, d: np.sin(3 * x) if d == 0 else 3 * np.cos(3 * x),
            lambda x, d: x if d == 0 else np.ones_like(x),
        ]:
            e = energy_norm(w, p)
            l2 = energy_norm(lambda x, d: w(x, 0) if d == 0 else np.zeros_like(x), p)
            assert e >= l2 - 1e-12

    def test_under_resolved_raises(self):
        p = constant_problem()
        spec = QuadSpec(breakpoints=(0.0, 1.0), order=2)
        w = lambda x, d: np.sin(40 * x) if d == 0 else 40 * np.cos(40 * x)
        with pytest.raises(QuadratureUnderResolved):
            energy_norm(w, p, quad=spec)


class TestGridsAndSerialization:
    def test_sample_grid_size_and_range(self):
        g = layer_sample_grid(0.01, 1e-4)
        assert g.size == 201
        assert g[0] == 0.0 and g[-1] == 1.0
        # clustered: many points inside the left layer
        assert np.sum(g <= 0.01) > 20

    def test_layer_widths(self):
        p = constant_problem(1e-4, 1e-1)
        assert layer_widths(p, 1) == (0.1, pytest.approx(1e-3))
        assert layer_widths(p, 2) == (0.1, 0.1)
        assert layer_widths(p, 3) == (pytest.approx(1e-2), pytest.approx(1e-2))

    def test_roundtrip(self):
        p = TwoParamProblem(
            1e-3, 1e-1, Affine(1.0, 0.0), Rational([1.0], [1.0, 0.5]), Constant(2.0)
        )
        d = problem_to_dict(p)
        q = problem_from_dict(d)
        assert problem_to_dict(q) == d
        xs = np.linspace(0, 1, 7)
        np.testing.assert_allclose(q.c(xs), p.c(xs), rtol=1e-15)

    def test_eps_bounds(self):
        with pytest.raises(ValueError):
            TwoParamProblem(0.0, 0.5, Constant(1.0), Constant(1.0), Constant(1.0))
        with pytest.raises(ValueError):
            TwoParamProblem(0.5, 1.5, Constant(1.0), Constant(1.0), Constant(1.0))
