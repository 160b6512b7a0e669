import math
import warnings

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import IntegrationWarning

from analytic.schemas import ProfileSpec
from core.exceptions import DomainError, SingularOriginError, ToleranceNotMetError
from model_core.schemas import Branch, CouplingParams, Sign
from model_core.service import eigen_mode
from normalization.schemas import Convention, Divergent, Endpoint, QuadratureResult
from normalization.service import (
    NormalizationService,
    _Integrand,
    adjudicate_b_convention,
    classify_mode,
    norm_closed_form,
    norm_integrand,
    norm_quadrature,
    window_A,
    window_B,
)

# k_A = -1/2 and alpha = 0: the A integrand is rho f^-3, whose norm is (2 rho0)^2 / 4
UNIT = CouplingParams(f56=0.5, ft56=0.5)

B_GRID = [
    CouplingParams(ft56=0.5),
    CouplingParams(f56=0.3, ft56=-0.45, ft3=0.3, ftp=0.2, ftm=0.1),
    CouplingParams(f56=-0.6, ft56=0.35, ftp=1.0, ftm=-1.0),
    CouplingParams(f56=1.1, ft56=0.6, ft3=0.5, ftp=0.3, ftm=0.6),
]


def spec_for(c, branch, sign=Sign.MINUS, **kwargs):
    return ProfileSpec(branch=branch, mode=eigen_mode(c, sign), params=c, **kwargs)


def random_grid(count=200, seed=20240611):
    """Seeded coupling sets with alternating printed sign."""
    rng = np.random.default_rng(seed)
    grid = []
    for i in range(count):
        f56, ft56 = rng.uniform(-1.0, 1.0, size=2)
        ft3, ftp, ftm = rng.uniform(-0.5, 0.5, size=3)
        c = CouplingParams(
            f56=float(f56), ft56=float(ft56), ft3=float(ft3), ftp=float(ftp), ftm=float(ftm),
            rho0=float(rng.uniform(0.5, 2.0)),
        )
        grid.append((c, Sign.PLUS if i % 2 == 0 else Sign.MINUS))
    return grid


def clear_of_window_edges(c, sign, margin=1e-4):
    edges = [window_A(c, sign).upper] + [window_B(c, sign, conv).lower for conv in Convention]
    return all(abs(edge - c.n) > margin for edge in edges)


@pytest.fixture(scope="module")
def grid_reports():
    service = NormalizationService()
    reports = []
    for c, sign in random_grid():
        for n in range(-4, 7):
            point = c.with_updates(n=float(n))
            if clear_of_window_edges(point, sign):
                reports.append(service.classify_mode(point, sign))
    return reports


class TestWindows:
    def test_decoupled_a_window(self, decoupled):
        window = window_A(decoupled, Sign.PLUS)
        assert (window.lower, window.upper) == (-1.0, 2.0)
        assert window.label() == "(-1, 2)"
        assert window.integers(-3, 3) == [0, 1]

    def test_plus_window_contains_minus_window(self, decoupled):
        c = decoupled.with_updates(ft3=3.0, ftp=4.0, ftm=4.0)
        plus, minus = window_A(c, Sign.PLUS), window_A(c, Sign.MINUS)
        assert plus.upper == 12.0 and minus.upper == -8.0
        assert set(minus.integers(-20, 20)) < set(plus.integers(-20, 20))

    def test_b_conventions(self):
        literal = window_B(B_GRID[0], Sign.PLUS, Convention.PAPER_LITERAL)
        shifted = window_B(B_GRID[0], Sign.PLUS, Convention.SHIFTED_INDEX)
        assert literal.label() == "(-1, 1)" and literal.integers(-5, 5) == [0]
        assert shifted.label() == "(-2, 0)" and shifted.integers(-5, 5) == [-1]

    def test_complex_alpha_uses_real_part(self, oscillating):
        assert window_A(oscillating, Sign.PLUS) == window_A(oscillating, Sign.MINUS).model_copy(
            update={"sign": Sign.PLUS}
        )


class TestClosedForm:
    def test_beta_identity(self):
        assert norm_closed_form(spec_for(UNIT, Branch.A)) == pytest.approx(1.0, rel=1e-14)
        scaled = UNIT.with_updates(rho0=2.0)
        assert norm_closed_form(spec_for(scaled, Branch.A, amplitude=2.0)) == pytest.approx(16.0, rel=1e-14)

    def test_divergent_endpoints(self, decoupled):
        at_origin = norm_closed_form(spec_for(decoupled.with_updates(n=-1.0), Branch.A))
        assert at_origin == Divergent(endpoint=Endpoint.ORIGIN)
        # n = 2 sits on the upper window edge
        at_infinity = norm_closed_form(spec_for(decoupled.with_updates(n=2.0), Branch.A))
        assert at_infinity == Divergent(endpoint=Endpoint.INFINITY)

    def test_secular_matches_quadrature(self, degenerate):
        spec = spec_for(degenerate, Branch.A, Sign.PLUS, secular=True)
        closed = norm_closed_form(spec)
        quadrature = norm_quadrature(spec)
        assert isinstance(quadrature, QuadratureResult)
        assert quadrature.value == pytest.approx(closed, rel=1e-6)
        assert closed != pytest.approx(norm_closed_form(spec_for(degenerate, Branch.A, Sign.PLUS)))


class TestIntegrand:
    def test_values(self):
        spec = spec_for(UNIT, Branch.A)
        radii = np.array([0.0, 0.5, 3.0])
        f = 1.0 + radii ** 2 / 4.0
        assert_allclose(norm_integrand(spec, radii), radii * f ** -3.0, rtol=1e-13)
        assert norm_integrand(spec, 3.0) == pytest.approx(3.0 * (1 + 9 / 4) ** -3)

    def test_singular_origin(self):
        with pytest.raises(SingularOriginError):
            norm_integrand(spec_for(UNIT, Branch.B), 0.0)


class TestQuadrature:
    def test_unit_norm(self):
        result = norm_quadrature(spec_for(UNIT, Branch.A))
        assert isinstance(result, QuadratureResult) and result.converged
        assert result.value == pytest.approx(1.0, rel=1e-9)

    def test_zero_amplitude(self):
        result = norm_quadrature(spec_for(UNIT, Branch.A, amplitude=0.0))
        assert result == QuadratureResult(value=0.0, error=0.0)

    def test_slope_verdicts(self, decoupled):
        origin = norm_quadrature(spec_for(decoupled.with_updates(n=-1.0), Branch.A))
        assert origin == Divergent(endpoint=Endpoint.ORIGIN, test="origin_slope")
        tail = norm_quadrature(spec_for(decoupled.with_updates(n=3.0), Branch.A))
        assert tail == Divergent(endpoint=Endpoint.INFINITY, test="tail_slope")

    def test_growth_verdict(self, mocker):
        mocker.patch(
            "normalization.service.quad",
            side_effect=[(1.0, 0.0), (1.0, 0.0), (2.0, 0.0), (4.0, 0.0), (8.0, 0.0), (16.0, 0.0)],
        )
        result = norm_quadrature(spec_for(UNIT, Branch.A))
        assert result == Divergent(endpoint=Endpoint.INFINITY, test="growth")

    def test_missed_tolerance(self, mocker):
        def unconverged(*args, **kwargs):
            warnings.warn("roundoff error detected", IntegrationWarning)
            return 1.0, 1.0

        mocker.patch("normalization.service.quad", side_effect=unconverged)
        service = NormalizationService()
        spec = spec_for(UNIT, Branch.A)
        assert not service.norm_quadrature(spec).converged
        with pytest.raises(ToleranceNotMetError) as exc:
            service.norm_quadrature(spec, strict=True)
        assert exc.value.estimate == 1.0

    @pytest.mark.parametrize("error", [-2.2e15, math.nan, math.inf])
    def test_invalid_error_estimate_is_not_converged(self, mocker, error):
        mocker.patch("normalization.service.quad", return_value=(1.0, error))
        service = NormalizationService()
        spec = spec_for(UNIT, Branch.A)
        assert not service.norm_quadrature(spec).converged
        with pytest.raises(ToleranceNotMetError):
            service.norm_quadrature(spec, strict=True)

    def test_endpoint_powers_follow_exponents(self, mixed):
        c = mixed.with_updates(n=1.0)
        kernel = _Integrand([spec_for(c, Branch.A, Sign.PLUS), spec_for(c, Branch.A, Sign.MINUS, amplitude=0.5j)])
        s0, s_inf = kernel.endpoint_powers()
        # rho^3 at the origin; the tail follows the larger Re alpha = sqrt(0.11)
        assert s0 == 3.0
        assert s_inf == pytest.approx(3.0 + 4.0 * (0.1 + math.sqrt(0.11)) - 4.0)
        silent = _Integrand([spec_for(c, Branch.A, Sign.PLUS, amplitude=0.0), spec_for(c, Branch.A, Sign.MINUS)])
        assert silent.endpoint_powers()[1] == pytest.approx(3.0 + 4.0 * (0.1 - math.sqrt(0.11)) - 4.0)

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError):
            norm_quadrature(spec_for(UNIT, Branch.A), tol=0.0)



class TestBConvention:
    def test_shifted_index_survives_everywhere(self):
        reports = [
            classify_mode(c.with_updates(n=float(n)), sign)[1]
            for c in B_GRID
            for sign in Sign
            for n in range(-4, 7)
        ]
        assert all(report.agree for report in reports)
        adjudication = adjudicate_b_convention(reports)
        assert adjudication.convention is Convention.SHIFTED_INDEX
        assert adjudication.points == len(reports)
        assert adjudication.mismatches[Convention.SHIFTED_INDEX] == 0
        assert adjudication.mismatches[Convention.PAPER_LITERAL] > 0

    def test_literal_reading_fails_at_origin(self):
        report_a, report_b = classify_mode(B_GRID[0], Sign.PLUS, Convention.PAPER_LITERAL)
        assert report_a.branch is Branch.A and report_b.branch is Branch.B
        assert report_b.window_verdicts == {Convention.PAPER_LITERAL: True, Convention.SHIFTED_INDEX: False}
        assert report_b.quadrature == Divergent(endpoint=Endpoint.ORIGIN, test="origin_slope")
        assert report_b.matching_conventions == [Convention.SHIFTED_INDEX]
        assert report_b.convention_used is Convention.PAPER_LITERAL
        assert not report_b.agree

    def test_nothing_to_adjudicate(self):
        adjudication = adjudicate_b_convention([])
        assert adjudication.convention is None and adjudication.points == 0


class TestSuperposition:
    def test_mixed_profile(self, mixed):
        c = mixed.with_updates(n=0.0)
        plus = spec_for(c, Branch.A, Sign.PLUS)
        minus = spec_for(c, Branch.A, Sign.MINUS, amplitude=0.5)
        closed, quadrature, dominant = NormalizationService().superposition_report(plus, minus)
        assert dominant == pytest.approx(math.sqrt(0.11))
        assert isinstance(quadrature, QuadratureResult)
        assert quadrature.value == pytest.approx(closed, rel=1e-7)
        pure = norm_closed_form(plus) + 0.25 * norm_closed_form(spec_for(c, Branch.A, Sign.MINUS))
        assert closed != pytest.approx(pure, rel=1e-6)

    def test_dominant_branch_decides(self, mixed):
        c = mixed.with_updates(n=2.0)
        plus = spec_for(c, Branch.A, Sign.PLUS)
        minus = spec_for(c, Branch.A, Sign.MINUS)
        closed, quadrature, _ = NormalizationService().superposition_report(plus, minus)
        assert isinstance(closed, Divergent) and isinstance(quadrature, Divergent)

    def test_oscillating_non_normal_mixture(self):
        # alpha = +-i with non-orthogonal eigenvectors: the tail oscillates in ln f
        c = CouplingParams(f56=0.2, ft56=0.4, ft3=0.0, ftp=4.0, ftm=-0.25, n=0.0)
        plus = spec_for(c, Branch.A, Sign.PLUS)
        minus = spec_for(c, Branch.A, Sign.MINUS, amplitude=0.5j)
        closed, quadrature, dominant = NormalizationService().superposition_report(plus, minus)
        assert dominant == 0.0
        assert closed == pytest.approx(2.7321, rel=1e-4)
        assert isinstance(quadrature, QuadratureResult) and quadrature.converged
        assert 0.0 <= quadrature.error <= 1e-9 * quadrature.value
        assert quadrature.value == pytest.approx(closed, rel=1e-7)


class TestRandomGrid:
    def test_grid_covers_the_n_range(self, grid_reports):
        assert len(grid_reports) >= 2000
        assert {report_a.n for report_a, _ in grid_reports} == set(float(n) for n in range(-4, 7))

    def test_a_window_closed_form_and_quadrature_agree(self, grid_reports):
        verdicts = set()
        for report_a, _ in grid_reports:
            assert report_a.agree, report_a
            assert report_a.window_verdict == report_a.closed_form_finite == report_a.quadrature_finite
            if report_a.quadrature_finite:
                assert report_a.quadrature.converged
                assert report_a.quadrature.value == pytest.approx(report_a.closed_form, rel=1e-8)
            verdicts.add(report_a.window_verdict)
        assert verdicts == {True, False}

    def test_b_adjudication_picks_shifted_index(self, grid_reports):
        reports_b = [report_b for _, report_b in grid_reports]
        assert all(report.agree for report in reports_b)
        adjudication = adjudicate_b_convention(reports_b)
        assert adjudication.convention is Convention.SHIFTED_INDEX
        assert adjudication.points == len(reports_b)
        assert adjudication.mismatches[Convention.SHIFTED_INDEX] == 0
        assert adjudication.mismatches[Convention.PAPER_LITERAL] > 0


class TestVerdictInvariance:
    @pytest.mark.parametrize("branch", list(Branch))
    @pytest.mark.parametrize("n", [-1.0, 0.0, 1.0, 2.0, 3.0])
    def test_imaginary_shift_of_alpha(self, mixed, branch, n):
        c = mixed.with_updates(n=n)
        spec = spec_for(c, branch, Sign.PLUS)
        shifted = spec.model_copy(update={"mode": spec.mode.model_copy(update={"alpha": spec.mode.alpha + 0.7j})})
        assert norm_closed_form(shifted) == norm_closed_form(spec)
        original, moved = norm_quadrature(spec), norm_quadrature(shifted)
        assert type(moved) is type(original)
        if isinstance(original, QuadratureResult):
            assert moved.value == pytest.approx(original.value, rel=1e-9)
        else:
            assert moved == original

    def test_quadrature_scales_with_amplitude_squared(self, mixed):
        c = mixed.with_updates(n=0.0)
        unit = norm_quadrature(spec_for(c, Branch.A))
        scaled = norm_quadrature(spec_for(c, Branch.A, amplitude=3.0 - 4.0j))
        assert scaled.value == pytest.approx(25.0 * unit.value, rel=1e-10)


class TestNormalize:
    def test_rescales_by_converged_norm(self):
        spec = spec_for(UNIT.with_updates(rho0=2.0), Branch.A, amplitude=2.0)
        normalized = NormalizationService().normalize(spec)
        assert abs(normalized.amplitude) == pytest.approx(0.5, rel=1e-9)
        assert norm_quadrature(normalized).value == pytest.approx(1.0, rel=1e-9)

    def test_divergent_profile(self, decoupled):
        with pytest.raises(DomainError) as exc:
            NormalizationService().normalize(spec_for(decoupled.with_updates(n=3.0), Branch.A))
        assert "infinity" in exc.value.detail

    def test_unconverged_norm_is_not_used(self, mocker):
        def unconverged(*args, **kwargs):
            warnings.warn("roundoff error detected", IntegrationWarning)
            return 4.0, 1.0

        mocker.patch("normalization.service.quad", side_effect=unconverged)
        with pytest.raises(ToleranceNotMetError):
            NormalizationService().normalize(spec_for(UNIT, Branch.A))
