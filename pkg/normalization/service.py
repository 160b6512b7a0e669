"""Normalizability of the massless profiles under the rho f^-2 measure.

Three independent verdicts are produced for every profile:

* the printed window inequalities (a prediction on n),
* the closed form  int_0^inf rho^(2a-1) (1 + rho^2/c^2)^(-b) drho
  = c^(2a)/2 * B(a, b - a),  c = 2 rho0, finite iff 0 < a < b,
* direct quadrature of the integrand, weighted by its endpoint powers.

Quadrature is the ground truth; the other two are checked against it.
"""
import cmath
import logging
import math
import warnings
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special
from scipy.integrate import IntegrationWarning, quad

from analytic.schemas import ProfileSpec
from analytic.service import normalized_spec, profile, total_exponent
from core.config import Settings, settings
from core.exceptions import DomainError, MismatchedSpecsError, ToleranceNotMetError
from model_core.schemas import Branch, CouplingParams, Sign
from model_core.service import (
    decoupled_exponent,
    discriminant,
    eigen_mode,
    generalized_vector,
    radial_power,
)
from normalization.schemas import (
    Convention,
    ConventionAdjudication,
    Divergent,
    Endpoint,
    NormReport,
    NormValue,
    QuadratureResult,
    QuadratureValue,
    WindowInterval,
)

logger = logging.getLogger(__name__)

_ENDPOINT_OFFSET = 1e-15


class _Integrand:
    """rho f^-2 |P(rho)|^2 for P = rho^p f^k sum_s c_s f^alpha_s u_s(rho).

    Constants are unpacked once so scalar evaluation inside quadrature
    stays cheap. u_s is v_s, or ln f v_s + w_s for a secular term.
    """

    def __init__(self, specs: Sequence[ProfileSpec]):
        first = specs[0]
        self.rho0 = first.params.rho0
        self.p = radial_power(first.branch, first.params)
        self.k = decoupled_exponent(first.branch, first.params)
        self.terms = []
        for spec in specs:
            v = np.array(spec.mode.vector, dtype=complex)
            w = generalized_vector(spec.params, spec.mode) if spec.secular else None
            self.terms.append((spec.amplitude, spec.mode.alpha, v, w))

    def log_value(self, rho: float) -> float:
        """Natural log of the integrand; -inf where it vanishes."""
        if rho <= 0.0:
            return -math.inf if 2.0 * self.p + 1.0 > 0.0 else math.inf
        log_f = math.log1p((rho / (2.0 * self.rho0)) ** 2)
        s1 = s2 = 0j
        for amplitude, alpha, v, w in self.terms:
            weight = amplitude * cmath.exp(alpha * log_f)
            if w is None:
                s1 += weight * v[0]
                s2 += weight * v[1]
            else:
                s1 += weight * (log_f * v[0] + w[0])
                s2 += weight * (log_f * v[1] + w[1])
        modulus = abs(s1) ** 2 + abs(s2) ** 2
        if modulus == 0.0:
            return -math.inf
        return (2.0 * self.p + 1.0) * math.log(rho) + (2.0 * self.k - 2.0) * log_f + math.log(modulus)

    def endpoint_powers(self) -> Tuple[float, float]:
        """Powers s0, s_inf with integrand ~ rho^s0 at the origin and ~ rho^s_inf (up to logs) at infinity.

        The tail is set by the largest Re alpha among terms with non-zero
        amplitude; oscillating or non-normal mixtures keep this power even
        where a finite-difference slope would not.
        """
        dominant = max(alpha.real for amplitude, alpha, _, _ in self.terms if amplitude != 0)
        s0 = 2.0 * self.p + 1.0
        return s0, s0 + 4.0 * (self.k + dominant) - 4.0

    def __call__(self, rho: float) -> float:
        try:
            return math.exp(self.log_value(rho))
        except OverflowError:
            return math.inf


def norm_integrand(spec: ProfileSpec, rho):
    """rho f^-2 (|component I|^2 + |component II|^2); accepts scalars or arrays."""
    kernel = _Integrand([spec])
    if np.ndim(rho) == 0:
        # Origin behaviour follows the profile rules (raises when singular)
        profile(spec, float(rho))
        return kernel(float(rho))
    return np.array([norm_integrand(spec, r) for r in np.asarray(rho, dtype=float)])


def _beta_moment(a: float, b: complex, c: float) -> complex:
    """int_0^inf rho^(2a-1) (1 + rho^2/c^2)^(-b) drho for 0 < a < Re b."""
    log_value = (
        2.0 * a * math.log(c) - math.log(2.0)
        + special.loggamma(a) + special.loggamma(b - a) - special.loggamma(b)
    )
    return complex(np.exp(log_value))


def _moment_exponents(spec: ProfileSpec) -> Tuple[float, float]:
    a = radial_power(spec.branch, spec.params) + 1.0
    b = 2.0 - 2.0 * total_exponent(spec).real
    return a, b


def norm_closed_form(spec: ProfileSpec) -> NormValue:
    a, b = _moment_exponents(spec)
    if a <= 0.0:
        return Divergent(endpoint=Endpoint.ORIGIN)
    if b - a <= 0.0:
        return Divergent(endpoint=Endpoint.INFINITY)

    c = 2.0 * spec.params.rho0
    amp2 = abs(spec.amplitude) ** 2
    v = np.array(spec.mode.vector, dtype=complex)
    base = (c ** (2.0 * a) / 2.0) * math.exp(special.betaln(a, b - a))
    if not spec.secular:
        return float(amp2 * np.vdot(v, v).real * base)

    # |ln f v + w|^2 = ln^2 f |v|^2 + 2 ln f Re<v, w> + |w|^2; moments of ln f
    # come from differentiating the Beta identity in b.
    w = generalized_vector(spec.params, spec.mode)
    gap = special.digamma(b) - special.digamma(b - a)
    first = base * gap
    second = base * (gap ** 2 + special.polygamma(1, b - a) - special.polygamma(1, b))
    value = np.vdot(v, v).real * second + 2.0 * np.vdot(v, w).real * first + np.vdot(w, w).real * base
    return float(amp2 * value)


def _window_root(c: CouplingParams, sign: Sign) -> float:
    """The +-sqrt(D) of the window formulas; for D < 0 the real part (zero) is used."""
    d = discriminant(c)
    return Sign(sign).factor * math.sqrt(d) if d > 0 else 0.0


def window_A(c: CouplingParams, sign: Sign) -> WindowInterval:
    upper = 2.0 * (c.f56 + c.ft56 + _window_root(c, sign))
    return WindowInterval(lower=-1.0, upper=upper, branch=Branch.A, sign=sign)


def window_B(c: CouplingParams, sign: Sign, convention: Convention = Convention.PAPER_LITERAL) -> WindowInterval:
    """Printed B window; shifted_index reads its variable as the subscript n+1."""
    convention = Convention(convention)
    lower = 2.0 * (c.f56 - c.ft56 + _window_root(c, sign))
    upper = 1.0
    if convention is Convention.SHIFTED_INDEX:
        lower, upper = lower - 1.0, upper - 1.0
    return WindowInterval(lower=lower, upper=upper, branch=Branch.B, sign=sign, convention=convention)


def governing_sign(branch: Branch, sign: Sign) -> Sign:
    """Eigen branch whose convergence the window with this printed sign describes.

    On A the window's +sqrt(D) belongs to alpha = -sqrt(D); on B to alpha = +sqrt(D).
    """
    sign = Sign(sign)
    return sign.opposite if Branch(branch) is Branch.A else sign


class NormalizationService:
    def __init__(self, config: Settings = settings):
        self.config = config

    def _log_slope(self, kernel: _Integrand, r1: float, r2: float) -> float:
        l1, l2 = kernel.log_value(r1), kernel.log_value(r2)
        if not (math.isfinite(l1) and math.isfinite(l2)):
            return math.nan
        return (l2 - l1) / math.log(r2 / r1)

    def _cross_check_slopes(self, kernel: _Integrand, s0: float, s_inf: float):
        """Compare the exponent-derived powers with log-space slopes of a pure mode."""
        rho0 = kernel.rho0
        for endpoint, factors, expected in (
            (Endpoint.ORIGIN, self.config.ORIGIN_SAMPLE_FACTORS, s0),
            (Endpoint.INFINITY, self.config.TAIL_SAMPLE_FACTORS, s_inf),
        ):
            r1, r2 = (factor * rho0 for factor in factors)
            measured = self._log_slope(kernel, r1, r2)
            if math.isfinite(measured) and abs(measured - expected) > self.config.SLOPE_MARGIN:
                logger.warning(
                    "Measured %s power %.6f differs from the exponent-derived %.6f",
                    endpoint.value, measured, expected,
                )

    def _partial_integrals(self, kernel: _Integrand, s0: float, rho0: float) -> List[float]:
        radius = self.config.DIVERGENCE_START_FACTOR * rho0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            floor = _ENDPOINT_OFFSET * rho0

            def near_origin(r: float) -> float:
                # QUADPACK samples the endpoints of the weighted rule; stay just inside
                r = max(r, floor)
                return math.exp(kernel.log_value(r) - s0 * math.log(r))

            total, _ = quad(
                near_origin, 0.0, radius,
                weight="alg", wvar=(s0, 0.0), epsabs=0.0, epsrel=1e-6, limit=self.config.QUADRATURE_LIMIT,
            )
            partials = [total]
            for _ in range(self.config.DIVERGENCE_DOUBLINGS):
                piece, _ = quad(kernel, radius, 2.0 * radius, epsabs=0.0, epsrel=1e-6, limit=self.config.QUADRATURE_LIMIT)
                total += piece
                partials.append(total)
                radius *= 2.0
        return partials

    def _grows_without_bound(self, partials: List[float]) -> bool:
        ratios = [b / a for a, b in zip(partials, partials[1:]) if a > 0.0]
        if len(ratios) < self.config.DIVERGENCE_DOUBLINGS:
            return False
        return all(r >= self.config.DIVERGENCE_GROWTH_FACTOR for r in ratios)

    def _quadrature(self, specs: Sequence[ProfileSpec], tol: float, strict: bool = False) -> QuadratureValue:
        if not tol > 0:
            raise ValueError(f"Quadrature tolerance must be positive, got {tol}")
        kernel = _Integrand(specs)
        rho0 = kernel.rho0
        if all(amplitude == 0 for amplitude, *_ in kernel.terms):
            return QuadratureResult(value=0.0, error=0.0)

        margin = self.config.SLOPE_MARGIN
        s0, s_inf = kernel.endpoint_powers()
        if len(specs) == 1 and not specs[0].secular:
            self._cross_check_slopes(kernel, s0, s_inf)
        if not s0 > -1.0 + margin:
            return Divergent(endpoint=Endpoint.ORIGIN, test="origin_slope")
        if not s_inf < -1.0 - margin:
            return Divergent(endpoint=Endpoint.INFINITY, test="tail_slope")

        if self._grows_without_bound(self._partial_integrals(kernel, s0, rho0)):
            return Divergent(endpoint=Endpoint.INFINITY, test="growth")

        # rho = c t/(1-t) maps [0, inf) onto [0, 1); the endpoint powers
        # become the algebraic weight t^s0 (1-t)^(-s_inf-2).
        c = 2.0 * rho0
        beta = -s_inf - 2.0

        def smooth_part(t: float) -> float:
            t = min(max(t, _ENDPOINT_OFFSET), 1.0 - _ENDPOINT_OFFSET)
            rho = c * t / (1.0 - t)
            log_value = kernel.log_value(rho)
            if log_value == -math.inf:
                return 0.0
            log_jacobian = math.log(c) - 2.0 * math.log1p(-t)
            return math.exp(log_value + log_jacobian - s0 * math.log(t) - beta * math.log1p(-t))

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", IntegrationWarning)
            value, error = quad(
                smooth_part, 0.0, 1.0, weight="alg", wvar=(s0, beta),
                epsabs=0.0, epsrel=tol, limit=self.config.QUADRATURE_LIMIT,
            )
        converged = (
            not caught
            and math.isfinite(value)
            and math.isfinite(error)
            and 0.0 <= error <= max(tol * abs(value), 1e-300)
        )
        if not converged:
            message = f"Norm quadrature missed tolerance {tol:g}: {value:.6e} +- {error:.1e}"
            if strict:
                raise ToleranceNotMetError(message, estimate=value, error=error)
            logger.warning(message)
        return QuadratureResult(value=value, error=error, converged=converged)

    def norm_quadrature(self, spec: ProfileSpec, tol: Optional[float] = None, strict: bool = False) -> QuadratureValue:
        return self._quadrature([spec], self.config.QUADRATURE_TOLERANCE if tol is None else tol, strict)

    def normalize(self, spec: ProfileSpec, tol: Optional[float] = None) -> ProfileSpec:
        """Unit-norm copy of spec, rescaled only by a converged quadrature value."""
        result = self.norm_quadrature(spec, tol, strict=True)
        if isinstance(result, Divergent):
            raise DomainError(f"Profile is not normalizable: norm diverges at {result.endpoint.value} ({result.test})")
        if result.value <= 0.0:
            raise DomainError("Profile with zero norm cannot be normalized")
        return normalized_spec(spec, result.value)

    def _agree(self, verdicts: Iterable[bool], closed: NormValue, quadrature: QuadratureValue) -> bool:
        verdicts = list(verdicts)
        if len(set(verdicts)) != 1:
            return False
        if not verdicts[0]:
            return True
        bound = max(self.config.AGREEMENT_TOLERANCE * abs(closed), quadrature.error)
        return abs(closed - quadrature.value) <= bound

    def branch_report(
        self,
        c: CouplingParams,
        sign: Sign,
        branch: Branch,
        convention: Optional[Convention] = None,
    ) -> NormReport:
        sign, branch = Sign(sign), Branch(branch)
        mode = eigen_mode(c, governing_sign(branch, sign))
        spec = ProfileSpec(branch=branch, mode=mode, params=c)
        closed = norm_closed_form(spec)
        quadrature = self.norm_quadrature(spec)
        closed_finite = not isinstance(closed, Divergent)
        quad_finite = isinstance(quadrature, QuadratureResult)

        if branch is Branch.A:
            window = window_A(c, sign)
            verdict = window.contains(c.n)
            return NormReport(
                branch=branch, sign=sign, n=c.n, alpha=mode.alpha, window=window,
                window_verdict=verdict, closed_form=closed, quadrature=quadrature,
                agree=self._agree([verdict, closed_finite, quad_finite], closed, quadrature),
            )

        windows = {conv: window_B(c, sign, conv) for conv in Convention}
        verdicts = {conv: windows[conv].contains(c.n) for conv in Convention}
        matching = [conv for conv in (Convention.SHIFTED_INDEX, Convention.PAPER_LITERAL) if verdicts[conv] == quad_finite]
        if convention is not None:
            used = Convention(convention)
        else:
            used = matching[0] if matching else None
        window = windows[used or Convention.PAPER_LITERAL]
        verdict = verdicts[used or Convention.PAPER_LITERAL]
        agree = used is not None and self._agree([verdict, closed_finite, quad_finite], closed, quadrature)
        return NormReport(
            branch=branch, sign=sign, n=c.n, alpha=mode.alpha, window=window,
            window_verdict=verdict, window_verdicts=verdicts, matching_conventions=matching,
            convention_used=used, closed_form=closed, quadrature=quadrature, agree=agree,
        )

    def classify_mode(
        self, c: CouplingParams, sign: Sign, convention: Optional[Convention] = None
    ) -> Tuple[NormReport, NormReport]:
        report_a = self.branch_report(c, sign, Branch.A)
        report_b = self.branch_report(c, sign, Branch.B, convention)
        for report in (report_a, report_b):
            if not report.agree:
                logger.warning("Normalizability verdicts disagree for %s branch %s (%s)", c, report.branch.value, sign)
        return report_a, report_b

    def superposition_report(
        self, plus: ProfileSpec, minus: ProfileSpec, tol: Optional[float] = None
    ) -> Tuple[NormValue, QuadratureValue, float]:
        """Norm of a mixed alpha+/alpha- profile.

        The closed form carries the cross term through a complex Beta
        function; the quadrature verdict follows the dominant Re alpha since
        the pure branches share the origin behaviour. Returns the closed
        form, the quadrature and the dominant Re alpha.
        """
        if plus.params != minus.params or plus.branch is not minus.branch:
            raise MismatchedSpecsError("Superposed profiles must share parameters and branch")
        if plus.secular or minus.secular:
            raise MismatchedSpecsError("Superposition norms are defined for pure eigenmodes only")
        tol = self.config.QUADRATURE_TOLERANCE if tol is None else tol
        present = [spec for spec in (plus, minus) if spec.amplitude != 0]
        if not present:
            return 0.0, QuadratureResult(value=0.0, error=0.0), 0.0
        dominant = max(spec.mode.alpha.real for spec in present)

        # Verdict per pure branch; the mixture diverges iff the dominant one does
        for spec in present:
            pure = self.norm_quadrature(spec, tol)
            if isinstance(pure, Divergent):
                return norm_closed_form(spec), pure, dominant

        a = radial_power(plus.branch, plus.params) + 1.0
        k = decoupled_exponent(plus.branch, plus.params)
        c = 2.0 * plus.params.rho0
        total = 0j
        for s in present:
            for t in present:
                overlap = s.amplitude * t.amplitude.conjugate() * np.vdot(t.mode.vector, s.mode.vector)
                b = 2.0 - 2.0 * k - s.mode.alpha - t.mode.alpha.conjugate()
                total += overlap * _beta_moment(a, b, c)
        closed = float(total.real)
        return closed, self._quadrature(present, tol), dominant


def tally_conventions(matches: Iterable[Sequence[Convention]]) -> ConventionAdjudication:
    """The B-window reading found in every list of matching readings, if exactly one is."""
    mismatches = {conv: 0 for conv in Convention}
    points = 0
    for matching in matches:
        points += 1
        for conv in Convention:
            if conv not in matching:
                mismatches[conv] += 1
    clean = [conv for conv, count in mismatches.items() if count == 0]
    convention = clean[0] if points and len(clean) == 1 else None
    return ConventionAdjudication(convention=convention, points=points, mismatches=mismatches)


def adjudicate_b_convention(reports: Iterable[NormReport]) -> ConventionAdjudication:
    """The B-window reading that matches quadrature at every reported point, if exactly one does."""
    return tally_conventions(report.matching_conventions for report in reports if report.branch is Branch.B)


def norm_quadrature(spec: ProfileSpec, tol: Optional[float] = None) -> QuadratureValue:
    return NormalizationService().norm_quadrature(spec, tol)


def classify_mode(
    c: CouplingParams, sign: Sign, convention: Optional[Convention] = None
) -> Tuple[NormReport, NormReport]:
    return NormalizationService().classify_mode(c, sign, convention)
