import cmath
import logging
import math
from typing import Iterable, List, Tuple

import numpy as np

from analytic.schemas import PlotPoint, PlotQuantity, ProfileSpec
from core.exceptions import MismatchedSpecsError, SingularOriginError
from model_core.schemas import Branch
from model_core.service import (
    decoupled_exponent,
    generalized_vector,
    radial_power,
    vielbein_terms,
)

logger = logging.getLogger(__name__)

Pair = Tuple[complex, complex]


def _radial_factor(p: float, rho: float) -> float:
    if rho > 0:
        return rho ** p
    if p < 0:
        raise SingularOriginError(f"rho^{p} is singular at the origin")
    return 1.0 if p == 0 else 0.0


def _radial_factor_derivative(p: float, rho: float) -> float:
    if p == 0:
        return 0.0
    if rho > 0:
        return p * rho ** (p - 1.0)
    if p < 0 or 0 < p < 1:
        raise SingularOriginError(f"d/drho rho^{p} is singular at the origin")
    return 1.0 if p == 1 else 0.0


def total_exponent(spec: ProfileSpec) -> complex:
    """k + alpha, the full power of f in the profile."""
    return decoupled_exponent(spec.branch, spec.params) + spec.mode.alpha


def _shape(spec: ProfileSpec, log_f: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vector part u(rho) and du/d(ln f)."""
    v = np.array(spec.mode.vector, dtype=complex)
    if not spec.secular:
        return v, np.zeros(2, dtype=complex)
    w = generalized_vector(spec.params, spec.mode)
    return log_f * v + w, v


def _evaluate(spec: ProfileSpec, rho: float) -> Pair:
    p = radial_power(spec.branch, spec.params)
    radial = _radial_factor(p, rho)
    f, _, _ = vielbein_terms(rho, spec.params.rho0)
    log_f = math.log(f)
    u, _ = _shape(spec, log_f)
    scale = spec.amplitude * radial * cmath.exp(total_exponent(spec) * log_f)
    return complex(scale * u[0]), complex(scale * u[1])


def massless_profile_A(spec: ProfileSpec, rho: float) -> Pair:
    if spec.branch is not Branch.A:
        raise MismatchedSpecsError("massless_profile_A needs a branch A spec")
    return _evaluate(spec, rho)


def massless_profile_B(spec: ProfileSpec, rho: float) -> Pair:
    if spec.branch is not Branch.B:
        raise MismatchedSpecsError("massless_profile_B needs a branch B spec")
    return _evaluate(spec, rho)


def profile(spec: ProfileSpec, rho: float) -> Pair:
    return _evaluate(spec, rho)


def profile_derivative(spec: ProfileSpec, rho: float) -> Pair:
    """Exact d/drho of the closed-form profile (chain rule, no differencing)."""
    p = radial_power(spec.branch, spec.params)
    radial = _radial_factor(p, rho)
    d_radial = _radial_factor_derivative(p, rho)
    f, df, _ = vielbein_terms(rho, spec.params.rho0)
    log_f = math.log(f)
    dlogf = df / f
    exponent = total_exponent(spec)
    fpow = cmath.exp(exponent * log_f)
    u, du = _shape(spec, log_f)

    deriv = spec.amplitude * fpow * (
        d_radial * u + radial * dlogf * (exponent * u + du)
    )
    return complex(deriv[0]), complex(deriv[1])


def superpose(plus: ProfileSpec, minus: ProfileSpec, rho: float) -> Pair:
    if plus.params != minus.params:
        raise MismatchedSpecsError("Superposed profiles must share coupling parameters")
    if plus.branch is not minus.branch:
        raise MismatchedSpecsError("Superposed profiles must share the branch")
    if plus.mode.sign is minus.mode.sign and plus.secular == minus.secular:
        raise MismatchedSpecsError("Superposed profiles must be distinct solutions")
    p1, p2 = _evaluate(plus, rho)
    m1, m2 = _evaluate(minus, rho)
    return p1 + m1, p2 + m2


def normalized_spec(spec: ProfileSpec, norm_value: float) -> ProfileSpec:
    """Rescale the amplitude so the weighted L2 norm becomes one.

    norm_value must be a converged norm of spec; NormalizationService.normalize
    supplies it from the quadrature.
    """
    if not (math.isfinite(norm_value) and norm_value > 0):
        raise ValueError(f"Cannot normalize with norm {norm_value}")
    return spec.model_copy(update={"amplitude": spec.amplitude / math.sqrt(norm_value)})


def profile_series(
    spec: ProfileSpec, radii: Iterable[float], quantity: PlotQuantity
) -> List[PlotPoint]:
    quantity = PlotQuantity(quantity)
    if quantity is PlotQuantity.INTEGRAND:
        raise ValueError("Integrand series are produced by the normalization service")
    points = []
    for rho in radii:
        first, second = _evaluate(spec, rho)
        component = first if quantity.value.endswith("_I") else second
        if quantity.value.startswith("real"):
            value = component.real
        elif quantity.value.startswith("imag"):
            value = component.imag
        else:
            value = abs(component)
        points.append(PlotPoint(rho=float(rho), value=float(value)))
    return points
