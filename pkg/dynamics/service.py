import logging
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from analytic.schemas import ProfileSpec, SpinorState
from analytic.service import profile, profile_derivative
from core.config import settings
from core.exceptions import DomainError, NonFiniteStateError, StepSizeUnderflowError
from dynamics.schemas import CoupledResidual, MasslessResidual, VerificationReport
from model_core.schemas import Branch, CouplingParams, Sign
from model_core.service import decoupled_exponent, eigen_mode, radial_power, vielbein_terms

logger = logging.getLogger(__name__)


def _require_positive(rho: float):
    if not rho > 0:
        raise DomainError(f"Residuals and derivatives need rho > 0, got {rho}")


def _massless_residual(values, derivs, c: CouplingParams, rho: float, branch: Branch) -> MasslessResidual:
    _require_positive(rho)
    v1, v2 = complex(values[0]), complex(values[1])
    d1, d2 = complex(derivs[0]), complex(derivs[1])
    _, _, h = vielbein_terms(rho, c.rho0)
    p_over_rho = radial_power(branch, c) / rho
    two_k = 2.0 * decoupled_exponent(branch, c)

    terms1 = (d1, -p_over_rho * v1, -h * (two_k - 2.0 * c.ft3) * v1, -h * 2.0 * c.ftp * v2)
    terms2 = (d2, -p_over_rho * v2, -h * (two_k + 2.0 * c.ft3) * v2, -h * 2.0 * c.ftm * v1)
    scale = max(abs(t) for t in terms1 + terms2)
    return MasslessResidual(r1=sum(terms1), r2=sum(terms2), scale=scale)


def massless_residual_A(values, derivs, c: CouplingParams, rho: float) -> MasslessResidual:
    """Left-hand sides of the decoupled A system at one radius."""
    return _massless_residual(values, derivs, c, rho, Branch.A)


def massless_residual_B(values, derivs, c: CouplingParams, rho: float) -> MasslessResidual:
    return _massless_residual(values, derivs, c, rho, Branch.B)


def _massless_block(c: CouplingParams, rho: float, branch: Branch, h: float) -> np.ndarray:
    p_over_rho = radial_power(branch, c) / rho
    two_k = 2.0 * decoupled_exponent(branch, c)
    return np.array(
        [
            [p_over_rho + h * (two_k - 2.0 * c.ft3), 2.0 * h * c.ftp],
            [2.0 * h * c.ftm, p_over_rho + h * (two_k + 2.0 * c.ft3)],
        ],
        dtype=complex,
    )


def coupled_jacobian(c: CouplingParams, m: float, rho: float) -> np.ndarray:
    """Matrix J with d(A^I, A^II, B^I, B^II)/drho = J (A^I, A^II, B^I, B^II).

    The -if prefactor of the full system is inverted analytically, so the
    mass enters as -i m/f between A^X and B^X.
    """
    _require_positive(rho)
    f, _, h = vielbein_terms(rho, c.rho0)
    jac = np.zeros((4, 4), dtype=complex)
    jac[:2, :2] = _massless_block(c, rho, Branch.A, h)
    jac[2:, 2:] = _massless_block(c, rho, Branch.B, h)
    if m != 0.0:
        mass = -1j * m / f
        jac[0, 2] = jac[1, 3] = mass
        jac[2, 0] = jac[3, 1] = mass
    return jac


def coupled_rhs(state: SpinorState, c: CouplingParams, m: float, rho: float) -> np.ndarray:
    y = np.array(state.as_tuple(), dtype=complex)
    return coupled_jacobian(c, m, rho) @ y


def coupled_residual(state: SpinorState, derivs, c: CouplingParams, m: float, rho: float) -> CoupledResidual:
    """The four left-hand sides of the full system, -if{...} + m(partner)."""
    _require_positive(rho)
    f, _, _ = vielbein_terms(rho, c.rho0)
    y = np.array(state.as_tuple(), dtype=complex)
    d = np.asarray(derivs, dtype=complex)
    massless = coupled_jacobian(c, 0.0, rho)
    partner = y[[2, 3, 0, 1]]

    bracket = d - massless @ y
    residual = -1j * f * bracket + m * partner
    terms = np.concatenate([np.abs(f * d), np.abs(f * massless * y[None, :]).ravel(), np.abs(m * partner)])
    return CoupledResidual(
        rA1=residual[0], rA2=residual[1], rB1=residual[2], rB2=residual[3],
        m=m, scale=float(terms.max()),
    )


def analytic_state(
    c: CouplingParams,
    sign: Sign,
    rho: float,
    secular: bool = False,
    amplitude_A: complex = 1.0,
    amplitude_B: complex = 1.0,
) -> SpinorState:
    """Closed-form massless state (both branches, same eigenmode) at one radius."""
    mode = eigen_mode(c, sign)
    spec_a = ProfileSpec(branch=Branch.A, mode=mode, params=c, amplitude=amplitude_A, secular=secular)
    spec_b = ProfileSpec(branch=Branch.B, mode=mode, params=c, amplitude=amplitude_B, secular=secular)
    a1, a2 = profile(spec_a, rho)
    b1, b2 = profile(spec_b, rho)
    return SpinorState(rho=rho, aI=a1, aII=a2, bI=b1, bII=b2)


def _to_state(rho: float, y: np.ndarray) -> SpinorState:
    return SpinorState(rho=float(rho), aI=y[0], aII=y[1], bI=y[2], bII=y[3])


def _absolute_tolerance(y0: np.ndarray, tol: float) -> np.ndarray:
    """Per-block atol, relative to the block's initial norm.

    An empty block borrows the other block's norm. The floor keeps every
    error scale a normal float: complex division by a subnormal scale
    overflows to inf * 0 = nan inside the error norm.
    """
    norms = [float(np.linalg.norm(y0[:2])), float(np.linalg.norm(y0[2:]))]
    reference = max(norms)
    block = [tol * settings.ATOL_RELATIVE_FLOOR * (norm if norm > 0 else reference) for norm in norms]
    return np.maximum(np.repeat(block, 2), settings.ATOL_ABSOLUTE_FLOOR)


def integrate(
    c: CouplingParams,
    m: float,
    init: SpinorState,
    rho_end: float,
    tol: float = settings.INTEGRATION_TOLERANCE,
) -> List[SpinorState]:
    """Adaptive propagation of the full four-function system from init.rho to rho_end."""
    rho_start = init.rho
    if not 0 < rho_start < rho_end:
        raise DomainError(f"Need 0 < rho_start < rho_end, got {rho_start} and {rho_end}")
    if not tol > 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")

    y0 = np.array(init.as_tuple(), dtype=complex)
    atol = _absolute_tolerance(y0, tol)

    def rhs(rho, y):
        return coupled_jacobian(c, m, rho) @ y

    sol = solve_ivp(rhs, (rho_start, rho_end), y0, method=settings.INTEGRATION_METHOD, rtol=tol, atol=atol)
    logger.debug("Propagated %s from %g to %g in %d steps (%s)", c, rho_start, rho_end, sol.t.size - 1, sol.message)

    finite = np.all(np.isfinite(sol.y), axis=0)
    if not finite.all():
        last = int(np.argmin(finite)) - 1
        raise NonFiniteStateError(
            f"Non-finite state at rho={sol.t[last + 1]:g}",
            last_state=_to_state(sol.t[max(last, 0)], sol.y[:, max(last, 0)]),
        )

    steps = np.diff(sol.t)
    floor = settings.STEP_FLOOR_FACTOR * c.rho0
    collapsed = np.nonzero(steps[:-1] < floor)[0]
    if sol.status < 0 or collapsed.size:
        last = int(collapsed[0]) if collapsed.size else sol.t.size - 1
        raise StepSizeUnderflowError(
            f"Step size collapsed near rho={sol.t[last]:g}: {sol.message}",
            last_state=_to_state(sol.t[last], sol.y[:, last]),
        )

    return [_to_state(rho, sol.y[:, i]) for i, rho in enumerate(sol.t)]


def default_grid(rho0: float) -> np.ndarray:
    return rho0 * np.geomspace(settings.GRID_MIN_FACTOR, settings.GRID_MAX_FACTOR, settings.GRID_POINTS)


def _branch_residual(spec: ProfileSpec, radii: Sequence[float]) -> float:
    operator = massless_residual_A if spec.branch is Branch.A else massless_residual_B
    worst = 0.0
    for rho in radii:
        res = operator(profile(spec, rho), profile_derivative(spec, rho), spec.params, rho)
        worst = max(worst, res.relative)
    return worst


def max_relative_residual(
    c: CouplingParams, sign: Sign, radii: Optional[Sequence[float]] = None, secular: bool = False
) -> float:
    radii = default_grid(c.rho0) if radii is None else radii
    mode = eigen_mode(c, sign)
    return max(
        _branch_residual(ProfileSpec(branch=branch, mode=mode, params=c, secular=secular), radii)
        for branch in (Branch.A, Branch.B)
    )


def _relative_deviation(numeric: np.ndarray, exact: np.ndarray) -> float:
    reference = np.linalg.norm(exact)
    if reference == 0.0:
        return float(np.linalg.norm(numeric))
    return float(np.linalg.norm(numeric - exact) / reference)


def verify_analytic(
    c: CouplingParams,
    sign: Sign,
    grid: Optional[Sequence[float]] = None,
    tol: float = settings.RESIDUAL_TOLERANCE,
    secular: bool = False,
    m: float = 0.0,
) -> VerificationReport:
    """Residual check on a radius grid plus an independent ODE propagation."""
    grid = default_grid(c.rho0) if grid is None else np.asarray(grid, dtype=float)
    if grid.size < 2 or grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise DomainError("Verification grid must be strictly positive and ascending")

    mode = eigen_mode(c, sign)
    residual_a = _branch_residual(ProfileSpec(branch=Branch.A, mode=mode, params=c, secular=secular), grid)
    residual_b = _branch_residual(ProfileSpec(branch=Branch.B, mode=mode, params=c, secular=secular), grid)

    init = analytic_state(c, sign, float(grid[0]), secular=secular)
    path = integrate(c, m, init, float(grid[-1]), settings.INTEGRATION_TOLERANCE)
    exact = np.array(analytic_state(c, sign, float(grid[-1]), secular=secular).as_tuple())
    numeric = np.array(path[-1].as_tuple())
    deviation = max(
        _relative_deviation(numeric[:2], exact[:2]),
        _relative_deviation(numeric[2:], exact[2:]),
    )

    passed = max(residual_a, residual_b) <= tol
    if m == 0.0:
        passed = passed and deviation <= settings.PROPAGATION_TOLERANCE
    if not passed:
        logger.warning(
            "Verification failed for %s (%s): residuals %.3e/%.3e, deviation %.3e",
            c, sign, residual_a, residual_b, deviation,
        )
    return VerificationReport(
        params=c, sign=sign, secular=secular, m=m, points=int(grid.size),
        rho_min=float(grid[0]), rho_max=float(grid[-1]),
        residual_A=residual_a, residual_B=residual_b,
        propagation_deviation=deviation, tol=tol, passed=passed,
    )
