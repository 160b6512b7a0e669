"""Parameter validation, vielbein geometry and the 2x2 mixing eigenproblem.

The massless ansatz rho^p f^(k + alpha) v turns both decoupled systems into

    M v = alpha v,    M = [[-ft3, ftp], [ftm, ft3]]

so every exponent and amplitude ratio below is read off M.

The second group of four equations has the same structure and is handled by
this code after relabeling its three mixing strengths onto (ft3, ftp, ftm);
nothing here is specific to the first group beyond the field names.
"""
import logging
import math
from typing import Mapping, Sequence, Tuple, Union

import numpy as np

from core.config import settings
from core.exceptions import DomainError, NonFiniteError, NonPositiveScaleError
from model_core.schemas import Branch, CouplingParams, EigenMode, Sign, VielbeinSample

logger = logging.getLogger(__name__)

PARAM_FIELDS = ("f56", "ft56", "ft3", "ftp", "ftm", "n", "rho0")


def validate_params(raw: Union[Mapping[str, float], Sequence[float]]) -> CouplingParams:
    """Check a raw 7-field record and build CouplingParams.

    Accepts either a mapping keyed by field name or a sequence ordered as
    (f56, ft56, ft3, ftp, ftm, n, rho0).
    """
    if isinstance(raw, Mapping):
        values = {name: raw[name] for name in PARAM_FIELDS if name in raw}
    else:
        if len(raw) != len(PARAM_FIELDS):
            raise DomainError(f"Expected {len(PARAM_FIELDS)} values, got {len(raw)}")
        values = dict(zip(PARAM_FIELDS, raw))

    for name, value in values.items():
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise NonFiniteError(f"{name} is not a real number: {value!r}")
        if not math.isfinite(value):
            raise NonFiniteError(f"{name} must be finite, got {value}")
        values[name] = value

    if values.get("rho0", 1.0) <= 0:
        raise NonPositiveScaleError(f"rho0 must be strictly positive, got {values['rho0']}")

    return CouplingParams(**values)


def vielbein_terms(rho, rho0: float):
    """Closed-form f, df/drho and (1/2f) df/drho; works on scalars and arrays."""
    f = 1.0 + rho ** 2 / (2.0 * rho0) ** 2
    df = rho / (2.0 * rho0 ** 2)
    return f, df, df / (2.0 * f)


def vielbein(rho: float, rho0: float) -> VielbeinSample:
    if rho < 0:
        raise DomainError(f"Radius must be non-negative, got {rho}")
    if rho0 <= 0:
        raise NonPositiveScaleError(f"rho0 must be strictly positive, got {rho0}")
    f, df, half_dlogf = vielbein_terms(float(rho), float(rho0))
    return VielbeinSample(rho=rho, f=f, df=df, half_dlogf=half_dlogf)


def discriminant(c: CouplingParams) -> float:
    return c.ft3 ** 2 + c.ftp * c.ftm


def coupling_matrix(c: CouplingParams) -> np.ndarray:
    return np.array([[-c.ft3, c.ftp], [c.ftm, c.ft3]], dtype=complex)


def alpha_branches(c: CouplingParams) -> Tuple[complex, complex]:
    d = discriminant(c)
    if d >= 0:
        root = complex(math.sqrt(d), 0.0)
    else:
        root = complex(0.0, math.sqrt(-d))
    return root, -root


def is_degenerate(c: CouplingParams) -> bool:
    """Vanishing discriminant with a non-zero coupling matrix (Jordan block).

    The tolerance is relative to the two summands of D, the size of its
    rounding error; nilpotent matrices have D = 0 exactly.
    """
    if c.ft3 == 0.0 and c.ftp == 0.0 and c.ftm == 0.0:
        return False
    scale = c.ft3 ** 2 + abs(c.ftp * c.ftm)
    return abs(discriminant(c)) <= settings.DEGENERACY_TOLERANCE * scale


def _unit_vector(v1: complex, v2: complex) -> Tuple[complex, complex]:
    norm = math.hypot(abs(v1), abs(v2))
    v1, v2 = v1 / norm, v2 / norm
    # Fix the overall phase: leading non-zero component real and positive
    anchor = v1 if abs(v1) > 1e-15 else v2
    phase = anchor.conjugate() / abs(anchor)
    return v1 * phase, v2 * phase


def eigen_mode(c: CouplingParams, sign: Sign) -> EigenMode:
    sign = Sign(sign)

    if c.ftp == 0.0 and c.ftm == 0.0:
        # Diagonal case: (1, 0) carries alpha = -ft3, (0, 1) carries alpha = +ft3
        first = (sign is Sign.MINUS) if c.ft3 >= 0 else (sign is Sign.PLUS)
        if first:
            return EigenMode(alpha=complex(-c.ft3), amp_I=1.0, amp_II=0.0, sign=sign)
        return EigenMode(alpha=complex(c.ft3), amp_I=0.0, amp_II=1.0, sign=sign)

    degenerate = is_degenerate(c)
    if degenerate:
        alpha = 0j
    else:
        alpha = alpha_branches(c)[0 if sign is Sign.PLUS else 1]

    # Two algebraically equal ratio formulas; each row of (M - alpha) gives one.
    # v2/v1 = (alpha + ft3)/ftp  and  v2/v1 = ftm/(alpha - ft3)
    den_plus = complex(c.ftp)
    den_minus = alpha - c.ft3
    matrix_scale = max(abs(c.ft3), abs(c.ftp), abs(c.ftm))
    if max(abs(den_plus), abs(den_minus)) <= 1e-14 * matrix_scale:
        # Both denominators vanish: the first component is forced to zero
        v1, v2 = 0j, 1 + 0j
    elif abs(den_plus) >= abs(den_minus):
        v1, v2 = den_plus, alpha + c.ft3
    else:
        v1, v2 = den_minus, complex(c.ftm)

    amp_I, amp_II = _unit_vector(complex(v1), complex(v2))
    if degenerate:
        logger.debug("Degenerate coupling matrix for %s; single eigenvector returned", c)
    return EigenMode(alpha=alpha, amp_I=amp_I, amp_II=amp_II, degenerate=degenerate, sign=sign)


def generalized_vector(c: CouplingParams, mode: EigenMode) -> np.ndarray:
    """Solve M w = v in the least-squares sense for the secular partner solution."""
    if not mode.degenerate:
        raise DomainError("Generalized eigenvector only exists for degenerate modes")
    v = np.array(mode.vector, dtype=complex)
    w, *_ = np.linalg.lstsq(coupling_matrix(c), v, rcond=None)
    return w


def decoupled_exponent(branch: Branch, c: CouplingParams) -> float:
    """Exponent k of the decoupled factor f^k: 1/2(1 -+ 2 F56 - 2 Ft56)."""
    if Branch(branch) is Branch.A:
        return 0.5 * (1.0 - 2.0 * c.f56 - 2.0 * c.ft56)
    return 0.5 * (1.0 + 2.0 * c.f56 - 2.0 * c.ft56)


def radial_power(branch: Branch, c: CouplingParams) -> float:
    """Exponent p of the rho^p factor: n on branch A, -n-1 on branch B."""
    return c.n if Branch(branch) is Branch.A else -c.n - 1.0


def mirror_params(c: CouplingParams) -> CouplingParams:
    """Parameters under which branch B equals branch A: n -> -n-1, F56 -> -F56."""
    return c.with_updates(n=-c.n - 1.0, f56=-c.f56)


def alpha_is_complex(c: CouplingParams) -> bool:
    return discriminant(c) < 0 and not is_degenerate(c)

