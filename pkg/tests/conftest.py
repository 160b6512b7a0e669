import pytest
from click.testing import CliRunner
from hypothesis import strategies as st

from model_core.schemas import CouplingParams


def bounded(limit: float):
    return st.floats(min_value=-limit, max_value=limit, allow_nan=False, allow_subnormal=False)


@st.composite
def coupling_params(draw, f_limit=1.0, mix_limit=0.5, n_values=(-2, 2), rho0_range=(0.5, 2.0)):
    """Random couplings small enough that propagation errors stay below 1e-6."""
    return CouplingParams(
        f56=draw(bounded(f_limit)),
        ft56=draw(bounded(f_limit)),
        ft3=draw(bounded(mix_limit)),
        ftp=draw(bounded(mix_limit)),
        ftm=draw(bounded(mix_limit)),
        n=float(draw(st.integers(*n_values))),
        rho0=draw(st.floats(*rho0_range)),
    )


@pytest.fixture
def decoupled():
    """Zero mixing, F56 = 0.75, tilde F56 = 0.25."""
    return CouplingParams(f56=0.75, ft56=0.25)


@pytest.fixture
def mixed():
    """Real, well separated eigenvalues (D = 0.11)."""
    return CouplingParams(f56=0.3, ft56=0.1, ft3=0.3, ftp=0.2, ftm=0.1, n=1.0)


@pytest.fixture
def oscillating():
    """D < 0: alpha = +-i."""
    return CouplingParams(f56=0.2, ft56=0.4, ft3=0.0, ftp=1.0, ftm=-1.0, n=0.0)


@pytest.fixture
def degenerate():
    """D = 0 with a non-zero coupling matrix."""
    return CouplingParams(f56=0.5, ft56=0.5, ft3=1.0, ftp=1.0, ftm=-1.0, n=0.0)


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


@st.composite
def degenerate_params(draw, f_limit=1.0, mix_limit=0.5, n_values=(-2, 2), rho0_range=(0.5, 2.0)):
    """Jordan-block couplings: ftm = -ft3^2/ftp, nilpotent when ft3 = 0, optionally transposed."""
    ft3 = draw(st.one_of(st.just(0.0), bounded(mix_limit)))
    ftp = draw(st.floats(min_value=0.1, max_value=1.0)) * draw(st.sampled_from([-1.0, 1.0]))
    ftm = -ft3 * ft3 / ftp
    if draw(st.booleans()):
        ftp, ftm = ftm, ftp
    return CouplingParams(
        f56=draw(bounded(f_limit)),
        ft56=draw(bounded(f_limit)),
        ft3=ft3,
        ftp=ftp,
        ftm=ftm,
        n=float(draw(st.integers(*n_values))),
        rho0=draw(st.floats(*rho0_range)),
    )


@pytest.fixture
def nilpotent():
    """ft3 = 0, ftp = 1, ftm = 0: D = 0 exactly, M^2 = 0."""
    return CouplingParams(f56=0.5, ft56=0.5, ftp=1.0, n=0.0)
