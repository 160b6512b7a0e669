import cmath
from enum import Enum

from pydantic import BaseModel, ConfigDict, model_validator

from model_core.schemas import Branch, CouplingParams, EigenMode


class ProfileSpec(BaseModel):
    branch: Branch
    mode: EigenMode
    params: CouplingParams
    # Overall constant in front of the unit eigenvector (the decoupled N, a or b)
    amplitude: complex = 1 + 0j
    # Log-f partner solution of a degenerate mode
    secular: bool = False

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_amplitude(self):
        if not cmath.isfinite(self.amplitude):
            raise ValueError("amplitude must be finite")
        if self.secular and not self.mode.degenerate:
            raise ValueError("secular profiles require a degenerate mode")
        return self


class SpinorState(BaseModel):
    """Values of A_n^I, A_n^II, B_{n+1}^I, B_{n+1}^II at one radius."""

    rho: float
    aI: complex = 0j
    aII: complex = 0j
    bI: complex = 0j
    bII: complex = 0j

    model_config = ConfigDict(frozen=True)

    def as_tuple(self):
        return (self.aI, self.aII, self.bI, self.bII)


class PlotQuantity(str, Enum):
    REAL_I = "real_I"
    IMAG_I = "imag_I"
    ABS_I = "abs_I"
    REAL_II = "real_II"
    IMAG_II = "imag_II"
    ABS_II = "abs_II"
    INTEGRAND = "integrand"


class PlotPoint(BaseModel):
    rho: float
    value: float
