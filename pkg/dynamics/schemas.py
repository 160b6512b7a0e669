from typing import Optional

from pydantic import BaseModel, ConfigDict

from model_core.schemas import CouplingParams, Sign


class MasslessResidual(BaseModel):
    r1: complex
    r2: complex
    # Largest individual term magnitude, for relative reporting
    scale: float

    model_config = ConfigDict(frozen=True)

    @property
    def relative(self) -> float:
        worst = max(abs(self.r1), abs(self.r2))
        if self.scale == 0.0:
            return 0.0 if worst == 0.0 else float("inf")
        return worst / self.scale


class CoupledResidual(BaseModel):
    rA1: complex
    rA2: complex
    rB1: complex
    rB2: complex
    m: float = 0.0
    scale: float = 0.0

    model_config = ConfigDict(frozen=True)

    @property
    def relative(self) -> float:
        worst = max(abs(self.rA1), abs(self.rA2), abs(self.rB1), abs(self.rB2))
        if self.scale == 0.0:
            return 0.0 if worst == 0.0 else float("inf")
        return worst / self.scale


class VerificationReport(BaseModel):
    params: CouplingParams
    sign: Sign
    secular: bool = False
    m: float = 0.0
    points: int
    rho_min: float
    rho_max: float
    residual_A: float
    residual_B: float
    propagation_deviation: Optional[float] = None
    tol: float
    passed: bool

    @property
    def max_residual(self) -> float:
        return max(self.residual_A, self.residual_B)
