import math
from enum import Enum

from pydantic import BaseModel, ConfigDict, computed_field, model_validator

from core.config import settings


class Sign(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def factor(self) -> int:
        return 1 if self is Sign.PLUS else -1

    @property
    def opposite(self) -> "Sign":
        return Sign.MINUS if self is Sign.PLUS else Sign.PLUS


class Branch(str, Enum):
    A = "A"
    B = "B"


class CouplingParams(BaseModel):
    """Spin-connection strengths, mode index and disc scale.

    f56, ft56: F_56 and its tilde partner; ft3: diagonal family mixing;
    ftp, ftm: the two off-diagonal mixings. All dimensionless; rho0 is a length.
    """

    f56: float = 0.0
    ft56: float = 0.0
    ft3: float = 0.0
    ftp: float = 0.0
    ftm: float = 0.0
    n: float = 0.0
    rho0: float = 1.0

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_finite_and_scale(self):
        for name in ("f56", "ft56", "ft3", "ftp", "ftm", "n", "rho0"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.rho0 <= 0:
            raise ValueError("rho0 must be strictly positive")
        return self

    @computed_field
    @property
    def integer_mode(self) -> bool:
        return abs(self.n - round(self.n)) <= settings.INTEGER_TOLERANCE

    def with_updates(self, **changes) -> "CouplingParams":
        return CouplingParams(**{**self.model_dump(exclude={"integer_mode"}), **changes})


class VielbeinSample(BaseModel):
    rho: float
    f: float
    df: float
    half_dlogf: float

    model_config = ConfigDict(frozen=True)


class EigenMode(BaseModel):
    """One branch of the 2x2 mixing problem M v = alpha v.

    The exponent of f in the mixing factor equals alpha itself, so no
    separate field exists for it.
    """

    alpha: complex
    amp_I: complex
    amp_II: complex
    degenerate: bool = False
    sign: Sign

    model_config = ConfigDict(frozen=True)

    @property
    def vector(self):
        return (self.amp_I, self.amp_II)
