from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from core.config import settings
from model_core.schemas import Branch, Sign
from normalization.schemas import Convention


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    PLOT_COLUMNS = "plot_columns"


class ParamRange(BaseModel):
    min: float = 0.0
    max: float = 0.0
    count: int = 1

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_bounds(self):
        if self.count < 1:
            raise ValueError(f"Range count must be at least 1, got {self.count}")
        if not (np.isfinite(self.min) and np.isfinite(self.max)):
            raise ValueError("Range bounds must be finite")
        if self.min > self.max:
            raise ValueError(f"Range min {self.min} exceeds max {self.max}")
        return self

    @classmethod
    def fixed(cls, value: float) -> "ParamRange":
        return cls(min=value, max=value, count=1)

    def values(self) -> List[float]:
        if self.count == 1:
            return [float(self.min)]
        return [float(x) for x in np.linspace(self.min, self.max, self.count)]


class GridSpec(BaseModel):
    f56: ParamRange = ParamRange()
    ft56: ParamRange = ParamRange()
    ft3: ParamRange = ParamRange()
    ftp: ParamRange = ParamRange()
    ftm: ParamRange = ParamRange()
    n_range: Tuple[int, int] = settings.N_RANGE
    rho0: float = 1.0
    sign_set: List[Sign] = [Sign.PLUS, Sign.MINUS]
    # First entry is the B window reported in `normalizable`
    conventions: List[Convention] = [Convention.SHIFTED_INDEX, Convention.PAPER_LITERAL]
    verify: bool = False
    quad_check: bool = False

    model_config = ConfigDict(frozen=True)

    @field_validator("sign_set", "conventions")
    @classmethod
    def check_unique_nonempty(cls, value):
        if not value:
            raise ValueError("At least one entry is required")
        if len(set(value)) != len(value):
            raise ValueError("Entries must be distinct")
        return value

    @model_validator(mode="after")
    def check_grid(self):
        low, high = self.n_range
        if low > high:
            raise ValueError(f"Empty n range {self.n_range}")
        if not (np.isfinite(self.rho0) and self.rho0 > 0):
            raise ValueError(f"rho0 must be positive and finite, got {self.rho0}")
        return self

    @property
    def axes(self) -> List[ParamRange]:
        return [self.f56, self.ft56, self.ft3, self.ftp, self.ftm]


class ScanRecord(BaseModel):
    f56: float
    ft56: float
    ft3: float
    ftp: float
    ftm: float
    rho0: float
    sign: Sign
    branch: Branch
    convention: Optional[Convention] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    normalizable: List[int] = Field(default_factory=list)
    # Same list under the second B convention, when two are scanned
    alternative_normalizable: Optional[List[int]] = None
    ftp_zero: bool = False
    degenerate: bool = False
    complex_alpha: bool = False
    quadrature_normalizable: Optional[List[int]] = None
    agree: Optional[bool] = None
    max_residual: Optional[float] = None
    error: Optional[str] = None
