import math
from enum import Enum
from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict

from model_core.schemas import Branch, Sign


class Convention(str, Enum):
    PAPER_LITERAL = "paper_literal"
    SHIFTED_INDEX = "shifted_index"


class Endpoint(str, Enum):
    ORIGIN = "origin"
    INFINITY = "infinity"


class Divergent(BaseModel):
    kind: Literal["divergent"] = "divergent"
    endpoint: Endpoint
    # Which check fired: closed_form, origin_slope, tail_slope or growth
    test: str = "closed_form"

    model_config = ConfigDict(frozen=True)


class QuadratureResult(BaseModel):
    kind: Literal["finite"] = "finite"
    value: float
    error: float
    converged: bool = True

    model_config = ConfigDict(frozen=True)


NormValue = Union[float, Divergent]
QuadratureValue = Union[QuadratureResult, Divergent]


class WindowInterval(BaseModel):
    """Open interval lower < n < upper of normalizable mode indices."""

    lower: float
    upper: float
    branch: Branch
    sign: Sign
    convention: Optional[Convention] = None

    model_config = ConfigDict(frozen=True)

    def contains(self, n: float) -> bool:
        return self.lower < n < self.upper

    def integers(self, n_min: int, n_max: int) -> List[int]:
        return [n for n in range(n_min, n_max + 1) if self.contains(n)]

    def label(self) -> str:
        def fmt(x: float) -> str:
            return str(int(x)) if float(x).is_integer() else repr(float(x))

        return f"({fmt(self.lower)}, {fmt(self.upper)})"


class NormReport(BaseModel):
    branch: Branch
    sign: Sign
    n: float
    # Exponent of the eigenmode whose normalizability the window predicts
    alpha: complex
    window: WindowInterval
    window_verdict: bool
    window_verdicts: Dict[Convention, bool] = {}
    matching_conventions: List[Convention] = []
    convention_used: Optional[Convention] = None
    closed_form: NormValue
    quadrature: QuadratureValue
    agree: bool

    @property
    def quadrature_finite(self) -> bool:
        return isinstance(self.quadrature, QuadratureResult)

    @property
    def closed_form_finite(self) -> bool:
        return not isinstance(self.closed_form, Divergent) and math.isfinite(self.closed_form)


class ConventionAdjudication(BaseModel):
    convention: Optional[Convention] = None
    points: int
    mismatches: Dict[Convention, int]

    def summary(self) -> str:
        counts = ", ".join(f"{conv.value} {count}" for conv, count in self.mismatches.items())
        if self.convention is None:
            return f"B window reading undecided over {self.points} checks (mismatches: {counts})"
        return f"B window reading confirmed by quadrature: {self.convention.value} (mismatches over {self.points} checks: {counts})"
