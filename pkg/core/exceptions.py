from typing import Any, Optional


class ModelError(Exception):
    """Base error for every failure the library reports.

    `detail` is the one-line message printed after "Error:" on stderr;
    `exit_code` is the status the command line exits with (1 for failed
    computations, 2 for rejected input).
    """

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class NonFiniteError(ModelError):
    exit_code = 2


class NonPositiveScaleError(ModelError):
    exit_code = 2


class DomainError(ModelError):
    pass


class SingularOriginError(DomainError):
    pass


class MismatchedSpecsError(ModelError):
    pass


class StepSizeUnderflowError(ModelError):
    def __init__(self, detail: str, last_state: Any = None):
        super().__init__(detail)
        # Last accepted SpinorState before the step size collapsed
        self.last_state = last_state


class NonFiniteStateError(ModelError):
    def __init__(self, detail: str, last_state: Any = None):
        super().__init__(detail)
        self.last_state = last_state


class ToleranceNotMetError(ModelError):
    def __init__(self, detail: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(detail)
        self.estimate = estimate
        self.error = error


class OutputError(ModelError):
    pass
