"""Exception types raised across the package."""


class DPTraceError(Exception):
    pass


class TypeMismatch(DPTraceError):
    def __init__(self, node, expected, found):
        self.node, self.expected, self.found = node, expected, found
        where = type(node).__name__ if node is not None else "value"
        super().__init__(f"{where}: expected {expected}, found {found}")


class InvalidWidth(DPTraceError):
    def __init__(self, width):
        self.width = width
        super().__init__(f"Laplace width must be a positive constant, got {width!r}")


class EvalError(DPTraceError):
    pass


class AbortEncountered(EvalError):
    def __init__(self, message: str):
        self.message = message
        super().__init__(message)


class FuelExhausted(EvalError):
    pass


class BudgetExceeded(DPTraceError):
    pass


class MetricNotMonotone(DPTraceError):
    pass


class NoMatchingPath(DPTraceError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"no symbolic path can produce output {key}")


class WidthMismatch(DPTraceError):
    pass


class ArityMismatch(DPTraceError):
    pass


class SolverError(DPTraceError):
    pass


class SolverCrashed(SolverError):
    pass


class SolverNotFound(SolverError):
    pass


class ParseError(SolverError):
    def __init__(self, raw: str):
        self.raw = raw
        super().__init__(f"cannot parse solver output: {raw[:200]!r}")


class DomainError(DPTraceError, ValueError):
    pass


class EmptyInput(DPTraceError, ValueError):
    pass


class TooFewInputs(DPTraceError, ValueError):
    pass
