# Standard exceptions for consistent error reporting across the package.
# exit_code follows the CLI contract: 1 = user error, 2 = internal error.

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_INTERNAL_ERROR = 2


class DynoodError(Exception):
    def __init__(self, exit_code: int = EXIT_INTERNAL_ERROR, detail: str = "Internal error"):
        super().__init__(detail)
        self.exit_code = exit_code
        self.detail = detail


class ConfigurationError(DynoodError):
    def __init__(self, detail="Invalid configuration"):
        super().__init__(exit_code=EXIT_USER_ERROR, detail=detail)


class ParseError(ConfigurationError):
    def __init__(self, detail="Malformed file", line: int | None = None):
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail=detail)
        self.line = line


class ContractViolation(DynoodError):
    def __init__(self, detail="Precondition violated"):
        super().__init__(exit_code=EXIT_USER_ERROR, detail=detail)


class DimensionMismatchError(ContractViolation):
    def __init__(self, detail="Dimension mismatch"):
        super().__init__(detail=detail)


class GraphIndexError(DynoodError, IndexError):
    def __init__(self, detail="Index out of range"):
        super().__init__(exit_code=EXIT_USER_ERROR, detail=detail)


class DomainError(DynoodError, ValueError):
    def __init__(self, detail="Input outside the function domain"):
        super().__init__(exit_code=EXIT_USER_ERROR, detail=detail)


class UndefinedMetricError(DynoodError, ValueError):
    def __init__(self, detail="Metric undefined for this input"):
        super().__init__(exit_code=EXIT_USER_ERROR, detail=detail)


class NumericalError(DynoodError):
    def __init__(self, detail="Non-finite value encountered", **context):
        if context:
            where = ", ".join(f"{key}={value}" for key, value in context.items())
            detail = f"{detail} ({where})"
        super().__init__(exit_code=EXIT_INTERNAL_ERROR, detail=detail)
        self.context = context
