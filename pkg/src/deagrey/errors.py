"""Exception hierarchy.

Validation problems (bad input data, bad arguments) map to CLI exit code 2,
numerical failures (solver or fit breakdowns) to exit code 3.
"""


class DeaGreyError(Exception):
    exit_code = 1

    def to_dict(self):
        return {"type": type(self).__name__, "message": str(self)}


class ValidationError(DeaGreyError, ValueError):
    exit_code = 2


class DuplicateKeyError(ValidationError):
    def __init__(self, keys):
        self.keys = list(keys)
        shown = ", ".join(str(k) for k in self.keys[:10])
        super().__init__(f"duplicate (region, indicator, year) keys: {shown}")

    def to_dict(self):
        d = super().to_dict()
        d["keys"] = [list(k) for k in self.keys]
        return d


class MissingDataError(ValidationError):
    def __init__(self, message, missing=()):
        self.missing = list(missing)
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        d["missing"] = [list(m) if isinstance(m, tuple) else m for m in self.missing]
        return d


class UnclassifiedIndicatorError(ValidationError):
    def __init__(self, code):
        self.code = code
        super().__init__(f"indicator {code!r} is not in the energy taxonomy")


class NumericalError(DeaGreyError, ArithmeticError):
    exit_code = 3


class SolverError(NumericalError):
    """The simplex solver failed where a well-formed model cannot fail."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        d["diagnostics"] = self.diagnostics
        return d


class FitError(NumericalError):
    pass
