"""Exception types raised across the package."""


class DPMisspecError(Exception):
    """Base class for all package errors."""


class ValidationError(DPMisspecError, ValueError):
    """Invalid input (bad vote values, inconsistent dimensions, bad config)."""


class DimMismatch(ValidationError):
    pass


class CapExceeded(DPMisspecError):
    """Exact enumeration requested for more LFs than the enumeration cap allows."""

    def __init__(self, m, cap):
        super().__init__(
            f"exact enumeration needs m <= {cap} labeling functions, got m = {m}; "
            "use Gibbs mode instead")
        self.m = m
        self.cap = cap


class NonFinite(DPMisspecError, FloatingPointError):
    """An objective or parameter became NaN/inf during optimization."""


class NegativeGamma(ValidationError):
    pass


class SingleClass(ValidationError):
    """ROC-AUC requested on a truth vector holding only one class."""


class EmptyCorpus(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, path, line, column, message):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = path
        self.line = line
        self.column = column


class RangeError(ValidationError):
    def __init__(self, path, line, column, value, allowed):
        super().__init__(
            f"{path}:{line}:{column}: value {value!r} outside allowed set {allowed}")
        self.path = path
        self.line = line
        self.column = column
        self.value = value


class ViolationFound(DPMisspecError):
    """A bound-verification campaign found an empirical value above its bound."""

    def __init__(self, summary, witnesses):
        n = len(witnesses)
        super().__init__(f"{n} bound violation(s) found; first witness: {witnesses[0]}")
        self.summary = summary
        self.witnesses = witnesses
