"""Exception types shared across the lab."""


class LabError(Exception):
    """Base class for all lab errors."""


class FormatError(LabError):
    """A file does not match its declared format (e.g. a missing column)."""


class RowError(LabError):
    """A single data row is malformed; carries the 1-based file line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class ContractError(LabError):
    """A caller violated an operation's precondition."""


class SchemeError(LabError):
    """A label or prefix is unknown to the scheme registry."""


class SpecError(LabError):
    """A synthesis or grid specification is internally inconsistent."""


class NonFiniteError(LabError):
    """A loss or gradient became NaN/Inf during training."""
