"""
Exceptions raised across the gaple stack

Every error the package raises on bad input derives from GapleError, so the
command line can report any of them with a single handler.
"""
from typing import Optional


class GapleError(Exception):
    """Base exception for gaple errors"""
    pass


class LayoutParseError(GapleError):
    """Raised when a layout file cannot be parsed"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = ''
        if line is not None:
            where = f' (line {line}' + (f', column {column})' if column is not None else ')')
        super().__init__(f'{message}{where}')


class HeaderError(LayoutParseError):
    """Missing or unsupported header line"""
    pass


class RaggedRowError(LayoutParseError):
    """Grid rows of unequal length"""
    pass


class UnknownSymbolError(LayoutParseError):
    """Grid character not in the legend"""
    pass


class OpenBorderError(LayoutParseError):
    """Border cell that is not a wall"""
    pass


class EmptyGridError(LayoutParseError):
    """No grid rows after the legend"""
    pass


class GenerationError(GapleError):
    """Raised when house generation parameters are infeasible"""
    pass


class TaskInfeasibleError(GapleError):
    """Raised when a target cannot be seen or approached"""
    pass


class DimensionError(GapleError):
    """Raised on mismatched or too-small array dimensions"""
    pass


class NumericError(GapleError):
    """Raised when a network produces non-finite values"""
    pass


class ActionIndexError(GapleError):
    """Raised when an action index is outside 0-5"""
    pass


class AnalysisError(GapleError):
    """Raised for unknown feature extractors or poses that cannot be compared"""
    pass


class DatasetError(GapleError):
    """Raised when a perception dataset is empty or unreadable"""
    pass


class CheckpointError(GapleError):
    """Raised when a checkpoint file is malformed"""
    pass


class ConfigError(GapleError):
    """Raised for unknown or invalid configuration keys"""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        super().__init__(message if line is None else f'{message} (line {line})')
