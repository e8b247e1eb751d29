class LayerNTKError(Exception):
    """Base class for library errors."""


class DomainError(LayerNTKError, ValueError):
    """An argument lies outside the domain of the operation (e.g. |u| > 1)."""


class DegenerateError(LayerNTKError, ArithmeticError):
    """A normalising quantity (denominator, variance, last-layer form) vanished."""


class ConfigError(LayerNTKError, ValueError):
    """Malformed or incomplete experiment configuration."""


class IDXFormatError(LayerNTKError, ValueError):
    """Bad magic number or truncated IDX payload."""


class DivergenceError(LayerNTKError, ArithmeticError):
    """Training loss blew past the divergence guard."""


class QuadratureAccuracyWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass
