"""Exception types shared across the package."""


class IsingError(Exception):
    """Base class for errors raised by this package."""


class FormatError(IsingError, ValueError):
    """Malformed instance text (Gset, JSON or CSV)."""


class DimensionError(IsingError, ValueError):
    pass


class SizeGuardError(IsingError, ValueError):
    """Exhaustive enumeration requested on an instance that is too large."""


class UnsupportedError(IsingError, ValueError):
    pass


class FieldError(IsingError, ValueError):
    pass


class StateError(IsingError, ValueError):
    pass


class NotPSDError(IsingError, ValueError):
    """``J + alpha*M`` has a negative eigenvalue, so no real square root exists."""

    def __init__(self, min_eigenvalue, min_alpha):
        self.min_eigenvalue = float(min_eigenvalue)
        self.min_alpha = min_alpha
        hint = "no admissible alpha" if min_alpha is None else f"alpha >= {min_alpha:.6g}"
        super().__init__(
            f"J + alpha*M is not positive semidefinite (min eigenvalue "
            f"{self.min_eigenvalue:.6g}); need {hint}"
        )


class DivergenceError(IsingError, RuntimeError):
    """A trajectory left the finite region (non-finite value or bound exceeded)."""

    def __init__(self, message, index=None, step=None):
        self.index = index
        self.step = step
        super().__init__(message)
