class HilferError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidParameterError(HilferError, ValueError):
    """An input or invariant violation; the message names the field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class NumericalError(HilferError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class MittagLefflerError(NumericalError):
    def __init__(self, alpha: float, beta: float, z: float, reason: str):
        self.alpha = alpha
        self.beta = beta
        self.z = z
        super().__init__(
            f"Mittag-Leffler evaluation failed for alpha={alpha!r}, beta={beta!r}, "
            f"z={z!r}: {reason}"
        )


class ControlSynthesisError(NumericalError):
    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"CG did not converge after {iterations} iterations "
            f"(final residual {residual:.3e})"
        )
