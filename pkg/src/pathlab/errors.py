"""Exception types shared across the lab."""


class PathlabError(Exception):
    """Base class for all errors raised by pathlab."""


class GridMismatch(PathlabError, ValueError):
    """Two objects live on different grids (or carry different weights)."""


class InvalidInput(PathlabError, ValueError):
    """Input failed validation (non-finite samples, bad parameters, ...)."""


class ExceptionalTime(PathlabError):
    """Structured outcome for times at which a quadratic propagator has no kernel.

    At these times the upper-right block of the classical flow is singular and
    the propagator is a (phased, reflected) delta distribution rather than a
    function. The exception carries what is known about that distribution.

    Attributes
    ----------
    t : float
        Requested time.
    k : int
        Index of the nearest exceptional time (t close to k*pi for the
        oscillator, or the k-th zero of the flow block in general).
    parity : int
        (-1)**k, the reflection x -> parity*x of the delta branch.
    block : float
        Value of the degenerate flow block (sin t for the oscillator).
    threshold : float
        Threshold the block was tested against.
    """

    def __init__(self, t, k, block, threshold, reason=""):
        self.t = float(t)
        self.k = int(k)
        self.parity = -1 if self.k % 2 else 1
        self.block = float(block)
        self.threshold = float(threshold)
        msg = (
            f"exceptional time t={self.t!r}: flow block {self.block:.3e} "
            f"within threshold {self.threshold:.1e} (k={self.k}); "
            "the propagator kernel is a delta distribution"
        )
        if reason:
            msg += f"; {reason}"
        super().__init__(msg)


class NotFreeSymplectic(PathlabError):
    """Symplectic matrix whose B block is (numerically) singular."""


class NoClassicalPath(PathlabError):
    """Shooting for the two-point boundary value problem failed."""


class GuardViolation(PathlabError, ValueError):
    """A slice of a subdivision violates the short-time guard of a model."""

    def __init__(self, index, gap, bound, model):
        self.index = int(index)
        self.gap = float(gap)
        self.bound = float(bound)
        super().__init__(
            f"gap {self.index} has length {self.gap:.6g} exceeding the "
            f"short-time guard {self.bound:.6g} of model {model!r}"
        )


class ConfigError(PathlabError, ValueError):
    """Malformed experiment configuration."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")
