"""Exception types raised by the analysis routines."""


class DDEError(Exception):
    """Base class for all errors raised by ddeacs."""


class InputError(DDEError, ValueError):
    """Malformed system description (shape mismatch, non-finite entries, bad JSON)."""


class DegenerateFrequency(DDEError):
    """The generating polynomial does not depend on Y at this frequency."""

    def __init__(self, omega):
        super().__init__(f"generating polynomial is degenerate at omega={omega!r}")
        self.omega = omega


class BranchCollision(DDEError):
    """Two roots of the generating polynomial coincide at a sample frequency."""

    def __init__(self, omega):
        super().__init__(f"generating-polynomial roots collide at omega={omega!r}")
        self.omega = omega


class Inconclusive(DDEError):
    """An ACS branch stays within the zero band over a whole grid interval."""


class NonTransverseCrossing(DDEError):
    pass


class OnBifurcation(DDEError):
    """The requested delay sits on a critical delay of some crossing sequence."""


class Degenerate(DDEError):
    pass


class ZeroDelayCoupling(DDEError, ValueError):
    pass


class PreconditionViolated(DDEError, ValueError):
    pass


class Unclassified(DDEError):
    """Crossing-count formula requested for a system outside classes 0/I/II/III."""


class NoConvergence(DDEError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class RootOnContour(DDEError):
    def __init__(self, root):
        super().__init__(f"characteristic root {root!r} lies on the imaginary axis")
        self.root = root


class QuadratureStall(DDEError):
    pass


class StepTooLarge(DDEError, ValueError):
    pass


class ResidualCheckFailed(DDEError):
    pass
