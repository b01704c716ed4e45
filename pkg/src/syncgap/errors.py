"""Exception types shared across the package."""


class SyncgapError(Exception):
    """Base class for all syncgap-specific failures."""


class EdgeListError(SyncgapError):
    """Malformed or inconsistent edge-list input.

    Carries the 1-based line number of the offending row when one exists
    (structural problems such as a disconnected network have ``line=None``).
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateZeroError(SyncgapError):
    """The zero eigenvalue is not simple (no rooted spanning tree)."""


class DegenerateGapError(SyncgapError):
    """The spectral gap is not simple within tolerance; first-order
    sensitivity analysis is refused."""


class BlockFormError(SyncgapError):
    """A two-block split is invalid, or a block-path assumption
    (gap residence, resolvent regularity, perturbation shape) fails."""


class BranchError(SyncgapError):
    """Eigenvalue branch matching was ambiguous in a finite-difference
    probe; the caller should shrink the step."""


class ConvergenceError(SyncgapError):
    """An iterative solver (QR eigensolver, power iteration, inverse
    iteration, Lyapunov averaging) failed to converge."""


class SimulationError(SyncgapError):
    """Trajectory escaped or produced non-finite state.

    ``time`` is the integration time at which the problem was detected.
    """

    def __init__(self, message, time=None):
        self.time = time
        if time is not None:
            message = f"t={time:g}: {message}"
        super().__init__(message)


class NoCrossingError(SyncgapError):
    """No sign change of the stability exponent was found on the grid."""
