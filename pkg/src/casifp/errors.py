"""Exception hierarchy shared across the package.

Two broad families matter to callers: configuration problems (bad units,
unknown keys, out-of-range gate voltage) and numerical failures (quadrature
breakdown, non-converged sums, lost equilibria). The CLI maps the first to
exit code 2 and the second to exit code 3.
"""


class CasifpError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(CasifpError):
    """Invalid configuration input: units, keys, ranges, file contents."""


class BreakdownVoltageError(ConfigError):
    """Requested gate voltage exceeds the silica breakdown voltage."""


class NumericalError(CasifpError):
    """Base class for numerical failures (CLI exit code 3)."""


class QuadratureError(NumericalError):
    """An adaptive integral did not converge.

    Carries the partial estimate and the integrator's error estimate so a
    caller can decide whether the partial value is still usable.
    """

    def __init__(self, message, partial=None, estimate=None):
        super().__init__(message)
        self.partial = partial
        self.estimate = estimate


class ConvergenceError(NumericalError):
    """A truncated sum hit its hard cap before meeting the tolerance."""

    def __init__(self, message, partial=None, estimate=None):
        super().__init__(message)
        self.partial = partial
        self.estimate = estimate


class NoSuspensionError(NumericalError):
    """No stable force balance in the search bracket (quantum trap lost)."""


class ResonanceNotDetectableError(NumericalError):
    """No reflectance dip above the detection threshold in the window."""


class GridCoverageError(NumericalError):
    """A distribution grid does not contain the probability mass."""


class StageError(NumericalError):
    """A figure-driver stage failed; earlier outputs are kept on disk.

    ``stage`` names the failed pipeline step and ``__cause__`` holds the
    underlying error.
    """

    def __init__(self, figure_id, stage, cause):
        super().__init__(f"figure {figure_id} failed in stage {stage!r}: {cause}")
        self.figure_id = figure_id
        self.stage = stage
