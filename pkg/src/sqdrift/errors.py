"""Exception hierarchy shared by the pipeline stages.

Each class carries the CLI exit code used by :mod:`sqdrift.cli`.
"""


class SqdriftError(Exception):
    exit_code = 1


class FcidumpParseError(SqdriftError, ValueError):
    exit_code = 2

    def __init__(self, message, line=None, token=None):
        where = f" (line {line})" if line is not None else ""
        what = f": {token!r}" if token is not None else ""
        super().__init__(f"{message}{what}{where}")
        self.line = line
        self.token = token


class IntegralDataError(SqdriftError, ValueError):
    """Inconsistent duplicate integrals or other invalid numeric content."""

    exit_code = 2


class DegenerateHamiltonianError(SqdriftError, ValueError):
    """Raised when sampling is requested from a Hamiltonian with lambda = 0."""


class ScaleError(SqdriftError):
    """A desk-scale bound (qubits, determinants, nonzeros) was exceeded."""

    exit_code = 3


class ConvergenceError(SqdriftError):
    exit_code = 4

    def __init__(self, message, residuals=None, eigenvalues=None):
        super().__init__(message)
        self.residuals = residuals
        self.eigenvalues = eigenvalues


class StageError(SqdriftError):
    """Wraps a failure inside :func:`sqdrift.driver.run_pipeline`."""

    def __init__(self, stage, iteration, cause):
        super().__init__(f"stage {stage!r} failed at iteration {iteration}: {cause}")
        self.stage = stage
        self.iteration = iteration
        self.cause = cause
        self.exit_code = 5 if isinstance(cause, OSError) else getattr(cause, "exit_code", 1)
