"""Exception hierarchy shared across the package.

Two broad families matter for the CLI exit-code contract: validation
failures (bad configuration, malformed input files, violated
preconditions) map to exit code 2, infeasibility and other runtime
failures map to exit code 1.
"""


class ExtvarError(Exception):
    """Base class for all package errors."""


class ValidationError(ExtvarError):
    """Invalid input: bad parameter, malformed file, violated precondition."""


class InvalidLatticeError(ValidationError):
    """Lattice dims empty or containing a non-positive entry."""


class InvalidKernelError(ValidationError):
    """Neighborhood table out of range, asymmetric, incomplete, or center != 1."""


class HypothesisError(ValidationError):
    """A bound was requested outside its stated hypothesis range."""


class SamplerConfigError(ValidationError):
    """Sampler config invalid or with negligible acceptance mass."""


class InfeasibleError(ExtvarError):
    """A runtime search or repair failed: separation cannot be achieved,
    rejection sampling exhausted its budget, or every restart failed."""


class FitError(InfeasibleError):
    """fit() could not produce any valid restart; carries diagnostics."""
