"""Exception hierarchy shared by the solvers, the oracle and the CLI."""

from __future__ import annotations


class ModelError(Exception):
    """Base class; ``code`` is the short tag written into sweep cells."""

    code = "model_error"


class DegenerateTransportError(ModelError):
    code = "degenerate_transport"


class BoundaryOutOfRangeError(ModelError):
    code = "boundary_out_of_range"


class NoAdmissibleRootError(ModelError):
    code = "no_admissible_root"


class SingularJacobianError(ModelError):
    code = "singular_jacobian"


class ConvergenceError(ModelError):
    """Newton gave up. ``equilibrium`` holds the last iterate when one exists."""

    code = "non_convergence"

    def __init__(self, message, equilibrium=None):
        super().__init__(message)
        self.equilibrium = equilibrium


class InadmissibleEquilibriumError(ModelError):
    """A root was found but violates the range or second-order conditions."""

    code = "inadmissible_equilibrium"

    def __init__(self, message, equilibrium=None):
        super().__init__(message)
        self.equilibrium = equilibrium


class ScanRangeError(ModelError):
    """Best-response argmax landed on the upper edge of the scanned interval."""

    code = "scan_range"


class ThresholdError(ModelError):
    """Bisection target has constant sign on the bracket."""

    code = "no_crossing"
