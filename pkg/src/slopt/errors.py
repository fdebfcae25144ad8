"""Exception hierarchy shared by the solvers and mapped to CLI exit codes."""


class SloptError(Exception):
    exit_code = 1


class InvalidInputError(SloptError, ValueError):
    exit_code = 2


class BracketError(InvalidInputError):
    """No sign change of the comparison function on the supplied bracket."""


class PendulumRangeError(InvalidInputError):
    """The pendulum angle left [-pi, pi]."""


class ConvergenceError(SloptError):
    exit_code = 3

    def __init__(self, message, diagnostics=None, last_good=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
        self.last_good = last_good


class DivergenceError(ConvergenceError):
    """Solution magnitude blew up; lambda is far outside the spectrum."""


class SearchRangeError(ConvergenceError):
    """No eigenvalue bracket inside the allowed lambda range."""


class WrongBranchError(ConvergenceError):
    """Converged, but the nodal structure is not that of (lambda_1, lambda_2)."""


class InadmissibleSolutionError(SloptError):
    exit_code = 4

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant
