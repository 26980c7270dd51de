"""Exception types shared across the simulator."""


class DomainError(ValueError):
    """An argument is outside the physical domain of an operation."""


class ContractError(ValueError):
    """Inputs violate a structural contract (mismatched bins, missing channel...)."""


class NumericalError(RuntimeError):
    """A solver or integrator failed; carries diagnostic state in args."""


class FitFailureError(RuntimeError):
    """A fit could not identify its parameters; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class RankDeficiencyError(FitFailureError):
    """Normal equations of a least-squares problem are singular."""


class ContrastInconsistencyError(DomainError):
    """Fringe contrast exceeds the lossless bound for the given reflectivity."""
