"""Exception hierarchy shared by the package."""


class NeckwallError(Exception):
    """Base class for all package errors."""


class GeometryError(NeckwallError, ValueError):
    pass


class RegimeViolationError(GeometryError):
    """Neck thickness exceeds its width (eta > delta)."""


class CellBudgetError(GeometryError):
    pass


class UnclassifiableFamily(NeckwallError, ValueError):
    pass


class MissingEll(NeckwallError, ValueError):
    pass


class ShellFitError(NeckwallError, ValueError):
    pass


class SolverError(NeckwallError, RuntimeError):
    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class NonFiniteEnergy(SolverError):
    pass


class NoDescent(SolverError):
    pass
