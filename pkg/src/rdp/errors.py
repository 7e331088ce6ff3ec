"""Exception and warning types raised by the rdp package."""


class RdpError(Exception):
    """Base class for every error raised by this package."""


class NegativeProbability(RdpError, ValueError):
    pass


class NotNormalized(RdpError, ValueError):
    def __init__(self, total: float, deviation: float):
        super().__init__(f"probabilities sum to {total!r} (deviation {deviation:.3e})")
        self.total = total
        self.deviation = deviation


class EmptyAlphabet(RdpError, ValueError):
    pass


class DimensionMismatch(RdpError, ValueError):
    pass


class InvalidTernary(RdpError, ValueError):
    pass


class ZeroMarginalOutput(UserWarning):
    """Issued when posterior rows are undefined and get filled with the source pmf."""

    def __init__(self, symbols):
        self.symbols = tuple(int(s) for s in symbols)
        super().__init__(f"output symbols {list(self.symbols)} have zero marginal probability")


class PerceptionInactive(RdpError):
    """Not a failure: P exceeds the source parameter, so only the Shannon curve applies."""


class VerificationFailed(RdpError):
    def __init__(self, quantity: str, message: str):
        super().__init__(f"{quantity}: {message}")
        self.quantity = quantity


class Infeasible(RdpError):
    pass


class NotConverged(RdpError):
    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class InfeasibleOnGrid(RdpError):
    pass


class TrialBudgetTooSmall(RdpError, ValueError):
    pass
