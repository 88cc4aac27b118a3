"""Exception types raised across the package."""


class SimulationDivergedError(ArithmeticError):
    """A state-space simulation produced non-finite values."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"simulation diverged at t={index}")


class FilterDivergedError(ArithmeticError):
    """The inverse noise filter produced non-finite residuals."""

    def __init__(self, index, iteration=None):
        self.index = index
        self.iteration = iteration
        where = f"t={index}"
        if iteration is not None:
            where += f" (PLR iteration {iteration})"
        super().__init__(f"residual filter diverged at {where}")


class RankDeficiencyError(ArithmeticError):
    """A factorization needed more rank than the data provides."""

    def __init__(self, achieved, required, singular_values=None):
        self.achieved = achieved
        self.required = required
        self.singular_values = singular_values
        super().__init__(f"rank {achieved} achieved, {required} required")


class CoverageError(LookupError):
    """Sub-Markov strings required by a Hankel layout are not in the tables."""

    def __init__(self, missing):
        self.missing = list(missing)
        shown = ", ".join(self.missing[:8])
        more = "" if len(self.missing) <= 8 else f" (+{len(self.missing) - 8} more)"
        super().__init__(f"tables do not cover strings: {shown}{more}")


class DegenerateReferenceError(ValueError):
    """BFR reference signal is constant, so the fit ratio is undefined."""


class ConfigurationError(ValueError):
    pass


class MonteCarloError(RuntimeError):
    """Every Monte-Carlo run failed."""
