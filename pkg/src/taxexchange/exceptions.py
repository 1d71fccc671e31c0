class TaxExchangeError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(TaxExchangeError, ValueError):
    """Invalid model, simulation or file configuration."""


class InvariantViolation(TaxExchangeError, RuntimeError):
    """A model invariant (conservation, non-negativity, non-empty sets) broke."""


class InsufficientDataError(TaxExchangeError, ValueError):
    """Too few usable points for a fit or an empty histogram."""


class SweepPointError(TaxExchangeError, RuntimeError):
    """A sweep point failed; ``tax_rate`` names the failing point."""

    def __init__(self, tax_rate, cause):
        super().__init__(f"sweep point f={tax_rate!r} failed: {cause}")
        self.tax_rate = tax_rate
        self.cause = cause
