"""Exception types shared across the package."""


class ThermoError(Exception):
    """Base class for every error raised deliberately by bec_thermo."""


class DomainError(ThermoError, ValueError):
    """An input lies outside the domain of a formula."""


class TruncationError(ThermoError, RuntimeError):
    """The thermal sum would need more terms than the configured hard cap."""


class SingularityError(ThermoError, ArithmeticError):
    """A result is numerically ill-defined (e.g. Arg of a vanishing sum)."""


class NoInformationError(ThermoError, ValueError):
    """The likelihood carries no information about the parameter."""


class ValidationError(ThermoError, ValueError):
    """A physical or configuration input violates a stated precondition."""
