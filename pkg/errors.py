# errors.py: exception hierarchy shared by every module


class ByzGradError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigError(ByzGradError):
    """
    Invalid experiment configuration.

    `key_path` is the dotted path of the offending key (e.g. `schedule.alpha`),
    reported verbatim by the CLI before exiting with status 2.
    """

    def __init__(self, key_path: str, message: str):
        self.key_path = key_path
        self.message = message
        super().__init__(f"{key_path}: {message}" if key_path else message)


class DomainError(ByzGradError, ValueError):
    """A query point lies outside the black-box function's domain."""


class UniverseError(ByzGradError, ValueError):
    """Malformed activation vector or activation universe."""


class ChainError(ByzGradError, ValueError):
    """Transition matrix is not row-stochastic or not irreducible."""


class StationaryError(ByzGradError):
    """Power iteration did not reach the residual tolerance."""


class UnderdeterminedError(ByzGradError, ValueError):
    """The stacked system carries too little information to decode v."""


class EnumerationLimitError(ByzGradError, ValueError):
    """Exact enumeration would exceed its combinatorial bound."""


class UnknownActivationError(ByzGradError, KeyError):
    """An activation vector is not a member of the universe."""


class HashMismatchError(ByzGradError):
    """Output files disagree on the config hash they were produced from."""
