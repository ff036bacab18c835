"""Fault and validation exceptions shared across the package."""


class ConfigError(ValueError):
    """A configuration file or controller setup is invalid.

    The message names the offending key and the violated constraint.
    """


class ControllabilityFault(RuntimeError):
    """|b(x, t)| fell below the plant's guard, so the control law is undefined.

    Carries the state and time at which the guard tripped.
    """

    def __init__(self, message, state=None, t=None):
        super().__init__(message)
        self.state = state
        self.t = t


class DivergenceFault(RuntimeError):
    """A simulated signal became non-finite or exceeded the divergence cap."""
