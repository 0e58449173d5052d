class DomainError(ValueError):
    """Argument outside the domain of a geometric or physical function."""


class ConfigurationError(ValueError):
    """Invalid scenario, geometry table or boundary condition."""


class CFLViolation(ValueError):
    """Requested time step exceeds the kinetic stability bound."""


class SimulationError(RuntimeError):
    """Non-finite values appeared during time integration.

    The offending state is attached so that callers can dump it.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
