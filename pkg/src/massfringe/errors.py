"""Exception hierarchy shared across the simulation modules."""


class SimulationError(Exception):
    """Base class for physics/numerics errors (CLI exit code 2)."""


class GridError(SimulationError):
    """Invalid grid parameters."""


class AliasingError(GridError):
    """Momentum amplitude reaches the grid's Nyquist edge."""


class RegimeError(SimulationError):
    """A validity regime of the method is violated (non-relativistic,
    paraxial, low screen velocity, expansion validity)."""


class PatchError(SimulationError):
    """Query outside the worldline validity interval or the proper-frame
    coordinate patch."""


class NumericalError(SimulationError):
    """Quadrature or evolution failed to reach the requested accuracy."""


class ScenarioError(Exception):
    """Scenario file failed to parse or validate (CLI exit code 1)."""
