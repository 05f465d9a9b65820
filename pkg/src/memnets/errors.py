"""Exception classes shared across the package.

The CLI maps these to exit codes: ConfigError -> 2,
SimulationNotConverged -> 3, DisconnectedTerminalsError -> 4.
"""


class MemnetsError(Exception):
    """Base class for all package errors."""


class ConfigError(MemnetsError):
    """Invalid or unreadable scenario configuration."""


class SamplingError(MemnetsError):
    """Random node placement hit the rejection cap before reaching the target."""


class UnknownNodeError(MemnetsError, KeyError):
    pass


class UnknownEdgeError(MemnetsError, KeyError):
    pass


class DisconnectedTerminalsError(MemnetsError):
    """Pulse terminals (or cities) are not joined by any path of edges."""


class SingularNetworkError(MemnetsError):
    """The reduced Kirchhoff system is singular (a floating component)."""


class SimulationNotConverged(MemnetsError):
    """Run-to-steady-state exhausted max_steps; partial state is attached."""

    def __init__(self, message, network=None, trajectory=None):
        super().__init__(message)
        self.network = network
        self.trajectory = trajectory


class NoOnPathError(MemnetsError):
    """No input->output path exists over the ON-classified edges."""

    def __init__(self, message, on_edges=None):
        super().__init__(message)
        self.on_edges = list(on_edges) if on_edges is not None else []


class ZeroCurrentError(MemnetsError):
    """Entropy is undefined because no current flows."""
