"""Exception types shared across the package."""


class WellrotError(Exception):
    """Base class for all package-specific failures."""


class ConvergenceError(WellrotError):
    """A series or iterative solver failed to reach its tolerance."""


class NumericalError(WellrotError):
    """A numerical result is unreliable (e.g. division by a closing gap)."""


class PropagationError(WellrotError):
    """Time integration failed (step underflow or norm drift)."""


class GateError(WellrotError):
    """Logical-subspace extraction failed (gross leakage or basis mismatch)."""


class ConfigError(WellrotError):
    """Experiment configuration is malformed or violates the schema."""
