"""Exception hierarchy shared across the package."""


class MemcapError(Exception):
    """Base class for all library errors."""


class DomainError(MemcapError, ValueError):
    """Input outside the physical or mathematical domain of a model."""


class IntegrationError(MemcapError, RuntimeError):
    """Time integration left the admissible state space."""

    def __init__(self, message, time=None, device=None):
        super().__init__(message)
        self.time = time
        self.device = device


class SolverError(MemcapError, RuntimeError):
    """Steady-state root finding failed."""

    def __init__(self, message, roots=()):
        super().__init__(message)
        self.roots = tuple(roots)


class EncodingError(MemcapError, ValueError):
    """Task sequence cannot be encoded with the requested pulse spec."""


class GenerationError(MemcapError, RuntimeError):
    """A benchmark sequence could not be generated (e.g. divergence guard exhausted)."""


class MetricError(MemcapError, ValueError):
    """Metric undefined for the given sequences."""


class ConfigError(MemcapError, ValueError):
    """Configuration document failed validation.

    ``field`` is the dotted path of the offending entry, ``line`` the
    1-based source line when known.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
