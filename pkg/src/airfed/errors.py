"""Exception types shared across the simulator."""


class ConfigError(ValueError):
    """A configuration value is missing, malformed, or out of range."""


class DomainError(ValueError):
    """A numeric argument is outside the physical domain of a formula."""


class ContractViolation(RuntimeError):
    """A caller broke an interface precondition (e.g. spending more than the battery holds)."""


class IngestionError(ValueError):
    """A dataset file is malformed (bad magic, truncation, label out of range)."""


class DegenerateChannelError(RuntimeError):
    """A denoising factor came out non-positive, so the received signal cannot be scaled."""


class EmptyActiveSetError(RuntimeError):
    """An aggregate was requested for a round in which no device transmitted."""


class NumericalError(RuntimeError):
    """A model vector or loss became non-finite during the run."""


class DiagnosticsUnavailableError(RuntimeError):
    """Convergence diagnostics were requested for a run with no usable rounds."""
