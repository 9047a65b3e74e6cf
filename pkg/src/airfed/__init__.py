"""Round-based simulator of analog over-the-air federated learning with RF
energy harvesting, co-channel interference, and energy-adaptive scheduling."""

from .config import SimConfig, emit_config, parse_config, parse_config_text, validate
from .orchestrator import (
    ConvergenceDiagnostics,
    RoundRecord,
    RunResult,
    convergence_bound,
    estimate_diagnostics,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "SimConfig",
    "parse_config",
    "parse_config_text",
    "emit_config",
    "validate",
    "run",
    "RunResult",
    "RoundRecord",
    "ConvergenceDiagnostics",
    "convergence_bound",
    "estimate_diagnostics",
    "__version__",
]
