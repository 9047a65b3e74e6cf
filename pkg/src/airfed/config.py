"""Run configuration: a flat key = value document with explicit units.

Power-bearing fields require a unit suffix (W, mW, or dBm; ``off`` means 0 W);
energies accept J/mJ, times s/ms, frequencies Hz/kHz/MHz/GHz. Bands are four
comma-separated reals describing a per-axis union of two intervals
[lo1, hi1] u [lo2, hi2]. ``emit_config`` writes the canonical form, and
``parse_config(emit_config(c)) == c`` holds exactly.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

MODEL_KINDS = ("logistic", "mlp")
DATASET_KINDS = ("synthetic", "idx")
SCHEDULER_KINDS = ("adaptive", "nonadaptive-storage", "nonadaptive-nostorage")
# "ideal" bypasses the channel and is meant for diagnostics/baselines.
DENOISE_KINDS = ("fading", "mse", "variance", "variance-analytic", "ideal")


def dbm_to_watts(dbm: float) -> float:
    """10^((dBm - 30)/10): 10 dBm -> 0.01 W, -80 dBm -> 1e-11 W."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class SimConfig:
    """Every knob of a run. Field order here is the emit order.

    Scalars are stored in SI units (watts, joules, seconds, hertz); the
    config-file surface accepts the unit suffixes documented per field.
    """

    seed: int = 42
    T: int = 100                # rounds
    M: int = 25                 # devices
    I: int = 100                # in-band (interfering) energy sources
    K: int = 100                # out-band energy sources
    # Per-axis placement bands (lo1, hi1, lo2, hi2), meters; server at origin.
    device_band: tuple = (-100.0, -20.0, 20.0, 100.0)
    inband_band: tuple = (-140.0, -120.0, 120.0, 140.0)
    outband_band: tuple = (-100.0, -25.0, 25.0, 100.0)
    delta_m: float = 0.9        # RF-to-DC conversion efficiency, (0, 1]
    xi: float = 2.5             # path-loss exponent
    P_in: float = 0.1           # W, per in-band source
    P_out: float = 0.1          # W, per out-band source
    P_up: float = 0.01          # W, device uplink transmit power (10 dBm)
    E_up: float = 1e-3          # J, fixed uplink transmission cost per round
    T_h: float = 1.0            # s, harvesting window per round
    N0: float = 1e-11           # W, receiver noise power (-80 dBm)
    B_max: float = 50.0         # J, battery capacity
    B_init: float = 50.0        # J, battery at round 1
    eta: float = 0.01           # local learning rate
    kappa: float = 1e-28        # effective switched capacitance
    C_m: float = 1.3e4          # CPU cycles per sample
    f_m: float = 2e9            # Hz, CPU frequency
    samples_per_device: int = 1200
    model: str = "logistic"     # logistic | mlp
    input_dim: int = 16
    num_classes: int = 10
    hidden_units: int = 32      # mlp only
    separation: float = 3.0     # synthetic class-mean distance from origin
    test_samples: int = 2000
    dataset: str = "synthetic"  # synthetic | idx
    idx_images: str = ""
    idx_labels: str = ""
    idx_test_images: str = ""
    idx_test_labels: str = ""
    scheduler: str = "adaptive"  # adaptive | nonadaptive-storage | nonadaptive-nostorage
    fixed_tau: int = 2           # epochs for the non-adaptive schedulers
    tau_cap: int | None = 5      # cap on adaptive epochs; "none" disables
    denoise: str = "variance"    # fading | mse | variance | variance-analytic | ideal
    eval_cadence: int = 1        # evaluate metrics every this many rounds
    batch_size: int = 0          # 0 = full-batch local steps
    smoothness_L: float = 1.0    # smoothness constant used in the reported bound
    workers: int = 1
    out: str = ""


# ---------------------------------------------------------------------------
# value parsers / emitters


def _parse_int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _parse_float(key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _split_unit(text: str) -> tuple[str, str]:
    parts = text.split()
    if len(parts) == 1:
        return parts[0], ""
    if len(parts) == 2:
        return parts[0], parts[1]
    raise ConfigError(f"cannot parse value {text!r}")


def _parse_power(key: str, text: str) -> float:
    """Powers require an explicit unit: '0.1 W', '100 mW', '50 dBm', or 'off'."""
    if text.strip().lower() == "off":
        return 0.0
    number, unit = _split_unit(text)
    value = _parse_float(key, number)
    if unit == "W":
        return value
    if unit == "mW":
        return value * 1e-3
    if unit == "dBm":
        return dbm_to_watts(value)
    if unit == "":
        raise ConfigError(f"{key}: power needs a unit suffix (W, mW, or dBm), got {text!r}")
    raise ConfigError(f"{key}: unknown power unit {unit!r}")


def _parse_energy(key: str, text: str) -> float:
    number, unit = _split_unit(text)
    value = _parse_float(key, number)
    if unit in ("", "J"):
        return value
    if unit == "mJ":
        return value * 1e-3
    raise ConfigError(f"{key}: unknown energy unit {unit!r}")


def _parse_time(key: str, text: str) -> float:
    number, unit = _split_unit(text)
    value = _parse_float(key, number)
    if unit in ("", "s"):
        return value
    if unit == "ms":
        return value * 1e-3
    raise ConfigError(f"{key}: unknown time unit {unit!r}")


def _parse_freq(key: str, text: str) -> float:
    number, unit = _split_unit(text)
    value = _parse_float(key, number)
    scale = {"": 1.0, "Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}.get(unit)
    if scale is None:
        raise ConfigError(f"{key}: unknown frequency unit {unit!r}")
    return value * scale


def _parse_band(key: str, text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigError(f"{key}: expected 'lo1, hi1, lo2, hi2', got {text!r}")
    return tuple(_parse_float(key, p) for p in parts)


def _parse_choice(options):
    def parse(key: str, text: str) -> str:
        if text not in options:
            raise ConfigError(f"{key}: must be one of {', '.join(options)}; got {text!r}")
        return text
    return parse


def _parse_tau_cap(key: str, text: str):
    if text.strip().lower() == "none":
        return None
    return _parse_int(key, text)


def _parse_str(key: str, text: str) -> str:
    return text


def _emit_plain(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _emit_power(value: float) -> str:
    return f"{value!r} W"


def _emit_energy(value: float) -> str:
    return f"{value!r} J"


def _emit_time(value: float) -> str:
    return f"{value!r} s"


def _emit_freq(value: float) -> str:
    return f"{value!r} Hz"


def _emit_band(value: tuple) -> str:
    return ", ".join(repr(float(v)) for v in value)


def _emit_tau_cap(value) -> str:
    return "none" if value is None else str(value)


def _emit_str(value: str) -> str:
    return value


# key -> (parser, emitter); keys double as SimConfig attribute names.
_FIELDS = {
    "seed": (_parse_int, _emit_plain),
    "T": (_parse_int, _emit_plain),
    "M": (_parse_int, _emit_plain),
    "I": (_parse_int, _emit_plain),
    "K": (_parse_int, _emit_plain),
    "device_band": (_parse_band, _emit_band),
    "inband_band": (_parse_band, _emit_band),
    "outband_band": (_parse_band, _emit_band),
    "delta_m": (_parse_float, _emit_plain),
    "xi": (_parse_float, _emit_plain),
    "P_in": (_parse_power, _emit_power),
    "P_out": (_parse_power, _emit_power),
    "P_up": (_parse_power, _emit_power),
    "E_up": (_parse_energy, _emit_energy),
    "T_h": (_parse_time, _emit_time),
    "N0": (_parse_power, _emit_power),
    "B_max": (_parse_energy, _emit_energy),
    "B_init": (_parse_energy, _emit_energy),
    "eta": (_parse_float, _emit_plain),
    "kappa": (_parse_float, _emit_plain),
    "C_m": (_parse_float, _emit_plain),
    "f_m": (_parse_freq, _emit_freq),
    "samples_per_device": (_parse_int, _emit_plain),
    "model": (_parse_choice(MODEL_KINDS), _emit_str),
    "input_dim": (_parse_int, _emit_plain),
    "num_classes": (_parse_int, _emit_plain),
    "hidden_units": (_parse_int, _emit_plain),
    "separation": (_parse_float, _emit_plain),
    "test_samples": (_parse_int, _emit_plain),
    "dataset": (_parse_choice(DATASET_KINDS), _emit_str),
    "idx_images": (_parse_str, _emit_str),
    "idx_labels": (_parse_str, _emit_str),
    "idx_test_images": (_parse_str, _emit_str),
    "idx_test_labels": (_parse_str, _emit_str),
    "scheduler": (_parse_choice(SCHEDULER_KINDS), _emit_str),
    "fixed_tau": (_parse_int, _emit_plain),
    "tau_cap": (_parse_tau_cap, _emit_tau_cap),
    "denoise": (_parse_choice(DENOISE_KINDS), _emit_str),
    "eval_cadence": (_parse_int, _emit_plain),
    "batch_size": (_parse_int, _emit_plain),
    "smoothness_L": (_parse_float, _emit_plain),
    "workers": (_parse_int, _emit_plain),
    "out": (_parse_str, _emit_str),
}

SWEEPABLE_KEYS = tuple(k for k in _FIELDS if k not in ("out", "workers"))


def set_key(config: SimConfig, key: str, text: str) -> SimConfig:
    """Return a copy of ``config`` with ``key`` set from its textual form."""
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    parser, _ = _FIELDS[key]
    return dataclasses.replace(config, **{key: parser(key, text)})


def parse_config_text(text: str, base: SimConfig | None = None, source: str = "<config>") -> SimConfig:
    """Parse a key = value document on top of ``base`` (defaults if None)."""
    config = base if base is not None else SimConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        try:
            config = set_key(config, key.strip(), value.strip())
        except ConfigError as err:
            raise ConfigError(f"{source}:{lineno}: {err}") from None
    return config


def parse_config(path, base: SimConfig | None = None) -> SimConfig:
    return parse_config_text(Path(path).read_text(), base=base, source=str(path))


def emit_config(config: SimConfig) -> str:
    """Canonical textual form (round-trips exactly through parse_config_text)."""
    lines = ["# effective configuration"]
    for key, (_, emit) in _FIELDS.items():
        lines.append(f"{key} = {emit(getattr(config, key))}")
    return "\n".join(lines) + "\n"


def _check(condition: bool, message: str, problems: list):
    if not condition:
        problems.append(message)


def validate(config: SimConfig) -> SimConfig:
    """Raise ConfigError naming every out-of-range field."""
    p: list[str] = []
    _check(config.T >= 0, "T must be >= 0", p)
    _check(config.M >= 1, "M must be >= 1", p)
    _check(config.I >= 0, "I must be >= 0", p)
    _check(config.K >= 0, "K must be >= 0", p)
    for name in ("device_band", "inband_band", "outband_band"):
        lo1, hi1, lo2, hi2 = getattr(config, name)
        _check(lo1 <= hi1 and lo2 <= hi2, f"{name}: interval lower bound exceeds upper bound", p)
    _check(0.0 < config.delta_m <= 1.0, "delta_m must be in (0, 1]", p)
    _check(config.xi > 0.0, "xi must be > 0", p)
    for name in ("P_in", "P_out", "P_up", "N0", "E_up"):
        _check(getattr(config, name) >= 0.0, f"{name} must be >= 0", p)
    _check(config.T_h > 0.0, "T_h must be > 0", p)
    _check(config.B_max > 0.0, "B_max must be > 0", p)
    _check(0.0 <= config.B_init <= config.B_max, "B_init must be in [0, B_max]", p)
    _check(config.eta > 0.0, "eta must be > 0", p)
    _check(config.kappa > 0.0, "kappa must be > 0", p)
    _check(config.C_m > 0.0, "C_m must be > 0", p)
    _check(config.f_m > 0.0, "f_m must be > 0", p)
    _check(config.samples_per_device >= 1, "samples_per_device must be >= 1", p)
    _check(config.model in MODEL_KINDS, f"model must be one of {MODEL_KINDS}", p)
    _check(config.input_dim >= 1, "input_dim must be >= 1", p)
    _check(config.num_classes >= 2, "num_classes must be >= 2", p)
    _check(config.hidden_units >= 1, "hidden_units must be >= 1", p)
    _check(config.separation >= 0.0, "separation must be >= 0", p)
    _check(config.test_samples >= 1, "test_samples must be >= 1", p)
    _check(config.dataset in DATASET_KINDS, f"dataset must be one of {DATASET_KINDS}", p)
    if config.dataset == "synthetic":
        _check(config.num_classes <= 2 * config.input_dim,
               "synthetic data needs num_classes <= 2*input_dim", p)
    if config.dataset == "idx":
        for name in ("idx_images", "idx_labels", "idx_test_images", "idx_test_labels"):
            _check(bool(getattr(config, name)), f"{name} is required when dataset = idx", p)
    _check(config.scheduler in SCHEDULER_KINDS, f"scheduler must be one of {SCHEDULER_KINDS}", p)
    _check(config.fixed_tau >= 1, "fixed_tau must be >= 1", p)
    _check(config.tau_cap is None or config.tau_cap >= 1, "tau_cap must be >= 1 or none", p)
    _check(config.denoise in DENOISE_KINDS, f"denoise must be one of {DENOISE_KINDS}", p)
    _check(config.eval_cadence >= 1, "eval_cadence must be >= 1", p)
    _check(config.batch_size >= 0, "batch_size must be >= 0", p)
    _check(config.smoothness_L > 0.0, "smoothness_L must be > 0", p)
    _check(config.workers >= 1, "workers must be >= 1", p)
    if p:
        raise ConfigError("invalid configuration: " + "; ".join(p))
    return config
