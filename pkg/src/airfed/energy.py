"""Energy bookkeeping: harvesting, computation cost, and the battery ledger.

All quantities are SI (watts, joules, seconds). A device harvests from both
in-band and out-band RF sources through distance-dependent path loss, spends
a fixed uplink cost plus per-epoch computation energy when it participates,
and its battery evolves as

    B_next = min(B_max, B - consumed + harvested).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .errors import ContractViolation, DomainError


@dataclass(frozen=True)
class EnergyParams:
    """Device-side energy constants shared by every device."""

    t_harvest: float          # s, harvesting window per round
    conversion: float         # RF-to-DC efficiency, (0, 1]
    path_loss_exp: float      # xi
    p_inband: np.ndarray      # (I,) W, transmit power per in-band source
    p_outband: np.ndarray     # (K,) W
    kappa: float              # effective switched capacitance
    cycles_per_sample: float  # CPU cycles per training sample per epoch
    cpu_hz: float             # CPU frequency

    @classmethod
    def from_config(cls, config: SimConfig) -> "EnergyParams":
        return cls(
            t_harvest=config.T_h,
            conversion=config.delta_m,
            path_loss_exp=config.xi,
            p_inband=np.full(config.I, config.P_in, dtype=float),
            p_outband=np.full(config.K, config.P_out, dtype=float),
            kappa=config.kappa,
            cycles_per_sample=config.C_m,
            cpu_hz=config.f_m,
        )


def path_gain(power_w: float, distance_m, exponent: float):
    """Received power P * d^-xi. Accepts scalar or array distances."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0.0):
        raise DomainError("path_gain: distance must be > 0")
    if power_w < 0.0:
        raise DomainError("path_gain: power must be >= 0")
    out = power_w * d ** (-exponent)
    return float(out) if np.isscalar(distance_m) else out


def harvested_energy(params: EnergyParams, h_in_sq: np.ndarray, h_out_sq: np.ndarray,
                     d_in: np.ndarray, d_out: np.ndarray) -> float:
    """Joules collected in one round from all sources seen by one device.

    E = T_h * delta * (sum_i P_in,i d_i^-xi |h_i|^2 + sum_k P_out,k d_k^-xi |h_k|^2)
    """
    h_in_sq = np.asarray(h_in_sq, dtype=float)
    h_out_sq = np.asarray(h_out_sq, dtype=float)
    if np.any(h_in_sq < 0.0) or np.any(h_out_sq < 0.0):
        raise DomainError("harvested_energy: squared channel magnitudes must be >= 0")
    inband = path_gain(1.0, d_in, params.path_loss_exp) * params.p_inband * h_in_sq if len(h_in_sq) else 0.0
    outband = path_gain(1.0, d_out, params.path_loss_exp) * params.p_outband * h_out_sq if len(h_out_sq) else 0.0
    return params.t_harvest * params.conversion * (float(np.sum(inband)) + float(np.sum(outband)))


def computation_energy(params: EnergyParams, dataset_size: int) -> float:
    """Joules for one local epoch over ``dataset_size`` samples: kappa * C * n * f^2."""
    if dataset_size < 0:
        raise DomainError("computation_energy: dataset_size must be >= 0")
    return params.kappa * params.cycles_per_sample * dataset_size * params.cpu_hz ** 2


def round_consumption(e_up: float, tau: int, e_comp: float, fraction: float) -> float:
    """Joules spent in one active round: uplink cost plus training cost.

    Full-dataset participation runs ``tau`` epochs (E_up + tau * E_comp);
    fractional participation requires tau == 1 and scales the single epoch by
    ``fraction`` (E_up + fraction * E_comp). tau == 0 with fraction == 1 is an
    idle round and costs nothing.
    """
    if tau < 0:
        raise DomainError("round_consumption: tau must be >= 0")
    if not 0.0 < fraction <= 1.0:
        raise DomainError("round_consumption: fraction must be in (0, 1]")
    if fraction < 1.0:
        if tau != 1:
            raise ContractViolation("round_consumption: fractional participation implies tau == 1")
        return e_up + fraction * e_comp
    if tau == 0:
        return 0.0
    return e_up + tau * e_comp


def update_battery(level: float, consumed: float, harvested: float, b_max: float) -> float:
    """min(B_max, level - consumed + harvested); spending above the level is a bug."""
    if consumed > level:
        raise ContractViolation(
            f"update_battery: consumed {consumed!r} J exceeds battery level {level!r} J")
    if harvested < 0.0:
        raise DomainError("update_battery: harvested energy must be >= 0")
    return min(b_max, level - consumed + harvested)


def is_eligible(level: float, required: float) -> bool:
    """A device may act iff its battery covers the required energy (boundary inclusive)."""
    return level >= required
