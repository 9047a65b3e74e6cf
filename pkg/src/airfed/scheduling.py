"""Per-round participation decisions.

The adaptive scheduler stretches whatever the battery holds: enough for
uplink plus at least one full epoch buys floor((B - E_up) / E_comp) epochs
(capped), a battery that only clears the uplink cost buys one epoch on the
fraction r = (B - E_up) / E_comp of the dataset, anything less idles. The
non-adaptive baselines need uplink plus a fixed epoch count or do nothing,
and differ in whether unspent battery carries over to the next round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .energy import update_battery
from .errors import ContractViolation, DomainError


@dataclass(frozen=True)
class ScheduleDecision:
    active: bool
    tau: int                    # local epochs this round (0 when idle)
    fraction: float             # dataset fraction r in (0, 1]; 0.0 when idle
    planned_consumption: float  # J drawn from the battery this round


IDLE = ScheduleDecision(active=False, tau=0, fraction=0.0, planned_consumption=0.0)


def decide_adaptive(battery: float, e_up: float, e_comp: float, dataset_size: int,
                    tau_cap: int | None) -> ScheduleDecision:
    """Energy-adaptive epochs / fractional data, sized to the current battery."""
    if e_comp <= 0.0:
        raise DomainError("decide_adaptive: e_comp must be > 0")
    if dataset_size < 1:
        raise DomainError("decide_adaptive: dataset_size must be >= 1")
    if battery >= e_up + e_comp:
        tau = math.floor((battery - e_up) / e_comp)
        if tau_cap is not None:
            tau = min(tau, tau_cap)
        # min() guards a 1-ulp overshoot of tau * e_comp; mathematically <= battery.
        return ScheduleDecision(True, tau, 1.0, min(battery, e_up + tau * e_comp))
    if battery > e_up:
        fraction = (battery - e_up) / e_comp
        if math.floor(fraction * dataset_size) == 0:
            # Too little energy for even one sample's worth of training.
            return IDLE
        return ScheduleDecision(True, 1, fraction, min(battery, e_up + fraction * e_comp))
    return IDLE


def decide_nonadaptive(battery: float, e_up: float, e_comp: float, fixed_tau: int) -> ScheduleDecision:
    """All-or-nothing: uplink plus ``fixed_tau`` full epochs, or idle."""
    if fixed_tau < 1:
        raise DomainError("decide_nonadaptive: fixed_tau must be >= 1")
    required = e_up + fixed_tau * e_comp
    if battery >= required:
        return ScheduleDecision(True, fixed_tau, 1.0, required)
    return IDLE


def apply_storage_policy(scheduler: str, decision: ScheduleDecision, battery: float,
                         harvested: float, b_max: float) -> float:
    """Next battery level under the scheme's storage semantics.

    Storing schemes accumulate: min(B_max, B - consumed + harvested). The
    no-storage baseline powers each round from the previous round's harvest
    alone, so whatever it does not spend is lost.
    """
    if decision.planned_consumption > battery:
        raise ContractViolation("apply_storage_policy: decision spends more than the battery holds")
    if harvested < 0.0:
        raise DomainError("apply_storage_policy: harvested energy must be >= 0")
    if scheduler in ("adaptive", "nonadaptive-storage"):
        return update_battery(battery, decision.planned_consumption, harvested, b_max)
    if scheduler == "nonadaptive-nostorage":
        return min(b_max, harvested)
    raise DomainError(f"apply_storage_policy: unknown scheduler {scheduler!r}")
