import math
from fractions import Fraction

import numpy as np
import pytest

from airfed.errors import ContractViolation, DomainError
from airfed.scheduling import (
    IDLE,
    ScheduleDecision,
    apply_storage_policy,
    decide_adaptive,
    decide_nonadaptive,
)

E_UP = 1e-3
E_COMP = 6.24e-3


def test_adaptive_full_epochs():
    # B = 8e-3 clears uplink + one epoch: tau = floor(7e-3/6.24e-3) = 1
    d = decide_adaptive(8e-3, E_UP, E_COMP, 1200, None)
    assert d.active and d.tau == 1 and d.fraction == 1.0
    oracle = Fraction(1, 1000) + Fraction(624, 100_000)
    assert d.planned_consumption == pytest.approx(float(oracle), rel=1e-12)


def test_adaptive_multiple_epochs_capped():
    battery = 50.0
    d = decide_adaptive(battery, E_UP, E_COMP, 1200, None)
    assert d.tau == math.floor((battery - E_UP) / E_COMP) == 8012
    capped = decide_adaptive(battery, E_UP, E_COMP, 1200, 5)
    assert capped.tau == 5
    assert capped.planned_consumption == pytest.approx(E_UP + 5 * E_COMP, rel=1e-12)


def test_adaptive_fractional_branch():
    # B = 4e-3: only uplink affordable in full; r = 3e-3/6.24e-3
    d = decide_adaptive(4e-3, E_UP, E_COMP, 1200, None)
    assert d.active and d.tau == 1
    r = Fraction(3, 1000) / Fraction(624, 100_000)
    assert d.fraction == pytest.approx(float(r), rel=1e-12)
    assert math.floor(d.fraction * 1200) == 576
    assert d.planned_consumption == pytest.approx(4e-3, rel=1e-12)


def test_adaptive_idle_when_uplink_unaffordable():
    assert decide_adaptive(1e-3, E_UP, E_COMP, 1200, None) == IDLE
    assert decide_adaptive(0.0, E_UP, E_COMP, 1200, None) == IDLE


def test_adaptive_idles_below_one_sample():
    # fraction * n < 1 sample: not worth the uplink
    battery = E_UP + E_COMP / 1200 * 0.5
    assert decide_adaptive(battery, E_UP, E_COMP, 1200, None) == IDLE
    battery = E_UP + E_COMP / 1200 * 1.5
    d = decide_adaptive(battery, E_UP, E_COMP, 1200, None)
    assert d.active and math.floor(d.fraction * 1200) == 1


def test_adaptive_never_overspends():
    rng = np.random.default_rng(3)
    for _ in range(500):
        battery = float(rng.uniform(0, 0.1))
        d = decide_adaptive(battery, E_UP, E_COMP, 1200, 5)
        assert d.planned_consumption <= battery or not d.active


def test_adaptive_boundary_inclusive():
    d = decide_adaptive(E_UP + E_COMP, E_UP, E_COMP, 1200, None)
    assert d.active and d.tau == 1 and d.fraction == 1.0


def test_adaptive_domain():
    with pytest.raises(DomainError):
        decide_adaptive(1.0, E_UP, 0.0, 1200, None)
    with pytest.raises(DomainError):
        decide_adaptive(1.0, E_UP, E_COMP, 0, None)


def test_nonadaptive_all_or_nothing():
    required = E_UP + 2 * E_COMP
    d = decide_nonadaptive(required, E_UP, E_COMP, 2)
    assert d == ScheduleDecision(True, 2, 1.0, required)
    assert decide_nonadaptive(required * (1 - 1e-9), E_UP, E_COMP, 2) == IDLE
    with pytest.raises(DomainError):
        decide_nonadaptive(1.0, E_UP, E_COMP, 0)


def test_adaptive_dominates_nonadaptive_participation():
    # Whenever the fixed scheme can act, the adaptive one can too.
    rng = np.random.default_rng(11)
    for _ in range(500):
        battery = float(rng.uniform(0, 0.05))
        fixed = decide_nonadaptive(battery, E_UP, E_COMP, 2)
        adaptive = decide_adaptive(battery, E_UP, E_COMP, 1200, 5)
        if fixed.active:
            assert adaptive.active
            assert adaptive.tau >= fixed.tau or adaptive.tau == 5


def test_storage_policy_accumulates():
    d = ScheduleDecision(True, 1, 1.0, 4e-3)
    for scheme in ("adaptive", "nonadaptive-storage"):
        nxt = apply_storage_policy(scheme, d, 10e-3, 2e-3, 50.0)
        assert nxt == pytest.approx(8e-3, rel=1e-12)
    assert apply_storage_policy("adaptive", IDLE, 10.0, 0.001, 50.0) == pytest.approx(10.001)
    assert apply_storage_policy("adaptive", IDLE, 49.9995, 0.001, 50.0) == 50.0


def test_nostorage_policy_discards_balance():
    assert apply_storage_policy("nonadaptive-nostorage", IDLE, 10.0, 0.001, 50.0) == 0.001
    d = ScheduleDecision(True, 2, 1.0, 5e-3)
    assert apply_storage_policy("nonadaptive-nostorage", d, 6e-3, 2e-3, 50.0) == 2e-3
    assert apply_storage_policy("nonadaptive-nostorage", IDLE, 0.0, 70.0, 50.0) == 50.0


def test_storage_policy_contracts():
    d = ScheduleDecision(True, 1, 1.0, 4e-3)
    with pytest.raises(ContractViolation):
        apply_storage_policy("adaptive", d, 3e-3, 0.0, 50.0)
    with pytest.raises(DomainError):
        apply_storage_policy("adaptive", IDLE, 1.0, -1e-9, 50.0)
    with pytest.raises(DomainError):
        apply_storage_policy("fifo", IDLE, 1.0, 0.0, 50.0)
