from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest

from airfed.config import SimConfig
from airfed.energy import (
    EnergyParams,
    computation_energy,
    harvested_energy,
    is_eligible,
    path_gain,
    round_consumption,
    update_battery,
)
from airfed.errors import ContractViolation, DomainError

getcontext().prec = 50

RTOL = 1e-12


def _params(**kwargs):
    defaults = dict(t_harvest=1.0, conversion=0.9, path_loss_exp=2.5,
                    p_inband=np.array([0.1]), p_outband=np.array([]),
                    kappa=1e-28, cycles_per_sample=1.3e4, cpu_hz=2e9)
    defaults.update(kwargs)
    return EnergyParams(**defaults)


def dec_path_gain(power: str, distance: str, half_exponent_doubled: int) -> Decimal:
    # d^-x for x = k/2 computed as 1 / (d^(k//2) * sqrt(d)^(k%2)), exactly in Decimal.
    d = Decimal(distance)
    k = half_exponent_doubled
    denom = d ** (k // 2) * (d.sqrt() if k % 2 else Decimal(1))
    return Decimal(power) / denom


def test_path_gain_round_distance():
    # 0.1 W across 100 m at exponent 2.5 -> 1e-6 W
    oracle = dec_path_gain("0.1", "100", 5)
    got = path_gain(0.1, 100.0, 2.5)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)


def test_path_gain_interferer_distance():
    oracle = dec_path_gain("0.1", "130", 5)
    got = path_gain(0.1, 130.0, 2.5)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)
    assert got == pytest.approx(5.190e-7, rel=1e-3)


def test_path_gain_domain():
    with pytest.raises(DomainError):
        path_gain(0.1, 0.0, 2.5)
    with pytest.raises(DomainError):
        path_gain(0.1, -1.0, 2.5)
    with pytest.raises(DomainError):
        path_gain(-0.1, 1.0, 2.5)


def test_path_gain_array():
    out = path_gain(2.0, np.array([1.0, 2.0]), 1.0)
    assert np.allclose(out, [2.0, 1.0])


def test_harvested_energy_single_source():
    params = _params()
    got = harvested_energy(params, np.array([1.0]), np.array([]),
                           np.array([130.0]), np.array([]))
    oracle = Decimal("0.9") * dec_path_gain("0.1", "130", 5)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)
    assert got == pytest.approx(4.671e-7, rel=1e-3)


def test_harvested_energy_sums_both_source_classes():
    params = _params(p_inband=np.array([0.1, 0.2]), p_outband=np.array([0.3]))
    h_in = np.array([0.5, 2.0])
    h_out = np.array([1.5])
    d_in = np.array([100.0, 100.0])
    d_out = np.array([50.0])
    got = harvested_energy(params, h_in, h_out, d_in, d_out)
    oracle = Decimal("0.9") * (
        dec_path_gain("0.1", "100", 5) * Decimal("0.5")
        + dec_path_gain("0.2", "100", 5) * Decimal("2")
        + dec_path_gain("0.3", "50", 5) * Decimal("1.5"))
    assert abs(got - float(oracle)) <= RTOL * float(oracle)


def test_harvested_energy_zero_channel_zero():
    params = _params()
    assert harvested_energy(params, np.array([0.0]), np.array([]),
                            np.array([130.0]), np.array([])) == 0.0


def test_harvested_energy_no_sources():
    params = _params(p_inband=np.array([]), p_outband=np.array([]))
    assert harvested_energy(params, np.array([]), np.array([]),
                            np.array([]), np.array([])) == 0.0


def test_harvested_energy_monotone():
    params = _params(p_inband=np.array([0.1, 0.1]), p_outband=np.array([0.1]))
    rng = np.random.default_rng(0)
    for _ in range(100):
        h_in = rng.exponential(1.0, 2)
        h_out = rng.exponential(1.0, 1)
        d_in = rng.uniform(50, 200, 2)
        d_out = rng.uniform(50, 200, 1)
        base = harvested_energy(params, h_in, h_out, d_in, d_out)
        bigger = harvested_energy(params, h_in * 1.3, h_out, d_in, d_out)
        assert bigger >= base
        richer = _params(p_inband=np.array([0.2, 0.1]), p_outband=np.array([0.1]))
        assert harvested_energy(richer, h_in, h_out, d_in, d_out) >= base
        longer = _params(t_harvest=2.0, p_inband=params.p_inband, p_outband=params.p_outband)
        assert harvested_energy(longer, h_in, h_out, d_in, d_out) >= base


def test_computation_energy_reference_parameters():
    # kappa C n f^2 with the default constants and 1200 samples
    params = _params()
    oracle = (Fraction(1, 10 ** 28) * Fraction(13000) * Fraction(1200)
              * Fraction(2 * 10 ** 9) ** 2)
    assert oracle == Fraction(624, 100_000)
    got = computation_energy(params, 1200)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)
    assert got == pytest.approx(6.24e-3, rel=RTOL)


def test_computation_energy_scales_linearly():
    params = _params()
    assert computation_energy(params, 0) == 0.0
    assert computation_energy(params, 600) == pytest.approx(3.12e-3, rel=RTOL)


def test_round_consumption_full():
    oracle = Fraction(1, 1000) + 2 * Fraction(624, 100_000)
    got = round_consumption(1e-3, 2, 6.24e-3, 1.0)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)


def test_round_consumption_fractional():
    oracle = Fraction(1, 1000) + Fraction(1, 2) * Fraction(624, 100_000)
    got = round_consumption(1e-3, 1, 6.24e-3, 0.5)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)


def test_round_consumption_idle_free():
    assert round_consumption(0.0, 0, 6.24e-3, 1.0) == 0.0


def test_round_consumption_contracts():
    with pytest.raises(ContractViolation):
        round_consumption(1e-3, 2, 6.24e-3, 0.5)
    with pytest.raises(DomainError):
        round_consumption(1e-3, 1, 6.24e-3, 0.0)
    with pytest.raises(DomainError):
        round_consumption(1e-3, 1, 6.24e-3, 1.5)


def test_update_battery_ledger():
    oracle = Fraction(10) - Fraction(4, 1000) + Fraction(3, 1000)
    got = update_battery(10.0, 0.004, 0.003, 50.0)
    assert abs(got - float(oracle)) <= RTOL * float(oracle)


def test_update_battery_caps_at_capacity():
    assert update_battery(49.9, 0.0, 10.0, 50.0) == 50.0


def test_update_battery_overspend_rejected():
    with pytest.raises(ContractViolation):
        update_battery(1.0, 1.0000001, 0.0, 50.0)


def test_update_battery_exact_drain():
    assert update_battery(1.0, 1.0, 0.0, 50.0) == 0.0


def test_eligibility_boundary_inclusive():
    assert is_eligible(7.24e-3, 7.24e-3)
    assert not is_eligible(7.24e-3 - 1e-12, 7.24e-3)
    assert is_eligible(1.0, 0.0)


def test_params_from_config():
    config = SimConfig(I=3, K=2, P_in=0.5, P_out=0.25)
    params = EnergyParams.from_config(config)
    assert params.p_inband.shape == (3,)
    assert np.all(params.p_inband == 0.5)
    assert params.p_outband.shape == (2,)
    assert params.cpu_hz == config.f_m
