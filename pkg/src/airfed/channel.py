"""Per-round channel realizations and the analog multiple-access superposition.

All links are block-fading with unit-mean-square Rayleigh coefficients, drawn
fresh each round from labelled substreams. Devices pre-compensate their own
uplink phase, so the desired term at the server is real with gain
sqrt(P_up * d^-xi) * |h|; in-band sources cannot be phase-aligned and land as
co-channel interference whose realized power adds to the receiver noise floor.
The whole receive chain is modeled in the real domain: the interference-plus-
noise disturbance is one Gaussian vector with per-dimension variance phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, DomainError
from .rng import sample_complex_gaussian, substream
from .topology import Geometry


@dataclass(frozen=True)
class ChannelDraw:
    """One round's fading state for every link in the system."""

    round_index: int
    h_up_mag: np.ndarray    # (M,)   uplink |h|, device -> server
    g_cci_sq: np.ndarray    # (I,)   interference |g|^2, in-band source -> server
    eh_in_sq: np.ndarray    # (M, I) harvesting |h|^2, in-band source -> device
    eh_out_sq: np.ndarray   # (M, K) harvesting |h|^2, out-band source -> device


def draw_round_channels(geometry: Geometry, round_index: int, seed: int) -> ChannelDraw:
    """Draw all fading coefficients for one round.

    Matrices are drawn row-major per (kind, round) label, so device m's draws
    do not depend on how many devices come after it.
    """
    m = geometry.device_pos.shape[0]
    i = geometry.inband_pos.shape[0]
    k = geometry.outband_pos.shape[0]
    up = sample_complex_gaussian(substream(seed, ("uplink", 0, round_index)), m)
    g = sample_complex_gaussian(substream(seed, ("cci", 0, round_index)), i)
    ein = sample_complex_gaussian(substream(seed, ("eh-in", 0, round_index)), (m, i))
    eout = sample_complex_gaussian(substream(seed, ("eh-out", 0, round_index)), (m, k))
    return ChannelDraw(
        round_index=round_index,
        h_up_mag=np.abs(up),
        g_cci_sq=g.real ** 2 + g.imag ** 2,
        eh_in_sq=ein.real ** 2 + ein.imag ** 2,
        eh_out_sq=eout.real ** 2 + eout.imag ** 2,
    )


def effective_gain(p_up: float, distance: float, exponent: float, h_mag: float) -> float:
    """Real amplitude of a phase-aligned device at the server: sqrt(P_up d^-xi) |h|."""
    if distance <= 0.0:
        raise DomainError("effective_gain: distance must be > 0")
    if p_up < 0.0 or h_mag < 0.0:
        raise DomainError("effective_gain: power and |h| must be >= 0")
    return math.sqrt(p_up * distance ** (-exponent)) * h_mag


def interference_components(geometry: Geometry, draw: ChannelDraw,
                            p_in: np.ndarray, exponent: float) -> np.ndarray:
    """Per-source received interference power P_in,i * d_i^-xi * |g_i|^2, shape (I,)."""
    p_in = np.asarray(p_in, dtype=float)
    if len(p_in) != len(geometry.inband_ps_dist):
        raise ContractViolation("interference_components: one power per in-band source required")
    if len(p_in) == 0:
        return np.zeros(0)
    return p_in * geometry.inband_ps_dist ** (-exponent) * draw.g_cci_sq


def interference_power(geometry: Geometry, draw: ChannelDraw, p_in: np.ndarray,
                       exponent: float, n0: float) -> float:
    """Realized interference-plus-noise power phi for one round."""
    if n0 < 0.0:
        raise DomainError("interference_power: N0 must be >= 0")
    return float(np.sum(interference_components(geometry, draw, p_in, exponent))) + n0


def superpose(updates, gains, phi_components, dim: int, stream: np.random.Generator) -> np.ndarray:
    """Sum the aligned transmissions and add the round's disturbance.

    y = sum_m gain_m * update_m + c, with c ~ N(0, phi I_dim) and
    phi = sum(per-source interference powers) + N0. With no transmitting
    devices y is the disturbance alone.
    """
    cci_powers, n0 = phi_components
    phi = float(np.sum(cci_powers)) + n0
    if phi < 0.0:
        raise DomainError("superpose: negative disturbance power")
    if len(updates) != len(gains):
        raise ContractViolation("superpose: need exactly one gain per update")
    y = np.zeros(dim)
    for gain, update in zip(gains, updates):
        if update.shape != (dim,):
            raise ContractViolation(f"superpose: update of shape {update.shape}, expected ({dim},)")
        y += gain * update
    if phi > 0.0:
        y += math.sqrt(phi) * stream.standard_normal(dim)
    return y
