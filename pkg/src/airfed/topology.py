"""Node placement and the distance tables every other module consumes.

The parameter server sits at the origin. Each node class (devices, in-band
sources, out-band sources) draws its x and y coordinates independently and
uniformly from a per-axis union of two intervals, e.g. [-100, -20] u [20, 100].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SimConfig
from .errors import ConfigError


@dataclass(frozen=True)
class Geometry:
    """Positions (meters) and the pairwise distances used by the simulator."""

    device_pos: np.ndarray        # (M, 2)
    inband_pos: np.ndarray        # (I, 2)
    outband_pos: np.ndarray       # (K, 2)
    device_ps_dist: np.ndarray    # (M,)  device -> server
    inband_ps_dist: np.ndarray    # (I,)  in-band source -> server
    inband_device_dist: np.ndarray   # (M, I)
    outband_device_dist: np.ndarray  # (M, K)


def sample_band(stream: np.random.Generator, band: tuple, shape) -> np.ndarray:
    """Draw uniformly from [lo1, hi1] u [lo2, hi2], mass proportional to length."""
    lo1, hi1, lo2, hi2 = band
    if lo1 > hi1 or lo2 > hi2:
        raise ConfigError(f"invalid band {band}: interval lower bound exceeds upper bound")
    len1 = hi1 - lo1
    len2 = hi2 - lo2
    total = len1 + len2
    if total <= 0.0:
        # Both intervals degenerate; only the two points are reachable.
        return np.where(stream.random(shape) < 0.5, lo1, lo2)
    u = stream.uniform(0.0, total, shape)
    return np.where(u < len1, lo1 + u, lo2 + (u - len1))


def _positions(stream: np.random.Generator, band: tuple, n: int) -> np.ndarray:
    # One (n, 2) draw, row-major: node m's coordinates do not depend on n.
    return sample_band(stream, band, (n, 2))


def pairwise_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean distances, shape (len(a), len(b))."""
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt((diff ** 2).sum(axis=2))


def build_geometry(config: SimConfig, stream: np.random.Generator) -> Geometry:
    """Place all nodes for a run.

    The stream is split into one child per node class, so e.g. changing M
    leaves the in-band and out-band positions untouched.
    """
    dev_stream, in_stream, out_stream = stream.spawn(3)
    device_pos = _positions(dev_stream, config.device_band, config.M)
    inband_pos = _positions(in_stream, config.inband_band, config.I)
    outband_pos = _positions(out_stream, config.outband_band, config.K)
    origin = np.zeros((1, 2))
    return Geometry(
        device_pos=device_pos,
        inband_pos=inband_pos,
        outband_pos=outband_pos,
        device_ps_dist=pairwise_dist(device_pos, origin)[:, 0],
        inband_ps_dist=pairwise_dist(inband_pos, origin)[:, 0],
        inband_device_dist=pairwise_dist(device_pos, inband_pos),
        outband_device_dist=pairwise_dist(device_pos, outband_pos),
    )
