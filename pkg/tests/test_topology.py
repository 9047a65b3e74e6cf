import numpy as np
import pytest

from airfed.config import SimConfig
from airfed.errors import ConfigError
from airfed.rng import substream
from airfed.topology import build_geometry, pairwise_dist, sample_band


def _geometry(seed=1, **kwargs):
    config = SimConfig(**kwargs)
    return build_geometry(config, substream(seed, ("geometry", 0, 0)))


def test_pairwise_distance_345():
    a = np.array([[0.0, 0.0]])
    b = np.array([[3.0, 4.0]])
    assert pairwise_dist(a, b)[0, 0] == 5.0


def test_distances_match_positions():
    geom = _geometry(M=6, I=4, K=5)
    assert np.allclose(geom.device_ps_dist, np.linalg.norm(geom.device_pos, axis=1))
    assert np.allclose(geom.inband_ps_dist, np.linalg.norm(geom.inband_pos, axis=1))
    expect = np.linalg.norm(geom.device_pos[2] - geom.inband_pos[3])
    assert np.isclose(geom.inband_device_dist[2, 3], expect)
    expect = np.linalg.norm(geom.device_pos[5] - geom.outband_pos[0])
    assert np.isclose(geom.outband_device_dist[5, 0], expect)


def test_band_exclusion_zone():
    stream = substream(9, ("geometry", 0, 0))
    values = sample_band(stream, (-100.0, -20.0, 20.0, 100.0), 10_000)
    assert np.all((values >= -100.0) & (values <= 100.0))
    assert not np.any((values > -20.0) & (values < 20.0))
    # both halves get hit
    assert np.sum(values < 0) > 4000
    assert np.sum(values > 0) > 4000


def test_all_node_classes_respect_their_bands():
    geom = _geometry(M=50, I=50, K=50)
    coords = np.abs(geom.device_pos).ravel()
    assert np.all((coords >= 20.0) & (coords <= 100.0))
    coords = np.abs(geom.inband_pos).ravel()
    assert np.all((coords >= 120.0) & (coords <= 140.0))
    coords = np.abs(geom.outband_pos).ravel()
    assert np.all((coords >= 25.0) & (coords <= 100.0))


def test_invalid_band_raises():
    stream = substream(1, ("geometry", 0, 0))
    with pytest.raises(ConfigError):
        sample_band(stream, (10.0, -10.0, 20.0, 30.0), 5)


def test_geometry_deterministic():
    a = _geometry(seed=4, M=8)
    b = _geometry(seed=4, M=8)
    assert np.array_equal(a.device_pos, b.device_pos)
    assert np.array_equal(a.inband_pos, b.inband_pos)


def test_node_counts_are_independent_draws():
    # Adding devices must not move the interferers or the shared device rows.
    small = _geometry(seed=4, M=5, I=7, K=7)
    large = _geometry(seed=4, M=20, I=7, K=7)
    assert np.array_equal(small.inband_pos, large.inband_pos)
    assert np.array_equal(small.outband_pos, large.outband_pos)
    assert np.array_equal(small.device_pos, large.device_pos[:5])


def test_distances_positive():
    geom = _geometry(seed=2, M=30, I=30, K=30)
    assert np.all(geom.device_ps_dist > 0)
    assert np.all(geom.inband_ps_dist > 0)
    assert np.all(geom.inband_device_dist > 0)
    assert np.all(geom.outband_device_dist > 0)
