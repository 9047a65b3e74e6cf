"""Deterministic, labelled random substreams.

Every random draw in a run comes from a substream addressed by
``(kind, entity, round)`` on top of the root seed. Streams are value-like:
requesting the same label twice yields an identical, freshly seeded generator,
so no module depends on draw order elsewhere and worker parallelism cannot
change results.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

# Stable registry of stream kinds. Order is load-bearing: the integer id is
# mixed into the seed material, so renumbering changes every draw in a run.
STREAM_KINDS = {
    "geometry": 0,
    "uplink": 1,
    "cci": 2,
    "eh-in": 3,
    "eh-out": 4,
    "noise": 5,
    "train": 6,
    "subset": 7,
    "data": 8,
    "data-test": 9,
    "model-init": 10,
}

Label = tuple


def substream(root_seed: int, label: Label) -> np.random.Generator:
    """Return the generator for ``label = (kind, entity, round)`` under ``root_seed``.

    ``kind`` is a registered name from STREAM_KINDS or a raw non-negative int
    (the latter is meant for tests). Entity and round indices must be
    non-negative integers.
    """
    if len(label) != 3:
        raise ConfigError(f"stream label must be (kind, entity, round), got {label!r}")
    kind, entity, round_index = label
    if isinstance(kind, str):
        if kind not in STREAM_KINDS:
            raise ConfigError(f"unknown stream kind {kind!r}")
        kind_id = STREAM_KINDS[kind]
    else:
        kind_id = int(kind)
    for part in (kind_id, entity, round_index):
        if int(part) < 0:
            raise ConfigError(f"stream label parts must be non-negative, got {label!r}")
    seq = np.random.SeedSequence([int(root_seed), kind_id, int(entity), int(round_index)])
    return np.random.default_rng(seq)


def sample_complex_gaussian(stream: np.random.Generator, shape=None):
    """Draw circularly-symmetric complex Gaussians with unit mean square magnitude.

    Real and imaginary parts are independent N(0, 1/2), so E[|h|^2] = 1 and
    |h| is Rayleigh with median sqrt(ln 2). ``shape=None`` returns a scalar.
    """
    if shape is None:
        z = stream.standard_normal(2)
        return complex(z[0], z[1]) / np.sqrt(2.0)
    if isinstance(shape, int):
        shape = (shape,)
    z = stream.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2.0)
