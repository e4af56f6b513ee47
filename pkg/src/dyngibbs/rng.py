"""Deterministic randomness for chains and couplings.

All randomness in the package flows through counter-based Philox streams so
that every chain, update, and benchmark is reproducible from (seed, stream).

Conventions, relied on throughout:

* ``make_stream(seed, stream)`` keys a Philox generator with the two 64-bit
  words (seed, stream). Chain i always uses stream i; auxiliary consumers
  (benchmark baselines) use ids offset by 2**32 so they never collide.
* Every random decision consumes exactly one ``Generator.random()`` float64
  uniform. Categorical draws use inverse-CDF over ascending spin index.
* A Gibbs step consumes its uniforms in the order: vertex pick, spin draw.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "make_stream",
    "uniform_index",
    "categorical",
    "geometric_skip",
    "BASELINE_STREAM_OFFSET",
    "UPDATE_STREAM_OFFSET",
    "update_stream",
]

BASELINE_STREAM_OFFSET = 1 << 32

# Coupled-replay phases draw from their own stream space: disjoint from chain
# creation streams (small ints) and from benchmark baselines (2**32 block).
UPDATE_STREAM_OFFSET = 1 << 33


def update_stream(epoch: int, chain: int) -> int:
    """Stream id for the replay randomness of one chain in one update epoch."""
    return UPDATE_STREAM_OFFSET + (epoch << 32) + chain

_MASK64 = (1 << 64) - 1


def make_stream(seed: int, stream: int = 0) -> np.random.Generator:
    """Return the Philox generator for (seed, stream).

    Streams with distinct (seed, stream) keys are statistically independent;
    the same key always reproduces the same draw sequence.
    """
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_index(n: int, u: float) -> int:
    """Map one uniform in [0,1) to an index in 0..n-1."""
    i = int(u * n)
    return n - 1 if i >= n else i


def categorical(weights, u: float) -> int:
    """Inverse-CDF draw over ascending index from nonnegative weights.

    ``weights`` need not be normalized; the caller supplies one uniform.
    Raises ValueError if the total mass is not positive.
    """
    total = 0.0
    for w in weights:
        total += w
    if not total > 0.0:
        raise ValueError("categorical draw from zero total mass")
    target = u * total
    acc = 0.0
    last = 0
    for c, w in enumerate(weights):
        if w > 0.0:
            acc += w
            last = c
            if acc > target:
                return c
    return last  # float round-off at the tail


def geometric_skip(p: float, u: float) -> int:
    """Number of Bernoulli(p) trials up to and including the first success.

    Inverse-CDF of the geometric law on {1, 2, ...}; p >= 1 returns 1.
    """
    if p >= 1.0:
        return 1
    # ceil(log(1-u) / log(1-p)) via log1p for stability near p ~ 0
    k = math.ceil(math.log1p(-u) / math.log1p(-p))
    return 1 if k < 1 else k
