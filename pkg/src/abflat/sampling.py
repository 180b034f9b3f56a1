"""Deterministic sample generation keyed by ``(seed, index)``.

Each sample index owns an independent Philox stream, so a sample does not
depend on how many other samples were drawn or in which order.
"""

import numpy as np

from .errors import DomainError

BLOCK = 32
MAX_BLOCKS = 64


def stream(seed, index, channel=0):
    """Generator for sample ``index`` on ``channel``."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, int(index), int(channel)]))


def _ball(rng, count, n, radius):
    d = rng.standard_normal((count, n))
    d /= np.linalg.norm(d, axis=-1, keepdims=True)
    r = radius * rng.random(count) ** (1.0 / n)
    return d * r[:, None]


def _sphere(rng, count, n):
    d = rng.standard_normal((count, n))
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def sample_xy(seed, count, n, radius, accept=None, channel=0):
    """Points ``x`` in the ball of ``radius`` and unit directions ``y``.

    ``accept(x, y)`` (batched, returns a boolean mask) rejects candidates;
    every sample keeps drawing blocks from its own stream until one is
    accepted.  ``accept`` is called once per round on all pending blocks.
    """
    xs = np.empty((count, n))
    ys = np.empty((count, n))
    rngs = [stream(seed, i, channel) for i in range(count)]
    pending = np.arange(count)
    for _ in range(MAX_BLOCKS):
        if not pending.size:
            break
        bx = np.empty((pending.size, BLOCK, n))
        by = np.empty((pending.size, BLOCK, n))
        for k, i in enumerate(pending):
            bx[k] = _ball(rngs[i], BLOCK, n, radius)
            by[k] = _sphere(rngs[i], BLOCK, n)
        if accept is None:
            ok = np.ones((pending.size, BLOCK), bool)
        else:
            ok = np.asarray(accept(bx.reshape(-1, n), by.reshape(-1, n)), bool).reshape(pending.size, BLOCK)
        hit = ok.any(axis=1)
        first = ok.argmax(axis=1)
        done = pending[hit]
        xs[done] = bx[hit, first[hit]]
        ys[done] = by[hit, first[hit]]
        pending = pending[~hit]
    if pending.size:
        raise DomainError(f"no admissible sample found for index {pending[0]}", point=radius)
    return xs, ys


def sample_uniform(seed, count, low, high, channel=0):
    """``count`` points uniform in the box ``[low, high]`` (per-index streams)."""
    low = np.asarray(low, float)
    high = np.asarray(high, float)
    out = np.empty((count,) + low.shape)
    for i in range(count):
        out[i] = low + (high - low) * stream(seed, i, channel).random(low.shape)
    return out
