"""Seeded, splittable random streams.

Every stochastic routine in the package takes an explicit seed and derives
its generator through :func:`stream` or :func:`substream`.  Substreams are
keyed by an integer path (e.g. ``(level_index, trial_index)``), so the
stream of trial t does not depend on how many trials a sweep runs or in
which order they execute.
"""

import numpy as np


def stream(seed):
    """Return a fresh generator for ``seed``.

    Equal seeds produce identical draw sequences across runs and platforms
    (PCG64 keyed through a SeedSequence).
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def substream(seed, *path):
    """Return the generator for sub-stream ``path`` of ``seed``.

    ``substream(s, a, b)`` is deterministic in ``(s, a, b)`` alone; it is
    independent of any other substream ever drawn from ``s``.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in path))
    return np.random.Generator(np.random.PCG64(ss))


def child_seed(seed, *path):
    """Derive a 64-bit integer seed for sub-stream ``path`` of ``seed``.

    Useful where an API takes a seed rather than a generator; the child
    seed can be quoted to reproduce one trial of a sweep in isolation.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in path))
    return int(ss.generate_state(1, np.uint64)[0])
