"""Deterministic random streams.

Every draw in the library comes from a generator keyed by
``(master seed, stream id, chunk index)``, so a result depends only on the
seed and the chunking, never on thread scheduling.
"""
import numpy as np

DEFAULT_SEED = 20140101


def stream(seed, stream_id=0, chunk=None):
    """Return a ``numpy.random.Generator`` for one stream (and optional chunk)."""
    key = (int(stream_id),) if chunk is None else (int(stream_id), int(chunk))
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=key))


def as_generator(rng):
    """Accept a Generator, an int seed, or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return stream(DEFAULT_SEED)
    return stream(rng)


def chunk_sizes(n, chunk_size):
    """Split ``n`` into consecutive chunk sizes (last one may be short)."""
    if n <= 0:
        return []
    full, rest = divmod(int(n), int(chunk_size))
    return [int(chunk_size)] * full + ([rest] if rest else [])
