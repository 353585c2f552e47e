"""Deterministic, offset-addressable random streams.

One master counter-based stream (Philox) per seed; every consumer
reads a contiguous segment of its double-precision output.  Replicate
r of a simulation with n draws per replicate owns doubles
[r*n, (r+1)*n), so results are bit-identical however the replicates
are chunked or distributed across workers: bulk generation of a
(reps, n) block and per-replicate generation at the proper offset
yield the same numbers.

Philox advances in blocks of four output doubles; ``offset_stream``
lands mid-block by discarding the remainder draws.
"""

from __future__ import annotations

import numpy as np

__all__ = ["master_stream", "offset_stream"]


def master_stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def offset_stream(seed: int, offset: int) -> np.random.Generator:
    """Stream positioned at double number ``offset`` of the master stream."""
    if offset < 0:
        raise ValueError(f"offset must be >= 0, got {offset}")
    bitgen = np.random.Philox(key=seed)
    blocks, rem = divmod(offset, 4)
    bitgen.advance(blocks)
    gen = np.random.Generator(bitgen)
    if rem:
        gen.random(rem)
    return gen
