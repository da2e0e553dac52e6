"""Deterministic random-number plumbing.

Every random quantity in the package is addressed, not drawn from shared
mutable state: a value is a pure function of (root seed, stream tags, counter).
Streams are PCG64 generators keyed through ``numpy.random.SeedSequence``,
and random access inside a stream uses ``PCG64.advance`` (one advance unit
per 64-bit draw, i.e. per ``float64`` uniform).

This is what makes environment windows extendable without perturbing already
materialized sites, replicas independent of chunking, and ensemble results
independent of worker count.
"""

from __future__ import annotations

import hashlib

import numpy as np

# Lowest addressable site index; site x maps to draw counter x - SITE_ORIGIN.
SITE_ORIGIN = -(2**40)

# Replica-block width for per-step walk uniforms.  Part of the seeding
# contract: changing it changes every trajectory, so it is frozen here.
REPLICA_BLOCK = 1024


def tag_int(tag: str | int) -> int:
    """Map a stream tag to a stable 64-bit integer (strings are hashed)."""
    if isinstance(tag, (int, np.integer)):
        return int(tag)
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def seed_sequence(root_seed: int, *tags: str | int) -> np.random.SeedSequence:
    entropy = (int(root_seed),) + tuple(tag_int(t) for t in tags)
    return np.random.SeedSequence(entropy)


def generator(root_seed: int, *tags: str | int) -> np.random.Generator:
    """A fresh sequential generator for the given stream."""
    return np.random.Generator(np.random.PCG64(seed_sequence(root_seed, *tags)))


def derive_seed(root_seed: int, *tags: str | int) -> int:
    """A child root seed, itself usable as root of a fresh stream family."""
    return int(seed_sequence(root_seed, *tags).generate_state(1)[0])


class CounterStream:
    """Random-access view of one PCG64 stream.

    ``uniforms(start, count)`` returns draws number start..start+count-1 of
    the stream, regardless of what was asked for before; overlapping requests
    agree exactly.
    """

    __slots__ = ("_ss",)

    def __init__(self, root_seed: int, *tags: str | int):
        self._ss = seed_sequence(root_seed, *tags)

    def uniforms(self, start: int, count: int) -> np.ndarray:
        if start < 0:
            raise ValueError("stream counter must be nonnegative")
        bit_gen = np.random.PCG64(self._ss)
        if start:
            bit_gen.advance(start)
        return np.random.Generator(bit_gen).random(count)

    def site_uniforms(self, lo: int, hi: int) -> np.ndarray:
        """One uniform per site for the inclusive window [lo, hi]."""
        if lo < SITE_ORIGIN:
            raise ValueError(f"site index below supported origin {SITE_ORIGIN}")
        return self.uniforms(lo - SITE_ORIGIN, hi - lo + 1)


class BlockUniforms:
    """Per-step uniforms for a contiguous range of replicas.

    Replicas are organized in fixed blocks of ``REPLICA_BLOCK`` lanes; block b
    owns one stream, and the uniform for (replica r, step t) is draw
    ``t * REPLICA_BLOCK + (r mod REPLICA_BLOCK)`` of that stream.  The layout
    depends only on (root seed, tags), never on ensemble size or memory
    chunking, so any slice of replicas can be stepped independently yet
    reproducibly.
    """

    def __init__(self, root_seed: int, tags: tuple[str | int, ...],
                 first_replica: int, count: int, steps_per_refill: int = 1024):
        self._streams: list[tuple[int, int, CounterStream]] = []
        lo, hi = first_replica, first_replica + count  # [lo, hi)
        b0, b1 = lo // REPLICA_BLOCK, (hi - 1) // REPLICA_BLOCK
        for b in range(b0, b1 + 1):
            bs = b * REPLICA_BLOCK
            a, z = max(lo - bs, 0), min(hi - bs, REPLICA_BLOCK)
            self._streams.append((a, z, CounterStream(root_seed, *tags, b)))
        self._refill = steps_per_refill
        self._bufs: list[np.ndarray] | None = None
        self._out = np.empty(count) if len(self._streams) > 1 else None
        self._buf_step0 = 0

    def _fill(self, step0: int) -> None:
        bufs = []
        for a, z, stream in self._streams:
            block = stream.uniforms(step0 * REPLICA_BLOCK,
                                    self._refill * REPLICA_BLOCK)
            block = block.reshape(self._refill, REPLICA_BLOCK)
            bufs.append(block if (a, z) == (0, REPLICA_BLOCK)
                        else np.ascontiguousarray(block[:, a:z]))
        self._bufs = bufs
        self._buf_step0 = step0

    def step(self, t: int) -> np.ndarray:
        """Uniforms for all replicas of this range at step t."""
        if self._bufs is None or not (0 <= t - self._buf_step0 < self._refill):
            self._fill(t - t % self._refill)
        j = t - self._buf_step0
        if self._out is None:
            return self._bufs[0][j]
        return np.concatenate([b[j] for b in self._bufs], out=self._out)
