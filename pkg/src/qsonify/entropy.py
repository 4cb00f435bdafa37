"""Uniform randomness source, either seeded-pseudo or backed by a byte file.

Two kinds of sources hide behind one interface:

* ``seeded-pseudo`` -- a SplitMix64 counter generator.  The algorithm is
  frozen here so golden files stay stable across platforms: output k for
  seed s is ``mix(s + (k+1) * 0x9E3779B97F4A7C15)`` with the finalizer
  ``z ^= z>>30; z *= 0xBF58476D1CE4B9B1; z ^= z>>27; z *= 0x94D049BB133111EB;
  z ^= z>>31`` (all mod 2**64).  Period 2**64.
* ``file-backed`` -- consumes a finite byte stream (e.g. dumped from a
  quantum random number generator) strictly in file order, 8 bytes per
  uniform, big-endian.  Exhaustion is an error, never a silent wrap:
  re-reading the stream would defeat the point of ingesting true
  randomness.

Uniforms are built from the top 53 bits of each 64-bit word
(``word >> 11`` times ``2**-53``) so the result is an exact double in
``[0, 1)``; dividing the full word by 2**64 could round up to 1.0.

A source is single-consumer: hand one independently seeded source to each
worker instead of sharing.
"""

from __future__ import annotations

import pathlib

import numpy as np

from .errors import EntropyExhausted, InvalidParam

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4B9B1)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


def _splitmix64(words: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer applied elementwise to uint64 words."""
    z = words
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class EntropySource:
    """Stream of uniforms in [0, 1), deterministic per seed or per file.

    Use :meth:`from_seed` or :meth:`from_file` / :meth:`from_bytes` to
    construct.  ``kind`` is ``"seeded-pseudo"`` or ``"file-backed"``.
    """

    def __init__(self, kind: str, *, seed: int | None = None,
                 byte_stream: bytes | None = None):
        if kind == "seeded-pseudo":
            if seed is None:
                raise InvalidParam("seeded-pseudo source needs a seed")
            self.seed = int(seed) & _U64_MASK
            self._counter = 0
        elif kind == "file-backed":
            if byte_stream is None:
                raise InvalidParam("file-backed source needs a byte stream")
            self._bytes = bytes(byte_stream)
            self._cursor = 0
        else:
            raise InvalidParam(f"unknown entropy kind {kind!r}")
        self.kind = kind

    @classmethod
    def from_seed(cls, seed: int) -> "EntropySource":
        return cls("seeded-pseudo", seed=seed)

    @classmethod
    def from_bytes(cls, data: bytes) -> "EntropySource":
        return cls("file-backed", byte_stream=data)

    @classmethod
    def from_file(cls, path) -> "EntropySource":
        return cls.from_bytes(pathlib.Path(path).read_bytes())

    def remaining_bytes(self) -> int | None:
        """Bytes left in a file-backed stream, None for seeded sources."""
        if self.kind == "file-backed":
            return len(self._bytes) - self._cursor
        return None

    def uniforms(self, n: int) -> np.ndarray:
        """Draw ``n`` uniforms in [0, 1) and advance the source."""
        if n < 0:
            raise InvalidParam("cannot draw a negative number of uniforms")
        if self.kind == "seeded-pseudo":
            counters = np.arange(self._counter + 1, self._counter + n + 1,
                                 dtype=np.uint64)
            words = _splitmix64(np.uint64(self.seed) + counters * _GOLDEN)
            self._counter += n
        else:
            need = 8 * n
            if len(self._bytes) - self._cursor < need:
                raise EntropyExhausted(
                    f"need {need} bytes, have {len(self._bytes) - self._cursor}")
            chunk = self._bytes[self._cursor:self._cursor + need]
            self._cursor += need
            words = np.frombuffer(chunk, dtype=">u8").astype(np.uint64)
        return (words >> np.uint64(11)).astype(np.float64) * 2.0 ** -53

    def next_uniform(self) -> float:
        """Draw one uniform in [0, 1); the next 8 bytes for file-backed sources."""
        return float(self.uniforms(1)[0])
