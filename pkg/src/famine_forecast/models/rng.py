"""Counter-based 64-bit seed mixing and a tiny splitmix64 stream usable from jitted code.

Every random draw in model fitting comes from a stream keyed by
``(master seed, stream index)``, so results never depend on how work is
scheduled across threads.
"""
from __future__ import annotations

import zlib

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer on a Python int."""
    z = (z + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    return mix64(mix64(seed & MASK64) ^ (index & MASK64))


def derive_seed_from_key(seed: int, key: str) -> int:
    """Seed for a string-keyed stream (e.g. a country code)."""
    return derive_seed(seed, zlib.crc32(key.encode("utf-8")))


def new_stream(seed: int) -> np.ndarray:
    """State array for the jitted generator below."""
    return np.array([seed & MASK64], dtype=np.uint64)


_U_GOLDEN = np.uint64(_GOLDEN)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)


@njit(cache=True, nogil=True)
def next_u64(state):
    state[0] += _U_GOLDEN
    z = state[0]
    z = (z ^ (z >> _S30)) * _U_M1
    z = (z ^ (z >> _S27)) * _U_M2
    return z ^ (z >> _S31)


@njit(cache=True, nogil=True)
def randbelow(state, k):
    """Integer in [0, k); modulo bias is below 2**-50 for the k used here."""
    return np.int64(next_u64(state) % np.uint64(k))
