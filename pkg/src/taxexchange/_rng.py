"""Seedable xoshiro256** stream shared by the compiled kernels and the Python path.

The generator state is a ``uint64[4]`` array owned by the caller, so a state
can be copied, handed to a worker thread, or stepped from plain Python with
exactly the same output as inside a compiled loop.
"""
import numpy as np
from numba import njit

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U17 = np.uint64(17)
_U45 = np.uint64(45)
_U11 = np.uint64(11)
_U7 = np.uint64(7)
_U5 = np.uint64(5)
_U9 = np.uint64(9)
_U64 = np.uint64(64)
_INV_2_53 = 1.0 / 9007199254740992.0

MASK64 = (1 << 64) - 1


@njit(cache=True, inline="always")
def _fmix(z):
    z = (z ^ (z >> _U30)) * _M1
    z = (z ^ (z >> _U27)) * _M2
    return z ^ (z >> _U31)


@njit(cache=True)
def splitmix64_next(counter):
    """Advance a SplitMix64 counter; returns ``(new_counter, output)``."""
    counter = counter + _GOLDEN
    return counter, _fmix(counter)


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (_U64 - k))


@njit(cache=True, inline="always")
def next_u64(s):
    result = _rotl(s[1] * _U5, _U7) * _U9
    t = s[1] << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], _U45)
    return result


@njit(cache=True, inline="always")
def next_double(s):
    """Uniform double on [0, 1) with 53 random bits."""
    return np.float64(next_u64(s) >> _U11) * _INV_2_53


@njit(cache=True, inline="always")
def next_index(s, n):
    """Index uniform on ``0..n-1`` (bias below 2**-53 * n)."""
    return np.int64(next_double(s) * n)


@njit(cache=True, inline="always")
def draw_pair(s, n):
    i = next_index(s, n)
    j = next_index(s, n - 1)
    if j >= i:
        j += 1
    return i, j


def mix_seed(master_seed, *indices):
    """Derive a 64-bit stream seed from a master seed and small task indices.

    Each index must fit in 32 bits.  The indices are packed into one 64-bit key
    and folded in through the SplitMix64 finalizer, which is a bijection, so
    distinct ``(master_seed, indices)`` tuples with the same arity never share
    a stream.
    """
    h = _fmix_py((int(master_seed) & MASK64) ^ 0x5851F42D4C957F2D)
    for idx in _pairs(indices):
        h = _fmix_py(h ^ idx)
    return h


def _pairs(indices):
    indices = [int(i) for i in indices]
    for i in indices:
        if not 0 <= i < (1 << 32):
            raise ValueError(f"seed index {i} outside [0, 2**32)")
    if len(indices) % 2:
        indices.append(0)
    for a, b in zip(indices[::2], indices[1::2]):
        yield (a << 32) | b


def _fmix_py(z):
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_state(seed):
    """Expand a 64-bit seed into a fresh xoshiro256** state via SplitMix64."""
    counter = int(seed) & MASK64
    state = np.empty(4, dtype=np.uint64)
    for k in range(4):
        counter = (counter + 0x9E3779B97F4A7C15) & MASK64
        state[k] = _fmix_py(counter)
    if not state.any():
        state[0] = 1
    return state
