"""Counter-based 64-bit random numbers (SplitMix64 finalizer).

Value i of the stream with key s is mix64(s + (i + 1) * GAMMA) over
uint64 arithmetic, so any block of a stream can be produced without
generating what comes before it, and streams derived with
derive_stream are independent of scheduling order.

Constants (Steele, Lea and Flood, 2014):
    GAMMA = 0x9E3779B97F4A7C15
    mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
              z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
"""
import numpy as np

GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1


def mix64(z):
    """SplitMix64 finalizer on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64).copy()
    with np.errstate(over="ignore"):
        z ^= z >> np.uint64(30)
        z *= _M1
        z ^= z >> np.uint64(27)
        z *= _M2
        z ^= z >> np.uint64(31)
    return z


def derive_stream(seed, index):
    """Seed of sub-stream `index` of `seed`: mix64(seed + (index + 1) * GAMMA).

    mix64 is a bijection of 64-bit words and index -> seed + (index+1) GAMMA
    is injective modulo 2^64 (GAMMA is odd), so distinct indices never
    collide for a fixed seed.
    """
    s = (int(seed) + (int(index) + 1) * 0x9E3779B97F4A7C15) & MASK64
    return int(mix64(np.uint64(s)))


def raw(seed, count, offset=0):
    """`count` uint64 words of stream `seed`, starting at counter `offset`."""
    i = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(int(seed) & MASK64) + i * GAMMA
    return mix64(z)


def uniform(seed, count, offset=0):
    """Uniform doubles in (0, 1] with 53 random bits."""
    u = raw(seed, count, offset) >> np.uint64(11)
    return (u.astype(np.float64) + 1.0) * 2.0**-53


def standard_normal(seed, count):
    """Standard normals by Box-Muller on consecutive uniform pairs."""
    m = (int(count) + 1) // 2
    u = uniform(seed, 2 * m)
    r = np.sqrt(-2.0 * np.log(u[0::2]))
    th = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(th)
    out[1::2] = r * np.sin(th)
    return out[:count]


def integers(seed, count, high, offset=0):
    """Integers in [0, high) (multiply-shift on the top 32 bits; bias < 2^-32 high)."""
    u = raw(seed, count, offset) >> np.uint64(32)
    return ((u * np.uint64(high)) >> np.uint64(32)).astype(np.int64)
