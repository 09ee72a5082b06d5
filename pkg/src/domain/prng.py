"""
SBCC Portable Random Source
Seed derivation and platform-independent draws for permutors, info bits and channel noise

All draws come from raw 64-bit outputs of numpy's PCG64 bit generator (PCG XSL-RR 128/64,
seeded through SeedSequence). Only `random_raw` is used, never the Generator distribution
methods, so the derived streams do not depend on numpy's sampling algorithms.

Seed mixing: a seed tuple (master, part_1, ..., part_n) is folded as
    h = splitmix64(master); h = splitmix64(h ^ part_i) for each part
which gives independent per-point and per-frame seeds that do not depend on execution order.
"""

import numpy as np

MASK64 = (1 << 64) - 1
_TWO_POW_53 = float(1 << 53)


def splitmix64(x: int) -> int:
    """One SplitMix64 output step (Steele, Lea, Flood)"""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(master: int, *parts: int) -> int:
    """Derive a 64-bit seed from a master seed and any number of indices"""
    h = splitmix64(int(master) & MASK64)
    for part in parts:
        h = splitmix64(h ^ (int(part) & MASK64))
    return h


def bit_generator(seed: int) -> np.random.PCG64:
    """Portable bit generator for a 64-bit seed"""
    return np.random.PCG64(int(seed) & MASK64)


def bounded_index(bitgen: np.random.PCG64, bound: int) -> int:
    """Uniform integer in [0, bound) by rejection sampling on raw 64-bit words"""
    limit = ((1 << 64) // bound) * bound
    while True:
        r = int(bitgen.random_raw())
        if r < limit:
            return r % bound


def uniform_open(bitgen: np.random.PCG64, n: int) -> np.ndarray:
    """n doubles uniform on (0, 1] built from the top 53 bits of each raw word"""
    raw = np.asarray(bitgen.random_raw(n), dtype=np.uint64)
    return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) / _TWO_POW_53


def gaussian(bitgen: np.random.PCG64, n: int) -> np.ndarray:
    """n standard normal variates by the Box-Muller transform"""
    pairs = (n + 1) // 2
    u1 = uniform_open(bitgen, pairs)
    u2 = uniform_open(bitgen, pairs)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = radius * np.cos(angle)
    out[1::2] = radius * np.sin(angle)
    return out[:n]


def random_bits(bitgen: np.random.PCG64, n: int) -> np.ndarray:
    """n equiprobable bits, least significant bit of each raw word first"""
    words = (n + 63) // 64
    raw = np.asarray(bitgen.random_raw(words), dtype="<u8")
    bits = np.unpackbits(raw.view(np.uint8), bitorder="little")
    return bits[:n].astype(np.uint8)

