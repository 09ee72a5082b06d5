"""
SBCC Block Permutors - Seeded Random Permutations of Length T
Generation (Fisher-Yates on the portable random source), application, inversion and pinning
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from src.domain.errors import ConfigurationError, LengthMismatchError
from src.domain.prng import bit_generator, bounded_index

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BlockPermutor:
    """Bijection on [0, T) with its inverse"""
    forward: np.ndarray
    inverse: np.ndarray

    @property
    def size(self) -> int:
        return int(self.forward.shape[0])

    @classmethod
    def from_forward(cls, forward: Sequence[int]) -> "BlockPermutor":
        """Build a permutor from its forward index list, validating bijectivity"""
        forward = np.array(forward, dtype=np.int64)
        if forward.ndim != 1 or forward.shape[0] == 0:
            raise ConfigurationError("permutor must be a non-empty index list")
        size = forward.shape[0]
        if not np.array_equal(np.sort(forward), np.arange(size)):
            raise ConfigurationError("permutor indices are not a permutation of 0..T-1")

        inverse = np.empty_like(forward)
        inverse[forward] = np.arange(size)
        forward.flags.writeable = False
        inverse.flags.writeable = False
        return cls(forward=forward, inverse=inverse)

    def save(self, path: Union[str, Path]) -> None:
        """Store the forward indices as a whitespace-separated list"""
        Path(path).write_text(" ".join(str(int(i)) for i in self.forward) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "BlockPermutor":
        """Load a permutor stored by save()"""
        text = Path(path).read_text(encoding="utf-8")
        try:
            indices = [int(token) for token in text.split()]
        except ValueError as e:
            raise ConfigurationError(f"malformed permutor file {path}: {e}") from e
        return cls.from_forward(indices)


def identity_permutor(size: int) -> BlockPermutor:
    """Identity permutation of length size"""
    return BlockPermutor.from_forward(np.arange(size))


def random_permutor(size: int, seed: int) -> BlockPermutor:
    """Uniformly random permutation of length size; identical for identical (size, seed)"""
    if size < 1:
        raise ConfigurationError(f"permutor length must be positive, got {size}")

    bitgen = bit_generator(seed)
    forward = np.arange(size, dtype=np.int64)
    for i in range(size - 1, 0, -1):
        j = bounded_index(bitgen, i + 1)
        forward[i], forward[j] = forward[j], forward[i]
    return BlockPermutor.from_forward(forward)


def apply(p: BlockPermutor, x: np.ndarray) -> np.ndarray:
    """output[i] = x[forward[i]]"""
    x = np.asarray(x)
    if x.shape[0] != p.size:
        raise LengthMismatchError(f"permutor length {p.size} does not match input length {x.shape[0]}")
    return x[p.forward]


def apply_inverse(p: BlockPermutor, x: np.ndarray) -> np.ndarray:
    """output[i] = x[inverse[i]]; undoes apply()"""
    x = np.asarray(x)
    if x.shape[0] != p.size:
        raise LengthMismatchError(f"permutor length {p.size} does not match input length {x.shape[0]}")
    return x[p.inverse]
