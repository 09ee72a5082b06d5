"""
SBCC Encoder Chain - Continuous Rate-1/3 Blockwise Braided Encoder
Two component encoders cross-coupled through one-block-delayed, permuted parity feedback

Wiring per time unit t:
    encoder 1: a = u_t,          b = P2(v2_{t-1})  ->  v1_t
    encoder 2: a = P0(u_t),      b = P1(v1_{t-1})  ->  v2_t
with zero registers and zero feedback at chain start and after resync_reset().
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.domain.errors import LengthMismatchError
from src.domain.permutor import BlockPermutor, apply
from src.domain.rsc_component import ComponentState, TrellisTable, encode_block, get_trellis

logger = logging.getLogger(__name__)


@dataclass
class CodedBlock:
    """Transmitted triple of one time unit"""
    u: np.ndarray
    v1: np.ndarray
    v2: np.ndarray

    @property
    def size(self) -> int:
        return int(self.u.shape[0])

    def num_transmitted_bits(self) -> int:
        return 3 * self.size


class EncoderChain:
    """Single-owner encoder state machine of one SBCC chain"""

    def __init__(
        self,
        p0: BlockPermutor,
        p1: BlockPermutor,
        p2: BlockPermutor,
        trellis: Optional[TrellisTable] = None,
    ):
        if not (p0.size == p1.size == p2.size):
            raise LengthMismatchError(
                f"permutor lengths differ: P0={p0.size}, P1={p1.size}, P2={p2.size}"
            )
        self.p0 = p0
        self.p1 = p1
        self.p2 = p2
        self.block_size = p0.size
        self.trellis = trellis or get_trellis()
        self.t = 0
        self._clear()

    def _clear(self):
        self.state1: ComponentState = 0
        self.state2: ComponentState = 0
        self.pending_fb1 = np.zeros(self.block_size, dtype=np.uint8)
        self.pending_fb2 = np.zeros(self.block_size, dtype=np.uint8)

    def encode_next_block(self, u: np.ndarray) -> CodedBlock:
        """Encode info block u_t and advance the chain to t+1"""
        u = np.asarray(u, dtype=np.uint8)
        if u.shape != (self.block_size,):
            raise LengthMismatchError(f"info block has shape {u.shape}, expected ({self.block_size},)")

        v1, self.state1 = encode_block(self.state1, u, self.pending_fb2, self.trellis)
        v2, self.state2 = encode_block(self.state2, apply(self.p0, u), self.pending_fb1, self.trellis)

        self.pending_fb1 = apply(self.p1, v1)
        self.pending_fb2 = apply(self.p2, v2)
        self.t += 1
        return CodedBlock(u=u.copy(), v1=v1, v2=v2)

    def resync_reset(self):
        """Reset registers and feedback to zero; the next block starts a new chain"""
        self._clear()
        logger.debug(f"Encoder resynchronized before block {self.t}")


def new_chain(p0: BlockPermutor, p1: BlockPermutor, p2: BlockPermutor) -> EncoderChain:
    """Fresh chain at t=0 with zero states and zero pending feedback"""
    return EncoderChain(p0, p1, p2)


def encode_next_block(chain: EncoderChain, u: np.ndarray) -> CodedBlock:
    return chain.encode_next_block(u)


def resync_reset(chain: EncoderChain) -> None:
    chain.resync_reset()
