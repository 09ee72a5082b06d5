"""
SBCC Channel Layer - BPSK over AWGN
E_b/N_0 parameterization, modulation, seeded noise and channel LLR computation

BPSK maps bit 0 -> +1 and bit 1 -> -1 so that positive LLRs favour bit 0.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from src.domain.encoder_chain import CodedBlock
from src.domain.errors import ConfigurationError
from src.domain.prng import bit_generator, gaussian
from src.domain.rsc_component import L_MAX

logger = logging.getLogger(__name__)

CODE_RATE = 1.0 / 3.0


def ebn0_to_sigma(ebn0_db: float, rate: float = CODE_RATE) -> float:
    """Noise standard deviation for unit-energy BPSK at the given E_b/N_0 and code rate"""
    if not (0.0 < rate <= 1.0):
        raise ConfigurationError(f"code rate must lie in (0, 1], got {rate}")
    return math.sqrt(1.0 / (2.0 * rate * 10.0 ** (ebn0_db / 10.0)))


def modulate(bits: np.ndarray) -> np.ndarray:
    """BPSK: 0 -> +1.0, 1 -> -1.0"""
    return 1.0 - 2.0 * np.asarray(bits, dtype=np.float64)


def transmit(symbols: np.ndarray, sigma: float, bitgen: np.random.PCG64) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise of standard deviation sigma"""
    symbols = np.asarray(symbols, dtype=np.float64)
    if sigma == 0.0:
        return symbols.copy()
    return symbols + sigma * gaussian(bitgen, symbols.shape[0])


def channel_llrs(received: np.ndarray, sigma: float) -> np.ndarray:
    """L = 2y/sigma^2 clamped to +/-L_MAX"""
    received = np.asarray(received, dtype=np.float64)
    if sigma == 0.0:
        return np.where(received >= 0.0, L_MAX, -L_MAX)
    return np.clip(2.0 * received / (sigma * sigma), -L_MAX, L_MAX)


@dataclass
class ChannelConfig:
    """AWGN channel operating point"""
    ebn0_db: float
    rng_seed: int
    rate: float = CODE_RATE
    sigma: float = field(init=False)

    def __post_init__(self):
        self.sigma = ebn0_to_sigma(self.ebn0_db, self.rate)


@dataclass
class ReceivedBlock:
    """Channel LLRs of one transmitted block"""
    t: int
    ch_u: np.ndarray
    ch_v1: np.ndarray
    ch_v2: np.ndarray

    @property
    def size(self) -> int:
        return int(self.ch_u.shape[0])

    def erase(self) -> "ReceivedBlock":
        """Same block with every channel LLR forced to zero"""
        zeros = np.zeros(self.size)
        return ReceivedBlock(t=self.t, ch_u=zeros, ch_v1=zeros.copy(), ch_v2=zeros.copy())


class AwgnChannel:
    """Seeded BPSK/AWGN channel owning its own noise stream"""

    def __init__(self, config: ChannelConfig):
        self.config = config
        self.bitgen = bit_generator(config.rng_seed)

    @property
    def sigma(self) -> float:
        return self.config.sigma

    def send(self, bits: np.ndarray) -> np.ndarray:
        """Modulate, add noise and return channel LLRs"""
        return channel_llrs(transmit(modulate(bits), self.sigma, self.bitgen), self.sigma)

    def send_block(self, t: int, block: CodedBlock, erased: bool = False) -> ReceivedBlock:
        """Transmit the triple (u, v1, v2) of one block"""
        received = ReceivedBlock(
            t=t,
            ch_u=self.send(block.u),
            ch_v1=self.send(block.v1),
            ch_v2=self.send(block.v2),
        )
        if erased:
            logger.debug(f"Block {t} erased by genie")
            return received.erase()
        return received
