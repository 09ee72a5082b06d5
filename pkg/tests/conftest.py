import numpy as np
import pytest

from src.channel.channel_layer import ReceivedBlock, channel_llrs, modulate
from src.domain.encoder_chain import EncoderChain
from src.domain.permutor import random_permutor
from src.domain.prng import bit_generator, random_bits
from src.infrastructure.config.settings import load_sim_config


class ScriptedSource:
    """Block source replaying pre-encoded blocks; records resync requests"""

    def __init__(self, blocks):
        self.blocks = list(blocks)
        self.position = 0
        self.resync_requests = []

    def next_block(self):
        if self.position >= len(self.blocks):
            return None
        block = self.blocks[self.position]
        self.position += 1
        return block

    def resync(self):
        self.resync_requests.append(self.position)


@pytest.fixture
def permutors():
    return tuple(random_permutor(32, seed) for seed in (11, 12, 13))


@pytest.fixture
def noiseless_frame(permutors):
    """Factory: (info blocks, scripted source) of an unperturbed frame with +/-L_MAX channel LLRs"""

    def build(num_blocks, seed=7):
        chain = EncoderChain(*permutors)
        bitgen = bit_generator(seed)
        info, blocks = [], []
        for t in range(num_blocks):
            u = random_bits(bitgen, permutors[0].size)
            coded = chain.encode_next_block(u)
            info.append(u)
            blocks.append(ReceivedBlock(
                t=t,
                ch_u=channel_llrs(modulate(coded.u), 0.0),
                ch_v1=channel_llrs(modulate(coded.v1), 0.0),
                ch_v2=channel_llrs(modulate(coded.v2), 0.0),
            ))
        return info, ScriptedSource(blocks)

    return build


@pytest.fixture
def sim_config():
    """Factory for small, fast simulation configs"""

    def build(profile="baseline", decoder_overrides=None, **overrides):
        data = {"block_length": 64, "num_blocks": 8, "frames": 2, "ebn0_points": [2.0], "profile": profile}
        data.update(overrides)
        data["decoder_overrides"] = decoder_overrides or {}
        return load_sim_config(overrides=data)

    return build
