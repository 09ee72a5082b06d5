import math

import numpy as np
import pytest

from src.channel.channel_layer import (
    AwgnChannel,
    ChannelConfig,
    channel_llrs,
    ebn0_to_sigma,
    modulate,
    transmit,
)
from src.domain.encoder_chain import CodedBlock
from src.domain.errors import ConfigurationError
from src.domain.prng import bit_generator
from src.domain.rsc_component import L_MAX


def test_ebn0_to_sigma_values():
    assert ebn0_to_sigma(0.0, 1.0 / 3.0) == pytest.approx(math.sqrt(1.5), abs=1e-6)
    assert ebn0_to_sigma(0.04, 1.0 / 3.0) ** 2 == pytest.approx(1.48627, abs=1e-4)
    assert ebn0_to_sigma(0.0, 1.0) == pytest.approx(math.sqrt(0.5), abs=1e-12)


@pytest.mark.parametrize("rate", [0.0, -0.5, 1.5])
def test_ebn0_to_sigma_rejects_bad_rate(rate):
    with pytest.raises(ConfigurationError):
        ebn0_to_sigma(1.0, rate)


def test_modulate():
    np.testing.assert_array_equal(modulate(np.array([0, 1, 0])), [1.0, -1.0, 1.0])


def test_transmit_noiseless_is_identity():
    symbols = modulate(np.array([0, 1, 1, 0]))
    np.testing.assert_array_equal(transmit(symbols, 0.0, bit_generator(1)), symbols)


def test_transmit_is_seeded():
    symbols = np.ones(1000)
    first = transmit(symbols, 0.8, bit_generator(5))
    second = transmit(symbols, 0.8, bit_generator(5))
    assert first.tobytes() == second.tobytes()


def test_noise_variance():
    sigma = 1.2
    noise = transmit(np.zeros(1_000_000), sigma, bit_generator(77))
    assert noise.var() == pytest.approx(sigma ** 2, rel=0.01)


def test_channel_llr_values():
    np.testing.assert_allclose(channel_llrs(np.array([1.0, 0.0]), 1.0), [2.0, 0.0])
    np.testing.assert_allclose(channel_llrs(np.array([-2.0]), math.sqrt(0.5)), [-8.0])
    np.testing.assert_allclose(channel_llrs(np.array([100.0, -100.0]), 1.0), [L_MAX, -L_MAX])


def test_noiseless_sign_consistency():
    bits = np.random.default_rng(0).integers(0, 2, 200)
    llrs = channel_llrs(transmit(modulate(bits), 0.0, bit_generator(0)), 0.0)
    np.testing.assert_array_equal((llrs < 0).astype(int), bits)


def test_channel_config_derives_sigma():
    config = ChannelConfig(ebn0_db=0.0, rng_seed=3)
    assert config.sigma == pytest.approx(math.sqrt(1.5))


def test_send_block_and_erasure():
    block = CodedBlock(u=np.zeros(8, dtype=np.uint8), v1=np.ones(8, dtype=np.uint8), v2=np.zeros(8, dtype=np.uint8))
    channel = AwgnChannel(ChannelConfig(ebn0_db=20.0, rng_seed=4))
    received = channel.send_block(3, block)
    assert received.t == 3 and received.size == 8
    assert np.all(received.ch_v1 < 0)

    erased = channel.send_block(4, block, erased=True)
    for values in (erased.ch_u, erased.ch_v1, erased.ch_v2):
        assert not values.any()


def test_channel_pipeline_is_deterministic():
    bits = np.random.default_rng(1).integers(0, 2, 300)
    first = AwgnChannel(ChannelConfig(ebn0_db=1.0, rng_seed=9)).send(bits)
    second = AwgnChannel(ChannelConfig(ebn0_db=1.0, rng_seed=9)).send(bits)
    assert first.tobytes() == second.tobytes()
