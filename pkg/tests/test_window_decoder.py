import math

import numpy as np
import pytest

from src.channel.channel_layer import ReceivedBlock
from src.decoder.window_decoder import (
    BlockDecision,
    SweepDirection,
    WindowDecoder,
    avg_abs_llr,
    ber_est,
    hard_decision,
)
from src.domain.errors import IndexOutOfWindowError, LengthMismatchError, WindowUnderfilledError
from src.domain.permutor import apply_inverse
from src.domain.rsc_component import L_MAX
from src.infrastructure.config.settings import DecoderConfig, decoder_profile
from src.infrastructure.messaging.event_bus import EventBus, EventType

from tests.conftest import ScriptedSource


def zero_source(num_blocks, size):
    zeros = np.zeros(size)
    return ScriptedSource([ReceivedBlock(t, zeros, zeros.copy(), zeros.copy()) for t in range(num_blocks)])


def decision(t, avg):
    return BlockDecision(t=t, bits=np.zeros(4, dtype=np.uint8), avg_abs_llr=avg, ber_est=0.5,
                         used_window=3, used_iterations=1)


def test_avg_abs_llr_examples():
    assert avg_abs_llr(np.array([1.0, -2.0, 3.0, -4.0])) == 2.5
    assert avg_abs_llr(np.zeros(8)) == 0.0
    assert avg_abs_llr(np.array([L_MAX, -L_MAX, L_MAX])) == L_MAX


def test_ber_est_examples():
    assert ber_est(np.zeros(5)) == 0.5
    assert ber_est(np.array([math.log(3.0), -math.log(9.0)])) == pytest.approx(0.175, abs=1e-12)
    assert ber_est(np.full(4, L_MAX)) == pytest.approx(1.0 / (1.0 + math.exp(50.0)), rel=1e-9)


def test_empty_block_statistics_rejected():
    with pytest.raises(LengthMismatchError):
        avg_abs_llr(np.array([]))
    with pytest.raises(LengthMismatchError):
        ber_est(np.array([]))


def test_hard_decision_tie_is_zero():
    np.testing.assert_array_equal(hard_decision(np.array([0.0, -0.1, 2.0, -0.0])), [0, 1, 0, 0])


def test_noiseless_frame_decodes_without_errors(permutors, noiseless_frame):
    info, source = noiseless_frame(8)
    config = DecoderConfig(i2=3)
    decisions = list(WindowDecoder(permutors, config, source).decode_all())

    assert [d.t for d in decisions] == list(range(8))
    for d in decisions:
        np.testing.assert_array_equal(d.bits, info[d.t])
        assert d.used_iterations == config.i2
        assert d.used_window == min(config.w, 8 - d.t)
        assert d.truncated == (d.used_window < config.w)
    assert decisions[-1].used_window == 1


def test_all_zero_window_keeps_extrinsics_zero(permutors):
    decoder = WindowDecoder(permutors, DecoderConfig(i2=2), zero_source(5, permutors[0].size))
    decoder.start_chain()
    for _ in range(3):
        decoder.horizontal_iteration()
    for bank in decoder.state.blocks:
        for values in (bank.ext1_a, bank.ext1_p, bank.ext2_a, bank.ext2_p):
            np.testing.assert_allclose(values, 0.0, atol=1e-9)


def test_iteration_counter(permutors, noiseless_frame):
    _, source = noiseless_frame(5)
    decoder = WindowDecoder(permutors, DecoderConfig(), source)
    decoder.start_chain()
    for k in range(1, 5):
        decoder.horizontal_iteration()
        assert decoder.state.iteration_count == k


def test_vertical_iteration_index_checked(permutors, noiseless_frame):
    _, source = noiseless_frame(5)
    decoder = WindowDecoder(permutors, DecoderConfig(), source)
    decoder.start_chain()
    with pytest.raises(IndexOutOfWindowError):
        decoder.vertical_iteration(3, SweepDirection.FORWARD)
    with pytest.raises(IndexOutOfWindowError):
        decoder.vertical_iteration(-1, SweepDirection.BACKWARD)


def test_vertical_iteration_is_deterministic_and_decomposes(permutors, noiseless_frame):
    results = []
    for _ in range(2):
        _, source = noiseless_frame(4, seed=3)
        decoder = WindowDecoder(permutors, DecoderConfig(i1=2), source)
        decoder.start_chain()
        decoder.vertical_iteration(0, SweepDirection.FORWARD)
        results.append(decoder.state.blocks[0])

    first, second = results
    np.testing.assert_array_equal(first.ext1_a, second.ext1_a)
    np.testing.assert_array_equal(first.ext2_p, second.ext2_p)
    expected = np.clip(first.ch_u + apply_inverse(permutors[0], first.ext2_a) + first.ext1_a, -L_MAX, L_MAX)
    np.testing.assert_allclose(first.decision, expected)


def test_first_block_sees_known_zero_feedback(permutors, noiseless_frame):
    _, source = noiseless_frame(4)
    decoder = WindowDecoder(permutors, DecoderConfig(), source)
    decoder.start_chain()
    decoder.vertical_iteration(0, SweepDirection.FORWARD)
    bank = decoder.state.blocks[0]
    np.testing.assert_array_equal(bank.prior1_b, L_MAX)
    np.testing.assert_array_equal(bank.prior2_b, L_MAX)


def test_window_shift_is_a_queue(permutors, noiseless_frame):
    _, source = noiseless_frame(6)
    decoder = WindowDecoder(permutors, DecoderConfig(i2=1), source)
    decoder.start_chain()
    assert [b.t for b in decoder.state.blocks] == [0, 1, 2]
    decoder.decode_target()
    decoder.shift_window()
    assert [b.t for b in decoder.state.blocks] == [1, 2, 3]
    assert decoder.state.target_time == 1


def test_underfilled_window_rejected(permutors, noiseless_frame):
    _, source = noiseless_frame(6)
    decoder = WindowDecoder(permutors, DecoderConfig(), source)
    decoder.start_chain()
    decoder.state.blocks.pop()
    with pytest.raises(WindowUnderfilledError):
        decoder.decode_target()


def test_stopping_at_half_forces_single_iteration(permutors, noiseless_frame):
    _, source = noiseless_frame(6)
    config = decoder_profile("all-on", gamma=0.5)
    for d in WindowDecoder(permutors, config, source).decode_all():
        assert d.used_iterations == 1
        assert d.stopped_early
        assert d.ber_est <= config.gamma


def test_huge_threshold_grows_window_to_maximum(permutors, noiseless_frame):
    _, source = noiseless_frame(10)
    config = decoder_profile("extension", theta=1e9, i2=2)
    bus = EventBus()
    extensions = []
    bus.subscribe(lambda event: extensions.append(event.t), EventType.WINDOW_EXTENDED)

    decisions = list(WindowDecoder(permutors, config, source, bus=bus).decode_all())
    assert len(decisions) == 10
    for d in decisions:
        assert d.used_window == min(config.w_max, 10 - d.t)
        assert d.used_iterations == config.i2 * (1 + max(0, d.used_window - config.w))
    assert extensions.count(0) == 3


def test_window_maximum_equal_to_initial_disables_growth(permutors, noiseless_frame):
    _, source = noiseless_frame(6)
    config = decoder_profile("extension", theta=1e9, w=3, w_max=3, i2=2)
    for d in WindowDecoder(permutors, config, source).decode_all():
        assert d.used_window == min(3, 6 - d.t)
        assert d.used_iterations == 2


def test_check_resync_counts_consecutive_failures(permutors, noiseless_frame):
    _, source = noiseless_frame(4)
    decoder = WindowDecoder(permutors, decoder_profile("extension+resync", n_r=3), source)
    decoder.start_chain()

    outcomes = [decoder.check_resync(decision(t, avg)) for t, avg in enumerate([1.0, 2.0, 30.0, 3.0])]
    assert outcomes == [False, False, False, False]
    assert decoder.state.fail_count == 1

    outcomes = [decoder.check_resync(decision(t, 0.5)) for t in range(2)]
    assert outcomes == [False, True]
    assert decoder.state.fail_count == 0


def test_single_failure_resyncs_when_threshold_is_one(permutors, noiseless_frame):
    _, source = noiseless_frame(4)
    decoder = WindowDecoder(permutors, decoder_profile("extension+resync", n_r=1), source)
    decoder.start_chain()
    assert decoder.check_resync(decision(0, 9.99))
    assert not decoder.check_resync(decision(1, 10.0))


def test_resync_disabled_never_fires(permutors, noiseless_frame):
    _, source = noiseless_frame(4)
    decoder = WindowDecoder(permutors, decoder_profile("extension", n_r=1), source)
    decoder.start_chain()
    assert not any(decoder.check_resync(decision(t, 0.0)) for t in range(5))


def test_resync_flushes_window_and_restarts(permutors):
    source = zero_source(9, permutors[0].size)
    bus = EventBus()
    resyncs = []
    bus.subscribe(lambda event: resyncs.append(event.t), EventType.RESYNC)
    config = decoder_profile("extension+resync", i2=1, w_max=3)

    decisions = list(WindowDecoder(permutors, config, source, bus=bus).decode_all())
    assert [d.t for d in decisions] == list(range(9))
    assert resyncs == [0, 3, 6]
    assert source.resync_requests == [3, 6, 9]
    assert [d.t for d in decisions if d.flushed] == [1, 2, 4, 5, 7, 8]
    assert all(d.used_iterations == 0 for d in decisions if d.flushed)


def test_block_decided_events_match_decisions(permutors, noiseless_frame):
    _, source = noiseless_frame(5)
    bus = EventBus()
    payloads = []
    bus.subscribe(lambda event: payloads.append(event.payload), EventType.BLOCK_DECIDED)
    decisions = list(WindowDecoder(permutors, DecoderConfig(i2=1), source, bus=bus).decode_all())
    assert [p["t"] for p in payloads] == [d.t for d in decisions]
    assert payloads[0]["used_window"] == 3
