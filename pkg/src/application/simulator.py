"""
SBCC Simulator - Monte Carlo Frame, Point and Sweep Driver
Framed transmission of L blocks through encoder chain, AWGN channel and window decoder,
with BER/BLER/FER accounting, per-block error distributions and decoder complexity statistics
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.channel.channel_layer import AwgnChannel, ChannelConfig, ReceivedBlock
from src.decoder.window_decoder import BlockDecision, WindowDecoder
from src.domain.encoder_chain import EncoderChain
from src.domain.permutor import BlockPermutor, random_permutor
from src.domain.prng import bit_generator, mix_seed, random_bits
from src.infrastructure.config.settings import SimConfig
from src.infrastructure.messaging.event_bus import DecoderEvent, EventBus, EventType, log_event

logger = logging.getLogger(__name__)

PERMUTOR_STREAM = 0x5045524D
INFO_STREAM = 1
NOISE_STREAM = 2

Permutors = Tuple[BlockPermutor, BlockPermutor, BlockPermutor]


def build_permutors(cfg: SimConfig) -> Permutors:
    """P0, P1, P2 fixed for the whole experiment: pinned files or seeded from the master seed"""
    if cfg.permutor_files:
        permutors = tuple(BlockPermutor.load(path) for path in cfg.permutor_files)
    else:
        permutors = tuple(
            random_permutor(cfg.block_length, mix_seed(cfg.master_seed, PERMUTOR_STREAM, i))
            for i in range(3)
        )
    return permutors


def point_key(ebn0_db: float) -> int:
    """Seed component of an E_b/N_0 point (value-based, so list order does not matter)"""
    return int(round(ebn0_db * 10000))


def frame_seed(cfg: SimConfig, ebn0_db: float, frame_index: int) -> int:
    return mix_seed(cfg.master_seed, point_key(ebn0_db), frame_index)


class FrameTransmitter:
    """Transmit side of one frame: info source, encoder chain and channel, pulled block by block"""

    def __init__(self, cfg: SimConfig, permutors: Permutors, ebn0_db: float, seed: int):
        self.num_blocks = cfg.num_blocks
        self.block_length = cfg.block_length
        self.erased = set(cfg.erased_blocks)
        self.chain = EncoderChain(*permutors)
        self.channel = AwgnChannel(ChannelConfig(ebn0_db=ebn0_db, rng_seed=mix_seed(seed, NOISE_STREAM)))
        self.info_bitgen = bit_generator(mix_seed(seed, INFO_STREAM))
        self.info: List[np.ndarray] = []
        self.resync_requested = False
        self.chain_starts: List[int] = []

    def next_block(self) -> Optional[ReceivedBlock]:
        t = len(self.info)
        if t >= self.num_blocks:
            return None
        if self.resync_requested:
            self.chain.resync_reset()
            self.chain_starts.append(t)
            self.resync_requested = False

        u = random_bits(self.info_bitgen, self.block_length)
        self.info.append(u)
        coded = self.chain.encode_next_block(u)
        return self.channel.send_block(t, coded, erased=t in self.erased)

    def resync(self):
        """Noiseless feedback: reset before the next untransmitted block"""
        self.resync_requested = True


@dataclass
class FrameReport:
    """Outcome of one decoded frame"""
    frame_index: int
    block_bit_errors: List[int]
    records: List[Dict[str, Any]]
    resync_points: List[int]
    chain_starts: List[int]
    window_sum: int = 0
    window_count: int = 0
    iteration_sum: int = 0
    iteration_count: int = 0

    @property
    def bit_errors(self) -> int:
        return int(sum(self.block_bit_errors))

    @property
    def block_errors(self) -> int:
        return sum(1 for e in self.block_bit_errors if e > 0)

    @property
    def frame_error(self) -> bool:
        return self.block_errors > 0

    def longest_error_run(self) -> int:
        longest = current = 0
        for errors in self.block_bit_errors:
            current = current + 1 if errors > 0 else 0
            longest = max(longest, current)
        return longest

    def to_dict(self) -> Dict[str, Any]:
        return {
            "frame_index": self.frame_index,
            "bit_errors": self.bit_errors,
            "block_errors": self.block_errors,
            "block_bit_errors": self.block_bit_errors,
            "resync_points": self.resync_points,
            "chain_starts": self.chain_starts,
            "records": self.records,
        }


def run_frame(
    cfg: SimConfig,
    ebn0_db: float,
    seed: int,
    frame_index: int = 0,
    permutors: Optional[Permutors] = None,
    bus: Optional[EventBus] = None,
) -> FrameReport:
    """Encode, transmit and decode one frame of L blocks; deterministic in (cfg, ebn0_db, seed)"""
    permutors = permutors or build_permutors(cfg)
    transmitter = FrameTransmitter(cfg, permutors, ebn0_db, seed)
    bus = bus or EventBus()

    records: List[Dict[str, Any]] = []
    resync_points: List[int] = []

    def collect(event: DecoderEvent):
        records.append(dict(event.payload))

    def collect_resync(event: DecoderEvent):
        resync_points.append(event.t)

    bus.subscribe(collect, EventType.BLOCK_DECIDED)
    bus.subscribe(collect_resync, EventType.RESYNC)
    verbose = logger.isEnabledFor(logging.DEBUG)
    if verbose:
        bus.subscribe(log_event)
    decoder = WindowDecoder(permutors, cfg.decoder, transmitter, bus=bus)

    block_bit_errors = [0] * cfg.num_blocks
    report = FrameReport(frame_index=frame_index, block_bit_errors=block_bit_errors,
                         records=records, resync_points=resync_points,
                         chain_starts=transmitter.chain_starts)
    try:
        for decision in decoder.decode_all():
            errors = int(np.count_nonzero(decision.bits != transmitter.info[decision.t]))
            block_bit_errors[decision.t] = errors
            _account(report, decision)
    finally:
        bus.unsubscribe(collect, EventType.BLOCK_DECIDED)
        bus.unsubscribe(collect_resync, EventType.RESYNC)
        if verbose:
            bus.unsubscribe(log_event)

    for record in records:
        record["bit_errors"] = block_bit_errors[record["t"]]
    return report


def _account(report: FrameReport, decision: BlockDecision):
    if decision.flushed:
        return
    report.iteration_sum += decision.used_iterations
    report.iteration_count += 1
    if not decision.truncated:
        report.window_sum += decision.used_window
        report.window_count += 1


@dataclass
class PointStats:
    """Accumulated counters of one E_b/N_0 point"""
    ebn0_db: float
    block_length: int
    num_blocks: int
    bit_errors: int = 0
    block_errors: int = 0
    frame_errors: int = 0
    bits: int = 0
    blocks: int = 0
    frames: int = 0
    resync_count: int = 0
    propagation_frames: int = 0
    window_sum: int = 0
    window_count: int = 0
    iteration_sum: int = 0
    iteration_count: int = 0
    per_block_error_hist: List[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.per_block_error_hist:
            self.per_block_error_hist = [0] * self.num_blocks

    def add_frame(self, report: FrameReport, propagation_run: int):
        self.frames += 1
        self.blocks += self.num_blocks
        self.bits += self.num_blocks * self.block_length
        self.bit_errors += report.bit_errors
        self.block_errors += report.block_errors
        self.frame_errors += int(report.frame_error)
        self.resync_count += len(report.resync_points)
        self.propagation_frames += int(report.longest_error_run() >= propagation_run)
        self.window_sum += report.window_sum
        self.window_count += report.window_count
        self.iteration_sum += report.iteration_sum
        self.iteration_count += report.iteration_count
        for t, errors in enumerate(report.block_bit_errors):
            self.per_block_error_hist[t] += errors

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def bler(self) -> float:
        return self.block_errors / self.blocks if self.blocks else 0.0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def avg_window(self) -> Optional[float]:
        # None when every decision was truncated or flushed
        return self.window_sum / self.window_count if self.window_count else None

    @property
    def avg_horizontal_iters(self) -> float:
        return self.iteration_sum / self.iteration_count if self.iteration_count else 0.0

    def summary(self) -> Dict[str, Any]:
        return {
            "ebn0_db": self.ebn0_db,
            "frames": self.frames,
            "bit_errors": self.bit_errors,
            "block_errors": self.block_errors,
            "frame_errors": self.frame_errors,
            "ber": self.ber,
            "bler": self.bler,
            "fer": self.fer,
            "avg_window": self.avg_window,
            "avg_horizontal_iters": self.avg_horizontal_iters,
            "resync_count": self.resync_count,
            "propagation_frames": self.propagation_frames,
        }


def _fmt_window(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _targets_reached(cfg: SimConfig, stats: PointStats) -> bool:
    if cfg.min_bit_errors is None and cfg.min_frame_errors is None:
        return False
    return (
        (cfg.min_bit_errors is None or stats.bit_errors >= cfg.min_bit_errors)
        and (cfg.min_frame_errors is None or stats.frame_errors >= cfg.min_frame_errors)
    )


def _frame_job(job: Tuple[SimConfig, float, int, Permutors]) -> FrameReport:
    cfg, ebn0_db, frame_index, permutors = job
    return run_frame(cfg, ebn0_db, frame_seed(cfg, ebn0_db, frame_index), frame_index, permutors)


def _frame_reports(cfg: SimConfig, ebn0_db: float, permutors: Permutors,
                   executor: Optional[ProcessPoolExecutor]) -> Iterable[FrameReport]:
    """Frame reports in frame order, computed serially or in batches on the pool"""
    if executor is None:
        for frame_index in range(cfg.frames):
            yield _frame_job((cfg, ebn0_db, frame_index, permutors))
        return

    batch = 4 * cfg.workers
    for start in range(0, cfg.frames, batch):
        jobs = [(cfg, ebn0_db, i, permutors) for i in range(start, min(start + batch, cfg.frames))]
        yield from executor.map(_frame_job, jobs)


def run_point(
    cfg: SimConfig,
    ebn0_db: float,
    permutors: Optional[Permutors] = None,
    executor: Optional[ProcessPoolExecutor] = None,
) -> Tuple[PointStats, Optional[FrameReport]]:
    """Aggregate frames of one point until the frame budget or the error targets are reached

    Returns the statistics and, when cfg.trace_frame is set and reached, that frame's report.
    """
    permutors = permutors or build_permutors(cfg)
    stats = PointStats(ebn0_db=ebn0_db, block_length=cfg.block_length, num_blocks=cfg.num_blocks)
    traced: Optional[FrameReport] = None

    for report in _frame_reports(cfg, ebn0_db, permutors, executor):
        stats.add_frame(report, cfg.propagation_run)
        if cfg.trace_frame is not None and report.frame_index == cfg.trace_frame:
            traced = report
        if _targets_reached(cfg, stats):
            logger.info(f"{ebn0_db} dB: error targets reached after {stats.frames} frames")
            break

    return stats, traced


@dataclass
class SweepResult:
    """All points of one experiment"""
    points: List[PointStats]
    traces: Dict[float, FrameReport]
    permutors: Permutors

    @property
    def ebn0_points(self) -> List[float]:
        return [p.ebn0_db for p in self.points]


def run_sweep(cfg: SimConfig) -> SweepResult:
    """Simulate every E_b/N_0 point of the configuration"""
    permutors = build_permutors(cfg)
    points: List[PointStats] = []
    traces: Dict[float, FrameReport] = {}

    executor = ProcessPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        for ebn0_db in cfg.ebn0_points:
            stats, traced = run_point(cfg, ebn0_db, permutors, executor)
            points.append(stats)
            if traced is not None:
                traces[ebn0_db] = traced
            logger.info(
                f"{ebn0_db:+.2f} dB: BER={stats.ber:.3e} BLER={stats.bler:.3e} FER={stats.fer:.3e} "
                f"w_avg={_fmt_window(stats.avg_window)} iters={stats.avg_horizontal_iters:.2f}"
            )
    finally:
        if executor is not None:
            executor.shutdown()

    return SweepResult(points=points, traces=traces, permutors=permutors)
