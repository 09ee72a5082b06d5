"""
SBCC Window Decoder - Sliding Window Decoding of Blockwise Braided Convolutional Codes
Vertical/horizontal iteration schedule, window extension, resynchronization and soft-BER stopping

Message schedule inside the window (block k at time t, decoder 1 over (u, P2 v2_{t-1}, v1),
decoder 2 over (P0 u, P1 v1_{t-1}, v2)):

    a-ports   : decoder 1 <-> decoder 2 through P0, I1 rounds per visit, decoder 1 first
    b-ports   : prior of block k = permuted (channel + parity-port extrinsic) of block k-1,
                refreshed on forward visits
    p-ports   : prior of block k = de-permuted b-port extrinsic of block k+1,
                refreshed on backward visits
    alphas    : from block k-1 (or inherited at the window's left edge) on forward visits
    betas     : from block k+1 (uniform at the window's right edge) on backward visits

Decision LLRs are channel + prior + extrinsic of decoder 1 on the information bits.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Deque, Dict, Iterator, List, Optional, Protocol, Tuple

import numpy as np

from src.channel.channel_layer import ReceivedBlock
from src.domain.errors import IndexOutOfWindowError, LengthMismatchError, WindowUnderfilledError
from src.domain.permutor import BlockPermutor, apply, apply_inverse
from src.domain.rsc_component import (
    L_MAX,
    TrellisTable,
    bcjr_block,
    get_trellis,
    uniform_metrics,
    zero_state_metrics,
)
from src.infrastructure.config.settings import DecoderConfig
from src.infrastructure.messaging.event_bus import EventBus, EventType

logger = logging.getLogger(__name__)


class SweepDirection(Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


def avg_abs_llr(decisions: np.ndarray) -> float:
    """Average absolute decision LLR of a block"""
    decisions = np.asarray(decisions, dtype=np.float64)
    if decisions.size == 0:
        raise LengthMismatchError("average |LLR| of an empty block")
    return float(np.mean(np.abs(decisions)))


def ber_est(decisions: np.ndarray) -> float:
    """Soft bit error rate estimate (1/T) * sum 1/(1 + exp(|L|))"""
    decisions = np.asarray(decisions, dtype=np.float64)
    if decisions.size == 0:
        raise LengthMismatchError("BER estimate of an empty block")
    e = np.exp(-np.abs(decisions))
    return float(np.mean(e / (1.0 + e)))


def hard_decision(decisions: np.ndarray) -> np.ndarray:
    """Bit 0 iff L >= 0"""
    return (np.asarray(decisions) < 0.0).astype(np.uint8)


def _clip(x: np.ndarray) -> np.ndarray:
    return np.clip(x, -L_MAX, L_MAX)


@dataclass
class LlrBank:
    """Soft values of one received block"""
    t: int
    ch_u: np.ndarray
    ch_v1: np.ndarray
    ch_v2: np.ndarray
    ch_u_perm: np.ndarray
    prior1_a: np.ndarray = field(init=False)
    prior1_b: np.ndarray = field(init=False)
    prior1_p: np.ndarray = field(init=False)
    prior2_a: np.ndarray = field(init=False)
    prior2_b: np.ndarray = field(init=False)
    prior2_p: np.ndarray = field(init=False)
    ext1_a: np.ndarray = field(init=False)
    ext1_b: np.ndarray = field(init=False)
    ext1_p: np.ndarray = field(init=False)
    ext2_a: np.ndarray = field(init=False)
    ext2_b: np.ndarray = field(init=False)
    ext2_p: np.ndarray = field(init=False)
    alpha1_out: np.ndarray = field(init=False)
    alpha2_out: np.ndarray = field(init=False)
    beta1_in: np.ndarray = field(init=False)
    beta2_in: np.ndarray = field(init=False)
    decision: np.ndarray = field(init=False)

    def __post_init__(self):
        self.reset_soft_state()

    @classmethod
    def from_received(cls, block: ReceivedBlock, p0: BlockPermutor) -> "LlrBank":
        return cls(
            t=block.t,
            ch_u=block.ch_u,
            ch_v1=block.ch_v1,
            ch_v2=block.ch_v2,
            ch_u_perm=apply(p0, block.ch_u),
        )

    @property
    def size(self) -> int:
        return int(self.ch_u.shape[0])

    def reset_soft_state(self):
        """Zero every prior and extrinsic; keep channel LLRs"""
        size = self.ch_u.shape[0]
        for name in ("prior1_a", "prior1_b", "prior1_p", "prior2_a", "prior2_b", "prior2_p",
                     "ext1_a", "ext1_b", "ext1_p", "ext2_a", "ext2_b", "ext2_p"):
            setattr(self, name, np.zeros(size))
        self.alpha1_out = uniform_metrics()
        self.alpha2_out = uniform_metrics()
        self.beta1_in = uniform_metrics()
        self.beta2_in = uniform_metrics()
        self.decision = self.ch_u.copy()


@dataclass
class WindowState:
    """Current decoding window"""
    blocks: List[LlrBank]
    target_time: int
    alpha_inherit1: np.ndarray
    alpha_inherit2: np.ndarray
    left_b1: np.ndarray
    left_b2: np.ndarray
    fail_count: int = 0
    iteration_count: int = 0

    @property
    def w_cur(self) -> int:
        return len(self.blocks)

    @property
    def target(self) -> LlrBank:
        return self.blocks[0]


@dataclass
class BlockDecision:
    """Hard decisions and diagnostics of one decided block"""
    t: int
    bits: np.ndarray
    avg_abs_llr: float
    ber_est: float
    used_window: int
    used_iterations: int
    resync_triggered: bool = False
    stopped_early: bool = False
    flushed: bool = False
    truncated: bool = False

    def diagnostics(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "avg_abs_llr": self.avg_abs_llr,
            "ber_est": self.ber_est,
            "used_window": self.used_window,
            "used_iterations": self.used_iterations,
            "resync_triggered": self.resync_triggered,
            "stopped_early": self.stopped_early,
            "flushed": self.flushed,
            "truncated": self.truncated,
        }


class BlockSource(Protocol):
    """Receiver-side view of the transmitter plus the noiseless feedback channel"""

    def next_block(self) -> Optional[ReceivedBlock]:
        """Next received block, or None at frame end"""

    def resync(self) -> None:
        """Ask the encoder to reset before its next untransmitted block"""


class WindowDecoder:
    """Sliding window decoder for one frame (single owner, not thread-safe)"""

    def __init__(
        self,
        permutors: Tuple[BlockPermutor, BlockPermutor, BlockPermutor],
        config: DecoderConfig,
        source: BlockSource,
        bus: Optional[EventBus] = None,
        trellis: Optional[TrellisTable] = None,
    ):
        self.p0, self.p1, self.p2 = permutors
        self.config = config
        self.source = source
        self.bus = bus or EventBus()
        self.trellis = trellis or get_trellis()
        self.block_size = self.p0.size
        self.pending: Deque[LlrBank] = deque()
        self.exhausted = False
        self.state: Optional[WindowState] = None

    # ------------------------------------------------------------------ reception

    def _receive(self) -> Optional[LlrBank]:
        if self.pending:
            return self.pending.popleft()
        if self.exhausted:
            return None
        block = self.source.next_block()
        if block is None:
            self.exhausted = True
            return None
        if block.size != self.block_size:
            raise LengthMismatchError(f"received block of length {block.size}, expected {self.block_size}")
        return LlrBank.from_received(block, self.p0)

    def _fill(self, blocks: List[LlrBank], size: int):
        while len(blocks) < size:
            bank = self._receive()
            if bank is None:
                break
            blocks.append(bank)

    def start_chain(self) -> Optional[WindowState]:
        """Open a window on a new chain: zero-state alphas and known all-zero feedback"""
        blocks: List[LlrBank] = []
        self._fill(blocks, self.config.w)
        if not blocks:
            self.state = None
            return None

        fail_count = self.state.fail_count if self.state is not None else 0
        known_zero = np.full(self.block_size, L_MAX)
        self.state = WindowState(
            blocks=blocks,
            target_time=blocks[0].t,
            alpha_inherit1=zero_state_metrics(),
            alpha_inherit2=zero_state_metrics(),
            left_b1=known_zero,
            left_b2=known_zero.copy(),
            fail_count=fail_count,
        )
        return self.state

    # ------------------------------------------------------------------ iterations

    def _refresh_from_left(self, k: int):
        win = self.state
        bank = win.blocks[k]
        if k == 0:
            bank.prior1_b = win.left_b1
            bank.prior2_b = win.left_b2
        else:
            prev = win.blocks[k - 1]
            bank.prior1_b = apply(self.p2, _clip(prev.ch_v2 + prev.ext2_p))
            bank.prior2_b = apply(self.p1, _clip(prev.ch_v1 + prev.ext1_p))

    def _refresh_from_right(self, k: int):
        win = self.state
        bank = win.blocks[k]
        if k + 1 < win.w_cur:
            nxt = win.blocks[k + 1]
            bank.prior1_p = apply_inverse(self.p1, nxt.ext2_b)
            bank.prior2_p = apply_inverse(self.p2, nxt.ext1_b)
        else:
            bank.prior1_p = np.zeros(self.block_size)
            bank.prior2_p = np.zeros(self.block_size)

    def _edge_metrics(self, k: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        win = self.state
        if k == 0:
            alpha1, alpha2 = win.alpha_inherit1, win.alpha_inherit2
        else:
            alpha1, alpha2 = win.blocks[k - 1].alpha1_out, win.blocks[k - 1].alpha2_out
        if k + 1 < win.w_cur:
            beta1, beta2 = win.blocks[k + 1].beta1_in, win.blocks[k + 1].beta2_in
        else:
            beta1, beta2 = uniform_metrics(), uniform_metrics()
        return alpha1, alpha2, beta1, beta2

    def vertical_iteration(self, block_idx: int, direction: SweepDirection):
        """I1 rounds of decoder 1 / decoder 2 on one block of the window"""
        win = self.state
        if win is None or not (0 <= block_idx < win.w_cur):
            raise IndexOutOfWindowError(f"block index {block_idx} outside window")

        if direction == SweepDirection.FORWARD:
            self._refresh_from_left(block_idx)
        else:
            self._refresh_from_right(block_idx)

        bank = win.blocks[block_idx]
        alpha1, alpha2, beta1, beta2 = self._edge_metrics(block_idx)

        for _ in range(self.config.i1):
            bank.prior1_a = apply_inverse(self.p0, bank.ext2_a)
            r1 = bcjr_block(
                self.trellis,
                bank.ch_u + bank.prior1_a,
                bank.prior1_b,
                bank.ch_v1 + bank.prior1_p,
                alpha1,
                beta1,
            )
            bank.ext1_a, bank.ext1_b, bank.ext1_p = r1.ext_a, r1.ext_b, r1.ext_p
            bank.alpha1_out, bank.beta1_in = r1.alpha_out, r1.beta_in

            bank.prior2_a = apply(self.p0, bank.ext1_a)
            r2 = bcjr_block(
                self.trellis,
                bank.ch_u_perm + bank.prior2_a,
                bank.prior2_b,
                bank.ch_v2 + bank.prior2_p,
                alpha2,
                beta2,
            )
            bank.ext2_a, bank.ext2_b, bank.ext2_p = r2.ext_a, r2.ext_b, r2.ext_p
            bank.alpha2_out, bank.beta2_in = r2.alpha_out, r2.beta_in

        bank.prior1_a = apply_inverse(self.p0, bank.ext2_a)
        bank.decision = _clip(bank.ch_u + bank.prior1_a + bank.ext1_a)

    def horizontal_iteration(self):
        """Forward sweep over the window, then backward sweep"""
        win = self.state
        for k in range(win.w_cur):
            self.vertical_iteration(k, SweepDirection.FORWARD)
        for k in range(win.w_cur - 1, -1, -1):
            self.vertical_iteration(k, SweepDirection.BACKWARD)
        win.iteration_count += 1

    # ------------------------------------------------------------------ target decoding

    def _needs_extension(self) -> bool:
        win = self.state
        cfg = self.config
        leading = min(cfg.tau, win.w_cur)
        return any(avg_abs_llr(win.blocks[i].decision) < cfg.theta for i in range(leading))

    def _extend(self) -> bool:
        """Grow the window by one received block and restart from the channel LLRs"""
        win = self.state
        bank = self._receive()
        if bank is None:
            return False
        win.blocks.append(bank)
        for block in win.blocks:
            block.reset_soft_state()
        win.iteration_count = 0
        self.bus.publish(EventType.WINDOW_EXTENDED, win.target_time, {"w_cur": win.w_cur})
        logger.debug(f"Window extended to {win.w_cur} for target {win.target_time}")
        return True

    def decode_target(self) -> BlockDecision:
        """Iterate on the window until stop, extension limit or I2; decide the target block"""
        win = self.state
        cfg = self.config
        if win.w_cur < cfg.w and not self.exhausted:
            raise WindowUnderfilledError(f"window holds {win.w_cur} blocks, needs {cfg.w}")

        win.iteration_count = 0
        total_iterations = 0
        stopped_early = False
        while True:
            while win.iteration_count < cfg.i2:
                self.horizontal_iteration()
                total_iterations += 1
                if cfg.stopping_enabled and ber_est(win.target.decision) <= cfg.gamma:
                    stopped_early = True
                    break
            if stopped_early or not cfg.extension_enabled:
                break
            if win.w_cur >= cfg.w_max or not self._needs_extension():
                break
            if not self._extend():
                break

        target = win.target
        return BlockDecision(
            t=target.t,
            bits=hard_decision(target.decision),
            avg_abs_llr=avg_abs_llr(target.decision),
            ber_est=ber_est(target.decision),
            used_window=win.w_cur,
            used_iterations=total_iterations,
            stopped_early=stopped_early,
            truncated=self.exhausted and win.w_cur < cfg.w,
        )

    def check_resync(self, decision: BlockDecision) -> bool:
        """Count consecutive failed targets; True when N_r is reached and resync must fire"""
        win = self.state
        if decision.avg_abs_llr < self.config.theta:
            win.fail_count += 1
        else:
            win.fail_count = 0

        if self.config.resync_enabled and win.fail_count >= self.config.n_r:
            win.fail_count = 0
            return True
        return False

    def _flush(self) -> List[BlockDecision]:
        """Decide the rest of the window and any buffered blocks from their current LLRs"""
        win = self.state
        leftovers = win.blocks[1:] + list(self.pending)
        self.pending.clear()
        return [
            BlockDecision(
                t=bank.t,
                bits=hard_decision(bank.decision),
                avg_abs_llr=avg_abs_llr(bank.decision),
                ber_est=ber_est(bank.decision),
                used_window=win.w_cur,
                used_iterations=0,
                flushed=True,
            )
            for bank in leftovers
        ]

    def shift_window(self):
        """Drop the decided target, inherit its boundary messages and refill to w blocks"""
        win = self.state
        target = win.blocks.pop(0)
        win.alpha_inherit1 = target.alpha1_out
        win.alpha_inherit2 = target.alpha2_out
        win.left_b1 = apply(self.p2, _clip(target.ch_v2 + target.ext2_p))
        win.left_b2 = apply(self.p1, _clip(target.ch_v1 + target.ext1_p))

        while win.w_cur > self.config.w:
            surplus = win.blocks.pop()
            surplus.reset_soft_state()
            self.pending.appendleft(surplus)
        self._fill(win.blocks, self.config.w)

        win.target_time = target.t + 1
        win.iteration_count = 0

    # ------------------------------------------------------------------ frame loop

    def _publish(self, decision: BlockDecision):
        self.bus.publish(EventType.BLOCK_DECIDED, decision.t, decision.diagnostics())

    def decode_all(self) -> Iterator[BlockDecision]:
        """Decode every block the source delivers, in time order"""
        self.start_chain()
        while self.state is not None and self.state.blocks:
            decision = self.decode_target()
            decision.resync_triggered = self.check_resync(decision)
            self._publish(decision)
            yield decision

            if decision.resync_triggered:
                for flushed in self._flush():
                    self._publish(flushed)
                    yield flushed
                self.bus.publish(EventType.RESYNC, decision.t, {"restart_after": decision.t})
                logger.info(f"Resynchronization after failed target {decision.t}")
                self.source.resync()
                self.start_chain()
            else:
                self.shift_window()
