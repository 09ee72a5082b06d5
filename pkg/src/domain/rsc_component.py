"""
SBCC Component Code - Rate-2/3 4-State Recursive Systematic Convolutional Code
Trellis construction, unterminated block encoding and log-MAP (BCJR) block decoding

Generator matrix of both component encoders:

    G(D) = | 1  0  1/(1+D+D^2)       |
           | 0  1  (1+D^2)/(1+D+D^2) |

Realized in observer canonical form with registers (r1, r2), state value s = 2*r1 + r2:

    p_k = a_k ^ b_k ^ r1
    r1' = r2 ^ p_k
    r2' = b_k ^ p_k

Input a is the information stream (numerator 1), input b is the fed-back parity stream
(numerator 1+D^2). LLRs use L = ln(P(bit=0)/P(bit=1)); every soft value leaving this module is
clamped to +/-L_MAX.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from numba import njit

from src.domain.errors import LengthMismatchError, NonFiniteLlrError

logger = logging.getLogger(__name__)

L_MAX = 50.0
NUM_STATES = 4
NUM_INPUTS = 4  # input pair index j = 2*a + b
NEG_INF = -np.inf

ComponentState = int  # register contents 2*r1 + r2, in {0..3}


@dataclass(frozen=True)
class TrellisTable:
    """Immutable transition/output table of the component code"""
    num_states: int
    next_state: np.ndarray  # [state, 2*a + b] -> next state
    parity: np.ndarray      # [state, 2*a + b] -> parity bit

    def branch(self, state: ComponentState, a: int, b: int) -> Tuple[int, int]:
        """Return (next_state, parity) for one trellis step"""
        j = 2 * a + b
        return int(self.next_state[state, j]), int(self.parity[state, j])


@dataclass
class BcjrResult:
    """Soft outputs of one forward-backward pass over a block"""
    ext_a: np.ndarray
    ext_b: np.ndarray
    ext_p: np.ndarray
    app_a: np.ndarray
    alpha_out: np.ndarray
    beta_in: np.ndarray


def build_trellis() -> TrellisTable:
    """Build the trellis of the rate-2/3 RSC code with G(D) as in the module docstring"""
    next_state = np.zeros((NUM_STATES, NUM_INPUTS), dtype=np.int64)
    parity = np.zeros((NUM_STATES, NUM_INPUTS), dtype=np.int64)

    for state in range(NUM_STATES):
        r1, r2 = state >> 1, state & 1
        for a in (0, 1):
            for b in (0, 1):
                p = a ^ b ^ r1
                j = 2 * a + b
                parity[state, j] = p
                next_state[state, j] = ((r2 ^ p) << 1) | (b ^ p)

    next_state.flags.writeable = False
    parity.flags.writeable = False
    return TrellisTable(num_states=NUM_STATES, next_state=next_state, parity=parity)


# Shared trellis instance
_trellis: Optional[TrellisTable] = None


def get_trellis() -> TrellisTable:
    """Get the shared trellis instance"""
    global _trellis
    if _trellis is None:
        _trellis = build_trellis()
    return _trellis


@njit(cache=True)
def _encode_kernel(next_state, parity, state, a, b, out):
    for k in range(a.shape[0]):
        j = 2 * a[k] + b[k]
        out[k] = parity[state, j]
        state = next_state[state, j]
    return state


def encode_block(
    state: ComponentState,
    a: np.ndarray,
    b: np.ndarray,
    trellis: Optional[TrellisTable] = None,
) -> Tuple[np.ndarray, ComponentState]:
    """Encode one block of input pairs without termination; returns (parity, end_state)"""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatchError(f"input streams differ in shape: {a.shape} vs {b.shape}")

    trellis = trellis or get_trellis()
    out = np.zeros(a.shape[0], dtype=np.int64)
    end_state = _encode_kernel(trellis.next_state, trellis.parity, int(state), a, b, out)
    return out.astype(np.uint8), int(end_state)


@njit(cache=True)
def _maxstar(x, y):
    if x < y:
        x, y = y, x
    if y == NEG_INF:
        return x
    return x + np.log1p(np.exp(y - x))


def maxstar(x: float, y: float) -> float:
    """Jacobian logarithm ln(e^x + e^y); -inf is the identity element"""
    return float(_maxstar(float(x), float(y)))


@njit(cache=True)
def _normalize(row):
    m = row.max()
    for s in range(row.shape[0]):
        row[s] -= m


@njit(cache=True)
def _branch_metrics(parity, la, lb, lp, out):
    ha, hb, hp = 0.5 * la, 0.5 * lb, 0.5 * lp
    for s in range(out.shape[0]):
        for j in range(out.shape[1]):
            g = ha if (j >> 1) == 0 else -ha
            g += hb if (j & 1) == 0 else -hb
            g += hp if parity[s, j] == 0 else -hp
            out[s, j] = g


@njit(cache=True)
def _forward_backward(next_state, parity, in_a, in_b, in_p, alpha_init, beta_init):
    # log-sum-exp against one running max per target; exact log-MAP, no max-log shortcut
    n = in_a.shape[0]
    num_states = next_state.shape[0]
    num_inputs = next_state.shape[1]
    gamma = np.empty((num_states, num_inputs))
    top = np.empty(num_states)
    acc = np.empty(num_states)

    alpha = np.empty((n + 1, num_states))
    alpha[0, :] = alpha_init
    _normalize(alpha[0])
    for k in range(n):
        _branch_metrics(parity, in_a[k], in_b[k], in_p[k], gamma)
        top[:] = NEG_INF
        acc[:] = 0.0
        for s in range(num_states):
            for j in range(num_inputs):
                v = alpha[k, s] + gamma[s, j]
                if v > top[next_state[s, j]]:
                    top[next_state[s, j]] = v
        for s in range(num_states):
            for j in range(num_inputs):
                s2 = next_state[s, j]
                if top[s2] > NEG_INF:
                    acc[s2] += np.exp(alpha[k, s] + gamma[s, j] - top[s2])
        for s2 in range(num_states):
            alpha[k + 1, s2] = top[s2] + np.log(acc[s2]) if top[s2] > NEG_INF else NEG_INF
        _normalize(alpha[k + 1])

    beta = np.empty((n + 1, num_states))
    beta[n, :] = beta_init
    _normalize(beta[n])
    for k in range(n - 1, -1, -1):
        _branch_metrics(parity, in_a[k], in_b[k], in_p[k], gamma)
        for s in range(num_states):
            m = NEG_INF
            for j in range(num_inputs):
                v = gamma[s, j] + beta[k + 1, next_state[s, j]]
                if v > m:
                    m = v
            total = 0.0
            for j in range(num_inputs):
                total += np.exp(gamma[s, j] + beta[k + 1, next_state[s, j]] - m)
            beta[k, s] = m + np.log(total)
        _normalize(beta[k])

    app_a = np.empty(n)
    app_b = np.empty(n)
    app_p = np.empty(n)
    metric = np.empty((num_states, num_inputs))
    for k in range(n):
        _branch_metrics(parity, in_a[k], in_b[k], in_p[k], gamma)
        m = NEG_INF
        for s in range(num_states):
            for j in range(num_inputs):
                v = alpha[k, s] + gamma[s, j] + beta[k + 1, next_state[s, j]]
                metric[s, j] = v
                if v > m:
                    m = v
        a0 = a1 = b0 = b1 = p0 = p1 = 0.0
        for s in range(num_states):
            for j in range(num_inputs):
                e = np.exp(metric[s, j] - m)
                if (j >> 1) == 0:
                    a0 += e
                else:
                    a1 += e
                if (j & 1) == 0:
                    b0 += e
                else:
                    b1 += e
                if parity[s, j] == 0:
                    p0 += e
                else:
                    p1 += e
        # a side that underflows to 0 gives +/-inf, which bcjr_block clamps to L_MAX
        app_a[k] = np.log(a0) - np.log(a1)
        app_b[k] = np.log(b0) - np.log(b1)
        app_p[k] = np.log(p0) - np.log(p1)

    return app_a, app_b, app_p, alpha[n].copy(), beta[0].copy()


def _as_llr_vector(name: str, values: np.ndarray) -> np.ndarray:
    vector = np.ascontiguousarray(values, dtype=np.float64)
    if vector.ndim != 1:
        raise LengthMismatchError(f"{name} must be one-dimensional, got shape {vector.shape}")
    if not np.all(np.isfinite(vector)):
        raise NonFiniteLlrError(f"{name} contains non-finite values")
    return vector


def _as_metric_vector(name: str, values: np.ndarray, num_states: int) -> np.ndarray:
    vector = np.ascontiguousarray(values, dtype=np.float64)
    if vector.shape != (num_states,):
        raise LengthMismatchError(f"{name} must have {num_states} entries, got shape {vector.shape}")
    if np.any(np.isnan(vector)) or np.any(vector == np.inf) or not np.any(np.isfinite(vector)):
        raise NonFiniteLlrError(f"{name} must be finite or -inf with at least one finite state")
    return vector


def bcjr_block(
    trellis: TrellisTable,
    in_a: np.ndarray,
    in_b: np.ndarray,
    in_p: np.ndarray,
    alpha_init: np.ndarray,
    beta_init: np.ndarray,
) -> BcjrResult:
    """Exact log-MAP forward-backward pass over one block

    in_a/in_b/in_p are total input LLRs (channel + prior) of the two input streams and the
    parity stream. alpha_init/beta_init are log-domain state distributions at the block edges.
    """
    in_a = _as_llr_vector("in_a", in_a)
    in_b = _as_llr_vector("in_b", in_b)
    in_p = _as_llr_vector("in_p", in_p)
    if not (in_a.shape == in_b.shape == in_p.shape):
        raise LengthMismatchError(
            f"LLR streams differ in length: {in_a.shape[0]}, {in_b.shape[0]}, {in_p.shape[0]}"
        )
    alpha_init = _as_metric_vector("alpha_init", alpha_init, trellis.num_states)
    beta_init = _as_metric_vector("beta_init", beta_init, trellis.num_states)

    app_a, app_b, app_p, alpha_out, beta_in = _forward_backward(
        trellis.next_state, trellis.parity, in_a, in_b, in_p, alpha_init, beta_init
    )

    ext_a = np.clip(app_a - in_a, -L_MAX, L_MAX)
    return BcjrResult(
        ext_a=ext_a,
        ext_b=np.clip(app_b - in_b, -L_MAX, L_MAX),
        ext_p=np.clip(app_p - in_p, -L_MAX, L_MAX),
        app_a=np.clip(in_a + ext_a, -L_MAX, L_MAX),
        alpha_out=alpha_out,
        beta_in=beta_in,
    )


def zero_state_metrics(num_states: int = NUM_STATES) -> np.ndarray:
    """Point mass on state 0 (chain start)"""
    metrics = np.full(num_states, NEG_INF)
    metrics[0] = 0.0
    return metrics


def uniform_metrics(num_states: int = NUM_STATES) -> np.ndarray:
    """Uniform log-domain state distribution"""
    return np.zeros(num_states)
