"""LMS estimation of per-path channel matrices, with blind refinement.

Training sweep (known symbols x_l):

    e_l = y_l - sum_p Hhat_p exp(-2j pi p l / N) x_l
    Hhat_m += mu_train * e_l x_l^H exp(+2j pi m l / N)

which is exact steepest descent on the instantaneous cost |e_l|^2 with
respect to each tap matrix. Blind refinement replaces x_l with g(x_soft),
where x_soft is an interference-cancelling matched-filter estimate of the
transmit vector and g is either a per-axis slicer (decision-directed) or an
adaptive alpha*tanh(beta*.) soft limiter whose gain and slope follow their
own stochastic-gradient updates. Several blind passes are made over the data
region with a geometrically annealed step size.
"""

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelTaps
from .detector import Modulation, hard_detect
from .numerics import frobenius_norm_sq
from .ofdm import OfdmFrame, freq_response

# Positivity floor for the adaptive nonlinearity's gain and slope.
AB_FLOOR = 1e-6


@dataclass(frozen=True)
class BlindMode:
    """What feeds the virtual-training input of the refinement passes.

    "dd"    : per-axis slicer of the soft estimate (decision-directed)
    "aba"   : adaptive alpha*tanh(beta*.) of the soft estimate
    "genie" : the true transmitted symbol — the perfect-decision control the
              blind variants are measured against (same passes, same steps)
    """

    variant: str
    mu_alpha: float = 1e-4
    mu_beta: float = 1e-4

    def __post_init__(self):
        if self.variant not in ("dd", "aba", "genie"):
            raise ValueError(f"variant must be 'dd', 'aba' or 'genie', got {self.variant!r}")
        if self.mu_alpha < 0 or self.mu_beta < 0:
            raise ValueError("mu_alpha and mu_beta must be >= 0")


@dataclass
class EstimatorState:
    est_taps: ChannelTaps
    mu_train: float
    mu_blind: float
    anneal_factor: float = 0.15
    alpha: float = 1.0     # adaptive nonlinearity gain
    beta: float = 1.0      # adaptive nonlinearity slope
    pass_index: int = 0    # completed blind passes, cumulative over frames

    def __post_init__(self):
        if self.mu_train <= 0:
            raise ValueError(f"mu_train must be positive, got {self.mu_train}")
        if not 0 < self.mu_blind <= self.mu_train:
            raise ValueError(
                f"mu_blind must lie in (0, mu_train={self.mu_train}], got {self.mu_blind}")
        if not 0 < self.anneal_factor <= 1:
            raise ValueError(f"anneal_factor must lie in (0, 1], got {self.anneal_factor}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


def init_state(n_rx: int, n_tx: int, n_paths: int, mu_train: float,
               mu_blind: float | None = None, anneal_factor: float = 0.15) -> EstimatorState:
    """Fresh state: zero tap estimates, unit nonlinearity gain and slope."""
    taps = ChannelTaps(np.zeros((n_paths, n_rx, n_tx), dtype=np.complex128))
    if mu_blind is None:
        mu_blind = mu_train / 2.0
    return EstimatorState(taps, mu_train, mu_blind, anneal_factor)


def instantaneous_cost(state: EstimatorState, x: np.ndarray, y: np.ndarray,
                       l: int, n_subcarriers: int) -> float:
    """Squared residual |y - H(l) x|^2 under the current tap estimates."""
    resp = freq_response(state.est_taps, l, n_subcarriers)
    return frobenius_norm_sq(np.asarray(y, dtype=np.complex128) - resp @ x)


def lms_train_update(state: EstimatorState, x: np.ndarray, y: np.ndarray,
                     l: int, n_subcarriers: int, mu: float | None = None) -> EstimatorState:
    """One training-mode LMS step on all tap matrices; mutates state in place."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    taps = state.est_taps
    if x.shape != (taps.n_tx,):
        raise ValueError(f"x must have shape ({taps.n_tx},), got {x.shape}")
    if y.shape != (taps.n_rx,):
        raise ValueError(f"y must have shape ({taps.n_rx},), got {y.shape}")
    if mu is None:
        mu = state.mu_train
    err = y - freq_response(taps, l, n_subcarriers) @ x
    # Per-tap correction: the conjugate phase undoes each tap's rotation in the residual.
    phases = np.exp(2j * np.pi * l * np.arange(taps.n_paths) / n_subcarriers)
    taps.taps += mu * phases[:, None, None] * np.outer(err, x.conj())[None, :, :]
    return state


def lms_blind_update(state: EstimatorState, y: np.ndarray, g_val: np.ndarray,
                     l: int, n_subcarriers: int, mu: float | None = None) -> EstimatorState:
    """Blind-mode LMS step: the nonlinearity output g_val plays the role of the training symbol."""
    if mu is None:
        mu = state.mu_blind
    return lms_train_update(state, g_val, y, l, n_subcarriers, mu=mu)


def interference_matrix(state: EstimatorState, l: int, n_subcarriers: int) -> np.ndarray:
    """Cross-antenna coupling under the current estimate: G^H G with the diagonal zeroed."""
    resp = freq_response(state.est_taps, l, n_subcarriers)
    f = resp.conj().T @ resp
    np.fill_diagonal(f, 0.0)
    return f


def soft_estimate(state: EstimatorState, y: np.ndarray, x_hat: np.ndarray,
                  l: int, n_subcarriers: int) -> np.ndarray:
    """Matched-filter estimate of the transmit vector with hard-decision interference cancelled.

    x_soft = G^H y - F x_hat, where F is interference_matrix(l).
    """
    y = np.asarray(y, dtype=np.complex128)
    x_hat = np.asarray(x_hat, dtype=np.complex128)
    resp = freq_response(state.est_taps, l, n_subcarriers)
    if y.shape != (resp.shape[0],):
        raise ValueError(f"y must have shape ({resp.shape[0]},), got {y.shape}")
    if x_hat.shape != (resp.shape[1],):
        raise ValueError(f"x_hat must have shape ({resp.shape[1]},), got {x_hat.shape}")
    f = resp.conj().T @ resp
    np.fill_diagonal(f, 0.0)
    return resp.conj().T @ y - f @ x_hat


def nonlinearity_g(x_soft: np.ndarray, mode: BlindMode, alpha: float, beta: float,
                   mod: Modulation) -> np.ndarray:
    """Virtual training symbol from the soft estimate, applied per quadrature axis.

    dd  : constellation-amplitude signum on each active axis (sign(0) = 0).
    aba : alpha * tanh(beta * .) on each active axis.

    An axis the scheme does not use (BPSK's imaginary axis) is zeroed in both
    variants, so the large-slope limit of "aba" coincides with "dd".
    """
    x_soft = np.asarray(x_soft, dtype=np.complex128)
    if mode.variant == "dd":
        out = mod.amp_re * np.sign(x_soft.real).astype(np.complex128)
        if mod.amp_im > 0:
            out = out + 1j * mod.amp_im * np.sign(x_soft.imag)
        return out
    out = alpha * np.tanh(beta * x_soft.real).astype(np.complex128)
    if mod.amp_im > 0:
        out = out + 1j * alpha * np.tanh(beta * x_soft.imag)
    return out


def _sech2(v: np.ndarray) -> np.ndarray:
    # 1/cosh^2 without overflow for large arguments (cosh overflows near 710).
    out = np.zeros_like(v, dtype=np.float64)
    small = np.abs(v) < 350.0
    out[small] = 1.0 / np.cosh(v[small]) ** 2
    return out


def _axes(x_soft) -> np.ndarray:
    x_soft = np.atleast_1d(np.asarray(x_soft, dtype=np.complex128))
    return np.concatenate([x_soft.real, x_soft.imag])


def update_alpha(alpha: float, beta: float, x_soft: np.ndarray, mu_alpha: float) -> float:
    """Sign-of-gradient step on the nonlinearity gain.

    alpha' = alpha + mu_alpha * sign( sum_axes tanh(beta v) (v - alpha tanh(beta v)) )
    with the sum over the real and imaginary parts of every entry of x_soft.
    """
    v = _axes(x_soft)
    t = np.tanh(beta * v)
    s = float(np.sum(t * (v - alpha * t)))
    return alpha + mu_alpha * float(np.sign(s))


def update_beta(alpha: float, beta: float, x_soft: np.ndarray, mu_beta: float) -> float:
    """Stochastic-gradient step on the nonlinearity slope.

    beta' = beta + mu_beta * alpha * sum_axes v sech^2(beta v) (v - alpha tanh(beta v))
    """
    v = _axes(x_soft)
    t = np.tanh(beta * v)
    s = float(np.sum(v * _sech2(beta * v) * (v - alpha * t)))
    return beta + mu_beta * alpha * s


@dataclass
class FrameRun:
    """Everything run_frame produced beyond the mutated state itself."""

    state: EstimatorState
    tap_history: list      # ChannelTaps snapshots: [post-training, after pass 1, ...]
    mu_schedule: list = field(default_factory=list)  # blind step size used in each pass
    cold_start: bool = False  # started blind from all-zero taps (no training anywhere yet)


def run_frame(state: EstimatorState, frame: OfdmFrame, y_all: np.ndarray,
              mode: BlindMode | None, n_blind_passes: int,
              mod: Modulation) -> FrameRun:
    """Process one frame: training sweep over the known prefix, then blind passes.

    y_all is the demodulated receive matrix (n_subcarriers, n_rx). Subcarriers
    [0, frame.training_len) are swept with training updates; with a BlindMode,
    n_blind_passes sweeps over the remaining region follow, each detecting,
    soft-estimating and updating sequentially per subcarrier. The blind step
    size for pass k (counted within this frame) is mu_blind * anneal_factor^k.
    """
    n_c = frame.n_subcarriers
    taps = state.est_taps
    y_all = np.asarray(y_all, dtype=np.complex128)
    if y_all.shape != (n_c, taps.n_rx):
        raise ValueError(f"y_all must be ({n_c}, {taps.n_rx}), got {y_all.shape}")
    if frame.n_tx != taps.n_tx:
        raise ValueError(f"frame has {frame.n_tx} tx antennas, state expects {taps.n_tx}")
    if n_blind_passes < 0:
        raise ValueError(f"n_blind_passes must be >= 0, got {n_blind_passes}")

    cold_start = frame.training_len == 0 and not np.any(taps.taps)

    for l in range(frame.training_len):
        lms_train_update(state, frame.freq_symbols[l], y_all[l], l, n_c)

    history = [taps.copy()]
    mu_schedule = []
    if mode is not None:
        for k in range(n_blind_passes):
            mu = state.mu_blind * state.anneal_factor**k
            mu_schedule.append(mu)
            for l in range(frame.training_len, n_c):
                if mode.variant == "genie":
                    g_val = frame.freq_symbols[l]
                else:
                    det = hard_detect(taps, y_all[l], l, n_c, mod)
                    x_soft = soft_estimate(state, y_all[l], det.symbols, l, n_c)
                    g_val = nonlinearity_g(x_soft, mode, state.alpha, state.beta, mod)
                lms_blind_update(state, y_all[l], g_val, l, n_c, mu=mu)
                if mode.variant == "aba":
                    # Both updates read the same-iteration (alpha, beta) pair.
                    new_alpha = update_alpha(state.alpha, state.beta, x_soft, mode.mu_alpha)
                    new_beta = update_beta(state.alpha, state.beta, x_soft, mode.mu_beta)
                    state.alpha = max(new_alpha, AB_FLOOR)
                    state.beta = max(new_beta, AB_FLOOR)
            state.pass_index += 1
            history.append(taps.copy())
    return FrameRun(state, history, mu_schedule, cold_start)


@dataclass
class LsEstimate:
    taps: ChannelTaps
    rank: int
    rank_deficient: bool  # fewer independent equations than unknowns per receive antenna


def ls_estimate(training_x: np.ndarray, training_y: np.ndarray, indices: np.ndarray,
                n_paths: int, n_subcarriers: int) -> LsEstimate:
    """One-shot least-squares tap fit from known symbols on a set of subcarriers.

    training_x (T, n_tx) and training_y (T, n_rx) are the transmitted symbol
    vectors and receive vectors on subcarriers `indices` (length T). Each
    receive antenna gives the linear system A h = y with
    A[t, p*n_tx + m] = exp(-2j pi p indices[t] / N) x_t[m]; the minimum-norm
    solution is taken, and the fit is flagged rank-deficient when the numerical
    rank of A falls short of n_paths * n_tx unknowns.
    """
    training_x = np.asarray(training_x, dtype=np.complex128)
    training_y = np.asarray(training_y, dtype=np.complex128)
    indices = np.asarray(indices, dtype=np.int64)
    if indices.ndim != 1 or indices.size == 0:
        raise ValueError("indices must be a non-empty 1-D index array")
    if np.any(indices < 0) or np.any(indices >= n_subcarriers):
        raise ValueError(f"indices must lie in [0, {n_subcarriers})")
    if training_x.ndim != 2 or training_x.shape[0] != indices.size:
        raise ValueError(f"training_x must be ({indices.size}, n_tx), got {training_x.shape}")
    if training_y.ndim != 2 or training_y.shape[0] != indices.size:
        raise ValueError(f"training_y must be ({indices.size}, n_rx), got {training_y.shape}")
    n_tx = training_x.shape[1]
    n_rx = training_y.shape[1]
    phases = np.exp(-2j * np.pi * np.outer(indices, np.arange(n_paths)) / n_subcarriers)
    a = (phases[:, :, None] * training_x[:, None, :]).reshape(indices.size, n_paths * n_tx)
    sol, _, rank, _ = np.linalg.lstsq(a, training_y, rcond=None)
    taps = sol.reshape(n_paths, n_tx, n_rx).transpose(0, 2, 1)
    return LsEstimate(ChannelTaps(taps), int(rank), int(rank) < n_paths * n_tx)
