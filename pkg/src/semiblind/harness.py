"""Monte Carlo harness: scenario configuration, metric collection, CSV output, self checks.

A scenario runs n_trials independent channel/bit/noise realizations of an
n_frames-long transmission and scores one estimation mode on normalized
channel MSE and BER after each estimation stage ("pass" 0 is the state right
after training / the one-shot fit; passes 1..K follow the blind sweeps).
Trial t always draws from child t of the seed's SeedSequence, so realizations
are identical across modes and estimator settings — mode comparisons are
paired by construction.
"""

import time
import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import estimator
from .channel import ChannelTaps, FadingParams, apply_channel, gen_taps, evolve_taps
from .detector import detect_block, demap, get_modulation, map_bits
from .estimator import BlindMode, init_state, ls_estimate, run_frame
from .numerics import dft, frobenius_norm_sq
from .ofdm import OfdmFrame, demodulate, freq_response, modulate

MODES = ("dd", "aba", "full-training", "training-only", "ls", "perfect-csi")

# Modes whose estimate comes from the LMS loop (as opposed to LS / genie CSI).
_LMS_MODES = ("dd", "aba", "full-training", "training-only")


class ConfigError(ValueError):
    """A SimConfig field (or combination) is invalid."""


@dataclass
class SimConfig:
    n_tx: int = 2
    n_rx: int = 4
    n_subcarriers: int = 512
    cp_len: int = 16
    n_paths: int = 8
    decay: float = 2.0            # exponential power-delay profile constant
    doppler_rho: float = 1.0      # AR(1) tap correlation frame-to-frame; 1.0 = static
    training_len: int = 128       # known subcarriers at the start of frame 0
    modulation: str = "bpsk"
    ebn0_db: object = 10.0        # float, or sequence of floats for sweeps
    mode: object = "dd"           # mode name, or sequence of names for sweeps
    n_blind_passes: int = 3
    mu_train: float | None = None   # default: 1 / (2 * n_paths * n_tx)
    mu_blind: float | None = None   # default: mu_train / 2
    anneal_factor: float = 0.15
    mu_alpha: float = 1e-4
    mu_beta: float = 1e-4
    n_frames: int = 1
    n_trials: int = 100
    seed: int = 0
    noise_var: float | None = None  # overrides the Eb/N0-derived noise variance when set

    def mode_list(self) -> tuple:
        return (self.mode,) if isinstance(self.mode, str) else tuple(self.mode)

    def ebn0_list(self) -> tuple:
        if isinstance(self.ebn0_db, (int, float)):
            return (float(self.ebn0_db),)
        return tuple(float(v) for v in self.ebn0_db)

    def validate(self) -> "SimConfig":
        """Check every field and return a copy with defaulted step sizes filled in."""
        for name in ("n_tx", "n_rx", "n_subcarriers", "n_paths", "n_frames", "n_trials"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.cp_len < 0:
            raise ConfigError(f"cp_len must be >= 0, got {self.cp_len}")
        if self.cp_len < self.n_paths - 1:
            # The per-subcarrier model needs cp_len >= n_paths-1; simulating the
            # violation is allowed (it shows up as ISI), but never silently.
            warnings.warn(
                f"cp_len={self.cp_len} is shorter than the channel memory "
                f"{self.n_paths - 1}; the per-subcarrier model will not hold",
                stacklevel=2)
        if not 0 <= self.training_len <= self.n_subcarriers:
            raise ConfigError(
                f"training_len must lie in [0, {self.n_subcarriers}], got {self.training_len}")
        if self.decay <= 0:
            raise ConfigError(f"decay must be positive, got {self.decay}")
        if not 0.0 <= self.doppler_rho <= 1.0:
            raise ConfigError(f"doppler_rho must lie in [0, 1], got {self.doppler_rho}")
        get_modulation(self.modulation)  # raises on unknown name
        for m in self.mode_list():
            if m not in MODES:
                raise ConfigError(f"unknown mode {m!r}; choose from {MODES}")
            if m == "ls" and self.training_len < 1:
                raise ConfigError("mode 'ls' needs training_len >= 1 to fit anything")
        if not self.ebn0_list() and self.noise_var is None:
            raise ConfigError("ebn0_db must contain at least one value")
        if self.n_blind_passes < 0:
            raise ConfigError(f"n_blind_passes must be >= 0, got {self.n_blind_passes}")
        mu_train = self.mu_train if self.mu_train is not None else 1.0 / (2 * self.n_paths * self.n_tx)
        mu_blind = self.mu_blind if self.mu_blind is not None else mu_train / 2.0
        if mu_train <= 0:
            raise ConfigError(f"mu_train must be positive, got {mu_train}")
        if not 0 < mu_blind <= mu_train:
            raise ConfigError(f"mu_blind must lie in (0, mu_train={mu_train}], got {mu_blind}")
        if not 0 < self.anneal_factor <= 1:
            raise ConfigError(f"anneal_factor must lie in (0, 1], got {self.anneal_factor}")
        if self.mu_alpha < 0 or self.mu_beta < 0:
            raise ConfigError("mu_alpha and mu_beta must be >= 0")
        if self.noise_var is not None and self.noise_var < 0:
            raise ConfigError(f"noise_var must be >= 0, got {self.noise_var}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        return replace(self, mu_train=mu_train, mu_blind=mu_blind)

    def resolve_noise_var(self, ebn0_db: float, bits_per_symbol: int) -> float:
        """Per-entry complex noise variance for Es = 1 per transmit antenna."""
        if self.noise_var is not None:
            return float(self.noise_var)
        return 10.0 ** (-ebn0_db / 10.0) / bits_per_symbol


@dataclass
class MetricsRecord:
    """Per-trial metric arrays, indexed [frame, pass]."""

    mode: str
    n_tx: int
    n_rx: int
    ebn0_db: float
    trial: int
    channel_mse: np.ndarray  # (n_frames, n_passes+1) float
    bit_errors: np.ndarray   # (n_frames, n_passes+1) int
    bits_total: np.ndarray   # (n_frames, n_passes+1) int
    cold_start: bool = False
    ls_rank_deficient: bool = False


@dataclass
class AggregateRow:
    """One (mode, Eb/N0, frame, pass) cell aggregated over trials."""

    mode: str
    n_tx: int
    n_rx: int
    ebn0_db: float
    frame: int
    pass_idx: int
    channel_mse: float   # mean over trials
    mse_stderr: float    # standard error of that mean
    ber: float           # pooled bit errors / pooled bits
    ber_stderr: float    # standard error of the per-trial BER mean
    bits_total: int
    trials: int


def channel_mse(true_taps: ChannelTaps, est_taps: ChannelTaps) -> float:
    """Normalized estimation error: sum_p ||H_p - Hhat_p||_F^2 / sum_p ||H_p||_F^2."""
    if true_taps.taps.shape != est_taps.taps.shape:
        raise ValueError(
            f"tap shapes differ: {true_taps.taps.shape} vs {est_taps.taps.shape}")
    denom = frobenius_norm_sq(true_taps.taps)
    if denom == 0.0:
        raise ValueError("true taps are identically zero; normalized MSE is undefined")
    return frobenius_norm_sq(est_taps.taps - true_taps.taps) / denom


def _mode_passes(mode: str, cfg: SimConfig) -> int:
    # full-training runs the same refinement passes as dd/aba, fed by the true
    # symbols instead of decisions — the perfect-decision control.
    return cfg.n_blind_passes if mode in ("dd", "aba", "full-training") else 0


def _known_len(mode: str, cfg: SimConfig, frame_idx: int) -> int:
    """How many leading subcarriers are swept with training-mode updates this frame."""
    return cfg.training_len if frame_idx == 0 else 0


def _run_trial(cfg: SimConfig, trial: int, rng: np.random.Generator) -> MetricsRecord:
    mode = cfg.mode
    mod = get_modulation(cfg.modulation)
    params = FadingParams(decay=cfg.decay, doppler_rho=cfg.doppler_rho)
    n_c = cfg.n_subcarriers
    noise_var = cfg.resolve_noise_var(float(cfg.ebn0_db), mod.bits_per_symbol)
    n_cols = _mode_passes(mode, cfg) + 1

    mse = np.zeros((cfg.n_frames, n_cols))
    bit_errors = np.zeros((cfg.n_frames, n_cols), dtype=np.int64)
    bits_total = np.zeros((cfg.n_frames, n_cols), dtype=np.int64)
    cold_start = False
    rank_deficient = False

    taps_true = gen_taps(cfg.n_rx, cfg.n_tx, cfg.n_paths, params, rng)
    state = None
    frozen_ls = None
    if mode in _LMS_MODES:
        state = init_state(cfg.n_rx, cfg.n_tx, cfg.n_paths, cfg.mu_train,
                           cfg.mu_blind, cfg.anneal_factor)
    if mode in ("dd", "aba"):
        blind = BlindMode(mode, cfg.mu_alpha, cfg.mu_beta)
    elif mode == "full-training":
        blind = BlindMode("genie")
    else:
        blind = None

    for f in range(cfg.n_frames):
        if f > 0:
            taps_true = evolve_taps(taps_true, params, rng)
        bits = rng.integers(0, 2, size=n_c * cfg.n_tx * mod.bits_per_symbol)
        syms = map_bits(bits, mod).reshape(n_c, cfg.n_tx)
        known = _known_len(mode, cfg, f)
        frame = OfdmFrame(syms, cfg.cp_len, training_len=known)
        rx = apply_channel(taps_true, modulate(frame), noise_var, rng)
        y_all = demodulate(rx, cfg.cp_len, n_c)

        if mode == "perfect-csi":
            snapshots = [taps_true.copy()]
        elif mode == "ls":
            if f == 0:
                fit = ls_estimate(syms[:known], y_all[:known], np.arange(known),
                                  cfg.n_paths, n_c)
                frozen_ls = fit.taps
                rank_deficient = fit.rank_deficient
            snapshots = [frozen_ls]
        else:
            fr = run_frame(state, frame, y_all, blind, _mode_passes(mode, cfg), mod)
            snapshots = fr.tap_history
            cold_start = cold_start or fr.cold_start

        # BER region is mode-independent so curves are comparable: frame 0
        # scores the subcarriers beyond the configured training prefix, later
        # frames score everything.
        data_start = cfg.training_len if f == 0 else 0
        data_idx = np.arange(data_start, n_c)
        bits_frame = bits.reshape(n_c, cfg.n_tx, mod.bits_per_symbol)
        tx_bits = bits_frame[data_start:].ravel()
        for c, snap in enumerate(snapshots):
            mse[f, c] = channel_mse(taps_true, snap)
            if data_idx.size:
                det_syms, _ = detect_block(snap, y_all, data_idx, n_c, mod)
                bit_errors[f, c] = int(np.count_nonzero(demap(det_syms, mod) != tx_bits))
                bits_total[f, c] = tx_bits.size

    return MetricsRecord(mode, cfg.n_tx, cfg.n_rx, float(cfg.ebn0_db), trial,
                         mse, bit_errors, bits_total, cold_start, rank_deficient)


def run_scenario(config: SimConfig) -> list:
    """Run every trial of a single-mode, single-Eb/N0 scenario."""
    cfg = config.validate()
    if not isinstance(cfg.mode, str) or len(cfg.ebn0_list()) != 1:
        raise ConfigError("run_scenario takes a single mode and Eb/N0 point; use run_sweep")
    cfg = replace(cfg, ebn0_db=cfg.ebn0_list()[0])
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.n_trials)
    return [_run_trial(cfg, t, np.random.default_rng(children[t]))
            for t in range(cfg.n_trials)]


def _stderr(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def aggregate(records: list) -> list:
    """Collapse per-trial records into AggregateRows, grouped in encounter order."""
    groups: dict = {}
    for r in records:
        groups.setdefault((r.mode, r.n_tx, r.n_rx, r.ebn0_db), []).append(r)
    rows = []
    for (mode, n_tx, n_rx, ebn0), recs in groups.items():
        shape = recs[0].channel_mse.shape
        if any(r.channel_mse.shape != shape for r in recs):
            raise ValueError("records in one group disagree on (frame, pass) shape")
        n_trials = len(recs)
        mse = np.stack([r.channel_mse for r in recs])        # (T, F, C)
        errs = np.stack([r.bit_errors for r in recs])
        bits = np.stack([r.bits_total for r in recs])
        for f in range(shape[0]):
            for c in range(shape[1]):
                total_bits = int(bits[:, f, c].sum())
                total_errs = int(errs[:, f, c].sum())
                per_trial_ber = np.where(bits[:, f, c] > 0, errs[:, f, c] / np.maximum(bits[:, f, c], 1), 0.0)
                rows.append(AggregateRow(
                    mode=mode, n_tx=n_tx, n_rx=n_rx, ebn0_db=ebn0, frame=f, pass_idx=c,
                    channel_mse=float(mse[:, f, c].mean()),
                    mse_stderr=_stderr(mse[:, f, c]),
                    ber=total_errs / total_bits if total_bits else 0.0,
                    ber_stderr=_stderr(per_trial_ber),
                    bits_total=total_bits, trials=n_trials))
    return rows


def run_sweep(config: SimConfig) -> list:
    """Run every (mode, Eb/N0) combination of the config and aggregate each."""
    cfg = config.validate()
    rows = []
    for mode in cfg.mode_list():
        for ebn0 in cfg.ebn0_list():
            sub = replace(cfg, mode=mode, ebn0_db=float(ebn0))
            rows.extend(aggregate(run_scenario(sub)))
    return rows


CSV_HEADER = "mode,n_tx,n_rx,ebn0_db,frame,pass,channel_mse,ber,bits_total,trials"


def csv_text(rows: list) -> str:
    """Deterministic CSV rendering of aggregate rows (floats at 9 significant digits)."""
    def g(v: float) -> str:
        return format(float(v), ".9g")

    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.mode, str(r.n_tx), str(r.n_rx), g(r.ebn0_db), str(r.frame),
            str(r.pass_idx), g(r.channel_mse), g(r.ber), str(r.bits_total),
            str(r.trials)]))
    return "\n".join(lines) + "\n"


def write_csv(rows: list, path) -> None:
    with open(path, "w") as fh:
        fh.write(csv_text(rows))


# --------------------------------------------------------------------------
# Self checks: independent oracles for the numerical identities the whole
# simulator rests on. Each check reports its worst relative error.
# --------------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_error < self.tolerance


@dataclass
class CheckReport:
    checks: list
    runtime_s: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _check_dft_roundtrip(rng) -> float:
    worst = 0.0
    for n in (1, 2, 7, 64, 1024):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        rt = dft(dft(v, "forward"), "inverse")
        worst = max(worst, np.linalg.norm(rt - v) / np.linalg.norm(v))
        rt = dft(dft(v, "inverse"), "forward")
        worst = max(worst, np.linalg.norm(rt - v) / np.linalg.norm(v))
    return float(worst)


def _check_dft_direct(rng) -> float:
    worst = 0.0
    for n in (2, 3, 8, 16):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        direct = np.array([
            sum(v[l] * np.exp(-2j * np.pi * k * l / n) for l in range(n))
            for k in range(n)]) / np.sqrt(n)
        worst = max(worst, np.linalg.norm(dft(v) - direct) / np.linalg.norm(direct))
    return float(worst)


def _check_convolution(rng) -> float:
    n_paths, n_rx, n_tx, n_samples = 3, 2, 2, 12
    prm = FadingParams()
    taps = gen_taps(n_rx, n_tx, n_paths, prm, rng)
    tx = rng.standard_normal((n_tx, n_samples)) + 1j * rng.standard_normal((n_tx, n_samples))
    got = apply_channel(taps, tx, 0.0, rng)
    want = np.zeros((n_rx, n_samples), dtype=np.complex128)
    for k in range(n_samples):
        for p in range(n_paths):
            if k - p >= 0:
                want[:, k] += taps.taps[p] @ tx[:, k - p]
    return float(np.linalg.norm(got - want) / np.linalg.norm(want))


def end_to_end_error(rng, kernel_sign: float = -1.0) -> float:
    """Worst per-subcarrier mismatch between the time-domain chain and H(l) x_l.

    kernel_sign is the sign of the exponent in the combined response
    sum_p H_p exp(sign * 2j pi p l / N); the chain only matches with -1, and
    flipping the sign must blow this error up (checked by a test).
    """
    n_paths, n_rx, n_tx, n_c, cp = 4, 3, 2, 16, 8
    taps = gen_taps(n_rx, n_tx, n_paths, FadingParams(), rng)
    syms = (rng.standard_normal((n_c, n_tx)) + 1j * rng.standard_normal((n_c, n_tx))) / np.sqrt(2)
    frame = OfdmFrame(syms, cp_len=cp)
    y_all = demodulate(apply_channel(taps, modulate(frame), 0.0, rng), cp, n_c)
    worst = 0.0
    for l in range(n_c):
        phases = np.exp(kernel_sign * 2j * np.pi * l * np.arange(n_paths) / n_c)
        resp = np.tensordot(phases, taps.taps, axes=1)
        ref = resp @ syms[l]
        worst = max(worst, float(np.linalg.norm(y_all[l] - ref) / max(np.linalg.norm(ref), 1e-30)))
    return worst


def _check_gradient(rng) -> float:
    """Finite-difference check that the training update is -grad of the cost."""
    n_paths, n_rx, n_tx, n_c, l = 3, 2, 2, 8, 5
    state = init_state(n_rx, n_tx, n_paths, mu_train=1.0)
    state.est_taps.taps += (rng.standard_normal(state.est_taps.taps.shape)
                            + 1j * rng.standard_normal(state.est_taps.taps.shape))
    x = rng.standard_normal(n_tx) + 1j * rng.standard_normal(n_tx)
    y = rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx)

    base = state.est_taps.taps.copy()
    estimator.lms_train_update(state, x, y, l, n_c, mu=1.0)
    update = state.est_taps.taps - base

    delta = 1e-6
    fd = np.zeros_like(base)
    for m in range(n_paths):
        for i in range(n_rx):
            for j in range(n_tx):
                for axis, unit in ((0, 1.0), (1, 1j)):
                    pert = base.copy()
                    pert[m, i, j] += delta * unit
                    state.est_taps.taps = pert
                    c_plus = estimator.instantaneous_cost(state, x, y, l, n_c)
                    pert = base.copy()
                    pert[m, i, j] -= delta * unit
                    state.est_taps.taps = pert
                    c_minus = estimator.instantaneous_cost(state, x, y, l, n_c)
                    d = (c_plus - c_minus) / (2 * delta)
                    fd[m, i, j] += d if axis == 0 else 1j * d
    state.est_taps.taps = base
    # update should equal -(d/dRe + j d/dIm)/2, the Wirtinger conjugate gradient
    target = -fd / 2.0
    return float(np.linalg.norm(update - target) / np.linalg.norm(target))


def _check_ls_recovery(rng) -> float:
    n_paths, n_rx, n_tx, n_c = 4, 3, 2, 32
    taps = gen_taps(n_rx, n_tx, n_paths, FadingParams(), rng)
    phase = rng.uniform(0, 2 * np.pi, size=(n_c, n_tx))
    syms = np.exp(1j * phase)
    y_all = np.stack([freq_response(taps, l, n_c) @ syms[l] for l in range(n_c)])
    fit = ls_estimate(syms, y_all, np.arange(n_c), n_paths, n_c)
    return channel_mse(taps, fit.taps)


def self_check(seed: int = 0) -> CheckReport:
    """Run every oracle check against its tolerance."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    checks = [
        CheckResult("dft-roundtrip", _check_dft_roundtrip(rng), 1e-12),
        CheckResult("dft-direct-sum", _check_dft_direct(rng), 1e-12),
        CheckResult("channel-convolution", _check_convolution(rng), 1e-12),
        CheckResult("end-to-end-subcarrier", end_to_end_error(rng), 1e-10),
        CheckResult("lms-gradient-fd", _check_gradient(rng), 1e-4),
        CheckResult("ls-recovery", _check_ls_recovery(rng), 1e-8),
    ]
    return CheckReport(checks, time.perf_counter() - t0)
