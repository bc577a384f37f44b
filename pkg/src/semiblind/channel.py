"""Frequency-selective Rayleigh MIMO channel: tap generation, AR(1) evolution, application.

The channel is a length-``n_paths`` FIR filter of matrices: tap p is an
(n_rx, n_tx) complex gain matrix H_p with average power following an
exponential delay profile, normalized so the profile sums to one. Receive
streams are the matrix convolution of the transmit streams with the taps
(zero initial history) plus circularly-symmetric AWGN.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class FadingParams:
    decay: float = 2.0        # e-folding constant of the exponential power-delay profile (in taps)
    doppler_rho: float = 1.0  # AR(1) correlation between consecutive frames; 1.0 = static

    def __post_init__(self):
        if self.decay <= 0:
            raise ValueError(f"decay must be positive, got {self.decay}")
        if not 0.0 <= self.doppler_rho <= 1.0:
            raise ValueError(f"doppler_rho must lie in [0, 1], got {self.doppler_rho}")


@dataclass
class ChannelTaps:
    """Stack of per-path gain matrices, shape (n_paths, n_rx, n_tx)."""

    taps: np.ndarray

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.complex128)
        if self.taps.ndim != 3:
            raise ValueError(f"taps must be (n_paths, n_rx, n_tx), got shape {self.taps.shape}")

    @property
    def n_paths(self) -> int:
        return self.taps.shape[0]

    @property
    def n_rx(self) -> int:
        return self.taps.shape[1]

    @property
    def n_tx(self) -> int:
        return self.taps.shape[2]

    def copy(self) -> "ChannelTaps":
        return ChannelTaps(self.taps.copy())


def power_profile(n_paths: int, decay: float) -> np.ndarray:
    """Exponential power-delay profile sigma_p^2 = exp(-p/decay), normalized to sum 1."""
    if n_paths < 1:
        raise ValueError(f"n_paths must be >= 1, got {n_paths}")
    if decay <= 0:
        raise ValueError(f"decay must be positive, got {decay}")
    prof = np.exp(-np.arange(n_paths) / decay)
    return prof / prof.sum()


def gen_taps(n_rx: int, n_tx: int, n_paths: int, params: FadingParams,
             rng: np.random.Generator) -> ChannelTaps:
    """Draw Rayleigh taps: entry (p, r, t) ~ CN(0, sigma_p^2), i.i.d. across antennas."""
    if n_rx < 1 or n_tx < 1:
        raise ValueError(f"antenna counts must be >= 1, got n_rx={n_rx}, n_tx={n_tx}")
    prof = power_profile(n_paths, params.decay)
    scale = np.sqrt(prof / 2.0)[:, None, None]
    shape = (n_paths, n_rx, n_tx)
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ChannelTaps(taps)


def evolve_taps(taps: ChannelTaps, params: FadingParams,
                rng: np.random.Generator) -> ChannelTaps:
    """One AR(1) step: H_p' = rho H_p + sqrt(1-rho^2) W_p with W_p ~ CN(0, sigma_p^2).

    Preserves the per-tap marginal distribution for every rho in [0, 1];
    rho = 1 returns an identical copy (the innovation draw still happens, so
    stream consumption does not depend on rho).
    """
    rho = params.doppler_rho
    prof = power_profile(taps.n_paths, params.decay)
    scale = np.sqrt(prof / 2.0)[:, None, None]
    innov = scale * (rng.standard_normal(taps.taps.shape) + 1j * rng.standard_normal(taps.taps.shape))
    return ChannelTaps(rho * taps.taps + np.sqrt(1.0 - rho**2) * innov)


def apply_channel(taps: ChannelTaps, tx: np.ndarray, noise_var: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Pass time-domain streams through the channel and add noise.

    Parameters
    ----------
    taps : ChannelTaps
    tx : array (n_tx, n_samples)
        One time-domain stream per transmit antenna.
    noise_var : float
        Per-entry variance of the circularly-symmetric Gaussian noise
        (E|z|^2 = noise_var, split evenly between quadratures). 0 disables noise.
    rng : np.random.Generator

    Returns
    -------
    array (n_rx, n_samples): r[k] = sum_p H_p s[k-p] + z[k], with s[k] = 0 for k < 0.
    """
    tx = np.asarray(tx, dtype=np.complex128)
    if tx.ndim != 2 or tx.shape[0] != taps.n_tx:
        raise ValueError(f"tx must be (n_tx={taps.n_tx}, n_samples), got shape {tx.shape}")
    if tx.shape[1] < taps.n_paths:
        raise ValueError(
            f"streams of {tx.shape[1]} samples are shorter than the {taps.n_paths}-tap channel")
    if noise_var < 0:
        raise ValueError(f"noise_var must be >= 0, got {noise_var}")
    n_samples = tx.shape[1]
    rx = np.zeros((taps.n_rx, n_samples), dtype=np.complex128)
    for p in range(taps.n_paths):
        seg = taps.taps[p] @ tx[:, : n_samples - p]
        rx[:, p:] += seg
    if noise_var > 0:
        scale = np.sqrt(noise_var / 2.0)
        rx += scale * (rng.standard_normal(rx.shape) + 1j * rng.standard_normal(rx.shape))
    return rx
