"""OFDM modulation/demodulation and the per-subcarrier channel response.

With the unitary DFT and a cyclic prefix at least as long as the channel
memory, the time-domain chain collapses per subcarrier to

    y_l = H(l) x_l + z_l,   H(l) = sum_p H_p exp(-2j pi p l / N)

which is the identity every estimator in this package relies on.
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTaps


@dataclass
class OfdmFrame:
    """One OFDM symbol worth of frequency-domain data.

    freq_symbols : (n_subcarriers, n_tx) complex
        Column t is the symbol sequence sent from transmit antenna t.
    cp_len : int
        Cyclic-prefix length in samples.
    training_len : int
        Subcarriers [0, training_len) carry symbols known to the receiver.
    """

    freq_symbols: np.ndarray
    cp_len: int
    training_len: int = 0

    def __post_init__(self):
        self.freq_symbols = np.asarray(self.freq_symbols, dtype=np.complex128)
        if self.freq_symbols.ndim != 2:
            raise ValueError(f"freq_symbols must be (n_subcarriers, n_tx), got shape {self.freq_symbols.shape}")
        if self.cp_len < 0:
            raise ValueError(f"cp_len must be >= 0, got {self.cp_len}")
        if not 0 <= self.training_len <= self.n_subcarriers:
            raise ValueError(
                f"training_len must lie in [0, {self.n_subcarriers}], got {self.training_len}")

    @property
    def n_subcarriers(self) -> int:
        return self.freq_symbols.shape[0]

    @property
    def n_tx(self) -> int:
        return self.freq_symbols.shape[1]


def modulate(frame: OfdmFrame) -> np.ndarray:
    """Unitary inverse DFT per antenna plus cyclic prefix.

    Returns (n_tx, cp_len + n_subcarriers) time-domain streams.
    """
    body = np.fft.ifft(frame.freq_symbols, axis=0, norm="ortho").T  # (n_tx, N)
    if frame.cp_len == 0:
        return body.copy()
    return np.concatenate([body[:, -frame.cp_len:], body], axis=1)


def demodulate(rx: np.ndarray, cp_len: int, n_subcarriers: int) -> np.ndarray:
    """Strip the cyclic prefix and apply the unitary forward DFT per antenna.

    rx is (n_rx, cp_len + n_subcarriers); returns (n_subcarriers, n_rx) so that
    row l is the receive vector y_l of subcarrier l.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    if rx.ndim != 2 or rx.shape[1] != cp_len + n_subcarriers:
        raise ValueError(
            f"rx must be (n_rx, {cp_len + n_subcarriers}), got shape {rx.shape}")
    body = rx[:, cp_len:]
    return np.fft.fft(body, axis=1, norm="ortho").T


def freq_response(taps: ChannelTaps, l: int, n_subcarriers: int) -> np.ndarray:
    """Combined response of subcarrier l: sum_p H_p exp(-2j pi p l / N), shape (n_rx, n_tx)."""
    if n_subcarriers < 1:
        raise ValueError(f"n_subcarriers must be >= 1, got {n_subcarriers}")
    phases = np.exp(-2j * np.pi * l * np.arange(taps.n_paths) / n_subcarriers)
    return np.tensordot(phases, taps.taps, axes=1)


def freq_response_all(taps: ChannelTaps, n_subcarriers: int) -> np.ndarray:
    """freq_response for every subcarrier at once, shape (n_subcarriers, n_rx, n_tx).

    The sum over taps is an (unnormalized) DFT along the path axis, so it is
    evaluated with a zero-padded FFT.
    """
    if n_subcarriers < taps.n_paths:
        # No zero-padding shortcut when paths alias; fall back to the direct sum.
        return np.stack([freq_response(taps, l, n_subcarriers) for l in range(n_subcarriers)])
    return np.fft.fft(taps.taps, n=n_subcarriers, axis=0)
