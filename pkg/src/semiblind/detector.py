"""Bit/symbol maps and per-subcarrier MIMO detection.

Detection is regularized zero-forcing followed by an axis-wise slicer: solve
(G^H G + eps I) x = G^H y with eps tied to the trace of G^H G, then round each
quadrature axis to the nearest constellation level. Sign ties round toward the
positive level (the one labeled bit 0), so the degenerate all-zero response
still yields a well-defined decision (flagged).
"""

from dataclasses import dataclass

import numpy as np

from .channel import ChannelTaps
from .ofdm import freq_response, freq_response_all

# Relative Tikhonov weight for the ZF solve; keeps near-singular estimated
# responses (early blind passes) from exploding without biasing good ones.
ZF_EPS = 1e-6


@dataclass(frozen=True)
class Modulation:
    name: str
    bits_per_symbol: int
    amp_re: float  # constellation level magnitude on the real axis
    amp_im: float  # ... on the imaginary axis (0 = axis unused)


BPSK = Modulation("bpsk", 1, 1.0, 0.0)
QPSK = Modulation("qpsk", 2, 1.0 / np.sqrt(2.0), 1.0 / np.sqrt(2.0))

_MODULATIONS = {m.name: m for m in (BPSK, QPSK)}


def get_modulation(name: str) -> Modulation:
    try:
        return _MODULATIONS[name.lower()]
    except KeyError:
        raise ValueError(f"unknown modulation {name!r}; choose from {sorted(_MODULATIONS)}") from None


def map_bits(bits: np.ndarray, mod: Modulation) -> np.ndarray:
    """Map a flat 0/1 array to unit-energy symbols; bit 0 -> positive level.

    QPSK consumes bits in (real, imag) pairs (Gray labeling: each axis carries
    one bit independently).
    """
    bits = np.asarray(bits)
    if bits.ndim != 1:
        raise ValueError(f"bits must be 1-D, got shape {bits.shape}")
    if bits.size % mod.bits_per_symbol:
        raise ValueError(f"bit count {bits.size} not divisible by {mod.bits_per_symbol}")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("bits must be 0 or 1")
    if mod.bits_per_symbol == 1:
        return (1.0 - 2.0 * bits) * mod.amp_re + 0j
    pairs = bits.reshape(-1, 2)
    return (1.0 - 2.0 * pairs[:, 0]) * mod.amp_re + 1j * (1.0 - 2.0 * pairs[:, 1]) * mod.amp_im


def demap(symbols: np.ndarray, mod: Modulation) -> np.ndarray:
    """Hard-decide symbols back to a flat bit array (inverse of map_bits on clean input)."""
    symbols = np.asarray(symbols, dtype=np.complex128).ravel()
    re_bits = (symbols.real < 0).astype(np.int64)  # exact zero -> bit 0
    if mod.bits_per_symbol == 1:
        return re_bits
    im_bits = (symbols.imag < 0).astype(np.int64)
    return np.stack([re_bits, im_bits], axis=1).ravel()


def slice_symbols(symbols: np.ndarray, mod: Modulation) -> np.ndarray:
    """Round each quadrature axis to its nearest constellation level (ties -> positive)."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    out = np.where(symbols.real < 0, -mod.amp_re, mod.amp_re).astype(np.complex128)
    if mod.amp_im > 0:
        out = out + 1j * np.where(symbols.imag < 0, -mod.amp_im, mod.amp_im)
    return out


@dataclass
class DetectResult:
    symbols: np.ndarray   # (n_tx,) sliced constellation points
    degenerate: bool      # response was identically zero; decision is arbitrary


def _zf_equalize(resp_all: np.ndarray, y_all: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batched regularized ZF: resp_all (L, n_rx, n_tx), y_all (L, n_rx) -> (x (L, n_tx), degenerate (L,))."""
    gh = resp_all.conj().transpose(0, 2, 1)
    gram = gh @ resp_all                         # (L, n_tx, n_tx)
    rhs = np.einsum("lij,lj->li", gh, y_all)     # G^H y
    n_tx = resp_all.shape[2]
    trace = np.einsum("lii->l", gram).real
    degenerate = trace <= 0.0
    eps = np.where(degenerate, 1.0, ZF_EPS * trace / n_tx)
    gram = gram + eps[:, None, None] * np.eye(n_tx)
    x = np.linalg.solve(gram, rhs[..., None])[..., 0]
    return x, degenerate


def hard_detect(taps: ChannelTaps, y: np.ndarray, l: int, n_subcarriers: int,
                mod: Modulation) -> DetectResult:
    """Detect the transmit vector of subcarrier l from receive vector y (n_rx,)."""
    y = np.asarray(y, dtype=np.complex128)
    if y.shape != (taps.n_rx,):
        raise ValueError(f"y must have shape ({taps.n_rx},), got {y.shape}")
    resp = freq_response(taps, l, n_subcarriers)
    x, degenerate = _zf_equalize(resp[None], y[None])
    return DetectResult(slice_symbols(x[0], mod), bool(degenerate[0]))


def detect_block(taps: ChannelTaps, y_all: np.ndarray, indices: np.ndarray,
                 n_subcarriers: int, mod: Modulation) -> tuple[np.ndarray, np.ndarray]:
    """Detect many subcarriers at once.

    y_all is (n_subcarriers, n_rx); indices selects the rows to detect.
    Returns (symbols (len(indices), n_tx), degenerate flags (len(indices),)).
    """
    y_all = np.asarray(y_all, dtype=np.complex128)
    indices = np.asarray(indices, dtype=np.int64)
    if y_all.shape != (n_subcarriers, taps.n_rx):
        raise ValueError(f"y_all must be ({n_subcarriers}, {taps.n_rx}), got {y_all.shape}")
    if indices.size == 0:
        return (np.zeros((0, taps.n_tx), dtype=np.complex128),
                np.zeros(0, dtype=bool))
    resp_all = freq_response_all(taps, n_subcarriers)[indices]
    x, degenerate = _zf_equalize(resp_all, y_all[indices])
    return slice_symbols(x, mod), degenerate
