"""Small complex linear-algebra layer and the DFT convention used by every other module.

All arrays are numpy complex128. The DFT is unitary (1/sqrt(N) on both the
forward and inverse kernels), so symbol energy is identical in the time and
frequency domains and no per-domain scaling appears anywhere else in the
package.
"""

import numpy as np

# Convenience aliases used in signatures throughout the package.
CVec = np.ndarray  # shape (n,), complex128
CMat = np.ndarray  # shape (m, n), complex128


def as_cvec(v) -> CVec:
    """Coerce to a 1-D complex128 array, rejecting anything that is not a vector."""
    out = np.asarray(v, dtype=np.complex128)
    if out.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {out.shape}")
    return out


def as_cmat(a) -> CMat:
    """Coerce to a 2-D complex128 array, rejecting anything that is not a matrix."""
    out = np.asarray(a, dtype=np.complex128)
    if out.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {out.shape}")
    return out


def dft(v: CVec, direction: str = "forward") -> CVec:
    """Unitary DFT of a vector.

    forward: X[k] = (1/sqrt(N)) sum_l x[l] exp(-2j pi k l / N)
    inverse: x[l] = (1/sqrt(N)) sum_k X[k] exp(+2j pi k l / N)
    """
    v = as_cvec(v)
    if v.size == 0:
        raise ValueError("dft of an empty vector is undefined")
    if direction == "forward":
        return np.fft.fft(v, norm="ortho")
    if direction == "inverse":
        return np.fft.ifft(v, norm="ortho")
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def matmul(a: CMat, b: np.ndarray) -> np.ndarray:
    """Matrix @ matrix or matrix @ vector with an explicit dimension check."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or b.ndim not in (1, 2):
        raise ValueError(f"matmul expects (2-D, 1-D or 2-D), got {a.ndim}-D and {b.ndim}-D")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} @ {b.shape}")
    return a @ b


def hermitian(a: CMat) -> CMat:
    """Conjugate transpose."""
    return as_cmat(a).conj().T


def frobenius_norm_sq(a: np.ndarray) -> float:
    """Sum of |entry|^2 over a matrix or vector."""
    a = np.asarray(a, dtype=np.complex128)
    return float(np.sum(a.real**2 + a.imag**2))


def axpy(alpha: complex, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """alpha * x + y for same-shaped arrays."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.shape != y.shape:
        raise ValueError(f"axpy shapes differ: {x.shape} vs {y.shape}")
    return alpha * x + y
