"""DFT, block STFT, LPFT and the block-DFT operators linking them.

Forward transforms are unnormalized; inverses carry the 1/N factor.
Windows are rectangular, non-overlapping, hop = window width M, so the
stacked STFT of a length-N record is ``kron(I_{N/M}, F_M) @ y``.

Stacking is window-major: the TF value of window ``b`` at bin ``k`` sits
at index ``b*M + k`` of the stacked vector.
"""

from dataclasses import dataclass

import numpy as np

from chirpsep.errors import DomainError


@dataclass(frozen=True)
class TFMatrix:
    """Block time-frequency matrix, ``values[k, b]`` = bin k of window b."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[0] == 0 or values.shape[1] == 0:
            raise DomainError(f"TF values must be a non-empty 2-D array, got {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def window(self) -> int:
        return self.values.shape[0]

    @property
    def n_windows(self) -> int:
        return self.values.shape[1]

    @property
    def n_total(self) -> int:
        return self.values.size

    def stacked(self) -> np.ndarray:
        """Window-major column stacking (all bins of window 0, then window 1, ...)."""
        return self.values.T.reshape(-1)

    @classmethod
    def from_stacked(cls, vec, window):
        vec = np.asarray(vec, dtype=complex)
        _check_divides(vec.size, window)
        return cls(vec.reshape(-1, window).T)


def _check_divides(n, m):
    if int(m) != m or m <= 0:
        raise DomainError(f"window width must be a positive integer, got {m}")
    if n % m:
        raise DomainError(f"window width {m} does not divide signal length {n}")


def dft(x) -> np.ndarray:
    """Unnormalized forward DFT, X(k) = sum_n x(n) exp(-j 2 pi n k / N)."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 1 or x.size == 0:
        raise DomainError("dft expects a non-empty 1-D signal")
    return np.fft.fft(x)


def idft(X) -> np.ndarray:
    """Inverse of :func:`dft` (carries the 1/N factor)."""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 1 or X.size == 0:
        raise DomainError("idft expects a non-empty 1-D spectrum")
    return np.fft.ifft(X)


def dft_matrix(m: int) -> np.ndarray:
    """M x M matrix with entries exp(-j 2 pi k m / M)."""
    idx = np.arange(m)
    # integer product mod M keeps the angles exact for large M
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % m) / m)


def idft_matrix(n: int) -> np.ndarray:
    return dft_matrix(n).conj() / n


def stft(y, m: int) -> TFMatrix:
    """Non-overlapping rectangular-window STFT with window width ``m``."""
    y = np.asarray(y, dtype=complex)
    _check_divides(y.size, m)
    blocks = y.reshape(-1, m)
    return TFMatrix(np.fft.fft(blocks, axis=1).T)


def istft(tf: TFMatrix) -> np.ndarray:
    """Exact inverse of :func:`stft` (blocks tile the record)."""
    return np.fft.ifft(tf.values, axis=0).T.reshape(-1)


def _chirp_phase(n_len, alpha):
    n = np.arange(n_len, dtype=float)
    return alpha * n**2


def demodulate(y, alpha: float) -> np.ndarray:
    """Multiply by exp(-j alpha n^2), removing a linear FM of rate alpha."""
    y = np.asarray(y, dtype=complex)
    if alpha == 0:
        return y.copy()
    return y * np.exp(-1j * _chirp_phase(y.size, alpha))


def remodulate(y, alpha: float) -> np.ndarray:
    """Inverse of :func:`demodulate`."""
    y = np.asarray(y, dtype=complex)
    if alpha == 0:
        return y.copy()
    return y * np.exp(1j * _chirp_phase(y.size, alpha))


def lpft(y, alpha: float, m: int) -> TFMatrix:
    """Second-order local polynomial FT: the STFT of the demodulated signal."""
    return stft(demodulate(y, alpha), m)


def build_block_dft(n: int, m: int) -> np.ndarray:
    """Dense block-diagonal operator ``kron(I_{n/m}, F_m)``.

    Applied to a length-``n`` record it returns the window-major stacked
    STFT.
    """
    _check_divides(n, m)
    return np.kron(np.eye(n // m), dft_matrix(m))


def build_tf_to_spectrum(n: int, m: int) -> np.ndarray:
    """Map a global length-``n`` spectrum X to the stacked STFT of idft(X).

    Equal to ``build_block_dft(n, m) @ inverse_dft_matrix(n)``; it is built
    block by block since each block of rows only touches ``m`` samples.
    """
    _check_divides(n, m)
    inv = idft_matrix(n)
    fm = dft_matrix(m)
    out = np.empty((n, n), dtype=complex)
    for b in range(n // m):
        rows = slice(b * m, (b + 1) * m)
        out[rows] = fm @ inv[rows]
    return out
