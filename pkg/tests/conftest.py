import numpy as np
import pytest


def naive_dft(x):
    """Direct O(N^2) summation, no FFT."""
    x = np.asarray(x, dtype=complex)
    n_len = x.size
    out = np.zeros(n_len, dtype=complex)
    for k in range(n_len):
        acc = 0j
        for n in range(n_len):
            acc += x[n] * np.exp(-2j * np.pi * ((n * k) % n_len) / n_len)
        out[k] = acc
    return out


def dft_kernel(n_len):
    """O(N^2) summation kernel for vectorized naive DFTs."""
    idx = np.arange(n_len)
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % n_len) / n_len)


def naive_stft(y, m):
    """Per-block naive DFTs, column b = block b."""
    y = np.asarray(y, dtype=complex)
    return np.stack([naive_dft(y[b * m:(b + 1) * m]) for b in range(y.size // m)], axis=1)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def row_random_mask(rng, shape, keep_frac):
    """Mask keeping the same random share of windows in every frequency row."""
    rows, cols = shape
    keep = int(round(keep_frac * cols))
    kept = np.zeros(shape, dtype=bool)
    for k in range(rows):
        kept[k, rng.permutation(cols)[:keep]] = True
    return kept


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
