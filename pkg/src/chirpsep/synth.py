"""Synthetic test signals: on-grid tones, linear FM chirps and complex noise.

Signals are plain 1-D complex128 numpy arrays. Frequencies are expressed
in cycles per record (DFT bins of the full length-N record); chirp rates
are in radians per sample squared, so a chirp reads

    a * exp(j * (2*pi*start_bin*n/N + chirp_rate*n**2 + phase)).

Noise is complex circular Gaussian drawn from numpy's PCG64 generator
(``numpy.random.default_rng``), so a given seed reproduces the same
samples for a fixed numpy release.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from chirpsep.errors import DomainError


@dataclass(frozen=True)
class SinusoidSpec:
    amplitude: float = 1.0
    frequency_bin: int = 0
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError(f"amplitude must be >= 0, got {self.amplitude}")
        if int(self.frequency_bin) != self.frequency_bin:
            raise DomainError(
                f"frequency_bin must be an integer, got {self.frequency_bin}"
            )


@dataclass(frozen=True)
class ChirpSpec:
    amplitude: float = 1.0
    start_bin: float = 0.0
    chirp_rate: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise DomainError(f"amplitude must be >= 0, got {self.amplitude}")


@dataclass(frozen=True)
class NoiseSpec:
    std_dev: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.std_dev < 0:
            raise DomainError(f"std_dev must be >= 0, got {self.std_dev}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


def _check_length(n_len):
    if int(n_len) != n_len or n_len <= 0:
        raise DomainError(f"signal length must be a positive integer, got {n_len}")
    return int(n_len)


def gen_sinusoid(spec: SinusoidSpec, n_len: int) -> np.ndarray:
    """On-grid complex tone, exactly 1-sparse in the length-``n_len`` DFT."""
    n_len = _check_length(n_len)
    if not 0 <= spec.frequency_bin < n_len:
        raise DomainError(
            f"frequency_bin {spec.frequency_bin} outside [0, {n_len})"
        )
    n = np.arange(n_len)
    # reduce k*n mod N first so the phase argument stays small and exact
    cycles = (int(spec.frequency_bin) * n) % n_len
    return spec.amplitude * np.exp(1j * (2 * np.pi * cycles / n_len + spec.phase))


def gen_chirp(spec: ChirpSpec, n_len: int) -> np.ndarray:
    """Linear FM chirp; ``chirp_rate == 0`` gives a (possibly off-grid) tone."""
    n_len = _check_length(n_len)
    n = np.arange(n_len)
    start = spec.start_bin
    if float(start).is_integer():
        linear = 2 * np.pi * ((int(start) * n) % n_len) / n_len
    else:
        linear = 2 * np.pi * start * n / n_len
    return spec.amplitude * np.exp(
        1j * (linear + spec.chirp_rate * n.astype(float) ** 2 + spec.phase)
    )


def gen_noise(spec: NoiseSpec, n_len: int) -> np.ndarray:
    """Complex circular Gaussian noise with E|e(n)|^2 = std_dev**2."""
    n_len = _check_length(n_len)
    if spec.std_dev == 0:
        return np.zeros(n_len, dtype=complex)
    rng = np.random.default_rng(spec.seed)
    parts = rng.standard_normal((2, n_len)) * (spec.std_dev / np.sqrt(2))
    return parts[0] + 1j * parts[1]


def mix(signals: Sequence[np.ndarray]) -> np.ndarray:
    """Elementwise sum of equal-length signals."""
    if len(signals) == 0:
        raise DomainError("mix needs at least one signal")
    arrays = [np.asarray(s, dtype=complex) for s in signals]
    n_len = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != n_len:
            raise DomainError(
                f"length mismatch in mix: {a.shape[0]} vs {n_len[0]}"
            )
    out = np.zeros(n_len, dtype=complex)
    for a in arrays:
        out = out + a
    return out


def noise_std_for_snr(clean: np.ndarray, snr_db: float) -> float:
    """Noise standard deviation giving ``snr_db`` against the mean power of ``clean``."""
    power = np.mean(np.abs(clean) ** 2)
    return float(np.sqrt(power / 10 ** (snr_db / 10)))
