"""Separation of stationary sinusoids from chirp disturbances.

Time-frequency points dominated by a disturbance are trimmed with
L-statistics and the sparse component is recovered from the remaining
points by compressive-sensing reconstruction.
"""

from chirpsep.errors import ConfigError, DomainError, SolverError
from chirpsep.lstat import TrimMask, TrimPolicy, sort_row, trim, untrimmed_sum
from chirpsep.pipeline import (
    Metrics,
    SeparationResult,
    estimate_chirp_rate,
    separate_case1,
    separate_case2,
)
from chirpsep.recovery import (
    MeasurementSystem,
    SolverReport,
    build_system,
    solve_greedy,
    solve_l1,
    spectrum_to_signal,
)
from chirpsep.synth import (
    ChirpSpec,
    NoiseSpec,
    SinusoidSpec,
    gen_chirp,
    gen_noise,
    gen_sinusoid,
    mix,
)
from chirpsep.transforms import (
    TFMatrix,
    build_block_dft,
    build_tf_to_spectrum,
    demodulate,
    dft,
    idft,
    lpft,
    remodulate,
    stft,
)

__version__ = "0.1.0"

__all__ = [
    "ChirpSpec",
    "ConfigError",
    "DomainError",
    "MeasurementSystem",
    "Metrics",
    "NoiseSpec",
    "SeparationResult",
    "SinusoidSpec",
    "SolverError",
    "SolverReport",
    "TFMatrix",
    "TrimMask",
    "TrimPolicy",
    "build_block_dft",
    "build_system",
    "build_tf_to_spectrum",
    "demodulate",
    "dft",
    "estimate_chirp_rate",
    "gen_chirp",
    "gen_noise",
    "gen_sinusoid",
    "idft",
    "lpft",
    "mix",
    "remodulate",
    "separate_case1",
    "separate_case2",
    "solve_greedy",
    "solve_l1",
    "sort_row",
    "spectrum_to_signal",
    "stft",
    "trim",
    "untrimmed_sum",
]
