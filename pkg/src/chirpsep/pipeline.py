"""End-to-end separation of sinusoids, chirps and noise.

Case 1 recovers the sparse tones of ``y = x + e`` from the STFT points that
survive trimming and takes the disturbance as ``y - x``. Case 2 first runs
Case 1 for the tones, then demodulates the residual with the chirp rate
so the chirp turns into a tone, trims the noise-dominated points and
recovers it the same way before remodulating.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from chirpsep.errors import DomainError
from chirpsep.lstat import TrimMask, TrimPolicy, trim
from chirpsep.recovery import (
    SolverReport,
    build_system,
    solve_greedy,
    solve_l1,
    spectrum_to_signal,
)
from chirpsep.transforms import (
    TFMatrix,
    build_tf_to_spectrum,
    demodulate,
    lpft,
    remodulate,
    stft,
)


@dataclass
class Metrics:
    """Quality figures; the MSE entries are None without ground truth."""

    mse_useful: Optional[float]
    mse_disturbance: Optional[float]
    retained_fraction: float


@dataclass
class SeparationResult:
    useful: np.ndarray
    disturbance: np.ndarray
    useful_spectrum: np.ndarray
    mask: TrimMask
    report: SolverReport
    metrics: Metrics
    tf: TFMatrix


def relative_mse(estimate, truth):
    """``||estimate - truth||^2 / ||truth||^2``; plain mean squared error if truth is zero."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    err = float(np.sum(np.abs(estimate - truth) ** 2))
    energy = float(np.sum(np.abs(truth) ** 2))
    if energy == 0.0:
        return err / truth.size
    return err / energy


def correlation(a, b):
    """Normalized complex correlation ``|<a, b>| / (||a|| ||b||)``; nan for a zero input."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return float("nan")
    return float(abs(np.vdot(a, b)) / (na * nb))


@lru_cache(maxsize=8)
def _operator(n, m):
    op = build_tf_to_spectrum(n, m)
    op.setflags(write=False)
    return op


def _solve(system, k_max, solver, tol, lam_frac, max_iter):
    if solver == "greedy":
        return solve_greedy(system, k_max, tol)
    if solver == "l1":
        scale = np.max(np.abs(system.matrix.conj().T @ system.measurements))
        if scale == 0:
            return solve_greedy(system, k_max, tol)
        return solve_l1(system, lam_frac * scale, max_iter=max_iter, tol=tol)
    raise DomainError(f"unknown solver {solver!r}")


def _recover(tf, policy, k_max, solver, tol, lam_frac, max_iter):
    mask, _ = trim(tf, policy)
    system = build_system(tf, mask, _operator(tf.n_total, tf.window))
    report = _solve(system, k_max, solver, tol, lam_frac, max_iter)
    return mask, report


def separate_case1(y, m: int, policy: TrimPolicy, k_max: int, *, solver="greedy",
                   tol=1e-8, lam_frac=0.01, max_iter=2000,
                   truth_useful=None, truth_disturbance=None) -> SeparationResult:
    """Separate on-grid tones from a disturbance by trimming and sparse recovery.

    Parameters
    ----------
    y : array_like
        Length-N complex record, N divisible by ``m``.
    m : int
        STFT window width.
    policy : TrimPolicy
        Per-row trimming applied to the STFT.
    k_max : int
        Sparsity bound for the greedy solver (number of tones).
    solver : {"greedy", "l1"}
        Recovery algorithm. For ``"l1"`` the shrinkage weight is
        ``lam_frac * max|A^H b|``.
    truth_useful, truth_disturbance : array_like, optional
        Ground truth used only to fill in ``metrics``.

    Returns
    -------
    SeparationResult
        ``useful`` is the inverse DFT of the recovered spectrum and
        ``disturbance = y - useful``.
    """
    y = np.asarray(y, dtype=complex)
    tf = stft(y, m)
    mask, report = _recover(tf, policy, k_max, solver, tol, lam_frac, max_iter)
    useful = spectrum_to_signal(report.solution)
    disturbance = y - useful
    metrics = Metrics(
        None if truth_useful is None else relative_mse(useful, truth_useful),
        None if truth_disturbance is None else relative_mse(disturbance, truth_disturbance),
        mask.retained_fraction,
    )
    return SeparationResult(useful, disturbance, report.solution, mask, report, metrics, tf)


def separate_case2(y, m: int, policy_sin: TrimPolicy, policy_chirp: TrimPolicy,
                   alpha: float, k_sin: int, k_chirp: int, *, solver="greedy",
                   tol=1e-8, lam_frac=0.01, max_iter=2000,
                   truth_sin=None, truth_chirp=None):
    """Two-step separation of tones, one chirp of known rate and noise.

    Step one is :func:`separate_case1` on ``y``. Step two demodulates the
    residual ``y - tones`` by ``alpha``, trims its STFT with
    ``policy_chirp`` and recovers ``k_chirp`` spectral lines, which are
    remodulated into the chirp estimate. The second result's
    ``disturbance`` is what is left of the residual (mostly noise).

    Returns
    -------
    (SeparationResult, SeparationResult)
        Sinusoid result and chirp result.
    """
    y = np.asarray(y, dtype=complex)
    sin = separate_case1(y, m, policy_sin, k_sin, solver=solver, tol=tol,
                         lam_frac=lam_frac, max_iter=max_iter, truth_useful=truth_sin)
    residual = y - sin.useful
    tf = stft(demodulate(residual, alpha), m)
    mask, report = _recover(tf, policy_chirp, k_chirp, solver, tol, lam_frac, max_iter)
    chirp = remodulate(spectrum_to_signal(report.solution), alpha)
    rest = residual - chirp
    noise_truth = None
    if truth_sin is not None and truth_chirp is not None:
        noise_truth = y - np.asarray(truth_sin) - np.asarray(truth_chirp)
    metrics = Metrics(
        None if truth_chirp is None else relative_mse(chirp, truth_chirp),
        None if noise_truth is None else relative_mse(rest, noise_truth),
        mask.retained_fraction,
    )
    return sin, SeparationResult(chirp, rest, report.solution, mask, report, metrics, tf)


def concentration(tf: TFMatrix) -> float:
    """Share of TF magnitude carried by the strongest bin of each window."""
    mag = np.abs(tf.values)
    total = mag.sum()
    if total == 0:
        return 0.0
    return float(mag.max(axis=0).sum() / total)


def estimate_chirp_rate(y, m: int, alpha_grid) -> float:
    """Grid chirp rate whose LPFT is most concentrated.

    Ties (scores within 1e-12 relative) go to the smallest ``|alpha|``,
    then to the smaller value.
    """
    grid = [float(a) for a in alpha_grid]
    if not grid:
        raise DomainError("alpha grid is empty")
    scores = [concentration(lpft(y, a, m)) for a in grid]
    best = max(scores)
    tied = [a for a, s in zip(grid, scores) if s >= best - 1e-12 * max(best, 1e-300)]
    return min(tied, key=lambda a: (abs(a), a))
