"""Compressive-sensing recovery from retained time-frequency points.

The unknown is the global length-N spectrum X. Every retained TF point is
one row of ``build_tf_to_spectrum(N, M)``; :func:`build_system` deletes the
rows of trimmed points and the solvers look for a sparse X consistent
with what is left.
"""

from dataclasses import dataclass, field

import numpy as np

from chirpsep.errors import DomainError, SolverError
from chirpsep.lstat import TrimMask
from chirpsep.transforms import TFMatrix, idft


@dataclass(frozen=True)
class MeasurementSystem:
    """Retained TF values and the matching rows of the TF-to-spectrum operator."""

    measurements: np.ndarray
    matrix: np.ndarray
    rows: np.ndarray = field(default=None)

    def __post_init__(self):
        b = np.asarray(self.measurements, dtype=complex)
        a = np.asarray(self.matrix, dtype=complex)
        if a.ndim != 2 or b.shape != (a.shape[0],):
            raise DomainError(
                f"measurements {b.shape} do not match matrix {a.shape}"
            )
        if a.shape[0] > a.shape[1]:
            raise DomainError("more measurements than unknowns")
        object.__setattr__(self, "measurements", b)
        object.__setattr__(self, "matrix", a)

    @property
    def n_total(self) -> int:
        return self.matrix.shape[1]


@dataclass
class SolverReport:
    solution: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    support: list = field(default_factory=list)
    objective: list = field(default_factory=list)

    def nonzero_bins(self, tol=0.0):
        idx = np.flatnonzero(np.abs(self.solution) > tol)
        return [(int(k), complex(self.solution[k])) for k in idx]

    def to_dict(self):
        return {
            "residual_norm": float(self.residual_norm),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "nonzero_bins": [
                {"k": k, "re": v.real, "im": v.imag} for k, v in self.nonzero_bins()
            ],
        }


def build_system(tf: TFMatrix, mask: TrimMask, op: np.ndarray) -> MeasurementSystem:
    """Keep the TF values and operator rows at the mask's retained points."""
    if mask.kept.shape != tf.values.shape:
        raise DomainError(
            f"mask shape {mask.kept.shape} does not match TF shape {tf.values.shape}"
        )
    n = tf.n_total
    if op.shape != (n, n):
        raise DomainError(f"operator shape {op.shape} does not match N={n}")
    rows = np.flatnonzero(mask.stacked())
    if rows.size == 0:
        raise DomainError("mask retains no points")
    return MeasurementSystem(tf.stacked()[rows], op[rows], rows)


def _residual(system, x):
    return float(np.linalg.norm(system.measurements - system.matrix @ x))


def solve_greedy(system: MeasurementSystem, max_sparsity: int, tol: float = 1e-8) -> SolverReport:
    """Orthogonal matching pursuit.

    Each step adds the column best correlated with the residual (columns
    normalized to unit norm for the comparison), refits least squares on
    the support and stops once the residual falls to
    ``tol * ||measurements||`` or the support holds ``max_sparsity``
    columns. ``converged`` is False only if the residual became orthogonal
    to every unused column before either stop was reached.
    """
    if max_sparsity < 1:
        raise DomainError(f"max_sparsity must be >= 1, got {max_sparsity}")
    if tol <= 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    a, b = system.matrix, system.measurements
    n = a.shape[1]
    b_norm = np.linalg.norm(b)
    x = np.zeros(n, dtype=complex)
    if b_norm == 0:
        return SolverReport(x, 0.0, 0, True)

    col_norms = np.linalg.norm(a, axis=0)
    usable = col_norms > 0
    scale = np.where(usable, col_norms, 1.0)
    support = []
    coef = np.zeros(0, dtype=complex)
    residual = b
    converged = False
    iterations = 0
    while len(support) < max_sparsity:
        corr = np.abs(a.conj().T @ residual) / scale
        corr[~usable] = 0.0
        corr[support] = 0.0
        j = int(np.argmax(corr))
        if not corr[j] > 0:
            break
        iterations += 1
        support.append(j)
        sub = a[:, support]
        coef, _, rank, _ = np.linalg.lstsq(sub, b, rcond=None)
        if rank < len(support):
            raise SolverError(
                f"support submatrix is rank deficient (rank {rank} < {len(support)}) "
                f"after adding column {j}"
            )
        residual = b - sub @ coef
        if np.linalg.norm(residual) <= tol * b_norm:
            converged = True
            break
    else:
        converged = True

    x[support] = coef
    return SolverReport(x, _residual(system, x), iterations, converged, support=list(support))


def soft_threshold(x, thresh):
    """Complex soft thresholding: shrink magnitudes by ``thresh``, keep phases."""
    mag = np.abs(x)
    shrink = np.maximum(mag - thresh, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(mag > 0, x * (shrink / np.where(mag > 0, mag, 1.0)), 0)
    return out


def largest_squared_singular_value(a, n_iter=500, rtol=1e-12):
    """Power iteration on ``a^H a``; returns the estimate of sigma_max^2."""
    rng = np.random.default_rng(0)
    v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(n_iter):
        w = a.conj().T @ (a @ v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - est) <= rtol * new:
            est = new
            break
        est = new
    return est


def l1_objective(system, x, lam):
    r = system.measurements - system.matrix @ x
    return 0.5 * float(np.vdot(r, r).real) + lam * float(np.sum(np.abs(x)))


def solve_l1(system: MeasurementSystem, lam: float, max_iter: int = 500,
             tol: float = 1e-8) -> SolverReport:
    """Iterative shrinkage-thresholding (ISTA) for the l1-regularized fit.

    Minimizes ``||b - A x||^2 / 2 + lam * ||x||_1`` with step ``1/c`` where
    ``c`` is a power-iteration estimate of the largest squared singular
    value of ``A``, inflated by 1% to stay an upper bound. Iteration stops
    when ``||x_new - x|| <= tol * max(||x_new||, 1)``. The objective after
    every iteration is kept in ``report.objective``.
    """
    if lam <= 0:
        raise DomainError(f"lambda must be > 0, got {lam}")
    if max_iter < 1:
        raise DomainError(f"max_iter must be >= 1, got {max_iter}")
    a, b = system.matrix, system.measurements
    x = np.zeros(a.shape[1], dtype=complex)
    c = 1.01 * largest_squared_singular_value(a)
    if c == 0.0:
        return SolverReport(x, _residual(system, x), 0, True, objective=[l1_objective(system, x, lam)])

    history = [l1_objective(system, x, lam)]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        z = x + (a.conj().T @ (b - a @ x)) / c
        if not np.all(np.isfinite(z)):
            raise SolverError(f"non-finite iterate at iteration {it}")
        x_new = soft_threshold(z, lam / c)
        step = np.linalg.norm(x_new - x)
        x = x_new
        history.append(l1_objective(system, x, lam))
        if step <= tol * max(np.linalg.norm(x), 1.0):
            converged = True
            break

    support = [int(k) for k in np.flatnonzero(x)]
    return SolverReport(x, _residual(system, x), it, converged, support=support, objective=history)


def spectrum_to_signal(X) -> np.ndarray:
    """Time-domain signal of a recovered spectrum (inverse DFT)."""
    return idft(X)
