"""Per-frequency L-statistics trimming of a block TF matrix.

Along every frequency row the window values are ordered by magnitude and
the ``Q`` largest and ``P`` smallest are discarded. The retained points
form a :class:`TrimMask`; their complex sum per row is the trimmed
spectrum estimate.
"""

import math
from dataclasses import dataclass

import numpy as np

from chirpsep.errors import DomainError
from chirpsep.transforms import TFMatrix

# share of the total removal taken from the top of each sorted row
DEFAULT_TOP_SHARE = 0.5


@dataclass(frozen=True)
class TrimPolicy:
    """Fractions of each frequency row discarded from the top and bottom."""

    q_frac: float = 0.0
    p_frac: float = 0.0

    def __post_init__(self):
        for name in ("q_frac", "p_frac"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
        if self.q_frac + self.p_frac >= 1.0:
            raise DomainError(
                f"q_frac + p_frac must be < 1, got {self.q_frac} + {self.p_frac}"
            )

    @classmethod
    def from_removal(cls, removal, top_share=DEFAULT_TOP_SHARE):
        """Split a total removal fraction between the top and bottom of each row."""
        if not 0.0 <= removal < 1.0:
            raise DomainError(f"removal fraction must lie in [0, 1), got {removal}")
        if not 0.0 <= top_share <= 1.0:
            raise DomainError(f"top share must lie in [0, 1], got {top_share}")
        return cls(q_frac=removal * top_share, p_frac=removal * (1.0 - top_share))

    def counts(self, cols):
        """Return ``(Q, P)`` for rows of ``cols`` values.

        Rounds half up, then lowers P (and if needed Q) until at least one
        value per row survives.
        """
        q = math.floor(self.q_frac * cols + 0.5)
        p = math.floor(self.p_frac * cols + 0.5)
        excess = q + p - (cols - 1)
        if excess > 0:
            cut = min(p, excess)
            p -= cut
            q -= excess - cut
        return q, p


@dataclass(frozen=True)
class TrimMask:
    """Boolean retention matrix aligned with a TFMatrix (True = kept)."""

    kept: np.ndarray

    def __post_init__(self):
        kept = np.asarray(self.kept, dtype=bool)
        if kept.ndim != 2:
            raise DomainError(f"mask must be 2-D, got shape {kept.shape}")
        kept.setflags(write=False)
        object.__setattr__(self, "kept", kept)

    @property
    def retained_count(self) -> int:
        return int(self.kept.sum())

    @property
    def retained_fraction(self) -> float:
        return self.retained_count / self.kept.size

    def stacked(self) -> np.ndarray:
        """Window-major flattening, matching :meth:`TFMatrix.stacked`."""
        return self.kept.T.reshape(-1)

    @classmethod
    def full(cls, shape):
        return cls(np.ones(shape, dtype=bool))


def _row_order(row):
    # stable: equal magnitudes keep ascending window order
    return np.argsort(np.abs(row), kind="stable")


def sort_row(tf: TFMatrix, k: int):
    """Window values of frequency row ``k`` in ascending magnitude.

    Returns a list of ``(window_index, value)`` pairs.
    """
    if not 0 <= k < tf.window:
        raise DomainError(f"frequency row {k} outside [0, {tf.window})")
    row = tf.values[k]
    return [(int(b), complex(row[b])) for b in _row_order(row)]


def sorted_magnitudes(tf: TFMatrix) -> np.ndarray:
    """Each row of ``|tf|`` sorted ascending (the sorted-STFT picture)."""
    return np.sort(np.abs(tf.values), axis=1, kind="stable")


def trim(tf: TFMatrix, policy: TrimPolicy):
    """Apply L-statistics trimming to every frequency row.

    Parameters
    ----------
    tf : TFMatrix
        STFT or LPFT values.
    policy : TrimPolicy
        Top/bottom fractions to discard per row.

    Returns
    -------
    mask : TrimMask
        Retained points; each row keeps the sorted positions
        ``P .. cols-Q-1`` (0-based).
    trimmed : ndarray
        Length-M complex vector, the sum of retained values in each row.
    """
    if not isinstance(policy, TrimPolicy):
        raise DomainError("policy must be a TrimPolicy")
    cols = tf.n_windows
    q, p = policy.counts(cols)
    if q + p >= cols:
        raise DomainError(f"trimming {q}+{p} of {cols} values leaves nothing")
    kept = np.zeros(tf.values.shape, dtype=bool)
    for k in range(tf.window):
        order = _row_order(tf.values[k])
        kept[k, order[p:cols - q]] = True
    trimmed = np.where(kept, tf.values, 0).sum(axis=1)
    return TrimMask(kept), trimmed


def untrimmed_sum(tf: TFMatrix) -> np.ndarray:
    """Row sums of the TF matrix.

    With windows tiling the record, row ``k`` aggregates bin ``k`` of the
    M-point block spectra; it is not the N-point DFT.
    """
    return tf.values.sum(axis=1)


def apply_mask(tf: TFMatrix, mask: TrimMask) -> TFMatrix:
    """TF matrix with trimmed points zeroed."""
    if mask.kept.shape != tf.values.shape:
        raise DomainError(
            f"mask shape {mask.kept.shape} does not match TF shape {tf.values.shape}"
        )
    return TFMatrix(np.where(mask.kept, tf.values, 0))
