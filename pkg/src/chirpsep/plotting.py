"""Figure rendering for experiment reports.

Figures are drawn on bare ``matplotlib.figure.Figure`` objects with the
Agg canvas, so nothing touches pyplot's global state and the PNG bytes
depend only on the data (the Software metadata tag is dropped).
"""

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from chirpsep.lstat import sorted_magnitudes
from chirpsep.transforms import dft, stft

STYLE = {
    "font.size": 8,
    "axes.titlesize": 8,
    "axes.labelsize": 8,
    "xtick.labelsize": 7,
    "ytick.labelsize": 7,
}


def _new_figure(width, height):
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig, path):
    fig.savefig(path, format="png", metadata={"Software": None})


def _tf_panel(ax, values, title):
    mag = np.log10(1.0 + np.abs(values))
    ax.imshow(mag, aspect="auto", origin="upper", interpolation="nearest", cmap="viridis")
    ax.set_title(title)
    ax.set_xlabel("window")
    ax.set_ylabel("bin k")


def tf_panels(path, y, useful, disturbance, mask, m):
    """Two rows of TF panels: input, sorted, trimmed / useful, disturbance."""
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = _new_figure(9, 5)
        axes = fig.subplots(2, 3)
        tf = stft(y, m)
        _tf_panel(axes[0, 0], tf.values, "STFT of input")
        _tf_panel(axes[0, 1], sorted_magnitudes(tf), "sorted per bin")
        _tf_panel(axes[0, 2], np.where(mask.kept, tf.values, 0), "after trimming")
        _tf_panel(axes[1, 0], stft(useful, m).values, "useful component")
        _tf_panel(axes[1, 1], stft(disturbance, m).values, "disturbance")
        axes[1, 2].axis("off")
        fig.tight_layout()
        _save(fig, path)


def spectra_rows(path, rows):
    """Stacked magnitude-spectrum plots; ``rows`` is a list of (title, signal)."""
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = _new_figure(7, 1.8 * len(rows))
        axes = np.atleast_1d(fig.subplots(len(rows), 1, sharex=True))
        for ax, (title, x) in zip(axes, rows):
            X = np.abs(dft(x))
            ax.plot(np.arange(X.size), X, lw=0.8, color="k")
            ax.set_title(title)
            ax.set_ylabel("|X(k)|")
        axes[-1].set_xlabel("bin k")
        fig.tight_layout()
        _save(fig, path)


def lpft_panels(path, lpft_values, mask, chirp_spectrum):
    import matplotlib

    with matplotlib.rc_context(STYLE):
        fig = _new_figure(9, 2.8)
        axes = fig.subplots(1, 3)
        _tf_panel(axes[0], lpft_values, "LPFT of residual")
        _tf_panel(axes[1], np.where(mask.kept, lpft_values, 0), "after trimming")
        X = np.abs(chirp_spectrum)
        axes[2].plot(np.arange(X.size), X, lw=0.8, color="k")
        axes[2].set_title("recovered demodulated spectrum")
        axes[2].set_xlabel("bin k")
        fig.tight_layout()
        _save(fig, path)
