"""CSV, PGM and JSON serialization of signals, TF matrices, masks and reports.

Floats are written with ``repr`` so values round-trip exactly and repeated
runs produce byte-identical files.
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from chirpsep.errors import DomainError
from chirpsep.lstat import TrimMask
from chirpsep.transforms import TFMatrix


def _f(v):
    return repr(float(v))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _read_rows(path, header):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        got = next(r, None)
        if got != list(header):
            raise DomainError(f"{path}: expected header {','.join(header)}, got {got}")
        return list(r)


def write_signal_csv(path, x):
    x = np.asarray(x, dtype=complex)
    _write_rows(path, ("index", "re", "im"), ((i, _f(v.real), _f(v.imag)) for i, v in enumerate(x)))


def read_signal_csv(path):
    rows = _read_rows(path, ("index", "re", "im"))
    out = np.zeros(len(rows), dtype=complex)
    for i, re, im in rows:
        out[int(i)] = complex(float(re), float(im))
    return out


def write_spectrum_csv(path, X):
    X = np.asarray(X, dtype=complex)
    _write_rows(path, ("k", "re", "im"), ((k, _f(v.real), _f(v.imag)) for k, v in enumerate(X)))


def read_spectrum_csv(path):
    rows = _read_rows(path, ("k", "re", "im"))
    out = np.zeros(len(rows), dtype=complex)
    for k, re, im in rows:
        out[int(k)] = complex(float(re), float(im))
    return out


def write_tf_csv(path, tf: TFMatrix):
    v = tf.values
    rows = ((k, b, _f(v[k, b].real), _f(v[k, b].imag))
            for k in range(tf.window) for b in range(tf.n_windows))
    _write_rows(path, ("k", "window", "re", "im"), rows)


def read_tf_csv(path) -> TFMatrix:
    rows = _read_rows(path, ("k", "window", "re", "im"))
    ks = [int(r[0]) for r in rows]
    bs = [int(r[1]) for r in rows]
    out = np.zeros((max(ks) + 1, max(bs) + 1), dtype=complex)
    for (k, b, re, im) in rows:
        out[int(k), int(b)] = complex(float(re), float(im))
    return TFMatrix(out)


def write_mask_csv(path, mask: TrimMask):
    kept = mask.kept
    rows = ((k, b, int(kept[k, b])) for k in range(kept.shape[0]) for b in range(kept.shape[1]))
    _write_rows(path, ("k", "window", "kept"), rows)


def read_mask_csv(path) -> TrimMask:
    rows = _read_rows(path, ("k", "window", "kept"))
    ks = [int(r[0]) for r in rows]
    bs = [int(r[1]) for r in rows]
    out = np.zeros((max(ks) + 1, max(bs) + 1), dtype=bool)
    for k, b, kept in rows:
        out[int(k), int(b)] = kept == "1"
    return TrimMask(out)


def magnitude_image(values) -> np.ndarray:
    """8-bit image of ``log10(1 + |values|)`` scaled so the maximum maps to 255."""
    mag = np.log10(1.0 + np.abs(np.asarray(values)))
    peak = mag.max() if mag.size else 0.0
    if peak == 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    return np.floor(mag / peak * 255 + 0.5).astype(np.uint8)


def mask_image(mask: TrimMask) -> np.ndarray:
    return np.where(mask.kept, 255, 0).astype(np.uint8)


def write_pgm(path, image):
    """Binary (P5) 8-bit PGM; image row 0 is the top line (frequency bin 0)."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise DomainError(f"PGM image must be 2-D, got shape {image.shape}")
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(image).tobytes())


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos].decode("ascii"))
    if tokens[0] != "P5" or tokens[3] != "255":
        raise DomainError(f"{path}: not an 8-bit binary PGM")
    width, height = int(tokens[1]), int(tokens[2])
    pixels = np.frombuffer(data[pos + 1:pos + 1 + width * height], dtype=np.uint8)
    return pixels.reshape(height, width)


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_result(out_dir, result, prefix=""):
    """Write a SeparationResult's components and return a manifest dict.

    The manifest maps each artifact role to a path relative to
    ``out_dir``.
    """
    out_dir = Path(out_dir)
    files = {
        "useful": f"{prefix}useful.csv",
        "disturbance": f"{prefix}disturbance.csv",
        "useful_spectrum": f"{prefix}useful_spectrum.csv",
        "mask": f"{prefix}mask.csv",
        "mask_image": f"{prefix}mask.pgm",
        "tf": f"{prefix}tf.pgm",
        "report": f"{prefix}report.json",
    }
    write_signal_csv(out_dir / files["useful"], result.useful)
    write_signal_csv(out_dir / files["disturbance"], result.disturbance)
    write_spectrum_csv(out_dir / files["useful_spectrum"], result.useful_spectrum)
    write_mask_csv(out_dir / files["mask"], result.mask)
    write_pgm(out_dir / files["mask_image"], mask_image(result.mask))
    write_pgm(out_dir / files["tf"], magnitude_image(result.tf.values))
    write_json(out_dir / files["report"], result.report.to_dict())
    return {
        "files": files,
        "metrics": metrics_dict(result.metrics),
    }


def metrics_dict(metrics):
    return {
        "mse_useful": metrics.mse_useful,
        "mse_disturbance": metrics.mse_disturbance,
        "retained_fraction": metrics.retained_fraction,
    }
