"""Experiment configuration: JSON parsing and validation.

Validation errors carry the line of the offending field in the source
file so the CLI can report ``config.json:LINE: message``.
"""

import json
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from chirpsep.errors import ConfigError, DomainError
from chirpsep.lstat import TrimPolicy
from chirpsep.synth import ChirpSpec, NoiseSpec, SinusoidSpec

MAX_N = 4096

_KNOWN = {
    "n_total", "window", "sinusoids", "chirps", "noise", "removal_fraction",
    "q_p_split", "alpha", "solver", "output_dir", "seed", "k_max",
    "chirp_removal_fraction", "k_chirp", "tol", "lambda_frac", "max_iter",
}
_SIN_KEYS = {"amplitude", "frequency_bin", "phase"}
_CHIRP_KEYS = {"amplitude", "start_bin", "chirp_rate", "phase"}


@dataclass(frozen=True)
class ExperimentConfig:
    n_total: int
    window: int
    sinusoids: tuple = ()
    chirps: tuple = ()
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    removal_fraction: float = 0.5
    q_p_split: tuple = (0.5, 0.5)
    alpha: Optional[float] = None
    solver: str = "greedy"
    output_dir: str = "chirpsep-out"
    seed: int = 0
    k_max: Optional[int] = None
    chirp_removal_fraction: float = 0.25
    k_chirp: int = 1
    tol: float = 1e-8
    lambda_frac: float = 0.01
    max_iter: int = 2000

    def policy(self):
        return TrimPolicy.from_removal(self.removal_fraction, self.q_p_split[0])

    def chirp_policy(self):
        return TrimPolicy.from_removal(self.chirp_removal_fraction, self.q_p_split[0])

    @property
    def sparsity(self):
        if self.k_max is not None:
            return self.k_max
        return max(len(self.sinusoids), 1)

    def with_seed(self, seed):
        return replace(self, seed=seed, noise=replace(self.noise, seed=seed))


def _line_of(text, *keys):
    """1-based line of the last key in ``keys``, searching each after the previous."""
    if text is None:
        return None
    pos = 0
    line = None
    for key in keys:
        if isinstance(key, int):
            # skip to the key-th object opened after the current position
            for _ in range(key + 1):
                nxt = text.find("{", pos)
                if nxt < 0:
                    return line
                pos = nxt + 1
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            return line
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


class _Checker:
    def __init__(self, text, path):
        self.text = text
        self.path = path

    def fail(self, msg, *keys):
        raise ConfigError(msg, _line_of(self.text, *keys), self.path)

    def number(self, value, *keys, integer=False):
        name = ".".join(str(k) for k in keys)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(f"{name} must be a number, got {value!r}", *keys)
        if not math.isfinite(value):
            self.fail(f"{name} must be finite, got {value!r}", *keys)
        if integer:
            if int(value) != value:
                self.fail(f"{name} must be an integer, got {value!r}", *keys)
            return int(value)
        return float(value)


def parse_config(data, text=None, path=None) -> ExperimentConfig:
    """Validate a decoded JSON object and build an :class:`ExperimentConfig`."""
    c = _Checker(text, path)
    if not isinstance(data, dict):
        c.fail("config must be a JSON object")
    for key in data:
        if key not in _KNOWN:
            c.fail(f"unknown field {key!r}", key)
    for key in ("n_total", "window"):
        if key not in data:
            c.fail(f"missing required field {key!r}")

    n = c.number(data["n_total"], "n_total", integer=True)
    if not 0 < n <= MAX_N:
        c.fail(f"n_total must be in [1, {MAX_N}], got {n}", "n_total")
    m = c.number(data["window"], "window", integer=True)
    if m <= 0:
        c.fail(f"window must be positive, got {m}", "window")
    if n % m:
        c.fail(f"window {m} does not divide n_total {n}", "window")

    sinusoids = []
    raw = data.get("sinusoids", [])
    if not isinstance(raw, list):
        c.fail("sinusoids must be a list", "sinusoids")
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            c.fail(f"sinusoids[{i}] must be an object", "sinusoids")
        for key in item:
            if key not in _SIN_KEYS:
                c.fail(f"unknown field {key!r} in sinusoids[{i}]", "sinusoids", i, key)
        amp = c.number(item.get("amplitude", 1.0), "sinusoids", i, "amplitude")
        k = c.number(item.get("frequency_bin", 0), "sinusoids", i, "frequency_bin", integer=True)
        ph = c.number(item.get("phase", 0.0), "sinusoids", i, "phase")
        if not 0 <= k < n:
            c.fail(f"sinusoids[{i}].frequency_bin {k} outside [0, {n})",
                   "sinusoids", i, "frequency_bin")
        if amp < 0:
            c.fail(f"sinusoids[{i}].amplitude must be >= 0", "sinusoids", i, "amplitude")
        sinusoids.append(SinusoidSpec(amp, k, ph))

    chirps = []
    raw = data.get("chirps", [])
    if not isinstance(raw, list):
        c.fail("chirps must be a list", "chirps")
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            c.fail(f"chirps[{i}] must be an object", "chirps")
        for key in item:
            if key not in _CHIRP_KEYS:
                c.fail(f"unknown field {key!r} in chirps[{i}]", "chirps", i, key)
        amp = c.number(item.get("amplitude", 1.0), "chirps", i, "amplitude")
        if amp < 0:
            c.fail(f"chirps[{i}].amplitude must be >= 0", "chirps", i, "amplitude")
        chirps.append(ChirpSpec(
            amp,
            c.number(item.get("start_bin", 0.0), "chirps", i, "start_bin"),
            c.number(item.get("chirp_rate", 0.0), "chirps", i, "chirp_rate"),
            c.number(item.get("phase", 0.0), "chirps", i, "phase"),
        ))

    seed = c.number(data.get("seed", 0), "seed", integer=True)
    if not 0 <= seed < 2**64:
        c.fail(f"seed must be a 64-bit unsigned integer, got {seed}", "seed")
    noise_raw = data.get("noise", {})
    if not isinstance(noise_raw, dict) or set(noise_raw) - {"std_dev"}:
        c.fail('noise must be an object with the single field "std_dev"', "noise")
    std = c.number(noise_raw.get("std_dev", 0.0), "noise", "std_dev")
    if std < 0:
        c.fail(f"noise.std_dev must be >= 0, got {std}", "noise", "std_dev")

    removal = c.number(data.get("removal_fraction", 0.5), "removal_fraction")
    if not 0 <= removal < 1:
        c.fail(f"removal_fraction must lie in [0, 1), got {removal}", "removal_fraction")
    chirp_removal = c.number(data.get("chirp_removal_fraction", 0.25), "chirp_removal_fraction")
    if not 0 <= chirp_removal < 1:
        c.fail(f"chirp_removal_fraction must lie in [0, 1), got {chirp_removal}",
               "chirp_removal_fraction")

    split = data.get("q_p_split", [0.5, 0.5])
    if not isinstance(split, list) or len(split) != 2:
        c.fail("q_p_split must be a pair [top, bottom]", "q_p_split")
    split = tuple(c.number(v, "q_p_split") for v in split)
    if min(split) < 0 or abs(sum(split) - 1.0) > 1e-9:
        c.fail(f"q_p_split fractions must be >= 0 and sum to 1, got {list(split)}", "q_p_split")

    alpha = data.get("alpha")
    if alpha is not None:
        alpha = c.number(alpha, "alpha")

    solver = data.get("solver", "greedy")
    if solver not in ("greedy", "l1"):
        c.fail(f"solver must be 'greedy' or 'l1', got {solver!r}", "solver")
    output_dir = data.get("output_dir", "chirpsep-out")
    if not isinstance(output_dir, str) or not output_dir:
        c.fail("output_dir must be a non-empty string", "output_dir")

    k_max = data.get("k_max")
    if k_max is not None:
        k_max = c.number(k_max, "k_max", integer=True)
        if k_max < 1:
            c.fail(f"k_max must be >= 1, got {k_max}", "k_max")
    k_chirp = c.number(data.get("k_chirp", 1), "k_chirp", integer=True)
    if k_chirp < 1:
        c.fail(f"k_chirp must be >= 1, got {k_chirp}", "k_chirp")
    tol = c.number(data.get("tol", 1e-8), "tol")
    if tol <= 0:
        c.fail(f"tol must be > 0, got {tol}", "tol")
    lam = c.number(data.get("lambda_frac", 0.01), "lambda_frac")
    if lam <= 0:
        c.fail(f"lambda_frac must be > 0, got {lam}", "lambda_frac")
    max_iter = c.number(data.get("max_iter", 2000), "max_iter", integer=True)
    if max_iter < 1:
        c.fail(f"max_iter must be >= 1, got {max_iter}", "max_iter")

    try:
        noise = NoiseSpec(std, seed)
    except DomainError as exc:
        c.fail(str(exc), "noise")
    return ExperimentConfig(
        n_total=n, window=m, sinusoids=tuple(sinusoids), chirps=tuple(chirps),
        noise=noise, removal_fraction=removal, q_p_split=split, alpha=alpha,
        solver=solver, output_dir=output_dir, seed=seed, k_max=k_max,
        chirp_removal_fraction=chirp_removal, k_chirp=k_chirp, tol=tol,
        lambda_frac=lam, max_iter=max_iter,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno, path) from None
    return parse_config(data, text, path)
