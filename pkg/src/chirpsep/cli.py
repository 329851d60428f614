"""Command-line experiment runner.

    chirpsep run <config.json> [--out DIR] [--seed INT] [--no-figures]
    chirpsep sweep <config.json> --param NAME --values v1,v2,... [--out DIR]
    chirpsep estimate-alpha <config.json> --grid lo:step:hi

Exit codes: 0 success, 1 invalid config or arguments, 2 solver did not
converge, 3 I/O failure.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from chirpsep import artifacts, plotting
from chirpsep.config import load_config
from chirpsep.errors import ConfigError, DomainError
from chirpsep.lstat import apply_mask, sorted_magnitudes
from chirpsep.pipeline import correlation, estimate_chirp_rate, separate_case1, separate_case2
from chirpsep.synth import gen_chirp, gen_noise, gen_sinusoid, mix, noise_std_for_snr
from chirpsep.transforms import dft

EXIT_OK, EXIT_CONFIG, EXIT_NOCONV, EXIT_IO = 0, 1, 2, 3
SWEEP_PARAMS = ("removal_fraction", "snr", "window")
BUNDLED = ("example1.json", "example2.json")


def build_signals(cfg):
    """Return ``(y, tones, chirps, noise)`` for a config."""
    n = cfg.n_total
    zero = np.zeros(n, dtype=complex)
    tones = mix([zero] + [gen_sinusoid(s, n) for s in cfg.sinusoids])
    chirps = mix([zero] + [gen_chirp(c, n) for c in cfg.chirps])
    noise = gen_noise(cfg.noise, n)
    return mix([tones, chirps, noise]), tones, chirps, noise


def _case1(cfg, y, tones, disturbance):
    return separate_case1(
        y, cfg.window, cfg.policy(), cfg.sparsity, solver=cfg.solver, tol=cfg.tol,
        lam_frac=cfg.lambda_frac, max_iter=cfg.max_iter,
        truth_useful=tones, truth_disturbance=disturbance,
    )


def run_experiment(cfg, out_dir, figures=True, config_name=None):
    """Run one experiment and write its artifacts into ``out_dir``.

    Returns ``(exit_code, manifest)``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    y, tones, chirps, noise = build_signals(cfg)
    m = cfg.window
    res = _case1(cfg, y, tones, chirps + noise)
    tf = res.tf

    artifacts.write_signal_csv(out / "input.csv", y)
    artifacts.write_tf_csv(out / "stft.csv", tf)
    artifacts.write_pgm(out / "stft.pgm", artifacts.magnitude_image(tf.values))
    artifacts.write_pgm(out / "stft_sorted.pgm", artifacts.magnitude_image(sorted_magnitudes(tf)))
    artifacts.write_mask_csv(out / "mask.csv", res.mask)
    artifacts.write_pgm(out / "mask.pgm", artifacts.mask_image(res.mask))
    artifacts.write_pgm(out / "trimmed_stft.pgm",
                        artifacts.magnitude_image(apply_mask(tf, res.mask).values))
    artifacts.write_spectrum_csv(out / "useful_fft.csv", dft(res.useful))
    artifacts.write_spectrum_csv(out / "disturbance_fft.csv", dft(res.disturbance))
    artifacts.write_signal_csv(out / "useful.csv", res.useful)
    artifacts.write_signal_csv(out / "disturbance.csv", res.disturbance)
    artifacts.write_json(out / "report.json", res.report.to_dict())

    metrics = artifacts.metrics_dict(res.metrics)
    metrics["disturbance_correlation"] = _nan_to_none(correlation(res.disturbance, chirps + noise))
    manifest = {
        "config": config_name,
        "seed": cfg.seed,
        "n_total": cfg.n_total,
        "window": m,
        "metrics": metrics,
    }
    converged = res.report.converged

    if figures:
        (out / "figures").mkdir(exist_ok=True)
        plotting.tf_panels(out / "figures" / "tf_panels.png", y, res.useful, res.disturbance,
                           res.mask, m)
        plotting.spectra_rows(out / "figures" / "spectra.png", [
            ("input", y), ("useful component", res.useful), ("disturbance", res.disturbance),
        ])

    if cfg.alpha is not None:
        _, chirp_res = separate_case2(
            y, m, cfg.policy(), cfg.chirp_policy(), cfg.alpha, cfg.sparsity, cfg.k_chirp,
            solver=cfg.solver, tol=cfg.tol, lam_frac=cfg.lambda_frac, max_iter=cfg.max_iter,
            truth_sin=tones, truth_chirp=chirps,
        )
        artifacts.write_signal_csv(out / "chirp.csv", chirp_res.useful)
        artifacts.write_spectrum_csv(out / "chirp_fft.csv", dft(chirp_res.useful))
        artifacts.write_pgm(out / "chirp_lpft.pgm", artifacts.magnitude_image(chirp_res.tf.values))
        artifacts.write_pgm(out / "chirp_mask.pgm", artifacts.mask_image(chirp_res.mask))
        artifacts.write_json(out / "chirp_report.json", chirp_res.report.to_dict())
        chirp_metrics = artifacts.metrics_dict(chirp_res.metrics)
        chirp_metrics["correlation"] = _nan_to_none(correlation(chirp_res.useful, chirps))
        manifest["chirp"] = {"alpha": cfg.alpha, "metrics": chirp_metrics}
        converged = converged and chirp_res.report.converged
        if figures:
            plotting.lpft_panels(out / "figures" / "lpft_panels.png", chirp_res.tf.values,
                                 chirp_res.mask, chirp_res.useful_spectrum)

    manifest["converged"] = bool(converged)
    files = sorted(p for p in out.rglob("*") if p.is_file() and p.name != "manifest.json")
    manifest["files"] = [
        {"path": p.relative_to(out).as_posix(), "sha256": artifacts.sha256(p)} for p in files
    ]
    artifacts.write_json(out / "manifest.json", manifest)
    return (EXIT_OK if converged else EXIT_NOCONV), manifest


def _nan_to_none(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else v


def _apply_param(cfg, param, value):
    if param == "removal_fraction":
        if not 0 <= value < 1:
            raise ConfigError(f"removal_fraction must lie in [0, 1), got {value}")
        return replace(cfg, removal_fraction=float(value))
    if param == "window":
        if int(value) != value or value <= 0 or cfg.n_total % int(value):
            raise ConfigError(f"window {value} does not divide n_total {cfg.n_total}")
        return replace(cfg, window=int(value))
    if param == "snr":
        _, tones, chirps, _ = build_signals(cfg)
        std = noise_std_for_snr(tones + chirps, value)
        return replace(cfg, noise=replace(cfg.noise, std_dev=std))
    raise ConfigError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


def _sweep_row(cfg):
    y, tones, chirps, noise = build_signals(cfg)
    t0 = time.perf_counter()
    res = _case1(cfg, y, tones, chirps + noise)
    runtime_ms = (time.perf_counter() - t0) * 1e3
    return (res.metrics.mse_useful, correlation(res.disturbance, chirps + noise),
            res.metrics.retained_fraction, runtime_ms)


def thread_cap():
    raw = os.environ.get("CHIRPSEP_THREADS")
    default = os.cpu_count() or 1
    if not raw:
        return default
    try:
        return max(1, min(int(raw), default))
    except ValueError:
        return 1


def sweep(cfg, param, values):
    """Metrics table (list of rows) for ``param`` over ``values``."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    configs = [_apply_param(cfg, param, v) for v in values]
    with ThreadPoolExecutor(max_workers=min(thread_cap(), len(configs))) as pool:
        results = list(pool.map(_sweep_row, configs))
    return [(v,) + r for v, r in zip(values, results)]


def format_sweep(param, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([param, "mse_useful", "disturbance_correlation", "retained_fraction", "runtime_ms"])
    for v, mse, rho, kept, ms in rows:
        w.writerow([repr(v), repr(float(mse)), repr(float(rho)), repr(float(kept)), f"{ms:.3f}"])
    return buf.getvalue()


def parse_grid(spec):
    try:
        lo, step, hi = (float(p) for p in spec.split(":"))
    except ValueError:
        raise ConfigError(f"grid must look like lo:step:hi, got {spec!r}") from None
    if step <= 0 or hi < lo:
        raise ConfigError(f"grid needs step > 0 and hi >= lo, got {spec!r}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(count)]


def _parse_values(raw, param):
    parts = [p for p in raw.split(",") if p.strip()]
    try:
        if param == "window":
            return [int(p) for p in parts]
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {raw!r}") from None


def resolve_config(path):
    """Path to a config file; bare bundled names resolve to package data."""
    p = Path(path)
    if not p.exists() and p.name in BUNDLED and p.parent == Path("."):
        return resources.files("chirpsep") / "data" / p.name
    return p


class _Parser(argparse.ArgumentParser):
    # usage errors share the config-error exit code; 2 means non-convergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _parser():
    parser = _Parser(
        prog="chirpsep",
        description="Separate sinusoids from chirp disturbances via L-statistics and sparse recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run one experiment and write artifacts")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="noise seed (overrides seed)")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    p = sub.add_parser("sweep", help="tabulate metrics over a parameter")
    p.add_argument("config")
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma separated values")
    p.add_argument("--out", help="also write sweep_<param>.csv into this directory")

    p = sub.add_parser("estimate-alpha", help="grid-search the chirp rate")
    p.add_argument("config")
    p.add_argument("--grid", required=True,
                   help="lo:step:hi (inclusive); write --grid=-0.01:0.001:0.01 for a negative lo")
    return parser


def main(argv=None):
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(resolve_config(args.config))
        if args.command == "run":
            if args.seed is not None:
                if not 0 <= args.seed < 2**64:
                    raise ConfigError(f"--seed must be a 64-bit unsigned integer, got {args.seed}")
                cfg = cfg.with_seed(args.seed)
            out = args.out or cfg.output_dir
            code, manifest = run_experiment(cfg, out, figures=not args.no_figures,
                                            config_name=Path(args.config).name)
            status = "converged" if code == EXIT_OK else "did not converge"
            print(f"{out}: {len(manifest['files']) + 1} artifacts, solver {status}")
            return code
        if args.command == "sweep":
            rows = sweep(cfg, args.param, _parse_values(args.values, args.param))
            table = format_sweep(args.param, rows)
            sys.stdout.write(table)
            if args.out:
                Path(args.out).mkdir(parents=True, exist_ok=True)
                (Path(args.out) / f"sweep_{args.param}.csv").write_text(table)
            return EXIT_OK
        grid = parse_grid(args.grid)
        y, _, _, _ = build_signals(cfg)
        alpha = estimate_chirp_rate(y, cfg.window, grid)
        print(json.dumps({"alpha": alpha, "grid_points": len(grid)}))
        return EXIT_OK
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
