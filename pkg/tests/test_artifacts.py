import json

import numpy as np
import pytest

from chirpsep import artifacts
from chirpsep.lstat import TrimMask, TrimPolicy, trim
from chirpsep.pipeline import separate_case1
from chirpsep.synth import ChirpSpec, SinusoidSpec, gen_chirp, gen_sinusoid
from chirpsep.transforms import TFMatrix, stft
from conftest import crandn


def test_signal_csv_round_trip(tmp_path, rng):
    x = crandn(rng, 16)
    artifacts.write_signal_csv(tmp_path / "x.csv", x)
    lines = (tmp_path / "x.csv").read_text().splitlines()
    assert lines[0] == "index,re,im"
    assert len(lines) == 17
    np.testing.assert_array_equal(artifacts.read_signal_csv(tmp_path / "x.csv"), x)


def test_spectrum_csv_round_trip(tmp_path, rng):
    X = crandn(rng, 8)
    artifacts.write_spectrum_csv(tmp_path / "X.csv", X)
    assert (tmp_path / "X.csv").read_text().startswith("k,re,im\n")
    np.testing.assert_array_equal(artifacts.read_spectrum_csv(tmp_path / "X.csv"), X)


def test_tf_csv_round_trip(tmp_path, rng):
    tf = TFMatrix(crandn(rng, 4, 3))
    artifacts.write_tf_csv(tmp_path / "tf.csv", tf)
    lines = (tmp_path / "tf.csv").read_text().splitlines()
    assert lines[0] == "k,window,re,im"
    assert lines[2].startswith("0,1,")
    np.testing.assert_array_equal(artifacts.read_tf_csv(tmp_path / "tf.csv").values, tf.values)


def test_mask_csv_round_trip(tmp_path, rng):
    mask, _ = trim(TFMatrix(crandn(rng, 4, 8)), TrimPolicy(0.25, 0.25))
    artifacts.write_mask_csv(tmp_path / "m.csv", mask)
    assert (tmp_path / "m.csv").read_text().startswith("k,window,kept\n")
    np.testing.assert_array_equal(artifacts.read_mask_csv(tmp_path / "m.csv").kept, mask.kept)


def test_csv_header_checked(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        artifacts.read_signal_csv(tmp_path / "bad.csv")


def test_magnitude_image_scaling():
    img = artifacts.magnitude_image(np.array([[0, 9], [99, 0]]))
    assert img.dtype == np.uint8
    assert img[1, 0] == 255 and img[0, 0] == 0
    # log10(1 + 9) / log10(1 + 99) = 0.5
    assert img[0, 1] == 128
    assert np.all(artifacts.magnitude_image(np.zeros((2, 2))) == 0)


def test_pgm_round_trip(tmp_path):
    img = np.arange(12, dtype=np.uint8).reshape(3, 4) * 20
    artifacts.write_pgm(tmp_path / "a.pgm", img)
    data = (tmp_path / "a.pgm").read_bytes()
    assert data.startswith(b"P5\n4 3\n255\n")
    np.testing.assert_array_equal(artifacts.read_pgm(tmp_path / "a.pgm"), img)


def test_mask_pgm_is_binary(tmp_path):
    mask = TrimMask(np.array([[True, False], [False, True]]))
    artifacts.write_pgm(tmp_path / "m.pgm", artifacts.mask_image(mask))
    np.testing.assert_array_equal(artifacts.read_pgm(tmp_path / "m.pgm"), [[255, 0], [0, 255]])


def test_tf_pgm_rows_are_frequency_bins(tmp_path):
    y = gen_sinusoid(SinusoidSpec(1.0, 3 * 4, 0.0), 64)
    artifacts.write_pgm(tmp_path / "s.pgm", artifacts.magnitude_image(stft(y, 16).values))
    img = artifacts.read_pgm(tmp_path / "s.pgm")
    assert img.shape == (16, 4)
    assert np.all(img[3] == 255)
    assert np.all(np.delete(img, 3, axis=0) == 0)


def test_write_result_manifest(tmp_path):
    tone = gen_sinusoid(SinusoidSpec(1.0, 12, 0.0), 128)
    chirp = gen_chirp(ChirpSpec(1.0, 64, 0.004, 0.0), 128)
    res = separate_case1(tone + chirp, 16, TrimPolicy.from_removal(0.5), 1, truth_useful=tone)
    manifest = artifacts.write_result(tmp_path, res, prefix="case1_")
    for name in manifest["files"].values():
        assert (tmp_path / name).exists()
    report = json.loads((tmp_path / "case1_report.json").read_text())
    assert report["converged"] is True
    assert [b["k"] for b in report["nonzero_bins"]] == [12]
    assert manifest["metrics"]["mse_useful"] < 1e-3
    assert manifest["metrics"]["mse_disturbance"] is None
    json.dumps(manifest)
