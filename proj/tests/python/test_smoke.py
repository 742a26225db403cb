import json
import math
import os
import subprocess

import numpy as np
import pytest

import muskat


def small_config(**kw):
    c = muskat.SimConfig()
    c.n1 = 32
    c.n2_plus = 17
    c.n2_minus = 17
    for k, v in kw.items():
        setattr(c, k, v)
    return c


def test_version_and_dispersion():
    assert muskat.__version__
    assert muskat.dispersion_rate(1, 1.0, 1.0) == pytest.approx(-math.tanh(2.0), rel=1e-14)
    with pytest.raises(ValueError):
        muskat.dispersion_rate(0, 1.0, 1.0)


def test_spectral_helpers():
    x = muskat.nodes(32)
    assert x[0] == pytest.approx(-math.pi)
    np.testing.assert_allclose(muskat.deriv(np.cos(x), 1), -np.sin(x), atol=1e-13)
    assert muskat.sobolev_norm(np.cos(x), 0) ** 2 == pytest.approx(math.pi)
    np.testing.assert_allclose(muskat.mollify(np.cos(x), 0.5), math.exp(-0.25) * np.cos(x), atol=1e-14)


def test_solve_head_and_picard_agree():
    c = small_config(beta_minus=0.5)
    x = muskat.nodes(32)
    h, f = 0.004 * np.cos(x), 0.1 * np.cos(x)
    a = muskat.solve_head(c, h, f)
    b = muskat.solve_head(c, h, f, picard=True)
    assert a["p_upper"].shape == (17, 32)
    assert np.max(np.abs(a["p_upper"] - b["p_upper"])) < 1e-8
    np.testing.assert_array_equal(a["p_upper"][-1], h)
    assert abs(np.sum(a["gamma_trace_w2"])) < 1e-9


def test_run_decays_and_conserves():
    c = small_config(t_end=0.5)
    x = muskat.nodes(32)
    r = muskat.run(c, 0.05 * np.cos(x), np.zeros(32))
    assert r["termination"] == "completed"
    assert r["t"] == 0.5
    reps = r["reports"]
    assert reps[-1]["l2_h"] < reps[0]["l2_h"]
    assert all(abs(q["mean_h"]) < 1e-12 for q in reps)


def test_gap_violation_is_reported():
    c = small_config()
    x = muskat.nodes(32)
    r = muskat.run(c, 0.6 * np.cos(x), -0.5 * np.cos(x))
    assert r["termination"] == "gap_violation"
    assert r["reports"] == []


def test_bad_config_raises():
    c = small_config(beta_plus=-1.0)
    with pytest.raises(muskat.ConfigError):
        c.validate()


def test_cmd_run_snapshot(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n1": 16, "n2_plus": 9, "n2_minus": 5, "t_end": 0.1,
                               "h0": [{"k": 1, "cos": 0.05}], "output_dir": "out"}))
    rc, out, err = muskat.cmd_run(str(cfg))
    assert rc == 0, err
    man = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert man["termination"] == "completed"
    snap = muskat.read_snapshot(tmp_path / "out" / man["files"]["snapshots"][0])
    assert snap["p_upper"].shape == (9, 16)
    assert snap["p_lower"].shape == (5, 16)
    np.testing.assert_array_equal(snap["p_upper"][-1], snap["h"])
    header = (tmp_path / "out" / "timeseries.csv").read_text().splitlines()[0]
    assert header == "t,l2_h,h2_h,h2p5_h,scriptE,scriptD,rt_margin,l2_law_residual,coupling_ratio"


@pytest.mark.skipif("MUSKAT_CLI" not in os.environ, reason="CLI path not provided")
@pytest.mark.parametrize("threads", ["0", "1", "2"])
def test_cli_honours_thread_cap(threads):
    env = dict(os.environ, MUSKAT_THREADS=threads)
    p = subprocess.run([os.environ["MUSKAT_CLI"], "dispersion", "1", "0.5", "3"],
                       capture_output=True, text=True, env=env)
    assert p.returncode == 0
    lines = p.stdout.splitlines()
    assert lines[0] == "k,sigma"
    assert float(lines[1].split(",")[1]) == pytest.approx(muskat.dispersion_rate(1, 1.0, 0.5), rel=1e-15)


@pytest.mark.skipif("MUSKAT_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_usage_errors(tmp_path):
    cli = os.environ["MUSKAT_CLI"]
    assert subprocess.run([cli, "run", str(tmp_path / "nope.json")], capture_output=True).returncode == 1
    assert subprocess.run([cli, "dispersion", "1", "1", "0"], capture_output=True).returncode == 1
    assert subprocess.run([cli], capture_output=True).returncode == 1
