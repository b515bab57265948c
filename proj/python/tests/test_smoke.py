import json
import math

import numpy as np
import pytest

import disslab


def grid(n):
    x = 2 * np.pi * np.arange(n) / n
    return np.meshgrid(x, x, indexing="ij")


def test_shells_sum_to_the_field():
    X, Y = grid(64)
    u = np.sin(3 * X) * np.cos(5 * Y) + 0.2 * np.cos(X + 2 * Y)
    total = sum(disslab.shell(u, q) for q in range(-1, disslab.q_max(64) + 1))
    assert np.max(np.abs(total - u)) < 1e-12


def test_single_mode_in_one_shell():
    X, _ = grid(128)
    u = np.cos(7 * X)
    lam, val = disslab.shell_spectrum(u, 0.0, 2.0, base=5)
    assert len(lam) == len(val)
    assert val[2] > 0.1  # q = 1
    assert all(abs(v) < 1e-12 for i, v in enumerate(val) if i != 2)


def test_checkerboard_and_one_stage():
    rho = disslab.checkerboard(1, 256)
    assert abs(rho.mean()) < 1e-12
    assert math.isclose(float(np.sqrt(np.mean(rho**2))) * 2 * np.pi, 1.0, rel_tol=1e-12)
    out, contraction, drift = disslab.mix_stage(rho, 0)
    assert out.shape == rho.shape
    assert contraction <= 0.5
    assert drift <= 1e-4


def test_schedule_identity():
    s = disslab.schedule(4)
    assert math.isclose(s["nu"] * s["Lambda"] ** 2 * s["tau"], 4.0, rel_tol=1e-12)
    assert len(s["nodes"]) == 5


def test_cutoffs_partition():
    T, _ = disslab.cutoffs(0.0, 4.0, 4, 10, [])
    _, s = disslab.cutoffs(0.0, 4.0, 4, 10, [T * f for f in (0.0, 0.3, 0.6, 0.9)])
    assert math.isclose(T, 2.0**-5)
    assert all(abs(x - 1) < 1e-12 for x in s)


def test_config_errors_raise():
    with pytest.raises(disslab.DisslabError, match="unknown_key"):
        disslab.config_hash("default", ["lp.nope=1"])
    assert disslab.config_hash() == disslab.config_hash()


def test_mix_command(tmp_path):
    rep = disslab.mix(str(tmp_path), set=["grid=256", "last_stage=0"])
    assert rep["command"] == "mix"
    assert rep["pass"]
    on_disk = json.loads((tmp_path / "report.json").read_text())
    assert on_disk["rows"] == rep["rows"]
