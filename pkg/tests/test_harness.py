import json

import numpy as np
import pytest

from faberlab import _io
from faberlab.harness import (EXIT_ASSERT, EXIT_CONFIG, EXIT_OK, EXPERIMENTS, SCHEMA_VERSION,
                              ConfigError, check, config_hash, default_config_text, fk_scan,
                              largest_component_share, load_config, realizing_subsequence,
                              run_cli, run_experiment, threads)
from faberlab.series import LaurentTail

ORACLE = """[experiment]
name = oracle-suite

[params]
n_tails = 3
identity_kmax = 10
contour_kmax = 5
cross_ks = 5, 10
far_kmax = 10
"""

SEGMENT = """[experiment]
name = segment-arcsine

[params]
ks = 5, 10, 20
real_check_kmax = 20

[thresholds]
cdf_final = 0.2
"""

TRIPOD = """[experiment]
name = tripod

[params]
ks = 10, 20
"""


def test_registry():
    assert set(EXPERIMENTS) == {"segment-arcsine", "tripod", "collinear-segment",
                                "nu-counterexample", "delta-map", "oracle-suite"}


def test_defaults_round_trip():
    for name in EXPERIMENTS:
        resolved = load_config(default_config_text(name))
        assert resolved["params"] == EXPERIMENTS[name].params
        assert resolved["thresholds"] == EXPERIMENTS[name].thresholds


@pytest.mark.parametrize("text", [
    "[experiment]\nname = nope\n",
    "[experiment]\nname = tripod\n[params]\nbogus = 1\n",
    "[experiment]\nname = tripod\n[thresholds]\nbogus = 1\n",
    "[experiment]\nname = tripod\n[extra]\nx = 1\n",
    "[experiment]\nname = tripod\ncolor = red\n",
    "[params]\nks = 1\n",
    "[experiment]\nname = tripod\n[params]\nleg_spacing = wide\n",
    "[experiment]\nname = tripod\n[params]\nstraight_legs = maybe\n",
    "not an ini file",
])
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        load_config(text)


def test_hash_ignores_formatting():
    a = load_config("[experiment]\nname = tripod\n")
    b = load_config("[experiment]\nname=tripod\n[params]\nks = 30, 60, 90, 120\n")
    assert config_hash(a) == config_hash(b)
    c = load_config("[experiment]\nname = tripod\n[params]\nks = 30, 60\n")
    assert config_hash(a) != config_hash(c)


def test_assertion_ops():
    assert check("a", 1.0, "<=", 1.0).passed
    assert not check("a", 1.0, "<", 1.0).passed
    assert not check("a", float("nan"), "<=", 1.0).passed
    assert check("a", True, "==", 1, "exact").observed == 1


def test_threads_env(monkeypatch):
    monkeypatch.setenv("FABERLAB_THREADS", "3")
    assert threads() == 3
    monkeypatch.setenv("FABERLAB_THREADS", "x")
    with pytest.raises(ConfigError):
        threads()


def test_realizing_subsequence():
    vals = np.array([1, 3, 2, 2, 5, 1, 1, 4, 1, 0.5])
    assert realizing_subsequence(vals, 1, 10, 2, halfwidth=1) == [5, 8]
    assert realizing_subsequence(vals, 1, 10, 5, halfwidth=1) == [2, 5, 8]


def test_fk_scan_segment():
    # |F_k(2)|^{1/k} -> (2 + sqrt 3) / 2
    v = fk_scan(LaurentTail([0, 0.25]), 2.0, 200)
    assert abs(v[-1] - (2 + 3**0.5) / 2) < 1e-2


def test_component_share():
    m = np.zeros((5, 5), bool)
    m[0, :3] = True
    m[4, 4] = True
    assert largest_component_share(m) == 0.75
    assert largest_component_share(np.zeros((2, 2), bool)) == 0.0


def test_oracle_run_layout(tmp_path):
    out, summary = run_experiment(ORACLE, tmp_path)
    assert out.name.startswith("oracle-suite-")
    assert summary["schema_version"] == SCHEMA_VERSION
    assert summary["passed"]
    for a in summary["assertions"]:
        assert set(a) == {"name", "observed", "threshold", "op", "tag", "passed"}
        assert a["tag"] in ("exact", "calibrated", "reference")
    assert sorted(p.name for p in out.iterdir()) == summary["files"]
    assert (out / "config.cfg").read_text() == ORACLE


def test_exit_codes(tmp_path):
    good = tmp_path / "good.cfg"
    good.write_text(ORACLE)
    assert run_cli(good, tmp_path / "o")[0] == EXIT_OK
    strict = tmp_path / "strict.cfg"
    strict.write_text(ORACLE + "\n[thresholds]\nfar_gap = 1e-30\n")
    assert run_cli(strict, tmp_path / "o")[0] == EXIT_ASSERT
    bad = tmp_path / "bad.cfg"
    bad.write_text(ORACLE + "typo = 3\n")
    assert run_cli(bad, tmp_path / "o")[0] == EXIT_CONFIG
    assert run_cli(tmp_path / "missing.cfg", tmp_path / "o")[0] == EXIT_CONFIG


def test_segment_rows_and_determinism(tmp_path):
    out1, s1 = run_experiment(SEGMENT, tmp_path / "a")
    out2, s2 = run_experiment(SEGMENT, tmp_path / "b")
    rows = _io.read_csv(out1 / "zeros.csv")
    assert len(rows) == 5 + 10 + 20
    assert out1.name == out2.name
    for f in s1["files"]:
        assert (out1 / f).read_bytes() == (out2 / f).read_bytes()
    conv = _io.read_csv(out1 / "convergence.csv")
    assert [int(r["k"]) for r in conv] == [5, 10, 20]
    # 17 significant digits
    assert all(len(r["re"].lstrip("-").replace(".", "").lstrip("0").split("e")[0]) <= 17 for r in rows)


def test_tripod_emits_three_legs(tmp_path):
    out, summary = run_experiment(TRIPOD, tmp_path)
    legs = json.loads((out / "tripod.json").read_text())
    assert len(legs) == 3
    names = {a["name"] for a in summary["assertions"]}
    assert {"vertex_image_spread", "center_error", "leg_count"} <= names


def test_separate_directories(tmp_path):
    a, _ = run_experiment(ORACLE, tmp_path)
    b, _ = run_experiment(ORACLE.replace("n_tails = 3", "n_tails = 2"), tmp_path)
    assert a != b and a.exists() and b.exists()
