import json

import numpy as np
import pytest

from pvalfn.cli import EXIT_CONFIG, EXIT_NUMERIC, main, parse_region, read_curve

TEN_SEVENS = ",".join(["7"] * 10)
UNIF = "1.3,6.2,4.4,0.5,7.0,3.1,2.2,5.9,6.8,4.0"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_curve_normal_peak(tmp_path, capsys):
    out = tmp_path / "normal.csv"
    code, _, _ = run(capsys, "curve", "--model", "normal-known-var", "--inline", TEN_SEVENS, "--out", str(out))
    assert code == 0
    curve, meta = read_curve(out.read_text())
    i = int(np.argmax(curve.p))
    print("peak", curve.grid[i], curve.p[i], "rows", len(curve))
    assert meta["model"] == "normal-known-var" and meta["method"] == "exact"
    assert abs(curve.grid[i, 0] - 7.0) < 0.05 and curve.p[i] > 0.99
    assert curve.p.min() < 0.001


def test_curve_binomial_stairs(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _, _ = run(capsys, "curve", "--model", "binomial", "--inline", "13/20", "--grid", "0.3:0.95:651",
                     "--out", str(out))
    assert code == 0
    curve, _ = read_curve(out.read_text())
    flats = int(np.sum(np.diff(curve.p) == 0.0))
    print("flat steps in binomial curve:", flats)
    assert flats > 20


def test_curve_uniform_zero_below_max(tmp_path, capsys):
    out = tmp_path / "u.csv"
    code, _, _ = run(capsys, "curve", "--model", "uniform", "--inline", UNIF, "--grid", "5:12:141", "--out", str(out))
    assert code == 0
    curve, _ = read_curve(out.read_text())
    below = curve.grid[:, 0] < 7.0
    assert np.all(curve.p[below] == 0.0) and np.all(curve.p[~below] > 0.0)


def test_curve_two_dim_grid(tmp_path, capsys):
    out = tmp_path / "se.csv"
    data = tmp_path / "y.csv"
    y = 7.0 + 3.0 * np.random.default_rng(1).exponential(size=25)
    data.write_text("y\n" + "\n".join(repr(float(v)) for v in y) + "\n")
    code, _, _ = run(capsys, "curve", "--model", "shifted-exponential", "--data", str(data), "--method", "mc",
                     "--estimator", "pivot-reuse", "--mc-samples", "2000", "--grid", "5:8:5", "--grid", "1:6:4",
                     "--out", str(out))
    assert code == 0
    curve, meta = read_curve(out.read_text())
    assert curve.grid.shape == (20, 2)
    assert np.all(curve.p[curve.grid[:, 0] > y.min()] == 0.0)
    assert meta["estimator"] == "pivot-reuse"


def test_csv_json_agree(tmp_path, capsys):
    a, b = tmp_path / "c.csv", tmp_path / "c.json"
    args = ["curve", "--model", "exponential", "--inline", TEN_SEVENS, "--method", "mc", "--mc-samples", "500",
            "--grid", "3:15:13"]
    assert run(capsys, *args, "--out", str(a))[0] == 0
    assert run(capsys, *args, "--out", str(b), "--format", "json")[0] == 0
    ca, ma = read_curve(a.read_text())
    cb, mb = read_curve(b.read_text())
    assert ma == mb
    assert np.max(np.abs(ca.grid - cb.grid)) <= 1e-12
    assert np.max(np.abs(ca.p - cb.p)) <= 1e-12 and np.max(np.abs(ca.std_err - cb.std_err)) <= 1e-12


def test_metadata_reproduces_file(tmp_path, capsys):
    first = tmp_path / "first.csv"
    assert run(capsys, "curve", "--model", "exponential", "--inline", TEN_SEVENS, "--method", "mc",
               "--mc-samples", "400", "--seed", "31", "--grid", "4:12:9", "--out", str(first))[0] == 0
    _, meta = read_curve(first.read_text())
    again = tmp_path / "again.csv"
    argv = ["curve", "--model", meta["model"], "--inline", meta["inline"], "--method", meta["method"],
            "--mc-samples", str(meta["M"]), "--seed", str(meta["seed"]), "--estimator", meta["estimator"],
            "--grid", "4:12:9", "--out", str(again)]
    assert run(capsys, *argv)[0] == 0
    assert first.read_bytes() == again.read_bytes()


def test_ci_exponential(tmp_path, capsys):
    out = tmp_path / "ci.json"
    code, text, _ = run(capsys, "ci", "--model", "exponential", "--inline", TEN_SEVENS, "--out", str(out),
                        "--format", "json")
    print(text)
    assert code == 0 and "95% region (exact)" in text
    seg = json.loads(out.read_text())["segments"][0]
    assert abs(seg["lo"] - 3.98) <= 0.02 and abs(seg["hi"] - 14.07) <= 0.02


def test_ci_nesting(tmp_path, capsys):
    recs = []
    for a in ("0.05", "0.5"):
        out = tmp_path / f"ci{a}.json"
        assert run(capsys, "ci", "--model", "binomial", "--inline", "13/20", "--alpha", a, "--out", str(out),
                   "--format", "json")[0] == 0
        recs.append(json.loads(out.read_text())["segments"][0])
    wide, narrow = recs
    assert wide["lo"] <= narrow["lo"] and narrow["hi"] <= wide["hi"]


def test_ci_random_effects_small(capsys):
    code, text, _ = run(capsys, "ci", "--model", "normal-random-effects", "--data", "eight-schools", "--mc-samples", "2000")
    print(text)
    assert code == 0 and text.splitlines()[0].split(": ")[1].startswith("[0, ")


def test_test_command(capsys):
    code, text, _ = run(capsys, "test", "--model", "normal-known-var", "--inline", TEN_SEVENS, "--null", "<=6")
    assert code == 0 and "p = 0.0015654" in text and "reject at" in text
    code, text, _ = run(capsys, "test", "--model", "normal-known-var", "--inline", TEN_SEVENS, "--null", "7")
    assert code == 0 and "p = 1 " in text and "do not reject" in text
    code, text, _ = run(capsys, "test", "--model", "normal-random-effects", "--data", "eight-schools", "--null", "0",
                        "--mc-samples", "2000")
    assert code == 0 and "do not reject" in text


def test_estimate(capsys):
    code, text, _ = run(capsys, "estimate", "--model", "binomial", "--inline", "13/20")
    assert code == 0 and "theta = 0.65" in text
    code, text, _ = run(capsys, "estimate", "--model", "exponential", "--inline", "3,5,13")
    assert "theta = 7" in text


def test_coverage_command(capsys):
    code, text, _ = run(capsys, "coverage", "--model", "normal-known-var", "--truth", "0", "--n-obs", "10",
                        "--replicates", "500", "--seed", "3")
    print(text)
    assert code == 0 and "coverage of the 95% region" in text and "P(p <= 0.05)" in text


def test_config_file_and_override(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "binomial", "inline": "13/20", "alpha": 0.5}))
    _, text_file, _ = run(capsys, "ci", "--config", str(cfg))
    _, text_flag, _ = run(capsys, "ci", "--config", str(cfg), "--alpha", "0.05")
    assert text_file.startswith("50% region") and text_flag.startswith("95% region")


def test_env_seed(tmp_path, capsys, monkeypatch):
    outs = []
    for seed in ("5", "5", "6"):
        monkeypatch.setenv("PVALFN_SEED", seed)
        out = tmp_path / f"s{len(outs)}.csv"
        run(capsys, "curve", "--model", "exponential", "--inline", TEN_SEVENS, "--method", "mc",
            "--mc-samples", "300", "--grid", "4:9:4", "--out", str(out))
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] and outs[0] != outs[2]
    assert b"# seed: 5" in outs[0]


@pytest.mark.parametrize(
    "argv",
    [
        ["ci", "--model", "cauchy", "--inline", "1"],
        ["ci", "--model", "exponential"],
        ["ci", "--model", "exponential", "--inline", "1,2", "--alpha", "1.5"],
        ["test", "--model", "exponential", "--inline", "1,2"],
        ["test", "--model", "exponential", "--inline", "1,2", "--null", "abc"],
        ["curve", "--model", "exponential", "--inline", "1,2", "--grid", "1:2"],
        ["ci", "--model", "binomial", "--inline", "25/20"],
        ["ci", "--model", "exponential", "--data", "/nonexistent.csv"],
        ["ci", "--model", "normal-random-effects", "--inline", "1,2,3"],
        ["coverage", "--model", "exponential", "--truth", "-1", "--n-obs", "5"],
        ["ci", "--model", "binomial", "--inline", "5/20", "--method", "mc", "--estimator", "pivot-reuse"],
    ],
)
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    print(err.strip().splitlines()[-1])
    assert code == EXIT_CONFIG and err


def test_numerical_failure_exit(capsys):
    code, _, err = run(capsys, "ci", "--model", "normal-known-var", "--inline", "1", "--method", "exact",
                       "--const", "sigma=1")
    assert code == 0
    code, _, err = run(capsys, "ci", "--model", "normal-random-effects", "--data", "eight-schools", "--method", "exact")
    assert code == EXIT_NUMERIC and "numerical failure" in err


def test_parse_region():
    r = parse_region("<=6", 1)
    assert r.lo == (-np.inf,) and r.hi == (6.0,)
    assert parse_region("5:8", 1).hi == (8.0,)
    assert parse_region("1,2", 2).is_point
    assert parse_region(":6,0:1", 2).lo == (-np.inf, 0.0)
