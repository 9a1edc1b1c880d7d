import json
import math
from pathlib import Path

import pytest

from smalltime import cli, config
from smalltime.asymptotics import stable_constant

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


STABLE = {"model": {"type": "FrozenLevy", "s0": 0.0,
                    "jumps": {"type": "Stable", "alpha": 1.5, "f_plus": 1, "f_minus": 1}}}


def test_analyze_heston(capsys):
    code, out, _ = run(capsys, "analyze", CONFIGS / "heston.json")
    assert code == 0
    rep = json.loads(out)
    assert rep["classification"]["order"]["tag"] == "SqrtT"
    assert rep["classification"]["coefficient"] == pytest.approx(100 * 0.2 / math.sqrt(2 * math.pi))
    assert rep["classification"]["implied_vol_asymptote"]["coefficient"] == pytest.approx(0.2)


def test_analyze_cgmy(capsys):
    code, out, _ = run(capsys, "analyze", CONFIGS / "cgmy.json")
    rep = json.loads(out)
    assert code == 0
    assert rep["classification"]["order"] == {"tag": "PowerT", "exponent": pytest.approx(2 / 3)}
    assert rep["classification"]["coefficient"] == pytest.approx(stable_constant(1.5, 1, 1) / 2)


def test_analyze_trivial(capsys, tmp_path):
    p = write(tmp_path, "t.json", {"model": {"type": "FrozenLevy", "s0": 1.0}})
    code, out, _ = run(capsys, "analyze", p)
    assert code == 0 and json.loads(out)["classification"]["order"]["tag"] == "Trivial"


def test_model_echo_round_trips(capsys):
    for name in ("brownian", "cgmy", "heston"):
        _, out, _ = run(capsys, "analyze", CONFIGS / f"{name}.json")
        rep = json.loads(out)
        echoed, strike = config.parse_config({"model": rep["model"], "strike": rep["strike"]})
        assert (echoed, strike) == config.load_config(CONFIGS / f"{name}.json")


def test_config_error_exit_code(capsys, tmp_path):
    p = write(tmp_path, "bad.json", {"model": {"type": "Heston", "s0": 100, "v0": -1}})
    code, out, err = run(capsys, "analyze", p)
    assert code == 1 and out == ""
    assert json.loads(err)["pointer"] == "/model/v0"


def test_usage_error_exit_code(capsys):
    assert run(capsys, "verify")[0] == 1
    assert run(capsys, "implied-vol", "--price", "1")[0] == 1
    assert run(capsys, "verify", CONFIGS / "brownian.json", "--grid", "8:4")[0] == 1


def test_numeric_error_exit_code(capsys):
    code, _, err = run(capsys, "implied-vol", "--price", "101", "--s0", "100", "--maturity", "1")
    assert code == 2 and json.loads(err)["error"] == "PriceOutOfRange"


def test_verify_brownian_defaults(capsys, tmp_path):
    csv_path = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "verify", CONFIGS / "brownian.json", "--csv-out", csv_path)
    rep = json.loads(out)
    assert rep["verdict"] == "CONSISTENT" and code == 0
    assert len(rep["rows"]) == 5
    assert csv_path.read_text().splitlines()[0] == "T,mc_value,half_width,asymptote_value,ratio"
    code, out, _ = run(capsys, "fit-rate", "--csv", csv_path)
    refit = json.loads(out)
    assert code == 0
    assert refit["half_widths"] == [r["half_width"] for r in rep["rows"]]
    assert refit["fit"]["exponent_hat"] == pytest.approx(rep["fit"]["exponent_hat"], rel=1e-12)


def test_verify_wrong_coefficient(capsys):
    code, out, _ = run(capsys, "verify", CONFIGS / "brownian.json", "--expect-coeff", "0.1")
    assert code == 3 and json.loads(out)["verdict"] == "INCONSISTENT"


def test_verify_underpowered_stable(capsys, tmp_path):
    p = write(tmp_path, "stable.json", STABLE)
    code, out, _ = run(capsys, "verify", p, "--paths", "1000")
    assert code == 3 and json.loads(out)["verdict"] == "INCONCLUSIVE"


def test_verdict_rules():
    rows = [{"ratio": 1.0, "half_width": 0.001, "asymptote_value": 1.0}] * 3

    class Fit:
        exponent_hat = 0.5
    assert cli.verdict(rows, Fit, 0.5, 0.05, 0.05) == cli.CONSISTENT
    assert cli.verdict(rows, Fit, 0.6, 0.05, 0.05) == cli.INCONSISTENT
    off = rows[:2] + [{"ratio": 1.2, "half_width": 0.3, "asymptote_value": 1.0}]
    assert cli.verdict(off, Fit, 0.5, 0.05, 0.05) == cli.INCONCLUSIVE


def test_mc_price_byte_identical(capsys, tmp_path):
    args = ("mc-price", CONFIGS / "heston.json", "--maturity", "0.01", "--paths", "50000",
            "--seed", "7")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--workers", "4")
    out = tmp_path / "r.json"
    _, c, _ = run(capsys, *args, "--out", out)
    assert a == b == c == out.read_text()
    assert json.loads(a)["estimate"]["seed"] == 7


def test_seed_from_environment(capsys, monkeypatch):
    args = ("mc-price", CONFIGS / "brownian.json", "--maturity", "0.01", "--paths", "5000")
    monkeypatch.setenv("SMALLTIME_SEED", "42")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--seed", "42")
    _, c, _ = run(capsys, *args, "--seed", "43")
    assert a == b != c
    monkeypatch.setenv("SMALLTIME_SEED", "abc")
    assert run(capsys, *args)[0] == 1


def test_mc_price_stable_uses_robust_estimator(capsys, tmp_path):
    p = write(tmp_path, "stable.json", STABLE)
    code, out, _ = run(capsys, "mc-price", p, "--maturity", "0.01", "--paths", "100000")
    assert code == 0
    assert json.loads(out)["estimate"]["estimator"] == {"type": "MedianOfMeans", "blocks": 64}


def test_implied_vol(capsys):
    code, out, _ = run(capsys, "implied-vol", "--price", "0", "--s0", "100", "--maturity", "0.5")
    assert code == 0 and json.loads(out)["sigma_impl"] == 0.0
    _, out, _ = run(capsys, "implied-vol", "--price", "100", "--s0", "100", "--maturity", "0.5")
    rep = json.loads(out)
    assert rep["infinite"] is True and rep["sigma_impl"] is None


def test_fit_rate_csv(capsys, tmp_path):
    p = tmp_path / "curve.csv"
    p.write_text("T,value\n" + "".join(f"{2.0 ** -k!r},{3 * 2.0 ** (-0.7 * k)!r}\n"
                                       for k in range(4, 10)))
    code, out, _ = run(capsys, "fit-rate", "--csv", p)
    fit = json.loads(out)["fit"]
    assert code == 0
    assert fit["coefficient_hat"] == pytest.approx(3, abs=1e-10)
    assert fit["exponent_hat"] == pytest.approx(0.7, abs=1e-10)
    p.write_text("".join(f"{2.0 ** -k!r},{k * 2.0 ** -k * math.log(2)!r},1e-9\n"
                         for k in range(6, 13)))
    _, out, _ = run(capsys, "fit-rate", "--csv", p, "--model-class", "PowerWithLog")
    assert json.loads(out)["fit"]["coefficient_hat"] == pytest.approx(1, abs=1e-10)
    p.write_text("T,value\n0.1,x\n")
    assert run(capsys, "fit-rate", "--csv", p)[0] == 1
    p.write_text("time,price\n0.1,0.2\n")
    code, _, err = run(capsys, "fit-rate", "--csv", p)
    assert code == 1 and json.loads(err)["pointer"] == "/1"
