import csv
import io
import json
import math

import pytest

from isosobolev.cli import read_function_csv, run, validate_report
from isosobolev.constants import product_b1_closed_form
from isosobolev.specfn import k_qp, sobolev_best_constant


def _run(tmp_path, *argv, env=None, name="out.json"):
    out = tmp_path / name
    code = run(list(argv) + ["--out", str(out)], environ=env or {})
    text = out.read_text() if out.exists() else None
    return code, text


def _json(text):
    return validate_report(json.loads(text))


def test_constants_euclidean(tmp_path):
    code, text = _run(tmp_path, "constants", "--profile", "euclidean", "--N", "3", "--p", "2")
    assert code == 0
    rep = _json(text)
    res = rep["result"]
    assert res["C2"] == pytest.approx(4.0, rel=1e-8)
    assert res["B2"] == pytest.approx(1.0, rel=1e-8)
    assert res["C1"] == pytest.approx(sobolev_best_constant(3, 2.0), rel=1e-8)
    assert rep["status"] == "ok" and rep["command"] == "constants"


def test_constants_product_closed_form(tmp_path):
    code, text = _run(tmp_path, "constants", "--profile", "product:m=1,k=3,a=1,b=1", "--p", "2")
    assert code == 0
    res = _json(text)["result"]
    assert res["B1"] == pytest.approx(product_b1_closed_form(1, 3, 2.0, 1.0), rel=1e-7)
    assert res["B1_attained_at"]["attained"] == "limit_at_infinity"


def test_constants_with_q(tmp_path):
    code, text = _run(tmp_path, "constants", "--profile", "euclidean:N=4", "--p", "2", "--q", "1")
    res = _json(text)["result"]
    assert code == 0
    assert res["hardy_sobolev_constant"] == pytest.approx(res["C1"] ** 2 * math.sqrt(res["C2"]))


def test_non_hyperbolic_exit_2(tmp_path, capsys):
    code, text = _run(tmp_path, "constants", "--profile", "product:m=1,k=2", "--p", "2")
    assert code == 2
    rep = _json(text)
    assert rep["status"] == "divergent"
    assert rep["result"]["hyperbolic"] is False and rep["result"]["divergent_integral"] == "tail"
    assert "divergent" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["constants", "--profile", "euclidean", "--N", "3", "--p", "3"],
    ["constants", "--profile", "sphere", "--N", "3"],
    ["constants", "--profile", "euclidean:N=3,bogus=1"],
    ["constants", "--profile", "euclidean", "--N", "3.5"],
    ["constants", "--profile", "euclidean", "--N", "3", "--geometry", "euclidean:N=4"],
    ["constants", "--profile", "euclidean", "--N", "3", "--q", "2"],
    ["verify", "--profile", "euclidean", "--N", "4", "--inequality", "hardy-sobolev", "--q", "2"],
    ["verify", "--profile", "euclidean", "--N", "4", "--inequality", "hardy-sobolev"],
    ["constants"],
    ["rearrange"],
    ["nonsense"],
])
def test_config_errors_exit_1(tmp_path, argv):
    code, text = _run(tmp_path, *argv)
    assert code == 1 and text is None


def test_config_file_and_env(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\np = 2\n\n[profile]\nfamily = euclidean\nN = 3\n")
    code, text = _run(tmp_path, "constants", "--config", str(ini))
    assert code == 0 and _json(text)["result"]["C2"] == pytest.approx(4.0, rel=1e-8)
    code, text = _run(tmp_path, "constants", env={"ISOSOBOLEV_CONFIG": str(ini)}, name="b.json")
    assert code == 0 and _json(text)["config"]["p"] == 2.0
    # flags override the file
    code, text = _run(tmp_path, "constants", "--p", "1.5", env={"ISOSOBOLEV_CONFIG": str(ini)},
                      name="c.json")
    assert _json(text)["result"]["p"] == 1.5


@pytest.mark.parametrize("body", [
    "[run]\np = 2\nspeed = 9\n[profile]\nfamily = euclidean\nN = 3\n",
    "[extra]\nx = 1\n[profile]\nfamily = euclidean\nN = 3\n",
    "[profile]\nfamily = euclidean\nN = 3\ncolour = red\n",
    "[profile]\nN = 3\n",
    "not an ini file\n",
])
def test_config_file_rejects_unknown(tmp_path, body):
    ini = tmp_path / "bad.ini"
    ini.write_text(body)
    assert run(["constants", "--config", str(ini)], environ={}) == 1


def test_missing_config_file(tmp_path):
    assert run(["constants"], environ={"ISOSOBOLEV_CONFIG": str(tmp_path / "none.ini")}) == 1


def test_deterministic_modulo_timestamp(tmp_path):
    argv = ["verify", "--profile", "product:m=1,k=3", "--family", "random", "--budget", "10",
            "--seed", "4"]
    _, a = _run(tmp_path, *argv, name="a.json")
    _, b = _run(tmp_path, *argv, name="b.json")
    ja, jb = json.loads(a), json.loads(b)
    ja.pop("timestamp"), jb.pop("timestamp")
    assert json.dumps(ja, sort_keys=True) == json.dumps(jb, sort_keys=True)


def test_verify_talenti(tmp_path):
    code, text = _run(tmp_path, "verify", "--profile", "euclidean", "--N", "3", "--p", "2",
                      "--family", "talenti", "--budget", "5")
    res = _json(text)["result"]
    assert code == 0 and res["all_pass"]
    S = sobolev_best_constant(3, 2.0)
    assert 0.999 * S <= res["max_ratio"] <= S * (1 + 1e-6)


def test_verify_hardy_product_random(tmp_path):
    code, text = _run(tmp_path, "verify", "--profile", "product:m=1,k=3", "--inequality", "hardy",
                      "--family", "random", "--budget", "30")
    res = _json(text)["result"]
    assert code == 0 and res["all_pass"] and len(res["rows"]) == 30


def test_verify_failure_exit_3(tmp_path):
    # the Euclidean profile overstates the isoperimetry of the product model at large scales,
    # so its C1 = S(4, 2) is violated by wide test functions
    code, text = _run(tmp_path, "verify", "--profile", "euclidean:N=4", "--geometry",
                      "product_model:m=1,k=3,cross_volume=1", "--family", "tent", "--budget", "5")
    rep = _json(text)
    assert code == 3 and rep["status"] == "failed" and not rep["result"]["all_pass"]
    assert rep["result"]["warnings"]
    assert [r["pass"] for r in rep["result"]["rows"]][:3] == [True, True, True]


def test_bliss_bracket(tmp_path):
    code, text = _run(tmp_path, "bliss", "--profile", "euclidean", "--N", "4", "--p", "2",
                      "--budget", "200")
    res = _json(text)["result"]
    assert code == 0
    assert 0.99 <= res["observed_over_B_tilde"] <= k_qp(4.0, 2.0)


def test_hyperbolic_command(tmp_path):
    code, text = _run(tmp_path, "hyperbolic", "--profile", "euclidean", "--N", "3", "--p", "2")
    res = _json(text)["result"]
    C = 3 * (4 * math.pi / 3) ** (1 / 3)
    assert code == 0 and res["hyperbolic"] is True
    assert res["integral"] == pytest.approx(3 / C**2, rel=1e-10)
    code, text = _run(tmp_path, "hyperbolic", "--profile", "product:m=1,k=2", "--p", "2",
                      name="h2.json")
    assert code == 0 and _json(text)["result"]["hyperbolic"] is False


def test_rearrange_csv(tmp_path):
    src = tmp_path / "u.csv"
    src.write_text("x,value\n0,1\n1,4\n2,2\n3,\n")
    code, text = _run(tmp_path, "rearrange", "--input", str(src))
    res = _json(text)["result"]
    assert code == 0
    assert res["rearranged"]["values"] == [4.0, 2.0, 1.0]
    assert res["cavalieri"]["residual_exact"] == "0" and res["nonincreasing"]


def test_rearrange_csv_format(tmp_path):
    src = tmp_path / "u.csv"
    src.write_text("x,value\n0,1/3\n1,4\n5/2,2\n3,0\n")
    code, text = _run(tmp_path, "rearrange", "--input", str(src), "--format", "csv", name="o.csv")
    assert code == 0
    rows = {r["key"]: r["value"] for r in csv.DictReader(io.StringIO(text))}
    assert rows["cavalieri.residual_exact"] == "0"
    assert rows["schema"] == "isosobolev.report/1"


def test_verify_csv_rows(tmp_path):
    code, text = _run(tmp_path, "verify", "--profile", "euclidean", "--N", "3", "--family", "tent",
                      "--budget", "3", "--format", "csv", name="v.csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 3
    assert set(rows[0]) == {"function", "lhs", "rhs", "ratio", "pass"}


@pytest.mark.parametrize("body,line", [
    ("x,value\n0,1\n1,oops\n2,\n", 3),
    ("x,value\n0,1\n2,1\n1,\n", 4),
    ("x,value\n0,1\n1,2,3\n", 3),
    ("x,value\n0,1\n1,\n2,\n", 3),
])
def test_malformed_csv_line_numbers(tmp_path, body, line, capsys):
    src = tmp_path / "bad.csv"
    src.write_text(body)
    assert run(["rearrange", "--input", str(src)], environ={}) == 1
    assert f"bad.csv:{line}:" in capsys.readouterr().err


def test_csv_header_required(tmp_path):
    src = tmp_path / "h.csv"
    src.write_text("a,b\n0,1\n1,\n")
    with pytest.raises(Exception, match=":1: header"):
        read_function_csv(str(src))


def test_csv_linear_kind(tmp_path):
    src = tmp_path / "lin.csv"
    src.write_text("x,value\n0,0\n1,2\n2,1\n4,3\n")
    u = read_function_csv(str(src), kind="linear")
    assert u.kind == "linear" and u.values == (0.0, 2.0, 1.0, 3.0)


def test_json_round_trip_validates(tmp_path):
    for argv in (["constants", "--profile", "paraboloid:N=4,beta=0.8", "--p", "2"],
                 ["bliss", "--profile", "product:m=1,k=3", "--measures", "hardy", "--budget", "20"]):
        code, text = _run(tmp_path, *argv)
        rep = _json(text)
        assert json.loads(json.dumps(rep)) == rep
    with pytest.raises(ValueError):
        validate_report({"schema": "other"})


def test_stdout_when_no_out(capsys):
    assert run(["hyperbolic", "--profile", "euclidean", "--N", "3"], environ={}) == 0
    assert _json(capsys.readouterr().out)["command"] == "hyperbolic"
