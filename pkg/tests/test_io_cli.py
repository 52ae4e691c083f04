import json
import subprocess
import sys
from pathlib import Path

import pytest

from ffdyn.cli import dispatch, main
from ffdyn.io import (
    FormatError,
    dumps,
    map_from_json,
    map_hash,
    map_to_json,
    scalar_from_json,
    scalar_to_json,
    witness_from_json,
    witness_to_json,
)
from ffdyn.homog import ConjScalar
from conftest import K, Q, hmap, place

DATA = Path(__file__).resolve().parent.parent / "data"


def run(*argv):
    return dispatch([str(a) for a in argv])


# ---------------------------------------------------------------------------
# io


def test_map_round_trip():
    for phi in (hmap(["x0^2+t*x1^2", "x1^2"]), hmap(["x0^2", "(t+1)/t*x0*x1", "x2^2-x1^2"])):
        data = json.loads(json.dumps(map_to_json(phi)))
        assert map_from_json(data) == phi
        assert map_hash(map_from_json(data)) == map_hash(phi)


def test_map_format_errors(tmp_path):
    bad = map_to_json(hmap(["x0^2", "x1^2"]))
    bad["forms"][0][0]["exp"] = [1, 0]
    with pytest.raises(FormatError):
        map_from_json(bad)
    with pytest.raises(FormatError):
        map_from_json({"field": {"kind": "Q"}})
    f = tmp_path / "broken.json"
    f.write_text("{not json")
    with pytest.raises(FormatError):
        map_from_json(str(f))


def test_scalar_round_trip():
    s = ConjScalar.root(K("t^3+t"), 2)
    assert scalar_from_json(json.loads(json.dumps(scalar_to_json(s))), Q) == s


def test_witness_round_trip():
    from ffdyn.arithdyn import isotriviality, recheck_witness

    phi = hmap(["x0^2", "t*x1^2"])
    w = isotriviality(phi).witness
    back = witness_from_json(json.loads(dumps(witness_to_json(w))), phi)
    assert back == w and recheck_witness(phi, back)


# ---------------------------------------------------------------------------
# cli


def test_exit_codes():
    assert run("isotrivial", DATA / "tz2.json")[0] == 0
    code, rep = run("isotrivial", DATA / "z2plust.json")
    assert code == 0 and rep["result"]["status"] == "NonIsotrivial"
    assert rep["result"]["certificate"]["value"] == "4*t"
    assert run("isotrivial", DATA / "hard.json", "--bound", "1")[0] == 2
    assert run("isotrivial", DATA / "tz2.json", "--no-such-flag")[0] == 1
    assert run("res", DATA / "missing.json")[0] == 1
    assert run("bogus")[0] == 1


def test_res_and_places():
    code, rep = run("res", DATA / "tz2.json")
    assert code == 0 and rep["result"]["resultant"] == "t^2"
    code, rep = run("places", DATA / "tz2.json", "--place", "t")
    assert code == 0


def test_eval_and_height():
    # tz2.json is (t x0^2, x1^2)
    code, rep = run("eval", DATA / "tz2.json", "--point", "t,1")
    assert rep["result"]["evaluations"][0]["image"] == ["t^3", "1"]
    code, rep = run("height", DATA / "tz2.json", "--at", "t", "--point", "1,0")
    assert code == 0 and rep["result"]["heights"][0]["value"] == "-1"


def test_reduction_report():
    code, rep = run("reduction", DATA / "tz2.json")
    assert code == 0
    assert rep["result"]["bad_places"] == ["t", "inf"]
    assert all(e["potential_good_reduction"] for e in rep["result"]["places"])


def test_julia_routes_agree():
    code, rep = run("julia", DATA / "tz2.json", "--at", "t")
    r = rep["result"]
    assert code == 0
    assert r["diameter"]["log_d_inf_witness"] == r["diameter"]["log_d_inf_resultant"] == "1"
    assert r["diameter"]["C"] == "-1/2"


def test_tdiam_preper_stabilizer():
    code, rep = run("tdiam", DATA / "points.json", "--at", "t", "-M", "2:5")
    assert code == 0 and rep["result"]["monotone"] is True
    code, rep = run("preper", DATA / "z2_f5.json", "-n", "2", "--over", "5")
    assert code == 0 and set(rep["result"]["points"]) == {"0", "1", "inf"}
    code, rep = run("stabilizer", DATA / "z2_f5.json")
    assert code == 0 and sorted(rep["result"]["elements"]) == ["z -> 1/z", "z -> z"]
    assert rep["result"]["searched"] == 120


def test_recheck_saved_report(tmp_path):
    code, rep = run("isotrivial", DATA / "z2plust.json", "--json")
    saved = tmp_path / "report.json"
    saved.write_text(dumps({"result": rep["result"], "provenance": rep["provenance"]}))
    code, out = run("isotrivial", DATA / "z2plust.json", "--recheck", saved)
    assert code == 0 and out["result"]["recheck"]["valid"]

    tampered = json.loads(saved.read_text())
    tampered["result"]["certificate"]["value"] = "4*t+1"
    saved.write_text(dumps(tampered))
    code, out = run("isotrivial", DATA / "z2plust.json", "--recheck", saved)
    assert code == 1 and not out["result"]["recheck"]["valid"]

    # a report for another map is refused outright
    code, out = run("isotrivial", DATA / "tz2.json", "--recheck", saved)
    assert code == 1 and "error" in out


def test_isotrivial_witness_report_rechecks(tmp_path):
    code, rep = run("isotrivial", DATA / "tz2.json", "--recheck")
    assert code == 0 and rep["result"]["recheck"]["valid"]
    assert all(c["ok"] for c in rep["result"]["gamma_integrality"])


def test_json_output_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        main(["isotrivial", str(DATA / "z2plust.json"), "--json"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["provenance"]["map_sha256"] == map_hash(map_from_json(DATA / "z2plust.json"))


def test_text_output_and_stderr(capsys):
    assert main(["res", str(DATA / "tz2.json")]) == 0
    assert "resultant: t^2" in capsys.readouterr().out
    assert main(["res", str(DATA / "nope.json")]) == 1
    assert "error:" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ffdyn", "res", str(DATA / "sqr.json"), "--json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["resultant"] == "1"
