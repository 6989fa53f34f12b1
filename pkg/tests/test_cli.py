from __future__ import annotations

import json
import subprocess
import sys

import pytest

from sorites.cli import EXIT_CHECK, EXIT_IO, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(text: str) -> list[str]:
    # drop the configuration comment line
    lines = text.splitlines()
    assert lines[0].startswith(("# sorites", "// sorites"))
    return lines[1:]


@pytest.mark.parametrize(
    "argv, value",
    [
        (["calc", "exp", "--r", "1", "--t", "10"], "9864101/3628800"),
        (["calc", "exp", "--r", "1", "--t", "4", "--product"], "625/256"),
        (["calc", "log", "--r", "2", "--t", "10"], "3/5"),
        (["calc", "root", "--x", "2", "--k", "2", "--eps", "1/100"], "141/100"),
        (["calc", "ode", "--rhs", "linear", "--a", "1", "--eps", "1/4"], "625/256"),
        (["calc", "mvt", "--f", "square", "--c", "1/4", "--eps", "1/100"], "1/2"),
    ],
)
def test_calc_examples(capsys, argv, value):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    first = body(out)[0].split()
    assert first[-1] == value
    assert "(approximate)" in body(out)[1]


def test_calc_json_and_taylor(capsys):
    code, out, _ = run(capsys, "calc", "taylor", "--f", "square", "--at", "3/10", "--coeffs", "9/100,3/5",
                       "--order", "1", "--eps", "1/1000", "--horizon", "10", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["config"]["horizon"] == 10
    assert data["result"]["worst_residual"] == "99/1000" and data["result"]["verdict"] is True
    code, out, _ = run(capsys, "calc", "taylor", "--f", "poly:1,0,3", "--at", "1/2", "--coeffs", "7/4,3,6",
                       "--order", "2", "--eps", "1/100", "--horizon", "10", "--format", "csv")
    assert body(out)[0] == "x,value"
    assert all(line.endswith(",0") for line in body(out)[1:])


def test_calc_ode_gronwall(capsys):
    code, out, _ = run(capsys, "calc", "ode", "--a", "1", "--eps", "1/100", "--gap", "1/1000000", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["result"]["gronwall"]["holds"] is True
    code, out, err = run(capsys, "calc", "ode", "--a", "1", "--eps", "1/100", "--K", "2")
    assert code == EXIT_CHECK and "K" in err


def test_continuum_grid(capsys, tmp_path):
    code, out, _ = run(capsys, "continuum", "grid", "--a", "0", "--b", "1", "--eps", "1/100")
    data = json.loads(out)
    assert code == EXIT_OK and len(data["result"]["carrier"]) == 101
    assert data["config"]["tool"] == "sorites"


def test_continuum_words(capsys):
    code, out, _ = run(capsys, "continuum", "word", "--kind", "cantor", "--omega", "8")
    assert code == EXIT_OK and len(json.loads(out)["result"]["carrier"]) == 256
    code, out, _ = run(capsys, "continuum", "word", "--kind", "associahedron", "--n", "4")
    assert code == EXIT_OK
    assert out.startswith("// sorites continuum word")
    assert out.count("[label=") == 14
    code, out, _ = run(capsys, "continuum", "word", "--kind", "freegroup", "--n", "2", "--format", "table")
    assert "17" in out
    code, _, err = run(capsys, "continuum", "word", "--kind", "cantor")
    assert code == EXIT_USAGE and "omega" in err


def test_topology_profile_cantor(capsys, tmp_path):
    path = tmp_path / "cantor.json"
    assert main(["continuum", "word", "--kind", "cantor", "--omega", "16", "--carrier", "all", "--out", str(path)]) == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "topology", str(path), "--ladder", "1/128")
    assert code == EXIT_OK
    rows = body(out)
    assert rows[0] == "radius,covering,packing"
    radius, cover, _pack = rows[1].split(",")
    assert radius == "1/128" and int(cover) <= 255


def test_topology_components_and_sorites(capsys, tmp_path):
    a, b, merged = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "m.json"
    main(["continuum", "grid", "--a", "0", "--b", "1/10", "--eps", "1/1000", "--out", str(a)])
    main(["continuum", "grid", "--a", "1/2", "--b", "6/10", "--eps", "1/1000", "--out", str(b)])
    main(["continuum", "merge", "--input", str(a), "--input", str(b), "--out", str(merged)])
    code, out, _ = run(capsys, "topology", str(merged), "--components")
    assert code == EXIT_OK and json.loads(out)["result"]["components"] == 2
    code, out, _ = run(capsys, "topology", str(a), "--sorites", "0", "1/10", "--format", "json")
    res = json.loads(out)["result"]
    assert code == EXIT_OK and res["chain"][0] == "0" and res["chain"][-1] == "1/10"
    assert res["adjacent_indistinguishable"] and res["endpoints_distinguishable"]
    code, _, err = run(capsys, "topology", str(a), "--sorites", "0", "7")
    assert code == EXIT_USAGE and "7" in err


def test_topology_accumulation(capsys, tmp_path):
    g = tmp_path / "g.json"
    main(["continuum", "grid", "--a", "0", "--b", "1", "--eps", "1/1000", "--out", str(g)])
    capsys.readouterr()
    code, out, _ = run(capsys, "topology", str(g), "--accumulation", "--horizon", "10", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["config"]["horizon"] == 10


def test_exit_codes(capsys, tmp_path):
    for argv in (["calc", "exp"], ["nonsense"]):
        with pytest.raises(SystemExit) as err:
            main(argv)
        assert err.value.code == EXIT_USAGE
    capsys.readouterr()
    code, _, err_text = run(capsys, "calc", "mvt", "--f", "square", "--c", "2", "--eps", "1/100")
    assert code == EXIT_CHECK and err_text.startswith("sorites:")
    assert run(capsys, "calc", "log", "--r", "-1")[0] == EXIT_CHECK
    assert run(capsys, "topology", str(tmp_path / "missing.json"))[0] == EXIT_IO
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "topology", str(bad))[0] == EXIT_IO
    assert run(capsys, "calc", "mvt", "--f", "nope", "--c", "1/2", "--eps", "1/10")[0] == EXIT_USAGE
    assert run(capsys, "calc", "exp", "--r", "1", "--format", "dot")[0] == EXIT_USAGE
    assert run(capsys, "calc", "exp", "--r", "1", "--horizon", "0")[0] == EXIT_USAGE


def test_bad_rational_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        main(["calc", "root", "--x", "2", "--eps", "x"])
    assert err.value.code == EXIT_USAGE


@pytest.mark.parametrize("chapter", ["calculus", "measure", "topology"])
def test_demo_chapters_pass(capsys, chapter):
    code, out, _ = run(capsys, "demo", chapter)
    assert code == EXIT_OK
    rows = body(out)
    assert rows and all(r.startswith("PASS") for r in rows)


@pytest.mark.slow
def test_demo_words_catalan(capsys):
    code, out, _ = run(capsys, "demo", "words")
    assert code == EXIT_OK and "208012" in out


def test_header_on_every_format(capsys):
    _, out, _ = run(capsys, "calc", "exp", "--r", "1/2", "--seed", "7", "--format", "json")
    assert json.loads(out)["config"]["seed"] == 7
    _, out, _ = run(capsys, "calc", "exp", "--r", "1/2", "--seed", "7")
    assert "seed=7" in out.splitlines()[0]
    _, out, _ = run(capsys, "calc", "taylor", "--f", "cube", "--at", "0", "--coeffs", "0", "--order", "1",
                    "--eps", "1/100", "--lo", "-1", "--horizon", "10", "--format", "csv")
    assert out.startswith("# sorites calc taylor | version=")


def test_byte_identical_runs():
    argv = [sys.executable, "-m", "sorites", "continuum", "word", "--kind", "hyperbolic", "--omega", "5", "--seed", "3"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and b"seed" in a


def test_out_file(capsys, tmp_path):
    dest = tmp_path / "exp.txt"
    code, out, _ = run(capsys, "calc", "exp", "--r", "1", "--t", "3", "--out", str(dest))
    assert code == EXIT_OK and out == ""
    assert "8/3" in dest.read_text()
