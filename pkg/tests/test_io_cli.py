import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from markov_groupoids import io as fio
from markov_groupoids.cli import run
from markov_groupoids.errors import SchemaError
from markov_groupoids.groupoid import build_action_groupoid, build_pair_groupoid, cyclic_group_table, ActionSpec

SWAP_DOC = {"kind": "action", "group": [[0, 1], [1, 0]], "action": [[0, 1], [1, 0]]}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def swap_uniform(tmp_path):
    G = build_action_groupoid(ActionSpec(cyclic_group_table(2), [[0, 1], [1, 0]]))
    doc = {"system": [{"object": x, "masses": [[g, 1, 2] for g in G.fibre(x)]} for x in G.objects]}
    return write(tmp_path, "g.json", SWAP_DOC), write(tmp_path, "s.json", doc)


def test_groupoid_round_trip():
    for G in (build_pair_groupoid([[0, 2], [1]]),
              build_action_groupoid(ActionSpec(cyclic_group_table(2), [[0, 1], [1, 0]]))):
        H = fio.parse_groupoid(fio.groupoid_to_doc(G))
        assert H.to_table() == G.to_table()
    T = build_pair_groupoid([[0, 1]])
    H = fio.parse_groupoid(T.to_table() | {"kind": "table"})
    assert H.to_table() == T.to_table()


def test_mass_parsing():
    assert fio.parse_mass([3, 1, 4], True, "t") == (3, F(1, 4))
    assert fio.parse_mass([3, "1/4"], True, "t") == (3, F(1, 4))
    assert fio.parse_mass([3, 0.25], False, "t") == (3, 0.25)
    for bad in ([3, 0.25], [3, 1, 0], [3, -1, 2], [3], [3, True]):
        with pytest.raises(SchemaError):
            fio.parse_mass(bad, True, "t")


def test_schema_errors():
    G = build_pair_groupoid([[0, 1]])
    with pytest.raises(SchemaError):
        fio.parse_groupoid({"kind": "group"})
    with pytest.raises(SchemaError):
        fio.parse_system({"system": [{"object": 5, "masses": []}]}, G)
    with pytest.raises(SchemaError):
        fio.parse_theta({"theta": [{"point": 0, "masses": [[0, 1, 1]]}]}, 2)


def test_check_command(tmp_path, capsys):
    g, _ = swap_uniform(tmp_path)
    assert run(["check", "--groupoid", g]) == 0
    assert "violations: 0" in capsys.readouterr().out


def test_check_reports_defect(tmp_path, capsys):
    t = build_pair_groupoid([[0, 1]]).to_table()
    t["compose"][1][2] = 3
    assert run(["check", "--groupoid", write(tmp_path, "bad.json", t | {"kind": "table"})]) == 1
    assert "violations:" in capsys.readouterr().out


def test_discrepancy_command(tmp_path, capsys):
    g, s = swap_uniform(tmp_path)
    csv_path = tmp_path / "d.csv"
    assert run(["discrepancy", "--groupoid", g, "--system", s, "--csv", str(csv_path)]) == 0
    assert "= 0" in capsys.readouterr().out
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "morphismId,sourceObject,targetObject,delta" and len(lines) == 5


def test_non_probability_system_exits_1(tmp_path, capsys):
    g = write(tmp_path, "g.json", SWAP_DOC)
    s = write(tmp_path, "s.json", {"system": [{"object": 0, "masses": [[0, 1, 2]]},
                                              {"object": 1, "masses": [[2, 1, 1]]}]})
    assert run(["discrepancy", "--groupoid", g, "--system", s]) == 1
    assert "normalization" in capsys.readouterr().err


def test_convolve_command(tmp_path, capsys):
    g, s = swap_uniform(tmp_path)
    assert run(["convolve", "--groupoid", g, "--system", s, "--power", "3"]) == 0
    doc = json.loads(capsys.readouterr().out)
    # ids are x*|G| + g, so the fibre over 0 is {0, 1}
    assert doc["system"][0]["masses"] == [[0, 1, 2], [1, 1, 2]]


def test_construct_liouville_fixture(tmp_path, capsys):
    csv_path = tmp_path / "c.csv"
    assert run(["construct-liouville", "--fixture", "z4", "--csv", str(csv_path)]) == 0
    out = capsys.readouterr().out
    assert "selected indices n_i: [1, 3, 4]" in out
    assert "independent verification: passed" in out
    rows = csv_path.read_text().splitlines()
    assert rows[1] == "2,3,2,1/4,12/49,1"


def test_boundary_command(tmp_path, capsys):
    g, s = swap_uniform(tmp_path)
    assert run(["boundary", "--groupoid", g, "--system", s, "--mode", "tail", "--horizon", "4",
                "--csv-dir", str(tmp_path / "prof")]) == 0
    assert "aggregate trivial kappa-mass: 1.0" in capsys.readouterr().out
    assert (tmp_path / "prof" / "profile_0.csv").exists()


def test_group_commands(capsys):
    assert run(["group-sweep", "--group", "z", "--measure", "[[0,1,2],[1,1,4],[-1,1,4]]",
                "--probe", "1", "--horizon", "2"]) == 0
    assert capsys.readouterr().out.splitlines() == ["n,value", "1,1", "2,3/4"]
    assert run(["folner", "--group", "f2", "--reference", '[["a",1,1]]', "--ball", "2"]) == 0
    assert "18/17" in capsys.readouterr().out
    assert run(["folner", "--group", "z", "--reference", "[[1,1,1]]", "--set", "[0,1,2,3,4,5,6,7,8,9]"]) == 0
    assert "= 1/5" in capsys.readouterr().out


def test_rwre_commands(tmp_path, capsys):
    a = write(tmp_path, "a.json", SWAP_DOC)
    th = write(tmp_path, "t.json", {"theta": [{"point": 0, "masses": [[0, 1, 2], [1, 1, 2]]},
                                              {"point": 1, "masses": [[1, 1, 1]]}]})
    paths = tmp_path / "paths.log"
    assert run(["rwre", "simulate", "--action", a, "--theta", th, "--steps", "3",
                "--samples", "2000", "--seed", "5", "--log-paths", "2", "--paths-out", str(paths)]) == 0
    out = capsys.readouterr()
    assert out.out.startswith("element,empiricalMass,exactMass,absDiff")
    assert "total variation" in out.err and '"seed": 5' in out.err
    assert paths.read_text().splitlines()[0].startswith("seed=5 path=0")
    assert run(["rwre", "report", "--action", a, "--theta", th, "--horizon", "8"]) == 0


def test_usage_errors(tmp_path, capsys):
    assert run(["nonsense"]) == 2
    assert run(["check", "--groupoid", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(["check", "--groupoid", str(bad)]) == 2
    assert run(["check", "--groupoid", write(tmp_path, "k.json", {"kind": "weird"})]) == 2
    assert run(["folner", "--group", "z", "--reference", "[[1,1,1]]"]) == 2


def test_console_entry_point(tmp_path):
    g = write(tmp_path, "g.json", SWAP_DOC)
    proc = subprocess.run([sys.executable, "-m", "markov_groupoids", "check", "--groupoid", g],
                          capture_output=True, text=True, env={"GROUPOID_THREADS": "2", "PATH": ""})
    assert proc.returncode == 0
    assert '"threads": "2"' in proc.stderr
