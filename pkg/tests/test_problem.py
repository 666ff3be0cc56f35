import json

import pytest

from diracbracket.fixtures import BUNDLED, NAMED, bundled_path, load_bundled, write_bundled
from diracbracket.problem import ProblemError, ProblemFile, dump_problem, load_problem

BASE = {"variables": ["q", "p"], "poisson": {"1,2": "1"}, "constraints": ["q"]}


def make(**changes):
    data = dict(BASE)
    data.update(changes)
    return ProblemFile.from_dict(data)


def test_minimal_file():
    pf = make()
    assert pf.space.N == 2 and pf.cons.M == 1
    assert pf.build_system().D.provenance == "pseudoinverse"


@pytest.mark.parametrize("changes, location", [
    ({"poisson": {"1,2": "q +"}}, "poisson['1,2']"),
    ({"poisson": {"1,3": "q"}}, "poisson"),
    ({"constraints": ["q", "r"]}, "constraints[1]"),
    ({"constraints": "q"}, "constraints"),
    ({"D": [["0", "1"]]}, "D"),
    ({"D": [["q^-1"]]}, "D[0][0]"),
    ({"D_denominator": "q"}, "D_denominator"),
    ({"variables": ["q", "q"]}, "variables"),
    ({"variables": ["q", "2p"]}, "variables"),
    ({"seed": 1.5}, "seed"),
    ({"points": 0}, "points"),
    ({"tolerances": {"jacobi": -1}}, "tolerances"),
    ({"initial_state": [1]}, "initial_state"),
    ({"hamiltonian": "p^2 +"}, "hamiltonian"),
    ({"colour": "blue"}, "colour"),
])
def test_errors_name_their_location(changes, location):
    with pytest.raises(ProblemError) as info:
        make(**changes)
    assert info.value.location == location


def test_required_fields():
    with pytest.raises(ProblemError) as info:
        ProblemFile.from_dict({"variables": ["q"]})
    assert info.value.location == "poisson"
    with pytest.raises(ProblemError):
        ProblemFile.from_dict([1, 2])


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "variables": [\n}\n')
    with pytest.raises(ProblemError) as info:
        load_problem(path)
    assert info.value.location.startswith("line 3")


def test_missing_file(tmp_path):
    with pytest.raises(ProblemError):
        load_problem(tmp_path / "nope.json")


def test_dump_load_round_trip(tmp_path):
    pf = make(D=[["0"]], hamiltonian="1/2*p^2", seed=3, points=7, tolerances={"jacobi": 1e-7},
              initial_state=[0.0, 1.0], relaxed=True)
    out = tmp_path / "pf.json"
    dump_problem(pf, out)
    again = load_problem(out)
    assert again.to_dict() == pf.to_dict()


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_files_are_current(name, tmp_path):
    write_bundled(tmp_path)
    assert json.loads((tmp_path / f"{name}.json").read_text()) == \
        json.loads(bundled_path(name).read_text())
    pf = load_bundled(name)
    assert pf.space.N == NAMED[name]().J.N
