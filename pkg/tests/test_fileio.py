"""File formats: network JSON and case CSV round-trips, strict validation.

Claims checked here:
    - a saved network re-loads to an identical in-memory model (bit-exact)
    - case files preserve the observed/set/missing distinction exactly
    - zero CPT entries and bad row sums are rejected at load with the file
      (and row) named
    - malformed CSV cells fail with the offending line number
"""

import pytest

from causalbde import Dataset, DiscreteNetwork, FormatError, Observation
from causalbde.fileio import (
    load_cases,
    load_network,
    load_regime,
    load_structure,
    save_cases,
    save_dot,
    save_network,
)
from helpers import bvar, var

OBS = Observation.observed
SET = Observation.set_to
MISS = Observation.missing


def _net():
    return DiscreteNetwork.build(
        (bvar("x"), var("y", 3)),
        [("x", "y")],
        {
            "x": [[0.25, 0.75]],
            "y": [[0.5, 0.3, 0.2], [0.1, 0.6, 0.3]],
        },
    )


def test_network_round_trip_identical(tmp_path):
    net = _net()
    path = tmp_path / "net.json"
    save_network(net, str(path))
    loaded = load_network(str(path))
    assert loaded == net
    assert loaded.cpts["y"].rows == net.cpts["y"].rows  # bit-exact floats


def test_network_missing_key(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"variables": [], "arcs": []}')
    with pytest.raises(FormatError) as err:
        load_network(str(path))
    assert "cpts" in str(err.value)


def test_network_zero_entry_rejected(tmp_path):
    path = tmp_path / "zero.json"
    path.write_text(
        '{"variables": [{"name": "x", "states": ["0", "1"]}],'
        ' "arcs": [], "cpts": {"x": {"parents": [], "table": [[0.0, 1.0]]}}}'
    )
    with pytest.raises(FormatError) as err:
        load_network(str(path))
    assert "x" in str(err.value) and "zero" in str(err.value).lower()


def test_network_bad_row_sum_rejected(tmp_path):
    path = tmp_path / "sum.json"
    path.write_text(
        '{"variables": [{"name": "x", "states": ["0", "1"]}],'
        ' "arcs": [], "cpts": {"x": {"parents": [], "table": [[0.6, 0.6]]}}}'
    )
    with pytest.raises(FormatError):
        load_network(str(path))


def test_network_mild_row_drift_renormalized(tmp_path):
    # Within the load tolerance but outside the strict constructor tolerance.
    path = tmp_path / "drift.json"
    path.write_text(
        '{"variables": [{"name": "x", "states": ["0", "1"]}],'
        ' "arcs": [], "cpts": {"x": {"parents": [], "table": [[0.3000000001, 0.7]]}}}'
    )
    net = load_network(str(path))
    assert sum(net.cpts["x"].rows[0]) == pytest.approx(1.0, abs=1e-12)


def test_invalid_json_names_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{\n  broken\n}")
    with pytest.raises(FormatError) as err:
        load_network(str(path))
    assert "broken.json" in str(err.value)


def test_case_round_trip_preserves_kinds(tmp_path):
    x, y = bvar("x"), var("y", 3)
    dataset = Dataset(
        (x, y),
        (
            {"x": OBS(0), "y": SET(2)},
            {"x": SET(1), "y": MISS()},
            {"x": MISS(), "y": OBS(1)},
        ),
    )
    path = tmp_path / "cases.csv"
    save_cases(dataset, str(path))
    loaded = load_cases(str(path), (x, y))
    assert loaded == dataset


def test_case_unknown_label_names_line(tmp_path):
    path = tmp_path / "cases.csv"
    path.write_text("x,y\n0,1\nbogus,0\n")
    with pytest.raises(FormatError) as err:
        load_cases(str(path), (bvar("x"), bvar("y")))
    assert ":3:" in str(err.value)


def test_case_wrong_cell_count_names_line(tmp_path):
    path = tmp_path / "cases.csv"
    path.write_text("x,y\n0\n")
    with pytest.raises(FormatError) as err:
        load_cases(str(path), (bvar("x"), bvar("y")))
    assert ":2:" in str(err.value)


def test_hidden_column_may_be_absent(tmp_path):
    path = tmp_path / "cases.csv"
    path.write_text("y\n1\n0\n")
    dataset = load_cases(str(path), (bvar("x"), bvar("y")), hidden=("x",))
    assert dataset.hidden == frozenset({"x"})
    assert all(case["x"].is_missing for case in dataset.cases)


def test_hidden_column_must_be_missing(tmp_path):
    path = tmp_path / "cases.csv"
    path.write_text("x,y\n1,1\n")
    with pytest.raises(FormatError):
        load_cases(str(path), (bvar("x"), bvar("y")), hidden=("x",))


def test_non_hidden_column_required(tmp_path):
    path = tmp_path / "cases.csv"
    path.write_text("x\n1\n")
    with pytest.raises(FormatError):
        load_cases(str(path), (bvar("x"), bvar("y")))


def test_structure_file_both_shapes(tmp_path):
    slim = tmp_path / "slim.json"
    slim.write_text('{"nodes": ["a", "b"], "arcs": [["a", "b"]]}')
    dag = load_structure(str(slim))
    assert dag.arcs == frozenset({("a", "b")})
    netfile = tmp_path / "full.json"
    save_network(_net(), str(netfile))
    dag2 = load_structure(str(netfile))
    assert dag2.nodes == ("x", "y") and dag2.arcs == frozenset({("x", "y")})


def test_regime_file(tmp_path):
    path = tmp_path / "regime.csv"
    path.write_text("x,y\n,\n1,\n,2\n")
    regime = load_regime(str(path), (bvar("x"), var("y", 3)))
    assert regime.assignments == ({}, {"x": 1}, {"y": 2})


def test_regime_unknown_state(tmp_path):
    path = tmp_path / "regime.csv"
    path.write_text("x\n9\n")
    with pytest.raises(FormatError) as err:
        load_regime(str(path), (bvar("x"),))
    assert ":2:" in str(err.value)


def test_dot_export(tmp_path):
    net = _net()
    path = tmp_path / "g.dot"
    save_dot(net.dag, str(path))
    text = path.read_text()
    assert "digraph" in text
    assert '"x" -> "y";' in text
