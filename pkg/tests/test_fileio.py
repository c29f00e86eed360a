import copy
import json

import numpy as np
import pytest

import causalkl as ck
from causalkl import Dag, PathModel, ScopeError, Variable


def test_network_roundtrip(tmp_path, truth):
    path = tmp_path / "net.json"
    ck.save_network(truth, path)
    back = ck.load_network(path)
    assert back.dag.arc_names() == truth.dag.arc_names()
    assert np.allclose(ck.joint_distribution(back).probs,
                       ck.joint_distribution(truth).probs, atol=0)
    assert ck.network_to_dict(back) == ck.network_to_dict(truth)


def test_network_from_dict_validation(meta_obj):
    ck.network_from_dict(meta_obj)

    missing = copy.deepcopy(meta_obj)
    del missing["cpts"]["C"]
    with pytest.raises(ValueError, match="no CPT for 'C'"):
        ck.network_from_dict(missing)

    short = copy.deepcopy(meta_obj)
    del short["cpts"]["C"]["rows"][2]
    with pytest.raises(ValueError, match="missing rows"):
        ck.network_from_dict(short)

    doubled = copy.deepcopy(meta_obj)
    doubled["cpts"]["M"]["rows"].append({"given": {}, "p": [0.9, 0.1]})
    with pytest.raises(ValueError, match="duplicate"):
        ck.network_from_dict(doubled)

    disagree = copy.deepcopy(meta_obj)
    disagree["cpts"]["S"]["parents"] = []
    disagree["cpts"]["S"]["rows"] = [{"given": {}, "p": [0.2, 0.8]}]
    with pytest.raises(ValueError, match="disagree with arcs"):
        ck.network_from_dict(disagree)

    badlen = copy.deepcopy(meta_obj)
    badlen["cpts"]["M"]["rows"][0]["p"] = [1.0]
    with pytest.raises(ValueError, match="needs 2"):
        ck.network_from_dict(badlen)

    badstate = copy.deepcopy(meta_obj)
    badstate["cpts"]["S"]["rows"][0]["given"] = {"M": "maybe"}
    with pytest.raises(ValueError, match="maybe"):
        ck.network_from_dict(badstate)

    structure_only = {"variables": meta_obj["variables"],
                      "arcs": meta_obj["arcs"]}
    with pytest.raises(ValueError, match="load_dag"):
        ck.network_from_dict(structure_only)


def test_dag_roundtrip(tmp_path, truth):
    path = tmp_path / "dag.json"
    ck.save_dag(truth.dag, path)
    back = ck.load_dag(path)
    assert back.arc_names() == truth.dag.arc_names()
    assert back.names == truth.dag.names
    # structure files load as structures, not networks
    with pytest.raises(ValueError, match="cpts"):
        ck.load_network(path)


def test_invalid_json_names_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"variables": [,]}')
    with pytest.raises(ValueError, match=r"broken\.json.*line 1"):
        ck.load_dag(path)


def test_malformed_arc(meta_obj):
    obj = copy.deepcopy(meta_obj)
    obj["arcs"].append(["M"])
    with pytest.raises(ValueError, match="malformed arc"):
        ck.network_from_dict(obj)


def test_dataset_roundtrip(tmp_path, truth):
    data = ck.sample(truth, 200, seed=4)
    path = tmp_path / "records.csv"
    ck.save_dataset(data, path)
    back = ck.load_dataset(path, truth.variables)
    assert back.names == data.names
    assert np.array_equal(back.records, data.records)


def test_dataset_header_column_order(tmp_path, truth):
    path = tmp_path / "records.csv"
    path.write_text("C,M,B,S\nT,F,T,F\n")
    data = ck.load_dataset(path, truth.variables)
    assert data.names == ("C", "M", "B", "S")
    assert list(data.records[0]) == [0, 1, 0, 1]


def test_dataset_header_errors(tmp_path, truth):
    path = tmp_path / "records.csv"
    path.write_text("M,S,B\nT,T,T\n")
    with pytest.raises(ScopeError, match="'C'"):
        ck.load_dataset(path, truth.variables)
    path.write_text("")
    with pytest.raises(ValueError, match="empty"):
        ck.load_dataset(path, truth.variables)


def test_dataset_bad_state_names_line(tmp_path, truth):
    path = tmp_path / "records.csv"
    path.write_text("M,S,B,C\nT,T,T,T\nT,yes,T,T\n")
    with pytest.raises(ValueError, match=r"records\.csv:3.*'yes'"):
        ck.load_dataset(path, truth.variables)
    path.write_text("M,S,B,C\nT,T,T\n")
    with pytest.raises(ValueError, match=r"records\.csv:2"):
        ck.load_dataset(path, truth.variables)


def test_path_model_roundtrip(tmp_path):
    names = ("A", "B", "C")
    variables = tuple(Variable(n, ("-", "+")) for n in names)
    dag = Dag.from_arcs(variables, [("A", "B"), ("B", "C")])
    model = PathModel(dag, {("A", "B"): 0.5, ("B", "C"): -0.25})
    path = tmp_path / "paths.json"
    ck.save_path_model(model, path)
    back = ck.load_path_model(path)
    assert back.dag.arc_names() == dag.arc_names()
    assert back.coefficient("B", "C") == -0.25


def test_path_model_missing_keys(tmp_path):
    path = tmp_path / "paths.json"
    path.write_text(json.dumps({"arcs": []}))
    with pytest.raises(ValueError, match="variables"):
        ck.load_path_model(path)
