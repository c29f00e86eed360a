"""File formats: network JSON, dataset CSV, path-model JSON.

Network JSON:
    {"variables": [{"name": ..., "states": [...]}, ...],
     "arcs": [["parent", "child"], ...],
     "cpts": {"child": {"parents": [...],
                        "rows": [{"given": {...}, "p": [...]}, ...]}}}

Row order inside a CPT is irrelevant but every parent configuration must
appear exactly once. A file without "cpts" loads as a bare structure via
load_dag.

Dataset CSV: header row of variable names, one state name per cell.

Path-model JSON:
    {"variables": [...names...], "arcs": [{"from": ..., "to": ..., "coef": ...}]}
"""
from __future__ import annotations

import csv
import itertools
import json
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .errors import ScopeError
from .network import Cpt, Dag, Dataset, DiscreteNetwork, Variable
from .structure import PathModel


def _variables_from(obj: Mapping[str, Any], where: str) -> tuple[Variable, ...]:
    try:
        raw = obj["variables"]
    except KeyError:
        raise ValueError(f"{where}: missing 'variables'") from None
    out = []
    for entry in raw:
        if isinstance(entry, str):
            raise ValueError(
                f"{where}: variable entries need 'name' and 'states'")
        out.append(Variable(entry["name"], tuple(entry["states"])))
    return tuple(out)


def dag_from_dict(obj: Mapping[str, Any]) -> Dag:
    variables = _variables_from(obj, "network")
    arcs = [tuple(arc) for arc in obj.get("arcs", [])]
    for arc in arcs:
        if len(arc) != 2:
            raise ValueError(f"network: malformed arc {arc!r}")
    return Dag.from_arcs(variables, arcs)


def network_from_dict(obj: Mapping[str, Any]) -> DiscreteNetwork:
    dag = dag_from_dict(obj)
    try:
        cpt_map = obj["cpts"]
    except KeyError:
        raise ValueError("network: missing 'cpts' (use load_dag for "
                         "structure-only files)") from None
    cpts = []
    for i, v in enumerate(dag.variables):
        if v.name not in cpt_map:
            raise ValueError(f"network: no CPT for {v.name!r}")
        entry = cpt_map[v.name]
        parent_names = list(entry.get("parents", []))
        parent_idx = tuple(dag.index(p) for p in parent_names)
        if set(parent_idx) != set(dag.parent_sets[i]):
            raise ValueError(
                f"network: CPT parents for {v.name!r} disagree with arcs")
        shape = tuple(dag.variables[p].cardinality for p in parent_idx)
        table = np.full(shape + (v.cardinality,), np.nan)
        for row in entry["rows"]:
            given = row.get("given", {})
            if set(given) != set(parent_names):
                raise ValueError(
                    f"network: row for {v.name!r} must condition on exactly "
                    f"{parent_names}")
            idx = tuple(
                dag.variables[p].index(given[dag.names[p]])
                for p in parent_idx
            )
            if not np.all(np.isnan(table[idx])):
                raise ValueError(f"network: duplicate CPT row for {v.name!r}")
            p_vec = [float(x) for x in row["p"]]
            if len(p_vec) != v.cardinality:
                raise ValueError(
                    f"network: CPT row for {v.name!r} has {len(p_vec)} "
                    f"entries, needs {v.cardinality}")
            table[idx] = p_vec
        if np.any(np.isnan(table)):
            raise ValueError(f"network: CPT for {v.name!r} is missing rows")
        cpts.append(Cpt(i, parent_idx, table))
    return DiscreteNetwork(dag, tuple(cpts))


def network_to_dict(net: DiscreteNetwork) -> dict:
    dag = net.dag
    cpts: dict[str, Any] = {}
    for i, v in enumerate(dag.variables):
        cpt = net.cpts[i]
        parent_names = [dag.names[p] for p in cpt.parent_order]
        rows = []
        shape = tuple(dag.variables[p].cardinality for p in cpt.parent_order)
        for idx in itertools.product(*(range(c) for c in shape)):
            rows.append({
                "given": {
                    name: dag.variables[p].states[s]
                    for name, p, s in zip(parent_names, cpt.parent_order, idx)
                },
                "p": [float(x) for x in cpt.table[idx]],
            })
        cpts[v.name] = {"parents": parent_names, "rows": rows}
    return {
        "variables": [
            {"name": v.name, "states": list(v.states)} for v in dag.variables
        ],
        "arcs": [[p, c] for p, c in sorted(dag.arc_names())],
        "cpts": cpts,
    }


def dag_to_dict(dag: Dag) -> dict:
    return {
        "variables": [
            {"name": v.name, "states": list(v.states)} for v in dag.variables
        ],
        "arcs": [[p, c] for p, c in sorted(dag.arc_names())],
    }


def _read_json(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ValueError(f"{path}: invalid JSON at line {err.lineno}, "
                         f"column {err.colno}: {err.msg}") from None


def load_network(path) -> DiscreteNetwork:
    return network_from_dict(_read_json(path))


def load_dag(path) -> Dag:
    return dag_from_dict(_read_json(path))


def save_network(net: DiscreteNetwork, path):
    Path(path).write_text(json.dumps(network_to_dict(net), indent=2) + "\n")


def save_dag(dag: Dag, path):
    Path(path).write_text(json.dumps(dag_to_dict(dag), indent=2) + "\n")


def load_dataset(path, variables: tuple[Variable, ...]) -> Dataset:
    """Read a CSV of state names against a known scope.

    The header fixes the column order; it must name exactly the given
    variables.
    """
    by_name = {v.name: v for v in variables}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty dataset file") from None
        if set(header) != set(by_name) or len(header) != len(by_name):
            missing = sorted(set(by_name) - set(header))
            extra = sorted(set(header) - set(by_name))
            problem = missing[0] if missing else extra[0]
            raise ScopeError(f"{path}: header disagrees with the expected "
                             f"variables near {problem!r}")
        scope = tuple(by_name[name] for name in header)
        records = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(scope):
                raise ValueError(f"{path}:{lineno}: expected "
                                 f"{len(scope)} cells, got {len(row)}")
            try:
                records.append([v.index(cell) for v, cell in zip(scope, row)])
            except ScopeError as err:
                raise ValueError(f"{path}:{lineno}: {err}") from None
    arr = np.array(records, dtype=np.int64).reshape(len(records), len(scope))
    return Dataset(scope, arr)


def save_dataset(data: Dataset, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        for row in data.state_rows():
            writer.writerow(row)


# Path models only use variable names and arcs, but Dag requires state lists;
# two placeholder states keep the shared structure machinery happy.
_PLACEHOLDER_STATES = ("-", "+")


def path_model_from_dict(obj: Mapping[str, Any]) -> PathModel:
    try:
        names = list(obj["variables"])
    except KeyError:
        raise ValueError("path model: missing 'variables'") from None
    variables = tuple(Variable(n, _PLACEHOLDER_STATES) for n in names)
    arcs = []
    coefs = {}
    for entry in obj.get("arcs", []):
        arc = (entry["from"], entry["to"])
        arcs.append(arc)
        coefs[arc] = float(entry["coef"])
    return PathModel(Dag.from_arcs(variables, arcs), coefs)


def load_path_model(path) -> PathModel:
    return path_model_from_dict(_read_json(path))


def save_path_model(model: PathModel, path):
    obj = {
        "variables": list(model.dag.names),
        "arcs": [
            {"from": a, "to": b, "coef": model.coefficients[(a, b)]}
            for a, b in sorted(model.dag.arc_names())
        ],
    }
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")
