"""File formats: network JSON, case CSV, regime CSV, DOT export.

Network JSON:
    {"variables": [{"name": "x", "states": ["0", "1"]}, ...],
     "arcs": [["x", "y"], ...],
     "cpts": {"y": {"parents": ["x"], "table": [[0.8, 0.2], [0.3, 0.7]]}, ...}}
Table rows follow the mixed-radix parent configuration order (first parent
most significant); each row must sum to 1 within 1e-9 at load and zero
entries are rejected outright. Rows already within the in-memory tolerance
are left untouched, so save/load round-trips bit-exactly.

Case CSV (UTF-8, header = variable names): a bare state label is an observed
value, ``?`` is missing, and ``!label`` is a value forced by intervention.
Hidden variables must be ``?`` in every row or absent as a column.

Regime CSV (header = variable names): an empty cell means "do nothing", a
bare state label means "set to that state".
"""

from __future__ import annotations

import csv
import json
import math
from typing import Iterable, Mapping, Sequence, TextIO

from .errors import FormatError
from .model import (
    CPT_ROW_TOL,
    Case,
    Cpt,
    Dag,
    Dataset,
    DiscreteNetwork,
    Observation,
    Variable,
)
from .simulator import Regime

CPT_LOAD_TOL = 1e-9


def _as_variables(raw, path) -> list[Variable]:
    if not isinstance(raw, list) or not raw:
        raise FormatError("expected a non-empty list under 'variables'", path)
    variables = []
    for entry in raw:
        try:
            variables.append(Variable(entry["name"], tuple(entry["states"])))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad variable entry {entry!r}: {exc}", path) from None
    return variables


def load_network(path: str) -> DiscreteNetwork:
    """Load a network JSON file, validating rows strictly."""
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise FormatError(str(exc), path) from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    for key in ("variables", "arcs", "cpts"):
        if key not in doc:
            raise FormatError(f"missing key {key!r}", path)
    variables = _as_variables(doc["variables"], path)
    dag = Dag([v.name for v in variables], [tuple(a) for a in doc["arcs"]])
    cpts = {}
    for v in variables:
        spec = doc["cpts"].get(v.name)
        if spec is None:
            raise FormatError(f"no cpt for variable {v.name!r}", path)
        parents = tuple(spec.get("parents", ()))
        rows = []
        for j, row in enumerate(spec["table"]):
            row = [float(x) for x in row]
            if any(x <= 0.0 for x in row):
                raise FormatError(
                    f"cpt for {v.name!r}, row {j}: zero or negative probability "
                    "entries are not allowed",
                    path,
                )
            total = math.fsum(row)
            if abs(total - 1.0) > CPT_LOAD_TOL:
                raise FormatError(
                    f"cpt for {v.name!r}, row {j}: sums to {total!r}", path
                )
            if abs(total - 1.0) > CPT_ROW_TOL:
                row = [x / total for x in row]
            rows.append(row)
        cpts[v.name] = Cpt(v.name, parents, rows)
    try:
        return DiscreteNetwork(tuple(variables), dag, cpts)
    except Exception as exc:
        raise FormatError(str(exc), path) from None


def save_network(net: DiscreteNetwork, path: str) -> None:
    doc = {
        "variables": [
            {"name": v.name, "states": list(v.states)} for v in net.variables
        ],
        "arcs": [list(a) for a in sorted(net.dag.arcs)],
        "cpts": {
            name: {
                "parents": list(net.cpts[name].parents),
                "table": [list(row) for row in net.cpts[name].rows],
            }
            for name in net.names
        },
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2)
        handle.write("\n")


def load_structure(path: str) -> Dag:
    """Load a bare structure: either a network file or {"nodes": [...], "arcs": [...]}."""
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise FormatError(str(exc), path) from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if "nodes" in doc:
        nodes = list(doc["nodes"])
    elif "variables" in doc:
        nodes = [entry["name"] for entry in doc["variables"]]
    else:
        raise FormatError("expected 'nodes' or 'variables'", path)
    return Dag(nodes, [tuple(a) for a in doc.get("arcs", ())])


def _parse_cell(
    cell: str, variable: Variable, path: str, line: int
) -> Observation:
    cell = cell.strip()
    if cell == "?":
        return Observation.missing()
    if cell.startswith("!"):
        label = cell[1:]
        kind = Observation.set_to
    else:
        label = cell
        kind = Observation.observed
    if label not in variable.states:
        raise FormatError(
            f"unknown state {label!r} for variable {variable.name!r}", path, line
        )
    return kind(variable.states.index(label))


def load_cases(
    path: str, variables: Sequence[Variable], hidden: Iterable[str] = ()
) -> Dataset:
    """Load a case CSV against declared variables.

    Hidden variables may be physically absent from the file; they are filled
    in as missing.
    """
    hidden = frozenset(hidden)
    by_name = {v.name: v for v in variables}
    unknown_hidden = hidden - set(by_name)
    if unknown_hidden:
        raise FormatError(
            f"hidden variables not declared by the network: {sorted(unknown_hidden)}",
            path,
        )
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.reader(handle)
            rows = list(reader)
    except OSError as exc:
        raise FormatError(str(exc), path) from None
    if not rows:
        raise FormatError("empty case file", path)
    header = [h.strip() for h in rows[0]]
    unknown = [h for h in header if h not in by_name]
    if unknown:
        raise FormatError(f"unknown column(s) {unknown}", path, 1)
    if len(set(header)) != len(header):
        raise FormatError("duplicate column names", path, 1)
    absent = set(by_name) - set(header)
    not_hidden = absent - hidden
    if not_hidden:
        raise FormatError(
            f"missing column(s) for non-hidden variable(s) {sorted(not_hidden)}",
            path,
            1,
        )
    cases = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise FormatError(
                f"expected {len(header)} cells, found {len(row)}", path, lineno
            )
        case: dict[str, Observation] = {
            name: Observation.missing() for name in absent
        }
        for name, cell in zip(header, row):
            case[name] = _parse_cell(cell, by_name[name], path, lineno)
        for name in hidden:
            if not case[name].is_missing:
                raise FormatError(
                    f"hidden variable {name!r} has a value", path, lineno
                )
        cases.append(case)
    return Dataset(tuple(variables), tuple(cases), hidden)


def format_observation(obs: Observation, variable: Variable) -> str:
    if obs.is_missing:
        return "?"
    label = variable.states[obs.value]
    return f"!{label}" if obs.is_set else label


def write_cases(dataset: Dataset, handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(dataset.names)
    by_name = {v.name: v for v in dataset.variables}
    for case in dataset.cases:
        writer.writerow(
            [format_observation(case[name], by_name[name]) for name in dataset.names]
        )


def save_cases(dataset: Dataset, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        write_cases(dataset, handle)


def load_regime(path: str, variables: Sequence[Variable]) -> Regime:
    by_name = {v.name: v for v in variables}
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise FormatError(str(exc), path) from None
    if not rows:
        raise FormatError("empty regime file", path)
    header = [h.strip() for h in rows[0]]
    unknown = [h for h in header if h not in by_name]
    if unknown:
        raise FormatError(f"unknown column(s) {unknown}", path, 1)
    assignments = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise FormatError(
                f"expected {len(header)} cells, found {len(row)}", path, lineno
            )
        assignment = {}
        for name, cell in zip(header, row):
            cell = cell.strip()
            if not cell:
                continue
            variable = by_name[name]
            if cell not in variable.states:
                raise FormatError(
                    f"unknown state {cell!r} for variable {name!r}", path, lineno
                )
            assignment[name] = variable.states.index(cell)
        assignments.append(assignment)
    return Regime(tuple(assignments))


def save_dot(dag: Dag, path: str) -> None:
    """Write one digraph, nodes labeled by variable name."""
    lines = ["digraph structure {"]
    for node in dag.nodes:
        lines.append(f'  "{node}";')
    for p, c in sorted(dag.arcs):
        lines.append(f'  "{p}" -> "{c}";')
    lines.append("}")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def load_structure_priors(path: str, n: int) -> list[float]:
    """JSON array of hypothesis priors aligned with the structure list order."""
    try:
        with open(path, encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise FormatError(str(exc), path) from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if not isinstance(doc, list) or len(doc) != n:
        raise FormatError(f"expected a JSON array of {n} priors", path)
    return [float(x) for x in doc]
