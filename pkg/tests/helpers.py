"""Shared construction helpers for the test suite."""

from __future__ import annotations

import numpy as np

from causalbde import Dag, Dataset, DiscreteNetwork, Observation, Variable


def bvar(name: str) -> Variable:
    return Variable(name, ("0", "1"))


def var(name: str, arity: int) -> Variable:
    return Variable(name, tuple(str(k) for k in range(arity)))


def uniform_net(names) -> DiscreteNetwork:
    """Independent variables, every row uniform: the joint is flat."""
    variables = tuple(bvar(n) for n in names)
    return DiscreteNetwork.build(
        variables, [], {n: [[0.5, 0.5]] for n in names}
    )


def random_dag(rng: np.random.Generator, names, p_arc: float = 0.4) -> Dag:
    order = [names[i] for i in rng.permutation(len(names))]
    arcs = []
    for i, p in enumerate(order):
        for c in order[i + 1:]:
            if rng.random() < p_arc:
                arcs.append((p, c))
    return Dag(tuple(names), arcs)


def random_network(
    rng: np.random.Generator, names, arities=None, p_arc: float = 0.4
) -> DiscreteNetwork:
    """Random structure with CPT entries bounded away from zero."""
    arities = arities or {n: 2 for n in names}
    variables = tuple(var(n, arities[n]) for n in names)
    dag = random_dag(rng, names, p_arc)
    tables = {}
    for v in variables:
        q = 1
        for p in dag.parents(v.name):
            q *= arities[p]
        rows = []
        for _ in range(q):
            raw = 0.2 + 0.8 * rng.random(v.arity)
            rows.append(list(raw / raw.sum()))
        tables[v.name] = rows
    return DiscreteNetwork(variables, dag, {
        v.name: _cpt(v.name, dag.parents(v.name), tables[v.name])
        for v in variables
    })


def _cpt(child, parents, rows):
    from causalbde import Cpt

    return Cpt(child, parents, rows)


def random_cases(
    rng: np.random.Generator,
    variables,
    n: int,
    p_set: float = 0.0,
) -> Dataset:
    """Cases drawn uniformly at random; optionally some values are set."""
    cases = []
    for _ in range(n):
        case = {}
        for v in variables:
            k = int(rng.integers(v.arity))
            if p_set and rng.random() < p_set:
                case[v.name] = Observation.set_to(k)
            else:
                case[v.name] = Observation.observed(k)
        cases.append(case)
    return Dataset(tuple(variables), tuple(cases))


def as_oracle_cases(dataset: Dataset):
    """Dataset cases in the plain-tuple form the oracles consume."""
    kind_of = {"observed": "obs", "set": "set", "missing": "missing"}
    return [
        {
            name: (kind_of[case[name].kind.value], case[name].state)
            for name in dataset.names
        }
        for case in dataset.cases
    ]


def oracle_parents(dag: Dag):
    return {name: list(dag.parents(name)) for name in dag.nodes}
