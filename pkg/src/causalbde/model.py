"""Core domain types: variables, DAGs, CPTs, cases, and exact joint tables.

Everything here is immutable after construction and safe to share across
threads. State identity is positional: state ``k`` of a variable means the
k-th label in its declared state list. Parent configurations are encoded in
mixed radix with the FIRST listed parent most significant.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    ArityMismatch,
    CycleDetected,
    DataError,
    MissingValue,
    StateSpaceTooLarge,
    UnknownNode,
    VariableMismatch,
)

DEFAULT_STATE_CAP = 2 ** 20

CPT_ROW_TOL = 1e-12
JOINT_SUM_TOL = 1e-10


@dataclass(frozen=True)
class Variable:
    """A categorical variable with at least two uniquely labeled states."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) < 2:
            raise DataError(f"variable {self.name!r} needs >= 2 states")
        if len(set(self.states)) != len(self.states):
            raise DataError(f"variable {self.name!r} has duplicate state labels")

    @property
    def arity(self) -> int:
        return len(self.states)

    def state_index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise DataError(
                f"unknown state {label!r} for variable {self.name!r}"
            ) from None


class Dag:
    """A directed graph over named nodes.

    Construction is permissive (cycles and dangling arc endpoints allowed)
    so that :func:`validate_dag` can report them; every other operation in
    the package assumes a validated DAG. Parent lists are ordered by node
    declaration order, which fixes the mixed-radix row encoding.
    """

    __slots__ = ("nodes", "arcs", "_parents", "_children")

    def __init__(self, nodes: Iterable[str], arcs: Iterable[tuple[str, str]] = ()):
        nodes = tuple(nodes)
        if len(set(nodes)) != len(nodes):
            raise DataError("duplicate node names")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "arcs", frozenset((p, c) for p, c in arcs))
        rank = {n: i for i, n in enumerate(nodes)}
        parents: dict[str, list[str]] = {n: [] for n in nodes}
        children: dict[str, list[str]] = {n: [] for n in nodes}
        for p, c in self.arcs:
            if p in rank and c in parents:
                parents[c].append(p)
            if c in rank and p in children:
                children[p].append(c)
        object.__setattr__(
            self,
            "_parents",
            {c: tuple(sorted(ps, key=rank.__getitem__)) for c, ps in parents.items()},
        )
        object.__setattr__(
            self,
            "_children",
            {p: tuple(sorted(cs, key=rank.__getitem__)) for p, cs in children.items()},
        )

    def __setattr__(self, name, value):
        raise AttributeError("Dag is immutable")

    def parents(self, node: str) -> tuple[str, ...]:
        try:
            return self._parents[node]
        except KeyError:
            raise UnknownNode(f"unknown node {node!r}") from None

    def children(self, node: str) -> tuple[str, ...]:
        try:
            return self._children[node]
        except KeyError:
            raise UnknownNode(f"unknown node {node!r}") from None

    def has_arc(self, parent: str, child: str) -> bool:
        return (parent, child) in self.arcs

    def with_arc(self, parent: str, child: str) -> "Dag":
        return Dag(self.nodes, self.arcs | {(parent, child)})

    def without_arc(self, parent: str, child: str) -> "Dag":
        return Dag(self.nodes, self.arcs - {(parent, child)})

    def with_reversed_arc(self, parent: str, child: str) -> "Dag":
        return Dag(self.nodes, (self.arcs - {(parent, child)}) | {(child, parent)})

    def arc_id(self) -> str:
        """Deterministic text encoding of the arc set, used as a hypothesis id."""
        if not self.arcs:
            return "empty"
        return ",".join(f"{p}->{c}" for p, c in sorted(self.arcs))

    def sort_key(self) -> tuple:
        return tuple(sorted(self.arcs))

    def __eq__(self, other):
        return (
            isinstance(other, Dag)
            and self.nodes == other.nodes
            and self.arcs == other.arcs
        )

    def __hash__(self):
        return hash((self.nodes, self.arcs))

    def __repr__(self):
        return f"Dag(nodes={self.nodes!r}, arcs={sorted(self.arcs)!r})"


def validate_dag(dag: Dag) -> list[str]:
    """Check a Dag is well formed and acyclic; return a topological order.

    Raises UnknownNode for arcs touching undeclared nodes and CycleDetected
    (listing one cycle) otherwise. The returned order is deterministic:
    Kahn's algorithm seeded in node declaration order.
    """
    declared = set(dag.nodes)
    for p, c in dag.arcs:
        if p not in declared or c not in declared:
            raise UnknownNode(f"arc ({p!r}, {c!r}) references an undeclared node")
    indegree = {n: 0 for n in dag.nodes}
    for _, c in dag.arcs:
        indegree[c] += 1
    order: list[str] = []
    ready = [n for n in dag.nodes if indegree[n] == 0]
    while ready:
        node = ready.pop(0)
        order.append(node)
        for c in dag.children(node):
            indegree[c] -= 1
            if indegree[c] == 0:
                ready.append(c)
        ready.sort(key=dag.nodes.index)
    if len(order) == len(dag.nodes):
        return order
    raise CycleDetected(_find_cycle(dag, {n for n in dag.nodes if n not in order}))


def _find_cycle(dag: Dag, candidates: set[str]) -> list[str]:
    # Every leftover node keeps at least one leftover parent, so a backward
    # walk inside the leftover set must revisit a node.
    start = sorted(candidates, key=dag.nodes.index)[0]
    path, seen = [start], {start: 0}
    node = start
    while True:
        node = next(p for p in dag.parents(node) if p in candidates)
        if node in seen:
            backward = path[seen[node]:] + [node]
            return backward[::-1]
        seen[node] = len(path)
        path.append(node)


def parent_config_index(arities: Sequence[int], states: Sequence[int]) -> int:
    """Mixed-radix index of a parent-state assignment, first parent most significant.

    The empty assignment maps to 0. Bijective onto 0..q-1 where q is the
    product of the arities.
    """
    if len(arities) != len(states):
        raise ArityMismatch(
            f"{len(states)} states supplied for {len(arities)} parents"
        )
    index = 0
    for r, k in zip(arities, states):
        if not 0 <= k < r:
            raise ArityMismatch(f"state {k} out of range for arity {r}")
        index = index * r + k
    return index


def parent_config_states(arities: Sequence[int], index: int) -> tuple[int, ...]:
    """Inverse of parent_config_index."""
    q = math.prod(arities)
    if not 0 <= index < q:
        raise ArityMismatch(f"configuration index {index} out of range for q={q}")
    states = [0] * len(arities)
    for pos in range(len(arities) - 1, -1, -1):
        index, states[pos] = divmod(index, arities[pos])
    return tuple(states)


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table for one child variable.

    Row j holds the child distribution for parent configuration j (mixed-radix
    order over the listed parents). Entries must be strictly positive and rows
    must sum to 1 within 1e-12.
    """

    child: str
    parents: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(
            self, "rows", tuple(tuple(float(v) for v in row) for row in self.rows)
        )
        if not self.rows:
            raise DataError(f"cpt for {self.child!r} has no rows")
        width = len(self.rows[0])
        for j, row in enumerate(self.rows):
            if len(row) != width:
                raise DataError(f"cpt for {self.child!r} has ragged rows")
            if any(v <= 0.0 for v in row):
                raise DataError(
                    f"cpt for {self.child!r}, row {j}: entries must be > 0"
                )
            if abs(math.fsum(row) - 1.0) > CPT_ROW_TOL:
                raise DataError(
                    f"cpt for {self.child!r}, row {j}: probabilities sum to "
                    f"{math.fsum(row)!r}, not 1"
                )

    @property
    def arity(self) -> int:
        return len(self.rows[0])


@dataclass(frozen=True)
class DiscreteNetwork:
    """A DAG over categorical variables plus one CPT per variable.

    Doubles as a prior network (a joint distribution to derive Dirichlet
    exponents from) and as a ground-truth model for the simulator.
    """

    variables: tuple[Variable, ...]
    dag: Dag
    cpts: Mapping[str, Cpt]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cpts", dict(self.cpts))
        names = tuple(v.name for v in self.variables)
        if names != self.dag.nodes:
            raise VariableMismatch(
                f"network variables {names!r} do not match dag nodes {self.dag.nodes!r}"
            )
        order = validate_dag(self.dag)
        by_name = {v.name: v for v in self.variables}
        for name in names:
            cpt = self.cpts.get(name)
            if cpt is None:
                raise DataError(f"no cpt supplied for variable {name!r}")
            if cpt.child != name:
                raise DataError(f"cpt keyed {name!r} declares child {cpt.child!r}")
            expected = self.dag.parents(name)
            if cpt.parents != expected:
                raise DataError(
                    f"cpt for {name!r} lists parents {cpt.parents}, expected "
                    f"{expected} (node declaration order)"
                )
            q = math.prod(by_name[p].arity for p in expected)
            if len(cpt.rows) != q:
                raise DataError(
                    f"cpt for {name!r} has {len(cpt.rows)} rows, expected {q}"
                )
            if cpt.arity != by_name[name].arity:
                raise DataError(
                    f"cpt for {name!r} has {cpt.arity} columns, expected "
                    f"{by_name[name].arity}"
                )
        object.__setattr__(self, "_by_name", by_name)
        object.__setattr__(self, "_topo", tuple(order))

    @classmethod
    def build(
        cls,
        variables: Sequence[Variable],
        arcs: Iterable[tuple[str, str]],
        tables: Mapping[str, Sequence[Sequence[float]]],
    ) -> "DiscreteNetwork":
        """Assemble a network from raw tables, deriving each CPT's parent list."""
        dag = Dag([v.name for v in variables], arcs)
        cpts = {
            v.name: Cpt(v.name, dag.parents(v.name), tables[v.name])
            for v in variables
        }
        return cls(tuple(variables), dag, cpts)

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownNode(f"unknown variable {name!r}") from None

    def arity(self, name: str) -> int:
        return self.variable(name).arity

    @property
    def names(self) -> tuple[str, ...]:
        return self.dag.nodes

    @property
    def topological_order(self) -> tuple[str, ...]:
        return self._topo


class ObservationKind(Enum):
    OBSERVED = "observed"
    SET = "set"
    MISSING = "missing"


@dataclass(frozen=True)
class Observation:
    """How one variable shows up in one case.

    Observed(k): the variable was passively seen in state k. Set(k): an
    intervention forced state k. Missing: not recorded (hidden variables are
    Missing in every case). Set and Missing are orthogonal to each other;
    a value is exactly one of the three.
    """

    kind: ObservationKind
    state: int | None = None

    def __post_init__(self):
        if self.kind is ObservationKind.MISSING:
            if self.state is not None:
                raise DataError("missing observations carry no state")
        else:
            if self.state is None or self.state < 0:
                raise DataError("observed/set observations need a state index >= 0")

    @classmethod
    def observed(cls, state: int) -> "Observation":
        return cls(ObservationKind.OBSERVED, state)

    @classmethod
    def set_to(cls, state: int) -> "Observation":
        return cls(ObservationKind.SET, state)

    @classmethod
    def missing(cls) -> "Observation":
        return MISSING

    @property
    def is_observed(self) -> bool:
        return self.kind is ObservationKind.OBSERVED

    @property
    def is_set(self) -> bool:
        return self.kind is ObservationKind.SET

    @property
    def is_missing(self) -> bool:
        return self.kind is ObservationKind.MISSING

    @property
    def value(self) -> int:
        if self.state is None:
            raise MissingValue("observation has no value")
        return self.state


MISSING = Observation(ObservationKind.MISSING, None)

Case = Mapping[str, Observation]


@dataclass(frozen=True)
class Dataset:
    """An ordered list of cases over a fixed variable set.

    Every case maps every declared variable to an Observation. Variables in
    ``hidden`` must be Missing in every case; non-hidden variables may still
    be sporadically Missing.
    """

    variables: tuple[Variable, ...]
    cases: tuple[Case, ...]
    hidden: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "cases", tuple(dict(c) for c in self.cases))
        object.__setattr__(self, "hidden", frozenset(self.hidden))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise DataError("duplicate variable names in dataset")
        unknown_hidden = self.hidden - set(names)
        if unknown_hidden:
            raise UnknownNode(f"hidden variables not declared: {sorted(unknown_hidden)}")
        arity = {v.name: v.arity for v in self.variables}
        for i, case in enumerate(self.cases):
            if set(case) != set(names):
                raise DataError(f"case {i} does not cover the declared variable set")
            for name, obs in case.items():
                if obs.is_missing:
                    continue
                if name in self.hidden:
                    raise DataError(
                        f"case {i}: hidden variable {name!r} must be missing"
                    )
                if obs.value >= arity[name]:
                    raise ArityMismatch(
                        f"case {i}: state {obs.value} out of range for {name!r}"
                    )

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def n_cases(self) -> int:
        return len(self.cases)

    @property
    def is_complete(self) -> bool:
        return not any(
            obs.is_missing for case in self.cases for obs in case.values()
        )

    def has_interventions(self) -> bool:
        return any(obs.is_set for case in self.cases for obs in case.values())

    def with_case(self, case: Case) -> "Dataset":
        return Dataset(self.variables, self.cases + (dict(case),), self.hidden)

    def fingerprint(self) -> str:
        """Stable content hash used as a score-cache key component."""
        h = hashlib.sha256()
        for v in self.variables:
            h.update(repr((v.name, v.states)).encode())
        h.update(repr(sorted(self.hidden)).encode())
        for case in self.cases:
            for name in self.names:
                obs = case[name]
                h.update(f"{name}={obs.kind.value}:{obs.state}".encode())
            h.update(b";")
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """Dense probability table over the joint states of a variable list.

    Cell order is mixed radix over the variables as listed, first variable
    most significant.
    """

    variables: tuple[Variable, ...]
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        probs = np.asarray(self.probs, dtype=float)
        size = math.prod(v.arity for v in self.variables)
        if probs.shape != (size,):
            raise DataError(f"joint table has {probs.shape} entries, expected {size}")
        if np.any(probs < 0.0):
            raise DataError("joint table has negative entries")
        if abs(float(probs.sum()) - 1.0) > JOINT_SUM_TOL:
            raise DataError(f"joint table sums to {float(probs.sum())!r}, not 1")
        probs = probs.copy()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @property
    def arities(self) -> tuple[int, ...]:
        return tuple(v.arity for v in self.variables)

    def index(self, assignment: Sequence[int]) -> int:
        return parent_config_index(self.arities, assignment)

    def prob(self, assignment: Sequence[int]) -> float:
        return float(self.probs[self.index(assignment)])

    def cells(self) -> Iterator[tuple[tuple[int, ...], float]]:
        """Yield (joint state, probability) in table order."""
        ranges = [range(v.arity) for v in self.variables]
        for i, states in enumerate(itertools.product(*ranges)):
            yield states, float(self.probs[i])

    def marginal_prob(self, partial: Mapping[str, int]) -> float:
        """Probability that every variable in ``partial`` takes its given state."""
        pos = {v.name: i for i, v in enumerate(self.variables)}
        for name in partial:
            if name not in pos:
                raise UnknownNode(f"unknown variable {name!r}")
        total = 0.0
        for states, p in self.cells():
            if all(states[pos[n]] == k for n, k in partial.items()):
                total += p
        return total


def joint_from_network(
    net: DiscreteNetwork, cap: int = DEFAULT_STATE_CAP
) -> JointDistribution:
    """Exact joint distribution implied by a network, by dense enumeration.

    The joint over u is the product of each variable's CPT entry at its
    parents' states in u. Raises StateSpaceTooLarge past ``cap`` cells.
    """
    arities = [v.arity for v in net.variables]
    size = math.prod(arities)
    if size > cap:
        raise StateSpaceTooLarge(f"{size} joint states exceeds cap {cap}")
    pos = {name: i for i, name in enumerate(net.names)}
    families = []
    for i, name in enumerate(net.names):
        parents = net.dag.parents(name)
        families.append(
            (i, [pos[p] for p in parents], [arities[pos[p]] for p in parents],
             net.cpts[name].rows)
        )
    probs = np.empty(size, dtype=float)
    for flat, states in enumerate(itertools.product(*[range(r) for r in arities])):
        p = 1.0
        for i, ppos, parities, rows in families:
            j = parent_config_index(parities, [states[t] for t in ppos])
            p *= rows[j][states[i]]
        probs[flat] = p
    return JointDistribution(tuple(net.variables), probs)
