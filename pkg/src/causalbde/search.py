"""Hypothesis-space generation and structure search.

Exhaustive enumeration covers desk-scale node counts; greedy hill climbing
over add/delete/reverse moves handles anything larger. Scoring exploits
decomposability on complete data: the log marginal likelihood is a sum of
per-family terms that depend only on (child, parent set, data), so family
scores are cached across candidate structures. Missing data breaks the
decomposition and falls back to whole-structure scoring.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .equivalence import equivalence_classes, skeleton, v_structures
from .errors import CapExceeded, DataError, VariableMismatch
from .model import Dag, Dataset, DiscreteNetwork, joint_from_network, parent_config_index
from .priors import PriorCounts, prior_family_table
from .scoring import (
    DEFAULT_COMPLETION_CAP,
    _logsumexp,
    family_log_score,
    log_ml_with_hidden,
)

DEFAULT_ENUM_NODE_CAP = 5
DEFAULT_GREEDY_MAX_PARENTS = 3


class Mode(enum.Enum):
    """Causal mode: one hypothesis per DAG, interventions allowed.

    Acausal mode: one hypothesis per Markov equivalence class, and datasets
    containing set observations are rejected, because the acausal semantics
    define no intervention.
    """

    CAUSAL = "causal"
    ACAUSAL = "acausal"


def enumerate_dags(
    nodes: Sequence[str],
    max_parents: int | None = None,
    node_cap: int = DEFAULT_ENUM_NODE_CAP,
) -> list[Dag]:
    """All labeled DAGs on ``nodes`` with bounded parent-set size.

    Deterministic output order: sorted by arc-set encoding. Raises
    CapExceeded past ``node_cap`` nodes; the count grows more than
    exponentially in n.
    """
    nodes = list(nodes)
    n = len(nodes)
    if n > node_cap:
        raise CapExceeded(f"{n} nodes exceeds enumeration cap {node_cap}")
    if n == 0:
        return [Dag(())]
    bound = n - 1 if max_parents is None else min(max_parents, n - 1)
    per_node_choices = []
    for child in nodes:
        others = [p for p in nodes if p != child]
        choices = [
            combo
            for size in range(bound + 1)
            for combo in itertools.combinations(others, size)
        ]
        per_node_choices.append((child, choices))

    dags: list[Dag] = []

    def extend(i: int, arcs: list[tuple[str, str]]):
        if i == n:
            dags.append(Dag(nodes, arcs))
            return
        child, choices = per_node_choices[i]
        for parents in choices:
            new_arcs = arcs + [(p, child) for p in parents]
            if _acyclic(nodes, new_arcs):
                extend(i + 1, new_arcs)

    extend(0, [])
    dags.sort(key=Dag.sort_key)
    return dags


def _acyclic(nodes: Sequence[str], arcs: Sequence[tuple[str, str]]) -> bool:
    children: dict[str, list[str]] = {v: [] for v in nodes}
    indeg = {v: 0 for v in nodes}
    for p, c in arcs:
        children[p].append(c)
        indeg[c] += 1
    ready = [v for v in nodes if indeg[v] == 0]
    seen = 0
    while ready:
        v = ready.pop()
        seen += 1
        for c in children[v]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return seen == len(nodes)


class StructureScorer:
    """Scores candidate structures against one dataset and prior network.

    Family scores are cached by (child, parent set, dataset fingerprint), so
    the cache is bit-stable: repeated lookups return the identical float.
    Only complete datasets decompose; otherwise whole structures are scored
    through the exact missing-data sum and cached by arc set.
    """

    def __init__(
        self,
        dataset: Dataset,
        prior_net: DiscreteNetwork,
        ess: float,
        completion_cap: int = DEFAULT_COMPLETION_CAP,
    ):
        if set(dataset.names) != set(prior_net.names):
            raise VariableMismatch(
                f"dataset variables {sorted(dataset.names)} do not match prior "
                f"network variables {sorted(prior_net.names)}"
            )
        self.dataset = dataset
        self.prior_net = prior_net
        self.ess = ess
        self.completion_cap = completion_cap
        self._joint = joint_from_network(prior_net)
        self._fingerprint = dataset.fingerprint()
        self._arity = {v.name: v.arity for v in dataset.variables}
        self._decomposable = dataset.is_complete
        self._family_cache: dict[tuple, float] = {}
        self._structure_cache: dict[frozenset, float] = {}
        self._prior_table_cache: dict[tuple, np.ndarray] = {}

    def _family_counts(self, child: str, parents: tuple[str, ...]) -> np.ndarray:
        parities = [self._arity[p] for p in parents]
        table = np.zeros((math.prod(parities), self._arity[child]), dtype=np.int64)
        for case in self.dataset.cases:
            obs = case[child]
            if obs.is_set:
                continue
            j = parent_config_index(parities, [case[p].value for p in parents])
            table[j, obs.value] += 1
        return table

    def prior_family(self, child: str, parents: tuple[str, ...]) -> np.ndarray:
        key = (child, parents)
        if key not in self._prior_table_cache:
            self._prior_table_cache[key] = prior_family_table(
                self._joint, self.ess, child, parents
            )
        return self._prior_table_cache[key]

    def family_log_ml(self, child: str, parents: tuple[str, ...]) -> float:
        key = (child, parents, self._fingerprint)
        if key not in self._family_cache:
            self._family_cache[key] = family_log_score(
                self.prior_family(child, parents), self._family_counts(child, parents)
            )
        return self._family_cache[key]

    def priors_for(self, dag: Dag) -> PriorCounts:
        return PriorCounts(
            {name: dag.parents(name) for name in dag.nodes},
            {name: self.prior_family(name, dag.parents(name)) for name in dag.nodes},
        )

    def log_ml(self, dag: Dag) -> float:
        if self._decomposable:
            return math.fsum(
                self.family_log_ml(name, dag.parents(name)) for name in dag.nodes
            )
        key = dag.arcs
        if key not in self._structure_cache:
            self._structure_cache[key] = log_ml_with_hidden(
                dag, self.priors_for(dag), self.dataset, self.completion_cap
            )
        return self._structure_cache[key]


@dataclass(frozen=True)
class RankedHypothesis:
    id: str
    structure: Dag
    prior: float
    log_ml: float
    posterior: float
    members: tuple[Dag, ...] | None = None


@dataclass(frozen=True)
class TraceStep:
    restart: int
    move: str
    log_ml: float
    delta: float


@dataclass(frozen=True)
class SearchResult:
    """Ranked hypotheses (descending posterior, ties by id) plus, for greedy
    runs, the per-restart move trace."""

    mode: Mode
    entries: tuple[RankedHypothesis, ...]
    trace: tuple[TraceStep, ...] = ()

    @property
    def best(self) -> RankedHypothesis:
        return self.entries[0]


def _rank(
    scored: list[tuple[str, Dag, float, float, tuple[Dag, ...] | None]]
) -> tuple[RankedHypothesis, ...]:
    log_unnorm = [
        (math.log(prior) if prior > 0.0 else -math.inf) + lml
        for _, _, prior, lml, _ in scored
    ]
    total = _logsumexp(log_unnorm)
    entries = [
        RankedHypothesis(hid, dag, prior, lml, math.exp(lu - total), members)
        for (hid, dag, prior, lml, members), lu in zip(scored, log_unnorm)
    ]
    entries.sort(key=lambda e: (-e.posterior, e.id))
    return tuple(entries)


def _require_observational(dataset: Dataset) -> None:
    if dataset.has_interventions():
        raise DataError(
            "acausal mode defines no intervention semantics; the dataset "
            "contains set observations"
        )


def exhaustive_posterior(
    dataset: Dataset,
    prior_net: DiscreteNetwork,
    ess: float,
    mode: Mode,
    max_parents: int | None = None,
    completion_cap: int = DEFAULT_COMPLETION_CAP,
) -> SearchResult:
    """Full posterior over every DAG (causal) or every class (acausal).

    Hypothesis priors are uniform over the enumerated hypothesis list.
    """
    scorer = StructureScorer(dataset, prior_net, ess, completion_cap)
    dags = enumerate_dags(dataset.names, max_parents)
    scored: list[tuple[str, Dag, float, float, tuple[Dag, ...] | None]] = []
    if mode is Mode.ACAUSAL:
        _require_observational(dataset)
        classes = equivalence_classes(dags)
        prior = 1.0 / len(classes)
        for cls in classes:
            lml = scorer.log_ml(cls.representative)
            scored.append((cls.class_id(), cls.representative, prior, lml, cls.members))
    else:
        prior = 1.0 / len(dags)
        for dag in dags:
            scored.append((dag.arc_id(), dag, prior, scorer.log_ml(dag), None))
    return SearchResult(mode, _rank(scored))


def _random_start(
    rng: np.random.Generator, nodes: Sequence[str], max_parents: int
) -> Dag:
    # Random topological order, then each forward arc kept with prob 0.3,
    # respecting the parent bound. One rng.random() per candidate arc.
    order = [nodes[i] for i in rng.permutation(len(nodes))]
    arcs = []
    n_parents = {v: 0 for v in nodes}
    for i, p in enumerate(order):
        for c in order[i + 1:]:
            if n_parents[c] < max_parents and rng.random() < 0.3:
                arcs.append((p, c))
                n_parents[c] += 1
    return Dag(nodes, arcs)


def _legal_moves(
    dag: Dag, max_parents: int
) -> list[tuple[str, str, str]]:
    moves = []
    nodes = dag.nodes
    for p in nodes:
        for c in nodes:
            if p == c:
                continue
            if dag.has_arc(p, c):
                moves.append(("delete", p, c))
                if len(dag.parents(p)) < max_parents:
                    moves.append(("reverse", p, c))
            elif len(dag.parents(c)) < max_parents:
                moves.append(("add", p, c))
    moves.sort()
    return moves


def _apply_move(dag: Dag, move: tuple[str, str, str]) -> Dag:
    kind, p, c = move
    if kind == "add":
        return dag.with_arc(p, c)
    if kind == "delete":
        return dag.without_arc(p, c)
    return dag.with_reversed_arc(p, c)


def greedy_search(
    dataset: Dataset,
    prior_net: DiscreteNetwork,
    ess: float,
    mode: Mode,
    seed: int,
    restarts: int = 1,
    max_parents: int = DEFAULT_GREEDY_MAX_PARENTS,
    completion_cap: int = DEFAULT_COMPLETION_CAP,
) -> SearchResult:
    """Hill climbing over add/delete/reverse moves, best of ``restarts`` chains.

    Chain 0 starts from the empty graph; later chains start from random DAGs
    drawn from the seeded generator. Only strictly improving moves commit;
    candidate moves are evaluated in sorted order, so ties break
    lexicographically and a fixed seed reproduces the trace exactly.
    """
    if restarts < 1:
        raise DataError("restarts must be >= 1")
    if mode is Mode.ACAUSAL:
        _require_observational(dataset)
    scorer = StructureScorer(dataset, prior_net, ess, completion_cap)
    rng = np.random.Generator(np.random.PCG64(seed))
    nodes = dataset.names
    finals: list[tuple[Dag, float]] = []
    trace: list[TraceStep] = []
    for chain in range(restarts):
        current = Dag(nodes) if chain == 0 else _random_start(rng, nodes, max_parents)
        current_score = scorer.log_ml(current)
        while True:
            best_move, best_dag, best_score = None, None, current_score
            for move in _legal_moves(current, max_parents):
                candidate = _apply_move(current, move)
                if not _acyclic(nodes, list(candidate.arcs)):
                    continue
                score = scorer.log_ml(candidate)
                if score > best_score:
                    best_move, best_dag, best_score = move, candidate, score
            if best_move is None:
                break
            trace.append(
                TraceStep(
                    chain,
                    f"{best_move[0]} {best_move[1]}->{best_move[2]}",
                    best_score,
                    best_score - current_score,
                )
            )
            current, current_score = best_dag, best_score
        finals.append((current, current_score))

    # Deduplicate local optima; in acausal mode, by equivalence class.
    distinct: list[tuple[Dag, float]] = []
    seen = set()
    for dag, score in sorted(finals, key=lambda t: t[0].sort_key()):
        key = (skeleton(dag), v_structures(dag)) if mode is Mode.ACAUSAL else dag.arcs
        if key in seen:
            continue
        seen.add(key)
        distinct.append((dag, score))
    prior = 1.0 / len(distinct)
    scored = [
        (dag.arc_id(), dag, prior, score, None) for dag, score in distinct
    ]
    return SearchResult(mode, _rank(scored), tuple(trace))
