"""Markov equivalence of DAGs: skeleton plus v-structure comparison.

Two DAGs over the same variables represent the same set of distributions
exactly when they share an undirected skeleton and the same set of
colliders a -> c <- b with a, b nonadjacent. Equivalence classes back the
acausal learning mode, where one hypothesis stands for a whole class.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import VariableMismatch
from .model import Dag


def skeleton(dag: Dag) -> frozenset[tuple[str, str]]:
    """Undirected edge set; each edge a sorted name pair."""
    return frozenset(tuple(sorted((p, c))) for p, c in dag.arcs)


def v_structures(dag: Dag) -> frozenset[tuple[str, str, str]]:
    """All triples (a, c, b) with a -> c <- b, a and b nonadjacent, a < b."""
    adjacent = skeleton(dag)
    triples = set()
    for c in dag.nodes:
        ps = sorted(dag.parents(c))
        for i, a in enumerate(ps):
            for b in ps[i + 1:]:
                if tuple(sorted((a, b))) not in adjacent:
                    triples.add((a, c, b))
    return frozenset(triples)


def equivalent(d1: Dag, d2: Dag) -> bool:
    """True iff the two DAGs share skeleton and v-structures."""
    if set(d1.nodes) != set(d2.nodes):
        raise VariableMismatch(
            f"node sets differ: {sorted(d1.nodes)} vs {sorted(d2.nodes)}"
        )
    return skeleton(d1) == skeleton(d2) and v_structures(d1) == v_structures(d2)


@dataclass(frozen=True)
class EquivalenceClass:
    """One Markov equivalence class: its members share skeleton and colliders."""

    representative: Dag
    members: tuple[Dag, ...]
    skeleton: frozenset[tuple[str, str]]
    v_structures: frozenset[tuple[str, str, str]]

    @property
    def size(self) -> int:
        return len(self.members)

    def class_id(self) -> str:
        return self.representative.arc_id()


def equivalence_classes(dags: Sequence[Dag]) -> list[EquivalenceClass]:
    """Partition DAGs over a common node set into equivalence classes.

    Output order is deterministic: classes sorted by their smallest member
    under the sorted-arc-tuple encoding, members likewise.
    """
    dags = list(dags)
    if not dags:
        return []
    node_set = set(dags[0].nodes)
    for d in dags[1:]:
        if set(d.nodes) != node_set:
            raise VariableMismatch("all DAGs must share one node set")
    buckets: dict[tuple, list[Dag]] = {}
    for d in dags:
        key = (skeleton(d), v_structures(d))
        buckets.setdefault(key, []).append(d)
    classes = []
    for (skel, vs), members in buckets.items():
        members.sort(key=Dag.sort_key)
        classes.append(EquivalenceClass(members[0], tuple(members), skel, vs))
    classes.sort(key=lambda c: c.representative.sort_key())
    return classes
