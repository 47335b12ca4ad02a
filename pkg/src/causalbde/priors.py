"""Dirichlet exponents for candidate structures.

A single prior network plus an equivalent sample size N' yields the exponent
N'_ijk = N' * p(child=k, parents=j) for any candidate structure, with the
probability read off the prior network's exact joint. Exponents are
fractional in general; everything downstream scores through log-gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DataError, VariableMismatch
from .model import (
    DEFAULT_STATE_CAP,
    Dag,
    DiscreteNetwork,
    JointDistribution,
    joint_from_network,
    parent_config_index,
)


@dataclass(frozen=True, eq=False)
class PriorCounts:
    """Dirichlet exponents indexed like the CPTs of one structure.

    ``tables[v]`` has shape (q_v, r_v): one row per parent configuration of v
    in the structure the exponents were built for, mixed-radix row order.
    All entries are strictly positive.
    """

    parents: Mapping[str, tuple[str, ...]]
    tables: Mapping[str, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "parents", dict(self.parents))
        tables = {}
        for name, table in self.tables.items():
            arr = np.asarray(table, dtype=float)
            if arr.ndim != 2:
                raise DataError(f"exponent table for {name!r} must be 2-D")
            if np.any(arr <= 0.0):
                raise DataError(f"exponent table for {name!r} has entries <= 0")
            arr = arr.copy()
            arr.setflags(write=False)
            tables[name] = arr
        object.__setattr__(self, "tables", tables)
        if set(self.parents) != set(tables):
            raise VariableMismatch("parents and tables cover different variables")

    def row_sums(self, name: str) -> np.ndarray:
        return self.tables[name].sum(axis=1)

    def layout(self) -> dict[str, tuple]:
        return {
            name: (self.parents[name], self.tables[name].shape)
            for name in self.tables
        }


def prior_family_table(
    joint: JointDistribution, ess: float, child: str, parents: tuple[str, ...]
) -> np.ndarray:
    """Exponent rows for one family: N' times the joint marginal over
    (child, parents), laid out as (parent configuration, child state)."""
    pos = {v.name: i for i, v in enumerate(joint.variables)}
    arities = joint.arities
    child_pos = pos[child]
    parent_pos = [pos[p] for p in parents]
    parent_arities = [arities[i] for i in parent_pos]
    q = math.prod(parent_arities)
    table = np.zeros((q, arities[child_pos]), dtype=float)
    for states, p in joint.cells():
        j = parent_config_index(parent_arities, [states[i] for i in parent_pos])
        table[j, states[child_pos]] += p
    return table * ess


def dirichlet_prior_from_prior_network(
    prior_net: DiscreteNetwork,
    ess: float,
    structure: Dag,
    cap: int = DEFAULT_STATE_CAP,
) -> PriorCounts:
    """Build exponents for ``structure`` from a prior network and sample size.

    Because each family's exponents are a marginal of one shared joint, the
    exponents for every variable sum to the equivalent sample size, and two
    structures giving a variable the same parent set get bit-identical rows
    (parameter modularity).
    """
    if ess <= 0.0 or not math.isfinite(ess):
        raise DataError(f"equivalent sample size must be positive, got {ess!r}")
    if set(structure.nodes) != set(prior_net.names):
        raise VariableMismatch(
            f"structure nodes {sorted(structure.nodes)} do not match prior "
            f"network variables {sorted(prior_net.names)}"
        )
    joint = joint_from_network(prior_net, cap)
    tables = {
        name: prior_family_table(joint, ess, name, structure.parents(name))
        for name in structure.nodes
    }
    return PriorCounts(
        {name: structure.parents(name) for name in structure.nodes}, tables
    )


def uninformative_prior(
    structure: Dag, arities: Mapping[str, int], epsilon: float
) -> PriorCounts:
    """Constant-epsilon exponents (all Dirichlet exponents near zero)."""
    if epsilon <= 0.0 or not math.isfinite(epsilon):
        raise DataError(f"epsilon must be positive, got {epsilon!r}")
    missing = set(structure.nodes) - set(arities)
    if missing:
        raise VariableMismatch(f"no arity declared for {sorted(missing)}")
    tables = {}
    for name in structure.nodes:
        q = math.prod(arities[p] for p in structure.parents(name))
        tables[name] = np.full((q, arities[name]), epsilon, dtype=float)
    return PriorCounts(
        {name: structure.parents(name) for name in structure.nodes}, tables
    )


DEFAULT_EPSILON = 1e-4
