"""Ground-truth causal simulator with do-semantics.

A set action forces a variable to a state and severs it from its own
sampling mechanism; everything downstream reacts through the ordinary
conditional tables. Mechanisms (the functions from parent configurations to
child states) are mutually independent, and so are the per-configuration
components within one mechanism, so sampling a child directly from its CPT
row is distributionally identical to materializing a full mechanism state
per case. A debug entry point materializes the mechanism states anyway, to
make visible that only one component per case is ever revealed.

Randomness: one PCG64 stream per simulate call, seeded explicitly, consumed
case-major in topological order, one uniform double per sampled value. The
bitstream is fixed, so identical inputs give bit-identical datasets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ArityMismatch, CapExceeded, DataError, StateSpaceTooLarge
from .model import (
    DEFAULT_STATE_CAP,
    Dataset,
    DiscreteNetwork,
    JointDistribution,
    Observation,
    Variable,
    parent_config_index,
)

MAPPING_COUNT_CAP = 10 ** 9
MAPPING_ENUM_CAP = 10 ** 6


def mapping_state_count(child_arity: int, parent_config_count: int) -> int:
    """Number of distinct functions from parent configurations to child states."""
    if child_arity < 2:
        raise DataError(f"child arity must be >= 2, got {child_arity}")
    if parent_config_count < 1:
        raise DataError(
            f"parent configuration count must be >= 1, got {parent_config_count}"
        )
    count = child_arity ** parent_config_count
    if count > MAPPING_COUNT_CAP:
        raise CapExceeded(f"{child_arity}^{parent_config_count} exceeds {MAPPING_COUNT_CAP}")
    return count


@dataclass(frozen=True)
class MechanismTable:
    """Explicit enumeration of a mapping variable's states.

    Each state is a total function from parent configuration index j to a
    child state, stored as a tuple indexed by j. A parentless child has
    q = 1 and one constant function per child state.
    """

    child: str
    parents: tuple[str, ...]
    child_arity: int
    states: tuple[tuple[int, ...], ...]

    def index_of(self, state: Sequence[int]) -> int:
        return mapping_state_index(state, self.child_arity)


def mapping_state_index(state: Sequence[int], child_arity: int) -> int:
    """Mixed-radix index of a mechanism state, value at j=0 most significant."""
    return parent_config_index([child_arity] * len(state), state)


def enumerate_mapping_states(
    child: Variable, parents: Sequence[Variable]
) -> MechanismTable:
    """All functions from parent configurations to child states.

    States come out in mixed-radix order over (value at j=0, value at j=1,
    ...), so the identity-like mappings and the constants are all present
    at predictable indices.
    """
    q = math.prod(p.arity for p in parents) if parents else 1
    count = mapping_state_count(child.arity, q)
    if count > MAPPING_ENUM_CAP:
        raise CapExceeded(f"{count} mechanism states exceeds {MAPPING_ENUM_CAP}")
    states = tuple(itertools.product(range(child.arity), repeat=q))
    return MechanismTable(
        child.name, tuple(p.name for p in parents), child.arity, states
    )


def apply_mechanism(
    mech_state: Sequence[int], parent_config: int, set_decision: int | None
) -> int:
    """Resolve a child's value: a set decision wins, else the mechanism maps
    the parent configuration to the child state."""
    if set_decision is not None:
        return set_decision
    if not 0 <= parent_config < len(mech_state):
        raise ArityMismatch(
            f"parent configuration {parent_config} out of range for a mechanism "
            f"with {len(mech_state)} components"
        )
    return mech_state[parent_config]


@dataclass(frozen=True)
class Regime:
    """Per-case set decisions: each case maps set variables to forced states.

    Absence from a case's mapping means 'do nothing' for that variable.
    """

    assignments: tuple[Mapping[str, int], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "assignments", tuple(dict(a) for a in self.assignments)
        )

    @classmethod
    def observational(cls, n_cases: int) -> "Regime":
        return cls(tuple({} for _ in range(n_cases)))

    @classmethod
    def constant(cls, assignment: Mapping[str, int], n_cases: int) -> "Regime":
        return cls(tuple(dict(assignment) for _ in range(n_cases)))

    def __len__(self) -> int:
        return len(self.assignments)


def _normalize_regime(
    regime: Regime | Mapping[str, int] | None, n_cases: int
) -> Regime:
    if regime is None:
        return Regime.observational(n_cases)
    if isinstance(regime, Regime):
        if len(regime) != n_cases:
            raise DataError(
                f"regime covers {len(regime)} cases, expected {n_cases}"
            )
        return regime
    return Regime.constant(regime, n_cases)


def _check_assignment(net: DiscreteNetwork, assignment: Mapping[str, int]) -> None:
    for name, k in assignment.items():
        variable = net.variable(name)
        if not 0 <= k < variable.arity:
            raise ArityMismatch(f"state {k} out of range for {name!r}")


def simulate(
    truth: DiscreteNetwork,
    regime: Regime | Mapping[str, int] | None,
    n_cases: int,
    seed: int,
) -> Dataset:
    """Ancestral sampling under a per-case intervention regime.

    A set variable takes its forced value (marked Set in the output) and its
    CPT row is never consulted; every other variable samples from its row at
    the realized parent configuration and is marked Observed.
    """
    regime = _normalize_regime(regime, n_cases)
    for assignment in regime.assignments:
        _check_assignment(truth, assignment)
    rng = np.random.Generator(np.random.PCG64(seed))
    topo = truth.topological_order
    cum = {
        name: [np.cumsum(row) for row in truth.cpts[name].rows] for name in topo
    }
    parent_arities = {
        name: [truth.arity(p) for p in truth.dag.parents(name)] for name in topo
    }
    cases = []
    for i in range(n_cases):
        forced = regime.assignments[i]
        values: dict[str, int] = {}
        case: dict[str, Observation] = {}
        for name in topo:
            if name in forced:
                k = forced[name]
                case[name] = Observation.set_to(k)
            else:
                parents = truth.dag.parents(name)
                j = parent_config_index(
                    parent_arities[name], [values[p] for p in parents]
                )
                k = _draw(cum[name][j], rng)
                case[name] = Observation.observed(k)
            values[name] = k
        cases.append(case)
    return Dataset(truth.variables, tuple(cases))


def _draw(cum_row: np.ndarray, rng: np.random.Generator) -> int:
    u = rng.random()
    k = int(np.searchsorted(cum_row, u, side="right"))
    return min(k, len(cum_row) - 1)


def simulate_with_mechanisms(
    truth: DiscreteNetwork,
    regime: Regime | Mapping[str, int] | None,
    n_cases: int,
    seed: int,
) -> tuple[Dataset, list[dict[str, tuple[int, ...]]]]:
    """Like simulate, but materializes a full mechanism state per variable
    per case: every component (one child value per parent configuration) is
    drawn independently from its CPT row, then the realized configuration
    selects which component becomes visible.

    The observed joint is distributionally identical to simulate's; the
    returned mechanism states exist to show that the data reveal at most one
    component per case, which is why counterfactual dependence between
    components cannot be learned.
    """
    regime = _normalize_regime(regime, n_cases)
    for assignment in regime.assignments:
        _check_assignment(truth, assignment)
    rng = np.random.Generator(np.random.PCG64(seed))
    topo = truth.topological_order
    cum = {
        name: [np.cumsum(row) for row in truth.cpts[name].rows] for name in topo
    }
    parent_arities = {
        name: [truth.arity(p) for p in truth.dag.parents(name)] for name in topo
    }
    cases = []
    mechanisms: list[dict[str, tuple[int, ...]]] = []
    for i in range(n_cases):
        forced = regime.assignments[i]
        values: dict[str, int] = {}
        case: dict[str, Observation] = {}
        mechs: dict[str, tuple[int, ...]] = {}
        for name in topo:
            mech = tuple(_draw(c, rng) for c in cum[name])
            mechs[name] = mech
            if name in forced:
                k = apply_mechanism(mech, 0, forced[name])
                case[name] = Observation.set_to(k)
            else:
                parents = truth.dag.parents(name)
                j = parent_config_index(
                    parent_arities[name], [values[p] for p in parents]
                )
                k = apply_mechanism(mech, j, None)
                case[name] = Observation.observed(k)
            values[name] = k
        cases.append(case)
        mechanisms.append(mechs)
    return Dataset(truth.variables, tuple(cases)), mechanisms


def interventional_distribution(
    truth: DiscreteNetwork,
    do_assignment: Mapping[str, int],
    cap: int = DEFAULT_STATE_CAP,
) -> JointDistribution:
    """Exact post-intervention joint over the unset variables.

    Each unset variable contributes its CPT entry with set parents clamped
    to their forced states; set variables contribute no factor.
    """
    _check_assignment(truth, do_assignment)
    unset = [v for v in truth.variables if v.name not in do_assignment]
    size = math.prod(v.arity for v in unset)
    if size > cap:
        raise StateSpaceTooLarge(f"{size} joint states exceeds cap {cap}")
    pos = {v.name: i for i, v in enumerate(unset)}
    probs = np.empty(size, dtype=float)
    for flat, states in enumerate(
        itertools.product(*[range(v.arity) for v in unset])
    ):
        value = {name: k for name, k in do_assignment.items()}
        for v, k in zip(unset, states):
            value[v.name] = k
        p = 1.0
        for v in unset:
            parents = truth.dag.parents(v.name)
            j = parent_config_index(
                [truth.arity(q) for q in parents], [value[q] for q in parents]
            )
            p *= truth.cpts[v.name].rows[j][value[v.name]]
        probs[flat] = p
    return JointDistribution(tuple(unset), probs)
