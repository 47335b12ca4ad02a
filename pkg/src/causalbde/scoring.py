"""Closed-form Bayesian scoring of structures against mixed data.

Counting respects intervention semantics: a case in which a variable was set
contributes nothing to that variable's own counts (its mechanism was
overridden), but the set value still participates in its children's parent
configurations. Missing values are handled exactly, by summing the complete
closed form over every completion of the database.

All accumulation happens in log space; exponents are fractional, so the
gamma function replaces factorials throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DataError,
    MissingValue,
    TooManyCompletions,
    VariableMismatch,
)
from .model import (
    Case,
    Dag,
    Dataset,
    DiscreteNetwork,
    Observation,
    parent_config_index,
)
from .priors import PriorCounts, dirichlet_prior_from_prior_network

DEFAULT_COMPLETION_CAP = 10_000_000


@dataclass(frozen=True, eq=False)
class DataCounts:
    """Sufficient statistics in the same (q, r) layout as PriorCounts."""

    parents: Mapping[str, tuple[str, ...]]
    tables: Mapping[str, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "parents", dict(self.parents))
        tables = {}
        for name, table in self.tables.items():
            arr = np.asarray(table, dtype=np.int64)
            arr.setflags(write=False)
            tables[name] = arr
        object.__setattr__(self, "tables", tables)

    def row_sums(self, name: str) -> np.ndarray:
        return self.tables[name].sum(axis=1)

    def layout(self) -> dict[str, tuple]:
        return {
            name: (self.parents[name], self.tables[name].shape)
            for name in self.tables
        }

    def total(self, name: str) -> int:
        return int(self.tables[name].sum())


def _check_structure(dataset: Dataset, structure: Dag) -> None:
    if set(structure.nodes) != set(dataset.names):
        raise VariableMismatch(
            f"structure nodes {sorted(structure.nodes)} do not match dataset "
            f"variables {sorted(dataset.names)}"
        )


def _family_index(
    structure: Dag, arity: Mapping[str, int]
) -> dict[str, tuple[tuple[str, ...], list[int]]]:
    return {
        name: (structure.parents(name), [arity[p] for p in structure.parents(name)])
        for name in structure.nodes
    }


def _counts_from_cases(
    cases: Iterable[Case], arity: Mapping[str, int], structure: Dag
) -> DataCounts:
    families = _family_index(structure, arity)
    tables = {
        name: np.zeros((math.prod(parities), arity[name]), dtype=np.int64)
        for name, (_, parities) in families.items()
    }
    for case in cases:
        for name, (parents, parities) in families.items():
            obs = case[name]
            if obs.is_set:
                continue
            j = parent_config_index(parities, [case[p].value for p in parents])
            tables[name][j, obs.value] += 1
    return DataCounts({name: ps for name, (ps, _) in families.items()}, tables)


def sufficient_stats(dataset: Dataset, structure: Dag) -> DataCounts:
    """Count N_ijk over a complete dataset, honoring interventions.

    For each case and variable: a set variable contributes nothing to its own
    counts; otherwise the count at (its value, its parents' actual values) is
    incremented, whether those parent values were observed or set. Raises
    MissingValue if the dataset has any missing cell; exact marginalization
    over completions is the caller's job then.
    """
    _check_structure(dataset, structure)
    for i, case in enumerate(dataset.cases):
        for name, obs in case.items():
            if obs.is_missing:
                raise MissingValue(
                    f"case {i} has no value for {name!r}; use the "
                    "missing-data scoring path"
                )
    arity = {v.name: v.arity for v in dataset.variables}
    return _counts_from_cases(dataset.cases, arity, structure)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0.0:
        raise ValueError(f"log_gamma requires a positive argument, got {x!r}")
    return math.lgamma(x)


def _check_same_index(counts: DataCounts, priors: PriorCounts) -> None:
    if counts.layout() != priors.layout():
        raise VariableMismatch("counts and exponents are indexed by different structures")


def family_log_score(prior_rows: np.ndarray, count_rows: np.ndarray) -> float:
    """Log gamma-ratio contribution of one family.

    Per row j:  ln Gamma(N'_ij) - ln Gamma(N'_ij + N_ij)
              + sum_k [ln Gamma(N'_ijk + N_ijk) - ln Gamma(N'_ijk)].
    Rows and cells with zero counts contribute exactly zero and are skipped.
    """
    total = 0.0
    for j in range(prior_rows.shape[0]):
        n_row = int(count_rows[j].sum())
        if n_row == 0:
            continue
        prior_row = prior_rows[j]
        prior_row_sum = float(prior_row.sum())
        total += math.lgamma(prior_row_sum) - math.lgamma(prior_row_sum + n_row)
        for k in range(prior_rows.shape[1]):
            n = int(count_rows[j, k])
            if n:
                e = float(prior_row[k])
                total += math.lgamma(e + n) - math.lgamma(e)
    return total


def log_marginal_likelihood(counts: DataCounts, priors: PriorCounts) -> float:
    """Exact log marginal likelihood of complete data under Dirichlet priors.

    This is the data-dependent gamma-ratio product of the Dirichlet-multinomial
    closed form, evaluated entirely in log space. An all-zero count table gives
    0.0 (probability one: the empty product).
    """
    _check_same_index(counts, priors)
    return math.fsum(
        family_log_score(priors.tables[name], counts.tables[name])
        for name in priors.tables
    )


def predictive_case_prob(
    case: Case, counts: DataCounts, priors: PriorCounts
) -> float:
    """Posterior-mean probability of one complete next case.

    One factor (N'_ijk + N_ijk) / (N'_ij + N_ij) per variable, with j and k
    read from the case. Set variables contribute factor 1: their value is
    chosen, not predicted.
    """
    _check_same_index(counts, priors)
    log_p = 0.0
    for name, parents in priors.parents.items():
        obs = case[name]
        if obs.is_missing:
            raise MissingValue(f"case has no value for {name!r}")
        if obs.is_set:
            continue
        prior_rows = priors.tables[name]
        count_rows = counts.tables[name]
        # A variable's own table width is its arity.
        parities = [priors.tables[p].shape[1] for p in parents]
        j = parent_config_index(parities, [case[p].value for p in parents])
        k = obs.value
        num = float(prior_rows[j, k]) + float(count_rows[j, k])
        den = float(prior_rows[j].sum()) + float(count_rows[j].sum())
        log_p += math.log(num) - math.log(den)
    return math.exp(log_p)


def posterior_exponents(priors: PriorCounts, counts: DataCounts) -> PriorCounts:
    """Exponents after absorbing complete-data counts (N' + N per cell)."""
    _check_same_index(counts, priors)
    return PriorCounts(
        dict(priors.parents),
        {
            name: priors.tables[name] + counts.tables[name]
            for name in priors.tables
        },
    )


def _missing_slots(dataset: Dataset, structure: Dag) -> list[tuple[int, str]]:
    # Case-major, then structure node order within a case.
    return [
        (i, name)
        for i, case in enumerate(dataset.cases)
        for name in structure.nodes
        if case[name].is_missing
    ]


def hidden_completion_log_terms(
    structure: Dag,
    priors: PriorCounts,
    dataset: Dataset,
    cap: int = DEFAULT_COMPLETION_CAP,
) -> list[float]:
    """Log score of every completion of the dataset's missing cells.

    Completions are enumerated in mixed-radix order over the missing slots
    (case-major, first slot most significant), so term-by-term output is
    reproducible. A dataset with no missing cells yields a single term.
    """
    _check_structure(dataset, structure)
    arity = {v.name: v.arity for v in dataset.variables}
    slots = _missing_slots(dataset, structure)
    n_completions = math.prod(arity[name] for _, name in slots)
    if n_completions > cap:
        raise TooManyCompletions(
            f"{n_completions} completions exceeds cap {cap}"
        )
    if not slots:
        return [log_marginal_likelihood(sufficient_stats(dataset, structure), priors)]
    base = [dict(case) for case in dataset.cases]
    terms = []
    for fill in itertools.product(*[range(arity[name]) for _, name in slots]):
        for (i, name), k in zip(slots, fill):
            base[i][name] = Observation.observed(k)
        counts = _counts_from_cases(base, arity, structure)
        terms.append(log_marginal_likelihood(counts, priors))
    return terms


def _logsumexp(values: Sequence[float]) -> float:
    m = max(values)
    if math.isinf(m):
        return m
    return m + math.log(math.fsum(math.exp(v - m) for v in values))


def log_ml_with_hidden(
    structure: Dag,
    priors: PriorCounts,
    dataset: Dataset,
    cap: int = DEFAULT_COMPLETION_CAP,
) -> float:
    """Exact log marginal likelihood with missing/hidden values.

    Sums the complete-data closed form over all completions of the missing
    cells (log-sum-exp). Reduces bit-for-bit to log_marginal_likelihood when
    the dataset is complete.
    """
    return _logsumexp(hidden_completion_log_terms(structure, priors, dataset, cap))


@dataclass(frozen=True)
class ScoredHypothesis:
    id: str
    structure: Dag
    prior: float
    log_ml: float
    posterior: float


@dataclass(frozen=True)
class HypothesisPosterior:
    """Posterior over an explicit list of structure hypotheses."""

    entries: tuple[ScoredHypothesis, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def posterior_of(self, hyp_id: str) -> float:
        for e in self.entries:
            if e.id == hyp_id:
                return e.posterior
        raise KeyError(hyp_id)

    def sorted_by_posterior(self) -> tuple[ScoredHypothesis, ...]:
        return tuple(sorted(self.entries, key=lambda e: (-e.posterior, e.id)))


def _normalize(
    scored: list[tuple[str, Dag, float, float]]
) -> HypothesisPosterior:
    log_unnorm = [
        (math.log(prior) if prior > 0.0 else -math.inf) + lml
        for _, _, prior, lml in scored
    ]
    total = _logsumexp(log_unnorm)
    return HypothesisPosterior(
        tuple(
            ScoredHypothesis(hid, dag, prior, lml, math.exp(lu - total))
            for (hid, dag, prior, lml), lu in zip(scored, log_unnorm)
        )
    )


def structure_posteriors(
    hypotheses: Sequence[tuple[Dag, float]],
    prior_net: DiscreteNetwork,
    ess: float,
    dataset: Dataset,
    cap: int = DEFAULT_COMPLETION_CAP,
) -> HypothesisPosterior:
    """Score a hypothesis list and normalize by Bayes' theorem.

    Each structure gets exponents from the shared prior network, a
    missing-data-aware log marginal likelihood, and posterior proportional
    to prior times marginal likelihood.
    """
    if not hypotheses:
        raise DataError("no hypotheses supplied")
    prior_total = math.fsum(prior for _, prior in hypotheses)
    if abs(prior_total - 1.0) > 1e-9:
        raise DataError(f"hypothesis priors sum to {prior_total!r}, not 1")
    scored = []
    for dag, prior in hypotheses:
        exps = dirichlet_prior_from_prior_network(prior_net, ess, dag)
        lml = log_ml_with_hidden(dag, exps, dataset, cap)
        scored.append((dag.arc_id(), dag, prior, lml))
    return _normalize(scored)


def _case_with_hidden_missing(case: Case, dataset: Dataset) -> dict[str, Observation]:
    filled = dict(case)
    for name in dataset.hidden:
        filled.setdefault(name, Observation.missing())
    return filled


def model_average_predict(
    case: Case,
    posterior: HypothesisPosterior,
    dataset: Dataset,
    prior_net: DiscreteNetwork,
    ess: float,
    cap: int = DEFAULT_COMPLETION_CAP,
) -> float:
    """Mixture predictive for the next case: sum over hypotheses of
    p(case | data, structure) weighted by the structure's posterior.

    The case must give a value (observed or set) to every non-hidden
    variable. With complete data the per-structure predictive is the
    posterior-mean product; with missing data it is the exact ratio of
    marginal likelihoods of (data + case) to (data).
    """
    probe = _case_with_hidden_missing(case, dataset)
    for name in dataset.names:
        if name not in probe:
            raise MissingValue(f"case has no entry for {name!r}")
        if probe[name].is_missing and name not in dataset.hidden:
            raise MissingValue(f"case has no value for {name!r}")
    total = 0.0
    for entry in posterior.entries:
        exps = dirichlet_prior_from_prior_network(prior_net, ess, entry.structure)
        if dataset.is_complete and not dataset.hidden:
            counts = sufficient_stats(dataset, entry.structure)
            p = predictive_case_prob(probe, counts, exps)
        else:
            base = log_ml_with_hidden(entry.structure, exps, dataset, cap)
            extended = log_ml_with_hidden(
                entry.structure, exps, dataset.with_case(probe), cap
            )
            p = math.exp(extended - base)
        total += entry.posterior * p
    return total
