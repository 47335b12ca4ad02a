"""Bayesian learning of discrete causal networks.

Closed-form Dirichlet-multinomial scoring of candidate structures against
mixed observational and experimental data, prior-network-derived parameter
priors, exact hidden-variable marginalization, Markov-equivalence handling,
exhaustive and greedy structure search, and a do-semantics simulator for
generating ground-truth test data.
"""

from .equivalence import (
    EquivalenceClass,
    equivalence_classes,
    equivalent,
    skeleton,
    v_structures,
)
from .errors import (
    ArityMismatch,
    CapExceeded,
    CausalBdeError,
    CycleDetected,
    DataError,
    FormatError,
    MissingValue,
    StateSpaceTooLarge,
    TooManyCompletions,
    UnknownNode,
    VariableMismatch,
)
from .model import (
    Case,
    Cpt,
    Dag,
    Dataset,
    DiscreteNetwork,
    JointDistribution,
    Observation,
    Variable,
    joint_from_network,
    parent_config_index,
    parent_config_states,
    validate_dag,
)
from .priors import (
    DEFAULT_EPSILON,
    PriorCounts,
    dirichlet_prior_from_prior_network,
    prior_family_table,
    uninformative_prior,
)
from .scoring import (
    DataCounts,
    HypothesisPosterior,
    ScoredHypothesis,
    hidden_completion_log_terms,
    log_gamma,
    log_marginal_likelihood,
    log_ml_with_hidden,
    model_average_predict,
    posterior_exponents,
    predictive_case_prob,
    structure_posteriors,
    sufficient_stats,
)
from .search import (
    Mode,
    RankedHypothesis,
    SearchResult,
    StructureScorer,
    TraceStep,
    enumerate_dags,
    exhaustive_posterior,
    greedy_search,
)
from .simulator import (
    MechanismTable,
    Regime,
    apply_mechanism,
    enumerate_mapping_states,
    interventional_distribution,
    mapping_state_count,
    mapping_state_index,
    simulate,
    simulate_with_mechanisms,
)

__version__ = "0.1.0"
