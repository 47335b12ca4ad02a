"""Batch command-line front end.

Subcommands: priors, score, learn, predict, simulate. All output is
deterministic given identical inputs and seed; probabilities print with six
significant digits alongside exact log values. Exit codes: 0 success,
2 usage error, 3 data/format error, 4 cap exceeded.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

from . import fileio
from .errors import (
    CapExceeded,
    CausalBdeError,
    DataError,
    StateSpaceTooLarge,
    TooManyCompletions,
)
from .priors import (
    DEFAULT_EPSILON,
    dirichlet_prior_from_prior_network,
    uninformative_prior,
)
from .scoring import (
    DEFAULT_COMPLETION_CAP,
    HypothesisPosterior,
    ScoredHypothesis,
    model_average_predict,
    structure_posteriors,
)
from .search import Mode, exhaustive_posterior, greedy_search
from .simulator import simulate

COMPLETION_CAP_ENV = "CAUSAL_BDE_MAX_COMPLETIONS"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_CAP = 4


@dataclass
class RunConfig:
    """Validated flag set for one CLI run."""

    command: str
    data: str | None = None
    prior_network: str | None = None
    network: str | None = None
    ess: float | None = None
    mode: Mode = Mode.CAUSAL
    search: str = "exhaustive"
    max_parents: int | None = None
    restarts: int = 10
    seed: int = 0
    top: int | None = None
    dot: str | None = None
    hidden: list[str] = field(default_factory=list)
    structures: list[str] = field(default_factory=list)
    structure_priors: str | None = None
    structure: str | None = None
    uninformative: bool = False
    epsilon: float = DEFAULT_EPSILON
    case: str | None = None
    n: int = 0
    do: dict[str, str] = field(default_factory=dict)
    regime: str | None = None
    out: str | None = None
    completion_cap: int = DEFAULT_COMPLETION_CAP

    def validate(self) -> None:
        if self.command in {"score", "learn", "predict"} and self.ess is None:
            raise DataError("--ess is required")
        if self.mode is Mode.ACAUSAL and self.do:
            raise DataError("acausal mode forbids --do")


def _completion_cap() -> int:
    raw = os.environ.get(COMPLETION_CAP_ENV)
    if raw is None:
        return DEFAULT_COMPLETION_CAP
    try:
        return int(raw)
    except ValueError:
        raise DataError(f"{COMPLETION_CAP_ENV} must be an integer, got {raw!r}") from None


def _parse_do(pairs: list[str]) -> dict[str, str]:
    assignment = {}
    for pair in pairs:
        if "=" not in pair:
            raise DataError(f"--do expects var=state, got {pair!r}")
        name, label = pair.split("=", 1)
        assignment[name.strip()] = label.strip()
    return assignment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causal-bde",
        description=(
            "Learn discrete causal networks from observational and "
            "experimental data with closed-form Bayesian scoring."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("priors", help="emit Dirichlet exponents for a structure")
    p.add_argument("--structure", required=True, help="structure JSON file")
    p.add_argument("--prior-network", required=True, help="network JSON file")
    p.add_argument("--ess", type=float, help="equivalent sample size")
    p.add_argument(
        "--uninformative",
        action="store_true",
        help="constant-epsilon exponents instead of prior-network exponents",
    )
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)

    p = sub.add_parser("score", help="posterior over an explicit hypothesis list")
    p.add_argument("--data", required=True)
    p.add_argument("--prior-network", required=True)
    p.add_argument("--ess", type=float, required=True)
    p.add_argument("--structures", nargs="+", required=True)
    p.add_argument("--structure-priors", help="JSON array aligned with --structures")
    p.add_argument("--hidden", action="append", default=[])

    p = sub.add_parser("learn", help="search the structure space")
    p.add_argument("--data", required=True)
    p.add_argument("--prior-network", required=True)
    p.add_argument("--ess", type=float, required=True)
    p.add_argument("--mode", choices=["causal", "acausal"], default="causal")
    p.add_argument("--search", choices=["exhaustive", "greedy"], default="exhaustive")
    p.add_argument("--max-parents", type=int)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top", type=int)
    p.add_argument("--dot", help="write the top structure as DOT")
    p.add_argument("--hidden", action="append", default=[])

    p = sub.add_parser("predict", help="model-averaged probability of a next case")
    p.add_argument("--case", required=True, help="one-row case CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--prior-network", required=True)
    p.add_argument("--ess", type=float, required=True)
    p.add_argument("--structures", nargs="+", help="explicit hypothesis files")
    p.add_argument("--structure-priors")
    p.add_argument("--mode", choices=["causal", "acausal"], default="causal")
    p.add_argument("--max-parents", type=int)
    p.add_argument("--hidden", action="append", default=[])

    p = sub.add_parser("simulate", help="sample cases from a ground-truth network")
    p.add_argument("--network", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument(
        "--do",
        action="append",
        default=[],
        metavar="VAR=STATE",
        help="force VAR to STATE (a state label) in every case",
    )
    p.add_argument("--regime", help="per-case regime CSV")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=args.command)
    for name in vars(args):
        if name == "command":
            continue
        value = getattr(args, name)
        if name == "mode":
            cfg.mode = Mode(value)
        elif name == "do":
            cfg.do = _parse_do(value)
        elif hasattr(cfg, name):
            setattr(cfg, name, value)
    cfg.completion_cap = _completion_cap()
    cfg.validate()
    return cfg


def _fmt_prob(p: float) -> str:
    return f"{p:.6g}"


def _print_ranked(entries, top, out) -> None:
    for entry in entries[: top if top else len(entries)]:
        line = (
            f"{entry.id} prior={_fmt_prob(entry.prior)} "
            f"posterior={_fmt_prob(entry.posterior)} "
            f"log10_ml={entry.log_ml / math.log(10)!r} "
            f"ln_ml={entry.log_ml!r}"
        )
        members = getattr(entry, "members", None)
        if members is not None:
            ids = "|".join(m.arc_id() for m in members)
            line += f" class_size={len(members)} members={ids}"
        print(line, file=out)


def cmd_priors(cfg: RunConfig, out) -> int:
    structure = fileio.load_structure(cfg.structure)
    prior_net = fileio.load_network(cfg.prior_network)
    if cfg.uninformative:
        arities = {v.name: v.arity for v in prior_net.variables}
        counts = uninformative_prior(structure, arities, cfg.epsilon)
    else:
        if cfg.ess is None:
            raise DataError("--ess is required unless --uninformative is given")
        counts = dirichlet_prior_from_prior_network(prior_net, cfg.ess, structure)
    print("variable,j,k,exponent", file=out)
    for name in sorted(counts.tables):
        table = counts.tables[name]
        for j in range(table.shape[0]):
            for k in range(table.shape[1]):
                print(f"{name},{j},{k},{float(table[j, k])!r}", file=out)
    return EXIT_OK


def _load_learning_inputs(cfg: RunConfig):
    prior_net = fileio.load_network(cfg.prior_network)
    dataset = fileio.load_cases(cfg.data, prior_net.variables, cfg.hidden)
    return prior_net, dataset


def cmd_score(cfg: RunConfig, out) -> int:
    prior_net, dataset = _load_learning_inputs(cfg)
    dags = [fileio.load_structure(path) for path in cfg.structures]
    if cfg.structure_priors:
        weights = fileio.load_structure_priors(cfg.structure_priors, len(dags))
    else:
        weights = [1.0 / len(dags)] * len(dags)
    posterior = structure_posteriors(
        list(zip(dags, weights)), prior_net, cfg.ess, dataset, cfg.completion_cap
    )
    _print_ranked(posterior.sorted_by_posterior(), None, out)
    return EXIT_OK


def cmd_learn(cfg: RunConfig, out) -> int:
    prior_net, dataset = _load_learning_inputs(cfg)
    if cfg.search == "exhaustive":
        result = exhaustive_posterior(
            dataset, prior_net, cfg.ess, cfg.mode, cfg.max_parents, cfg.completion_cap
        )
    else:
        result = greedy_search(
            dataset,
            prior_net,
            cfg.ess,
            cfg.mode,
            seed=cfg.seed,
            restarts=cfg.restarts,
            max_parents=cfg.max_parents or 3,
            completion_cap=cfg.completion_cap,
        )
    _print_ranked(result.entries, cfg.top, out)
    if cfg.dot:
        fileio.save_dot(result.best.structure, cfg.dot)
    return EXIT_OK


def cmd_predict(cfg: RunConfig, out) -> int:
    prior_net, dataset = _load_learning_inputs(cfg)
    probe_set = fileio.load_cases(cfg.case, prior_net.variables, cfg.hidden)
    if probe_set.n_cases != 1:
        raise DataError(f"--case file must hold exactly one row, found {probe_set.n_cases}")
    probe = probe_set.cases[0]
    if cfg.structures:
        dags = [fileio.load_structure(path) for path in cfg.structures]
        if cfg.structure_priors:
            weights = fileio.load_structure_priors(cfg.structure_priors, len(dags))
        else:
            weights = [1.0 / len(dags)] * len(dags)
        posterior = structure_posteriors(
            list(zip(dags, weights)), prior_net, cfg.ess, dataset, cfg.completion_cap
        )
        entries = posterior.entries
    else:
        result = exhaustive_posterior(
            dataset, prior_net, cfg.ess, cfg.mode, cfg.max_parents, cfg.completion_cap
        )
        entries = result.entries
    mixture = HypothesisPosterior(
        tuple(
            ScoredHypothesis(e.id, e.structure, e.prior, e.log_ml, e.posterior)
            for e in entries
        )
    )
    p = model_average_predict(
        probe, mixture, dataset, prior_net, cfg.ess, cfg.completion_cap
    )
    print(f"p={_fmt_prob(p)} ln_p={math.log(p)!r}", file=out)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, out) -> int:
    truth = fileio.load_network(cfg.network)
    if cfg.do and cfg.regime:
        raise DataError("--do and --regime are mutually exclusive")
    if cfg.regime:
        regime = fileio.load_regime(cfg.regime, truth.variables)
    elif cfg.do:
        assignment = {
            name: truth.variable(name).state_index(label)
            for name, label in cfg.do.items()
        }
        regime = assignment
    else:
        regime = None
    dataset = simulate(truth, regime, cfg.n, cfg.seed)
    if cfg.out:
        fileio.save_cases(dataset, cfg.out)
    else:
        fileio.write_cases(dataset, out)
    return EXIT_OK


_HANDLERS = {
    "priors": cmd_priors,
    "score": cmd_score,
    "learn": cmd_learn,
    "predict": cmd_predict,
    "simulate": cmd_simulate,
}


def run(argv: list[str] | None = None, out=None) -> int:
    """Parse argv and dispatch; returns the process exit code."""
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        cfg = config_from_args(args)
        return _HANDLERS[cfg.command](cfg, out)
    except (StateSpaceTooLarge, TooManyCompletions, CapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except CausalBdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
