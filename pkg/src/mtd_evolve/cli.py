"""mtd-evolve: evolve attacker strategies against a platform migration defense.

Settings resolve in three layers: built-in defaults, then a ``--config``
JSON file (flat keys, see README), then explicit command-line flags.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from .experiment import ExperimentConfig, emit_outputs, run_experiment
from .game import ConfigError
from .platforms import SimilarityError, load_similarity

log = logging.getLogger("mtd_evolve")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtd-evolve", description=__doc__.splitlines()[0])
    p.add_argument("--config", metavar="JSON", help="flat JSON settings file; flags override it")
    p.add_argument("--defense", choices=["random", "diversity"], help="defender scheduling policy (default random)")
    p.add_argument("--matches", type=_positive_int, help="matches per game M (default 100)")
    p.add_argument("--generations", type=_positive_int, help="GA generations per run (default 100)")
    p.add_argument("--runs", type=_positive_int, help="independent runs R (default 100)")
    p.add_argument("--first-run", dest="first_run", type=_non_negative_int, help="index of the first run (default 0)")
    p.add_argument("--population", type=_positive_int, help="attackers per generation N (default 30)")
    p.add_argument("--elite-count", dest="elite_count", type=_non_negative_int, help="elites copied per generation (default 2)")
    p.add_argument("--mutation-rate", dest="mutation_rate", type=_probability, help="per-bit flip probability (default 0.005)")
    p.add_argument("--crossover-probability", dest="crossover_probability", type=_probability,
                   help="chance a parent pair is crossed over (default 1.0)")
    p.add_argument("--gamma-mean", dest="gamma_mean", type=_positive_float, help="mean exploit cost (default 25)")
    p.add_argument("--gamma-var", dest="gamma_var", type=_positive_float, help="exploit cost variance (default 10)")
    p.add_argument("--persistence", type=_positive_int, help="consecutive successes before reward (default 3)")
    p.add_argument("--rotation", nargs="+", metavar="PLATFORM", help="diversity rotation (default Fedora Debian FreeBSD)")
    p.add_argument("--rotation-offset", dest="rotation_offset", type=_non_negative_int, help="diversity start offset")
    p.add_argument("--similarity", metavar="JSON", help="5x5 similarity matrix file replacing the built-in scores")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--jobs", type=_positive_int, help="parallel worker processes (default 1)")
    p.add_argument("--out", help="output directory (default ./results)")
    p.add_argument("--dot", action="store_true", default=None, help="export final fittest machines as DOT")
    p.add_argument("--trace", action="store_true", default=None, help="dump final fittest game logs as JSON")
    p.add_argument("--no-figures", dest="figures", action="store_false", default=None, help="skip PNG figures")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    settings: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                settings = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config {args.config}: {exc}") from exc
        if not isinstance(settings, dict):
            raise ConfigError(f"--config {args.config}: expected a JSON object")
    for key, value in vars(args).items():
        if key in ("config", "verbose") or value is None:
            continue
        settings[key] = value
    sim = settings.get("similarity")
    if isinstance(sim, str):
        try:
            settings["similarity"] = load_similarity(sim).tolist()
        except (OSError, json.JSONDecodeError, SimilarityError) as exc:
            raise ConfigError(f"--similarity {sim}: {exc}") from exc
    settings.setdefault("out", "results")
    return ExperimentConfig.from_flat(settings)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = resolve_config(args)
    except (ConfigError, SimilarityError) as exc:
        print(f"mtd-evolve: error: {exc}", file=sys.stderr)
        return 2

    start = time.perf_counter()
    log.info("running %d run(s) x %d generations, %s defense", config.runs, config.ga.generations, config.policy.kind.value)
    aggregate = run_experiment(config)
    log.info("simulation finished in %.1fs", time.perf_counter() - start)
    try:
        emit_outputs(aggregate, config.out, aggregate.final_machines() if config.dot else None)
        if config.figures:
            from .report import render_figures

            render_figures(aggregate, config.out)
    except OSError as exc:
        print(f"mtd-evolve: error: {exc}", file=sys.stderr)
        return 1

    final = aggregate.mean_fittest_fitness()[-1]
    print(
        f"{config.policy.kind.value} defense: final mean fittest fitness {final:.3f} "
        f"(R={aggregate.runs}, G={aggregate.generations}, M={config.game.matches}) -> {config.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
