"""Multi-run orchestration, cross-run aggregation and file output."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from . import __version__
from .defense import DEFAULT_ROTATION, DefenseKind, DefensePolicy
from .evolution import GaConfig, evolve_run
from .fsm import StrategyMachine, decode, export_graph
from .game import ConfigError, GameConfig, GameResult, play_game
from .platforms import PLATFORM_NAMES, TABLE1_SIMILARITY, validate_similarity
from .seeding import RunSeeds


@dataclass(frozen=True)
class ExperimentConfig:
    policy: DefensePolicy = field(default_factory=DefensePolicy.random)
    runs: int = 100
    ga: GaConfig = field(default_factory=GaConfig)
    game: GameConfig = field(default_factory=GameConfig)
    seed: int = 0
    first_run: int = 0
    similarity: tuple[tuple[float, ...], ...] | None = None
    out: str | None = None
    jobs: int = 1
    dot: bool = False
    figures: bool = True
    trace: bool = False

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"runs must be >= 1, got {self.runs}")
        if self.first_run < 0:
            raise ConfigError("first_run must be non-negative")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.similarity is not None:
            m = validate_similarity(self.similarity)
            object.__setattr__(self, "similarity", tuple(tuple(float(x) for x in row) for row in m))

    @property
    def similarity_matrix(self) -> np.ndarray:
        if self.similarity is None:
            return TABLE1_SIMILARITY
        return validate_similarity(self.similarity)

    @property
    def run_ids(self) -> range:
        return range(self.first_run, self.first_run + self.runs)

    def to_flat(self) -> dict:
        """Flat JSON form, the same keys accepted by ``--config`` files."""
        return {
            "defense": self.policy.kind.value,
            "rotation": [p.label for p in self.policy.rotation],
            "rotation_offset": self.policy.offset,
            "runs": self.runs,
            "first_run": self.first_run,
            "generations": self.ga.generations,
            "population": self.ga.population,
            "elite_count": self.ga.elite_count,
            "mutation_rate": self.ga.mutation_rate,
            "crossover_probability": self.ga.crossover_probability,
            "matches": self.game.matches,
            "persistence": self.game.persistence,
            "gamma_mean": self.game.gamma_mean,
            "gamma_var": self.game.gamma_var,
            "seed": self.seed,
            "similarity": None if self.similarity is None else [list(r) for r in self.similarity],
            "out": self.out,
            "jobs": self.jobs,
            "dot": self.dot,
            "figures": self.figures,
            "trace": self.trace,
        }

    @classmethod
    def from_flat(cls, data: Mapping) -> "ExperimentConfig":
        unknown = set(data) - set(cls().to_flat())
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        d = {**cls().to_flat(), **{k: v for k, v in data.items() if v is not None or k in ("similarity", "out")}}
        try:
            kind = DefenseKind(d["defense"])
        except ValueError:
            raise ConfigError(f"defense must be 'random' or 'diversity', got {d['defense']!r}") from None
        try:
            policy = DefensePolicy(kind, tuple(d["rotation"] or DEFAULT_ROTATION), int(d["rotation_offset"]))
            return cls(
                policy=policy,
                runs=int(d["runs"]),
                first_run=int(d["first_run"]),
                ga=GaConfig(
                    population=int(d["population"]),
                    generations=int(d["generations"]),
                    elite_count=int(d["elite_count"]),
                    mutation_rate=float(d["mutation_rate"]),
                    crossover_probability=float(d["crossover_probability"]),
                ),
                game=GameConfig(
                    matches=int(d["matches"]),
                    persistence=int(d["persistence"]),
                    gamma_mean=float(d["gamma_mean"]),
                    gamma_var=float(d["gamma_var"]),
                ),
                seed=int(d["seed"]),
                similarity=d["similarity"],
                out=d["out"],
                jobs=int(d["jobs"]),
                dot=bool(d["dot"]),
                figures=bool(d["figures"]),
                trace=bool(d["trace"]),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


@dataclass
class RunSummary:
    run: int
    fittest_fitness: np.ndarray  # (G,)
    fittest_investment: np.ndarray  # (G, 5)
    population_investment: np.ndarray  # (G, 5)
    final_rewards: np.ndarray  # (M,)
    final_genome: np.ndarray  # (692,)
    final_fittest_index: int
    final_costs: np.ndarray  # (5,)


def _run_one(config: ExperimentConfig, run: int) -> RunSummary:
    history = evolve_run(config.ga, config.game, config.policy, config.seed, run, config.similarity_matrix)
    last = history[-1]
    return RunSummary(
        run=run,
        fittest_fitness=np.array([s.fittest_fitness for s in history]),
        fittest_investment=np.array([s.fittest_investment for s in history]),
        population_investment=np.array([s.population_investment for s in history]),
        final_rewards=last.fittest_rewards.astype(np.int64),
        final_genome=last.fittest_genome,
        final_fittest_index=last.fittest_index,
        final_costs=last.costs,
    )


def _stderr(x: np.ndarray) -> np.ndarray:
    if x.shape[0] < 2:
        return np.zeros(x.shape[1:])
    return x.std(axis=0, ddof=1) / np.sqrt(x.shape[0])


@dataclass
class ExperimentAggregate:
    """Per-run series stacked along axis 0, with cross-run means on demand."""

    config: ExperimentConfig
    run_ids: np.ndarray
    fittest_fitness: np.ndarray
    fittest_investment: np.ndarray
    population_investment: np.ndarray
    final_rewards: np.ndarray
    final_genomes: np.ndarray
    final_fittest_index: np.ndarray
    final_costs: np.ndarray

    @classmethod
    def from_runs(cls, config: ExperimentConfig, runs: list[RunSummary]) -> "ExperimentAggregate":
        return cls(
            config=config,
            run_ids=np.array([r.run for r in runs]),
            fittest_fitness=np.stack([r.fittest_fitness for r in runs]),
            fittest_investment=np.stack([r.fittest_investment for r in runs]),
            population_investment=np.stack([r.population_investment for r in runs]),
            final_rewards=np.stack([r.final_rewards for r in runs]),
            final_genomes=np.stack([r.final_genome for r in runs]),
            final_fittest_index=np.array([r.final_fittest_index for r in runs]),
            final_costs=np.stack([r.final_costs for r in runs]),
        )

    @classmethod
    def merge(cls, first: "ExperimentAggregate", second: "ExperimentAggregate") -> "ExperimentAggregate":
        """Concatenate two experiments that differ only in their run ranges."""
        if replace(first.config, runs=1, first_run=0) != replace(second.config, runs=1, first_run=0):
            raise ConfigError("can only merge experiments with identical settings")
        config = replace(first.config, runs=first.config.runs + second.config.runs,
                         first_run=min(first.config.first_run, second.config.first_run))
        stacked = {
            name: np.concatenate([getattr(first, name), getattr(second, name)])
            for name in ("run_ids", "fittest_fitness", "fittest_investment", "population_investment",
                         "final_rewards", "final_genomes", "final_fittest_index", "final_costs")
        }
        order = np.argsort(stacked["run_ids"], kind="stable")
        return cls(config=config, **{k: v[order] for k, v in stacked.items()})

    @property
    def runs(self) -> int:
        return len(self.run_ids)

    @property
    def generations(self) -> int:
        return self.fittest_fitness.shape[1]

    def mean_fittest_fitness(self) -> np.ndarray:
        return self.fittest_fitness.mean(axis=0)

    def stderr_fittest_fitness(self) -> np.ndarray:
        return _stderr(self.fittest_fitness)

    def mean_investment(self, which: str = "population") -> tuple[np.ndarray, np.ndarray]:
        """(mean, stderr) of per-platform investment counts, each (G, 5)."""
        data = self.population_investment if which == "population" else self.fittest_investment
        return data.mean(axis=0), _stderr(data)

    def mean_reward_by_match(self) -> np.ndarray:
        return self.final_rewards.mean(axis=0)

    def match_curve(self) -> np.ndarray:
        """Mean cumulative reward of final-generation fittest agents per match."""
        return np.cumsum(self.mean_reward_by_match())

    def final_machines(self) -> dict[int, StrategyMachine]:
        return {int(r): decode(g) for r, g in zip(self.run_ids, self.final_genomes)}

    def replay_final(self, index: int) -> GameResult:
        """Re-play the final-generation fittest game of the ``index``-th run."""
        cfg = self.config
        rng = RunSeeds(cfg.seed, int(self.run_ids[index])).game(self.generations - 1, int(self.final_fittest_index[index]))
        return play_game(decode(self.final_genomes[index]), cfg.policy, self.final_costs[index], cfg.game, rng,
                         cfg.similarity_matrix)


def run_experiment(config: ExperimentConfig) -> ExperimentAggregate:
    """Run ``config.runs`` independent evolutions and stack their summaries.

    Results do not depend on ``jobs``: each run owns its random streams and
    the reduction keeps run order.
    """
    if config.jobs > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=min(config.jobs, config.runs)) as pool:
            runs = list(pool.map(_run_one, [config] * config.runs, config.run_ids))
    else:
        runs = [_run_one(config, r) for r in config.run_ids]
    return ExperimentAggregate.from_runs(config, runs)


def _write_csv(path: Path, header: list[str], rows) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# where and how wide a run executed has no effect on its results
_NOT_IN_MANIFEST = ("out", "jobs")


def write_manifest(config: ExperimentConfig, path: Path) -> Path:
    settings = {k: v for k, v in config.to_flat().items() if k not in _NOT_IN_MANIFEST}
    manifest = {"artifact": "mtd_evolve", "version": __version__, "seed": config.seed, "config": settings}
    try:
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def load_manifest(path: str | Path) -> ExperimentConfig:
    with open(path) as fh:
        manifest = json.load(fh)
    return ExperimentConfig.from_flat(manifest["config"])


def emit_outputs(
    aggregate: ExperimentAggregate,
    out_dir: str | Path,
    machines: Mapping[int, StrategyMachine] | None = None,
) -> list[Path]:
    """Write the CSV tables, the manifest and optional DOT/trace files."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror or exc}") from exc
    written = []

    mean, err = aggregate.mean_fittest_fitness(), aggregate.stderr_fittest_fitness()
    written.append(_write_csv(
        out / "fitness_by_generation.csv",
        ["generation", "mean_fittest_fitness", "stderr"],
        ([g, _fmt(mean[g]), _fmt(err[g])] for g in range(aggregate.generations)),
    ))
    for which in ("fittest", "population"):
        m, e = aggregate.mean_investment(which)
        written.append(_write_csv(
            out / f"investment_{which}.csv",
            ["generation", "platform", "mean_count", "stderr"],
            ([g, PLATFORM_NAMES[p], _fmt(m[g, p]), _fmt(e[g, p])]
             for g in range(aggregate.generations) for p in range(len(PLATFORM_NAMES))),
        ))
    curve = aggregate.match_curve()
    written.append(_write_csv(
        out / "match_curve.csv",
        ["match_index", "mean_cumulative_reward"],
        ([j, _fmt(v)] for j, v in enumerate(curve)),
    ))
    written.append(write_manifest(aggregate.config, out / "manifest.json"))

    final_gen = aggregate.generations - 1
    for run, machine in (machines or {}).items():
        path = out / f"fittest_gen{final_gen}_run{run}.dot"
        path.write_text(export_graph(machine, name=f"run{run}_gen{final_gen}"))
        written.append(path)

    if aggregate.config.trace:
        for i, run in enumerate(aggregate.run_ids):
            path = out / f"trace_gen{final_gen}_run{int(run)}.json"
            path.write_text(aggregate.replay_final(i).to_json() + "\n")
            written.append(path)
    return written

