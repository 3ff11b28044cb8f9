"""PNG figures rendered next to the CSV tables."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import ExperimentAggregate  # noqa: E402
from .platforms import PLATFORM_NAMES  # noqa: E402

COLORS = ("#4C72B0", "#55A868", "#C44E52", "#8172B2", "#CCB974")
# no timestamps or version strings so reruns give identical bytes
_PNG_META = {"Software": None}

STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 100,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.frameon": False,
    "font.size": 10,
}


def _title(agg: ExperimentAggregate, what: str) -> str:
    cfg = agg.config
    return f"{what}: {cfg.policy.kind.value} defense, M={cfg.game.matches}, R={agg.runs}"


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_fitness(agg: ExperimentAggregate, path: Path) -> Path:
    mean, err = agg.mean_fittest_fitness(), agg.stderr_fittest_fitness()
    g = np.arange(agg.generations)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(g, mean, color=COLORS[0])
        ax.fill_between(g, mean - err, mean + err, color=COLORS[0], alpha=0.25, lw=0)
        ax.set_xlabel("generation")
        ax.set_ylabel("fittest attacker fitness")
        ax.set_title(_title(agg, "Fittest fitness"))
        return _save(fig, path)


def plot_investment(agg: ExperimentAggregate, which: str, path: Path) -> Path:
    mean, err = agg.mean_investment(which)
    g = np.arange(agg.generations)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for p, name in enumerate(PLATFORM_NAMES):
            ax.plot(g, mean[:, p], color=COLORS[p], label=name)
            ax.fill_between(g, mean[:, p] - err[:, p], mean[:, p] + err[:, p], color=COLORS[p], alpha=0.2, lw=0)
        ax.set_xlabel("generation")
        ax.set_ylabel("investment (resource units per game)")
        ax.set_title(_title(agg, f"{which.capitalize()} investment"))
        ax.legend(ncol=5, fontsize=8, loc="upper center")
        return _save(fig, path)


def plot_match_curve(agg: ExperimentAggregate, path: Path) -> Path:
    curve = agg.match_curve()
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(np.arange(1, len(curve) + 1), curve, color=COLORS[2])
        ax.set_xlabel("match")
        ax.set_ylabel("mean cumulative reward")
        ax.set_title(_title(agg, f"Generation {agg.generations - 1} fittest"))
        return _save(fig, path)


def render_figures(agg: ExperimentAggregate, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        plot_fitness(agg, out / "fitness_by_generation.png"),
        plot_investment(agg, "fittest", out / "investment_fittest.png"),
        plot_investment(agg, "population", out / "investment_population.png"),
        plot_match_curve(agg, out / "match_curve.png"),
    ]
