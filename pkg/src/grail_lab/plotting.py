"""Performance figures written next to the CSV outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .env import goal_name  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _axes(title: str, xlabel: str):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.axhline(0.9, color="0.6", lw=0.8, ls="--")
    return fig, ax


def _x(trials, trials_per_epoch: int):
    if trials_per_epoch > 1:
        return [t / trials_per_epoch for t in trials], "epoch"
    return list(trials), "trial"


def plot_run(result, path: str) -> None:
    cfg = result.config
    x, xlabel = _x([e.trial for e in result.evals], cfg.world.trials_per_epoch)
    fig, ax = _axes(f"{cfg.preset or 'custom'} / {cfg.selector_kind} (seed {cfg.seed})", xlabel)
    for g in range(cfg.n_goals):
        ax.plot(x, [e.success[g] for e in result.evals], lw=1.2, label=goal_name(g))
    ax.legend(ncol=cfg.n_goals, loc="lower right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_aggregate(agg, path: str) -> None:
    cfg = agg.config
    x, xlabel = _x(agg.eval_trials, cfg.world.trials_per_epoch)
    fig, ax = _axes(f"{cfg.preset or 'custom'} / {cfg.selector_kind}: median over {len(agg.seeds)} seeds", xlabel)
    for g in range(cfg.n_goals):
        (line,) = ax.plot(x, agg.median[:, g], lw=1.2, label=goal_name(g))
        ax.fill_between(x, agg.q25[:, g], agg.q75[:, g], color=line.get_color(), alpha=0.15, lw=0)
    ax.legend(ncol=cfg.n_goals, loc="lower right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
