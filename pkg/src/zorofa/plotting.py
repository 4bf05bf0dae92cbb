"""Figures written next to the CSV outputs.

Everything renders through the Agg backend to files; nothing here opens a window.
"""
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 100,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "axes.labelsize": 10,
    "savefig.bbox": "tight",
}


def _save(fig, path):
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_trajectories(results, path, title=None):
    """Best f so far against queries / (n+1), one line per run."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for r in results:
            if not r.f_history:
                continue
            q, f = zip(*r.f_history)
            ax.semilogy(np.asarray(q) / (r.n + 1), np.maximum(f, 1e-300),
                        label=f"{r.algorithm} (seed {r.seed})", drawstyle="steps-post")
        ax.set_xlabel("queries / (n+1)")
        ax.set_ylabel("f(x_k)")
        if title:
            ax.set_title(title)
        ax.legend()
        return _save(fig, path)


def plot_data_profiles(profiles, path, alpha_max=None):
    """One panel per tolerance with a step curve per algorithm."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(profiles), figsize=(4.0 * len(profiles), 3.5), squeeze=False)
        for ax, prof in zip(axes[0], profiles):
            top = alpha_max or max((a for c in prof.curves.values() for a, _ in c), default=1.0)
            for alg, pts in sorted(prof.curves.items()):
                a, y = zip(*pts)
                ax.step(list(a) + [top], list(y) + [y[-1]], where="post", label=alg)
            ax.set_ylim(-0.02, 1.02)
            ax.set_xlabel("alpha (budget / (n+1))")
            ax.set_title(f"tau = {prof.tau:g}")
        axes[0][0].set_ylabel("fraction solved")
        axes[0][-1].legend()
        return _save(fig, path)


def plot_compressibility(profile, path):
    """Mean sorted gradient magnitude per rank with the min-max band shaded."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        floor = 1e-300
        ax.fill_between(profile.ranks, np.maximum(profile.min, floor),
                        np.maximum(profile.max, floor), alpha=0.3)
        ax.plot(profile.ranks, np.maximum(profile.mean, floor))
        ax.set_yscale("log")
        ax.set_xlabel("rank j")
        ax.set_ylabel("|grad f(x)|_(j)")
        ax.set_title(profile.problem)
        return _save(fig, path)


def plot_sparsity_objective(trajectory, path, title=None):
    """Accepted sparsity s_k (left axis) and f(x_k) (right axis) per iteration."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ks = [r.k for r in trajectory.records]
        ax.step(ks, [r.s_k for r in trajectory.records], where="post", color="C0")
        ax.set_xlabel("iteration k")
        ax.set_ylabel("s_k", color="C0")
        ax2 = ax.twinx()
        f = [r.f_after for r in trajectory.records]
        if f and all(v > 0 for v in f if not math.isnan(v)):
            ax2.set_yscale("log")
        ax2.plot(ks, f, color="C1")
        ax2.set_ylabel("f(x_k)", color="C1")
        if title:
            ax.set_title(title)
        return _save(fig, path)
