"""Static SVG figures of a completed run directory."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import DIAGNOSTICS_FILE, TRAJECTORY_FILE, read_csv  # noqa: E402

PLOT_FILES = ("theta_strip.svg", "min_theta_bound.svg", "ballistic_margin.svg")

STYLE = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (6.0, 3.6),
    "svg.hashsalt": "nsf",
    "lines.linewidth": 1.2,
}


class MissingArtifacts(FileNotFoundError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("missing artifacts: " + ", ".join(self.missing))


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _grid(traj):
    t = traj["t"]
    times = np.unique(t)
    n = int(np.sum(t == times[0]))
    theta = traj["theta"].reshape(len(times), n)
    x = traj["x"][:n]
    return times, x, theta


def plot_theta_strip(traj, path):
    times, x, theta = _grid(traj)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        mesh = ax.pcolormesh(x, times, theta, shading="nearest", cmap="inferno")
        fig.colorbar(mesh, ax=ax, label="temperature")
        ax.set_xlabel("x")
        ax.set_ylabel("t")
        _save(fig, path)


def plot_min_theta_bound(diag, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(diag["t"], diag["min_theta"], label="min temperature")
        if np.any(np.isfinite(diag["bound"])):
            ax.plot(diag["t"], diag["bound"], "--", label="lower bound")
        ax.set_xlabel("t")
        ax.set_ylabel("temperature")
        ax.legend(frameon=False)
        _save(fig, path)


def plot_ballistic_margin(diag, path):
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(6.0, 4.8))
        top.plot(diag["t"], diag["ballistic"])
        top.set_ylabel("ballistic energy")
        bottom.plot(diag["t"], diag["margin"])
        bottom.axhline(0.0, color="0.6", lw=0.8)
        bottom.set_ylabel("inequality margin")
        bottom.set_xlabel("t")
        _save(fig, path)


def plot_run(directory) -> list:
    d = Path(directory)
    missing = [n for n in (TRAJECTORY_FILE, DIAGNOSTICS_FILE) if not (d / n).is_file()]
    if missing:
        raise MissingArtifacts(missing)
    traj = read_csv(d / TRAJECTORY_FILE)
    diag = read_csv(d / DIAGNOSTICS_FILE)
    paths = [d / n for n in PLOT_FILES]
    plot_theta_strip(traj, paths[0])
    plot_min_theta_bound(diag, paths[1])
    plot_ballistic_margin(diag, paths[2])
    return paths
