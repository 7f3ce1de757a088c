"""Static SVG line charts of trajectories (matplotlib, Agg backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# stable output: no timestamps, fixed element ids
plt.rcParams["svg.hashsalt"] = "learnsim"
plt.rcParams["svg.fonttype"] = "none"


def _series(traj):
    out = [("Z", traj.z), ("Z1", traj.z1), ("Z2", traj.z2)]
    if traj.u is not None:
        out.append(("U", traj.u))
    else:
        out += [("U1", traj.u1), ("U2", traj.u2)]
    return out


def plot_trajectories(runs, path, title: str = "", events=()) -> None:
    """Write an SVG chart.

    ``runs`` is a list of ``(label, Trajectory)``; with several runs the
    series names are prefixed by the label.  ``events`` holds ``(t, text)``
    pairs drawn as dashed vertical markers.
    """
    fig, ax = plt.subplots(figsize=(8, 4.5))
    styles = {"Z": "-", "Z1": "--", "Z2": ":", "U": "-.", "U1": "-.", "U2": (0, (1, 3))}
    for label, traj in runs:
        for name, y in _series(traj):
            if len(runs) > 1 and name not in ("Z", "U"):
                continue
            tag = f"{name} ({label})" if label else name
            ax.plot(traj.t, y, linestyle=styles[name], linewidth=1.2, label=tag)
    for t, text in events:
        ax.axvline(t, color="grey", linestyle="--", linewidth=0.8)
        ax.annotate(text, (t, 0), xytext=(3, 3), textcoords="offset points", fontsize=8)
    ax.set_xlabel("t")
    ax.set_ylabel("knowledge / requirement")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, loc="best")
    ax.grid(True, linewidth=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_cohort(traj, year: int, path, title: str = "") -> None:
    """Per-class curves (``year`` is 0-based) of a year-matrix run."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(traj.t, traj.cohort_z1[:, year], label=f"Z1[{year + 1}]")
    ax.plot(traj.t, traj.cohort_z2[:, year], linestyle="--", label=f"Z2[{year + 1}]")
    ax.set_xlabel("t")
    ax.set_ylabel("knowledge")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, linewidth=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
