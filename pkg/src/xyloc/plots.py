"""SVG heatmap of ``log10 C(d, t)`` with the fitted logarithmic cone overlaid."""

from __future__ import annotations

import numpy as np


def write_lightcone_svg(path, times, distances, norms, log_fit=None, threshold=None) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "xyloc"
    fig, ax = plt.subplots(figsize=(6, 4))
    with np.errstate(divide="ignore"):
        z = np.log10(np.maximum(norms, 1e-16))
    mesh = ax.pcolormesh(distances, times, z, shading="nearest", vmin=-16, vmax=np.log10(2))
    ax.set_yscale("log")
    ax.set_xlabel("distance d")
    ax.set_ylabel("time t")
    fig.colorbar(mesh, ax=ax, label="log10 ||[Z_j, Z_k(t)]||")
    if log_fit is not None:
        a, b = log_fit
        ax.plot(a + b * np.log(times), times, color="w", lw=1.5, label=f"r = {a:.2f} + {b:.2f} ln t")
        ax.set_xlim(distances[0], distances[-1])
        ax.legend(loc="lower right", fontsize=8)
    if threshold is not None:
        ax.set_title(f"threshold {threshold:g}", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
