"""Static figures for run reports (Agg backend, files only)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def phase_scatter(tables: dict, path: Path) -> Path:
    """Overlap phases of each table on the unit circle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    t = np.linspace(0, 2 * np.pi, 200)
    ax.plot(np.cos(t), np.sin(t), color="0.8", lw=0.8)
    for (name, phases), marker in zip(tables.items(), "ox^s"):
        z = np.asarray(phases).reshape(-1)[1:]
        ax.scatter(z.real, z.imag, s=18, marker=marker, label=name, alpha=0.7)
    ax.set_aspect("equal")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("overlap phases")
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def spectrum_bars(spectra: dict, path: Path, title: str) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    width = 0.8 / max(len(spectra), 1)
    for k, (name, vals) in enumerate(spectra.items()):
        x = np.arange(len(vals)) + k * width
        ax.bar(x, vals, width=width, label=name)
    ax.set_xlabel("index")
    ax.set_yscale("symlog", linthresh=1e-12)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def render_report_figures(outdir: str | Path, theta=None, Theta=None,
                          schmidt=None, etf_singular=None) -> list[str]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    tables = {}
    if theta is not None:
        tables[f"d={theta.dim}"] = theta.phases
    if Theta is not None:
        tables[f"N={Theta.dim}"] = Theta.phases
    if tables:
        written.append(phase_scatter(tables, out / "phases.png"))
    if schmidt is not None:
        written.append(spectrum_bars({"Schmidt": schmidt}, out / "schmidt.png",
                                     "Schmidt spectrum"))
    if etf_singular:
        written.append(spectrum_bars(etf_singular, out / "etf_singular_values.png",
                                     "singular values of strided subsets"))
    return [str(p) for p in written]
