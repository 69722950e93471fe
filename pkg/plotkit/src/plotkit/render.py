"""Figure rendering: spacing-error time traces and norm-versus-N curves."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import PlotkitError
from .readers import read_error_traces, read_norm_sweep

KINDS = ("error-traces", "norm-vs-n")

_FIGSIZE = (8.0, 4.5)
_DPI = 130


@dataclass(frozen=True)
class PlotJob:
    input_path: str
    output_path: str
    kind: str
    title: Optional[str] = None
    xlabel: Optional[str] = None
    ylabel: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PlotkitError(f"kind must be one of {KINDS}, got {self.kind!r}")


def _render_error_traces(job: PlotJob, ax) -> None:
    t, errors, labels = read_error_traces(job.input_path)
    n = errors.shape[1]
    colors = plt.cm.viridis(np.linspace(0.0, 0.9, n))
    for k in range(n):
        ax.plot(t, errors[:, k], color=colors[k], lw=1.2, label=labels[k])
    ax.set_xlabel(job.xlabel or "time [s]")
    ax.set_ylabel(job.ylabel or "spacing error [m]")
    ax.set_title(job.title or "Spacing errors along the chain")
    ax.legend(ncol=2 if n > 6 else 1, fontsize=8, frameon=False)


def _render_norm_vs_n(job: PlotJob, ax) -> None:
    n, norms = read_norm_sweep(job.input_path)
    ax.plot(n, norms, "o-", color="tab:blue", lw=1.4, ms=4)
    # horizontal guide at the final value marks the plateau
    ax.axhline(norms[-1], color="tab:gray", ls="--", lw=1.0,
               label=f"final value {norms[-1]:.4g}")
    ax.set_xlabel(job.xlabel or "chain length N")
    ax.set_ylabel(job.ylabel or "(L2,l2) norm of spacing errors")
    ax.set_title(job.title or "Disturbance amplification versus chain length")
    ax.legend(frameon=False)


def render(job: PlotJob) -> str:
    """Render the job to its output image and return the output path."""
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    try:
        if job.kind == "error-traces":
            _render_error_traces(job, ax)
        else:
            _render_norm_vs_n(job, ax)
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(job.output_path)
    finally:
        plt.close(fig)
    return job.output_path
