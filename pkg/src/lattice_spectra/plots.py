"""Figure rendering for the CLI report paths.

Figures are written next to the delimited output; the CSV remains the
primary, machine-readable artifact.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_phase_figure(table, path) -> None:
    """eta(p) and the amplitude exp(sigma) over the momentum band."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 6.4), sharex=True)
    ax1.plot(table.p, table.eta, lw=1.2)
    ax1.axhline(0.0, color="0.7", lw=0.6)
    ax1.set_ylabel(r"$\eta(p)$")
    ax1.grid(True, alpha=0.3)
    ax2.plot(table.p, table.amplitude, lw=1.2, color="tab:orange")
    ax2.set_xlabel(r"$p$")
    ax2.set_ylabel(r"$A(p)=e^{\sigma(p)}$")
    ax2.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_convergence_figure(study, path) -> None:
    """Decay of the partial asymptotic sums toward their limits, log-log."""
    M = np.array([r.M for r in study.rows], dtype=float)
    d0 = np.abs([r.sum_S0 - r.limit_s0 for r in study.rows])
    d1 = np.abs([r.sum_S1 - r.limit_s1 for r in study.rows])
    sum_s = np.abs([r.sum_S for r in study.rows])

    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    floor = 1e-17
    ax.loglog(M, np.maximum(d0, floor), "o-", label=r"$|\Sigma S^{(0)} - \mathrm{limit}_0|$")
    ax.loglog(M, np.maximum(d1, floor), "s-", label=r"$|\Sigma S^{(1)} - \mathrm{limit}_1|$")
    ax.loglog(M, np.maximum(sum_s, floor), "^--", label=r"$|\Sigma S_m|$")
    ref = d0[0] * (M / M[0]) ** -1.0 if d0[0] > floor else None
    if ref is not None:
        ax.loglog(M, ref, ":", color="0.5", label=r"$\propto 1/M$")
    ax.set_xlabel(r"$M$")
    ax.set_ylabel("deviation")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
