"""Figure rendering for the report paths: trace monitors, cap tables, and
check margins, written as PNG files next to the delimited outputs."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def render_trace_figures(trace, outdir) -> list:
    """Monitor panels for one flow run; returns the written paths."""
    t = trace.column("t")
    cfg = trace.config
    n = cfg.n
    fig, axes = plt.subplots(2, 2, figsize=(11, 7.5))

    ax = axes[0, 0]
    for k in range(n + 2):
        W = trace.column(f"W{k}")
        if np.all(np.isfinite(W)):
            ax.plot(t, W, label=f"$W_{{{k}}}$")
    if cfg.flow_kind == "icf" and cfg.spec.is_mean:
        W1 = trace.column("W1")
        ax.plot(t, W1[0] * np.exp(n * t), "k--", lw=1, label=r"$W_1(0)e^{nt}$")
    ax.set_xlabel("t")
    ax.set_title("quermassintegrals")
    ax.legend(fontsize=8)

    ax = axes[0, 1]
    ax.plot(trace.step_t, trace.step_maxF, label="max F")
    ax.plot(trace.step_t, trace.step_maxH, label="max H")
    ax.plot(trace.step_t, trace.step_kappa_min, label=r"min $\kappa$")
    ax.set_xlabel("t")
    ax.set_title("curvature monitors (per step)")
    ax.legend(fontsize=8)

    ax = axes[1, 0]
    plotted = False
    Q = trace.column("Q")
    if np.any(np.isfinite(Q)):
        ax.plot(t, Q, label="Q")
        plotted = True
    for k in range(1, (n - 1) // 2 + 1):
        phi = trace.column(f"phi_{k}")
        if np.any(np.isfinite(phi)):
            ax.plot(t, phi, label=rf"$\phi_{{{k}}}$")
            plotted = True
    if not plotted:
        ax.text(0.5, 0.5, "no deficit monitors for n = 2", ha="center", va="center")
    ax.set_xlabel("t")
    ax.set_title("monotone deficit monitors")
    if plotted:
        ax.legend(fontsize=8)

    ax = axes[1, 1]
    ax.plot(t, trace.column("height_min"), label="min <x,e>")
    ax.plot(t, trace.column("height_max"), label="max <x,e>")
    ax.axhline(math.cos(cfg.theta), color="k", ls=":", lw=1, label=r"$\cos\theta$")
    ax2 = ax.twinx()
    ax2.semilogy(t, np.maximum(trace.column("angle_residual"), 1e-18), "r-", lw=0.8)
    ax2.set_ylabel("contact-angle residual", color="r", fontsize=8)
    ax.set_xlabel("t")
    ax.set_title("height and contact angle")
    ax.legend(fontsize=8, loc="center right")

    fig.suptitle(
        f"{cfg.flow_kind} flow, n={n}, theta={cfg.theta:.4f}, "
        f"N_beta={cfg.N_beta}, stop: {trace.stop_reason}"
    )
    fig.tight_layout()
    path = str(outdir / "trace_monitors.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]


def render_captable_figure(table, outdir) -> list:
    fig, ax = plt.subplots(figsize=(7, 5))
    for k in table.columns:
        ax.semilogx(table.r_values, table.f[:, k], label=f"$f_{{{k}}}$")
        ax.axhline(table.f_infinity[k], ls="--", lw=0.7, color=ax.lines[-1].get_color())
    ax.set_xlabel("cap radius r")
    ax.set_ylabel("$W_k$")
    ax.set_title(
        f"cap quermassintegrals, n={table.n}, theta={table.theta:.4f} "
        "(dashed: flat-ball endpoints)"
    )
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = str(outdir / "captable.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]


def render_report_figure(reports, outdir) -> list:
    if not reports:
        return []
    names = [r.check_id for r in reports]
    margins = [r.relative_margin for r in reports]
    colors = ["tab:green" if r.passed else
              ("tab:orange" if r.verdict == "inconclusive" else "tab:red")
              for r in reports]
    height = max(3.0, 0.28 * len(reports))
    fig, ax = plt.subplots(figsize=(9, height))
    ypos = np.arange(len(reports))
    ax.barh(ypos, margins, color=colors)
    ax.set_yticks(ypos)
    ax.set_yticklabels(names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xscale("symlog", linthresh=1e-10)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("relative margin (>= 0 passes)")
    npass = sum(r.passed for r in reports)
    ax.set_title(f"check margins: {npass}/{len(reports)} passed")
    fig.tight_layout()
    path = str(outdir / "margins.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return [path]
