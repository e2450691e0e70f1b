"""Static SVG plots for the CLI.

matplotlib is imported lazily so the simulation stack works without it.
Output is deterministic: fixed hash salt, no embedded creation date.
"""

from __future__ import annotations

import math

import numpy as np


def _plt():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "fgsynapse"
    return plt


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    import matplotlib.pyplot as plt
    plt.close(fig)


def plot_window(rows, fits, path):
    """Pairing window: simulated points, fitted exponentials, rule overlay."""
    plt = _plt()
    dt = np.array([r.dt1_ms for r in rows])
    fg = np.array([r.dw_fg_pct for r in rows])
    ts = np.array([r.dw_tstdp_pct for r in rows])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.axvline(0.0, color="0.8", lw=0.8)
    ax.plot(dt, fg, "o", ms=4, color="tab:red", label="FG synapse")
    ax.plot(dt, ts, "-", lw=1.0, color="tab:blue", label="triplet rule")
    plus, minus = fits
    for fit, side in ((plus, 1.0), (minus, -1.0)):
        if fit is None:
            continue
        grid = np.linspace(2.0, max(abs(dt)), 200)
        ax.plot(side * grid, fit.amplitude * np.exp(-grid / (fit.tau * 1e3)),
                "--", lw=1.0, color="tab:red", alpha=0.6,
                label=f"fit tau={fit.tau * 1e3:.1f}ms")
    ax.set_xlabel("dt (ms, rule axis)")
    ax.set_ylabel("weight change (%)")
    ax.legend(fontsize=8)
    _save(fig, path)


def _bars(ax, rows_by_series, labels):
    width = 0.8 / len(rows_by_series)
    x = np.arange(len(labels))
    colors = {"fg": "tab:red", "tstdp": "tab:blue", "dstdp": "0.45"}
    for k, (name, vals) in enumerate(rows_by_series.items()):
        ax.bar(x + (k - (len(rows_by_series) - 1) / 2) * width, vals,
               width=width, label=name, color=colors.get(name))
    ax.set_xticks(x)
    ax.set_xticklabels(labels, fontsize=7)
    ax.axhline(0.0, color="0.6", lw=0.8)


def plot_triplet(rows1, rows2, path):
    """Grouped bars for the two triplet protocols."""
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.6), sharey=True)
    for ax, rows, name in zip(axes, (rows1, rows2),
                              ("pre-post-pre", "post-pre-post")):
        series = {"fg": [r.dw_fg_pct for r in rows],
                  "tstdp": [r.dw_tstdp_pct for r in rows],
                  "dstdp": [r.dw_dstdp_pct for r in rows]}
        _bars(ax, series, [r.point_label for r in rows])
        ax.set_title(name, fontsize=9)
    axes[0].set_ylabel("weight change (%)")
    axes[0].legend(fontsize=8)
    _save(fig, path)


def plot_quadruplet(rows, path):
    plt = _plt()
    t = np.array([r.t_ms for r in rows])
    order = np.argsort(t)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.axhline(0.0, color="0.8", lw=0.8)
    for attr, style, name in (("dw_fg_pct", "o-", "FG synapse"),
                              ("dw_tstdp_pct", "s--", "triplet rule"),
                              ("dw_dstdp_pct", "^:", "doublet rule")):
        y = np.array([getattr(r, attr) for r in rows])
        ax.plot(t[order], y[order], style, ms=4, lw=1.0, label=name)
    ax.set_xlabel("T (ms, rule axis)")
    ax.set_ylabel("weight change (%)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_frequency(rows_plus, rows_minus, path):
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.axhline(0.0, color="0.8", lw=0.8)
    for rows, marker, tag in ((rows_plus, "o", "dt>0"),
                              (rows_minus, "v", "dt<0")):
        if not rows:
            continue
        rho = np.array([r.rho_hz for r in rows])
        order = np.argsort(rho)
        for attr, ls, name in (("dw_fg_pct", "-", "FG"),
                               ("dw_tstdp_pct", "--", "rule")):
            y = np.array([getattr(r, attr) for r in rows])
            ax.plot(rho[order], y[order], marker=marker, ls=ls, ms=4, lw=1.0,
                    label=f"{name} {tag}")
    ax.set_xlabel("pairing rate (Hz, rule axis)")
    ax.set_ylabel("weight change (%)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_traces(tr, path):
    """Stacked node-voltage and current traces for one run."""
    plt = _plt()
    fig, axes = plt.subplots(5, 1, figsize=(7.0, 8.0), sharex=True)
    t = tr.t * 1e3
    panels = ((tr.v_g, "v_g (V)"), (tr.v_tun_eff, "v_tun_eff (V)"),
              (tr.v_d, "v_d (V)"), (tr.v_fg, "v_fg (V)"))
    for ax, (y, name) in zip(axes, panels):
        ax.plot(t, y, lw=0.9)
        ax.set_ylabel(name, fontsize=8)
    ax = axes[4]
    for y, name in ((tr.i_inj, "i_inj"), (tr.i_tun, "i_tun")):
        safe = np.where(y > 0, y, math.nan)
        ax.semilogy(t, safe, lw=0.9, label=name)
    ax.set_ylabel("A", fontsize=8)
    ax.set_xlabel("t (ms, hardware axis)")
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_generator(comp_single, comp_double, path):
    """Ideal vs emulated pulse-depth curves for both generators."""
    plt = _plt()
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.6))
    for ax, comp in zip(axes, (comp_single, comp_double)):
        ms = comp.dt2 * 1e3
        ax.plot(ms, comp.ideal, "-", lw=1.2, label="ideal")
        ax.plot(ms, comp.emulated, "--", lw=1.2, label="emulated")
        ax.set_title(f"{comp.kind} (sup err {comp.sup_error * 1e3:.2f} mV)",
                     fontsize=9)
        ax.set_xlabel("dt2 (ms)")
        ax.set_ylabel("pulse depth (V)")
        ax.legend(fontsize=8)
    _save(fig, path)
