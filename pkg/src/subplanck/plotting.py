"""Figures rendered from the scenario tables."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.direction": "in",
    "ytick.direction": "in",
    "lines.linewidth": 1.2,
    "svg.hashsalt": "subplanck",
    "svg.fonttype": "none",
}


def _col(table, name):
    i = table.columns.index(name)
    return np.array([row[i] for row in table.rows], dtype=float)


def _save(fig, out_dir: Path, name: str) -> Path:
    path = out_dir / f"{name}.svg"
    fig.savefig(path, metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def _collapse(tables, cfg, ax):
    t = tables["collapse"]
    ax.plot(_col(t, "T1_us"), _col(t, "Pg_ideal_prob"), label="ideal")
    ax.plot(_col(t, "T1_us"), _col(t, "Pg_detected_prob"), label="with imperfections")
    ax.set_xlabel(r"$T_1$ ($\mu$s)")
    ax.set_ylabel(r"$P_g$")
    ax.set_ylim(0, 1)


def _revival(tables, cfg, ax):
    t = tables["revival"]
    x = _col(t, "T2_us")
    ax.plot(x, _col(t, "Pg_beta0_prob"), color="tab:blue", label=r"$\beta=0$")
    ax.plot(x, _col(t, "Pg_beta_prob"), color="tab:red", label=rf"$\beta={cfg.beta:g}$")
    ax.plot(x, _col(t, "Pg_noflip_prob"), color="0.6", ls=":", label="no phase flip")
    ax.axvline(cfg.T1, color="0.5", ls="--", lw=0.8)
    ax.set_xlabel(r"$T_2$ ($\mu$s)")
    ax.set_ylabel(r"$P_g$")
    ax.set_ylim(0, 1)


def _fringes(tables, cfg, ax):
    t, f = tables["fringes"], tables["fringes_fisher"]
    beta = _col(t, "beta_dimless")
    ax.plot(beta, _col(t, "p_hat_prob"), "o", ms=4, label="simulated data")
    ax.plot(beta, _col(t, "Pg_numeric_prob"), label="ideal")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$P_g$")
    ax.set_ylim(0, 1)
    ax2 = ax.twinx()
    ax2.plot(beta, _col(f, "F_measured_fit_dimless"), color="k", label="FI of fit")
    ax2.set_ylabel("Fisher information")


def _fisher_scan(tables, cfg, ax):
    t = tables["fisher_scan"]
    t1 = _col(t, "T1_us")
    fig = ax.figure
    fig.clear()
    values = list(cfg.fisher_t1_values)
    axes = fig.subplots(len(values), 1, sharex=True)
    axes = np.atleast_1d(axes)[::-1]  # bottom to top in increasing T1
    for a, value in zip(axes, values):
        sel = t1 == value
        a.axhspan(_col(t, "sqrtF_SQL_dimless")[sel][0], _col(t, "sqrtF_Q_dimless")[sel][0],
                  color="c", alpha=0.3, lw=0)
        a.plot(_col(t, "T2_us")[sel], _col(t, "sqrtF_dimless")[sel], color="k")
        a.axvline(value, color="0.5", ls="--", lw=0.8)
        a.set_ylim(0, 5)
        a.text(0.02, 0.8, rf"$T_1={value:g}\,\mu$s", transform=a.transAxes, fontsize=8)
    axes[0].set_xlabel(r"$T_2$ ($\mu$s)")
    axes[len(axes) // 2].set_ylabel(r"$\sqrt{F}$")
    return axes[0]


def _precision_curve(tables, cfg, ax):
    t = tables["precision_curve"]
    x = _col(t, "T1_us")
    ax.plot(x, _col(t, "delta_beta_opt_dimless"), color="k", label=r"optimal $T_2$")
    ax.fill_between(x, _col(t, "delta_beta_Q_dimless"), _col(t, "delta_beta_SQL_dimless"),
                    color="c", alpha=0.3, label="sub-Planck region")
    ax.set_xlabel(r"$T_1$ ($\mu$s)")
    ax.set_ylabel(r"$\Delta\beta^{(1)}$")
    top = ax.secondary_xaxis("top", functions=(
        lambda T: 2 * cfg.alpha * np.sin(cfg.omega0 * np.asarray(T) / (4 * cfg.alpha)),
        lambda D: 4 * cfg.alpha / cfg.omega0 * np.arcsin(np.clip(np.asarray(D) / (2 * cfg.alpha), -1, 1)),
    ))
    top.set_xlabel("D")


def _table1(tables, cfg, ax):
    t = tables["table1"]
    labels = [f"{row[0]} {row[1]}".strip() for row in t.rows]
    values = _col(t, "F_dimless")
    ax.barh(range(len(values)), values, color="tab:blue")
    ax.set_yticks(range(len(values)), labels, fontsize=7)
    ax.invert_yaxis()
    ax.axvline(4.0, color="0.4", ls="--", lw=0.8)
    ax.set_xlabel("Fisher information")


def _estimate(tables, cfg, ax):
    t = tables["estimate_scaling"]
    nu = _col(t, "nu_count")
    ax.loglog(nu, _col(t, "empirical_std_dimless"), "o", label="Monte Carlo")
    ax.loglog(nu, _col(t, "predicted_std_dimless"), "-", label=r"$1/\sqrt{\nu F}$")
    ax.set_xlabel(r"$\nu$")
    ax.set_ylabel(r"std of $\hat\beta$")


PANELS = {
    "collapse": _collapse,
    "revival": _revival,
    "fringes": _fringes,
    "fisher_scan": _fisher_scan,
    "precision_curve": _precision_curve,
    "table1": _table1,
    "estimate": _estimate,
}


def plot_scenario(cfg, tables, out_dir: Path) -> list[Path]:
    by_name = {t.name: t for t in tables}
    with plt.rc_context(STYLE):
        height = 7.0 if cfg.scenario == "fisher_scan" else 5.0 * (math.sqrt(5) - 1) / 2 + 0.6
        fig, ax = plt.subplots(figsize=(5.0, height))
        ax = PANELS[cfg.scenario](by_name, cfg, ax) or ax
        if ax.get_legend_handles_labels()[0]:
            ax.legend(loc="best")
        return [_save(fig, out_dir, cfg.scenario)]
