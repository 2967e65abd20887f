"""Scenario runners: each produces the tables behind one figure or table."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import __version__, constants
from .config import ScenarioConfig
from .fisher import (
    FringeDataset,
    fi_analytic,
    fi_from_fringes,
    fi_max,
    optimal_T2,
    precision_report,
    qfi_analytic,
    qfi_numeric,
    qfi_small_phase,
)
from .montecarlo import TrialConfig, cramer_rao_trial, sample_fringe
from .protocol import (
    ImperfectionModel,
    ProtocolParams,
    fringe_phase_offset,
    pg_analytic,
    pg_with_imperfections,
    prepare_resource,
    resource_size,
    run_protocol_numeric,
)


class Table(NamedTuple):
    name: str
    columns: list
    rows: list


def _pmap(fn, items, workers: int) -> list:
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))
    return [fn(x) for x in items]


def _pg_numeric(params: ProtocolParams) -> float:
    return run_protocol_numeric(params)[0]


def _pg_imperfect(model: ImperfectionModel, params: ProtocolParams) -> float:
    return pg_with_imperfections(params, model)


def grid(lo: float, hi: float, steps: int) -> np.ndarray:
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])


def dominant_frequency(t: np.ndarray, p: np.ndarray, pad: int = 2 ** 18) -> float:
    """Angular frequency (rad/us) of the largest peak in the spectrum of p(t)."""
    x = p - p.mean()
    spectrum = np.abs(np.fft.rfft(x, pad))
    freqs = 2 * np.pi * np.fft.rfftfreq(pad, t[1] - t[0])
    return float(freqs[1:][spectrum[1:].argmax()])


def peak_to_peak(t: np.ndarray, p: np.ndarray, start: float, width: float) -> float:
    sel = (t >= start) & (t <= start + width)
    return float(p[sel].max() - p[sel].min())


def collapse_metrics(t: np.ndarray, p: np.ndarray, alpha: float, omega0: float) -> dict:
    """Dominant Rabi frequency and envelope decay of a collapsing P_g(T1)."""
    expected = omega0 * math.sqrt(alpha ** 2 + 1)
    period = 2 * math.pi / expected
    t_c = 2 * math.sqrt(2) / omega0
    initial = peak_to_peak(t, p, 0.0, period)
    late = peak_to_peak(t, p, 2 * t_c - period / 2, period)
    freq = dominant_frequency(t, p)
    return {
        "dominant_frequency": freq,
        "expected_frequency": expected,
        "frequency_ratio": freq / expected,
        "collapse_time": t_c,
        "initial_amplitude": initial,
        "amplitude_at_2Tc": late,
        "envelope_ratio": late / initial,
    }


def scenario_collapse(cfg: ScenarioConfig) -> list[Table]:
    t1 = grid(cfg.t1_min, cfg.t1_max, cfg.t1_steps)
    params = [cfg.params(T1=float(t), T2=0.0, beta=0.0, flip_enabled=False) for t in t1]
    ideal = np.array(_pmap(_pg_numeric, params, cfg.workers))
    detected = _pmap(partial(_pg_imperfect, cfg.imperfections()), params, cfg.workers)
    signal = Table("collapse", ["T1_us", "Pg_ideal_prob", "Pg_detected_prob"],
                   list(zip(t1, ideal, detected)))
    m = collapse_metrics(t1, ideal, cfg.alpha, cfg.omega0)
    summary = Table("collapse_summary", ["quantity_label", "value", "unit_label"], [
        ("dominant_frequency", m["dominant_frequency"], "rad/us"),
        ("omega0_sqrt_alpha2_plus_1", m["expected_frequency"], "rad/us"),
        ("frequency_ratio", m["frequency_ratio"], "dimensionless"),
        ("collapse_time_Tc", m["collapse_time"], "us"),
        ("peak_to_peak_initial", m["initial_amplitude"], "probability"),
        ("peak_to_peak_at_2Tc", m["amplitude_at_2Tc"], "probability"),
        ("envelope_ratio", m["envelope_ratio"], "dimensionless"),
    ])
    return [signal, summary]


def scenario_revival(cfg: ScenarioConfig) -> list[Table]:
    t2 = grid(cfg.t2_min, cfg.t2_max, cfg.t2_steps)
    model = cfg.imperfections()
    cols = {}
    for label, beta, flip in (("beta0", 0.0, True), ("beta", cfg.beta, True), ("noflip", 0.0, False)):
        params = [cfg.params(T2=float(t), beta=beta, flip_enabled=flip) for t in t2]
        cols[label] = _pmap(_pg_numeric, params, cfg.workers)
        if flip:
            cols[label + "_det"] = _pmap(partial(_pg_imperfect, model), params, cfg.workers)
    signal = Table(
        "revival",
        ["T2_us", "Pg_beta0_prob", "Pg_beta_prob", "Pg_noflip_prob",
         "Pg_beta0_detected_prob", "Pg_beta_detected_prob"],
        list(zip(t2, cols["beta0"], cols["beta"], cols["noflip"], cols["beta0_det"], cols["beta_det"])),
    )
    base = cfg.params(T2=cfg.T1)
    offset = fringe_phase_offset(base, cfg.beta)
    D = resource_size(cfg.alpha, cfg.T1, cfg.omega0)
    phase = Table("revival_phase",
                  ["T1_us", "beta_dimless", "D_dimless", "phase_offset_rad", "phase_offset_pi",
                   "expected_2Dbeta_pi"],
                  [(cfg.T1, cfg.beta, D, offset, offset / math.pi, 2 * D * cfg.beta / math.pi)])
    return [signal, phase]


def scenario_fringes(cfg: ScenarioConfig) -> list[Table]:
    beta = grid(cfg.beta_min, cfg.beta_max, cfg.beta_steps)
    params = [cfg.params(beta=float(b)) for b in beta]
    model = cfg.imperfections()
    analytic = [pg_analytic(p) for p in params]
    numeric = np.array(_pmap(_pg_numeric, params, cfg.workers))
    detected = np.array(_pmap(partial(_pg_imperfect, model), params, cfg.workers))
    lookup = dict(zip(beta, detected))
    data = sample_fringe(lambda b: lookup[b], beta, cfg.trials, cfg.seed)
    measured = fi_from_fringes(data, cfg.fit_degree)
    ideal = fi_from_fringes(FringeDataset(beta, numeric, cfg.trials), cfg.fit_degree)
    signal = Table(
        "fringes",
        ["beta_dimless", "Pg_analytic_prob", "Pg_numeric_prob", "Pg_detected_prob",
         "p_hat_prob", "Pg_fit_prob"],
        list(zip(beta, analytic, numeric, detected, data.p_hat, measured.fit(beta))),
    )
    fisher = Table(
        "fringes_fisher",
        ["beta_dimless", "F_measured_fit_dimless", "F_numeric_fit_dimless", "F_analytic_dimless"],
        list(zip(beta, measured.F_curve, ideal.F_curve,
                 [fi_analytic(float(b), cfg.params()) for b in beta])),
    )
    summary = Table("fringes_summary", ["quantity_label", "F_dimless"], [
        ("F_at_zero_sampled_data", measured.F_at_zero),
        ("F_at_zero_numeric_ideal", ideal.F_at_zero),
        ("F_midfringe_closed_form", fi_max(cfg.T1, cfg.T2, cfg.omega0)),
        ("clipped_points", measured.n_clipped),
    ])
    return [signal, fisher, summary]


def scenario_fisher_scan(cfg: ScenarioConfig) -> list[Table]:
    t2 = grid(cfg.t2_min, cfg.t2_max, cfg.t2_steps)
    rows = []
    for t1 in cfg.fisher_t1_values:
        D = resource_size(cfg.alpha, t1, cfg.omega0)
        fq = 4 * (1 + D * D)
        for t in t2:
            rows.append((t1, t, math.sqrt(fi_max(t1, t, cfg.omega0)), math.sqrt(constants.F_SQL),
                         math.sqrt(fq), math.sqrt(qfi_small_phase(t1, cfg.omega0))))
    return [Table("fisher_scan",
                  ["T1_us", "T2_us", "sqrtF_dimless", "sqrtF_SQL_dimless", "sqrtF_Q_dimless",
                   "sqrtF_Q_small_phase_dimless"], rows)]


def scenario_precision_curve(cfg: ScenarioConfig) -> list[Table]:
    rows = []
    for t1 in grid(cfg.t1_min, cfg.t1_max, cfg.t1_steps):
        D = resource_size(cfg.alpha, t1, cfg.omega0)
        t2_opt, f_opt = optimal_T2(t1, cfg.omega0)
        fq = 4 * (1 + D * D)
        rows.append((t1, D, t2_opt, f_opt, 1 / math.sqrt(f_opt), 1 / math.sqrt(fq),
                     1 / math.sqrt(constants.F_SQL), precision_report(f_opt).db_gain))
    return [Table("precision_curve",
                  ["T1_us", "D_dimless", "T2_opt_us", "F_opt_dimless", "delta_beta_opt_dimless",
                   "delta_beta_Q_dimless", "delta_beta_SQL_dimless", "gain_dB"], rows)]


def scenario_table1(cfg: ScenarioConfig) -> list[Table]:
    base = cfg.params(T2=cfg.T1, beta=0.0)
    fq = qfi_analytic(base)
    rows = [
        ("F_Q_analytic_4(1+D^2)", "", fq),
        ("F_Q_small_phase_4+(omega0*T1)^2", "", qfi_small_phase(cfg.T1, cfg.omega0)),
        ("F_Q_numeric", "", qfi_numeric(prepare_resource(base))),
    ]
    for t2 in cfg.table_t2_values:
        rows.append(("F_midfringe_closed_form", t2, fi_max(cfg.T1, t2, cfg.omega0)))
    k = (1 - 2 * cfg.eps) ** 2
    for t2 in cfg.table_t2_values:
        rows.append(("F_midfringe_with_detection_error", t2, k * fi_max(cfg.T1, t2, cfg.omega0)))
    if cfg.simulated:
        model = cfg.imperfections()
        beta = grid(cfg.beta_min, cfg.beta_max, cfg.beta_steps)
        for i, t2 in enumerate(cfg.table_t2_values):
            params = [cfg.params(T2=t2, beta=float(b)) for b in beta]
            probs = dict(zip(beta, _pmap(partial(_pg_imperfect, model), params, cfg.workers)))
            data = sample_fringe(lambda b: probs[b], beta, cfg.trials, cfg.seed + i)
            rows.append(("F_simulated_data", t2, fi_from_fringes(data, cfg.fit_degree).F_at_zero))
    rows.append(("F_SQL", "", constants.F_SQL))
    out = []
    for label, t2, f in rows:
        rep = precision_report(f) if f > 0 else None
        out.append((label, t2, f, rep.delta_beta if rep else math.inf, rep.db_gain if rep else -math.inf))
    return [Table("table1", ["quantity_label", "T2_us", "F_dimless", "delta_beta_dimless", "gain_dB"], out)]


def scenario_estimate(cfg: ScenarioConfig) -> list[Table]:
    params = cfg.params(beta=0.0)
    rows = []
    for label, model in (("ideal", None),
                         ("detection_error", cfg.imperfections(position_sigma=0.0)),
                         ("detection_error_and_spread", cfg.imperfections())):
        if model is not None and model.detection_error == 0 and model.position_sigma == 0:
            continue
        r = cramer_rao_trial(TrialConfig(params, model, cfg.beta_true, cfg.nu, cfg.replicas, cfg.seed),
                             cfg.workers)
        rows.append((label, cfg.nu, cfg.replicas, cfg.beta_true, r.mean_estimate, r.empirical_std,
                     r.predicted_std, r.ratio, r.n_clamped))
    report = Table("estimate",
                   ["model_label", "nu_count", "replicas_count", "beta_true_dimless",
                    "mean_estimate_dimless", "empirical_std_dimless", "predicted_std_dimless",
                    "ratio_dimless", "clamped_count"], rows)
    scaling = []
    prev = None
    for nu in (cfg.nu // 10, 4 * (cfg.nu // 10), 16 * (cfg.nu // 10)):
        r = cramer_rao_trial(TrialConfig(params, None, cfg.beta_true, max(nu, 1), cfg.replicas, cfg.seed),
                             cfg.workers)
        scaling.append((max(nu, 1), r.empirical_std, r.predicted_std,
                        r.empirical_std / prev if prev else math.nan))
        prev = r.empirical_std
    return [report, Table("estimate_scaling",
                          ["nu_count", "empirical_std_dimless", "predicted_std_dimless",
                           "std_ratio_to_previous_dimless"], scaling)]


RUNNERS = {
    "collapse": scenario_collapse,
    "revival": scenario_revival,
    "fringes": scenario_fringes,
    "fisher_scan": scenario_fisher_scan,
    "precision_curve": scenario_precision_curve,
    "table1": scenario_table1,
    "estimate": scenario_estimate,
}


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format(float(value), ".10g")


def write_table(table: Table, out_dir: Path, cfg: ScenarioConfig) -> Path:
    path = out_dir / f"{table.name}.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_fmt(v) for v in row])
    meta = [
        ("artifact", "subplanck"),
        ("version", __version__),
        ("file", path.name),
        ("generated_utc", datetime.now(timezone.utc).isoformat(timespec="seconds")),
        *cfg.items(),
    ]
    path.with_suffix(".meta").write_text("".join(f"{k}={v}\n" for k, v in meta), encoding="utf-8")
    return path


def compute_tables(cfg: ScenarioConfig) -> list[Table]:
    return RUNNERS[cfg.scenario](cfg)


def run_scenario(cfg: ScenarioConfig, plot: bool = False) -> list[Path]:
    """Compute a scenario and write its CSV panels (and figure if requested)."""
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = compute_tables(cfg)
    paths = [write_table(t, out_dir, cfg) for t in tables]
    if plot:
        from .plotting import plot_scenario
        paths.extend(plot_scenario(cfg, tables, out_dir))
    return paths
