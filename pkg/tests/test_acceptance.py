"""Acceptance criteria, one test each. Every check prints a PASS/FAIL line,
collected again in the terminal summary."""
import math

import numpy as np
from scipy.integrate import quad

from subplanck.constants import ALPHA, OMEGA0
from subplanck.dynamics import AtomFieldState, CavityMode, effective_time, jc_propagate
from subplanck.fisher import (
    F_SQL,
    FringeDataset,
    fi_analytic,
    fi_from_fringes,
    fi_max,
    optimality_ratio,
    precision_report,
    qfi_analytic,
    qfi_numeric,
)
from subplanck.fockspace import coherent_state
from subplanck.montecarlo import TrialConfig, cramer_rao_trial, scaling_check
from subplanck.protocol import (
    ImperfectionModel,
    ProtocolParams,
    apply_detection_error,
    fringe_phase_offset,
    pg_analytic,
    pg_with_imperfections,
    prepare_resource,
    run_protocol_numeric,
)
from subplanck.scenarios import collapse_metrics

BETA = np.linspace(-0.6, 0.6, 13)


def test_criterion_01_table_theory_rows(criterion):
    fq = qfi_analytic(ProtocolParams(T1=14.7))
    f163, f135 = fi_max(14.7, 16.3), fi_max(14.7, 13.5)
    f_eps = (1 - 2 * 0.05) ** 2 * f163
    ok = (abs(fq - 21.6) <= 0.5 and abs(f163 - 21.0) <= 0.2 and abs(f_eps - 17.0) <= 0.3
          and F_SQL == 4.0 and abs(f135 - 13.9) <= 1.0)
    criterion("1 table theory rows", ok,
              f"F_Q={fq:.3f} F(16.3)={f163:.3f} F_eps={f_eps:.3f} F(13.5)={f135:.3f} F_SQL={F_SQL}")


def test_criterion_02_numeric_qfi(criterion):
    p = ProtocolParams(T1=14.7, T2=14.7)
    fn, fa = qfi_numeric(prepare_resource(p)), qfi_analytic(p)
    criterion("2 numeric QFI", 19.5 <= fn <= 21.5 and fn < fa, f"numeric={fn:.3f} analytic={fa:.3f}")


def test_criterion_03_db_headline(criterion):
    gain = precision_report(12.0).db_gain
    criterion("3 dB headline", abs(gain - 2.39) <= 0.01, f"gain={gain:.4f} dB")


def test_criterion_04_optimality(criterion):
    d = np.linspace(2.0, 10.0, 50)
    r = np.array([optimality_ratio(x) for x in d])
    # 0.98190 at D = 2 itself; the 0.1% tolerance there absorbs the rounding to 1.8%
    above = bool(np.all(r[1:] >= 0.982))
    at_two = abs(r[0] / 0.982 - 1) <= 1e-3
    criterion("4 optimality ratio", above and at_two,
              f"ratio(D=2)={r[0]:.5f} min(D>2)={r[1:].min():.5f} monotone={bool(np.all(np.diff(r) > 0))}")


def test_criterion_05_geometry(criterion):
    mode = CavityMode()
    t_max = effective_time(-math.inf, math.inf, mode)
    worst = 0.0
    for a, b in ((-math.inf, math.inf), (-30.0, 10.0), (0.0, 12.0), (-5.0, -1.0)):
        ref, _ = quad(lambda t: math.exp(-(t / mode.crossing_scale) ** 2), a, b, epsabs=1e-13, epsrel=1e-13)
        worst = max(worst, abs(effective_time(a, b, mode) / ref - 1))
    criterion("5 geometry", abs(t_max - 42.25) <= 0.05 and worst <= 1e-8,
              f"T_max={t_max:.4f} us, max rel. deviation from quadrature={worst:.2e}")


def test_criterion_06_fringe_phase(criterion):
    offset = fringe_phase_offset(ProtocolParams(T1=13.4, T2=13.4), 1.0) / math.pi
    criterion("6 fringe phase", abs(offset - 1.23) <= 0.05, f"offset={offset:.4f} pi")


def test_criterion_07_time_reversal(criterion):
    revival = run_protocol_numeric(ProtocolParams(T1=13.4, T2=13.4))[0]
    band = [run_protocol_numeric(ProtocolParams(T1=13.4, T2=float(t), flip_enabled=False))[0]
            for t in np.linspace(10, 15, 51)]
    dev = max(abs(p - 0.5) for p in band)
    criterion("7 time reversal", revival >= 0.98 and dev <= 0.15,
              f"P_g(flip)={revival:.4f}, max |P_g-1/2| without flip={dev:.3f}")


def test_criterion_08_collapse(criterion):
    t = np.linspace(0, 40, 401)
    s0 = AtomFieldState.product(coherent_state(ALPHA, 80), "g")
    p = np.array([jc_propagate(s0, float(x)).p_g for x in t])
    m = collapse_metrics(t, p, ALPHA, OMEGA0)
    criterion("8 collapse", abs(m["frequency_ratio"] - 1) <= 0.03 and m["envelope_ratio"] <= 0.25,
              f"freq ratio={m['frequency_ratio']:.4f}, envelope at 2Tc={m['envelope_ratio']:.3f}")


def test_criterion_09a_qcr_ordering_closed_form(criterion):
    # Closed-form FI against 4(1 + D^2) over T1 up to the operating 14.7 us. Expected to fail
    # near T2 = 17 us for T1 >= 13.9 us; see the decisions ledger.
    worst, n_bad, n = -math.inf, 0, 0
    for T1 in np.linspace(0, 14.7, 20):
        for T2 in np.linspace(0, 25, 20):
            p = ProtocolParams(T1=float(T1), T2=float(T2))
            fq = qfi_analytic(p) if T1 > 0 else 4.0
            for b in np.linspace(-1, 1, 10):
                excess = fi_analytic(float(b), p) - fq
                worst = max(worst, excess)
                n_bad += excess > 1e-9
                n += 1
    criterion("9a QCR ordering, closed form", n_bad == 0,
              f"{n_bad}/{n} grid points exceed 4(1+D^2); largest excess {worst:.4f}")


def test_criterion_09b_qcr_ordering_fringes(criterion):
    worst = 0.0
    for T1, T2 in ((12.0, 13.5), (14.7, 16.3), (14.7, 13.5), (9.2, 11.0), (6.8, 9.0)):
        p = ProtocolParams(T1=T1, T2=T2)
        data = FringeDataset(BETA, np.array([run_protocol_numeric(p.replace(beta=float(b)))[0] for b in BETA]),
                             np.full(BETA.size, 1))
        worst = max(worst, fi_from_fringes(data).F_curve.max() / qfi_numeric(prepare_resource(p)))
    criterion("9b QCR ordering, fringe FI vs numeric QFI", worst <= 1.02, f"max F/F_Q={worst:.4f}")


def test_criterion_10_cramer_rao(criterion):
    r = cramer_rao_trial(TrialConfig())
    ratios = scaling_check(TrialConfig())
    ok = abs(r.ratio - 1) <= 0.10 and all(abs(x - 0.5) <= 0.1 for x in ratios)
    criterion("10 Cramer-Rao saturation", ok,
              f"std ratio={r.ratio:.4f}, scaling={', '.join(f'{x:.3f}' for x in ratios)}")


def test_criterion_11_detection_scaling(criterion):
    p = ProtocolParams(T1=12.0, T2=13.5)
    b0 = (math.pi / 2 - OMEGA0 * ALPHA * 1.5) / (OMEGA0 * 13.5)
    analytic = fi_analytic(b0, p, 0.05) / fi_analytic(b0, p)
    clean = np.array([pg_analytic(p.replace(beta=float(b))) for b in BETA])
    F = [fi_from_fringes(FringeDataset(BETA, apply_detection_error(clean, e), np.full(BETA.size, 1))).F_at_zero
         for e in (0.0, 0.05)]
    fitted = F[1] / F[0]
    criterion("11 detection scaling", abs(analytic - 0.81) <= 0.01 and abs(fitted - 0.81) <= 0.01,
              f"analytic={analytic:.4f}, from fringes={fitted:.4f}")


def test_criterion_12_spread_substitute(criterion):
    p = ProtocolParams(T1=12.0, T2=13.5)
    values = []
    for sigma in (0.0, 0.1, 0.2, 0.3, 0.5):
        m = ImperfectionModel(detection_error=0.05, position_sigma=sigma)
        data = FringeDataset(BETA, np.array([pg_with_imperfections(p.replace(beta=float(b)), m) for b in BETA]),
                             np.full(BETA.size, 1))
        values.append(fi_from_fringes(data).F_at_zero)
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    reachable = any(5 <= v <= 15 for v in values[1:])
    criterion("12 spread model (measured values not reproduced)", decreasing and reachable,
              "F at sigma 0/0.1/0.2/0.3/0.5 mm = " + "/".join(f"{v:.2f}" for v in values))
