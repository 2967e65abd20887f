"""Prepare, displace, time-reverse, detect.

The measurement sequence in closed form (large-amplitude approximation) and
as an exact truncated-Fock simulation, plus the detector and atomic-spread
imperfection models.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import constants
from .dynamics import (
    AtomFieldState,
    CavityMode,
    atomic_phase_flip,
    crossing_time,
    effective_time,
    jc_propagate,
)
from .errors import GuardError
from .fockspace import check_truncation, coherent_state, displacement_operator

SPREAD_RULES = ("gauss_hermite", "monte_carlo")


@dataclass(frozen=True)
class ProtocolParams:
    """One setting of the measurement sequence.

    Times are effective interaction times in us; omega0 in rad/us.
    """

    alpha: float = constants.ALPHA
    T1: float = 13.4
    T2: float = 13.4
    beta: float = 0.0
    omega0: float = constants.OMEGA0
    n_max: int = constants.DEFAULT_N_MAX
    initial_atom: str = "g"
    flip_enabled: bool = True
    mode: CavityMode = field(default_factory=CavityMode)

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.T1 < 0 or self.T2 < 0:
            raise ValueError("T1 and T2 must be non-negative")
        if self.initial_atom not in ("g", "e"):
            raise ValueError(f"initial_atom must be 'g' or 'e', got {self.initial_atom!r}")
        if self.T1 + self.T2 > self.mode.t_max + 1e-12:
            raise ValueError(
                f"T1 + T2 = {self.T1 + self.T2:.4g} us exceeds the full crossing "
                f"{self.mode.t_max:.4g} us"
            )

    def replace(self, **changes) -> "ProtocolParams":
        return replace(self, **changes)

    @property
    def phi(self) -> float:
        """Rotation angle of the two field components, omega0 T1 / (4 alpha)."""
        return self.omega0 * self.T1 / (4 * self.alpha)

    @property
    def D(self) -> float:
        return resource_size(self.alpha, self.T1, self.omega0)


@dataclass(frozen=True)
class ImperfectionModel:
    """Detector errors and longitudinal spread of the atomic sample.

    position_sigma is the standard deviation (mm) of the atom's position
    along the beam relative to the nominal one.
    """

    detection_error: float = constants.DETECTION_ERROR
    position_sigma: float = constants.POSITION_SIGMA
    n_spread_samples: int = 15
    spread_rule: str = "gauss_hermite"
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.detection_error < 0.5:
            raise ValueError("detection_error must lie in [0, 0.5)")
        if self.position_sigma < 0:
            raise ValueError("position_sigma must be non-negative")
        if self.n_spread_samples < 1:
            raise ValueError("n_spread_samples must be >= 1")
        if self.spread_rule not in SPREAD_RULES:
            raise ValueError(f"spread_rule must be one of {SPREAD_RULES}")


def resource_size(alpha: float, T1: float, omega0: float = constants.OMEGA0) -> float:
    """Phase-space separation D = 2 alpha sin(omega0 T1 / 4 alpha)."""
    if alpha == 0:
        return 0.0
    return 2 * alpha * math.sin(omega0 * T1 / (4 * alpha))


def contrast(T1: float, T2: float, omega0: float = constants.OMEGA0) -> float:
    """Overlap of the two field components at T2: exp(-omega0^2 (T1-T2)^2 / 8)."""
    return math.exp(-(omega0 ** 2) * (T1 - T2) ** 2 / 8)


def fringe_phase(params: ProtocolParams, beta: float | None = None) -> float:
    """Fringe argument gamma of the closed-form signal.

    At T2 == T1 the exact 2 D beta is used; elsewhere the large-amplitude
    form omega0 T2 beta + omega0 alpha (T2 - T1).
    """
    beta = params.beta if beta is None else beta
    if params.T2 == params.T1:
        return 2 * params.D * beta
    return params.omega0 * params.T2 * beta + params.omega0 * params.alpha * (params.T2 - params.T1)


def pg_analytic(params: ProtocolParams) -> float:
    """Closed-form P_g = (1 + C cos gamma)/2.

    Valid for D well above 1. For an atom starting in |e> the labels are
    exchanged: the revival returns it to |e>, so P_g = (1 - C cos gamma)/2.
    """
    c = contrast(params.T1, params.T2, params.omega0)
    sign = 1.0 if params.initial_atom == "g" else -1.0
    return 0.5 * (1 + sign * c * math.cos(fringe_phase(params)))


def midfringe_T2(T1: float, alpha: float = constants.ALPHA,
                 omega0: float = constants.OMEGA0, side: int = 1) -> float:
    """T2 next to T1 where the closed-form signal sits at P_g = 1/2 for beta = 0."""
    return T1 + side * math.pi / (2 * omega0 * alpha)


def initial_state(params: ProtocolParams, amplitude_margin: float = 0.0) -> AtomFieldState:
    check_truncation(params.alpha + amplitude_margin, params.n_max)
    return AtomFieldState.product(coherent_state(params.alpha, params.n_max), params.initial_atom)


def prepare_resource(params: ProtocolParams) -> AtomFieldState:
    """Atom-field state after the preparation time T1."""
    return jc_propagate(initial_state(params), params.T1, params.omega0)


def run_protocol_numeric(params: ProtocolParams) -> tuple[float, AtomFieldState]:
    """Simulate the full sequence and return (P_g, final state).

    coherent field x atom -> JC(T1) -> [phase flip] -> D(beta) -> JC(T2).
    The displacement is injected instantaneously while the atom is detuned.
    """
    state = initial_state(params, amplitude_margin=abs(params.beta))
    state = jc_propagate(state, params.T1, params.omega0)
    if params.flip_enabled:
        state = atomic_phase_flip(state)
    if params.beta != 0:
        state = state.apply_field(displacement_operator(params.beta, params.n_max))
    state = jc_propagate(state, params.T2, params.omega0)
    if abs(state.norm_sq - 1.0) > 1e-9:
        raise GuardError(f"norm drifted to {state.norm_sq:.12g}; increase n_max")
    return state.p_g, state


def apply_detection_error(p, eps: float):
    """Symmetric binary channel: each outcome is misassigned with probability eps."""
    if not 0 <= eps < 0.5:
        raise ValueError("eps must lie in [0, 0.5)")
    arr = np.asarray(p, dtype=float)
    if np.any(arr < -1e-12) or np.any(arr > 1 + 1e-12):
        raise ValueError("probability outside [0, 1]")
    out = eps + (1 - 2 * eps) * arr
    return float(out) if out.ndim == 0 else out


def spread_offsets(model: ImperfectionModel) -> tuple[np.ndarray, np.ndarray]:
    """Position offsets (mm) and probability weights for the spread average."""
    if model.position_sigma == 0:
        return np.zeros(1), np.ones(1)
    if model.spread_rule == "gauss_hermite":
        x, w = np.polynomial.hermite_e.hermegauss(model.n_spread_samples)
        return x * model.position_sigma, w / w.sum()
    rng = np.random.Generator(np.random.Philox(model.seed))
    x = rng.normal(0.0, model.position_sigma, model.n_spread_samples)
    return x, np.full(x.size, 1.0 / x.size)


def switching_times(params: ProtocolParams) -> tuple[float, float, float]:
    """Nominal lab times (on, flip, off) of the interaction, in us.

    The flip and injection happen as the atom crosses the cavity centre. A
    single interaction (T2 = 0) is instead centred on the cavity.
    """
    mode = params.mode
    if params.T2 == 0:
        half = crossing_time(params.T1 / 2, mode)
        return -half, half, half
    return -crossing_time(params.T1, mode), 0.0, crossing_time(params.T2, mode)


def shifted_times(params: ProtocolParams, offset: float) -> tuple[float, float]:
    """Effective (T1, T2) for an atom displaced by `offset` mm along the beam.

    The switching instants stay at their nominal lab times while the coupling
    profile is centred offset/v later.
    """
    mode = params.mode
    t_on, t_mid, t_off = switching_times(params)
    s = offset / mode.velocity
    return effective_time(t_on - s, t_mid - s, mode), effective_time(t_mid - s, t_off - s, mode)


def pg_with_imperfections(params: ProtocolParams, model: ImperfectionModel) -> float:
    """P_g averaged over the longitudinal spread, then seen through the detector."""
    offsets, weights = spread_offsets(model)
    if model.position_sigma == 0:
        p = run_protocol_numeric(params)[0]
    else:
        p = 0.0
        for x, w in zip(offsets, weights):
            T1, T2 = shifted_times(params, x)
            p += w * run_protocol_numeric(params.replace(T1=T1, T2=T2))[0]
    return apply_detection_error(min(max(p, 0.0), 1.0), model.detection_error)


def fringe_phase_offset(params: ProtocolParams, beta: float,
                        half_window: float = 3.0, n_points: int = 121) -> float:
    """Phase shift (rad, in [0, 2 pi)) of the numeric revival fringe caused by beta.

    P_g(T2) around T2 = T1 is fitted, for beta and for 0, by
    1/2 + C(T2) [a cos(w tau) - b sin(w tau)], tau = T2 - T1, with the
    contrast envelope C and the local frequency w = omega0 (alpha + beta)
    fixed; the phase at tau = 0 is atan2(b, a).
    """
    def phase(b):
        tau = np.linspace(-half_window, half_window, n_points)
        tau = tau[params.T1 + tau >= 0]
        p = np.array([run_protocol_numeric(params.replace(T2=params.T1 + t, beta=b))[0] for t in tau])
        w = params.omega0 * (params.alpha + b)
        env = np.exp(-params.omega0 ** 2 * tau ** 2 / 8)
        basis = np.stack([env * np.cos(w * tau), -env * np.sin(w * tau)], axis=1)
        (a, s), *_ = np.linalg.lstsq(basis, p - 0.5, rcond=None)
        return math.atan2(s, a)

    return (phase(beta) - phase(0.0)) % (2 * math.pi)
