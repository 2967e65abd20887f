"""Resonant Jaynes-Cummings evolution with a Gaussian coupling profile."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, erfinv

from . import constants
from .errors import GuardError
from .fockspace import NORM_TOL, FieldVector


@dataclass(frozen=True)
class CavityMode:
    """Gaussian cavity mode crossed by the atom at constant velocity.

    Parameters
    ----------
    omega0 : float
        vacuum Rabi angular frequency at the cavity centre, rad/us
    waist : float
        mode waist, mm
    velocity : float
        atomic velocity, mm/us
    """

    omega0: float = constants.OMEGA0
    waist: float = constants.WAIST
    velocity: float = constants.VELOCITY

    def __post_init__(self):
        for name in ("omega0", "waist", "velocity"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def crossing_scale(self) -> float:
        """w/v in us."""
        return self.waist / self.velocity

    @property
    def t_max(self) -> float:
        """Effective time of a full crossing, sqrt(pi) w/v."""
        return math.sqrt(math.pi) * self.crossing_scale

    def coupling(self, t):
        """Omega(t) = Omega0 exp(-(v t / w)^2), t measured from the centre."""
        return self.omega0 * np.exp(-(np.asarray(t) / self.crossing_scale) ** 2)


def effective_time(t_start: float, t_end: float, mode: CavityMode | None = None) -> float:
    """Integral of exp(-(v tau/w)^2) over [t_start, t_end], in us.

    Infinite bounds are allowed.
    """
    mode = mode or CavityMode()
    if t_start > t_end:
        raise ValueError(f"t_start={t_start} is after t_end={t_end}")
    tau = mode.crossing_scale
    return float(0.5 * math.sqrt(math.pi) * tau * (erf(t_end / tau) - erf(t_start / tau)))


def crossing_time(T_eff: float, mode: CavityMode | None = None) -> float:
    """Lab time t >= 0 such that effective_time(0, t) == T_eff."""
    mode = mode or CavityMode()
    half = mode.t_max / 2
    if not 0 <= T_eff < half:
        raise GuardError(
            f"effective time {T_eff:.4g} us not reachable on one side of the "
            f"mode (max {half:.4g} us)"
        )
    return float(mode.crossing_scale * erfinv(T_eff / half))


def stark_phase(detuning_mhz: float, duration_us: float) -> float:
    """Relative g/e phase accumulated under a detuning pulse, rad."""
    return 2 * math.pi * detuning_mhz * duration_us


@dataclass(frozen=True)
class AtomFieldState:
    """Joint state g (x) |psi_g> + e (x) |psi_e> on a truncated Fock space."""

    g: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        g = np.array(self.g.amps if isinstance(self.g, FieldVector) else self.g, dtype=complex)
        e = np.array(self.e.amps if isinstance(self.e, FieldVector) else self.e, dtype=complex)
        if g.shape != e.shape or g.ndim != 1:
            raise ValueError("g and e branches must be 1-d arrays of equal length")
        g.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "e", e)

    @classmethod
    def product(cls, field: FieldVector, atom: str = "g") -> "AtomFieldState":
        zero = np.zeros_like(field.amps)
        if atom == "g":
            return cls(field.amps, zero)
        if atom == "e":
            return cls(zero, field.amps)
        raise ValueError(f"atomic state must be 'g' or 'e', got {atom!r}")

    @property
    def n_max(self) -> int:
        return self.g.size - 1

    @property
    def p_g(self) -> float:
        return float(np.vdot(self.g, self.g).real)

    @property
    def p_e(self) -> float:
        return float(np.vdot(self.e, self.e).real)

    @property
    def norm_sq(self) -> float:
        return self.p_g + self.p_e

    def branches(self) -> tuple[np.ndarray, np.ndarray]:
        return self.g, self.e

    def apply_field(self, op: np.ndarray) -> "AtomFieldState":
        """Apply a field operator in both atomic branches."""
        return AtomFieldState(op @ self.g, op @ self.e)

    def overlap(self, other: "AtomFieldState") -> complex:
        return complex(np.vdot(self.g, other.g) + np.vdot(self.e, other.e))

    def fidelity(self, other: "AtomFieldState") -> float:
        return abs(self.overlap(other)) ** 2 / (self.norm_sq * other.norm_sq)


def _check_normalized(state: AtomFieldState) -> None:
    if abs(state.norm_sq - 1.0) > NORM_TOL:
        raise GuardError(f"state not normalized (norm^2 = {state.norm_sq:.12g})")


def jc_propagate(state: AtomFieldState, T_eff: float, omega0: float = constants.OMEGA0) -> AtomFieldState:
    """Resonant JC evolution for an effective interaction time T_eff (us).

    Each doublet {|e,n>, |g,n+1>} rotates by theta_n = omega0 sqrt(n+1) T/2.
    |g,0> is invariant, and so is |e,n_max>, which has no partner inside the
    truncation, so the propagator is exactly unitary.
    """
    _check_normalized(state)
    if T_eff < 0:
        raise ValueError("T_eff must be non-negative")
    n_max = state.n_max
    theta = 0.5 * omega0 * np.sqrt(np.arange(1, n_max + 1)) * T_eff
    c, s = np.cos(theta), np.sin(theta)
    g = state.g.copy()
    e = state.e.copy()
    e_old = state.e[:n_max]
    g_old = state.g[1:]
    e[:n_max] = c * e_old - 1j * s * g_old
    g[1:] = -1j * s * e_old + c * g_old
    return AtomFieldState(g, e)


def atomic_phase_flip(state: AtomFieldState) -> AtomFieldState:
    """pi phase between |g> and |e>: the g branch changes sign."""
    _check_normalized(state)
    return AtomFieldState(-state.g, state.e)
