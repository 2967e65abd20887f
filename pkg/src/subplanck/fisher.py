"""Classical and quantum Fisher information of the displacement measurement."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial import Polynomial

from . import constants
from .errors import GuardError
from .fockspace import expectation_and_variance, quadrature_generator
from .protocol import ProtocolParams, contrast, resource_size

F_SQL = constants.F_SQL
CLIP = 1e-4
MAX_FIT_CONDITION = 1e8


@dataclass(frozen=True)
class FisherReport:
    F: float
    F_Q: float
    F_SQL: float
    delta_beta: float
    db_gain: float


@dataclass(frozen=True)
class FringeDataset:
    """Estimated P_g on a grid of injected amplitudes."""

    beta_grid: np.ndarray
    p_hat: np.ndarray
    trials: np.ndarray

    def __post_init__(self):
        beta = np.asarray(self.beta_grid, dtype=float)
        p = np.asarray(self.p_hat, dtype=float)
        trials = np.broadcast_to(np.asarray(self.trials, dtype=int), beta.shape).copy()
        if not (beta.shape == p.shape == trials.shape) or beta.ndim != 1:
            raise ValueError("beta_grid, p_hat and trials must be 1-d and of equal length")
        if np.any(np.diff(beta) <= 0):
            raise ValueError("beta_grid must be strictly increasing")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("p_hat must lie in [0, 1]")
        for name, arr in (("beta_grid", beta), ("p_hat", p), ("trials", trials)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_counts(cls, beta_grid, counts, trials) -> "FringeDataset":
        counts = np.asarray(counts)
        trials = np.broadcast_to(np.asarray(trials), counts.shape)
        return cls(beta_grid, counts / trials, trials)


class FringeFisher(NamedTuple):
    F_curve: np.ndarray
    F_at_zero: float
    fit: Polynomial
    n_clipped: int


def fi_binary(p, dp_dbeta):
    """Fisher information of a two-outcome measurement, dp^2 / (p (1 - p))."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise GuardError("Fisher information diverges at p = 0 or p = 1")
    out = np.asarray(dp_dbeta, dtype=float) ** 2 / (p * (1 - p))
    return float(out) if out.ndim == 0 else out


def fi_max(T1: float, T2: float, omega0: float = constants.OMEGA0) -> float:
    """Mid-fringe Fisher information C^2 omega0^2 T2^2."""
    return contrast(T1, T2, omega0) ** 2 * (omega0 * T2) ** 2


def fi_analytic(beta: float, params: ProtocolParams, eps: float = 0.0) -> float:
    """Fisher information of the closed-form fringe at beta.

    C^2 w^2 sin^2(g) / (1 - C^2 cos^2(g)) with w = omega0 T2 and
    g = omega0 T2 beta + omega0 alpha (T2 - T1). With eps > 0 the signal
    first goes through the symmetric detection channel.
    """
    c = contrast(params.T1, params.T2, params.omega0)
    slope = params.omega0 * params.T2
    gamma = slope * beta + params.omega0 * params.alpha * (params.T2 - params.T1)
    if eps == 0:
        denom = 1 - (c * math.cos(gamma)) ** 2
        if c == 1.0:
            return slope ** 2
        return (c * slope * math.sin(gamma)) ** 2 / denom
    k = 1 - 2 * eps
    p = eps + k * 0.5 * (1 + c * math.cos(gamma))
    dp = -k * 0.5 * c * slope * math.sin(gamma)
    return dp * dp / (p * (1 - p))


def optimal_T2(T1: float, omega0: float = constants.OMEGA0) -> tuple[float, float]:
    """Measurement time maximizing C^2 omega0^2 T2^2, and that maximum.

    With a = omega0 T1 and x = omega0 T2 the objective is
    x^2 exp(-(x - a)^2 / 4), stationary at x^2 - a x - 4 = 0.
    """
    if T1 < 0:
        raise ValueError("T1 must be non-negative")
    a = omega0 * T1
    x = 0.5 * (a + math.sqrt(a * a + 16))
    T2 = x / omega0
    return T2, fi_max(T1, T2, omega0)


def optimality_ratio(D: float) -> float:
    """max over T2 of the mid-fringe FI, divided by 4(1 + D^2), with D = omega0 T1 / 2."""
    a = 2 * D
    x = 0.5 * (a + math.sqrt(a * a + 16))
    return x * x * math.exp(-((x - a) ** 2) / 4) / (4 * (1 + D * D))


def qfi_numeric(state) -> float:
    """4 Var(h) in a pure field or atom-field state."""
    n_max = state.n_max
    return 4 * expectation_and_variance(quadrature_generator(n_max), state)[1]


def qfi_analytic(params: ProtocolParams) -> float:
    """4 (1 + D^2) for the resource prepared during T1."""
    if params.alpha <= 0:
        raise ValueError("alpha must be positive")
    D = resource_size(params.alpha, params.T1, params.omega0)
    return 4 * (1 + D * D)


def qfi_small_phase(T1: float, omega0: float = constants.OMEGA0) -> float:
    """Small-rotation form of the resource QFI, 4 + omega0^2 T1^2."""
    return 4 + (omega0 * T1) ** 2


def heisenberg_limit(alpha: float) -> float:
    return 16 * alpha * alpha


def fi_from_fringes(data: FringeDataset, fit_degree: int = 6) -> FringeFisher:
    """Fisher information from a polynomial interpolation of a measured fringe.

    The clipped p_hat values are fitted by least squares; F follows from the
    fit and its analytic derivative at every grid point.
    """
    beta = data.beta_grid
    if beta.size < fit_degree + 3:
        raise GuardError(f"need at least {fit_degree + 3} points for a degree {fit_degree} fit")
    p = np.clip(data.p_hat, CLIP, 1 - CLIP)
    n_clipped = int(np.count_nonzero(p != data.p_hat))
    fit = Polynomial.fit(beta, p, fit_degree)
    x = fit.mapparms()[0] + fit.mapparms()[1] * beta
    cond = np.linalg.cond(np.polynomial.polynomial.polyvander(x, fit_degree))
    if cond > MAX_FIT_CONDITION:
        raise GuardError(f"fit ill-conditioned (cond={cond:.3g}); reduce fit_degree")
    deriv = fit.deriv()

    def fisher(b):
        return fi_binary(np.clip(fit(b), CLIP, 1 - CLIP), deriv(b))

    return FringeFisher(fisher(beta), float(fisher(0.0)), fit, n_clipped)


def precision_report(F: float, F_Q: float = math.nan) -> FisherReport:
    """Single-shot precision 1/sqrt(F) and gain over the SQL in dB."""
    if not F > 0:
        raise ValueError("Fisher information must be positive")
    return FisherReport(
        F=F,
        F_Q=F_Q,
        F_SQL=F_SQL,
        delta_beta=1 / math.sqrt(F),
        db_gain=10 * math.log10(math.sqrt(F / F_SQL)),
    )
