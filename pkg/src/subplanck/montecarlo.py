"""Repeated realizations, local maximum-likelihood inversion, Cramer-Rao checks."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import ConfigError
from .fisher import FringeDataset, fi_analytic
from .protocol import (
    ImperfectionModel,
    ProtocolParams,
    apply_detection_error,
    fringe_phase,
    pg_analytic,
    pg_with_imperfections,
)

# |cos gamma(0)| allowed at the operating point; the tabulated operating pairs sit within 0.08
MIDFRINGE_TOL = 0.2
SPLINE_POINTS = 41


def default_params() -> ProtocolParams:
    return ProtocolParams(T1=14.7, T2=16.3)


@dataclass(frozen=True)
class TrialConfig:
    params: ProtocolParams = field(default_factory=default_params)
    imperfections: ImperfectionModel | None = None
    beta_true: float = 0.0
    nu: int = 10_000
    replicas: int = 400
    seed: int = 2017

    def __post_init__(self):
        if self.nu < 1 or self.replicas < 1:
            raise ConfigError("nu and replicas must be >= 1")


class Estimate(NamedTuple):
    beta: float
    clamped: bool


class CramerRaoResult(NamedTuple):
    empirical_std: float
    predicted_std: float
    ratio: float
    mean_estimate: float
    n_clamped: int
    estimates: np.ndarray


def replica_stream(seed: int, index: int) -> np.random.Generator:
    """Independent Philox stream for replica `index` of a master seed."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


def sample_outcomes(p: float, nu: int, rng: np.random.Generator) -> int:
    """Number of g detections in nu independent realizations."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return int(rng.binomial(nu, p))


def estimator_window(params: ProtocolParams) -> float:
    """Half-width of the quarter fringe around beta = 0."""
    return math.pi / (4 * params.omega0 * params.T2)


def check_operating_point(params: ProtocolParams) -> None:
    c = math.cos(fringe_phase(params, 0.0))
    if abs(c) > MIDFRINGE_TOL:
        raise ConfigError(
            f"operating point T1={params.T1}, T2={params.T2} is not at mid-fringe "
            f"(cos gamma = {c:.3f}); pick T2 with P_g(beta=0) close to 1/2"
        )


class FringeModel:
    """P_g(beta) inside the estimator window, for the ideal or imperfect setup.

    Without atomic spread the closed form is used (with the detector channel
    when eps > 0); with spread the simulated signal is tabulated and splined.
    """

    def __init__(self, params: ProtocolParams, imperfections: ImperfectionModel | None = None):
        check_operating_point(params)
        self.params = params
        self.imperfections = imperfections
        self.half_width = estimator_window(params)
        self.eps = imperfections.detection_error if imperfections else 0.0
        self._spline = None
        if imperfections is not None and imperfections.position_sigma > 0:
            grid = np.linspace(-1.05, 1.05, SPLINE_POINTS) * self.half_width
            vals = [pg_with_imperfections(params.replace(beta=b), imperfections) for b in grid]
            self._spline = CubicSpline(grid, vals)

    def __call__(self, beta: float) -> float:
        if self._spline is not None:
            return float(self._spline(beta))
        return apply_detection_error(pg_analytic(self.params.replace(beta=beta)), self.eps)

    def fisher(self, beta: float) -> float:
        if self._spline is None:
            return fi_analytic(beta, self.params, self.eps)
        p = self(beta)
        return float(self._spline(beta, 1)) ** 2 / (p * (1 - p))


def estimate_beta_mle(count: int, nu: int, params: ProtocolParams,
                      model: FringeModel | None = None) -> Estimate:
    """Invert the fringe locally: the beta in the quarter-fringe window whose
    model probability equals count/nu. Frequencies beyond the model's range on
    the window are clamped to the nearer window edge."""
    model = model or FringeModel(params)
    w = model.half_width
    p_hat = count / nu
    lo, hi = model(-w), model(w)
    if min(lo, hi) <= p_hat <= max(lo, hi):
        return Estimate(brentq(lambda b: model(b) - p_hat, -w, w, xtol=1e-14, rtol=1e-14), False)
    return Estimate(-w if abs(p_hat - lo) < abs(p_hat - hi) else w, True)


def _replica(args) -> Estimate:
    index, p, config, model = args
    count = sample_outcomes(p, config.nu, replica_stream(config.seed, index))
    return estimate_beta_mle(count, config.nu, config.params, model)


def cramer_rao_trial(config: TrialConfig, workers: int = 1) -> CramerRaoResult:
    """Spread of the MLE over independent replicas versus 1/sqrt(nu F)."""
    model = FringeModel(config.params, config.imperfections)
    p = min(max(model(config.beta_true), 0.0), 1.0)
    tasks = [(i, p, config, model) for i in range(config.replicas)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_replica, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_replica(t) for t in tasks]
    estimates = np.array([r.beta for r in results])
    n_clamped = sum(r.clamped for r in results)
    empirical = float(np.std(estimates, ddof=1)) if estimates.size > 1 else math.nan
    predicted = 1 / math.sqrt(config.nu * model.fisher(config.beta_true))
    return CramerRaoResult(empirical, predicted, empirical / predicted,
                           float(estimates.mean()), n_clamped, estimates)


def scaling_check(config: TrialConfig, nus=(1000, 4000, 16000), workers: int = 1) -> list[float]:
    """Ratios std(4 nu)/std(nu) for consecutive entries of `nus`."""
    stds = [cramer_rao_trial(TrialConfig(config.params, config.imperfections, config.beta_true,
                                         nu, config.replicas, config.seed), workers).empirical_std
            for nu in nus]
    return [b / a for a, b in zip(stds, stds[1:])]


def sample_fringe(model, beta_grid, trials: int, seed: int) -> FringeDataset:
    """Simulated detection record: `trials` shots at each grid point.

    `model` maps beta to the probability of a g detection.
    """
    beta_grid = np.asarray(beta_grid, dtype=float)
    counts = [sample_outcomes(min(max(model(b), 0.0), 1.0), trials, replica_stream(seed, i))
              for i, b in enumerate(beta_grid)]
    return FringeDataset.from_counts(beta_grid, counts, trials)
