"""Truncated Fock-space representation of the cavity field."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import GuardError

NORM_TOL = 1e-9
HERMITIAN_TOL = 1e-10


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FieldVector:
    """Complex amplitudes c_0..c_nmax of a cavity field state."""

    amps: np.ndarray

    def __post_init__(self):
        amps = _frozen(self.amps)
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amps must be a non-empty 1-d array")
        object.__setattr__(self, "amps", amps)

    @property
    def n_max(self) -> int:
        return self.amps.size - 1

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    @property
    def normalized(self) -> bool:
        return abs(self.norm_sq - 1.0) <= NORM_TOL

    def photon_distribution(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def mean_photon_number(self) -> float:
        return float(np.dot(np.arange(self.amps.size), self.photon_distribution()))

    def tail_weight(self, width: int = 5) -> float:
        """Population of the top `width` Fock levels kept in the truncation."""
        return float(self.photon_distribution()[max(self.n_max - width + 1, 0):].sum())


def min_n_max(amplitude: float) -> int:
    """Smallest truncation accepted for a coherent state of this amplitude."""
    a = abs(amplitude)
    return math.ceil(a * a + 6 * a + 10)


def check_truncation(amplitude: float, n_max: int) -> None:
    if n_max < min_n_max(amplitude):
        raise GuardError(
            f"truncation too small: n_max={n_max} < {min_n_max(amplitude)} "
            f"required for amplitude {abs(amplitude):.3g}"
        )


def coherent_state(alpha: float, n_max: int) -> FieldVector:
    """Coherent state |alpha> for real alpha >= 0."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative (use rotate() for phases)")
    check_truncation(alpha, n_max)
    n = np.arange(n_max + 1)
    if alpha == 0:
        return fock_state(0, n_max)
    log_c = -alpha * alpha / 2 + n * math.log(alpha) - 0.5 * gammaln(n + 1)
    return FieldVector(np.exp(log_c))


def fock_state(n: int, n_max: int) -> FieldVector:
    if not 0 <= n <= n_max:
        raise ValueError(f"Fock level {n} outside 0..{n_max}")
    amps = np.zeros(n_max + 1, dtype=complex)
    amps[n] = 1.0
    return FieldVector(amps)


def rotate(state: FieldVector, phi: float) -> FieldVector:
    """Phase-space rotation exp(-i phi n): maps |a> to |a exp(-i phi)>."""
    n = np.arange(state.amps.size)
    return FieldVector(state.amps * np.exp(-1j * phi * n))


def annihilation_operator(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), 1).astype(complex)


def number_operator(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max + 1)).astype(complex)


def quadrature_generator(n_max: int) -> np.ndarray:
    """h = -i(a^dag - a), the generator of real displacements."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    a = annihilation_operator(n_max)
    return -1j * (a.T - a)


def laguerre_table(x: float, n_max: int) -> np.ndarray:
    """L[j, k] = generalized Laguerre L_j^(k)(x) for 0 <= j, k <= n_max.

    Forward three-term recurrence in j, vectorized over the order k.
    """
    k = np.arange(n_max + 1, dtype=float)
    L = np.empty((n_max + 1, n_max + 1))
    L[0] = 1.0
    if n_max >= 1:
        L[1] = 1.0 + k - x
    for j in range(1, n_max):
        L[j + 1] = ((2 * j + 1 + k - x) * L[j] - (j + k) * L[j - 1]) / (j + 1)
    return L


def displacement_interior(beta: float, n_max: int) -> int:
    """Highest Fock level on which the truncated D(beta) is certified unitary."""
    return n_max - math.ceil(6 * abs(beta) * math.sqrt(n_max))


@lru_cache(maxsize=256)
def _displacement(beta: float, n_max: int) -> np.ndarray:
    dim = n_max + 1
    if beta == 0:
        out = np.eye(dim)
    else:
        x = beta * beta
        L = laguerre_table(x, n_max)
        m, n = np.indices((dim, dim))
        lower = m >= n
        k = np.where(lower, m - n, 0)
        lo = np.where(lower, n, 0)
        # <m|D|n> = sqrt(n!/m!) beta^(m-n) e^{-x/2} L_n^(m-n)(x), m >= n
        log_mag = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) + k * math.log(abs(beta)) - x / 2
        sign = np.where((beta < 0) & (k % 2 == 1), -1.0, 1.0)
        out = np.where(lower, sign * np.exp(log_mag) * L[lo, k], 0.0)
        # <n|D|m> = (-1)^(m-n) <m|D|n> for real beta
        upper = np.where((k % 2 == 1), -1.0, 1.0) * out
        out = out + np.triu(upper.T, 1)
    out = out.astype(complex)
    out.setflags(write=False)
    return out


def displacement_operator(beta: float, n_max: int) -> np.ndarray:
    """Truncated matrix of D(beta) = exp(beta (a^dag - a)) for real beta.

    Elements come from the closed associated-Laguerre form, so every entry is
    exact; only columns near n_max lose unitarity through truncation.
    """
    beta = float(beta)
    if abs(beta) > 0.25 * math.sqrt(n_max):
        raise GuardError(
            f"|beta|={abs(beta):.3g} exceeds the validity guard 0.25*sqrt(n_max)="
            f"{0.25 * math.sqrt(n_max):.3g}"
        )
    return _displacement(beta, int(n_max))


def _check_hermitian(op: np.ndarray) -> None:
    if np.max(np.abs(op - op.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("operator is not Hermitian")


def expectation_and_variance(op: np.ndarray, state) -> tuple[float, float]:
    """Mean and variance of a Hermitian field operator.

    `state` may be a FieldVector, a bare amplitude array, or an
    AtomFieldState, in which case the operator acts on the field in both
    atomic branches.
    """
    op = np.asarray(op)
    _check_hermitian(op)
    if hasattr(state, "branches"):
        branches = state.branches()
    elif isinstance(state, FieldVector):
        branches = (state.amps,)
    else:
        branches = (np.asarray(state),)
    norm = sum(np.vdot(b, b).real for b in branches)
    if abs(norm - 1.0) > NORM_TOL:
        raise GuardError(f"state not normalized (norm^2 = {norm:.12g})")
    mean = 0.0
    second = 0.0
    for b in branches:
        ob = op @ b
        mean += np.vdot(b, ob)
        second += np.vdot(ob, ob)
    if abs(mean.imag) > 1e-10:
        raise GuardError(f"expectation has imaginary part {mean.imag:.3g}")
    mean = float(mean.real)
    var = float(second.real) - mean * mean
    if var < -1e-10:
        raise GuardError(f"negative variance {var:.3g}")
    return mean, max(var, 0.0)
