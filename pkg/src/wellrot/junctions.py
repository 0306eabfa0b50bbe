"""Semiconductor junction model: bound-state energy, harmonics, SQUID coefficients.

The junction potential is parameterized directly by its channel transmissions;
"voltage control" enters only through those numbers. All energies are in
angular GHz (rad/ns), matching the rest of the library.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

_SERIES_MAX_TERMS = 200_000


@dataclass(frozen=True)
class JunctionSpec:
    """A voltage-controlled semiconductor junction.

    Parameters
    ----------
    gap:
        Superconducting gap Delta in angular GHz.
    transmissions:
        Channel transmission probabilities, each in [0, 1].
    m_max:
        Number of potential harmonics to compute.
    n_max:
        Initial truncation of the transmission power series; doubled
        automatically until the tail is negligible.
    """

    gap: float
    transmissions: tuple[float, ...]
    m_max: int = 8
    n_max: int = 200

    def __post_init__(self) -> None:
        object.__setattr__(self, "transmissions", tuple(float(t) for t in self.transmissions))
        if not (np.isfinite(self.gap) and self.gap > 0):
            raise ValueError("gap must be positive and finite")
        if not self.transmissions:
            raise ValueError("at least one transmission channel is required")
        if any(not 0.0 <= t <= 1.0 for t in self.transmissions):
            raise ValueError("transmissions must lie in [0, 1]")
        if self.m_max < 1:
            raise ValueError("m_max must be >= 1")
        if self.n_max < self.m_max:
            raise ValueError("n_max must be >= m_max")


@dataclass(frozen=True)
class SquidCoeffs:
    """Potential amplitudes of a two-junction SQUID at a given flux."""

    alpha: float
    beta: float
    epsilon: float

    def __post_init__(self) -> None:
        if not all(np.isfinite(v) for v in (self.alpha, self.beta, self.epsilon)):
            raise ValueError("SQUID coefficients must be finite")


@dataclass(frozen=True)
class HarmonicAmplitudes:
    """Harmonic amplitudes E_J1 ... E_Jm_max of one junction.

    ``method`` records whether the transmission power series converged or the
    quadrature projection was used instead (the series degrades as T -> 1).
    """

    values: np.ndarray
    method: str
    converged: bool

    def __getitem__(self, index: int) -> float:
        return float(self.values[index])

    def __len__(self) -> int:
        return len(self.values)


def abs_energy(junction: JunctionSpec, theta) -> np.ndarray | float:
    """Bound-state energy -Delta * sum_j sqrt(1 - T_j sin^2(theta/2))."""
    theta_arr = np.asarray(theta, dtype=np.float64)
    s2 = np.sin(theta_arr / 2.0) ** 2
    total = np.zeros_like(theta_arr)
    for t in junction.transmissions:
        total = total + np.sqrt(1.0 - t * s2)
    result = -junction.gap * total
    return result if result.ndim else float(result)


def _half_binomial(n_terms: int) -> np.ndarray:
    """binom(1/2, n) for n = 0 ... n_terms-1 via the stable recurrence."""
    coeffs = np.empty(n_terms, dtype=np.float64)
    coeffs[0] = 1.0
    for n in range(n_terms - 1):
        coeffs[n + 1] = coeffs[n] * (0.5 - n) / (n + 1)
    return coeffs


def _series_terms(m: int, n_hi: int) -> np.ndarray:
    """c_n = 2 binom(1/2, n) binom(2n, n-m) / 4^n for n = m ... n_hi.

    Uses a term-ratio recurrence; the naive product overflows float64 well
    before the series tail becomes negligible at large T.
    """
    half = _half_binomial(m + 1)
    terms = np.empty(n_hi - m + 1, dtype=np.float64)
    terms[0] = 2.0 * half[m] / 4.0**m
    for i, n in enumerate(range(m, n_hi)):
        ratio = -(2 * n - 1) * (2 * n + 1) / (4.0 * (n + 1 - m) * (n + 1 + m))
        terms[i + 1] = terms[i] * ratio
    return terms


def _series_amplitude(junction: JunctionSpec, m: int, rel_tol: float) -> tuple[float, bool]:
    """One E_Jm by the power series; returns (value, converged)."""
    n_hi = max(junction.n_max, m + 4)
    while True:
        coeffs = _series_terms(m, n_hi)
        n = np.arange(m, n_hi + 1)
        # binom(1/2, n) alternates as (-1)^(n-1), so (-1)^(n+1) c_n = |c_n|
        # and every retained term is positive ("positive-defined energies").
        channel_sum = np.zeros_like(coeffs)
        for t in junction.transmissions:
            if t > 0.0:
                channel_sum += t**n
        terms = np.abs(coeffs) * channel_sum
        total = float(terms.sum())
        tail = float(terms[-1])
        if total == 0.0:
            return 0.0, True
        if tail < rel_tol * total:
            return junction.gap * total, True
        if 2 * n_hi > _SERIES_MAX_TERMS:
            return junction.gap * total, False
        n_hi *= 2


def _quadrature_amplitudes(junction: JunctionSpec, order: int = 512) -> np.ndarray:
    """E_Jm by Gauss-Legendre projection of the bound-state energy onto cos(m theta).

    E_Jm = ((-1)^m / pi) * integral_{-pi}^{pi} eps(theta) cos(m theta) dtheta;
    the integrand is even, so one half-period with fixed nodes suffices. This
    is the fallback route for transmissions at or near 1, and the independent
    cross-check for the series.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    theta = 0.5 * np.pi * (nodes + 1.0)
    w = 0.5 * np.pi * weights
    eps = np.asarray(abs_energy(junction, theta))
    m = np.arange(1, junction.m_max + 1)[:, None]
    integrals = 2.0 * (np.cos(m * theta[None, :]) * eps[None, :] * w[None, :]).sum(axis=1)
    return (-1.0) ** m.ravel() / np.pi * integrals


def harmonic_amplitudes(
    junction: JunctionSpec, method: str = "auto", rel_tol: float = 1e-12
) -> HarmonicAmplitudes:
    """Harmonic amplitudes E_J1 ... E_Jm_max of the junction potential.

    ``method`` is one of 'auto', 'series', 'quadrature'. 'auto' runs the
    power series with automatic truncation doubling and falls back to the
    quadrature projection when the series tail stalls (transmissions near 1).
    With 'series', a stalled tail is reported via ``converged=False`` rather
    than raising.
    """
    if method not in ("auto", "series", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method == "quadrature":
        return HarmonicAmplitudes(_quadrature_amplitudes(junction), "quadrature", True)
    values = np.empty(junction.m_max, dtype=np.float64)
    converged = True
    for m in range(1, junction.m_max + 1):
        values[m - 1], ok = _series_amplitude(junction, m, rel_tol)
        converged = converged and ok
    if converged or method == "series":
        return HarmonicAmplitudes(values, "series", converged)
    return HarmonicAmplitudes(_quadrature_amplitudes(junction), "quadrature", True)


def reconstruct_potential(amplitudes: HarmonicAmplitudes, theta) -> np.ndarray:
    """Harmonic expansion -sum_m (-1)^(m-1) E_Jm cos(m theta), without offset."""
    theta_arr = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    m = np.arange(1, len(amplitudes) + 1)[:, None]
    signs = (-1.0) ** (m.ravel() - 1)
    series = -(signs[:, None] * amplitudes.values[:, None] * np.cos(m * theta_arr[None, :]))
    return series.sum(axis=0)


def squid_coeffs(j1: JunctionSpec, j2: JunctionSpec, flux: float) -> SquidCoeffs:
    """Potential amplitudes of the two-junction SQUID at external flux.

    alpha = E1_J1 + E2_J1 cos(flux), beta = E1_J2 + E2_J2 cos(2 flux),
    epsilon = E2_J2 sin(flux); epsilon vanishes at the half-quantum sweet
    spot flux = pi.
    """
    if j1.m_max < 2 or j2.m_max < 2:
        raise ValueError("squid coefficients need harmonics up to m = 2")
    amps1 = harmonic_amplitudes(j1)
    amps2 = harmonic_amplitudes(j2)
    if not (amps1.converged and amps2.converged):
        raise ConvergenceError("junction harmonic series did not converge")
    alpha = amps1[0] + amps2[0] * np.cos(flux)
    beta = amps1[1] + amps2[1] * np.cos(2.0 * flux)
    epsilon = amps2[1] * np.sin(flux)
    return SquidCoeffs(alpha, beta, epsilon)
