"""Adiabatic rotation schedules from the local gap/coupling bound.

The rotation rate at each angle is limited so that every per-unit-rate
transition amplitude out of the logical doublet stays a fixed factor below
the corresponding gap; integrating the inverse rate gives the minimal total
time and, inverted, the schedule phi(t).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.interpolate import PchipInterpolator

from .basis import ModeSpec, OperatorMatrix, parity_operator
from .errors import NumericalError
from .hamiltonians import CircuitParams, RotationFamily, circuit_family
from .spectral import DEGENERACY_RTOL, lowest_eigenpairs

#: headroom between the computed rate limit and the rate actually scheduled,
#: so the interpolated schedule satisfies the bound pointwise
_RATE_SAFETY = 0.99


@dataclass(frozen=True)
class ControlSchedule:
    """Sampled rotation angle phi(t) with a monotone-cubic interpolation rule.

    Gate schedules run from phi(0) = 0 to phi(T) = pi with a non-decreasing
    angle; :meth:`frozen` builds a constant-angle schedule for diagnostics.
    """

    times: np.ndarray
    angles: np.ndarray
    interpolation: str = "pchip"
    total_time: float = 0.0
    kind: str = "gate"

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=np.float64)
        angles = np.asarray(self.angles, dtype=np.float64)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "total_time", float(self.total_time))
        if self.interpolation != "pchip":
            raise ValueError(f"unsupported interpolation rule {self.interpolation!r}")
        if times.ndim != 1 or times.shape != angles.shape or len(times) < 2:
            raise ValueError("times and angles must be 1D arrays of equal length >= 2")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(angles))):
            raise ValueError("schedule samples must be finite")
        if times[0] != 0.0 or not np.all(np.diff(times) > 0):
            raise ValueError("times must increase strictly from 0")
        if np.any(np.diff(angles) < 0):
            raise ValueError("angle samples must be non-decreasing")
        if self.total_time != times[-1]:
            raise ValueError("total_time must equal the last sample time")
        if self.kind == "gate" and (angles[0] != 0.0 or angles[-1] != np.pi):
            raise ValueError("gate schedules must run from phi=0 to phi=pi exactly")
        spline = PchipInterpolator(times, angles, extrapolate=False)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_spline_rate", spline.derivative())

    @classmethod
    def frozen(cls, phi_angle: float, total_time: float, samples: int = 9) -> "ControlSchedule":
        """Constant-angle schedule (diagnostics: stationary-state evolution)."""
        times = np.linspace(0.0, total_time, samples)
        angles = np.full(samples, float(phi_angle))
        return cls(times, angles, "pchip", float(total_time), kind="frozen")

    def angle(self, t) -> np.ndarray | float:
        clipped = np.clip(t, 0.0, self.total_time)
        value = self._spline(clipped)
        return float(value) if np.isscalar(t) else value

    def rate(self, t) -> np.ndarray | float:
        clipped = np.clip(t, 0.0, self.total_time)
        value = self._spline_rate(clipped)
        return float(value) if np.isscalar(t) else value

    def to_table(self) -> str:
        """Two-column text table with the interpolation rule declared first."""
        lines = [f"# interpolation: {self.interpolation}", "time_ns,phi_rad"]
        lines += [f"{repr(float(t))},{repr(float(a))}" for t, a in zip(self.times, self.angles)]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as handle:
            handle.write(self.to_table())

    @classmethod
    def load(cls, path) -> "ControlSchedule":
        interpolation = None
        rows = []
        with open(path) as handle:
            for line in handle:
                line = line.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, value = line.lstrip("# ").partition(":")
                    if key.strip() == "interpolation":
                        interpolation = value.strip()
                    continue
                if line.startswith("time_ns"):
                    continue
                t_str, a_str = line.split(",")
                rows.append((float(t_str), float(a_str)))
        if interpolation is None:
            raise ValueError("schedule table missing interpolation header")
        times = np.array([r[0] for r in rows])
        angles = np.array([r[1] for r in rows])
        kind = "gate" if angles[0] == 0.0 and angles[-1] == np.pi else "frozen"
        return cls(times, angles, interpolation, float(times[-1]), kind=kind)


@dataclass(frozen=True)
class NonadiabaticElement:
    """One (n, m) transition channel at a fixed angle.

    ``coupling`` is the per-unit-rate amplitude |<n|dH/dphi|m>| / |w_n - w_m|;
    quasi-degenerate pairs are excluded from rate bounds and carry only their
    raw numerator.
    """

    n: int
    m: int
    gap: float
    numerator: float
    coupling: float | None
    excluded: bool


def _element_table(
    family: RotationFamily,
    parity,
    phi_angle: float,
    n_list: tuple[int, ...],
    m_count: int,
) -> tuple[list[NonadiabaticElement], np.ndarray]:
    k = max(max(n_list) + 1, m_count)
    result = lowest_eigenpairs(family.operator(phi_angle), k, parity=parity, phi_angle=phi_angle)
    dh = family.derivative_matrix(phi_angle)
    dh_states = np.array([dh @ s for s in result.states])
    scale = max(result.energies[min(2, k - 1)] - result.energies[0], 1e-12)
    residual = float(result.residuals.max()) if result.residuals is not None else 0.0
    rows: list[NonadiabaticElement] = []
    for n in n_list:
        for m in range(m_count):
            if m == n:
                continue
            gap = abs(result.energies[n] - result.energies[m])
            numerator = abs(np.vdot(result.states[n], dh_states[m]))
            if gap < DEGENERACY_RTOL * scale:
                rows.append(NonadiabaticElement(n, m, gap, numerator, None, True))
                continue
            if gap < 10.0 * residual:
                raise NumericalError(
                    f"gap |w_{n} - w_{m}| = {gap:.3e} at phi={phi_angle:.4f} is below "
                    "10x the solver residual; transition amplitude unreliable"
                )
            rows.append(NonadiabaticElement(n, m, gap, numerator, numerator / gap, False))
    return rows, result.energies


def nonadiabatic_elements(
    phi_angle: float,
    params: CircuitParams,
    modes: tuple[ModeSpec, ModeSpec],
    n_list: tuple[int, ...] = (0, 1),
    m_count: int = 12,
) -> list[NonadiabaticElement]:
    """Per-unit-rate transition amplitudes out of the states in ``n_list``."""
    family = circuit_family(params, modes)
    parity = parity_operator(modes)
    rows, _ = _element_table(family, parity, phi_angle, tuple(n_list), m_count)
    return rows


def _max_rate_at(
    family: RotationFamily,
    parity,
    phi_angle: float,
    bound_factor: float,
    m_count: int,
    rate_ceiling: float,
    dh_norm: float,
) -> float:
    rows, _ = _element_table(family, parity, phi_angle, (0, 1), m_count)
    rate = rate_ceiling
    for row in rows:
        if row.m in (0, 1):
            # internal doublet pair: excluded from the bound by design, but
            # the parity selection rule must make it irrelevant
            if row.numerator > 1e-8 * dh_norm:
                raise NumericalError(
                    f"doublet-internal matrix element {row.numerator:.3e} at "
                    f"phi={phi_angle:.4f} exceeds 1e-8 ||dH/dphi||; the "
                    "doublet exclusion is not justified here"
                )
            continue
        if row.excluded or row.coupling is None:
            continue
        if row.numerator <= 1e-14 * dh_norm:
            continue  # no constraint from a vanishing channel
        rate = min(rate, bound_factor * row.gap / row.coupling)
    if rate <= 0.0 or not np.isfinite(rate):
        raise NumericalError(f"gap closure on path at phi={phi_angle:.4f}")
    return rate


def optimize_schedule(
    params: CircuitParams,
    modes: tuple[ModeSpec, ModeSpec],
    bound_factor: float = 1e-3,
    phi_resolution: int = 129,
    m_count: int = 12,
    rate_ceiling: float = 100.0,
    rate_safety: float = _RATE_SAFETY,
    family: RotationFamily | None = None,
    parity=None,
) -> ControlSchedule:
    """Minimal-time rotation schedule satisfying the local adiabatic bound.

    At each grid angle the rate limit is min over n in {0, 1} and retained
    m >= 2 of bound_factor * |w_n - w_m| / G_nm; the schedule integrates
    t(phi) = int dphi / rate and inverts it with a monotone cubic. The small
    ``rate_safety`` margin keeps the interpolated rate below the bound
    between nodes. ``family``/``parity`` may be supplied directly (e.g. toy
    models); by default they are built from ``params`` and ``modes``.
    """
    if bound_factor <= 0:
        raise ValueError("bound_factor must be positive")
    if phi_resolution < 64:
        raise ValueError("phi_resolution must be >= 64")
    if family is None:
        family = circuit_family(params, modes)
    if parity is None:
        parity = parity_operator(modes)
    grid = np.linspace(0.0, np.pi, phi_resolution)
    dh_norm = float(np.abs(family.derivative_matrix(np.pi / 4)).sum(axis=1).max())
    limits = np.array(
        [
            _max_rate_at(family, parity, phi, bound_factor, m_count, rate_ceiling, dh_norm)
            for phi in grid
        ]
    )
    # conservative endpoint rule: every interval advances at the slower of its
    # two endpoint limits. Each secant of the monotone cubic then satisfies
    # the bound at both endpoints, and since the interpolant's nodal rate
    # lies between the adjacent secants, the bound holds pointwise on the
    # grid by construction (isolated rate spikes are simply never exploited).
    paired = rate_safety * np.minimum(limits[:-1], limits[1:])
    times = np.concatenate(([0.0], np.cumsum(np.diff(grid) / paired)))
    angles = grid.copy()
    angles[0], angles[-1] = 0.0, np.pi
    return ControlSchedule(times, angles, "pchip", float(times[-1]), kind="gate")


def adiabatic_frame_hamiltonian(
    phi_angle: float,
    phi_rate: float,
    params: CircuitParams,
    modes: tuple[ModeSpec, ModeSpec],
    k: int,
) -> OperatorMatrix:
    """k x k adiabatic-frame Hamiltonian at one angle and rate.

    Diagonal: instantaneous energies. Off-diagonal (n, m):
    -i * phi_rate * <psi_n|dH/dphi|psi_m> / (w_n - w_m); quasi-degenerate
    pairs are excluded (left zero), as in :func:`nonadiabatic_elements`.
    Diagnostic for leakage channels along a schedule.
    """
    family = circuit_family(params, modes)
    parity = parity_operator(modes)
    result = lowest_eigenpairs(family.operator(phi_angle), k, parity=parity, phi_angle=phi_angle)
    dh = family.derivative_matrix(phi_angle)
    dh_states = np.array([dh @ s for s in result.states])
    scale = max(result.energies[min(2, k - 1)] - result.energies[0], 1e-12)
    frame = np.diag(result.energies.astype(np.complex128))
    for n in range(k):
        for m in range(k):
            if n == m:
                continue
            gap = result.energies[n] - result.energies[m]
            if abs(gap) < DEGENERACY_RTOL * scale:
                continue
            element = np.vdot(result.states[n], dh_states[m])
            frame[n, m] = -1j * phi_rate * element / gap
    frame = 0.5 * (frame + frame.conj().T)
    return OperatorMatrix(sparse.csr_matrix(frame), True)
