"""Diagonalization, parity classification and noise matrix elements.

The workhorse is a shift-invert Lanczos solve targeting the bottom of the
spectrum; a dense solve on the same matrix serves as the cross-check oracle in
the test suite. Quasi-degenerate doublets are rotated into the parity
eigenbasis so that logical states and matrix elements are well defined even
when the splitting falls below the solver resolution.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .basis import ModeSpec, OperatorMatrix, harmonic_operator, identity, number_operator, parity_operator, two_mode_embed
from .errors import ConvergenceError
from .hamiltonians import CircuitParams, RotationFamily, circuit_family, sin_sin_family

#: relative gap below which two neighboring levels are treated as one doublet
DEGENERACY_RTOL = 1e-6
#: relative gap below which an ambiguous parity expectation still triggers
#: the doublet rotation (guards against solver mixing of barely-split pairs)
PARITY_RESCUE_RTOL = 1e-4
#: residual contract of the sparse solve, relative to ||H||
RESIDUAL_RTOL = 1e-8
_PARITY_PURE = 0.99


@dataclass
class SpectralResult:
    """Eigen-decomposition snapshot at one rotation angle.

    States are stored as rows in the charge basis, sorted by ascending
    energy, with a deterministic gauge (largest-magnitude amplitude real
    positive). ``parities`` holds +-1 where defined and NaN otherwise.
    """

    energies: np.ndarray
    states: np.ndarray
    parities: np.ndarray
    phi_angle: float
    crossing_flags: list[tuple[int, float]] = field(default_factory=list)
    residuals: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.energies)

    def state(self, index: int) -> np.ndarray:
        return self.states[index]

    def logical_pair(self) -> tuple[np.ndarray, np.ndarray]:
        """(even, odd) members of the bottom doublet."""
        pair = self.parities[:2]
        if not (np.isfinite(pair).all() and set(np.sign(pair)) == {1.0, -1.0}):
            raise ConvergenceError("bottom doublet is not parity-resolved")
        even = 0 if pair[0] > 0 else 1
        return self.states[even], self.states[1 - even]


@dataclass
class PhaseSpaceState:
    """Wavefunction on the 2D phase grid, normalized on the grid measure."""

    theta_axis: np.ndarray
    phi_axis: np.ndarray
    amplitudes: np.ndarray


def _gauge(states: np.ndarray) -> np.ndarray:
    for row in states:
        pivot = np.argmax(np.abs(row))
        scale = row[pivot]
        if scale != 0:
            row *= np.conj(scale) / abs(scale)
    return states


def _gershgorin_bounds(matrix: sparse.csr_matrix) -> tuple[float, float]:
    diag = matrix.diagonal().real
    radii = np.abs(matrix).sum(axis=1).A1 - np.abs(matrix.diagonal())
    return float((diag - radii).min()), float((diag + radii).max())


def _doublet_rotation(
    energies: np.ndarray, states: np.ndarray, parity: sparse.csr_matrix
) -> tuple[np.ndarray, np.ndarray]:
    """Resolve quasi-degenerate pairs into parity eigenstates.

    Returns (possibly re-ordered energies, parities) and mutates states in
    place. Pairing is greedy over consecutive levels.
    """
    k = len(energies)
    parities = np.full(k, np.nan)
    expect = np.array([np.vdot(s, parity @ s).real for s in states])
    scale = energies[2] - energies[0] if k >= 3 else max(energies[-1] - energies[0], 1.0)
    scale = max(scale, 1e-12)
    i = 0
    while i < k:
        pure = abs(expect[i]) > _PARITY_PURE
        if pure:
            parities[i] = np.sign(expect[i])
            i += 1
            continue
        if i + 1 < k:
            gap = energies[i + 1] - energies[i]
            ambiguous = abs(expect[i + 1]) <= _PARITY_PURE
            if gap < DEGENERACY_RTOL * scale or (
                gap < PARITY_RESCUE_RTOL * scale and ambiguous
            ):
                block = states[i : i + 2]
                little = block.conj() @ (parity @ block.T)
                little = 0.5 * (little + little.conj().T)
                vals, vecs = eigh(little)
                rotated = vecs.T.conj() @ block
                order = np.argsort(-vals)  # even (+1) first
                block[:] = rotated[order]
                _gauge(block)
                parities[i : i + 2] = np.round(vals[order])
                i += 2
                continue
        i += 1
    return energies, parities


def lowest_eigenpairs(
    H: OperatorMatrix,
    k: int,
    parity: OperatorMatrix | None = None,
    phi_angle: float = 0.0,
) -> SpectralResult:
    """k lowest eigenpairs of a Hermitian operator.

    Uses shift-invert Lanczos with the shift placed below the Gershgorin
    lower bound; raises :class:`ConvergenceError` when the residual contract
    ||H psi - w psi|| <= 1e-8 ||H|| is not met.
    """
    matrix = H.matrix if isinstance(H, OperatorMatrix) else sparse.csr_matrix(H)
    dim = matrix.shape[0]
    if not 0 < k <= dim:
        raise ValueError("need 0 < k <= dimension")
    lower, upper = _gershgorin_bounds(matrix)
    norm_bound = max(abs(lower), abs(upper), 1e-300)
    if k == dim or dim <= max(2 * k + 1, 32):
        vals, vecs = eigh(matrix.toarray())
        energies, states = vals[:k], vecs[:, :k].T
    else:
        sigma = lower - 0.01 * max(upper - lower, 1.0)
        v0 = np.full(dim, 1.0 / np.sqrt(dim))
        if matrix.dtype.kind == "c":
            v0 = v0.astype(np.complex128)
        try:
            vals, vecs = eigsh(matrix, k=k, sigma=sigma, which="LM", v0=v0, maxiter=5000)
        except ArpackNoConvergence as exc:
            raise ConvergenceError(f"sparse eigensolver did not converge: {exc}") from exc
        order = np.argsort(vals)
        energies, states = vals[order], vecs[:, order].T
    states = np.ascontiguousarray(states.astype(np.complex128))
    residuals = np.array(
        [np.linalg.norm(matrix @ s - e * s) for e, s in zip(energies, states)]
    )
    if np.any(residuals > RESIDUAL_RTOL * norm_bound):
        raise ConvergenceError(
            f"eigenpair residuals {residuals.max():.3e} exceed "
            f"{RESIDUAL_RTOL:.1e} * ||H|| = {RESIDUAL_RTOL * norm_bound:.3e}"
        )
    _gauge(states)
    if parity is not None:
        energies, parities = _doublet_rotation(energies, states, parity.matrix)
    else:
        parities = np.full(k, np.nan)
    return SpectralResult(
        energies, states, parities, float(phi_angle), residuals=residuals
    )


def _family_for(model: str, params: CircuitParams, modes) -> RotationFamily:
    if model == "circuit":
        return circuit_family(params, modes)
    if model == "sinsin":
        return sin_sin_family(params, modes, "sin")
    if model == "sinsin-cos":
        return sin_sin_family(params, modes, "cos")
    raise ValueError(f"unknown model {model!r}")


def spectrum_vs_angle(
    params: CircuitParams,
    phi_grid: np.ndarray,
    k: int,
    modes: tuple[ModeSpec, ModeSpec],
    model: str = "circuit",
) -> list[SpectralResult]:
    """Eigenpairs along an angle grid with a continuous gauge.

    Each state's phase is aligned to maximize overlap with the previous grid
    point; successive overlaps below 0.5 are recorded on the result's
    ``crossing_flags`` and warned about (likely level crossing).
    """
    grid = np.asarray(phi_grid, dtype=np.float64)
    if grid.size and (grid.min() < -1e-9 or grid.max() > np.pi + 1e-9):
        raise ValueError("phi grid must lie within [0, pi]")
    family = _family_for(model, params, modes)
    parity = parity_operator(modes)
    results: list[SpectralResult] = []
    for phi in grid:
        result = lowest_eigenpairs(family.operator(phi), k, parity=parity, phi_angle=phi)
        if results:
            prev = results[-1]
            for idx in range(k):
                overlap = np.vdot(prev.states[idx], result.states[idx])
                magnitude = abs(overlap)
                if magnitude < 0.5:
                    result.crossing_flags.append((idx, float(magnitude)))
                    warnings.warn(
                        f"possible level crossing for state {idx} at phi={phi:.4f} "
                        f"(successive overlap {magnitude:.3f})",
                        stacklevel=2,
                    )
                if magnitude > 0:
                    result.states[idx] *= np.conj(overlap) / magnitude
        results.append(result)
    return results


def _mode_operators(modes: tuple[ModeSpec, ModeSpec]) -> dict[str, dict[str, sparse.csr_matrix]]:
    mode_theta, mode_phi = modes
    eye_theta = identity(mode_theta.dimension)
    eye_phi = identity(mode_phi.dimension)
    return {
        "theta": {
            "sin": two_mode_embed(harmonic_operator(mode_theta, 1, "sin"), eye_phi).matrix,
            "cos": two_mode_embed(harmonic_operator(mode_theta, 1, "cos"), eye_phi).matrix,
            "n": two_mode_embed(number_operator(mode_theta), eye_phi).matrix,
        },
        "phi": {
            "sin": two_mode_embed(eye_theta, harmonic_operator(mode_phi, 1, "sin")).matrix,
            "cos": two_mode_embed(eye_theta, harmonic_operator(mode_phi, 1, "cos")).matrix,
            "n": two_mode_embed(eye_theta, number_operator(mode_phi)).matrix,
        },
    }


def noise_matrix_elements(
    result: SpectralResult, modes: tuple[ModeSpec, ModeSpec]
) -> dict[str, float]:
    """Logical-doublet matrix elements of the leading noise operators.

    For each mode x in {theta, phi}: |<0|sin x|1>|, |<0|n_x|1>|, |<0|cos x|1>|
    and the dephasing-type diagonal differences |<0|cos x|0> - <1|cos x|1>|,
    |<0|n_x|0> - <1|n_x|1>|, keyed e.g. ``sin_theta_01``, ``cos_theta_diag``.
    """
    if result.k < 2:
        raise ValueError("need at least two states")
    ops = _mode_operators(modes)
    s0, s1 = result.states[0], result.states[1]
    table: dict[str, float] = {}
    for mode_name, mode_ops in ops.items():
        for op_name in ("sin", "cos", "n"):
            op = mode_ops[op_name]
            table[f"{op_name}_{mode_name}_01"] = abs(np.vdot(s0, op @ s1))
            if op_name in ("cos", "n"):
                diff = np.vdot(s0, op @ s0) - np.vdot(s1, op @ s1)
                table[f"{op_name}_{mode_name}_diag"] = abs(diff)
    return table


def to_phase_space(
    state: np.ndarray, modes: tuple[ModeSpec, ModeSpec], n_points: int = 101
) -> PhaseSpaceState:
    """Fourier transform of a charge-basis state to the 2D phase grid.

    psi(theta, phi) = (2 pi)^-1 sum c_{n m} e^{i n theta} e^{i m phi},
    renormalized on the grid measure so that sum |psi|^2 dtheta dphi = 1.
    """
    mode_theta, mode_phi = modes
    coeffs = np.asarray(state, dtype=np.complex128).reshape(
        mode_theta.dimension, mode_phi.dimension
    )
    theta_axis = np.linspace(-np.pi, np.pi, n_points, endpoint=False)
    phi_axis = np.linspace(-np.pi, np.pi, n_points, endpoint=False)
    wave_theta = np.exp(1j * np.outer(theta_axis, mode_theta.charges))
    wave_phi = np.exp(1j * np.outer(mode_phi.charges, phi_axis))
    amplitudes = wave_theta @ coeffs @ wave_phi / (2.0 * np.pi)
    cell = (theta_axis[1] - theta_axis[0]) * (phi_axis[1] - phi_axis[0])
    norm = np.sqrt((np.abs(amplitudes) ** 2).sum() * cell)
    return PhaseSpaceState(theta_axis, phi_axis, amplitudes / norm)


@dataclass
class ModelComparisonRow:
    """Per-angle comparison of the circuit and idealized-coupler models."""

    phi_angle: float
    splitting: dict[str, float]
    gap02: dict[str, float]
    overlaps: dict[str, np.ndarray]
    results: dict[str, SpectralResult] | None = None


@dataclass
class ModelComparison:
    rows: list[ModelComparisonRow]
    asymmetry: dict[str, float]


def _quarter_asymmetry(
    family: RotationFamily, parity: OperatorMatrix, k: int
) -> float:
    """|gap02(pi/4) - gap02(3 pi/4)| normalized by their mean."""
    gaps = []
    for phi in (np.pi / 4, 3 * np.pi / 4):
        res = lowest_eigenpairs(family.operator(phi), k, parity=parity, phi_angle=phi)
        gaps.append(res.energies[2] - res.energies[0])
    return float(abs(gaps[0] - gaps[1]) / (0.5 * (gaps[0] + gaps[1])))


def compare_models(
    params: CircuitParams,
    phi_grid: np.ndarray,
    k: int,
    modes: tuple[ModeSpec, ModeSpec],
    keep_states: bool = False,
) -> ModelComparison:
    """Compare the circuit model against both sin*sin variants.

    Per grid angle: doublet splitting, the 0-2 gap, and the state overlaps
    |<psi_n^circuit | psi_n^model>| for n = 0, 1, 2. The summary holds the
    quarter-angle spectral asymmetry |gap02(pi/4) - gap02(3 pi/4)| per model;
    the cos(theta - phi) coupler is the only model expected to show one.
    """
    if k < 3:
        raise ValueError("model comparison tracks at least 3 states")
    parity = parity_operator(modes)
    families = {
        "circuit": circuit_family(params, modes),
        "sinsin": sin_sin_family(params, modes, "sin"),
        "sinsin-cos": sin_sin_family(params, modes, "cos"),
    }
    rows: list[ModelComparisonRow] = []
    for phi in np.asarray(phi_grid, dtype=np.float64):
        per_model = {
            name: lowest_eigenpairs(fam.operator(phi), k, parity=parity, phi_angle=phi)
            for name, fam in families.items()
        }
        base = per_model["circuit"]
        overlaps = {
            name: np.array(
                [abs(np.vdot(base.states[n], res.states[n])) for n in range(3)]
            )
            for name, res in per_model.items()
            if name != "circuit"
        }
        rows.append(
            ModelComparisonRow(
                phi_angle=float(phi),
                splitting={
                    name: float(res.energies[1] - res.energies[0])
                    for name, res in per_model.items()
                },
                gap02={
                    name: float(res.energies[2] - res.energies[0])
                    for name, res in per_model.items()
                },
                overlaps=overlaps,
                results=per_model if keep_states else None,
            )
        )
    asymmetry = {
        name: _quarter_asymmetry(fam, parity, k) for name, fam in families.items()
    }
    return ModelComparison(rows, asymmetry)
