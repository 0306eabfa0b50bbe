"""Hamiltonians and potential surfaces of the two-qubit rotation circuit.

All builders take energies in angular GHz (rad/ns) and the rotation angle
``phi_angle`` in [0, pi]. The two compact modes are always ordered
(theta, phi); see :mod:`wellrot.basis`.

The gate Hamiltonian is the fixed linear combination

    H(phi) = K + cos^2(phi) * A + sin^2(phi) * B + sin(2 phi) * C,

which :class:`RotationFamily` exploits by caching the four constant blocks on
a shared sparsity pattern, so per-angle assembly during spectral sweeps and
time integration is a plain vector operation (no re-sparsification).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .basis import (
    ModeSpec,
    OperatorMatrix,
    fractional_cosine,
    harmonic_operator,
    identity,
    joint_harmonic,
    number_operator,
    two_mode_embed,
)
from .junctions import SquidCoeffs

_ANGLE_SLACK = 1e-9


@dataclass(frozen=True)
class CircuitParams:
    """Energies of the two-qubit + coupler circuit, in angular GHz.

    Defaults reproduce the bare gate circuit: identical modes, a pure
    cos(theta - phi) coupler of strength ``zeta`` (``alpha_g`` defaults to
    ``zeta``), and no capacitive coupling, second-harmonic coupler term or
    sine asymmetries.
    """

    alpha: float
    beta: float
    zeta: float
    E_C_theta: float
    E_C_phi: float
    g: float = 0.0
    alpha_g: float | None = None
    beta_g: float = 0.0
    epsilon_g: float = 0.0
    epsilon_theta: float = 0.0
    epsilon_phi: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha_g is None:
            object.__setattr__(self, "alpha_g", self.zeta)
        values = (
            self.alpha, self.beta, self.zeta, self.E_C_theta, self.E_C_phi,
            self.g, self.alpha_g, self.beta_g, self.epsilon_g,
            self.epsilon_theta, self.epsilon_phi,
        )
        if not all(np.isfinite(v) for v in values):
            raise ValueError("all circuit energies must be finite")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")


@dataclass(frozen=True)
class PotentialGrid:
    """Classical potential surface U(theta, phi) on a uniform angle grid."""

    theta_axis: np.ndarray
    phi_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.theta_axis) < 64 or len(self.phi_axis) < 64:
            raise ValueError("potential grids need >= 64 points per axis")
        if self.values.shape != (len(self.theta_axis), len(self.phi_axis)):
            raise ValueError("values shape must match the axes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("potential values must be finite")


def _check_angle(phi_angle: float) -> float:
    if not -_ANGLE_SLACK <= phi_angle <= np.pi + _ANGLE_SLACK:
        raise ValueError("rotation angle must lie in [0, pi]")
    return float(min(max(phi_angle, 0.0), np.pi))


def _kinetic(mode: ModeSpec) -> sparse.csr_matrix:
    n_op = number_operator(mode).matrix
    return (4.0 * mode.E_C * (n_op @ n_op)).tocsr()


def single_qubit_hamiltonian(mode: ModeSpec, coeffs: SquidCoeffs) -> OperatorMatrix:
    """4 E_C n^2 - alpha cos(theta) + beta cos(2 theta) + epsilon sin(theta)."""
    matrix = (
        _kinetic(mode)
        - coeffs.alpha * harmonic_operator(mode, 1, "cos").matrix
        + coeffs.beta * harmonic_operator(mode, 2, "cos").matrix
    )
    if coeffs.epsilon != 0.0:
        matrix = matrix + coeffs.epsilon * harmonic_operator(mode, 1, "sin").matrix
    return OperatorMatrix(matrix.tocsr(), True)


class RotationFamily:
    """Angle-parameterized Hamiltonian family K + c^2 A + s^2 B + sin(2 phi) C.

    The four blocks are stored as data vectors on one shared CSR pattern;
    :meth:`matrix` assembles H(phi) without touching the sparse structure.
    """

    def __init__(
        self,
        constant: sparse.spmatrix,
        cos2_block: sparse.spmatrix,
        sin2_block: sparse.spmatrix,
        rot_block: sparse.spmatrix,
    ) -> None:
        blocks = [sparse.csr_matrix(b) for b in (constant, cos2_block, sin2_block, rot_block)]
        pattern = sum(abs(b) for b in blocks).tocsr()
        pattern.sum_duplicates()
        pattern.eliminate_zeros()
        pattern.sort_indices()
        self._shape = pattern.shape
        self._indptr = pattern.indptr
        self._indices = pattern.indices
        dtype = np.result_type(*(b.dtype for b in blocks))
        self._data = np.zeros((4, pattern.nnz), dtype=dtype)
        for slot, block in enumerate(blocks):
            block.sum_duplicates()
            block.eliminate_zeros()  # explicit zeros would desync the alignment
            block.sort_indices()
            positions = self._locate(block)
            self._data[slot, positions] = block.data
        # pattern holds sum_b |b|; coefficients are <= 1 in magnitude, so its
        # max row sum bounds ||H(phi)||_inf for every angle
        self._norm_bound = float(pattern.sum(axis=1).max()) if pattern.nnz else 0.0

    def _locate(self, block: sparse.csr_matrix) -> np.ndarray:
        positions = np.empty(block.nnz, dtype=np.int64)
        for row in range(self._shape[0]):
            lo, hi = self._indptr[row], self._indptr[row + 1]
            blo, bhi = block.indptr[row], block.indptr[row + 1]
            positions[blo:bhi] = lo + np.searchsorted(
                self._indices[lo:hi], block.indices[blo:bhi]
            )
        return positions

    @property
    def dimension(self) -> int:
        return self._shape[0]

    def _combine(self, weights) -> sparse.csr_matrix:
        data = weights @ self._data
        # hand out fresh index arrays: callers may canonicalize in place
        return sparse.csr_matrix(
            (data, self._indices.copy(), self._indptr.copy()), shape=self._shape
        )

    @staticmethod
    def angle_weights(phi_angle: float) -> np.ndarray:
        """Block weights (1, cos^2, sin^2, sin 2phi) at one angle.

        Weights below 1e-15 are snapped to zero so that the exact
        trigonometric identities at multiples of pi/2 (e.g. H(pi) == H(0))
        hold exactly in floating point as well.
        """
        phi = _check_angle(phi_angle)
        c, s = np.cos(phi), np.sin(phi)
        weights = np.array([1.0, c * c, s * s, np.sin(2.0 * phi)])
        weights[np.abs(weights) < 1e-15] = 0.0
        return weights

    def weighted(self, weights: np.ndarray) -> sparse.csr_matrix:
        """Arbitrary linear combination of the four cached blocks."""
        return self._combine(np.asarray(weights, dtype=np.float64))

    def matrix(self, phi_angle: float) -> sparse.csr_matrix:
        """H(phi) as a raw CSR matrix (fast path for inner loops)."""
        return self._combine(self.angle_weights(phi_angle))

    def derivative_matrix(self, phi_angle: float) -> sparse.csr_matrix:
        """dH/dphi as a raw CSR matrix."""
        phi = _check_angle(phi_angle)
        s2 = np.sin(2.0 * phi)
        return self._combine(np.array([0.0, -s2, s2, 2.0 * np.cos(2.0 * phi)]))

    def operator(self, phi_angle: float) -> OperatorMatrix:
        return OperatorMatrix(self.matrix(phi_angle), True)

    def derivative(self, phi_angle: float) -> OperatorMatrix:
        return OperatorMatrix(self.derivative_matrix(phi_angle), True)

    def norm_bound(self) -> float:
        """Cheap upper bound on max ||H(phi)||_inf over the angle range."""
        return self._norm_bound


def _mode_blocks(params: CircuitParams, modes: tuple[ModeSpec, ModeSpec]):
    mode_theta, mode_phi = modes
    eye_theta = identity(mode_theta.dimension)
    eye_phi = identity(mode_phi.dimension)

    def embed_theta(op: OperatorMatrix) -> sparse.csr_matrix:
        return two_mode_embed(op, eye_phi).matrix

    def embed_phi(op: OperatorMatrix) -> sparse.csr_matrix:
        return two_mode_embed(eye_theta, op).matrix

    cos_theta = embed_theta(harmonic_operator(mode_theta, 1, "cos"))
    cos2_theta = embed_theta(harmonic_operator(mode_theta, 2, "cos"))
    cos_phi = embed_phi(harmonic_operator(mode_phi, 1, "cos"))
    cos2_phi = embed_phi(harmonic_operator(mode_phi, 2, "cos"))
    kinetic = embed_theta(OperatorMatrix(_kinetic(mode_theta), True)) + embed_phi(
        OperatorMatrix(_kinetic(mode_phi), True)
    )
    if params.epsilon_theta != 0.0:
        kinetic = kinetic + params.epsilon_theta * embed_theta(
            harmonic_operator(mode_theta, 1, "sin")
        )
    if params.epsilon_phi != 0.0:
        kinetic = kinetic + params.epsilon_phi * embed_phi(
            harmonic_operator(mode_phi, 1, "sin")
        )
    return kinetic, cos_theta, cos2_theta, cos_phi, cos2_phi


def circuit_family(params: CircuitParams, modes: tuple[ModeSpec, ModeSpec]) -> RotationFamily:
    """Family for the gate circuit with the cos(theta - phi) coupler."""
    kinetic, cos_theta, cos2_theta, cos_phi, cos2_phi = _mode_blocks(params, modes)
    block_a = params.beta * cos2_theta - params.alpha * cos_phi
    block_b = -params.alpha * cos_theta + params.beta * cos2_phi
    block_c = -0.5 * params.zeta * joint_harmonic(modes, 1, 1, "cos").matrix
    return RotationFamily(kinetic, block_a, block_b, block_c)


def sin_sin_family(
    params: CircuitParams, modes: tuple[ModeSpec, ModeSpec], alpha_term: str = "sin"
) -> RotationFamily:
    """Family for the idealized model with a sin(theta) sin(phi) coupler.

    ``alpha_term`` selects the operator multiplying -alpha sin^2(phi) on the
    theta mode: 'sin' is the printed form of the tunable potential; 'cos'
    restores the symmetry with the cos^2(phi) line and makes the model differ
    from the circuit family only in the coupling term.
    """
    if alpha_term not in ("sin", "cos"):
        raise ValueError(f"alpha_term must be 'sin' or 'cos', got {alpha_term!r}")
    mode_theta, mode_phi = modes
    kinetic, cos_theta, cos2_theta, cos_phi, cos2_phi = _mode_blocks(params, modes)
    theta_op = (
        two_mode_embed(
            harmonic_operator(mode_theta, 1, alpha_term), identity(mode_phi.dimension)
        ).matrix
        if alpha_term == "sin"
        else cos_theta
    )
    block_a = params.beta * cos2_theta - params.alpha * cos_phi
    block_b = -params.alpha * theta_op + params.beta * cos2_phi
    block_c = -0.5 * params.zeta * two_mode_embed(
        harmonic_operator(mode_theta, 1, "sin"), harmonic_operator(mode_phi, 1, "sin")
    ).matrix
    return RotationFamily(kinetic, block_a, block_b, block_c)


def circuit_hamiltonian(
    phi_angle: float, params: CircuitParams, modes: tuple[ModeSpec, ModeSpec]
) -> OperatorMatrix:
    """Gate Hamiltonian of the coupled circuit at rotation angle phi.

    4 E_C n_theta^2 + beta cos^2(phi) cos(2 theta) - alpha sin^2(phi) cos(theta)
    + 4 E_C n_phi^2 - alpha cos^2(phi) cos(phi_mode) + beta sin^2(phi) cos(2 phi_mode)
    - (zeta/2) sin(2 phi) cos(theta - phi_mode).
    """
    return circuit_family(params, modes).operator(phi_angle)


def ideal_sin_sin_hamiltonian(
    phi_angle: float,
    params: CircuitParams,
    modes: tuple[ModeSpec, ModeSpec],
    alpha_term: str = "sin",
) -> OperatorMatrix:
    """Idealized tunable-potential Hamiltonian with the sin*sin coupler."""
    return sin_sin_family(params, modes, alpha_term).operator(phi_angle)


def dH_dphi(
    phi_angle: float, params: CircuitParams, modes: tuple[ModeSpec, ModeSpec]
) -> OperatorMatrix:
    """Analytic angle derivative of :func:`circuit_hamiltonian`."""
    return circuit_family(params, modes).derivative(phi_angle)


def coupler_hamiltonian(
    params: CircuitParams, modes: tuple[ModeSpec, ModeSpec]
) -> OperatorMatrix:
    """Coupler Hamiltonian g n_theta n_phi - alpha_g cos(theta - phi)
    + beta_g cos(2 theta - 2 phi) + epsilon_g sin(theta - phi)."""
    mode_theta, mode_phi = modes
    dim = mode_theta.dimension * mode_phi.dimension
    dtype = np.complex128 if params.epsilon_g != 0.0 else np.float64
    matrix = sparse.csr_matrix((dim, dim), dtype=dtype)
    if params.g != 0.0:
        matrix = matrix + params.g * two_mode_embed(
            number_operator(mode_theta), number_operator(mode_phi)
        ).matrix
    if params.alpha_g != 0.0:
        matrix = matrix - params.alpha_g * joint_harmonic(modes, 1, 1, "cos").matrix
    if params.beta_g != 0.0:
        matrix = matrix + params.beta_g * joint_harmonic(modes, 2, 2, "cos").matrix
    if params.epsilon_g != 0.0:
        matrix = matrix + params.epsilon_g * joint_harmonic(modes, 1, 1, "sin").matrix
    return OperatorMatrix(matrix.tocsr(), True)


def minima_locations(phi_angle: float) -> np.ndarray:
    """The pair of global potential minima on the square rotation path.

    Returns an array [[theta+, phi+], [theta-, phi-]]; the two minima are
    related by inversion through the origin at every angle.
    """
    phi = _check_angle(phi_angle)
    if phi <= np.pi / 4:
        point = np.array([np.pi / 2, np.pi * np.tan(phi) / 2])
    elif phi < 3 * np.pi / 4:
        point = np.array([np.pi / np.tan(phi) / 2, np.pi / 2])
    else:
        point = np.array([-np.pi / 2, -np.pi * np.tan(phi) / 2])
    return np.array([point, -point])


def well_distance(phi_angle: float) -> float:
    """Distance d(phi) between the two global minima; pi <= d <= sqrt(2) pi."""
    phi = _check_angle(phi_angle)
    nearest = min(phi, abs(np.pi / 2 - phi), abs(np.pi - phi))
    return float(np.pi * abs(1.0 / np.cos(nearest)))


def squeeze_corrections(phi_angle: float, params: CircuitParams) -> tuple[float, float]:
    """Leading corrections (r, s) to the low-energy well amplitudes.

    These capture the squeezing induced by the cos(theta)cos(phi) part of the
    coupler along the rotation radius and its perpendicular.
    """
    phi = _check_angle(phi_angle)
    d = well_distance(phi)
    sin2 = np.sin(2.0 * phi)
    c, s = np.cos(phi), np.sin(phi)
    r = params.zeta * sin2 / (2.0 * params.beta) * (d / (2.0 * np.pi)) ** 2 * (c - s) ** 2
    s_corr = params.zeta * sin2 / (2.0 * params.alpha) * (np.pi / d) ** 2 * (c + s) ** 2
    return float(r), float(s_corr)


def low_energy_hamiltonian(
    phi_angle: float,
    params: CircuitParams,
    modes: tuple[ModeSpec, ModeSpec],
    corrected: bool = False,
) -> OperatorMatrix:
    """Effective low-energy model along the rotating coordinates.

    4 E_C n_R^2 + beta cos(2 pi R / d) + 4 E_C n_P^2 - alpha cos(d P / pi),
    with R the radial (logical) mode and P its perpendicular, both kept as
    ordinary compact modes: the non-integer wavenumbers 2 pi/d and d/pi are
    projected onto the charge basis (see :func:`wellrot.basis.fractional_cosine`).
    With ``corrected`` the well amplitudes carry the (1 - r), (1 + s)
    squeezing corrections.
    """
    phi = _check_angle(phi_angle)
    mode_r, mode_p = modes
    d = well_distance(phi)
    r, s_corr = squeeze_corrections(phi, params) if corrected else (0.0, 0.0)
    amp_r = params.beta * (1.0 - r)
    amp_p = params.alpha * (1.0 + s_corr)
    h_r = _kinetic(mode_r) + amp_r * fractional_cosine(mode_r, 2.0 * np.pi / d).matrix
    h_p = _kinetic(mode_p) - amp_p * fractional_cosine(mode_p, d / np.pi).matrix
    matrix = sparse.kron(h_r, sparse.identity(mode_p.dimension), format="csr") + sparse.kron(
        sparse.identity(mode_r.dimension), h_p, format="csr"
    )
    return OperatorMatrix(matrix.tocsr(), True)


def _angle_axes(n_points: int) -> tuple[np.ndarray, np.ndarray]:
    axis = np.linspace(-np.pi, np.pi, n_points, endpoint=False)
    return axis, axis


def classical_potential(
    model: str,
    phi_angle: float,
    params: CircuitParams,
    theta: np.ndarray,
    phi_coord: np.ndarray,
    alpha_term: str = "sin",
) -> np.ndarray:
    """Classical potential U(theta, phi_coord) of the named model.

    ``model`` is one of 'ideal', 'circuit', 'sinsin', 'lowenergy',
    'lowenergy-corrected'; theta varies along rows, phi_coord along columns.
    """
    phi = _check_angle(phi_angle)
    c, s = np.cos(phi), np.sin(phi)
    sin2 = np.sin(2.0 * phi)
    th = theta[:, None]
    ph = phi_coord[None, :]
    alpha, beta, zeta = params.alpha, params.beta, params.zeta
    if model == "ideal":
        return beta * np.cos(2.0 * (c * th + s * ph)) - alpha * np.cos(c * ph - s * th)
    if model == "circuit":
        values = (
            beta * c * c * np.cos(2 * th)
            - alpha * s * s * np.cos(th)
            - alpha * c * c * np.cos(ph)
            + beta * s * s * np.cos(2 * ph)
            - 0.5 * zeta * sin2 * np.cos(th - ph)
        )
        if params.epsilon_theta != 0.0:
            values = values + params.epsilon_theta * np.sin(th)
        if params.epsilon_phi != 0.0:
            values = values + params.epsilon_phi * np.sin(ph)
        return values
    if model == "sinsin":
        theta_part = np.sin(th) if alpha_term == "sin" else np.cos(th)
        return (
            beta * c * c * np.cos(2 * th)
            - alpha * c * c * np.cos(ph)
            + beta * s * s * np.cos(2 * ph)
            - alpha * s * s * theta_part
            - 0.5 * zeta * sin2 * np.sin(th) * np.sin(ph)
        )
    if model in ("lowenergy", "lowenergy-corrected"):
        d = well_distance(phi)
        r, s_corr = (
            squeeze_corrections(phi, params) if model == "lowenergy-corrected" else (0.0, 0.0)
        )
        radial = c * th + s * ph
        perp = c * ph - s * th
        return beta * (1.0 - r) * np.cos(2.0 * np.pi * radial / d) - alpha * (
            1.0 + s_corr
        ) * np.cos(d * perp / np.pi)
    raise ValueError(f"unknown potential model {model!r}")


def potential_grid(
    model: str,
    phi_angle: float,
    params: CircuitParams,
    n_points: int = 101,
    alpha_term: str = "sin",
) -> PotentialGrid:
    """Sample the named classical potential on a uniform [-pi, pi) grid."""
    theta_axis, phi_axis = _angle_axes(n_points)
    values = classical_potential(model, phi_angle, params, theta_axis, phi_axis, alpha_term)
    return PotentialGrid(theta_axis, phi_axis, values)


def rotated_potential_grid(
    phi_angle: float, params: CircuitParams, n_points: int = 101
) -> PotentialGrid:
    """Ideal beamsplitter-rotated double-well potential on the angle grid."""
    return potential_grid("ideal", phi_angle, params, n_points)
