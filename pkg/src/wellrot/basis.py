"""Charge-basis operators for compact phase modes.

Each mode is represented on the truncated charge basis |n>, n = -n_cut ... +n_cut,
where cos(m*theta) and sin(m*theta) act as charge shifts by +-m. Shift operators
annihilate states at the truncation boundary (no wraparound); convergence is
controlled by sweeping ``n_cut``. Two-mode operators always use the fixed
ordering (theta, phi) in the Kronecker product.

Operators are built with exactly symmetric sparse entries, so the Hermitian
flag is an exact statement (max |A - A^dagger| == 0), not a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse


@dataclass(frozen=True)
class ModeSpec:
    """One compact phase mode in the charge basis.

    Parameters
    ----------
    n_cut:
        Charge cutoff; the basis holds n = -n_cut ... +n_cut, so the mode
        dimension is 2*n_cut + 1 (always odd).
    E_C:
        Charging energy in angular GHz (rad/ns).
    n_offset:
        Dimensionless offset charge subtracted from the number operator.
    """

    n_cut: int
    E_C: float
    n_offset: float = 0.0

    def __post_init__(self) -> None:
        if self.n_cut < 1:
            raise ValueError("n_cut must be >= 1")
        if not (np.isfinite(self.E_C) and self.E_C > 0):
            raise ValueError("E_C must be positive and finite")
        if not np.isfinite(self.n_offset):
            raise ValueError("n_offset must be finite")

    @property
    def dimension(self) -> int:
        return 2 * self.n_cut + 1

    @property
    def charges(self) -> np.ndarray:
        """Charge quantum numbers n = -n_cut ... +n_cut."""
        return np.arange(-self.n_cut, self.n_cut + 1)


@dataclass(frozen=True)
class OperatorMatrix:
    """Sparse operator on a (tensor-product) charge basis.

    The matrix is stored in canonical CSR form (sorted indices, duplicates
    summed, explicit zeros dropped) so repeated constructions are
    bit-identical. Real symmetric operators keep a float64 dtype; operators
    with imaginary entries use complex128.
    """

    matrix: sparse.csr_matrix
    hermitian: bool

    def __post_init__(self) -> None:
        mat = sparse.csr_matrix(self.matrix)
        mat.sum_duplicates()
        mat.eliminate_zeros()
        mat.sort_indices()
        object.__setattr__(self, "matrix", mat)
        if mat.shape[0] != mat.shape[1]:
            raise ValueError("operator matrix must be square")
        if self.hermitian:
            defect = (mat - mat.getH()).tocsr()
            defect.eliminate_zeros()
            if defect.nnz != 0:
                raise ValueError("hermitian flag set but A != A^dagger exactly")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def expectation(self, state: np.ndarray) -> complex:
        return complex(np.vdot(state, self.matrix @ state))


def identity(dimension: int) -> OperatorMatrix:
    """Identity operator of the given dimension."""
    return OperatorMatrix(sparse.identity(dimension, dtype=np.float64, format="csr"), True)


def number_operator(mode: ModeSpec) -> OperatorMatrix:
    """Charge number operator n - n_offset (diagonal in the charge basis)."""
    values = mode.charges.astype(np.float64) - mode.n_offset
    return OperatorMatrix(sparse.diags(values, 0, format="csr"), True)


def _shift_power(dimension: int, m: int) -> sparse.csr_matrix:
    """(S_+)^m with S_+|n> = |n+1> and annihilation at the boundary."""
    if m == 0:
        return sparse.identity(dimension, dtype=np.float64, format="csr")
    ones = np.ones(dimension - m, dtype=np.float64)
    return sparse.diags(ones, -m, shape=(dimension, dimension), format="csr")


def harmonic_operator(mode: ModeSpec, m: int, kind: str) -> OperatorMatrix:
    """cos(m*theta) or sin(m*theta) on a single mode.

    cos(m*theta) = (S_+^m + S_-^m)/2 is real symmetric with entries 1/2 on the
    m-th off-diagonals; sin(m*theta) = (S_+^m - S_-^m)/(2i) is Hermitian with
    purely imaginary off-diagonal entries.
    """
    if kind not in ("cos", "sin"):
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    if not 1 <= m <= 2 * mode.n_cut:
        raise ValueError("harmonic exceeds cutoff")
    up = _shift_power(mode.dimension, m)
    down = up.T.tocsr()
    if kind == "cos":
        return OperatorMatrix((0.5 * (up + down)).tocsr(), True)
    return OperatorMatrix((-0.5j * up + 0.5j * down).tocsr(), True)


def two_mode_embed(op_theta: OperatorMatrix, op_phi: OperatorMatrix) -> OperatorMatrix:
    """Kronecker product with fixed mode ordering (theta first, phi second)."""
    product = sparse.kron(op_theta.matrix, op_phi.matrix, format="csr")
    return OperatorMatrix(product, op_theta.hermitian and op_phi.hermitian)


def joint_harmonic(
    modes: tuple[ModeSpec, ModeSpec], m_theta: int, m_phi: int, kind: str
) -> OperatorMatrix:
    """cos or sin of (m_theta*theta - m_phi*phi) on the two-mode basis.

    Built from the joint shift S_+(theta)^m_theta (x) S_-(phi)^m_phi, i.e. the
    charge-basis image of exp(i[m_theta*theta - m_phi*phi]).
    """
    if kind not in ("cos", "sin"):
        raise ValueError(f"kind must be 'cos' or 'sin', got {kind!r}")
    mode_theta, mode_phi = modes
    if not 0 <= m_theta <= 2 * mode_theta.n_cut or not 0 <= m_phi <= 2 * mode_phi.n_cut:
        raise ValueError("harmonic exceeds cutoff")
    joint = sparse.kron(
        _shift_power(mode_theta.dimension, m_theta),
        _shift_power(mode_phi.dimension, m_phi).T,
        format="csr",
    )
    if kind == "cos":
        return OperatorMatrix((0.5 * (joint + joint.T)).tocsr(), True)
    result = (-0.5j * joint + 0.5j * joint.T).tocsr()
    if m_theta == 0 and m_phi == 0:
        # sin(0) = 0; keep an explicit (empty) matrix of the right shape
        dim = mode_theta.dimension * mode_phi.dimension
        result = sparse.csr_matrix((dim, dim), dtype=np.complex128)
    return OperatorMatrix(result, True)


def parity_operator(modes: tuple[ModeSpec, ModeSpec]) -> OperatorMatrix:
    """Joint charge inversion |n_theta, n_phi> -> |-n_theta, -n_phi>.

    Defined only at zero offset charge, where it is an involution and a
    symmetry of the circuit Hamiltonians.
    """
    for mode in modes:
        if mode.n_offset != 0.0:
            raise ValueError("parity undefined at nonzero offset")
    reversals = [
        sparse.csr_matrix(np.eye(mode.dimension, dtype=np.float64)[::-1]) for mode in modes
    ]
    return OperatorMatrix(sparse.kron(reversals[0], reversals[1], format="csr"), True)


def fractional_cosine(mode: ModeSpec, wavenumber: float) -> OperatorMatrix:
    """cos(kappa*theta) for arbitrary real kappa >= 0.

    Integer wavenumbers reduce to :func:`harmonic_operator`. Non-integer
    wavenumbers are the 2*pi-periodized cosine projected onto the charge
    basis, <n|cos(kappa theta)|n'> evaluated in closed form from the
    quadrature integral over one period:

        c_k = (-1)^k kappa sin(kappa pi) / (pi (kappa^2 - k^2)),  k = n - n'.
    """
    kappa = float(wavenumber)
    if not np.isfinite(kappa) or kappa < 0:
        raise ValueError("wavenumber must be finite and non-negative")
    nearest = round(kappa)
    if abs(kappa - nearest) < 1e-12:
        if nearest == 0:
            return identity(mode.dimension)
        if nearest > 2 * mode.n_cut:
            raise ValueError("harmonic exceeds cutoff")
        return harmonic_operator(mode, nearest, "cos")
    dim = mode.dimension
    k = np.arange(dim, dtype=np.float64)
    coeffs = (-1.0) ** k * kappa * np.sin(kappa * np.pi) / (np.pi * (kappa**2 - k**2))
    diagonals = [np.full(dim - int(ki), coeffs[int(ki)]) for ki in k]
    offsets = list(range(dim))
    upper = sparse.diags(diagonals, offsets, shape=(dim, dim), format="csr")
    strict = sparse.triu(upper, k=1, format="csr")
    return OperatorMatrix((upper + strict.T).tocsr(), True)
