import numpy as np
import pytest
from scipy import sparse
from scipy.integrate import quad

from wellrot.basis import (
    ModeSpec,
    OperatorMatrix,
    fractional_cosine,
    harmonic_operator,
    identity,
    joint_harmonic,
    number_operator,
    parity_operator,
    two_mode_embed,
)


def exact_zero(matrix) -> bool:
    dense = matrix.toarray() if sparse.issparse(matrix) else np.asarray(matrix)
    return np.all(dense == 0)


@pytest.fixture
def mode():
    return ModeSpec(n_cut=4, E_C=1.0)


@pytest.fixture
def pair(mode):
    return (mode, mode)


class TestModeSpec:
    def test_dimension_odd(self):
        for n_cut in (1, 3, 8):
            assert ModeSpec(n_cut=n_cut, E_C=0.5).dimension == 2 * n_cut + 1

    def test_invalid(self):
        with pytest.raises(ValueError):
            ModeSpec(n_cut=0, E_C=1.0)
        with pytest.raises(ValueError):
            ModeSpec(n_cut=2, E_C=-1.0)


class TestNumberOperator:
    def test_basic_diagonal(self):
        op = number_operator(ModeSpec(n_cut=1, E_C=1.0))
        assert np.allclose(op.toarray(), np.diag([-1.0, 0.0, 1.0]))

    def test_offset_shift(self):
        op = number_operator(ModeSpec(n_cut=1, E_C=1.0, n_offset=0.5))
        assert np.allclose(op.toarray(), np.diag([-1.5, -0.5, 0.5]))

    def test_parity_conjugation_flips_sign(self, pair):
        n_theta = two_mode_embed(number_operator(pair[0]), identity(pair[1].dimension))
        pi_op = parity_operator(pair).matrix
        conjugated = pi_op @ n_theta.matrix @ pi_op
        assert exact_zero(conjugated + n_theta.matrix)


class TestHarmonicOperator:
    def test_first_cosine_offdiagonal(self):
        op = harmonic_operator(ModeSpec(n_cut=1, E_C=1.0), 1, "cos")
        expected = 0.5 * (np.eye(3, k=1) + np.eye(3, k=-1))
        assert np.array_equal(op.toarray(), expected)

    def test_second_cosine_connects_n_pm_2(self):
        op = harmonic_operator(ModeSpec(n_cut=2, E_C=1.0), 2, "cos")
        expected = 0.5 * (np.eye(5, k=2) + np.eye(5, k=-2))
        assert np.array_equal(op.toarray(), expected)

    def test_sin_is_hermitian_imaginary(self, mode):
        op = harmonic_operator(mode, 1, "sin")
        dense = op.toarray()
        assert np.array_equal(dense, dense.conj().T)
        assert np.all(dense.real == 0)

    def test_pythagorean_identity_on_interior(self, mode):
        # cos^2 + sin^2 acts as identity on charge states away from the boundary
        total = (
            harmonic_operator(mode, 1, "cos").matrix @ harmonic_operator(mode, 1, "cos").matrix
            + harmonic_operator(mode, 1, "sin").matrix @ harmonic_operator(mode, 1, "sin").matrix
        )
        dense = total.toarray()
        interior = slice(1, mode.dimension - 1)
        assert np.allclose(dense[interior, interior], np.eye(mode.dimension - 2))

    def test_quadrature_matrix_elements(self, mode):
        # brute-force oracle: <n|cos(m theta)|n'> over one period
        for m in (1, 3):
            dense = harmonic_operator(mode, m, "cos").toarray()
            for i, n in enumerate(mode.charges):
                for j, n_prime in enumerate(mode.charges):
                    val, _ = quad(
                        lambda th: np.cos(m * th) * np.cos((n - n_prime) * th) / (2 * np.pi),
                        -np.pi,
                        np.pi,
                    )
                    assert dense[i, j] == pytest.approx(val, abs=1e-12)

    def test_cutoff_error(self, mode):
        with pytest.raises(ValueError, match="harmonic exceeds cutoff"):
            harmonic_operator(mode, 2 * mode.n_cut + 1, "cos")
        with pytest.raises(ValueError):
            harmonic_operator(mode, 0, "cos")


class TestTwoModeEmbed:
    def test_identity_embed(self, pair):
        eye = two_mode_embed(identity(pair[0].dimension), identity(pair[1].dimension))
        assert exact_zero(eye.matrix - sparse.identity(pair[0].dimension ** 2))

    def test_disjoint_supports_commute(self, pair):
        n_theta = two_mode_embed(number_operator(pair[0]), identity(pair[1].dimension))
        n_phi = two_mode_embed(identity(pair[0].dimension), number_operator(pair[1]))
        assert exact_zero(n_theta.matrix @ n_phi.matrix - n_phi.matrix @ n_theta.matrix)

    def test_mixed_product_property(self, pair):
        cos_t = harmonic_operator(pair[0], 1, "cos")
        cos_p = harmonic_operator(pair[1], 1, "cos")
        eye_t, eye_p = identity(pair[0].dimension), identity(pair[1].dimension)
        left = two_mode_embed(cos_t, eye_p).matrix @ two_mode_embed(eye_t, cos_p).matrix
        right = two_mode_embed(cos_t, cos_p).matrix
        assert exact_zero(left - right)


class TestJointHarmonic:
    def test_trig_expansion(self, pair):
        # cos(t - p) = cos t cos p + sin t sin p holds entrywise
        joint = joint_harmonic(pair, 1, 1, "cos").matrix
        cos_t = harmonic_operator(pair[0], 1, "cos")
        cos_p = harmonic_operator(pair[1], 1, "cos")
        sin_t = harmonic_operator(pair[0], 1, "sin")
        sin_p = harmonic_operator(pair[1], 1, "sin")
        expanded = (
            two_mode_embed(cos_t, cos_p).matrix + two_mode_embed(sin_t, sin_p).matrix
        )
        assert np.abs((joint - expanded).toarray()).max() < 1e-15

    def test_sin_odd_under_parity(self, pair):
        sin_joint = joint_harmonic(pair, 1, 1, "sin").matrix
        pi_op = parity_operator(pair).matrix
        assert exact_zero(pi_op @ sin_joint @ pi_op + sin_joint)

    def test_zero_harmonic_is_identity(self, pair):
        dim = pair[0].dimension * pair[1].dimension
        assert exact_zero(joint_harmonic(pair, 0, 0, "cos").matrix - sparse.identity(dim))
        assert joint_harmonic(pair, 0, 0, "sin").matrix.nnz == 0

    def test_out_of_range(self, pair):
        with pytest.raises(ValueError, match="harmonic exceeds cutoff"):
            joint_harmonic(pair, 2 * pair[0].n_cut + 1, 1, "cos")


class TestParityOperator:
    def test_involution(self, pair):
        pi_op = parity_operator(pair).matrix
        assert exact_zero(pi_op @ pi_op - sparse.identity(pair[0].dimension ** 2))

    def test_vacuum_fixed_point(self, pair):
        pi_op = parity_operator(pair).matrix
        dim = pair[0].dimension
        vacuum = np.zeros(dim * dim)
        vacuum[(dim * dim) // 2] = 1.0  # |n_theta=0, n_phi=0>
        assert np.array_equal(pi_op @ vacuum, vacuum)

    def test_offset_rejected(self):
        shifted = ModeSpec(n_cut=2, E_C=1.0, n_offset=0.3)
        with pytest.raises(ValueError, match="parity undefined"):
            parity_operator((shifted, shifted))


class TestOperatorMatrix:
    def test_hermitian_flag_enforced(self):
        bad = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        with pytest.raises(ValueError, match="hermitian"):
            OperatorMatrix(bad, True)

    def test_exact_hermiticity_of_builders(self, mode, pair):
        for op in (
            number_operator(mode),
            harmonic_operator(mode, 2, "cos"),
            harmonic_operator(mode, 2, "sin"),
            joint_harmonic(pair, 2, 1, "sin"),
            parity_operator(pair),
        ):
            assert exact_zero(op.matrix - op.matrix.getH())

    def test_construction_is_deterministic(self, pair):
        a = joint_harmonic(pair, 1, 1, "cos").matrix
        b = joint_harmonic(pair, 1, 1, "cos").matrix
        assert np.array_equal(a.data, b.data)
        assert np.array_equal(a.indices, b.indices)
        assert np.array_equal(a.indptr, b.indptr)


class TestFractionalCosine:
    def test_integer_reduces_to_harmonic(self, mode):
        frac = fractional_cosine(mode, 2.0)
        harm = harmonic_operator(mode, 2, "cos")
        assert exact_zero(frac.matrix - harm.matrix)
        assert exact_zero(fractional_cosine(mode, 0.0).matrix - sparse.identity(mode.dimension))

    def test_quadrature_oracle(self, mode):
        kappa = np.sqrt(2.0)
        dense = fractional_cosine(mode, kappa).toarray()
        for i, n in enumerate(mode.charges):
            for j, n_prime in enumerate(mode.charges):
                val, _ = quad(
                    lambda th: np.cos(kappa * th) * np.cos((n - n_prime) * th) / (2 * np.pi),
                    -np.pi,
                    np.pi,
                )
                assert dense[i, j] == pytest.approx(val, abs=1e-10)
