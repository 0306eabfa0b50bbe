import numpy as np
import pytest
from scipy import sparse
from scipy.linalg import eigh

from wellrot.basis import ModeSpec, harmonic_operator, number_operator, parity_operator
from wellrot.errors import ConvergenceError
from wellrot.hamiltonians import CircuitParams, circuit_family, circuit_hamiltonian
from wellrot.spectral import (
    compare_models,
    lowest_eigenpairs,
    noise_matrix_elements,
    spectrum_vs_angle,
    to_phase_space,
)

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def modes():
    mode = ModeSpec(n_cut=8, E_C=0.1 * TWO_PI)
    return (mode, mode)


@pytest.fixture(scope="module")
def params(modes):
    ec = modes[0].E_C
    return CircuitParams(
        alpha=20 * TWO_PI, beta=20 * TWO_PI, zeta=20 * TWO_PI, E_C_theta=ec, E_C_phi=ec
    )


@pytest.fixture(scope="module")
def ground_result(params, modes):
    h = circuit_hamiltonian(0.0, params, modes)
    return lowest_eigenpairs(h, 6, parity=parity_operator(modes), phi_angle=0.0)


class TestLowestEigenpairs:
    def test_diagonal_matrix(self):
        h = sparse.diags([0.0, 1.0, 2.0]).tocsr()
        from wellrot.basis import OperatorMatrix

        result = lowest_eigenpairs(OperatorMatrix(h, True), 2)
        assert np.allclose(result.energies, [0.0, 1.0])

    def test_doublet_structure_at_fig4_point(self, ground_result):
        w = ground_result.energies
        assert (w[1] - w[0]) < 1e-2 * (w[2] - w[0])
        assert set(np.sign(ground_result.parities[:2])) == {1.0, -1.0}

    def test_dense_oracle_agreement(self, params, modes):
        h = circuit_hamiltonian(np.pi / 8, params, modes)
        sparse_result = lowest_eigenpairs(h, 6)
        dense_w = eigh(h.toarray(), eigvals_only=True)[:6]
        assert np.allclose(sparse_result.energies, dense_w, atol=1e-8 * np.abs(dense_w).max())

    def test_orthonormality_and_residuals(self, ground_result, params, modes):
        states = ground_result.states
        gram = states.conj() @ states.T
        assert np.abs(gram - np.eye(len(states))).max() < 1e-10
        h = circuit_hamiltonian(0.0, params, modes).matrix
        for energy, state in zip(ground_result.energies, ground_result.states):
            assert np.linalg.norm(h @ state - energy * state) < 1e-7

    def test_transmon_limit_negative_anharmonicity(self):
        # single cos(phi) well: level spacing decreases with index
        mode = ModeSpec(n_cut=8, E_C=0.1 * TWO_PI)
        h = (
            4 * mode.E_C * (number_operator(mode).matrix @ number_operator(mode).matrix)
            - 20 * TWO_PI * harmonic_operator(mode, 1, "cos").matrix
        )
        w = eigh(np.asarray(h.todense()), eigvals_only=True)
        assert (w[1] - w[0]) > (w[2] - w[1])

    def test_deterministic_gauge(self, params, modes):
        h = circuit_hamiltonian(np.pi / 8, params, modes)
        a = lowest_eigenpairs(h, 4, parity=parity_operator(modes))
        b = lowest_eigenpairs(h, 4, parity=parity_operator(modes))
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.energies, b.energies)

    def test_k_bounds(self, params, modes):
        h = circuit_hamiltonian(0.0, params, modes)
        with pytest.raises(ValueError):
            lowest_eigenpairs(h, 0)
        with pytest.raises(ValueError):
            lowest_eigenpairs(h, h.dimension + 1)

    def test_logical_pair_orders_even_first(self, ground_result):
        even, odd = ground_result.logical_pair()
        pi_op = parity_operator(
            (ModeSpec(n_cut=8, E_C=0.1 * TWO_PI), ModeSpec(n_cut=8, E_C=0.1 * TWO_PI))
        ).matrix
        assert np.vdot(even, pi_op @ even).real > 0.99
        assert np.vdot(odd, pi_op @ odd).real < -0.99


class TestSpectrumVsAngle:
    @pytest.fixture(scope="class")
    def sweep(self, params, modes):
        grid = np.linspace(0.0, np.pi, 33)
        return grid, spectrum_vs_angle(params, grid, 6, modes)

    @pytest.fixture(scope="class")
    def dense_sweep(self, params, modes):
        grid = np.linspace(0.0, np.pi, 129)
        return grid, spectrum_vs_angle(params, grid, 6, modes)

    def test_doublet_persists(self, sweep):
        _, results = sweep
        for res in results:
            w = res.energies
            assert (w[1] - w[0]) / (w[2] - w[0]) < 1e-2

    def test_gauge_continuity_away_from_crossings(self, dense_sweep):
        # the quasi-degenerate splittings cross zero along the path, so the
        # two members of a doublet may swap or rotate there (flagged); the
        # doublet subspaces themselves stay continuous once the grid resolves
        # the motion of the wells
        _, results = dense_sweep
        for prev, cur in zip(results, results[1:]):
            flagged = {idx for idx, _ in cur.crossing_flags}
            for n in range(6):
                overlap = np.vdot(prev.states[n], cur.states[n])
                if abs(overlap) > 0.5:
                    assert overlap.real > 0  # phase aligned
                # states of the two bottom doublets stay inside their own
                # doublet between grid points; the top tracked pair may trade
                # weight with untracked levels mid-rotation
                if n not in flagged and n < 4:
                    pair = n - (n % 2)
                    weight = np.linalg.norm(
                        prev.states[pair : pair + 2].conj() @ cur.states[n]
                    )
                    assert weight > 0.9
            for pair, floor in ((0, 0.98), (2, 0.95)):
                prev_block = prev.states[pair : pair + 2]
                cur_block = cur.states[pair : pair + 2]
                gram = prev_block.conj() @ cur_block.T
                weight = np.linalg.norm(gram) ** 2 / 2.0
                assert weight > floor

    def test_crossings_confined_to_doublets(self, sweep):
        # an index that loses overlap must sit in a quasi-degenerate pair
        _, results = sweep
        for res in results:
            w = res.energies
            for idx, _ in res.crossing_flags:
                partner = idx + 1 if idx % 2 == 0 else idx - 1
                assert abs(w[idx] - w[partner]) < 5e-2 * (w[2] - w[0])

    def test_mode_exchange_symmetry(self, sweep):
        grid, results = sweep
        # phi and pi/2 - phi give identical spectra for identical modes
        by_angle = {round(res.phi_angle, 12): res.energies for res in results}
        for phi in grid:
            mirror = round(np.pi / 2 - phi, 12)
            if phi <= np.pi / 2 and mirror in by_angle:
                assert np.allclose(
                    by_angle[round(phi, 12)], by_angle[mirror], atol=1e-7
                )

    def test_decoupled_energies_are_single_mode_sums(self, params, modes):
        results = spectrum_vs_angle(params, np.array([0.0]), 6, modes)
        mode_t, mode_p = modes
        n_t = number_operator(mode_t).matrix
        h_theta = (
            4 * mode_t.E_C * (n_t @ n_t) + params.beta * harmonic_operator(mode_t, 2, "cos").matrix
        )
        n_p = number_operator(mode_p).matrix
        h_phi = (
            4 * mode_p.E_C * (n_p @ n_p) - params.alpha * harmonic_operator(mode_p, 1, "cos").matrix
        )
        w_t = eigh(np.asarray(h_theta.todense()), eigvals_only=True)
        w_p = eigh(np.asarray(h_phi.todense()), eigvals_only=True)
        sums = np.sort((w_t[:, None] + w_p[None, :]).ravel())[:6]
        assert np.allclose(results[0].energies, sums, atol=1e-7)

    def test_grid_bounds_checked(self, params, modes):
        with pytest.raises(ValueError):
            spectrum_vs_angle(params, np.array([-0.1, 0.5]), 4, modes)


class TestNoiseMatrixElements:
    def test_logical_x_like_sine(self, ground_result, modes):
        table = noise_matrix_elements(ground_result, modes)
        assert table["sin_theta_01"] > 0.5

    def test_charge_suppressed(self, ground_result, modes):
        table = noise_matrix_elements(ground_result, modes)
        assert table["n_theta_01"] < 1e-3

    def test_cosine_parity_selection(self, ground_result, modes):
        # cos is parity even; the doublet states carry opposite parity
        table = noise_matrix_elements(ground_result, modes)
        assert table["cos_theta_01"] < 1e-10
        assert table["cos_phi_01"] < 1e-10

    def test_needs_two_states(self, params, modes):
        h = circuit_hamiltonian(0.0, params, modes)
        result = lowest_eigenpairs(h, 1)
        with pytest.raises(ValueError):
            noise_matrix_elements(result, modes)


class TestPhaseSpace:
    def test_zero_charge_state_is_flat(self, modes):
        mode_t, mode_p = modes
        state = np.zeros(mode_t.dimension * mode_p.dimension, dtype=complex)
        state[(mode_t.dimension * mode_p.dimension) // 2] = 1.0
        ps = to_phase_space(state, modes, n_points=64)
        assert np.abs(ps.amplitudes - ps.amplitudes[0, 0]).max() < 1e-12

    def test_parseval_normalization(self, ground_result, modes):
        ps = to_phase_space(ground_result.states[0], modes, n_points=101)
        cell = (ps.theta_axis[1] - ps.theta_axis[0]) * (ps.phi_axis[1] - ps.phi_axis[0])
        assert (np.abs(ps.amplitudes) ** 2).sum() * cell == pytest.approx(1.0, abs=1e-8)

    def test_ground_state_two_blobs(self, ground_result, modes):
        # probability concentrates near (+-pi/2, 0) at the start of the gate
        ps = to_phase_space(ground_result.states[0], modes, n_points=101)
        prob = np.abs(ps.amplitudes) ** 2
        idx = np.unravel_index(np.argmax(prob), prob.shape)
        assert abs(abs(ps.theta_axis[idx[0]]) - np.pi / 2) < 0.2
        assert abs(ps.phi_axis[idx[1]]) < 0.2
        # inversion through the origin on the endpoint-free grid maps index
        # k to (N - k) mod N; both wells carry the same weight
        mirrored = np.roll(prob[::-1, ::-1], (1, 1), axis=(0, 1))
        assert np.abs(prob - mirrored).max() < 1e-6


class TestCompareModels:
    @pytest.fixture(scope="class")
    def report(self, params, modes):
        grid = np.array([0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4, np.pi])
        return compare_models(params, grid, 3, modes)

    def test_identical_at_endpoints(self, report):
        for row in report.rows:
            if row.phi_angle in (0.0, np.pi):
                for name, overlaps in row.overlaps.items():
                    assert np.all(overlaps > 0.99), (row.phi_angle, name)

    def test_doublet_preserved_in_parity_symmetric_models(self, report):
        # the circuit coupler and the symmetric sin*sin variant commute with
        # the joint parity, so their doublets survive the whole rotation
        for row in report.rows:
            for name in ("circuit", "sinsin-cos"):
                assert row.splitting[name] < 1e-2 * row.gap02[name], (
                    row.phi_angle,
                    name,
                )

    def test_verbatim_sine_term_lifts_doublet(self, report):
        # the printed tunable potential carries -alpha sin^2(phi) sin(theta),
        # which is parity-odd and splits the doublet wide open mid-rotation;
        # this is the reason the cos variant exists
        mid = [r for r in report.rows if abs(r.phi_angle - np.pi / 4) < 1e-9][0]
        assert mid.splitting["sinsin"] > 0.1 * mid.gap02["sinsin"]

    def test_asymmetry_only_in_circuit_model(self, report):
        assert report.asymmetry["circuit"] > 1e-3
        assert report.asymmetry["sinsin"] < 1e-8
        assert report.asymmetry["sinsin-cos"] < 1e-8


class TestCutoffConvergence:
    def test_doubling_cutoff_leaves_spectrum(self):
        # the six tracked levels move by far less than 1e-6 GHz when the
        # charge cutoff doubles at the spectrum operating point
        energies = {}
        for n_cut in (15, 30):
            mode = ModeSpec(n_cut=n_cut, E_C=0.1 * TWO_PI)
            pair = (mode, mode)
            params = CircuitParams(
                alpha=20 * TWO_PI, beta=20 * TWO_PI, zeta=20 * TWO_PI,
                E_C_theta=mode.E_C, E_C_phi=mode.E_C,
            )
            h = circuit_hamiltonian(np.pi / 8, params, pair)
            energies[n_cut] = lowest_eigenpairs(h, 6).energies
        drift = np.abs(energies[15] - energies[30]).max() / TWO_PI
        assert drift < 1e-6
