import numpy as np
import pytest
from scipy.integrate import quad

from wellrot.junctions import (
    HarmonicAmplitudes,
    JunctionSpec,
    abs_energy,
    harmonic_amplitudes,
    reconstruct_potential,
    squid_coeffs,
)

# Fourier coefficients of -sqrt(1 - T sin^2(theta/2)) computed beforehand with
# adaptive quadrature, E_m = ((-1)^m/pi) int eps cos(m theta) dtheta, Delta = 1
QUADRATURE_EJM = {
    0.3: [0.0815891646343047, 0.0018121976535545, 0.0000805422371656,
          0.0000044754629544, 0.0000002785565498],
    0.7: [0.2236984005291208, 0.0161630956290728, 0.0023484314636675,
          0.0004274650812954, 0.0000872420218321],
    0.95: [0.3675255934201362, 0.0549225811235940, 0.0168722357427159,
           0.0065568203691200, 0.0028719102797433],
}


def single(t, m_max=5, n_max=200):
    return JunctionSpec(gap=1.0, transmissions=(t,), m_max=m_max, n_max=n_max)


class TestAbsEnergy:
    def test_full_transmission_endpoints(self):
        j = single(1.0)
        assert abs_energy(j, 0.0) == pytest.approx(-1.0)
        assert abs_energy(j, np.pi) == pytest.approx(0.0, abs=1e-12)

    def test_half_transmission(self):
        assert abs_energy(single(0.5), np.pi) == pytest.approx(-np.sqrt(0.5))

    def test_periodicity_and_channels(self):
        j = JunctionSpec(gap=2.0, transmissions=(0.4, 0.9))
        theta = np.linspace(-np.pi, np.pi, 64)
        assert np.allclose(abs_energy(j, theta), abs_energy(j, theta + 2 * np.pi))


class TestHarmonicAmplitudes:
    @pytest.mark.parametrize("t", [0.3, 0.7, 0.95])
    def test_series_matches_quadrature_oracle(self, t):
        amps = harmonic_amplitudes(single(t))
        assert amps.method == "series" and amps.converged
        for m, expected in enumerate(QUADRATURE_EJM[t]):
            assert amps[m] == pytest.approx(expected, rel=1e-8)

    def test_unit_transmission_closed_form(self):
        # E_Jm = 4 Delta / (pi (4 m^2 - 1)) for a fully open channel
        amps = harmonic_amplitudes(single(1.0))
        assert amps.method == "quadrature"
        for m in range(1, 6):
            assert amps[m - 1] == pytest.approx(4.0 / (np.pi * (4 * m * m - 1)), rel=1e-6)

    def test_small_transmission_leading_order(self):
        t = 1e-4
        amps = harmonic_amplitudes(single(t))
        assert amps[0] == pytest.approx(t / 4.0, rel=1e-3)

    def test_zero_transmission(self):
        amps = harmonic_amplitudes(single(0.0))
        assert np.all(amps.values == 0.0)

    def test_positive_definite(self):
        for t in (0.05, 0.5, 0.99):
            assert np.all(harmonic_amplitudes(single(t)).values > 0.0)

    def test_monotone_in_transmission(self):
        grid = np.linspace(0.05, 0.95, 10)
        values = np.array([harmonic_amplitudes(single(t)).values for t in grid])
        assert np.all(np.diff(values, axis=0) > 0.0)

    @pytest.mark.parametrize("t", [0.3, 0.7, 0.95])
    def test_reconstruction_against_exact_energy(self, t):
        # raise truncations until the harmonic series reproduces the energy
        junction = JunctionSpec(gap=1.0, transmissions=(t,), m_max=40, n_max=800)
        amps = harmonic_amplitudes(junction)
        theta = np.linspace(-np.pi, np.pi, 1024, endpoint=False)
        exact = np.asarray(abs_energy(junction, theta))
        offset = exact.mean()
        series = offset + reconstruct_potential(amps, theta)
        assert np.abs(exact - series).max() <= 1e-8

    def test_series_flag_when_stalled(self):
        # T = 1 decays too slowly for the power series; 'series' reports it
        amps = harmonic_amplitudes(single(1.0, n_max=100), method="series")
        assert not amps.converged

    def test_multi_channel_additivity(self):
        a = harmonic_amplitudes(single(0.3)).values
        b = harmonic_amplitudes(single(0.6)).values
        both = harmonic_amplitudes(
            JunctionSpec(gap=1.0, transmissions=(0.3, 0.6), m_max=5)
        ).values
        assert np.allclose(both, a + b, rtol=1e-12)


class TestSquidCoeffs:
    def setup_method(self):
        self.j1 = single(0.9, m_max=4)
        self.j2 = single(0.6, m_max=4)
        self.e1 = harmonic_amplitudes(self.j1)
        self.e2 = harmonic_amplitudes(self.j2)

    def test_sweet_spot(self):
        coeffs = squid_coeffs(self.j1, self.j2, np.pi)
        assert coeffs.alpha == pytest.approx(self.e1[0] - self.e2[0])
        assert coeffs.beta == pytest.approx(self.e1[1] + self.e2[1])
        assert coeffs.epsilon == pytest.approx(0.0, abs=1e-15)

    def test_identical_junctions_pure_double_well(self):
        coeffs = squid_coeffs(self.j1, self.j1, np.pi)
        assert coeffs.alpha == pytest.approx(0.0, abs=1e-14)

    def test_zero_flux(self):
        coeffs = squid_coeffs(self.j1, self.j2, 0.0)
        assert coeffs.alpha == pytest.approx(self.e1[0] + self.e2[0])
        assert coeffs.epsilon == 0.0


def count_periodic_minima(values: np.ndarray) -> int:
    left, right = np.roll(values, 1), np.roll(values, -1)
    return int(np.sum((values < left) & (values < right)))


class TestWellCriterion:
    def test_two_harmonic_truncation_iff(self):
        # for -alpha cos + beta cos2 alone, two minima iff |alpha| < 4 beta
        theta = np.linspace(-np.pi, np.pi, 4096, endpoint=False)
        beta = 1.0
        for alpha, expected in [(0.5, 2), (2.0, 2), (3.9, 2), (4.1, 1), (6.0, 1)]:
            u = -alpha * np.cos(theta) + beta * np.cos(2 * theta)
            assert count_periodic_minima(u) == expected

    def test_paper_criterion_direction_on_full_potential(self):
        # whenever the first-harmonic asymmetry is below the second-harmonic
        # sum the exact SQUID potential has two wells; the transition to a
        # single well happens once, at larger asymmetry
        theta = np.linspace(-np.pi, np.pi, 4096, endpoint=False)
        left = single(1.0, m_max=6)
        counts = []
        for t in np.linspace(0.1, 1.0, 19):
            right = single(t, m_max=6)
            u = np.asarray(abs_energy(left, theta)) + np.asarray(
                abs_energy(right, theta - np.pi)
            )
            coeffs = squid_coeffs(left, right, np.pi)
            n_minima = count_periodic_minima(u)
            counts.append(n_minima)
            if abs(coeffs.alpha) < abs(coeffs.beta):
                assert n_minima == 2
        assert counts[0] == 1 and counts[-1] == 2
        transitions = sum(
            1 for a, b in zip(counts, counts[1:]) if a != b
        )
        assert transitions == 1
