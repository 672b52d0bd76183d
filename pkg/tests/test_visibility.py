import numpy as np
import pytest

from massfringe.errors import RegimeError
from massfringe.measurement import Pattern
from massfringe.spectrum import MassSpectrum
from massfringe.visibility import (FringeModel, VisibilityReport,
                                   dephasing_phase, estimate_fringe_wavenumber,
                                   find_revival, fit_visibility,
                                   phasor_visibility, proper_time_visibility,
                                   short_time_visibility,
                                   thermal_decoherence_time,
                                   write_visibility_curve_csv)
from massfringe.worldline import ScreenWorldline

from conftest import G_ACC, K0, L

ALPHA = 10.0


def synthetic_pattern(V, phi, alpha=ALPHA, envelope_width=None, n=4001,
                      half=15.0):
    Z = np.linspace(-half, half, n)
    sigma = 1.0 + V * np.cos(alpha * Z + phi)
    if envelope_width is not None:
        sigma = sigma * np.exp(-Z ** 2 / (2 * envelope_width ** 2))
    return Pattern(Z, sigma, (1.0,), sigma[np.newaxis, :],
                   "shifted-pattern", "rest")


class TestFringeModel:
    def test_double_slit_alpha(self):
        fr = FringeModel.double_slit(K0, 0.5, -0.5, L)
        assert fr.wavenumber == pytest.approx(10.0)
        assert FringeModel.double_slit(200.0, 0.5, -0.5, 100.0).wavenumber == 2.0

    def test_validation(self):
        with pytest.raises(ValueError):
            FringeModel(visibility=1.5)
        with pytest.raises(ValueError):
            FringeModel(wavenumber=0.0)
        with pytest.raises(ValueError):
            VisibilityReport(1.2, 0.0, "fit")


class TestFitVisibility:
    @pytest.mark.parametrize("V,phi", [(1.0, 0.0), (0.5, 1.2), (0.15, -2.0),
                                       (0.0, 0.0)])
    def test_exact_model_recovered(self, V, phi):
        rep = fit_visibility(synthetic_pattern(V, phi), ALPHA)
        assert rep.visibility == pytest.approx(V, abs=1e-9)
        if V > 0:
            assert rep.phase == pytest.approx(phi, abs=1e-9)

    def test_gaussian_envelope_does_not_bias_fit(self):
        rep = fit_visibility(synthetic_pattern(0.6, 0.4, envelope_width=4.0),
                             ALPHA)
        assert rep.visibility == pytest.approx(0.6, abs=2e-3)
        assert rep.phase == pytest.approx(0.4, abs=1e-2)

    def test_z_reference_shifts_reported_phase(self):
        period = 2 * np.pi / ALPHA
        rep = fit_visibility(synthetic_pattern(0.5, 0.0), ALPHA,
                             z_reference=period / 4)
        assert rep.phase == pytest.approx(np.pi / 2, abs=1e-6)

    def test_flat_pattern_gives_zero(self):
        rep = fit_visibility(synthetic_pattern(0.0, 0.0), ALPHA)
        assert rep.visibility < 1e-9

    def test_too_few_fringes_rejected(self):
        with pytest.raises(ValueError, match="insufficient fringes"):
            fit_visibility(synthetic_pattern(0.5, 0.0, half=0.5, n=201), ALPHA)


class TestWavenumberEstimate:
    def test_recovers_alpha(self):
        p = synthetic_pattern(0.8, 0.3, envelope_width=5.0)
        assert estimate_fringe_wavenumber(p) == pytest.approx(ALPHA, rel=1e-3)

    def test_flat_pattern_rejected_or_far(self):
        Z = np.linspace(-5, 5, 401)
        flat = np.ones_like(Z)
        p = Pattern(Z, flat, (1.0,), flat[np.newaxis, :], "shifted-pattern",
                    "rest")
        with pytest.raises(ValueError):
            estimate_fringe_wavenumber(p)


class TestPhasor:
    def test_aligned_phases_give_unity(self):
        s = MassSpectrum.discrete([(92.0, 0.5), (108.0, 0.5)])
        rep = phasor_visibility(s, [0.7, 0.7])
        assert rep.visibility == pytest.approx(1.0, abs=1e-12)
        assert rep.phase == pytest.approx(0.7)

    def test_two_species_cosine(self):
        s = MassSpectrum.discrete([(92.0, 0.5), (108.0, 0.5)])
        for x in (0.3, 1.0, np.pi / 2):
            rep = phasor_visibility(s, [x, -x])
            assert rep.visibility == pytest.approx(abs(np.cos(x)), abs=1e-12)

    def test_gaussian_characteristic_function(self):
        # <exp(i lam (m - mbar))> = exp(-lam^2 sigma^2 / 2)
        s = MassSpectrum.gaussian(20000.0, 150.0)
        masses = np.array([n.mass for n in s.nodes()])
        for lam in (0.002, 0.005, 0.01):
            rep = phasor_visibility(s, lam * (masses - 20000.0))
            assert rep.visibility == pytest.approx(
                np.exp(-0.5 * (lam * 150.0) ** 2), abs=1e-10)

    def test_input_validation(self):
        s = MassSpectrum.discrete([(92.0, 0.5), (108.0, 0.5)])
        with pytest.raises(ValueError):
            phasor_visibility(s, [0.0])
        with pytest.raises(ValueError):
            phasor_visibility(s, [np.nan, 0.0])


class TestDephasingPhase:
    def test_rest_screen_no_dephasing(self, fringe):
        s = MassSpectrum.discrete([(19900.0, 0.5), (20100.0, 0.5)])
        _, phases = dephasing_phase(s, fringe, ScreenWorldline.rest(L), K0, L)
        assert np.allclose(phases, 0.0)

    def test_accelerating_screen_linear_in_mass_offset(self, fringe):
        s = MassSpectrum.discrete([(19900.0, 0.5), (20100.0, 0.5)])
        w = ScreenWorldline.uniform_acceleration(G_ACC, L)
        masses, phases = dephasing_phase(s, fringe, w, K0, L)
        t_mean = 20000.0 * L / K0
        expected = fringe.wavenumber * G_ACC * t_mean * (20000.0 - masses) * L / K0
        assert np.allclose(phases, expected, rtol=1e-12)
        # equivalently g * t_mean * dz * dm for the double-slit geometry
        assert phases[0] == pytest.approx(G_ACC * t_mean * 1.0 * 100.0, rel=1e-12)


class TestShortTime:
    def test_matches_quadratic_law(self, fringe):
        s = MassSpectrum.gaussian(8000.0, 141.4213562373095)
        w = ScreenWorldline.uniform_acceleration(G_ACC, L)
        t = 800.0
        rep = short_time_visibility(s, fringe, w, t)
        correction = 0.5 * (fringe.wavenumber * G_ACC * t * t *
                            141.4213562373095 / 8000.0) ** 2
        assert rep.visibility == pytest.approx(1.0 - correction, rel=1e-12)

    def test_expansion_refused_outside_regime(self, fringe):
        s = MassSpectrum.gaussian(20000.0, 141.4213562373095)
        w = ScreenWorldline.uniform_acceleration(G_ACC, L)
        with pytest.raises(RegimeError, match="phasor"):
            short_time_visibility(s, fringe, w, 2000.0)

    def test_error_shrinks_sixteenfold_under_halving(self, fringe):
        w = ScreenWorldline.uniform_acceleration(G_ACC, L)

        def gap(t):
            s = MassSpectrum.gaussian(10.0 * t, 141.4213562373095)
            masses = np.array([n.mass for n in s.nodes()])
            _, phases = dephasing_phase(s, fringe, w, K0, L)
            ph = phasor_visibility(s, phases).visibility
            st = short_time_visibility(s, fringe, w, t).visibility
            return abs(st - ph)

        ratio = gap(800.0) / gap(400.0)
        assert 12.0 < ratio < 20.0


class TestDecoherenceTime:
    def test_formula(self):
        assert thermal_decoherence_time(2, 100.0, G_ACC, 1.0) == pytest.approx(
            2000.0)
        assert thermal_decoherence_time(10, 100.0, G_ACC, 1.0) == pytest.approx(
            np.sqrt(2.0 / 10.0) / (100.0 * G_ACC))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            thermal_decoherence_time(0, 100.0, G_ACC, 1.0)
        with pytest.raises(ValueError):
            thermal_decoherence_time(2, 100.0, G_ACC, 0.0)


class TestRevival:
    def setup_method(self):
        self.w = ScreenWorldline.uniform_acceleration(G_ACC, L)
        self.fringe = FringeModel.double_slit(K0, 0.5, -0.5, L)

    def test_symmetric_pair(self):
        delta = np.pi * 1e2
        s = MassSpectrum.discrete([(20000.0 - delta, 0.5),
                                   (20000.0 + delta, 0.5)])
        t_rev = find_revival(s, self.fringe, self.w, K0, L)
        assert t_rev == pytest.approx(np.pi / (G_ACC * delta * 1.0), rel=1e-9)

    def test_is_first_revival_by_brute_force(self):
        delta = np.pi * 1e2
        s = MassSpectrum.discrete([(20000.0 - delta, 0.5),
                                   (20000.0 + delta, 0.5)])
        t_rev = find_revival(s, self.fringe, self.w, K0, L)
        masses = np.array([n.mass for n in s.nodes()])
        rate = self.fringe.wavenumber * G_ACC * (20000.0 - masses) * L / K0
        # after the initial decay, no earlier time restores full visibility
        ts = np.linspace(0.05 * t_rev, 0.95 * t_rev, 20000)
        V = np.abs(np.mean(np.exp(1j * np.outer(ts, rate)), axis=1))
        assert V.max() < 0.99
        V_rev = abs(np.mean(np.exp(1j * t_rev * rate)))
        assert V_rev == pytest.approx(1.0, abs=1e-9)

    def test_commensurate_triple(self):
        d = 100.0
        s = MassSpectrum.discrete([(20000.0 - d, 0.25), (20000.0, 0.5),
                                   (20000.0 + 2 * d, 0.25)])
        t_rev = find_revival(s, self.fringe, self.w, K0, L)
        rate_unit = self.fringe.wavenumber * G_ACC * L / K0
        assert t_rev == pytest.approx(2 * np.pi / (rate_unit * d), rel=1e-9)

    def test_incommensurate_rejected(self):
        s = MassSpectrum.discrete([(20000.0, 0.4),
                                   (20000.0 + 100.0, 0.3),
                                   (20000.0 + 100.0 * np.sqrt(2), 0.3)])
        with pytest.raises(ValueError, match="no exact revival"):
            find_revival(s, self.fringe, self.w, K0, L)

    def test_single_mass_always_visible(self):
        s = MassSpectrum.discrete([(20000.0, 1.0)])
        assert find_revival(s, self.fringe, self.w, K0, L) == 0.0

    def test_continuous_spectrum_rejected(self):
        s = MassSpectrum.gaussian(20000.0, 100.0)
        with pytest.raises(ValueError, match="no exact revival"):
            find_revival(s, self.fringe, self.w, K0, L)

    def test_requires_accelerating_worldline(self):
        s = MassSpectrum.discrete([(19900.0, 0.5), (20100.0, 0.5)])
        with pytest.raises(ValueError, match="uniform-acceleration"):
            find_revival(s, self.fringe, ScreenWorldline.rest(L), K0, L)


class TestProperTimeVisibility:
    def test_identical_to_phasor_average(self):
        s = MassSpectrum.discrete([(19900.0, 0.5), (20100.0, 0.5)])
        dtau = 3e-3
        masses = np.array([n.mass for n in s.nodes()])
        direct = phasor_visibility(s, (s.mean_mass - masses) * dtau)
        rep = proper_time_visibility(s, dtau)
        assert rep.visibility == direct.visibility
        assert rep.phase == direct.phase
        assert rep.method == "proper-time"

    def test_rejects_non_finite(self):
        s = MassSpectrum.discrete([(19900.0, 0.5), (20100.0, 0.5)])
        with pytest.raises(ValueError):
            proper_time_visibility(s, np.inf)


class TestCurveCsv:
    def test_columns_and_nan_handling(self, tmp_path):
        rows = [{"t": 1.0, "V_fit": 0.9, "V_shorttime": None,
                 "V_phasor": 0.91, "phi": 0.0}]
        path = tmp_path / "curve.csv"
        write_visibility_curve_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,V_fit,V_shorttime,V_phasor,phi"
        assert lines[1].split(",")[2] == "nan"
