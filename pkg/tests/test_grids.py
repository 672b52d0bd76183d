import numpy as np
import pytest

from massfringe.errors import AliasingError, GridError
from massfringe.grids import (GridSpec, WavefunctionGrid, ensure_band_limited,
                              from_function, to_momentum, to_position)


def gaussian_state(n=1024, extent=40.0, center=0.0, width=1.0):
    spec = GridSpec(n, extent, center)
    return from_function("z", spec,
                         lambda z: np.exp(-((z - center) ** 2) / (2 * width ** 2)))


class TestGridSpec:
    @pytest.mark.parametrize("n", [0, 1, 3, 100, 1000])
    def test_rejects_non_power_of_two(self, n):
        with pytest.raises(GridError):
            GridSpec(n, 10.0)

    def test_rejects_non_positive_extent(self):
        with pytest.raises(GridError):
            GridSpec(64, 0.0)

    def test_coords_center_and_spacing(self):
        spec = GridSpec(8, 4.0, center=1.0)
        assert spec.spacing == 0.5
        c = spec.coords()
        assert c.shape == (8,)
        assert c[4] == pytest.approx(1.0)  # center sample at n // 2
        assert np.allclose(np.diff(c), 0.5)


class TestWavefunctionGrid:
    def test_axis_and_shape_validation(self):
        spec = GridSpec(8, 4.0)
        with pytest.raises(GridError):
            WavefunctionGrid("q", spec, np.zeros(8, dtype=complex))
        with pytest.raises(GridError):
            WavefunctionGrid("z", spec, np.zeros(7, dtype=complex))

    def test_normalized_and_norm(self):
        g = gaussian_state()
        assert g.norm_squared() == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(GridError):
            WavefunctionGrid("z", g.spec, np.zeros_like(g.values)).normalized()

    def test_centroid_and_width_of_gaussian_density(self):
        # amplitude width w corresponds to density RMS w / sqrt(2)
        g = gaussian_state(center=2.0, width=1.5)
        assert g.centroid() == pytest.approx(2.0, abs=1e-10)
        assert g.width() == pytest.approx(1.5 / np.sqrt(2), rel=1e-10)


class TestFourierPair:
    def test_roundtrip_identity(self):
        g = gaussian_state(center=1.25)
        back = to_position(to_momentum(g), center=g.spec.center)
        assert np.max(np.abs(back.values - g.values)) < 1e-13

    def test_norm_preserved_in_momentum_space(self):
        g = gaussian_state()
        f = to_momentum(g)
        assert f.norm_squared() == pytest.approx(1.0, abs=1e-12)

    def test_gaussian_transform_matches_closed_form(self):
        # psi = pi^(-1/4) exp(-z^2/2)  <->  f = pi^(-1/4) exp(-k^2/2)
        g = gaussian_state(width=1.0)
        f = to_momentum(g)
        k = f.coords()
        expected = np.pi ** -0.25 * np.exp(-0.5 * k ** 2)
        assert np.max(np.abs(f.values - expected)) < 1e-12

    def test_center_offset_is_a_pure_phase(self):
        g = gaussian_state(center=3.0)
        f = to_momentum(g)
        k = f.coords()
        expected = np.pi ** -0.25 * np.exp(-0.5 * k ** 2) * np.exp(-1j * k * 3.0)
        assert np.max(np.abs(f.values - expected)) < 1e-12

    def test_space_mismatch_raises(self):
        g = gaussian_state()
        with pytest.raises(GridError):
            to_position(g)
        with pytest.raises(GridError):
            to_momentum(to_momentum(g))


class TestBandLimitGuard:
    def test_well_resolved_state_passes(self):
        ensure_band_limited(gaussian_state())

    def test_underresolved_state_raises(self):
        # width 0.02 needs k ~ 50; a 64-point grid over 8 units caps at ~25
        spec = GridSpec(64, 8.0)
        g = from_function("z", spec, lambda z: np.exp(-z ** 2 / (2 * 0.02 ** 2)))
        with pytest.raises(AliasingError, match="aliasing"):
            ensure_band_limited(g)
