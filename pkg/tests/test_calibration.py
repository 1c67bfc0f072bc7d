import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from greenghz.measure import token_ket
from greenghz.optics import sandwich_ket
from greenghz.tomography import calibrate_phase, cross_probabilities, default_grid
from greenghz.tomography.calibration import wrap_phase


def projection(psi, a, b):
    v = np.kron(token_ket(a), token_ket(b))
    return abs(np.vdot(v, psi)) ** 2


class TestForwardModel:
    def test_diagonal_projection_identity_grid(self):
        for phi in np.linspace(-math.pi, math.pi, 100):
            psi = sandwich_ket(phi).amplitudes
            lo, hi = 0.25 * (1 - math.cos(phi)), 0.25 * (1 + math.cos(phi))
            assert abs(projection(psi, "D", "A") - lo) < 1e-12
            assert abs(projection(psi, "A", "D") - lo) < 1e-12
            assert abs(projection(psi, "D", "D") - hi) < 1e-12
            assert abs(projection(psi, "A", "A") - hi) < 1e-12

    def test_cross_probabilities(self):
        for phi in np.linspace(0, 2 * math.pi, 100):
            p = cross_probabilities(phi)
            assert_allclose(p, [0.25 * (1 - math.cos(phi))] * 2, atol=1e-12)

    def test_endpoints(self):
        assert_allclose(cross_probabilities(0.0), [0, 0], atol=1e-15)
        assert_allclose(cross_probabilities(math.pi), [0.5, 0.5], atol=1e-15)

    def test_compensator_cancels(self):
        assert_allclose(cross_probabilities(1.3, -1.3), [0, 0], atol=1e-15)

    def test_visibility_floor(self):
        assert_allclose(cross_probabilities(0.0, 0.0, 0.8), [0.05, 0.05], atol=1e-15)


class TestCalibrate:
    def test_noiseless(self):
        grid = default_grid(64)
        res = calibrate_phase(1.0, grid, 1e4, exact=True)
        assert res.source_phase == pytest.approx(1.0, abs=1e-10)
        assert res.compensator_phase == pytest.approx(-1.0, abs=1e-10)
        spacing = grid[1] - grid[0]
        assert abs(wrap_phase(res.grid_compensator_phase + 1.0)) <= spacing / 2 + 1e-12
        assert abs(res.residual_phase) < spacing

    def test_sampled(self):
        errs = [abs(wrap_phase(calibrate_phase(2.5, default_grid(), 1e4, seed=s).source_phase - 2.5))
                for s in range(20)]
        assert max(errs) < 0.05

    def test_counts_shape(self):
        res = calibrate_phase(0.3, default_grid(16), 100, seed=1)
        assert res.counts.shape == (16, 2)

    def test_empty_grid(self):
        with pytest.raises(ValueError, match="empty"):
            calibrate_phase(0.3, [], 100)

    def test_bad_events(self):
        with pytest.raises(ValueError):
            calibrate_phase(0.3, default_grid(), 0)

    def test_wrap_phase(self):
        assert wrap_phase(math.pi) == math.pi
        assert wrap_phase(-math.pi) == math.pi
        assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
