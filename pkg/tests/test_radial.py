import math

import numpy as np
import pytest

from phasekit import potentials as pot
from phasekit import radial
from phasekit.radial import Channel, NormConvention, SolveError, SolverConfig


ZERO = pot.square_well(0.0, 1.0, label="zero")


class TestChannel:
    def test_validation(self):
        with pytest.raises(ValueError):
            Channel(-1.0, 0.0)
        with pytest.raises(ValueError):
            Channel(1.0, -0.6)
        assert Channel(1.0, -0.5).ell == -0.5


class TestSolveRegular:
    def test_free_s_wave_is_sine(self):
        sol = radial.solve_regular(ZERO, Channel(2.0, 0.0))
        r = np.linspace(0.2, sol.r_max, 40)
        phi, dphi = sol.evaluate(r)
        np.testing.assert_allclose(phi, np.sin(2.0 * r) / 2.0, atol=1e-9)
        np.testing.assert_allclose(dphi, np.cos(2.0 * r), atol=1e-9)

    def test_free_p_wave_matches_bessel(self):
        from phasekit.specfun import riccati_pair
        k = 1.5
        sol = radial.solve_regular(ZERO, Channel(k, 1.0))
        r = np.linspace(0.3, sol.r_max, 25)
        phi, _ = sol.evaluate(r)
        np.testing.assert_allclose(phi, riccati_pair(1.0, k * r).u / k**2,
                                   rtol=1e-8, atol=1e-12)

    def test_square_well_interior_closed_form(self):
        # phi'' = (V - k^2) phi with V = -2: phi = sin(K r)/K, K^2 = k^2 + 2
        k = 1.0
        K = math.sqrt(k * k + 2.0)
        sol = radial.solve_regular(pot.square_well(2.0), Channel(k, 0.0))
        r = np.linspace(0.1, 0.99, 15)
        phi, dphi = sol.evaluate(r)
        np.testing.assert_allclose(phi, np.sin(K * r) / K, rtol=1e-9)
        np.testing.assert_allclose(dphi, np.cos(K * r), rtol=1e-9)

    def test_bessel_normalization_at_origin(self):
        # phi ~ r^{ell+1} / (2 ell + 1)!!
        sol = radial.solve_regular(pot.exponential(-1.0), Channel(1.0, 2.0))
        r = 1e-5
        phi, _ = sol.evaluate(np.array([r]))
        assert phi[0] == pytest.approx(r**3 / 15.0, rel=1e-4)
        assert sol.norm_convention is NormConvention.BESSEL_NORMALIZED

    def test_rescaled_linearity(self):
        sol = radial.solve_regular(pot.exponential(-3.0), Channel(1.0, 0.0))
        scaled = sol.rescaled(1e6)
        r = np.linspace(0.5, 2.0, 7)
        p0, d0 = sol.evaluate(r)
        p1, d1 = scaled.evaluate(r)
        np.testing.assert_allclose(p1, 1e6 * p0, rtol=1e-13)
        np.testing.assert_allclose(d1, 1e6 * d0, rtol=1e-13)

    def test_rejects_power_singular(self):
        with pytest.raises(SolveError):
            radial.solve_regular(pot.power_singular(1.0, 4.0), Channel(1.0, 0.0))

    def test_effective_strength_below_quarter_rejected(self):
        with pytest.raises(SolveError):
            radial.solve_regular(pot.inverse_square(-0.3), Channel(1.0, 0.0))

    def test_ell_minus_half_start(self):
        sol = radial.solve_regular(pot.barrier(1.0), Channel(1e-3, -0.5))
        assert np.all(np.isfinite(sol.phi))

    def test_zero_energy_solve(self):
        # k = 0 free: phi = r
        sol = radial.solve_regular(ZERO, Channel(0.0, 0.0))
        r = np.linspace(0.2, 1.0, 5)
        phi, _ = sol.evaluate(r)
        np.testing.assert_allclose(phi, r, rtol=1e-10)

    def test_as_table_shape(self):
        sol = radial.solve_regular(ZERO, Channel(1.0, 0.0))
        tab = sol.as_table()
        assert tab.shape == (len(sol.grid), 3)


class TestChooseRMax:
    def test_compact_stops_at_support(self):
        r_max, err = radial.choose_r_max(pot.square_well(2.0, 1.5), 1.0,
                                         SolverConfig())
        assert r_max == 1.5 and err == 0.0

    def test_explicit_override(self):
        cfg = SolverConfig(r_max=7.0)
        r_max, _ = radial.choose_r_max(pot.exponential(-1.0), 1.0, cfg)
        assert r_max == 7.0

    def test_exponential_tail_under_tolerance(self):
        cfg = SolverConfig(tail_tol=1e-9)
        r_max, err = radial.choose_r_max(pot.exponential(-3.0), 1.0, cfg)
        assert 3.0 * math.exp(-r_max) < 1e-9
        assert err < 1e-9


class TestSingular:
    def test_zero_energy_oracle_m4_closed_form(self):
        # for g/r^4 the zero-energy regular solution is prop. to r e^{-sqrt(g)/r}
        g = 2.0
        r = np.linspace(0.3, 3.0, 20)
        vals = radial.zero_energy_singular(g, 4.0, 0.0, r)
        ref = r * np.exp(-math.sqrt(g) / r)
        ratio = vals / ref
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)

    def test_zero_energy_log_scale_deep(self):
        out = radial.zero_energy_singular(1.0, 4.0, 0.0, 1e-3, log_scale=True)
        assert out == pytest.approx(-1000.0, rel=1e-2)  # dominated by -sqrt(g)/r

    def test_solve_singular_log_derivative_matches_oracle(self):
        # at k small and r inside the forbidden region, phi'/phi from the
        # solver should match the zero-energy closed form d/dr log(r e^{-sqrt g/r})
        g = 1.0
        sol = radial.solve_singular(pot.power_singular(g, 4.0),
                                    Channel(0.05, 0.0))
        r = sol.r_start
        phi, dphi = sol.evaluate(np.array([r * 1.001]))
        w = dphi[0] / phi[0]
        w_exact = 1.0 / r + math.sqrt(g) / r**2
        assert w == pytest.approx(w_exact, rel=2e-2)

    def test_solve_singular_requires_positive_k(self):
        with pytest.raises(SolveError):
            radial.solve_singular(pot.power_singular(1.0, 4.0), Channel(0.0, 0.0))

    def test_solve_singular_rejects_regular(self):
        with pytest.raises(SolveError):
            radial.solve_singular(pot.exponential(-1.0), Channel(1.0, 0.0))

    def test_inner_phase_negative_for_repulsive(self):
        sol = radial.solve_singular(pot.power_singular(1.0, 4.0),
                                    Channel(2.0, 0.0))
        assert sol.inner_phase < 0.0
        assert sol.norm_convention is NormConvention.WKB_START


class TestResidual:
    @pytest.mark.parametrize("V,k,ell", [
        (pot.exponential(-3.0), 1.0, 0.0),
        (pot.gaussian_well(-1.5), 2.0, 1.0),
        (pot.yukawa(1.0), 1.0, 0.0),
        (pot.inverse_square(2.0), 1.0, 0.0),
    ])
    def test_radial_equation_residual(self, V, k, ell):
        sol = radial.solve_regular(V, Channel(k, ell))
        h = 0.005
        r = np.linspace(max(sol.r_start * 4, 0.1), min(sol.r_max - 5 * h, 5.0), 30)
        offs = np.array([-2, -1, 0, 1, 2]) * h
        stencil = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
        phi_s, dphi_s = sol.evaluate((r[:, None] + offs).ravel())
        d1 = phi_s.reshape(-1, 5) @ stencil / h
        d2 = dphi_s.reshape(-1, 5) @ stencil / h
        phi, dphi = sol.evaluate(r)
        q = np.asarray(V.evaluator(r), dtype=float) \
            + ell * (ell + 1.0) / r**2 - k * k
        scale = np.abs(dphi) + np.abs(q * phi) + k * np.abs(phi)
        assert np.max(np.abs(d1 - dphi) / scale) < 1e-6
        assert np.max(np.abs(d2 - q * phi) / scale) < 1e-6
