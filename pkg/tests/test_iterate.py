import math

import numpy as np
import pytest

from phasekit import absolute, iterate, phasefunc, potentials as pot, radial
from phasekit.radial import Channel, SolverConfig


class TestSineBoundConstant:
    def test_bound_property_holds_everywhere(self):
        C = iterate.sine_bound_constant()
        x = np.linspace(1e-9, 200.0, 10000)
        assert np.all(np.abs(np.sin(x)) <= C * x / (1.0 + x) + 1e-12)

    def test_is_the_supremum(self):
        C = iterate.sine_bound_constant()
        x = np.linspace(1e-6, 4 * math.pi, 200001)
        sup = np.max(np.abs(np.sin(x)) * (1 + x) / x)
        assert C == pytest.approx(sup, abs=1e-8)
        assert C == pytest.approx(1.7088668, abs=1e-6)


class TestPicard:
    def test_matches_ode_route(self):
        V = pot.exponential(-3.0)
        ch = Channel(2.0, 0.0)
        a = iterate.picard_phase(V, ch).total
        b = phasefunc.solve_phase_ode(V, ch).total
        assert a == pytest.approx(b, abs=1e-6)

    def test_iteration_count_drops_with_k(self):
        V = pot.exponential(-3.0)
        n_low = iterate.picard_phase(V, Channel(1.0, 0.0)).iterations
        n_high = iterate.picard_phase(V, Channel(50.0, 0.0)).iterations
        assert n_high <= n_low

    def test_fixed_point_residual_small(self):
        V = pot.gaussian_well(-2.0)
        prof = iterate.picard_phase(V, Channel(2.0, 0.0))
        assert iterate.picard_residual(prof, V) < 1e-7

    def test_yukawa_origin_handled(self):
        prof = iterate.picard_phase(pot.yukawa(-1.0), Channel(2.0, 0.0))
        assert math.isfinite(prof.total) and prof.total > 0.0

    def test_requires_positive_k(self):
        with pytest.raises(ValueError):
            iterate.picard_phase(pot.barrier(1.0), Channel(0.0, 0.0))

    def test_nonconvergence_raises(self):
        cfg = SolverConfig(max_iter=1)
        with pytest.raises(RuntimeError):
            iterate.picard_phase(pot.square_well(30.0), Channel(0.5, 0.0), cfg)


class TestRiccatiBound:
    def test_weak_potential_never_reaches_one(self):
        rb = iterate.riccati_bound(pot.exponential(0.1), Channel(1.0, 0.0))
        assert rb.r0 == math.inf
        assert np.all(np.isfinite(rb.omega))

    def test_strong_yukawa_finite_radius(self):
        rb = iterate.riccati_bound(pot.yukawa(8.0), Channel(0.5, 0.0))
        assert math.isfinite(rb.r0)
        assert np.all(np.diff(rb.I) >= -1e-15)  # cumulative of |V| >= 0


class TestMajorant:
    def test_dominates_actual_phase(self):
        V = pot.exponential(-2.0, 1.3)
        ch = Channel(2.0, 0.0)
        prof = iterate.picard_phase(V, ch)
        maj = iterate.majorant(V, ch)
        dom = np.interp(prof.grid, maj.grid, maj.Delta) - np.abs(prof.delta)
        assert np.min(dom) > -1e-12

    def test_iterates_monotone_nondecreasing(self):
        V = pot.gaussian_well(-1.0)
        ch = Channel(1.0, 0.0)
        totals = [iterate.majorant(V, ch, SolverConfig(max_iter=n)).total
                  for n in (1, 2, 3, 5)]
        assert totals == sorted(totals)

    def test_l1_closed_bound(self):
        V = pot.exponential(2.5, 0.7)
        for k in (0.5, 2.0, 8.0):
            maj = iterate.majorant(V, Channel(k, 0.0))
            assert maj.total <= iterate.majorant_bound_l1(V, k) + 1e-10

    def test_high_k_smaller_than_low_k(self):
        V = pot.exponential(-2.0)
        d1 = iterate.majorant(V, Channel(1.0, 0.0)).total
        d100 = iterate.majorant(V, Channel(100.0, 0.0)).total
        assert d100 < d1

    def test_bjk_two_stage_dominates(self):
        V = pot.yukawa(-2.0)
        ch = Channel(2.0, 0.0)
        prof = iterate.picard_phase(V, ch)
        maj = iterate.majorant(V, ch)
        dom = np.interp(prof.grid, maj.grid, maj.Delta) - np.abs(prof.delta)
        assert np.min(dom) > -1e-12

    def test_requires_positive_k(self):
        with pytest.raises(ValueError):
            iterate.majorant(pot.barrier(1.0), Channel(0.0, 0.0))


class TestRandomSweep:
    def test_dominance_sweep(self):
        rng = np.random.default_rng(1234)
        for _ in range(12):
            a = float(rng.uniform(-3.0, 3.0))
            s = float(rng.uniform(0.3, 2.0))
            V = pot.exponential(a, s)
            k = float(rng.choice([0.5, 2.0, 8.0]))
            ch = Channel(k, 0.0)
            prof = iterate.picard_phase(V, ch)
            maj = iterate.majorant(V, ch)
            dom = np.interp(prof.grid, maj.grid, maj.Delta) - np.abs(prof.delta)
            assert np.min(dom) > -1e-12, (a, s, k)
