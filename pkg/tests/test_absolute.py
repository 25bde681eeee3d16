import math

import numpy as np
import pytest

from phasekit import absolute, phasefunc, potentials as pot, radial
from phasekit.radial import Channel


ZERO = pot.square_well(0.0, 1.0, label="zero")


class TestPhaseShift:
    @pytest.mark.parametrize("depth,k,expected", [
        (2.0, 0.5, 0.8611769776780285),
        (6.0, 1.0, 1.9399251795029450),
        (30.0, 2.0, 4.1180700196765665),
    ])
    def test_square_well_closed_form(self, depth, k, expected):
        V = pot.square_well(depth)
        sol = radial.solve_regular(V, Channel(k, 0.0))
        res = absolute.phase_shift(V, sol)
        assert res.delta == pytest.approx(expected, abs=1e-9)
        assert res.error_budget < 1e-7

    def test_normalization_invariance(self):
        V = pot.exponential(-3.0)
        sol = radial.solve_regular(V, Channel(1.0, 0.0))
        base = absolute.phase_shift(V, sol).delta
        for lam in (1e-6, 1e6):
            assert absolute.phase_shift(V, sol.rescaled(lam)).delta \
                == pytest.approx(base, abs=1e-10)

    def test_formula_tag(self):
        V = pot.exponential(-1.0)
        s0 = radial.solve_regular(V, Channel(1.0, 0.0))
        s1 = radial.solve_regular(V, Channel(1.0, 1.0))
        assert absolute.phase_shift(V, s0).formula is absolute.Formula.EQ20
        assert absolute.phase_shift(V, s1).formula is absolute.Formula.EQ62

    def test_requires_positive_k(self):
        V = pot.barrier(1.0)
        sol = radial.solve_regular(V, Channel(0.0, 0.0))
        with pytest.raises(ValueError):
            absolute.phase_shift(V, sol)

    def test_as_json_dict_keys(self):
        V = pot.barrier(1.0)
        sol = radial.solve_regular(V, Channel(1.0, 0.0))
        d = absolute.phase_shift(V, sol).as_json_dict()
        assert set(d) == {"k", "ell", "delta", "err_quadrature", "err_tail",
                          "formula"}


class TestVolterra:
    @pytest.mark.parametrize("V", [pot.exponential(-3.0), pot.square_well(2.0),
                                   pot.barrier(1.0)])
    @pytest.mark.parametrize("ell", [0.0, 1.0, 2.0])
    def test_agrees_with_wronskian_formula(self, V, ell):
        sol = radial.solve_regular(V, Channel(1.0, ell))
        a = absolute.phase_shift(V, sol).delta
        b = absolute.phase_shift_volterra(V, sol).delta
        assert b == pytest.approx(a, abs=1e-6)

    def test_rejects_rescaled_solution(self):
        V = pot.exponential(-1.0)
        sol = radial.solve_regular(V, Channel(1.0, 0.0))
        with pytest.raises(ValueError):
            absolute.phase_shift_volterra(V, sol.rescaled(2.0))

    def test_rejects_inverse_square(self):
        V = pot.inverse_square(2.0)
        sol = radial.solve_regular(V, Channel(1.0, 0.0))
        with pytest.raises(ValueError):
            absolute.phase_shift_volterra(V, sol)

    def test_ell_minus_half_channel(self):
        # distinguished start: both free solutions vanish at r = 0
        V = pot.barrier(1.0)
        sol = radial.solve_regular(V, Channel(1e-2, -0.5))
        res = absolute.phase_shift_volterra(V, sol)
        assert res.delta < 0.0
        assert math.isfinite(res.delta)


class TestCrossMethod:
    @pytest.mark.parametrize("k", [0.5, 2.0])
    def test_all_four_routes(self, k):
        from phasekit import iterate
        V = pot.exponential(-3.0)
        ch = Channel(k, 0.0)
        sol = radial.solve_regular(V, ch)
        vals = [absolute.phase_shift(V, sol).delta,
                absolute.phase_shift_volterra(V, sol).delta,
                phasefunc.solve_phase_ode(V, ch).total,
                iterate.picard_phase(V, ch).total]
        assert max(vals) - min(vals) < 1e-6

    def test_singular_routes_agree(self):
        # WKB-started quadrature vs cutoff-extrapolated phase equation
        V = pot.power_singular(1.0, 4.0)
        ch = Channel(5.0, 0.0)
        sol = radial.solve_singular(V, ch)
        a = absolute.phase_shift(V, sol).delta
        b = phasefunc.solve_phase_ode(V, ch).total
        assert a == pytest.approx(b, abs=1e-5)


class TestJostModulus:
    def test_free_is_unity(self):
        for ell in (0.0, 1.0, 2.0):
            sol = radial.solve_regular(ZERO, Channel(2.0, ell))
            assert absolute.jost_modulus(sol) == pytest.approx(1.0, abs=1e-8)

    def test_attractive_below_one_repulsive_above(self):
        s_att = radial.solve_regular(pot.exponential(-3.0), Channel(1.0, 0.0))
        s_rep = radial.solve_regular(pot.barrier(1.0), Channel(1.0, 0.0))
        assert absolute.jost_modulus(s_att) < 1.0
        assert absolute.jost_modulus(s_rep) > 1.0

    def test_rejects_rescaled(self):
        sol = radial.solve_regular(ZERO, Channel(1.0, 0.0))
        with pytest.raises(ValueError):
            absolute.jost_modulus(sol.rescaled(2.0))
