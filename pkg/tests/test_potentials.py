import math

import numpy as np
import pytest

from phasekit import potentials as pot
from phasekit.potentials import OriginClass, TailClass


class TestFactories:
    def test_square_well_values(self):
        V = pot.square_well(2.0, 1.0)
        assert V(0.5) == -2.0
        assert V(1.0) == -2.0
        assert V(1.5) == 0.0
        assert V.support == 1.0
        assert V.tail_class is TailClass.COMPACT_SUPPORT

    def test_barrier_is_positive(self):
        V = pot.barrier(1.0)
        assert V(0.3) == 1.0
        with pytest.raises(ValueError):
            pot.barrier(-1.0)

    def test_exponential_sign_carried_by_amplitude(self):
        V = pot.exponential(-3.0, 2.0)
        assert V(0.0) == -3.0
        assert V(2.0) == pytest.approx(-3.0 / math.e)

    @pytest.mark.parametrize("g,m", [(0.0, 4.0), (-1.0, 4.0), (1.0, 2.0)])
    def test_power_singular_rejects_bad_params(self, g, m):
        with pytest.raises(ValueError):
            pot.power_singular(g, m)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5])
    def test_power_origin_rejects_alpha(self, alpha):
        with pytest.raises(ValueError):
            pot.power_origin(1.0, alpha)

    def test_power_origin_cutoff(self):
        V = pot.power_origin(1.0, 0.5, cutoff=1.0)
        assert V(0.25) == pytest.approx(0.25 ** -1.5)
        assert V(2.0) == 0.0

    def test_singular_rejects_r_zero(self):
        V = pot.inverse_square(2.0)
        with pytest.raises(ValueError):
            V(0.0)
        # regular potentials accept r = 0
        assert pot.exponential(-1.0)(0.0) == -1.0

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            pot.exponential(-1.0)(-0.1)

    def test_call_preserves_shape(self):
        V = pot.gaussian_well(-1.0)
        r = np.array([[0.5, 1.0], [1.5, 2.0]])
        assert V(r).shape == (2, 2)
        assert isinstance(V(0.5), float)

    def test_rescaled_scales_declared_params(self):
        V = pot.inverse_square(2.0).rescaled(3.0)
        assert V.lam == 6.0
        assert V(2.0) == pytest.approx(6.0 / 4.0)
        W = pot.power_singular(1.0, 4.0).rescaled(2.0)
        assert W.g == 2.0

    def test_regular_part_removes_inverse_square(self):
        base = pot.exponential(-1.0)
        V = pot.centrifugal_plus(2.0, base)
        r = np.array([0.5, 1.0, 2.0])
        np.testing.assert_allclose(V.regular_part(r), base(r), rtol=1e-12)

    def test_tabulated_interpolation(self):
        V = pot.tabulated([[0.0, -1.0], [1.0, -0.5], [2.0, 0.0]])
        assert V(0.5) == pytest.approx(-0.75)
        assert V(5.0) == 0.0
        assert V.support == 2.0
        with pytest.raises(ValueError):
            pot.tabulated([[0.0, 1.0]])


class TestFromSpec:
    def test_missing_family_names_field(self):
        with pytest.raises(ValueError, match="family"):
            pot.from_spec({"params": {"depth": 1.0}})

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown potential family"):
            pot.from_spec({"family": "nope"})

    def test_missing_param_named(self):
        with pytest.raises(ValueError, match="depth"):
            pot.from_spec({"family": "square_well", "params": {}})

    @pytest.mark.parametrize("doc,origin", [
        ({"family": "square_well", "params": {"depth": 2.0}},
         OriginClass.L1_AT_ORIGIN),
        ({"family": "yukawa", "params": {"strength": 1.0}}, OriginClass.BJK),
        ({"family": "inverse_square", "params": {"lam": 2.0}},
         OriginClass.INVERSE_SQUARE),
        ({"family": "power_singular", "params": {"g": 1.0, "m": 4.0}},
         OriginClass.POWER_SINGULAR),
    ])
    def test_families_classified(self, doc, origin):
        assert pot.from_spec(doc).origin_class is origin

    def test_tabulated_requires_points(self):
        with pytest.raises(ValueError, match="tabulated"):
            pot.from_spec({"family": "tabulated"})


class TestMoments:
    def test_yukawa_first_moment_exact(self):
        # int_0^inf r * (2 e^{-r} / r) dr = 2
        V = pot.yukawa(2.0, 1.0)
        rep = pot.moments(V)
        assert rep.bjk_moment.finite
        assert rep.bjk_moment.value == pytest.approx(2.0, rel=1e-7)

    def test_exponential_second_moment_tail(self):
        # int_1^inf r^2 e^{-r} dr = 5/e
        V = pot.exponential(1.0)
        rep = pot.moments(V, R=1.0)
        assert rep.second_moment_tail.value == pytest.approx(5.0 / math.e,
                                                             rel=1e-6)

    def test_inverse_square_divergences(self):
        rep = pot.moments(pot.inverse_square(1.0))
        assert not rep.bjk_moment.finite
        assert rep.bjk_moment.status == "divergent"
        assert set(rep.bjk_moment.divergent_at) == {"origin", "infinity"}

    def test_power_singular_origin_divergence(self):
        rep = pot.moments(pot.power_singular(1.0, 4.0))
        assert "origin" in rep.bjk_moment.divergent_at

    def test_compact_support_moments_converge(self):
        rep = pot.moments(pot.square_well(2.0))
        # int_0^1 r * 2 dr = 1
        assert rep.bjk_moment.value == pytest.approx(1.0, rel=1e-8)

    def test_rejects_nonpositive_endpoints(self):
        with pytest.raises(ValueError):
            pot.moments(pot.square_well(1.0), a=0.0)


class TestTailBound:
    def test_exponential_tail_exact(self):
        # (1/k) int_R^inf 3 e^{-r} dr = 3 e^{-R} / k
        V = pot.exponential(3.0)
        assert pot.tail_bound(V, 2.0, 4.0) == pytest.approx(
            1.5 * math.exp(-4.0), rel=1e-8)

    def test_compact_beyond_support_is_zero(self):
        assert pot.tail_bound(pot.square_well(2.0), 1.0, 1.0) == 0.0

    def test_inverse_square_tail_is_integrable(self):
        # (1/k) int_R^inf r^{-2} dr = 1/(k R)
        assert pot.tail_bound(pot.inverse_square(1.0), 2.0, 4.0) == \
            pytest.approx(1.0 / 8.0, rel=1e-8)

    def test_unbounded_tail_is_inf(self):
        slow = pot.Potential(evaluator=lambda r: 1.0 / (1.0 + r),
                             origin_class=pot.OriginClass.L1_AT_ORIGIN,
                             tail_class=pot.TailClass.INTEGRABLE_TAIL,
                             label="slow-decay")
        assert pot.tail_bound(slow, 1.0, 1.0) == math.inf

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            pot.tail_bound(pot.square_well(1.0), 0.0, 1.0)
