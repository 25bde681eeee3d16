"""Regular solutions of the radial equation on an adaptive grid.

The regular solution phi(k, r) vanishes at the origin like
r^{ell+1}/(2 ell + 1)!! and is integrated outward with a high-order
Runge-Kutta method (dense output retained for later quadrature).
Potentials with an inverse-square component are started with the
shifted power r^{p}, p(p-1) = lam + ell(ell+1); strongly singular
g/r^m potentials are handled by solve_singular, which carries the
wave through the classically forbidden region in log-derivative
(Riccati) form before switching to the linear equation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad, solve_ivp

from .potentials import OriginClass, Potential, TailClass, tail_bound
from .specfun import double_factorial_odd, riccati_pair


class NormConvention(Enum):
    UNIT_SLOPE = "unit_slope"
    BESSEL_NORMALIZED = "bessel_normalized"
    WKB_START = "wkb_start"


@dataclass(frozen=True)
class Channel:
    k: float
    ell: float = 0.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("wave number k must be >= 0")
        if self.ell < -0.5:
            raise ValueError("angular momentum ell must be >= -1/2")


@dataclass(frozen=True)
class SolverConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    tail_tol: float = 1e-9
    r_max_cap: float = 1e4
    r_max: float | None = None          # explicit override
    fp_tol: float = 1e-10               # fixed-point sup-norm tolerance
    max_iter: int = 200
    method: str = "DOP853"


class SolveError(RuntimeError):
    """Raised when outward integration cannot be completed."""


class _CompositeDense:
    """Dense output stitched from several solve_ivp legs plus a series head."""

    def __init__(self, legs, series: Callable, r_start: float, scale: float):
        self._legs = legs            # list of (t0, t1, OdeSolution)
        self._series = series        # r-array -> (phi, dphi), already scaled
        self.r_start = r_start
        self.scale = scale

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        phi = np.empty_like(r)
        dphi = np.empty_like(r)
        head = r < self.r_start
        if np.any(head):
            ph, dph = self._series(r[head])
            phi[head], dphi[head] = ph, dph
        for t0, t1, sol in self._legs:
            sel = (~head) & (r >= t0) & (r <= t1)
            if np.any(sel):
                y = sol(r[sel])
                phi[sel] = y[0] * self.scale
                dphi[sel] = y[1] * self.scale
                head |= sel
        if not np.all(head):
            raise ValueError("evaluation radius outside the solved range")
        return phi, dphi


@dataclass(frozen=True)
class RadialSolution:
    channel: Channel
    grid: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    norm_convention: NormConvention
    r_max: float
    dense: _CompositeDense = field(repr=False)
    r_start: float = 0.0
    tail_error: float = 0.0
    inner_phase: float = 0.0     # phase accumulated below r_start (singular solves)
    inner_error: float = 0.0

    def evaluate(self, r):
        """(phi, dphi) at arbitrary radii inside the solved range."""
        return self.dense(r)

    def rescaled(self, lam: float) -> "RadialSolution":
        """Solution multiplied by a constant factor (linearity check hook)."""
        dense = _CompositeDense(self.dense._legs,
                                lambda r: tuple(lam * np.asarray(x)
                                                for x in self.dense._series(r)),
                                self.dense.r_start, self.dense.scale * lam)
        return RadialSolution(self.channel, self.grid, self.phi * lam,
                              self.dphi * lam, NormConvention.UNIT_SLOPE,
                              self.r_max, dense, self.r_start,
                              self.tail_error, self.inner_phase, self.inner_error)

    def as_table(self) -> np.ndarray:
        """Columns (r, phi, dphi) for CSV export."""
        return np.column_stack([self.grid, self.phi, self.dphi])


# ---------------------------------------------------------------------------
# Truncation radius
# ---------------------------------------------------------------------------

def choose_r_max(V: Potential, k: float, cfg: SolverConfig) -> tuple[float, float]:
    """Truncation radius and the associated tail error estimate.

    Compact potentials stop at their support.  Integrable tails stop
    where the phase bound (1/k) int_R |V| drops under cfg.tail_tol.
    An inverse-square tail never satisfies that bound; it is truncated
    at k*R ~ 500 and later corrected analytically, with residual
    ~ lam / (k R)^3.
    """
    if cfg.r_max is not None:
        return cfg.r_max, tail_bound(V, max(k, 1e-30), cfg.r_max)
    support = V.support
    if math.isfinite(support):
        return support, 0.0
    k_eff = max(k, 1e-3)
    lam = V.lam
    R_is = (500.0 / k_eff) if lam != 0.0 else 0.0
    R = max(2.0, R_is)
    err = math.inf
    while R < cfg.r_max_cap:
        # bound on the non-inverse-square remainder only
        if lam != 0.0:
            rem = _abs_tail_integral(lambda r: V.regular_part(r), R) / k_eff
            err = rem + abs(lam) / (k_eff * R) ** 3
        else:
            rem = tail_bound(V, k_eff, R)
            err = rem
        if rem < cfg.tail_tol:
            break
        R *= 1.5
    return min(R, cfg.r_max_cap), err


def _abs_tail_integral(f: Callable, R: float) -> float:
    total, b0 = 0.0, R
    for _ in range(60):
        val, _ = quad(lambda r: abs(float(np.atleast_1d(f(np.atleast_1d(r)))[0])),
                      b0, 2 * b0, epsabs=0.0, epsrel=1e-9, limit=100)
        total += val
        if val <= 1e-13 * max(total, 1e-300):
            break
        b0 *= 2.0
    return total


# ---------------------------------------------------------------------------
# Series starts
# ---------------------------------------------------------------------------

def _series_start(V: Potential, ch: Channel) -> tuple[float, Callable]:
    """Start radius and a scaled series evaluator phi(r), phi'(r).

    The leading power is r^p with p(p-1) = lam + ell(ell+1); one or
    more correction terms are kept so the start error stays below
    ~1e-12 relative, enforced by shrinking the start radius.
    """
    k, ell = ch.k, ch.ell
    lam_tot = V.lam + ell * (ell + 1.0)
    if lam_tot < -0.25:
        raise SolveError(f"effective inverse-square strength {lam_tot} below -1/4")
    p = 0.5 + math.sqrt(lam_tot + 0.25)
    norm = double_factorial_odd(ell) if V.lam == 0.0 else 1.0

    if "alpha" in V.params and V.origin_class is OriginClass.BJK:
        # V ~ v0 r^{-(1+alpha)}: series in powers of r^{1-alpha}
        v0, alpha = float(V.params["v0"]), float(V.params["alpha"])
        beta = 1.0 - alpha
        n_terms = 9
        coeffs = [1.0]
        for n in range(1, n_terms):
            coeffs.append(v0 * coeffs[-1] / (n * beta * (2 * p - 1 + n * beta)))
        r0 = min(1e-4, (5e-3 / abs(coeffs[1])) ** (1.0 / beta))
        while abs(coeffs[1]) * r0**beta > 5e-3 or (k * r0) ** 2 > 1e-10:
            r0 *= 0.5
        c2 = -(k * k) / (4.0 * p + 2.0)

        def series(r):
            r = np.asarray(r, dtype=float)
            s = np.zeros_like(r)
            ds = np.zeros_like(r)
            for n, c in enumerate(coeffs):
                e = n * beta
                s += c * r**e
                ds += c * (p + e) * r**e
            s += c2 * r**2
            ds += c2 * (p + 2.0) * r**2
            return r**p / norm * s, r ** (p - 1.0) / norm * ds
        return r0, series

    if V.origin_class is OriginClass.BJK:
        # Coulomb-like s/r singularity; strength from a numerical probe
        s_c = float(np.atleast_1d(V.evaluator(np.atleast_1d(1e-8)))[0]) * 1e-8
        c1 = s_c / (2.0 * p)
        r0 = 1e-4
        q0 = float(np.atleast_1d(V.evaluator(np.atleast_1d(r0)))[0]) - s_c / r0 - k * k
        c2 = (q0 + c1 * s_c) / (4.0 * p + 2.0)
        while abs(c1) * r0 + abs(c2) * r0**2 > 1e-6:
            r0 *= 0.5

        def series(r):
            r = np.asarray(r, dtype=float)
            s = 1.0 + c1 * r + c2 * r**2
            ds = p + c1 * (p + 1.0) * r + c2 * (p + 2.0) * r**2
            return r**p / norm * s, r ** (p - 1.0) / norm * ds
        return r0, series

    # distinguished Bessel start at ell = -1/2 with k > 0 on a regular V
    if ell == -0.5 and k > 0.0 and V.lam == 0.0:
        r0 = min(1e-4, 1e-3 / k)
        Vr0 = float(np.atleast_1d(V.evaluator(np.atleast_1d(r0)))[0])
        while abs(Vr0) * r0**2 / 4.0 > 1e-9:
            r0 *= 0.5
            Vr0 = float(np.atleast_1d(V.evaluator(np.atleast_1d(r0)))[0])

        def series(r):
            r = np.asarray(r, dtype=float)
            pair = riccati_pair(-0.5, k * r)
            q = np.asarray(V.evaluator(r), dtype=float)
            corr = 1.0 + q * r**2 / 4.0
            dcorr = q * r / 2.0
            phi_f = pair.u / math.sqrt(k)
            dphi_f = math.sqrt(k) * pair.du
            return phi_f * corr, dphi_f * corr + phi_f * dcorr
        return r0, series

    # smooth (or inverse-square-plus-smooth) start: two series terms
    r0 = min(1e-4, 1e-3 / k) if k > 0 else 1e-4
    for _ in range(60):
        q = float(np.atleast_1d(V.regular_part(np.atleast_1d(r0)))[0]) - k * k
        c2 = q / (4.0 * p + 2.0)
        if abs(c2) * r0 * r0 <= 1e-8:
            break
        r0 *= 0.5
    c2 = (float(np.atleast_1d(V.regular_part(np.atleast_1d(r0)))[0]) - k * k) \
        / (4.0 * p + 2.0)

    def series(r):
        r = np.asarray(r, dtype=float)
        s = 1.0 + c2 * r**2
        ds = p + c2 * (p + 2.0) * r**2
        return r**p / norm * s, r ** (p - 1.0) / norm * ds
    return r0, series


# ---------------------------------------------------------------------------
# Outward integration
# ---------------------------------------------------------------------------

def _integrate_legs(rhs, r0, r_max, y0, breakpoints, cfg: SolverConfig):
    pts = sorted({r0, r_max, *[b for b in breakpoints if r0 < b < r_max]})
    legs, ts, ys = [], [], []
    y = np.asarray(y0, dtype=float)
    for a, b in zip(pts[:-1], pts[1:]):
        res = solve_ivp(rhs, (a, b), y, method=cfg.method, dense_output=True,
                        rtol=cfg.rtol, atol=cfg.atol)
        if not res.success:
            raise SolveError(f"integration failed at r = {res.t[-1]:.6g}: "
                             f"{res.message}")
        legs.append((a, b, res.sol))
        ts.append(res.t if not ts else res.t[1:])
        ys.append(res.y if not ys else res.y[:, 1:])
        y = res.y[:, -1]
    return legs, np.concatenate(ts), np.concatenate(ys, axis=1)


def solve_regular(V: Potential, ch: Channel,
                  cfg: SolverConfig = SolverConfig()) -> RadialSolution:
    """Regular solution for regular / inverse-square-composite potentials."""
    if V.origin_class is OriginClass.POWER_SINGULAR:
        raise SolveError("power-singular potential: use solve_singular")
    k, ell = ch.k, ch.ell
    lam = V.lam
    lam_tot = lam + ell * (ell + 1.0)
    r_max, tail_err = choose_r_max(V, k, cfg)
    r0, series = _series_start(V, ch)
    if r0 >= r_max:
        r0 = r_max / 16.0

    phi0, dphi0 = series(np.array([r0]))
    scale = float(dphi0[0]) if dphi0[0] != 0.0 else float(phi0[0])
    y0 = (float(phi0[0]) / scale, float(dphi0[0]) / scale)

    ev_reg = V.regular_part if lam != 0.0 else V.evaluator

    def rhs(r, y):
        q = lam_tot / (r * r) if lam_tot != 0.0 else 0.0
        w = float(np.atleast_1d(ev_reg(np.atleast_1d(r)))[0])
        return (y[1], (q + w - k * k) * y[0])

    breaks = [V.support] if math.isfinite(V.support) else []
    legs, t, yy = _integrate_legs(rhs, r0, r_max, y0, breaks, cfg)

    dense = _CompositeDense(legs, series, r0, scale)
    return RadialSolution(channel=ch, grid=t, phi=yy[0] * scale,
                          dphi=yy[1] * scale,
                          norm_convention=NormConvention.BESSEL_NORMALIZED,
                          r_max=r_max, dense=dense, r_start=r0,
                          tail_error=tail_err)


# ---------------------------------------------------------------------------
# Strongly singular potentials
# ---------------------------------------------------------------------------

def _wkb_logderiv(V: Potential, ell: float, k: float, r):
    """Semiclassical log-derivative sqrt(V_eff - k^2) + m/(4 r)."""
    r = np.asarray(r, dtype=float)
    veff = np.asarray(V.evaluator(r), dtype=float) + ell * (ell + 1.0) / r**2
    return np.sqrt(np.maximum(veff - k * k, 0.0)) + V.m / (4.0 * r)


def zero_energy_singular(g: float, m: float, ell: float, r, log_scale: bool = False):
    """Exact zero-energy solution sqrt(r) K_nu(2 sqrt(g)/(m-2) r^{-(m-2)/2}).

    Serves as an oracle for solve_singular.  With log_scale=True the
    natural log of the (positive) value is returned instead, which
    stays representable deep in the underflow region near r = 0.
    """
    from .specfun import bessel_K
    r_arr = np.asarray(r, dtype=float)
    nu = (2.0 * ell + 1.0) / (m - 2.0)
    x = 2.0 * math.sqrt(g) / (m - 2.0) * r_arr ** (-(m - 2.0) / 2.0)
    scaled = bessel_K(nu, x if np.ndim(r) else float(x), scaled=True)
    if log_scale:
        out = 0.5 * np.log(r_arr) + np.log(scaled) - x
    else:
        out = np.sqrt(r_arr) * scaled * np.exp(-x)
    return float(out) if np.ndim(r) == 0 else out


def solve_singular(V: Potential, ch: Channel,
                   cfg: SolverConfig = SolverConfig()) -> RadialSolution:
    """Regular solution for V ~ g/r^m (g>0, m>2), semiclassical start.

    The wave function falls like exp(-2 sqrt(g)/((m-2) r^{(m-2)/2})) at
    the origin, which annihilates explicit steppers.  Inside the
    strongly forbidden region the log-derivative w = phi'/phi obeys
    w' = V_eff - k^2 - w^2 and is integrated with a stiff method; the
    linear equation takes over once V drops to ~50 max(k^2, 1).  The
    phase accumulated below the switch radius is carried separately in
    inner_phase (computed from w alone, which is scale-free).
    """
    if V.origin_class is not OriginClass.POWER_SINGULAR:
        raise SolveError("solve_singular requires a power-singular potential")
    g, m = V.g, V.m
    k, ell = ch.k, ch.ell
    if k <= 0:
        raise SolveError("solve_singular requires k > 0 (use zero_energy_singular)")
    lam_tot = ell * (ell + 1.0)

    k2ref = max(k * k, 1.0)
    # start of the Riccati stage: deep enough that the WKB log-derivative
    # is accurate (action cap) but safely inside the forbidden region
    r_q = (2.0 * math.sqrt(g) / ((m - 2.0) * 300.0)) ** (2.0 / (m - 2.0))
    r_stiff = (g / (1e6 * k2ref)) ** (1.0 / m)
    r0 = max(r_q, r_stiff)
    r_sw = (g / (50.0 * k2ref)) ** (1.0 / m)
    if r_sw <= r0 * 1.5:
        r_sw = r0 * 2.0

    def veff(r):
        return float(np.atleast_1d(V.evaluator(np.atleast_1d(r)))[0]) \
            + (lam_tot / (r * r) if lam_tot else 0.0)

    def phase_density(r, w):
        # -k V / [(u_r' - u w)^2 + (v_r' - v w)^2]; exactly -kV/(k^2+w^2) at ell=0
        v_here = float(np.atleast_1d(V.evaluator(np.atleast_1d(r)))[0])
        if ell == 0.0:
            return -k * v_here / (k * k + w * w)
        pair = riccati_pair(ell, k * r)
        den = (k * pair.du - pair.u * w) ** 2 + (k * pair.dv - pair.v * w) ** 2
        return -k * v_here / den

    # phase below r0 from the analytic WKB log-derivative
    inner0, inner0_err = quad(
        lambda r: phase_density(r, float(_wkb_logderiv(V, ell, k, r)))
        if r > 0 else -k,
        0.0, r0, epsabs=1e-13, epsrel=1e-10, limit=200)

    w0 = float(_wkb_logderiv(V, ell, k, r0))

    def riccati_rhs(r, y):
        w = y[0]
        return (veff(r) - k * k - w * w, phase_density(r, w))

    res = solve_ivp(riccati_rhs, (r0, r_sw), (w0, 0.0), method="LSODA",
                    rtol=1e-10, atol=1e-12)
    if not res.success:
        raise SolveError(f"log-derivative stage failed: {res.message}")
    w_sw = res.y[0, -1]
    inner_phase = inner0 + res.y[1, -1]

    # linear stage outward from (phi, phi') = (1, w) at the switch radius
    r_max, tail_err = choose_r_max(V, k, cfg)

    def rhs(r, y):
        q = lam_tot / (r * r) if lam_tot else 0.0
        return (y[1], (q + veff_bare(r) - k * k) * y[0])

    def veff_bare(r):
        return float(np.atleast_1d(V.evaluator(np.atleast_1d(r)))[0])

    legs, t, yy = _integrate_legs(rhs, r_sw, r_max, (1.0, w_sw), [], cfg)

    def series(r):
        # below the switch radius the solution is only known through w;
        # report the WKB shape for completeness (not used in quadrature)
        r = np.asarray(r, dtype=float)
        w = _wkb_logderiv(V, ell, k, r)
        amp = np.exp(-np.minimum(
            2.0 * math.sqrt(g) / (m - 2.0) * (r ** (-(m - 2.0) / 2.0)
                                              - r_sw ** (-(m - 2.0) / 2.0)), 700.0))
        shape = (r / r_sw) ** (m / 4.0) * amp
        return shape, shape * w

    dense = _CompositeDense(legs, series, r_sw, 1.0)
    return RadialSolution(channel=ch, grid=t, phi=yy[0], dphi=yy[1],
                          norm_convention=NormConvention.WKB_START,
                          r_max=r_max, dense=dense, r_start=r_sw,
                          tail_error=tail_err, inner_phase=inner_phase,
                          inner_error=abs(inner0_err))
