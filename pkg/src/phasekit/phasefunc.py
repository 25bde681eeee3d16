"""Local phase function delta(k, r) and amplitude A(k, r).

Two independent routes to the same object: direct integration of the
first-order nonlinear phase equation

    delta' = -(1/k) V(r) [u_ell(kr) cos delta + v_ell(kr) sin delta]^2,
    delta(k, 0) = 0,

and quadrature of the closed integrand

    delta(k, r) = -k int_0^r V phi^2 / [(u' phi - u phi')^2
                                        + (v' phi - v phi')^2] dt

over a previously computed regular solution (the denominator reduces
to phi'^2 + k^2 phi^2 for ell = 0).  The phase is accumulated
continuously and never reduced mod pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad, solve_ivp

from .potentials import OriginClass, Potential
from .radial import Channel, RadialSolution, NormConvention, SolverConfig, choose_r_max
from .specfun import riccati_pair, riccati_trig


class PhaseMethod(Enum):
    ODE = "ode"
    INTEGRAL = "integral"
    PICARD = "picard"


@dataclass(frozen=True)
class PhaseProfile:
    channel: Channel
    grid: np.ndarray
    delta: np.ndarray
    total: float
    method: PhaseMethod
    amplitude: np.ndarray | None = None
    amplitude_inf: float = math.nan
    err_quad: float = 0.0
    err_tail: float = 0.0
    iterations: int = 0

    def as_table(self) -> np.ndarray:
        """Columns (r, delta[, amplitude]) for CSV export."""
        cols = [self.grid, self.delta]
        if self.amplitude is not None:
            cols.append(self.amplitude)
        return np.column_stack(cols)


# ---------------------------------------------------------------------------
# Free-pair evaluation helpers
# ---------------------------------------------------------------------------

def _free_pair(ell: float, z):
    """(u, v, du, dv) at order ell, trig fast path for ell in {0,1,2}."""
    if ell in (0.0, 1.0, 2.0):
        return riccati_trig(int(ell), z)
    pair = riccati_pair(ell, z)
    return pair.u, pair.v, pair.du, pair.dv


# ---------------------------------------------------------------------------
# Panel quadrature (Gauss-Legendre 15 with an embedded 7-point estimate)
# ---------------------------------------------------------------------------

_GL15 = leggauss(15)
_GL7 = leggauss(7)


def panel_integrals(f, edges: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-panel integrals of f over consecutive edge intervals.

    Returns (integrals, error_estimates); the error is the difference
    between the 15- and 7-point Gauss rules on each panel.
    """
    a, b = edges[:-1], edges[1:]
    h, c = 0.5 * (b - a), 0.5 * (b + a)
    out = []
    for x, w in (_GL15, _GL7):
        nodes = c[:, None] + h[:, None] * x
        vals = np.asarray(f(nodes.ravel())).reshape(nodes.shape)
        out.append(h * (vals @ w))
    return out[0], np.abs(out[0] - out[1])


def adaptive_panel_integrals(f, edges: np.ndarray, tol: float = 1e-11,
                             max_panels: int = 40000
                             ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Panel integrals with bisection of panels whose embedded error
    estimate dominates; resolves narrow spikes (e.g. the width ~k peak
    of the phase integrand near a zero of phi' at small k).

    Returns (refined_edges, per_panel_integrals, per_panel_errors).
    """
    edges = np.asarray(edges, dtype=float)
    vals, errs = panel_integrals(f, edges)
    for _ in range(60):
        total_err = float(np.sum(errs))
        if total_err <= tol or len(edges) >= max_panels:
            break
        bad = np.flatnonzero(errs > max(tol, total_err * 0.01) / len(errs))
        if len(bad) == 0:
            break
        room = max_panels - (len(edges) - 1)
        if len(bad) > room:  # split only the worst panels up to the cap
            worst = np.argsort(errs[bad])[::-1][:room]
            bad = np.sort(bad[worst])
        mids = 0.5 * (edges[bad] + edges[bad + 1])
        new_edges = np.sort(np.concatenate([edges, mids]))
        # recompute only the children of split panels
        keep = np.ones(len(new_edges) - 1, dtype=bool)
        pos = np.searchsorted(new_edges, edges[bad])
        keep[pos] = keep[pos + 1] = False
        new_vals = np.empty(len(new_edges) - 1)
        new_errs = np.empty(len(new_edges) - 1)
        old_keep = np.ones(len(edges) - 1, dtype=bool)
        old_keep[bad] = False
        new_vals[keep] = vals[old_keep]
        new_errs[keep] = errs[old_keep]
        child_edges = np.column_stack([new_edges[:-1][~keep],
                                       new_edges[1:][~keep]])
        cv, ce = _panel_pairs(f, child_edges)
        new_vals[~keep] = cv
        new_errs[~keep] = ce
        edges, vals, errs = new_edges, new_vals, new_errs
    return edges, vals, errs


def _panel_pairs(f, intervals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """panel_integrals over an arbitrary set of (a, b) intervals."""
    a, b = intervals[:, 0], intervals[:, 1]
    h, c = 0.5 * (b - a), 0.5 * (b + a)
    out = []
    for x, w in (_GL15, _GL7):
        nodes = c[:, None] + h[:, None] * x
        vals = np.asarray(f(nodes.ravel())).reshape(nodes.shape)
        out.append(h * (vals @ w))
    return out[0], np.abs(out[0] - out[1])


def _quad_edges(sol: RadialSolution, r_lo: float = 1e-12) -> np.ndarray:
    """Quadrature panel edges: geometric head below the series start,
    then the solver's own step points."""
    grid = sol.grid
    if sol.norm_convention is NormConvention.WKB_START:
        return grid
    r0 = sol.r_start
    n_head = max(4, int(math.ceil(2.0 * math.log10(r0 / r_lo))))
    head = np.geomspace(r_lo, r0, n_head + 1)[:-1]
    return np.concatenate([head, grid])


def eq_integrand(V: Potential, sol: RadialSolution):
    """Integrand of the closed phase formula for this solution's channel."""
    k, ell = sol.channel.k, sol.channel.ell

    def f(r):
        r = np.asarray(r, dtype=float)
        phi, dphi = sol.evaluate(r)
        vv = np.asarray(V.evaluator(r), dtype=float)
        if ell == 0.0:
            den = dphi * dphi + (k * k) * phi * phi
        else:
            u, v, du, dv = _free_pair(ell, k * r)
            W = k * du * phi - u * dphi
            Z = k * dv * phi - v * dphi
            den = W * W + Z * Z
        return -k * vv * phi * phi / den
    return f


# ---------------------------------------------------------------------------
# Tail beyond the truncation radius
# ---------------------------------------------------------------------------

def tail_correction(V: Potential, k: float, r_max: float,
                    theta_end: float) -> tuple[float, float]:
    """Analytic estimate of the phase accumulated beyond r_max.

    Averaging sin^2 over the oscillation gives -(1/2k) int_R V dr; the
    leading oscillatory remainder -sin(2 theta_R) V(R) / (4 k^2) is
    kept as well.  Returns (correction, error_estimate).
    """
    if math.isfinite(V.support) and r_max >= V.support:
        return 0.0, 0.0
    total, b0 = 0.0, r_max
    for _ in range(200):
        val, _ = quad(lambda r: float(np.atleast_1d(V.evaluator(np.atleast_1d(r)))[0]),
                      b0, 2.0 * b0, epsabs=0.0, epsrel=1e-10, limit=100)
        total += val
        if abs(val) <= 1e-13 * max(abs(total), 1e-300):
            break
        b0 *= 2.0
    v_end = float(np.atleast_1d(V.evaluator(np.atleast_1d(r_max)))[0])
    corr = -total / (2.0 * k) - math.sin(2.0 * theta_end) * v_end / (4.0 * k * k)
    err = abs(v_end) / (2.0 * k * k * max(k * r_max, 1.0)) + (total / (2.0 * k)) ** 2
    return corr, err


# ---------------------------------------------------------------------------
# Route 1: quadrature over the regular solution
# ---------------------------------------------------------------------------

def local_phase_from_solution(V: Potential, sol: RadialSolution,
                              with_amplitude: bool = True) -> PhaseProfile:
    """delta(k, r) accumulated by panel quadrature over the dense output."""
    ch = sol.channel
    if ch.k <= 0:
        raise ValueError("local phase requires k > 0")
    f = eq_integrand(V, sol)
    edges = _quad_edges(sol)
    edges, vals, errs = adaptive_panel_integrals(f, edges)
    below = abs(float(f(np.array([edges[0]]))[0])) * edges[0] \
        if sol.norm_convention is not NormConvention.WKB_START else sol.inner_error
    delta = sol.inner_phase + np.concatenate([[0.0], np.cumsum(vals)])
    amp = amp_inf = None
    if with_amplitude:
        prof = amplitude_from_solution(sol)
        amp = np.interp(edges, prof.grid, prof.amplitude)
        amp_inf = prof.amplitude_inf
    return PhaseProfile(channel=ch, grid=edges, delta=delta,
                        total=float(delta[-1]), method=PhaseMethod.INTEGRAL,
                        amplitude=amp,
                        amplitude_inf=math.nan if amp_inf is None else amp_inf,
                        err_quad=float(np.sum(errs)) + below,
                        err_tail=sol.tail_error)


# ---------------------------------------------------------------------------
# Route 2: the phase ODE
# ---------------------------------------------------------------------------

def _phase_rhs(V: Potential, ch: Channel):
    k, ell = ch.k, ch.ell

    def rhs(r, y):
        vv = float(np.atleast_1d(V.evaluator(np.atleast_1d(r)))[0])
        u, v, du, dv = _free_pair(ell, k * r)
        s = u * math.cos(y[0]) + v * math.sin(y[0])
        return (-vv * s * s / k,)
    return rhs


def _integrate_phase(V: Potential, ch: Channel, r_a: float, r_max: float,
                     cfg: SolverConfig, stiff: bool) -> tuple[np.ndarray, np.ndarray]:
    pts = sorted({r_a, r_max,
                  *([V.support] if r_a < V.support < r_max else [])})
    rhs = _phase_rhs(V, ch)
    ts, ds, y = [], [], (0.0,)
    method = "LSODA" if stiff else cfg.method
    for a, b in zip(pts[:-1], pts[1:]):
        res = solve_ivp(rhs, (a, b), y, method=method,
                        rtol=min(cfg.rtol, 1e-10), atol=cfg.atol)
        if not res.success:
            raise RuntimeError(f"phase equation failed at r={res.t[-1]:.4g}: "
                               f"{res.message}")
        ts.append(res.t if not ts else res.t[1:])
        ds.append(res.y[0] if not ds else res.y[0][1:])
        y = (res.y[0][-1],)
    return np.concatenate(ts), np.concatenate(ds)


def solve_phase_ode(V: Potential, ch: Channel,
                    cfg: SolverConfig = SolverConfig()) -> PhaseProfile:
    """delta(k, r) by direct integration of the phase equation.

    Potentials too singular at the origin for the equation itself
    (inverse-square and stronger) are handled by a cutoff theta(r - eps)
    with eps halved to convergence and one Aitken extrapolation.
    """
    if ch.k <= 0:
        raise ValueError("the phase equation requires k > 0")
    k = ch.k
    r_max, tail_err = choose_r_max(V, k, cfg)

    probe = np.geomspace(max(1e-3, 1e-6), max(r_max, 1e-2), 30)
    vmax = float(np.max(np.abs(np.asarray(V.evaluator(probe), dtype=float))))
    stiff = vmax / k > 500.0

    if V.origin_class in (OriginClass.INVERSE_SQUARE, OriginClass.POWER_SINGULAR):
        seq = []
        eps = 1e-2
        err_reg = math.inf
        for _ in range(22):
            grid, delta = _integrate_phase(V, ch, eps, r_max, cfg, stiff=True)
            seq.append(delta[-1])
            if len(seq) >= 2:
                err_reg = abs(seq[-1] - seq[-2])
                if err_reg < 1e-9:
                    break
            eps *= 0.5
        total = seq[-1]
        if len(seq) >= 3:
            d1, d2 = seq[-2] - seq[-3], seq[-1] - seq[-2]
            if abs(d2 - d1) > 0.0 and abs(d2) < abs(d1):
                total = seq[-1] + d2 * d2 / (d1 - d2)  # Aitken
                err_reg = abs(d2 * d2 / (d1 - d2))
        corr, tail_corr_err = tail_correction(V, k, r_max, k * r_max + total)
        return PhaseProfile(channel=ch, grid=grid, delta=delta,
                            total=total + corr, method=PhaseMethod.ODE,
                            err_quad=err_reg, err_tail=tail_err + tail_corr_err)

    r_a = min(1e-6, 1e-6 / k)
    grid, delta = _integrate_phase(V, ch, r_a, r_max, cfg, stiff)
    # start-gap estimate: |delta'| ~ |V| (k r)^{2 ell + 2} / k below r_a
    v0 = float(np.atleast_1d(V.evaluator(np.atleast_1d(r_a)))[0])
    start_err = abs(v0) * (k * r_a) ** (2 * ch.ell + 2) * r_a / k
    total = float(delta[-1])
    corr, tail_corr_err = tail_correction(V, k, r_max, k * r_max + total)
    return PhaseProfile(channel=ch, grid=grid, delta=delta, total=total + corr,
                        method=PhaseMethod.ODE, err_quad=start_err,
                        err_tail=tail_err + tail_corr_err)


# ---------------------------------------------------------------------------
# Amplitude
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmplitudeProfile:
    grid: np.ndarray
    amplitude: np.ndarray
    amplitude_inf: float
    converged: bool


def amplitude_from_solution(sol: RadialSolution) -> AmplitudeProfile:
    """A(k, r) = sqrt[(u phi' - u' phi)^2 + (v phi' - v' phi)^2] / k.

    Reduces to sqrt(phi'^2 + k^2 phi^2)/k at ell = 0.  The A(k, inf)
    estimate is the plateau over the last stretch of the grid.
    """
    ch = sol.channel
    k, ell = ch.k, ch.ell
    if k <= 0:
        raise ValueError("amplitude requires k > 0")
    r = sol.grid
    phi, dphi = sol.phi, sol.dphi
    if ell == 0.0:
        amp = np.sqrt(dphi * dphi + (k * k) * phi * phi) / k
    else:
        u, v, du, dv = _free_pair(ell, k * r)
        W = u * dphi - k * du * phi
        Z = v * dphi - k * dv * phi
        amp = np.sqrt(W * W + Z * Z) / k
    if sol.tail_error == 0.0 and r[-1] >= sol.r_max:
        # truncated exactly at a compact support: A is constant beyond,
        # so the endpoint value is already A(k, inf)
        return AmplitudeProfile(grid=r, amplitude=amp,
                                amplitude_inf=float(amp[-1]), converged=True)
    n_tail = max(4, len(r) // 10)
    plateau = amp[-n_tail:]
    a_inf = float(np.mean(plateau))
    spread = float(np.ptp(plateau)) / max(a_inf, 1e-300)
    return AmplitudeProfile(grid=r, amplitude=amp, amplitude_inf=a_inf,
                            converged=spread < 1e-6)
