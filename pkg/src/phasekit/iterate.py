"""Fixed-point machinery: Picard iteration of the nonlinear integral
form of the phase equation, and the rigorous majorant / Riccati-type
upper bounds on |delta(k, r)|.

The majorant Delta(k, r) solves

    Delta = (D/k) int_0^r |V(t)| [(kt + Delta) / (1 + kt + Delta)]^2 dt

by monotone iteration from 0, with D = C^2 and C the smallest constant
with |sin x| <= C x / (1 + x) on x > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import cumulative_simpson, quad
from scipy.optimize import minimize_scalar

from .potentials import OriginClass, Potential
from .phasefunc import PhaseMethod, PhaseProfile, _free_pair, tail_correction
from .radial import Channel, SolverConfig, choose_r_max


@lru_cache(maxsize=1)
def sine_bound_constant() -> float:
    """Smallest C with |sin x| <= C x/(1+x) for all x > 0.

    C = sup |sin x| (1+x)/x, attained near x ~ 1.215; the supremum is
    located by a coarse scan refined with bounded 1-D maximization.
    """
    xs = np.linspace(1e-6, 4.0 * math.pi, 20000)
    vals = np.abs(np.sin(xs)) * (1.0 + xs) / xs
    x_best = float(xs[np.argmax(vals)])
    f = lambda x: -abs(math.sin(x)) * (1.0 + x) / x
    res = minimize_scalar(f, bounds=(max(x_best - 0.01, 1e-9), x_best + 0.01),
                          method="bounded", options={"xatol": 1e-14})
    return float(-res.fun)


@dataclass(frozen=True)
class MajorantProfile:
    grid: np.ndarray
    Delta: np.ndarray
    C: float
    D: float
    iterations: int
    converged: bool

    @property
    def total(self) -> float:
        return float(self.Delta[-1])

    def as_table(self) -> np.ndarray:
        return np.column_stack([self.grid, self.Delta])


@dataclass(frozen=True)
class RiccatiBound:
    grid: np.ndarray
    I: np.ndarray
    J: np.ndarray
    omega: np.ndarray
    r0: float

    def as_table(self) -> np.ndarray:
        return np.column_stack([self.grid, self.I, self.J, self.omega])


# ---------------------------------------------------------------------------
# Shared segmented grids (segments meet at potential discontinuities)
# ---------------------------------------------------------------------------

def _phase_segments(V: Potential, k: float, r_max: float,
                    points_per_cycle: int | None = None) -> list[np.ndarray]:
    ppc = points_per_cycle or (960 if k <= 1 else 320 if k <= 10 else 160)
    r_c = min(0.1, 1.0 / max(k, 1e-12), 0.25 * r_max)
    h = 2.0 * math.pi / (ppc * max(k, 1e-12))
    h = min(h, r_max / 400.0)
    breaks = sorted({r_c, r_max,
                     *([V.support] if r_c < V.support < r_max else [])})
    n_head = max(200, 60 * int(math.ceil(math.log10(r_c / 1e-12))))
    segments = [np.geomspace(1e-12, r_c, n_head)]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = min(max(8, int(math.ceil((b - a) / h))), 400000)
        segments.append(np.linspace(a, b, n + 1))
    return segments


def _segment_values(V: Potential, segments: list[np.ndarray]) -> list[np.ndarray]:
    """|segment-wise V| with one-sided limits at shared boundary nodes."""
    out = []
    for seg in segments:
        r = seg.copy()
        r[0] = r[0] * (1.0 + 1e-9) + 1e-300
        r[-1] = r[-1] * (1.0 - 1e-9)
        out.append(np.asarray(V.evaluator(r), dtype=float))
    return out


def _chained_cumulative(values: list[np.ndarray],
                        segments: list[np.ndarray]) -> list[np.ndarray]:
    """Cumulative integral, continuous across segment boundaries."""
    out, offset = [], 0.0
    for vals, seg in zip(values, segments):
        c = offset + np.concatenate([[0.0], cumulative_simpson(vals, x=seg)])
        out.append(c)
        offset = float(c[-1])
    return out


def _flatten(arrays: list[np.ndarray]) -> np.ndarray:
    return np.concatenate([a if i == 0 else a[1:] for i, a in enumerate(arrays)])


# ---------------------------------------------------------------------------
# Picard iteration of the phase equation
# ---------------------------------------------------------------------------

def picard_phase(V: Potential, ch: Channel,
                 cfg: SolverConfig = SolverConfig()) -> PhaseProfile:
    """Fixed point of delta = -(1/k) int_0^r V [u cos d + v sin d]^2 dt.

    Converges for any rV in L^1 (the cumulative structure makes the
    iteration superlinear); best suited to moderate-to-high k where a
    few sweeps suffice.
    """
    k, ell = ch.k, ch.ell
    if k <= 0:
        raise ValueError("picard_phase requires k > 0")
    r_max, tail_err = choose_r_max(V, k, cfg)
    segments = _phase_segments(V, k, r_max)
    vv = _segment_values(V, segments)
    uv = [_free_pair(ell, k * seg) for seg in segments]

    deltas = [np.zeros_like(seg) for seg in segments]
    n_iter = 0
    gap = math.inf
    for n_iter in range(1, cfg.max_iter + 1):
        integrands = []
        for seg, vals, (u, v, _, _), d in zip(segments, vv, uv, deltas):
            s = u * np.cos(d) + v * np.sin(d)
            integrands.append(-vals * s * s / k)
        new = _chained_cumulative(integrands, segments)
        gap = max(float(np.max(np.abs(n - d))) for n, d in zip(new, deltas))
        deltas = new
        if gap < cfg.fp_tol:
            break
    else:
        raise RuntimeError(f"Picard iteration did not converge; "
                           f"last sup-norm change {gap:.3e}")
    total = float(deltas[-1][-1])
    corr, tail_corr_err = tail_correction(V, k, r_max, k * r_max + total)
    return PhaseProfile(channel=ch, grid=_flatten(segments),
                        delta=_flatten(deltas), total=total + corr,
                        method=PhaseMethod.PICARD, err_quad=gap,
                        err_tail=tail_err + tail_corr_err, iterations=n_iter)


def picard_residual(profile: PhaseProfile, V: Potential) -> float:
    """Sup-norm residual of the nonlinear integral equation at the fix point."""
    ch = profile.channel
    k, ell = ch.k, ch.ell
    r, delta = profile.grid, profile.delta
    vv = np.asarray(V.evaluator(np.maximum(r, 1e-300)), dtype=float)
    u, v, _, _ = _free_pair(ell, k * r)
    s = u * np.cos(delta) + v * np.sin(delta)
    rhs = np.concatenate([[0.0], cumulative_simpson(-vv * s * s / k, x=r)])
    return float(np.max(np.abs(rhs - delta)))


# ---------------------------------------------------------------------------
# Majorant and Riccati-type bounds
# ---------------------------------------------------------------------------

def riccati_bound(V: Potential, ch: Channel,
                  cfg: SolverConfig = SolverConfig()) -> RiccatiBound:
    """I(k,r) = D int t|V|/(1+kt)^2, J likewise with one power of (1+kt),
    and omega = k I/(1 - I), valid on [0, r0) with I(k, r0) = 1."""
    k = ch.k
    if k <= 0:
        raise ValueError("riccati_bound requires k > 0")
    D = sine_bound_constant() ** 2
    r_max, _ = choose_r_max(V, k, cfg)
    segments = _phase_segments(V, k, r_max)
    av = [np.abs(v) for v in _segment_values(V, segments)]
    I = _flatten(_chained_cumulative(
        [D * seg * a / (1.0 + k * seg) ** 2 for seg, a in zip(segments, av)],
        segments))
    J = _flatten(_chained_cumulative(
        [D * seg * a / (1.0 + k * seg) for seg, a in zip(segments, av)],
        segments))
    r = _flatten(segments)
    omega = np.where(I < 1.0, k * I / np.maximum(1.0 - I, 1e-300), np.inf)
    if I[-1] < 1.0:
        r0 = math.inf
    else:
        idx = int(np.argmax(I >= 1.0))
        r0 = float(np.interp(1.0, I[idx - 1:idx + 1], r[idx - 1:idx + 1]))
    return RiccatiBound(grid=r, I=I, J=J, omega=omega, r0=r0)


def majorant(V: Potential, ch: Channel,
             cfg: SolverConfig = SolverConfig()) -> MajorantProfile:
    """Monotone iteration of the majorant equation.

    Potentials whose first moment diverges at the origin (rV in L^1
    only) get the two-stage treatment: the Riccati-type bound r*omega
    up to half its validity radius, then the restarted equation with
    that value as the head start.
    """
    k = ch.k
    if k <= 0:
        raise ValueError("majorant requires k > 0")
    C = sine_bound_constant()
    D = C * C
    r_max, _ = choose_r_max(V, k, cfg)
    segments = _phase_segments(V, k, r_max)
    av = [np.abs(v) for v in _segment_values(V, segments)]
    r = _flatten(segments)

    head_val = 0.0
    head_mask = np.zeros_like(r, dtype=bool)
    head_Delta = np.zeros_like(r)
    if V.origin_class is OriginClass.BJK:
        rb = riccati_bound(V, ch, cfg)
        R = rb.r0 / 2.0 if math.isfinite(rb.r0) else float(r[len(r) // 2])
        head_mask = r <= R
        if np.any(head_mask):
            head_Delta[head_mask] = r[head_mask] * np.interp(
                r[head_mask], rb.grid, rb.omega)
            head_val = float(head_Delta[head_mask][-1])

    Delta = head_Delta.copy()
    iterations = 0
    converged = False
    for iterations in range(1, cfg.max_iter + 1):
        kt = k * r + Delta
        weight = (kt / (1.0 + kt)) ** 2
        # split back into segments for the chained cumulative
        integrands, pos = [], 0
        for i, (seg, a) in enumerate(zip(segments, av)):
            n = len(seg)
            sl = slice(pos, pos + n) if i == 0 else slice(pos - 1, pos - 1 + n)
            w_seg = weight[sl].copy()
            w_seg[head_mask[sl]] = 0.0
            integrands.append(D * a * w_seg / k)
            pos += n if i == 0 else n - 1
        new = head_val + _flatten(_chained_cumulative(integrands, segments))
        new[head_mask] = head_Delta[head_mask]
        gap = float(np.max(np.abs(new - Delta)))
        Delta = np.maximum(new, Delta)   # guard the monotone structure
        if gap < max(cfg.fp_tol, 1e-12):
            converged = True
            break
    return MajorantProfile(grid=r, Delta=Delta, C=C, D=D,
                           iterations=iterations, converged=converged)


def majorant_bound_l1(V: Potential, k: float) -> float:
    """Closed upper bound (D/k) int_0^inf |V| for first-moment potentials."""
    D = sine_bound_constant() ** 2
    total = 0.0
    edges = np.concatenate([[0.0], np.geomspace(1e-6, 1e6, 61)])
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda t: abs(float(np.atleast_1d(
            V.evaluator(np.atleast_1d(t)))[0])), a, b,
            epsabs=1e-14, epsrel=1e-10, limit=100)
        total += val
    return D * total / k
