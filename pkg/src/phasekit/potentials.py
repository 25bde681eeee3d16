"""Radial potentials with origin/tail classification and moment integrals.

A potential is characterised by how it behaves at the two endpoints of
(0, inf): the origin class decides which solver start is valid, and the
tail class decides how far the radial integration must be carried.  The
moment integrals (first moment, log-weighted moments, second moment)
are the quantitative form of those conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import quad


class OriginClass(Enum):
    L1_AT_ORIGIN = "l1_at_origin"       # V itself integrable at 0
    BJK = "bjk"                         # only r*V integrable at 0
    INVERSE_SQUARE = "inverse_square"   # r^2 V -> lam
    POWER_SINGULAR = "power_singular"   # V ~ g/r^m, g>0, m>2


class TailClass(Enum):
    COMPACT_SUPPORT = "compact_support"
    INTEGRABLE_TAIL = "integrable_tail"
    SECOND_MOMENT_TAIL = "second_moment_tail"
    LOG_WEIGHTED_TAIL = "log_weighted_tail"


@dataclass(frozen=True)
class Potential:
    """Immutable radial potential with declared endpoint behaviour."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    origin_class: OriginClass
    tail_class: TailClass
    label: str
    params: Mapping[str, float] = field(default_factory=dict)

    def __call__(self, r):
        arr = np.asarray(r, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any(arr < 0.0):
            raise ValueError("r must be non-negative")
        if np.any(arr == 0.0) and self.origin_class is not OriginClass.L1_AT_ORIGIN:
            raise ValueError(
                f"r = 0 not in the domain of {self.label!r} "
                f"(origin class {self.origin_class.value})"
            )
        out = np.asarray(self.evaluator(arr), dtype=float)
        return float(out[0]) if scalar else out.reshape(np.shape(r))

    # -- convenience accessors for declared analytic structure -----------

    @property
    def lam(self) -> float:
        """Inverse-square strength (origin and tail), 0 if none."""
        return float(self.params.get("lam", 0.0))

    @property
    def g(self) -> float:
        return float(self.params.get("g", 0.0))

    @property
    def m(self) -> float:
        return float(self.params.get("m", 0.0))

    @property
    def support(self) -> float:
        """Compact-support radius, inf for long-range potentials."""
        return float(self.params.get("support", math.inf))

    def regular_part(self, r):
        """V(r) with any declared inverse-square component removed."""
        if self.lam == 0.0:
            return self(r)
        r = np.asarray(r, dtype=float)
        return self(r) - self.lam / r**2

    def rescaled(self, factor: float, label: str | None = None) -> "Potential":
        ev = self.evaluator
        return Potential(
            evaluator=lambda r: factor * ev(r),
            origin_class=self.origin_class,
            tail_class=self.tail_class,
            label=label or f"{factor}*{self.label}",
            params={**self.params,
                    "lam": factor * self.lam,
                    "g": factor * self.g} if ("lam" in self.params or "g" in self.params)
                   else dict(self.params),
        )


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------

def square_well(depth: float, radius: float = 1.0, label: str | None = None) -> Potential:
    """Attractive well V = -depth on [0, radius] (depth > 0 for a well)."""
    def ev(r):
        return np.where(r <= radius, -float(depth), 0.0)
    return Potential(ev, OriginClass.L1_AT_ORIGIN, TailClass.COMPACT_SUPPORT,
                     label or f"square_well(depth={depth}, R={radius})",
                     {"depth": depth, "radius": radius, "support": radius})


def barrier(height: float, radius: float = 1.0, label: str | None = None) -> Potential:
    """Repulsive barrier V = +height on [0, radius]."""
    if height <= 0:
        raise ValueError("barrier height must be positive")
    p = square_well(-height, radius, label or f"barrier(height={height}, R={radius})")
    return p


def exponential(amplitude: float, range_: float = 1.0, label: str | None = None) -> Potential:
    """V(r) = amplitude * exp(-r/range_); sign carried by amplitude."""
    def ev(r):
        return amplitude * np.exp(-r / range_)
    return Potential(ev, OriginClass.L1_AT_ORIGIN, TailClass.SECOND_MOMENT_TAIL,
                     label or f"exponential(a={amplitude}, s={range_})",
                     {"amplitude": amplitude, "range": range_})


def gaussian_well(amplitude: float, range_: float = 1.0, label: str | None = None) -> Potential:
    def ev(r):
        return amplitude * np.exp(-((r / range_) ** 2))
    return Potential(ev, OriginClass.L1_AT_ORIGIN, TailClass.SECOND_MOMENT_TAIL,
                     label or f"gaussian(a={amplitude}, s={range_})",
                     {"amplitude": amplitude, "range": range_})


def yukawa(strength: float, screen: float = 1.0, label: str | None = None) -> Potential:
    """V(r) = strength * exp(-r/screen)/r.  Only r*V is integrable at 0."""
    def ev(r):
        out = np.zeros_like(r)
        pos = r > 0
        out[pos] = strength * np.exp(-r[pos] / screen) / r[pos]
        return out
    return Potential(ev, OriginClass.BJK, TailClass.SECOND_MOMENT_TAIL,
                     label or f"yukawa(g={strength}, s={screen})",
                     {"strength": strength, "screen": screen})


def inverse_square(lam: float, label: str | None = None) -> Potential:
    """Pure V(r) = lam / r^2, scale free; violates the first moment at both ends."""
    def ev(r):
        out = np.full_like(r, np.inf)
        pos = r > 0
        out[pos] = lam / r[pos] ** 2
        return out
    return Potential(ev, OriginClass.INVERSE_SQUARE, TailClass.INTEGRABLE_TAIL,
                     label or f"inverse_square(lam={lam})", {"lam": lam})


def power_singular(g: float, m: float, label: str | None = None) -> Potential:
    """Strongly repulsive V(r) = g / r^m with g > 0, m > 2."""
    if g <= 0 or m <= 2:
        raise ValueError("power_singular requires g > 0 and m > 2")
    def ev(r):
        out = np.full_like(r, np.inf)
        pos = r > 0
        out[pos] = g * r[pos] ** (-m)
        return out
    tail = TailClass.SECOND_MOMENT_TAIL if m > 3 else TailClass.INTEGRABLE_TAIL
    return Potential(ev, OriginClass.POWER_SINGULAR, tail,
                     label or f"power_singular(g={g}, m={m})", {"g": g, "m": m})


def power_origin(v0: float, alpha: float, cutoff: float = 1.0,
                 label: str | None = None) -> Potential:
    """V(r) = v0 * r^-(1+alpha) on [0, cutoff], 0 beyond; 0 < alpha < 1."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    def ev(r):
        out = np.zeros_like(r)
        sel = (r > 0) & (r <= cutoff)
        out[sel] = v0 * r[sel] ** (-(1.0 + alpha))
        if np.any(r == 0):
            out[r == 0] = np.inf
        return out
    return Potential(ev, OriginClass.BJK, TailClass.COMPACT_SUPPORT,
                     label or f"power_origin(v0={v0}, alpha={alpha})",
                     {"v0": v0, "alpha": alpha, "support": cutoff})


def centrifugal_plus(lam: float, base: Potential, label: str | None = None) -> Potential:
    """Composite lam/r^2 + V1(r) with V1 regular (first moment finite)."""
    base_ev = base.evaluator
    def ev(r):
        out = np.full_like(r, np.inf)
        pos = r > 0
        out[pos] = lam / r[pos] ** 2 + base_ev(r[pos])
        return out
    return Potential(ev, OriginClass.INVERSE_SQUARE, TailClass.INTEGRABLE_TAIL,
                     label or f"{lam}/r^2 + {base.label}",
                     {"lam": lam, **{f"base_{k}": v for k, v in base.params.items()}})


def tabulated(points: Sequence[Sequence[float]], label: str | None = None) -> Potential:
    """Linear interpolation of [[r, V], ...]; zero beyond the last point."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError("tabulated potential needs at least two [r, V] pairs")
    order = np.argsort(pts[:, 0])
    rs, vs = pts[order, 0], pts[order, 1]
    def ev(r):
        return np.interp(r, rs, vs, left=vs[0], right=0.0)
    return Potential(ev, OriginClass.L1_AT_ORIGIN, TailClass.COMPACT_SUPPORT,
                     label or "tabulated", {"support": float(rs[-1])})


_FAMILIES = {
    "square_well": lambda p: square_well(p["depth"], p.get("radius", 1.0)),
    "barrier": lambda p: barrier(p["height"], p.get("radius", 1.0)),
    "exponential": lambda p: exponential(p["amplitude"], p.get("range", 1.0)),
    "gaussian": lambda p: gaussian_well(p["amplitude"], p.get("range", 1.0)),
    "yukawa": lambda p: yukawa(p["strength"], p.get("screen", 1.0)),
    "inverse_square": lambda p: inverse_square(p["lam"]),
    "power_singular": lambda p: power_singular(p["g"], p["m"]),
    "power_origin": lambda p: power_origin(p["v0"], p["alpha"], p.get("cutoff", 1.0)),
    "composite": lambda p: centrifugal_plus(
        p["lam"], exponential(p["amplitude"], p.get("range", 1.0))),
}


def from_spec(doc: Mapping) -> Potential:
    """Build a potential from the JSON document form.

    Schema: {"family": str, "params": {name: number}, "tabulated": [[r, V], ...]}.
    """
    if not isinstance(doc, Mapping):
        raise ValueError("potential spec must be a JSON object")
    if "family" not in doc:
        raise ValueError("potential spec is missing required field 'family'")
    family = doc["family"]
    params = doc.get("params", {})
    if family == "tabulated":
        if "tabulated" not in doc:
            raise ValueError("family 'tabulated' requires field 'tabulated'")
        return tabulated(doc["tabulated"])
    if family not in _FAMILIES:
        raise ValueError(f"unknown potential family {family!r}; "
                         f"known: {sorted(_FAMILIES)} + ['tabulated']")
    try:
        return _FAMILIES[family](params)
    except KeyError as exc:
        raise ValueError(f"family {family!r} is missing parameter {exc.args[0]!r}") from exc


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------

DIVERGENCE_THRESHOLD = 1e12


@dataclass(frozen=True)
class Moment:
    value: float
    finite: bool
    status: str                       # "converged" | "divergent" | "failed"
    divergent_at: tuple[str, ...] = ()


@dataclass(frozen=True)
class MomentReport:
    bjk_moment: Moment
    log_moment_origin: Moment
    log_moment_tail: Moment
    second_moment_tail: Moment
    ell_moment: Moment


def _windowed_moment(V: Potential, weight: Callable[[np.ndarray], np.ndarray],
                     lo: float, hi: float, rtol: float = 1e-8) -> Moment:
    """Integrate weight(r)*|V(r)| over dyadic windows of [lo, hi].

    Divergence is decided from the window partial sums: contributions that
    stop decreasing toward an endpoint, or a partial sum passing the
    threshold, flag the moment as infinite at that endpoint.
    """
    def f(r):
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        vals = weight(arr) * np.abs(V.evaluator(arr))
        return float(vals[0]) if np.ndim(r) == 0 else vals

    support = V.support
    j_lo = max(-200, int(math.floor(math.log2(lo))))
    j_hi = int(math.ceil(math.log2(min(hi, support * 2 if math.isfinite(support) else hi))))

    def window_values(js):
        out = []
        for j in js:
            a, b = 2.0 ** j, 2.0 ** (j + 1)
            if math.isfinite(support) and a > support:
                out.append(0.0)
                continue
            try:
                val, _ = quad(f, a, min(b, support) if math.isfinite(support) else b,
                              epsabs=0.0, epsrel=1e-10, limit=200)
            except Exception:
                return out, "failed"
            out.append(val)
        return out, "ok"

    vals, status = window_values(range(j_lo, j_hi))
    if status == "failed":
        return Moment(math.nan, False, "failed")
    vals = np.asarray(vals)
    total = float(vals.sum())

    divergent_at = []
    # toward the origin: window sums must decay as j decreases
    head = vals[:8][::-1]  # from larger windows toward r -> 0
    if len(head) >= 4 and head[-1] > 0 and not np.any(head[1:] < 0.95 * head[:-1]) \
            and head[-1] > rtol * max(total, 1.0):
        divergent_at.append("origin")
    tail = vals[-8:]
    if len(tail) >= 4 and tail[-1] > 0 and not np.any(tail[1:] < 0.95 * tail[:-1]) \
            and tail[-1] > rtol * max(total, 1.0):
        divergent_at.append("infinity")
    if total > DIVERGENCE_THRESHOLD:
        if not divergent_at:
            divergent_at.append("origin" if vals[0] > vals[-1] else "infinity")
    if divergent_at:
        return Moment(math.inf, False, "divergent", tuple(divergent_at))

    # endpoint refinement: extend windows until contributions are negligible
    for direction, j0 in (("origin", j_lo - 1), ("infinity", j_hi)):
        j, step = j0, (-1 if direction == "origin" else 1)
        for _ in range(200):
            a, b = 2.0 ** j, 2.0 ** (j + 1)
            if math.isfinite(support) and a > support:
                break
            val, _ = quad(f, a, min(b, support) if math.isfinite(support) else b,
                          epsabs=0.0, epsrel=1e-10, limit=200)
            total += val
            if val <= rtol * max(total, 1e-300) / 10.0:
                break
            j += step
        else:
            return Moment(math.inf, False, "divergent", (direction,))
    return Moment(total, True, "converged")


def moments(V: Potential, a: float = 1.0, R: float = 1.0, ell: float = 0.0,
            rtol: float = 1e-8) -> MomentReport:
    """Moment integrals entering the integrability conditions.

    a is the lower endpoint of the log-weighted tail moment (exposed as a
    parameter; default 1); R the lower endpoint of the second tail moment.
    """
    if a <= 0 or R <= 0:
        raise ValueError("a and R must be positive")
    one = lambda r: r
    return MomentReport(
        bjk_moment=_windowed_moment(V, one, 1e-60, 1e60, rtol),
        log_moment_origin=_windowed_moment(
            V, lambda r: r * (1.0 + np.abs(np.log(r))), 1e-60, 1e60, rtol),
        log_moment_tail=_windowed_moment(
            V, lambda r: np.where(r >= a, r * np.log(np.maximum(r, a)) ** 2, 0.0),
            a, 1e60, rtol),
        second_moment_tail=_windowed_moment(
            V, lambda r: np.where(r >= R, r**2, 0.0), R, 1e60, rtol),
        ell_moment=_windowed_moment(V, lambda r: r ** (2.0 * ell + 2.0),
                                    1e-60, 1e60, rtol),
    )


def tail_bound(V: Potential, k: float, R: float) -> float:
    """Upper bound (1/k) * int_R^inf |V| on the phase accumulated beyond R.

    Returns inf when the tail is not integrable ("unbounded tail").
    """
    if k <= 0 or R <= 0:
        raise ValueError("tail_bound requires k > 0 and R > 0")
    support = V.support
    if math.isfinite(support) and R >= support:
        return 0.0
    def f(r):
        return float(np.abs(V.evaluator(np.atleast_1d(float(r))))[0])
    total = 0.0
    b0 = R
    for j in range(200):
        b1 = b0 * 2.0
        if math.isfinite(support) and b0 >= support:
            break
        hi = min(b1, support) if math.isfinite(support) else b1
        val, _ = quad(f, b0, hi, epsabs=0.0, epsrel=1e-10, limit=200)
        prev = total
        total += val
        if total > DIVERGENCE_THRESHOLD:
            return math.inf
        if val <= 1e-12 * max(total, 1e-300) and j > 2:
            break
        b0 = b1
    else:
        return math.inf
    return total / k
