"""Self-check suite: the library's structural invariants, runnable from
the CLI (`phasekit validate`) and reused by the test suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import absolute, iterate, phasefunc, potentials, radial, specfun


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_wronskian(n: int = 10_000, seed: int = 20260823) -> CheckResult:
    """du*v - u*dv = 1 to 1e-10 relative over random orders and arguments."""
    from scipy import special as sp
    rng = np.random.default_rng(seed)
    nu = rng.uniform(-0.5, 10.0, n) + 0.5
    z = np.exp(rng.uniform(math.log(1e-6), math.log(1e3), n))
    pref = np.sqrt(0.5 * math.pi * z)
    u = pref * sp.jv(nu, z)
    v = -pref * sp.yv(nu, z)
    du = pref * sp.jvp(nu, z) + 0.5 * u / z
    dv = -pref * sp.yvp(nu, z) + 0.5 * v / z
    worst = float(np.max(np.abs(du * v - u * dv - 1.0)))
    return CheckResult("wronskian_identity", worst < 1e-10,
                       f"max |W - 1| = {worst:.3e}")


def check_normalization_invariance() -> CheckResult:
    """The closed phase formula is unchanged when phi is rescaled."""
    V = potentials.exponential(-3.0)
    sol = radial.solve_regular(V, radial.Channel(1.0, 0.0))
    base = absolute.phase_shift(V, sol).delta
    worst = 0.0
    for lam in (1e-6, 1e6):
        d = absolute.phase_shift(V, sol.rescaled(lam)).delta
        worst = max(worst, abs(d - base))
    return CheckResult("normalization_invariance", worst < 1e-10,
                       f"max |delta(lam) - delta| = {worst:.3e}")


def check_sign_law() -> CheckResult:
    """Single-signed potential gives a phase of the opposite sign."""
    cases = [(potentials.exponential(-3.0), 1.0),
             (potentials.exponential(2.0), -1.0),
             (potentials.barrier(1.0), -1.0),
             (potentials.square_well(2.0), 1.0)]
    ok, details = True, []
    for V, expected in cases:
        for k in (0.5, 2.0):
            sol = radial.solve_regular(V, radial.Channel(k, 0.0))
            d = absolute.phase_shift(V, sol).delta
            if math.copysign(1.0, d) != expected:
                ok = False
                details.append(f"{V.label} k={k}: delta={d:.3e}")
    return CheckResult("sign_law", ok, "; ".join(details) or "all signs opposite V")


def check_free_jost() -> CheckResult:
    """|F| = 1 for the zero potential, across k and ell."""
    V = potentials.square_well(0.0, 1.0, label="zero")
    worst = 0.0
    for k in (0.5, 1.0, 5.0):
        for ell in (0.0, 1.0, 2.0):
            sol = radial.solve_regular(V, radial.Channel(k, ell))
            worst = max(worst, abs(absolute.jost_modulus(sol) - 1.0))
    return CheckResult("free_jost_modulus", worst < 1e-8,
                       f"max ||F| - 1| = {worst:.3e}")


def check_radial_residual() -> CheckResult:
    """The dense output satisfies the radial equation: first-derivative
    consistency of (phi, phi') against (V_eff - k^2) phi, to 1e-6 relative."""
    worst = 0.0
    cases = [(potentials.exponential(-3.0), 1.0, 0.0),
             (potentials.square_well(2.0), 2.0, 1.0),
             (potentials.barrier(1.0), 0.5, 2.0)]
    stencil = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
    for V, k, ell in cases:
        sol = radial.solve_regular(V, radial.Channel(k, ell))
        h = 0.01 / max(k, 1.0)
        r = np.linspace(sol.r_start + 5 * h, sol.r_max - 5 * h, 40)
        # avoid straddling the support edge where phi'' jumps
        if math.isfinite(V.support):
            r = r[np.abs(r - V.support) > 6 * h]
        offs = np.array([-2, -1, 0, 1, 2]) * h
        phi_s, dphi_s = sol.evaluate((r[:, None] + offs).ravel())
        phi_s = phi_s.reshape(len(r), 5)
        dphi_s = dphi_s.reshape(len(r), 5)
        d1 = phi_s @ stencil / h
        d2 = dphi_s @ stencil / h
        phi, dphi = sol.evaluate(r)
        q = np.asarray(V.evaluator(r), dtype=float) \
            + ell * (ell + 1.0) / r**2 - k * k
        scale = np.abs(dphi) + np.abs(q * phi) + k * np.abs(phi)
        res = np.maximum(np.abs(d1 - dphi), np.abs(d2 - q * phi)) / scale
        worst = max(worst, float(np.max(res)))
    return CheckResult("radial_equation_residual", worst < 1e-6,
                       f"max relative residual = {worst:.3e}")


def check_cross_method() -> CheckResult:
    """All four phase routes agree on a regular potential."""
    V = potentials.exponential(-3.0)
    ch = radial.Channel(2.0, 0.0)
    sol = radial.solve_regular(V, ch)
    vals = [absolute.phase_shift(V, sol).delta,
            absolute.phase_shift_volterra(V, sol).delta,
            phasefunc.solve_phase_ode(V, ch).total,
            iterate.picard_phase(V, ch).total]
    spread = max(vals) - min(vals)
    return CheckResult("cross_method_agreement", spread < 1e-6,
                       f"spread = {spread:.3e}")


def check_majorant_dominates() -> CheckResult:
    """Delta(k, r) >= |delta(k, r)| on a sample potential."""
    V = potentials.exponential(-2.0, 1.3)
    ch = radial.Channel(2.0, 0.0)
    prof = iterate.picard_phase(V, ch)
    maj = iterate.majorant(V, ch)
    dom = np.interp(prof.grid, maj.grid, maj.Delta) - np.abs(prof.delta)
    worst = float(np.min(dom))
    return CheckResult("majorant_dominance", worst > -1e-12,
                       f"min (Delta - |delta|) = {worst:.3e}")


ALL_CHECKS = [check_wronskian, check_normalization_invariance, check_sign_law,
              check_free_jost, check_radial_residual, check_cross_method,
              check_majorant_dominates]


def run_all() -> list[CheckResult]:
    return [chk() for chk in ALL_CHECKS]
