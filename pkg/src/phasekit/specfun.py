"""Special functions for the free radial problem.

Riccati-Bessel pairs of real order ell >= -1/2, the modified Bessel
function of the second kind, and the Gamma function.  Evaluation is
delegated to scipy.special, which already provides series/asymptotic
switching with the accuracy required here; this module fixes the sign
and normalization conventions used throughout the package.

Conventions: u_ell(z) = sqrt(pi z / 2) J_{ell+1/2}(z) is the regular
(sine-type) solution and v_ell(z) = -sqrt(pi z / 2) Y_{ell+1/2}(z) the
irregular (cosine-type) one, so that at ell = 0 they reduce exactly to
sin z and cos z and the Wronskian u'v - uv' = 1 holds in z for every
real order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp


@dataclass(frozen=True)
class FreePair:
    """Values and z-derivatives of the free solutions at (ell, z)."""

    u: float | np.ndarray
    v: float | np.ndarray
    du: float | np.ndarray
    dv: float | np.ndarray
    ell: float
    z: float | np.ndarray

    @property
    def wronskian(self):
        """du*v - u*dv; identically 1 in exact arithmetic."""
        return self.du * self.v - self.u * self.dv


def gamma(x: float) -> float:
    """Gamma function on the real line, rejecting the poles."""
    x = float(x)
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma pole at x = {x}")
    return float(sp.gamma(x))


def bessel_K(nu: float, x, scaled: bool = False):
    """Modified Bessel function K_nu(x) for x > 0.

    With scaled=True returns e^x * K_nu(x), which stays representable
    far beyond the x ~ 700 overflow point of the plain function.
    """
    if nu < 0:
        nu = -nu  # K_nu is even in the order
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr <= 0):
        raise ValueError("bessel_K requires x > 0")
    out = sp.kve(nu, x_arr) if scaled else sp.kv(nu, x_arr)
    return float(out) if np.ndim(x) == 0 else out


def double_factorial_odd(ell: float) -> float:
    """(2 ell + 1)!! for real ell > -3/2, via the Gamma function."""
    # (2l+1)!! = 2^{l+1} Gamma(l + 3/2) / sqrt(pi)
    return 2.0 ** (ell + 1.0) * gamma(ell + 1.5) / math.sqrt(math.pi)


def riccati_pair(ell: float, z) -> FreePair:
    """Free solutions u_ell, v_ell and their z-derivatives.

    Valid for real order ell >= -1/2 and z > 0.  Derivatives use
    d/dz [sqrt(z) C_nu(z)] = sqrt(z) C_nu'(z) + C_nu(z) / (2 sqrt(z)).
    """
    if ell < -0.5:
        raise ValueError(f"order ell = {ell} below -1/2 is not supported")
    z_arr = np.asarray(z, dtype=float)
    if np.any(z_arr <= 0):
        raise ValueError("riccati_pair requires z > 0")
    nu = ell + 0.5
    pref = np.sqrt(0.5 * math.pi * z_arr)
    J = sp.jv(nu, z_arr)
    Y = sp.yv(nu, z_arr)
    dJ = sp.jvp(nu, z_arr)
    dY = sp.yvp(nu, z_arr)
    u = pref * J
    v = -pref * Y
    du = pref * dJ + 0.5 * u / z_arr
    dv = -pref * dY + 0.5 * v / z_arr
    if np.ndim(z) == 0:
        u, v, du, dv = float(u), float(v), float(du), float(dv)
        z_arr = float(z_arr)
    return FreePair(u=u, v=v, du=du, dv=dv, ell=float(ell), z=z_arr)


def free_pair_smallz_u(ell: float, z):
    """Leading small-z behaviour z^{ell+1}/(2 ell + 1)!! of u_ell."""
    return np.asarray(z, dtype=float) ** (ell + 1.0) / double_factorial_odd(ell)


# ---------------------------------------------------------------------------
# Fast closed-form trig path for integer ell in {0, 1, 2}
# ---------------------------------------------------------------------------

def riccati_trig(ell: int, z):
    """Closed-form (u, v, du, dv) for ell in {0, 1, 2}.

    Avoids the general Bessel machinery inside ODE right-hand sides.
    Falls back to series for u at small z where the trigonometric form
    loses digits to cancellation.
    """
    z = np.asarray(z, dtype=float)
    s, c = np.sin(z), np.cos(z)
    if ell == 0:
        return s, c, c, -s
    if ell not in (1, 2):
        raise ValueError("riccati_trig supports ell in {0, 1, 2}")
    iz = 1.0 / z
    if ell == 1:
        u = s * iz - c
        v = c * iz + s
        du = c * iz - s * iz * iz + s
        dv = -s * iz - c * iz * iz + c
        z_small = 1e-2   # u/du cancel below this; the Bessel route does not
    else:
        u = (3.0 * iz * iz - 1.0) * s - 3.0 * iz * c
        v = (3.0 * iz * iz - 1.0) * c + 3.0 * iz * s
        # du = u_{ell-1} - (ell/z) u_ell
        u1 = s * iz - c
        v1 = c * iz + s
        du = u1 - 2.0 * iz * u
        dv = v1 - 2.0 * iz * v
        z_small = 1e-1
    small = z < z_small
    if np.any(small):
        pair = riccati_pair(float(ell), z[small] if z.ndim else float(z))
        if z.ndim:
            u, du = u.copy(), du.copy()
            u[small], du[small] = pair.u, pair.du
        else:
            u, du = pair.u, pair.du
    return u, v, du, dv
