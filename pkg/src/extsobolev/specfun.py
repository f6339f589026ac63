"""Bessel functions of real order, the Gamma function, and exterior-ball eigenmodes.

General real orders are evaluated through scipy's AMOS-backed routines; the
half-integer orders that dominate the odd-dimensional computations also have
an independent closed-form path (trigonometric recurrences) used both as a
fast path and as an oracle in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import InvalidArgumentError, UnsupportedSectorError

_HALF_INT_TOL = 1e-12


@dataclass(frozen=True)
class BesselOrder:
    """Order nu = (d-2)/2 + ell for dimension d and angular sector ell."""

    nu: float

    def __post_init__(self):
        if not np.isfinite(self.nu) or self.nu < 0.5:
            raise InvalidArgumentError(
                f"order must satisfy nu >= 1/2 for d >= 3, got {self.nu}")

    @classmethod
    def from_sector(cls, d: int, ell: int) -> "BesselOrder":
        if d < 3 or ell < 0:
            raise InvalidArgumentError(f"need d >= 3 and ell >= 0, got d={d}, ell={ell}")
        return cls((d - 2) / 2.0 + ell)

    @property
    def is_half_integer(self) -> bool:
        return abs((self.nu - 0.5) - round(self.nu - 0.5)) < _HALF_INT_TOL


def _as_order(order) -> float:
    nu = order.nu if isinstance(order, BesselOrder) else float(order)
    if not np.isfinite(nu) or nu < 0:
        raise InvalidArgumentError(f"invalid Bessel order {nu}")
    return nu


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise InvalidArgumentError("Bessel argument must be finite and positive")
    return x


def bessel_j(order, x):
    """J_nu(x) for nu >= 0 and x > 0.  Accepts scalars or arrays."""
    nu = _as_order(order)
    x = _check_x(x)
    return sp.jv(nu, x)


def bessel_y(order, x):
    """Y_nu(x) for nu >= 0 and x > 0 (blows up at the origin)."""
    nu = _as_order(order)
    x = _check_x(x)
    return sp.yv(nu, x)


# -- closed-form half-integer path -------------------------------------------
#
# J_{1/2}(x) = sqrt(2/pi x) sin x, Y_{1/2}(x) = -sqrt(2/pi x) cos x, and the
# three-term recurrence C_{nu+1} = (2 nu / x) C_nu - C_{nu-1}.  Upward
# recurrence is stable for Y everywhere and for J while nu < x; otherwise J
# uses a downward Miller recurrence normalized against J_{1/2}.

def bessel_j_halfint(order, x):
    """J_{n+1/2}(x) by trigonometric recurrences, independent of scipy."""
    nu = _as_order(order)
    n = int(round(nu - 0.5))
    if abs(nu - 0.5 - n) > _HALF_INT_TOL or n < 0:
        raise InvalidArgumentError(f"{nu} is not a half-integer order")
    x = _check_x(x)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    pref = np.sqrt(2.0 / (np.pi * x))
    out = np.empty_like(x)

    up = nu <= x  # stable region for upward recurrence
    if np.any(up):
        xu = x[up]
        jm, j0 = pref[up] * np.cos(xu), pref[up] * np.sin(xu)  # J_{-1/2}, J_{1/2}
        for k in range(n):
            jm, j0 = j0, ((2 * k + 1) / xu) * j0 - jm
        out[up] = j0
    if np.any(~up):
        xd = x[~up]
        m = n + 16 + int(np.ceil(np.sqrt(40.0 * max(n, 1))))
        jp = np.zeros_like(xd)
        jc = np.full_like(xd, 1e-280)
        target = np.zeros_like(xd)
        for k in range(m, 0, -1):
            jm = ((2 * k + 1) / xd) * jc - jp
            jp, jc = jc, jm
            big = np.abs(jc) > 1e250  # rescale to dodge overflow; ratios survive
            if np.any(big):
                jp[big] *= 1e-250
                jc[big] *= 1e-250
                target[big] *= 1e-250
            if k - 1 == n:
                target = jc.copy()
        # jc now holds the unnormalized J_{1/2}
        norm = (pref[~up] * np.sin(xd)) / jc
        out[~up] = target * norm
    return out[0] if scalar else out


def bessel_y_halfint(order, x):
    """Y_{n+1/2}(x) by the (always stable) upward trigonometric recurrence."""
    nu = _as_order(order)
    n = int(round(nu - 0.5))
    if abs(nu - 0.5 - n) > _HALF_INT_TOL or n < 0:
        raise InvalidArgumentError(f"{nu} is not a half-integer order")
    x = _check_x(x)
    pref = np.sqrt(2.0 / (np.pi * x))
    ym, y0 = pref * np.sin(x), -pref * np.cos(x)  # Y_{-1/2}, Y_{1/2}
    with np.errstate(over="ignore"):  # genuine overflow near x = 0; saturate
        for k in range(n):
            ym, y0 = y0, np.clip(((2 * k + 1) / x) * y0 - ym, -1e280, 1e280)
    return y0


def gamma_fn(x: float) -> float:
    """Gamma(x) for x not a non-positive integer."""
    if not np.isfinite(x):
        raise InvalidArgumentError("Gamma argument must be finite")
    if x <= 0 and abs(x - round(x)) < 1e-14:
        raise InvalidArgumentError(f"Gamma pole at {x}")
    return math.gamma(x) if x > 0 else float(sp.gamma(x))


# -- exterior-ball eigenmodes -------------------------------------------------

@dataclass(frozen=True)
class EigenmodeQuery:
    d: int
    ell: int
    r: float
    lam: float

    def __post_init__(self):
        if self.d < 3 or self.ell < 0:
            raise InvalidArgumentError(f"need d >= 3, ell >= 0; got d={self.d}, ell={self.ell}")
        if not (self.lam > 0) or not np.isfinite(self.lam):
            raise InvalidArgumentError(f"lambda must be positive, got {self.lam}")


def cross_product_zv(nu: float, lam, r):
    """J_nu(lam r) Y_nu(lam) - J_nu(lam) Y_nu(lam r), vectorized in lam and r."""
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    lr = lam * r
    if abs((nu - 0.5) - round(nu - 0.5)) < _HALF_INT_TOL:
        ja, ya = bessel_j_halfint(nu, lam), bessel_y_halfint(nu, lam)
        jr, yr = bessel_j_halfint(nu, lr), bessel_y_halfint(nu, lr)
    else:
        ja, ya = sp.jv(nu, lam), sp.yv(nu, lam)
        jr, yr = sp.jv(nu, lr), sp.yv(nu, lr)
    return jr * ya - ja * yr


def eigenmode_values(d: int, ell: int, r, lam):
    """u(r; lam): generalized eigenfunction of the exterior-ball Dirichlet
    Laplacian in sector ell, vanishing at r = 1.

    u(r; lam) = -r^{-(d-2)/2} [J_nu(lam r) Y_nu(lam) - J_nu(lam) Y_nu(lam r)]
    with nu = (d-2)/2 + ell.  The prefactor r^{-(d-2)/2} is the standard
    radial reduction; it is independent of ell.
    """
    nu = BesselOrder.from_sector(d, ell).nu
    r = np.asarray(r, dtype=float)
    if np.any(r < 1.0):
        raise InvalidArgumentError("eigenmode defined for r >= 1")
    return -np.power(r, -(d - 2) / 2.0) * cross_product_zv(nu, lam, r)


def eigenmode(q: EigenmodeQuery) -> float:
    if q.r < 1.0:
        raise InvalidArgumentError(f"need r >= 1, got {q.r}")
    return float(eigenmode_values(q.d, q.ell, q.r, q.lam))


def eigenmode_deriv(q: EigenmodeQuery) -> float:
    """d/dr of u(r; lam) for ell = 0, via the Bessel derivative identity.

    d_r u = lam r^{-nu} [J_{nu+1}(lam r) Y_nu(lam) - J_nu(lam) Y_{nu+1}(lam r)]
    with nu = (d-2)/2; only the ell = 0 sector supports this formula.
    """
    if q.ell != 0:
        raise UnsupportedSectorError("eigenmode_deriv supports only ell = 0")
    if q.r < 1.0:
        raise InvalidArgumentError(f"need r >= 1, got {q.r}")
    nu = (q.d - 2) / 2.0
    lam, r = q.lam, q.r
    lr = lam * r
    val = (sp.jv(nu + 1, lr) * sp.yv(nu, lam) - sp.jv(nu, lam) * sp.yv(nu + 1, lr))
    return float(lam * r ** (-nu) * val)
