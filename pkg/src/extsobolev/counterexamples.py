"""The two norm-equivalence failure experiments.

The first (failure of the boundary Hardy inequality for s >= 1 + 1/p) probes
the weighted norm of a heat-smoothed bump, which vanishes only linearly at
the boundary, so (r-1)^{-s} overwhelms it once (s-1)p >= 1.  The second
(failure of ||grad f||_p <~ ||(-Lap_Omega)^{1/2} f||_p for p > d) runs the
truncated zero-frequency mode f_n = chi_n u(.; lambda_n): the whole-space
gradient norm A_n stays bounded below while the Dirichlet half-power norm
B_n is driven to zero along a schedule lambda -> 0, eps -> 0, R -> inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dst

from .domain import DomainKind, DomainSpec, RadialFunction, sphere_area
from .errors import DivergenceDetected, InvalidArgumentError
from .heat import heat_apply_radial
from .quadrature import RadialMeasure, integrate, lp_norm_radial
from .lp_theory import smooth_cutoff
from .transforms import frac_power


@dataclass(frozen=True)
class CutoffSpec:
    """chi(r) = phi(r/R) - phi((r-1)/eps) with phi the quintic smoothstep."""

    eps: float
    R: float

    def __post_init__(self):
        if not (0 < self.eps <= 0.25):
            raise InvalidArgumentError(f"need 0 < eps <= 1/4, got {self.eps}")
        if not (self.R > 4):
            raise InvalidArgumentError(f"need R > 4, got {self.R}")


def cutoff_chi(spec: CutoffSpec) -> RadialFunction:
    """The annulus cutoff: 0 on [0, 1+eps], 1 on [1+2eps, R], 0 on [2R, inf)."""

    def func(r):
        r = np.asarray(r, dtype=float)
        return smooth_cutoff(r / spec.R) - smooth_cutoff((r - 1.0) / spec.eps)

    return RadialFunction(func=func, d=3, ell=0,
                          support=(1.0 + spec.eps, 2.0 * spec.R),
                          label=f"chi(eps={spec.eps},R={spec.R})")


def cutoff_chi_deriv(spec: CutoffSpec):
    """chi'(r); the quintic step contributes 30 u^2 (1-u)^2 on its ramp."""

    def dstep(u):
        u = np.clip(u, 0.0, 1.0)
        return 30.0 * u * u * (1.0 - u) ** 2

    def func(r):
        r = np.asarray(r, dtype=float)
        return (dstep((r - 1.0) / spec.eps - 1.0) / spec.eps
                - dstep(r / spec.R - 1.0) / spec.R)

    return func


def mode_u(lam: float):
    """The d=3, ell=0 exterior eigenmode 2 sin(lam (r-1)) / (pi lam r)."""

    def func(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * np.sin(lam * (r - 1.0)) / (math.pi * lam * r)

    return func


def mode_u_deriv(lam: float):
    def func(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * (lam * r * np.cos(lam * (r - 1.0))
                      - np.sin(lam * (r - 1.0))) / (math.pi * lam * r * r)

    return func


@dataclass
class ScheduleEntry:
    n: int
    lam: float
    eps: float
    R: float
    A: float = 0.0
    B: float = 0.0
    A_riesz: float = 0.0
    tail_fraction: float = 0.0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"n": self.n, "lambda": self.lam, "eps": self.eps, "R": self.R,
                "A": self.A, "B": self.B, "A_over_B":
                    self.A / self.B if self.B > 0 else float("inf"),
                "A_riesz": self.A_riesz, "tail_fraction": self.tail_fraction}


def default_schedule(n_lo: int = 5, n_hi: int = 40) -> list[tuple]:
    """lambda_n = eps_n = 2^-n, R_n = 2^{n/2}; R grows slower than 1/lambda.

    B_n scales like R^{-1/4} in this regime, so driving it down by an order
    of magnitude requires four decades of R; the index is stepped by 2 past
    n = 14 to keep the table compact.
    """
    ns = list(range(n_lo, min(n_hi, 14) + 1)) + list(range(16, n_hi + 1, 2))
    return [(2.0 ** -n, 2.0 ** -n, 2.0 ** (n / 2.0)) for n in ns]


def _halfpower_norm_dst(fvals_of, lam_mult, p: float,
                        h: float, length: float, offset: float = 1.0) -> float:
    """|| m(sqrt(-Lap)) f ||_{L^p} for d=3, ell=0 via the sine transform.

    ``fvals_of`` maps a radius array to f values; the multiplier is applied
    to the sine coefficients of g(rho) = r f(r), rho = r - offset, and the
    norm is taken by trapezoid on the same fine grid.
    """
    M = int(round(length / h))
    rho = h * np.arange(1, M)
    r = offset + rho
    g = r * fvals_of(r)
    lam_k = math.pi * np.arange(1, M) / (M * h)
    out = dst(lam_mult(lam_k) * dst(g, type=1), type=1) / (2.0 * M)
    hvals = out / r
    dens = np.abs(hvals) ** p * r * r
    return float((sphere_area(3) * h * np.sum(dens)) ** (1.0 / p))


def _cos_integral(omega, a: float, b: float):
    """int_a^b cos(omega rho) d rho, stable as omega -> 0."""
    omega = np.asarray(omega, dtype=float)
    return (b - a) * np.cos(0.5 * omega * (a + b)) \
        * np.sinc(omega * (b - a) / (2.0 * math.pi))


def _forward_sine(lam: float, spec: CutoffSpec, lam_hat: np.ndarray) -> np.ndarray:
    """Exact-ish sine transform of g(rho) = (1+rho) f(1+rho) for f = chi u.

    g = (2 / (pi lam)) chi(1+rho) sin(lam rho); the plateau piece is done in
    closed form via product-to-sum, the two quintic ramps by Gauss-Legendre
    with enough nodes for the phase they carry.  At frequencies with
    lam_hat R > 500 the outer ramp is dropped: it is C^2 on scale R, so its
    coefficients are below 1/(500^3 R^2) there.
    """
    e, R = spec.eps, spec.R
    lam_hat = np.asarray(lam_hat, dtype=float)
    # plateau [2e, R-1]: integrand sin(lam rho) sin(lh rho)
    a, b = 2.0 * e, R - 1.0
    plateau = 0.5 * (_cos_integral(lam_hat - lam, a, b)
                     - _cos_integral(lam_hat + lam, a, b))

    def ramp(a, b, chi_of, lam_sub, n_nodes):
        x, w = _leggauss_nodes(n_nodes)
        rho = 0.5 * (b - a) * x + 0.5 * (b + a)
        wts = 0.5 * (b - a) * w
        base = chi_of(rho) * np.sin(lam * rho) * wts
        return np.sin(np.outer(lam_sub, rho)) @ base

    out = plateau
    max_phase_in = float(np.max(lam_hat)) * e
    out = out + ramp(e, 2.0 * e, lambda rho: 1.0 - smooth_cutoff(rho / e),
                     lam_hat, max(16, int(2.0 * max_phase_in) + 8))
    keep = lam_hat * R <= 500.0
    if np.any(keep):
        max_phase_out = float(np.max(lam_hat[keep])) * R
        out[keep] += ramp(R - 1.0, 2.0 * R - 1.0,
                          lambda rho: smooth_cutoff((1.0 + rho) / R),
                          lam_hat[keep],
                          min(2048, max(32, int(2.0 * max_phase_out) + 16)))
    return (2.0 / (math.pi * lam)) * out


def _gl_grid(lo: float, hi: float, n_panels: int, n_nodes: int = 16):
    x, w = _leggauss_nodes(n_nodes)
    edges = np.linspace(lo, hi, n_panels + 1)
    mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return nodes, wts


def _leggauss_nodes(n: int):
    return np.polynomial.legendre.leggauss(n)


def _halfpower_lowpass(lam: float, spec: CutoffSpec, p: float,
                       freq_cap: float = 40.0, n_freq_panels: int = 64,
                       n_r: int = 2500) -> dict:
    """|| lam_hat f ||_{L^p(Omega)} via quadrature on the low-frequency band.

    Valid in the regime lam R << 1, where the spectral mass of f = chi u sits
    at frequencies ~ 1/R; frequencies above freq_cap / R are dropped (their
    contribution lives in an eps-thin boundary layer and is certified small
    against the dense sine-grid route at moderate R).  Also returns the L^2
    pieces used by the interpolation upper-bound sanity check.
    """
    e, R = spec.eps, spec.R
    Lam = freq_cap / R
    lam_hat, w_hat = _gl_grid(0.0, Lam, n_freq_panels)
    F = _forward_sine(lam, spec, lam_hat)
    coef = w_hat * lam_hat * F

    def low_field(rho):
        return (2.0 / math.pi) * (np.sin(np.outer(rho, lam_hat)) @ coef) \
            / (1.0 + rho)

    # near-boundary zone: above Lam the spectrum of g is carried entirely by
    # the edge piece g_edge = (2/(pi lam)) sin(lam rho) phi(rho/eps) on
    # [0, 2 eps] (g minus it is smooth on scale R), so the band uses the
    # edge transform alone and only the near zone sees it
    rho_split = min(32.0 * e, 0.25 * R)
    band_hi = 40.0 / e
    band, w_band = _gl_grid(Lam, band_hi,
                            max(64, int(0.6 * band_hi * rho_split) + 16))
    x_e, w_e = _leggauss_nodes(256)
    rho_e = e * (x_e + 1.0)  # [0, 2 eps]
    wts_e = e * w_e
    base_e = smooth_cutoff(rho_e / e) * np.sin(lam * rho_e) * wts_e
    F_edge = -(2.0 / (math.pi * lam)) * (np.sin(np.outer(band, rho_e)) @ base_e)
    coef_band = w_band * band * F_edge
    rho_n = np.geomspace(e / 100.0, rho_split, 400)
    h_near = low_field(rho_n) + (2.0 / math.pi) * (
        np.sin(np.outer(rho_n, band)) @ coef_band) / (1.0 + rho_n)
    dens_n = np.abs(h_near) ** p * (1.0 + rho_n) ** 2

    rho_f = np.geomspace(rho_split, 4.0 * R, n_r)
    dens_f = np.abs(low_field(rho_f)) ** p * (1.0 + rho_f) ** 2
    Bp = sphere_area(3) * (np.trapezoid(dens_n, rho_n)
                           + np.trapezoid(dens_f, rho_f))
    l2_sq = 2.0 / math.pi * (float(np.sum(w_hat * (lam_hat * F) ** 2))
                             + float(np.sum(w_band * (band * F_edge) ** 2)))
    return {"value": float(Bp ** (1.0 / p)),
            "halfpower_l2": math.sqrt(sphere_area(3) * l2_sq)}


def interpolation_bound_check(lam: float, eps: float, R: float) -> dict:
    """||(-Lap_Omega)^{1/2} f||_2^2 <= ||f||_2 ||Lap f||_2 with analytic Lap f.

    Lap(chi u) = -lam^2 chi u + 2 chi' u' + (chi'' + 2 chi'/r) u; the left
    side is evaluated through the same low-frequency multiplier route used
    for B_n, which can only undershoot the true spectral integral.
    """
    spec = CutoffSpec(eps=eps, R=R)
    chi, dchi = cutoff_chi(spec), cutoff_chi_deriv(spec)
    u, du = mode_u(lam), mode_u_deriv(lam)

    def d2step(v):
        v = np.clip(v, 0.0, 1.0)
        return 60.0 * v * (1.0 - v) * (1.0 - 2.0 * v)

    def d2chi(r):
        r = np.asarray(r, dtype=float)
        return (d2step((r - 1.0) / eps) / eps ** 2
                - d2step(r / R - 1.0) / R ** 2)

    def lap_f(r):
        r = np.asarray(r, dtype=float)
        return (-lam * lam * chi(r) * u(r) + 2.0 * dchi(r) * du(r)
                + (d2chi(r) + 2.0 * dchi(r) / r) * u(r))

    m = RadialMeasure(3, 1.0)
    sup = chi.support
    f2 = lp_norm_radial(RadialFunction(func=lambda r: chi(r) * u(r), d=3,
                                       ell=0, support=sup), 2.0, m).value
    lap2 = lp_norm_radial(RadialFunction(func=lap_f, d=3, ell=0, support=sup),
                          2.0, m).value
    half = _halfpower_lowpass(lam, spec, 2.0)["halfpower_l2"]
    return {"halfpower_l2": half, "bound": math.sqrt(f2 * lap2),
            "f_l2": f2, "lap_l2": lap2, "ok": half <= math.sqrt(f2 * lap2)}


def _riesz_pv_field(f_of, r: np.ndarray, u_min: float, u_max: float,
                    n_u: int = 640) -> np.ndarray:
    """(-Lap)^{1/2} f on R^3 for radial f via the principal-value kernel.

    After the angular integral, (-Lap)^{1/2} f (r) =
    (4/pi) PV int_0^inf (f(r) - f(r')) r'^2 / ((r-r')^2 (r+r')^2) dr';
    substituting u = |r - r'| and pairing r' = r - u with r' = r + u makes
    the 1/u singularity cancel numerically.
    """
    r = np.asarray(r, dtype=float)
    u = np.geomspace(u_min, u_max, n_u)
    fr = f_of(r)
    # |r - r'|^2 is u^2 by construction; using u directly avoids the float
    # cancellation of (r + u) - r when u is below the spacing of r
    kern = lambda rp, uu: rp * rp / (uu * uu * (r + rp) ** 2)
    integ = np.empty((r.size, u.size))
    for j, uu in enumerate(u):
        rp_hi = r + uu
        term = (fr - f_of(rp_hi)) * kern(rp_hi, uu)
        rp_lo = r - uu
        ok = rp_lo > 0  # r' < 0 carries no mass
        term[ok] += (fr[ok] - f_of(rp_lo[ok])) \
            * rp_lo[ok] ** 2 / (uu * uu * (r[ok] + rp_lo[ok]) ** 2)
        integ[:, j] = term
    return (4.0 / math.pi) * np.trapezoid(integ, u, axis=1)


def riesz_norm_pv(f_of, support_hi: float, p: float, eps_scale: float) -> float:
    """|| (-Lap_{R^3})^{1/2} f ||_{L^p(R^3)} through the PV kernel route.

    The radial grid clusters around r = 1, where the eps-scale cutoff edge
    produces a logarithmic boundary layer in the output field.
    """
    r = np.unique(np.concatenate([
        np.geomspace(0.05, 0.995, 140),
        1.0 - np.geomspace(eps_scale / 30.0, 0.004, 60),
        1.0 + np.geomspace(eps_scale / 30.0, 0.9, 320),
        np.geomspace(1.9, 4.0 * support_hi, 1000),
    ]))
    u_min = min(eps_scale / 60.0, 1e-7)
    h0 = _riesz_pv_field(f_of, r, u_min, 8.0 * support_hi, n_u=960)
    dens = np.abs(h0) ** p * r * r
    return float((sphere_area(3) * np.trapezoid(dens, r)) ** (1.0 / p))


def prop72_entry(lam: float, eps: float, R: float,
                 p: float = 4.0) -> ScheduleEntry:
    """One schedule row of the p > d experiment at d = 3."""
    spec = CutoffSpec(eps=eps, R=R)
    chi = cutoff_chi(spec)
    dchi = cutoff_chi_deriv(spec)
    u = mode_u(lam)
    du = mode_u_deriv(lam)
    m = RadialMeasure(3, 1.0)

    def f(r):
        return chi(r) * u(r)

    def grad_f(r):
        r = np.asarray(r, dtype=float)
        return dchi(r) * u(r) + chi(r) * du(r)

    # the gradient mass concentrates near r = 1 (|grad u| ~ r^{-2}); piecewise
    # log-split quadrature keeps the adaptive integrator honest at large R
    def lp_piecewise(dens_of, lo, hi):
        cuts = [lo]
        while cuts[-1] < hi:
            cuts.append(min(hi, max(cuts[-1] * 8.0, cuts[-1] + 4.0)))
        raw = sum(integrate(dens_of, a, b, tol=1e-10).value
                  for a, b in zip(cuts[:-1], cuts[1:]))
        return (m.sphere_constant * raw) ** (1.0 / p)

    A = lp_piecewise(lambda r: abs(float(grad_f(r))) ** p * r * r,
                     1.0 + eps, 2.0 * R)

    # monitored tail condition: truncating at R costs the gradient norm little
    tail = lp_piecewise(lambda r: abs(float(du(r))) ** p * r * r, R, 64.0 * R)

    B = _halfpower_lowpass(lam, spec, p)["value"]
    A_riesz = riesz_norm_pv(f, 2.0 * R, p, eps)
    return ScheduleEntry(n=0, lam=lam, eps=eps, R=R, A=A, B=B,
                         A_riesz=A_riesz,
                         tail_fraction=tail / max(A, 1e-300))


def prop72_limit_A(p: float = 4.0) -> float:
    """The lambda -> 0 limit of ||grad u||_{L^p(R^3)}: (2/pi)|| r^-2 ||_{L^p(r>1)}."""
    # the integrand decays like r^{2-2p}; beyond r = 100 the tail is negligible
    val = integrate(lambda r: r ** (-2.0 * p) * r * r, 1.0, 100.0,
                    tol=1e-12).value
    return (2.0 / math.pi) * (sphere_area(3) * val) ** (1.0 / p)


def prop72_run(d: int = 3, p: float = 4.0,
               schedule: list[tuple] | None = None) -> list[ScheduleEntry]:
    """The full schedule for the p > d failure; d=3 only (sine fast path)."""
    if d != 3:
        raise InvalidArgumentError("the experiment is implemented at d = 3")
    if not (p > d):
        raise InvalidArgumentError(f"need p > d = {d}, got p = {p}")
    schedule = schedule if schedule is not None else default_schedule()
    lams = [row[0] for row in schedule]
    Rs = [row[2] for row in schedule]
    if any(b >= a for a, b in zip(lams, lams[1:])) or \
       any(b <= a for a, b in zip(Rs, Rs[1:])):
        raise InvalidArgumentError("schedule must decrease lambda, increase R")
    out = []
    for lam, eps, R in schedule:
        entry = prop72_entry(lam, eps, R, p=p)
        # label by the dyadic index n = -log2(lambda) of the default schedule
        entry.n = int(round(-math.log2(lam)))
        out.append(entry)
    return out


# -- Prop 7.1: Hardy failure at s >= 1 + 1/p -----------------------------------------

def _smooth_bump(center: float = 3.0, width: float = 1.0) -> RadialFunction:
    def func(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        mask = np.abs(r - center) < width
        x = (r[mask] - center) / width
        out[mask] = np.exp(-1.0 / (1.0 - x * x))
        return out

    return RadialFunction(func=func, d=3, ell=0,
                          support=(center - width, center + width))


def prop71_run(d: int = 3, p: float = 1.5, s: float = 1.9,
               delta_schedule: np.ndarray | None = None,
               t_smooth: float = 1.0) -> dict:
    """Divergence of the boundary-weighted norm at s >= 1 + 1/p.

    The probe g = e^{t Lap_Omega}(bump) vanishes linearly at the boundary, so
    |g / (r-1)^s|^p fails to be integrable once (s-1)p >= 1; the partial
    integrals over r >= 1 + delta grow like delta^{1-(s-1)p} and the log-log
    slope against 1/delta is reported.  The half-power side stays finite.
    """
    if d != 3:
        raise InvalidArgumentError("the experiment is implemented at d = 3")
    if not (1.0 < p < d - 1.0 + 1e-9):
        raise InvalidArgumentError(f"need 1 < p < d - 1, got p = {p}")
    deltas = (2.0 ** -np.arange(1, 13) if delta_schedule is None
              else np.asarray(delta_schedule, dtype=float))
    dom = DomainSpec(DomainKind.EXTERIOR_BALL, d)
    g = heat_apply_radial(_smooth_bump(), t_smooth, dom)

    # Dirichlet kernels vanish linearly at the boundary: certify on g
    rr = np.linspace(1.0 + 1e-4, 1.2, 200)
    lin = g(rr) / (rr - 1.0)
    lin_lo, lin_hi = float(np.min(lin)), float(np.max(lin))
    if lin_lo <= 0:
        raise DivergenceDetected("probe does not vanish linearly at boundary",
                                 growth_exponent=0.0, partials=[])

    def partial(delta):
        return integrate(
            lambda r: abs(float(np.ravel(g(r))[0])) ** p * (r - 1.0) ** (-s * p)
            * r ** (d - 1), 1.0 + delta, g.support[1], tol=1e-8).value

    partials = np.array([partial(dl) for dl in deltas])
    # fit the tail where the boundary term dominates
    k = min(6, deltas.size)
    slope = float(np.polyfit(np.log(1.0 / deltas[-k:]),
                             np.log(partials[-k:]), 1)[0])
    denom = lp_norm_radial(frac_power(s, g, dom), p, RadialMeasure(d, 1.0),
                           r_max=g.support[1])
    expected = (s - 1.0) * p - 1.0
    return {
        "p": p, "s": s, "expected_slope": expected, "slope": slope,
        "diverged": slope > 0.05, "deltas": deltas.tolist(),
        "partials": partials.tolist(),
        "denominator": denom.value, "denominator_error": denom.error,
        "linear_vanishing": {"min": lin_lo, "max": lin_hi},
    }
