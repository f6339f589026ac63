"""Riesz potentials, Hardy-ratio probes, the weighted Schur-test engine, and
the norm-equivalence experiment.

The Schur engine certifies L^p boundedness of positive radial-reducible
kernels K(x, y) = K(|x|, |y|, |x-y|) numerically: it evaluates the two
weighted sup-integrals

    C0 = sup_x int w(x,y)^{1/p}  K(x,y) dy,
    C1 = sup_y int w(x,y)^{-1/p'} K(x,y) dx,

on a log-spaced radial grid with one refinement doubling, and reports the
bound C0^{1/p'} C1^{1/p} together with a randomized operator-norm lower
bound for sanity.  Weight constructors encode the admissibility windows as
exact arithmetic, including the empty-window regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .domain import (DomainKind, DomainSpec, KernelSample, NormReport,
                     RadialFunction, sphere_area)
from .errors import InvalidArgumentError, NonConvergenceError
from .heat import gauss_kernel, sector_kernel_grid
from .quadrature import RadialMeasure, integrate_panels, lp_norm_radial
from .specfun import gamma_fn
from .transforms import frac_power

OBSTACLE_DIAM = 2.0


# -- Riesz potential kernel ---------------------------------------------------------

def riesz_constant(d: int, s: float) -> float:
    """c_{d,s} in (-Lap)^{-s/2}(x,y) = c_{d,s} |x-y|^{s-d} on R^d."""
    if not (0 < s < d):
        raise InvalidArgumentError(f"need 0 < s < d, got s={s}, d={d}")
    return gamma_fn((d - s) / 2.0) / (4.0 ** (s / 2.0) * math.pi ** (d / 2.0)
                                      * gamma_fn(s / 2.0))


def riesz_kernel_whole(d: int, s: float, x, y) -> float:
    """Closed-form whole-space Riesz kernel c_{d,s}|x-y|^{s-d}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dist = float(np.linalg.norm(x - y))
    if dist <= 0:
        raise InvalidArgumentError("x and y must be distinct")
    return riesz_constant(d, s) * dist ** (s - d)


def _exterior_kernel_many_t(d: int, x, y, ts: np.ndarray,
                            ell_tol: float = 1e-9) -> np.ndarray:
    """Exterior heat kernel at fixed (x, y) for an array of times."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r, rp = float(np.linalg.norm(x)), float(np.linalg.norm(y))
    costheta = float(np.clip(np.dot(x, y) / (r * rp), -1.0, 1.0))
    from .heat import _gegenbauer_ratio, _harmonic_count, _lambda_max
    from .transforms import _basis_matrix, spectral_density

    dom = DomainSpec(DomainKind.EXTERIOR_BALL, d)
    lam_max = _lambda_max(float(np.min(ts)))
    rr = np.array([r])
    qq = np.array([rp])
    out = np.zeros_like(ts)
    prev = np.zeros_like(ts)
    ell = 0
    while True:
        def fvec(nodes, ell=ell):
            rho = spectral_density(dom, d, ell, nodes)
            with np.errstate(over="ignore", invalid="ignore"):
                pr = _basis_matrix(dom, d, ell, rr, nodes)[:, 0]
                pq = _basis_matrix(dom, d, ell, qq, nodes)[:, 0]
                damp = np.exp(-np.outer(ts, nodes ** 2))
                vals = damp * (rho * pr * pq)[None, :]
            bad = ~np.isfinite(vals)
            if np.any(bad):
                vals[bad & (rho == 0.0)[None, :]] = 0.0
            return vals

        n_panels = max(4, int(lam_max * (r + rp) / 96.0))
        edges = np.linspace(0.0, lam_max, n_panels + 1)
        acc = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            part, _e, _n = integrate_panels(fvec, a, b, tol=1e-10, n0=32,
                                            max_doublings=6)
            acc = acc + part
        term = (_harmonic_count(d, ell) * _gegenbauer_ratio(d, ell, costheta)
                * acc / sphere_area(d))
        out = out + term
        if ell >= 2:
            tail = np.max(np.abs(term) + np.abs(prev))
            if tail <= ell_tol * max(np.max(np.abs(out)), 1e-300):
                break
        if ell > 512:
            raise NonConvergenceError("angular series did not converge",
                                      best_estimate=float(np.max(out)),
                                      error_estimate=float(np.max(np.abs(term))))
        prev = term
        ell += 1
    return out


def riesz_kernel(s: float, x, y, d: int = 3,
                 domain_kind: DomainKind = DomainKind.EXTERIOR_BALL,
                 nodes_per_decade: int = 24) -> KernelSample:
    """(-Lap)^{-s/2}(x, y) as the power-weighted time integral of the heat
    kernel, Gamma(s/2)^{-1} int_0^inf t^{s/2} e^{t Lap}(x,y) dt/t.

    The time integral runs over log t with Gauss-Legendre panels; the large-t
    tail is added analytically from the t^{-d/2} envelope of the last node.
    """
    if not (0 < s < d):
        raise InvalidArgumentError(f"need 0 < s < d, got s={s}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = float(np.sum((x - y) ** 2))
    if q <= 0:
        raise InvalidArgumentError("x and y must be distinct")

    t_lo = max(1e-10, q / 320.0)  # Gaussian factor below e^{-80} earlier
    t_hi = 400.0 * (1.0 + q)
    n_dec = int(math.ceil(math.log10(t_hi / t_lo)))

    if domain_kind == DomainKind.WHOLE_SPACE:
        def kernel_many(ts):
            return (4.0 * math.pi * ts) ** (-d / 2.0) * np.exp(-q / (4.0 * ts))
    elif domain_kind == DomainKind.EXTERIOR_BALL:
        if np.linalg.norm(x) <= 1.0 or np.linalg.norm(y) <= 1.0:
            raise InvalidArgumentError("exterior geometry requires |x|,|y| > 1")
        kernel_many = lambda ts: _exterior_kernel_many_t(d, x, y, ts)
    else:
        raise InvalidArgumentError(f"unsupported domain {domain_kind}")

    u_nodes_all, w_nodes_all = [], []
    edges = np.linspace(math.log(t_lo), math.log(t_hi),
                        max(4, n_dec) + 1)
    gl_x, gl_w = np.polynomial.legendre.leggauss(nodes_per_decade)
    for a, b in zip(edges[:-1], edges[1:]):
        u_nodes_all.append(0.5 * (b - a) * gl_x + 0.5 * (a + b))
        w_nodes_all.append(0.5 * (b - a) * gl_w)
    u_nodes = np.concatenate(u_nodes_all)
    w_nodes = np.concatenate(w_nodes_all)
    ts = np.exp(u_nodes)
    kv = kernel_many(ts)
    integrand = ts ** (s / 2.0) * kv  # dt/t absorbed by the log substitution
    main = float(np.dot(w_nodes, integrand))
    # analytic tail: K ~ h t^{-d/2} beyond t_hi
    h = kv[-1] * ts[-1] ** (d / 2.0)
    tail = h * t_hi ** ((s - d) / 2.0) * 2.0 / (d - s)
    value = (main + tail) / gamma_fn(s / 2.0)
    return KernelSample(geometry={"x": x.tolist(), "y": y.tolist(),
                                  "s": s, "domain": domain_kind.value},
                        t=0.0, value=value,
                        err=abs(tail) / gamma_fn(s / 2.0) * 0.5)


def riesz_shape_ratio(s: float, x, y, d: int = 3) -> float:
    """Kernel value over the boundary-shape envelope
    |x-y|^{s-d} (d(x)/(|x-y| ^ 2) ^ 1)(d(y)/...) used in the fitted-bound check."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dist = float(np.linalg.norm(x - y))
    cap = min(dist, OBSTACLE_DIAM)
    dx = float(np.linalg.norm(x)) - 1.0
    dy = float(np.linalg.norm(y)) - 1.0
    shape = dist ** (s - d) * min(dx / cap, 1.0) * min(dy / cap, 1.0)
    return riesz_kernel(s, x, y, d=d).value / shape


# -- Hardy ratios -------------------------------------------------------------------

def hardy_ratio(f: RadialFunction, s: float, p: float, operator: str,
                r_max: float = 64.0, singular: bool = False) -> NormReport:
    """|| f / w^s ||_p / || (-Lap)^{s/2} f ||_p.

    ``operator`` selects the weight and the Laplacian: "euclidean" uses
    w(r) = r on the whole space; "dirichlet" uses w(r) = r - 1 on the
    exterior ball.  A non-integrable weighted norm is reported as diverged
    with its fitted growth exponent instead of raising.
    """
    if operator not in ("euclidean", "dirichlet"):
        raise InvalidArgumentError(f"unknown operator {operator!r}")
    if s < 0:
        raise InvalidArgumentError(f"need s >= 0, got {s}")
    if operator == "dirichlet":
        dom = DomainSpec(DomainKind.EXTERIOR_BALL, f.d)
        weight = lambda r: (np.asarray(r, dtype=float) - 1.0) ** (-s)
    else:
        dom = DomainSpec(DomainKind.WHOLE_SPACE, f.d)
        weight = lambda r: np.asarray(r, dtype=float) ** (-s)
    m = RadialMeasure(f.d, dom.inner_radius)
    if s == 0:
        weight = None
    num = lp_norm_radial(f, p, m, weight=weight, r_max=r_max,
                         singular_inner=singular)
    den = lp_norm_radial(frac_power(s, f, dom), p, m, r_max=r_max) \
        if s > 0 else lp_norm_radial(f, p, m, r_max=r_max)
    if num.diverged:
        return NormReport(p=p, s=s, operator=f"hardy_ratio[{operator}]",
                          value=float("inf"), error=float("inf"),
                          diverged=True,
                          details={"numerator": "diverged",
                                   "growth_exponent":
                                       num.details.get("growth_exponent"),
                                   "denominator": den.value})
    value = num.value / den.value
    return NormReport(p=p, s=s, operator=f"hardy_ratio[{operator}]",
                      value=value,
                      error=value * (num.error / max(num.value, 1e-300)
                                     + den.error / max(den.value, 1e-300)),
                      details={"numerator": num.value, "denominator": den.value})


# -- region weights -----------------------------------------------------------------

@dataclass(frozen=True)
class WeightSpec:
    """A Schur weight w(x, y) with its exact admissibility window."""

    family: str
    alpha: float
    window: tuple
    admissible: bool
    alpha1: Optional[float] = None
    alpha2: Optional[float] = None
    note: str = ""

    def __call__(self, rx, ry, dist):
        rx = np.asarray(rx, dtype=float)
        ry = np.asarray(ry, dtype=float)
        dist = np.asarray(dist, dtype=float)
        if self.family == "unit":
            return np.ones(np.broadcast(rx, ry, dist).shape)
        if self.family == "dist-ratio":
            return ((rx - 1.0) / dist) ** self.alpha
        if self.family == "radius-ratio":
            return (rx / ry) ** self.alpha
        if self.family == "dist-dist":
            return ((rx - 1.0) / (ry - 1.0)) ** self.alpha
        if self.family == "dist-radius":
            return ((rx - 1.0) / ry) ** self.alpha
        if self.family == "mixed":
            return (OBSTACLE_DIAM ** self.alpha1 * (rx - 1.0) ** self.alpha2
                    / ry ** self.alpha)
        raise InvalidArgumentError(f"unknown weight family {self.family!r}")


def _window_spec(family: str, lo: float, hi: float, note: str = "") -> WeightSpec:
    admissible = lo < hi
    alpha = 0.5 * (lo + hi) if admissible else float("nan")
    return WeightSpec(family=family, alpha=alpha, window=(lo, hi),
                      admissible=admissible, note=note)


def region_weight(region: str, p: float, s: float, d: int) -> WeightSpec:
    """The Schur weight used on each region, alpha at the window midpoint.

    An empty window is reported (admissible=False), not raised: for the
    dist-ratio family the window (p(s-1), p'(2-s)) is empty exactly when
    s >= 1 + 1/p, which is the expected failure regime.
    """
    if not (p > 1) or d < 3:
        raise InvalidArgumentError(f"need p > 1 and d >= 3, got p={p}, d={d}")
    pp = p / (p - 1.0)
    region = region.strip()
    if region in ("Ia", "Ib"):
        return WeightSpec(family="unit", alpha=0.0, window=(0.0, 0.0),
                          admissible=True, note="no weight needed")
    if region in ("Ic", "Id"):
        return _window_spec("dist-ratio", p * (s - 1.0), pp * (2.0 - s),
                            note="empty iff s >= 1 + 1/p")
    if region in ("IIa", "IIb"):
        return _window_spec("radius-ratio", p * s,
                            min(pp * (d - s), p * d))
    if region == "IIc":
        lo, hi = p * s, pp * (d - s)
        if not (lo < hi):
            return _window_spec("mixed", lo, hi)
        alpha = 0.5 * (lo + hi)
        # split alpha = alpha1 + alpha2 with alpha1 < p, alpha2 < p'(2-s)
        a1_lo = max(0.0, alpha - pp * (2.0 - s))
        a1_hi = min(p, alpha)
        if not (a1_lo < a1_hi):
            return WeightSpec(family="mixed", alpha=alpha, window=(lo, hi),
                              admissible=False, note="no admissible split")
        a1 = 0.5 * (a1_lo + a1_hi)
        return WeightSpec(family="mixed", alpha=alpha, window=(lo, hi),
                          admissible=True, alpha1=a1, alpha2=alpha - a1)
    if region == "IId":
        return _window_spec("dist-radius", p * (s - 1.0), pp * (2.0 - s))
    if region == "P62":
        return _window_spec("dist-dist", 0.0, min(pp, p * s))
    raise InvalidArgumentError(f"unknown region {region!r}")


def region_kernel(region: str, s: float, d: int) -> Callable:
    """The simplified positive kernel of each region, with its indicator."""
    dm = OBSTACLE_DIAM

    def k(rx, ry, dist):
        rx = np.asarray(rx, dtype=float)
        ry = np.asarray(ry, dtype=float)
        dist = np.asarray(dist, dtype=float)
        dx, dy = rx - 1.0, ry - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            if region == "Ia":
                ind = (dist <= np.minimum(dx, dy)) & (dist <= dm)
                val = dx ** (-s) * dist ** (s - d)
            elif region == "Ib":
                ind = (dy <= dist) & (dist <= dx) & (dist <= dm)
                val = dy * dx ** (-s) * dist ** (s - d - 1)
            elif region == "Ic":
                ind = (dx <= dist) & (dist <= dy) & (dist <= dm)
                val = dx ** (1.0 - s) * dist ** (s - d - 1)
            elif region == "Id":
                ind = (np.maximum(dx, dy) <= dist) & (dist <= dm)
                val = dx ** (1.0 - s) * dy * dist ** (s - d - 2)
            elif region in ("IIa", "IIb"):
                ind = (dist > dm) & (np.minimum(dx, dy) >= dm)
                val = rx ** (-s) * dist ** (s - d)
            elif region == "IIc":
                ind = (dist > dm) & (dx <= dm) & (dy >= dm)
                val = dx ** (1.0 - s) * dist ** (s - d) / dm
            elif region == "IId":
                ind = (dist > dm) & (np.maximum(dx, dy) <= dm)
                val = dx ** (1.0 - s) * dy * dist ** (s - d) / dm ** 2
            elif region == "P62":
                ind = np.ones(np.broadcast(dx, dy, dist).shape, dtype=bool)
                val = dy ** s * (dx ** 2 + dy ** 2 + dist ** 2) ** (-(d + s) / 2.0)
            else:
                raise InvalidArgumentError(f"unknown region {region!r}")
        return np.where(ind, np.nan_to_num(val, posinf=0.0), 0.0)

    return k


# -- Schur engine -------------------------------------------------------------------

@dataclass
class SchurReport:
    C0: float
    C1: float
    bound: float
    p: float
    converged: bool
    history: list = field(default_factory=list)
    argmax: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"C0": self.C0, "C1": self.C1, "bound": self.bound,
                "p": self.p, "converged": self.converged,
                "history": self.history, "argmax": self.argmax}


def _angular_nodes(d: int, n: int):
    # Gauss-Legendre in cos(theta); sin^{d-2} theta dtheta = (1-c^2)^{(d-3)/2} dc
    c, w = np.polynomial.legendre.leggauss(n)
    wd = w * (1.0 - c ** 2) ** ((d - 3) / 2.0)
    return c, wd


def _sup_integral(kernel, weight_fn, d: int, grid_out: np.ndarray,
                  grid_in: np.ndarray, n_theta: int) -> tuple[float, float]:
    """sup over grid_out of int kernel*weight over the radial/angular grid."""
    ctheta, wtheta = _angular_nodes(d, n_theta)
    area = sphere_area(d) / math.sqrt(math.pi) * math.gamma(d / 2.0) \
        / math.gamma((d - 1) / 2.0)  # omega_{d-2} prefactor of the reduction
    # trapezoid weights on the log-spaced inner grid
    lg = np.log(grid_in)
    wr = np.zeros_like(grid_in)
    wr[1:-1] = 0.5 * (lg[2:] - lg[:-2])
    wr[0] = 0.5 * (lg[1] - lg[0])
    wr[-1] = 0.5 * (lg[-1] - lg[-2])
    wr = wr * grid_in ** d  # r^{d-1} dr = r^d dlog r
    best, arg = -1.0, float("nan")
    chunk = max(1, int(2e6 / (grid_in.size * n_theta)))
    for i0 in range(0, grid_out.size, chunk):
        ro = grid_out[i0:i0 + chunk][:, None, None]
        ri = grid_in[None, :, None]
        dist = np.sqrt(np.maximum(ro ** 2 + ri ** 2
                                  - 2.0 * ro * ri * ctheta[None, None, :], 0.0))
        vals = kernel(ro, ri, dist) * weight_fn(ro, ri, dist)
        ints = area * np.einsum("ijk,j,k->i", vals, wr, wtheta)
        j = int(np.argmax(ints))
        if ints[j] > best:
            best = float(ints[j])
            arg = float(grid_out[i0 + j])
    return best, arg


def schur_bound(kernel: Callable, weight: WeightSpec, p: float, d: int,
                r_lo: float = 1.0 + 2.0 ** -12, r_hi: float = 2.0 ** 6,
                n0: int = 192, n_theta: int = 48, refinements: int = 2,
                rel_tol: float = 0.02) -> SchurReport:
    """Certified Schur bound C0^{1/p'} C1^{1/p} by grid sup + refinement.

    ``kernel(rx, ry, dist)`` must be nonnegative and vanish outside its
    region.  Non-stabilizing sups raise NonConvergenceError with the trend.
    """
    if not (p > 1):
        raise InvalidArgumentError(f"need p > 1, got {p}")
    if not weight.admissible:
        raise InvalidArgumentError(
            f"weight window {weight.window} is empty; nothing to certify")
    pp = p / (p - 1.0)
    w_pos = lambda rx, ry, dist: weight(rx, ry, dist) ** (1.0 / p)
    w_neg = lambda rx, ry, dist: weight(rx, ry, dist) ** (-1.0 / pp)

    history = []
    prev0 = prev1 = None
    n = n0
    for level in range(refinements + 1):
        # density-only refinement: certifies the quadrature of the sups on
        # the fixed window; genuine unboundedness is probed separately by
        # schur_refinement_trend, which also extends the domain
        grid = np.geomspace(r_lo, r_hi, n)
        C0, arg0 = _sup_integral(kernel, w_pos, d, grid, grid, n_theta)
        # C1 integrates over x at fixed y: swap the kernel arguments
        C1, arg1 = _sup_integral(lambda rx, ry, dist: kernel(ry, rx, dist),
                                 lambda rx, ry, dist: w_neg(ry, rx, dist),
                                 d, grid, grid, n_theta)
        history.append({"n": n, "C0": C0, "C1": C1})
        if prev0 is not None:
            ok0 = abs(C0 - prev0) <= rel_tol * max(abs(prev0), 1e-300)
            ok1 = abs(C1 - prev1) <= rel_tol * max(abs(prev1), 1e-300)
            if ok0 and ok1:
                bound = C0 ** (1.0 / pp) * C1 ** (1.0 / p)
                return SchurReport(C0=C0, C1=C1, bound=bound, p=p,
                                   converged=True, history=history,
                                   argmax={"C0_at": arg0, "C1_at": arg1})
        prev0, prev1 = C0, C1
        n *= 2
        n_theta = min(2 * n_theta, 256)
    raise NonConvergenceError(
        f"Schur sups did not stabilize: history {history}",
        best_estimate=prev0 ** (1.0 / pp) * prev1 ** (1.0 / p),
        error_estimate=float("inf"))


def schur_refinement_trend(kernel: Callable, weight: WeightSpec, p: float,
                           d: int, levels: int = 3, **kwargs) -> list[dict]:
    """C0/C1 across refinement levels without the stabilization gate.

    Used to exhibit divergence for weights outside their admissibility
    window: a sup that keeps growing under refinement.
    """
    pp = p / (p - 1.0)
    w_pos = lambda rx, ry, dist: weight(rx, ry, dist) ** (1.0 / p)
    w_neg = lambda rx, ry, dist: weight(rx, ry, dist) ** (-1.0 / pp)
    r_lo = kwargs.get("r_lo", 1.0 + 2.0 ** -12)
    r_hi = kwargs.get("r_hi", 2.0 ** 6)
    n = kwargs.get("n0", 128)
    n_theta = kwargs.get("n_theta", 32)
    rows = []
    for level in range(levels):
        grid = np.geomspace(1.0 + (r_lo - 1.0) * 4.0 ** -level,
                            r_hi * 4.0 ** level, n)
        C0, _a = _sup_integral(kernel, w_pos, d, grid, grid, n_theta)
        C1, _b = _sup_integral(lambda rx, ry, dist: kernel(ry, rx, dist),
                               lambda rx, ry, dist: w_neg(ry, rx, dist),
                               d, grid, grid, n_theta)
        rows.append({"n": n, "C0": C0, "C1": C1})
        n *= 2
        n_theta = min(2 * n_theta, 256)
    return rows


def schur_lower_bound(kernel: Callable, p: float, d: int,
                      r_lo: float = 1.0 + 2.0 ** -12, r_hi: float = 2.0 ** 6,
                      n: int = 384, n_theta: int = 48, n_trials: int = 100,
                      seed: int = 0) -> float:
    """Randomized empirical lower bound for the L^p operator norm of K.

    Draws nonnegative radial test functions on the grid and evaluates
    ||Kg||_p / ||g||_p by quadrature; any valid Schur bound must exceed the
    maximum over trials.
    """
    rng = np.random.default_rng(seed)
    grid = np.geomspace(r_lo, r_hi, n)
    ctheta, wtheta = _angular_nodes(d, n_theta)
    area = sphere_area(d) / math.sqrt(math.pi) * math.gamma(d / 2.0) \
        / math.gamma((d - 1) / 2.0)
    lg = np.log(grid)
    wr = np.gradient(lg) * grid ** d
    # radially reduced operator matrix T[i,j] ~ int over angle at (r_i, r_j)
    ro = grid[:, None, None]
    ri = grid[None, :, None]
    dist = np.sqrt(np.maximum(ro ** 2 + ri ** 2
                              - 2.0 * ro * ri * ctheta[None, None, :], 0.0))
    T = area * np.einsum("ijk,k->ij", kernel(ro, ri, dist), wtheta)
    meas = sphere_area(d) * np.gradient(lg) * grid ** d  # L^p grid measure
    best = 0.0
    for _ in range(n_trials):
        # random log-normal bumps: nonnegative, varied concentration
        c = rng.uniform(math.log(r_lo), math.log(r_hi))
        width = 10 ** rng.uniform(-1.5, 0.5)
        g = np.exp(-((lg - c) / width) ** 2) * rng.uniform(0.2, 1.0)
        Tg = T @ (g * wr)
        num = float(np.sum(meas * np.abs(Tg) ** p)) ** (1.0 / p)
        den = float(np.sum(meas * g ** p)) ** (1.0 / p)
        if den > 0:
            best = max(best, num / den)
    return best


# -- norm equivalence ----------------------------------------------------------------

def norm_equivalence_ratio(f: RadialFunction, s: float, p: float,
                           r_max: float = 64.0) -> NormReport:
    """|| (-Lap_{R^d})^{s/2} f ||_p / || (-Lap_Omega)^{s/2} f ||_p.

    f must be supported in the exterior ball; its zero extension across the
    obstacle boundary is smooth, so both fractional powers act on the same
    test function.
    """
    if f.support[0] <= 1.0:
        raise InvalidArgumentError("f must be supported in r > 1")
    if s == 0:
        return NormReport(p=p, s=0.0, operator="norm_equivalence_ratio",
                          value=1.0)
    d = f.d
    whole = frac_power(s, f, DomainSpec(DomainKind.WHOLE_SPACE, d))
    ext = frac_power(s, f, DomainSpec(DomainKind.EXTERIOR_BALL, d))
    num = lp_norm_radial(whole, p, RadialMeasure(d, 0.0), r_max=r_max)
    den = lp_norm_radial(ext, p, RadialMeasure(d, 1.0), r_max=r_max)
    value = num.value / den.value
    return NormReport(p=p, s=s, operator="norm_equivalence_ratio", value=value,
                      error=value * (num.error / max(num.value, 1e-300)
                                     + den.error / max(den.value, 1e-300)),
                      details={"numerator": num.value, "denominator": den.value})
