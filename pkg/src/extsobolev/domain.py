"""Core value types: domains, radial functions, kernel samples, norm reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError


class DomainKind(str, Enum):
    WHOLE_SPACE = "whole-space"
    HALF_SPACE = "half-space"
    EXTERIOR_BALL = "exterior-ball"


@dataclass(frozen=True)
class DomainSpec:
    """A computational domain: all of R^d, a half-space, or the exterior of the unit ball.

    For the exterior ball the obstacle is the closed unit ball, so
    dist(x, obstacle) = |x| - 1 and diam(obstacle) = 2.
    """

    kind: DomainKind
    d: int

    def __post_init__(self):
        if self.d < 3:
            raise InvalidArgumentError(f"dimension must be >= 3, got {self.d}")

    @property
    def inner_radius(self) -> float:
        """Lower endpoint of the radial coordinate."""
        return 1.0 if self.kind == DomainKind.EXTERIOR_BALL else 0.0

    @property
    def obstacle_diameter(self) -> float:
        if self.kind != DomainKind.EXTERIOR_BALL:
            raise InvalidArgumentError("only the exterior ball has an obstacle")
        return 2.0

    def boundary_distance(self, r):
        """dist(x, obstacle) for |x| = r (exterior ball only)."""
        if self.kind != DomainKind.EXTERIOR_BALL:
            raise InvalidArgumentError("only the exterior ball has an obstacle")
        return np.asarray(r, dtype=float) - 1.0


def whole_space(d: int = 3) -> DomainSpec:
    return DomainSpec(DomainKind.WHOLE_SPACE, d)


def exterior_ball(d: int = 3) -> DomainSpec:
    return DomainSpec(DomainKind.EXTERIOR_BALL, d)


@dataclass
class RadialFunction:
    """A radial profile f(r) in a fixed angular-momentum sector.

    ``func`` must accept numpy arrays.  ``support`` is a (lo, hi) hint for
    quadrature; ``hi`` may be ``inf`` for slowly decaying profiles, in which
    case ``decay`` names the tail class (``"gaussian"``, ``"power"`` or
    ``"oscillatory"``).
    """

    func: Callable[[np.ndarray], np.ndarray]
    d: int = 3
    ell: int = 0
    support: tuple[float, float] = (0.0, np.inf)
    decay: Optional[str] = None
    label: str = ""

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return self.func(r)

    def scaled(self, c: float) -> "RadialFunction":
        return RadialFunction(
            func=lambda r, _f=self.func: c * _f(r),
            d=self.d, ell=self.ell, support=self.support,
            decay=self.decay, label=f"{c}*{self.label}",
        )

    def __add__(self, other: "RadialFunction") -> "RadialFunction":
        if (self.d, self.ell) != (other.d, other.ell):
            raise InvalidArgumentError("sector mismatch in RadialFunction addition")
        lo = min(self.support[0], other.support[0])
        hi = max(self.support[1], other.support[1])
        return RadialFunction(
            func=lambda r, f=self.func, g=other.func: f(r) + g(r),
            d=self.d, ell=self.ell, support=(lo, hi), decay=self.decay,
        )

    def __sub__(self, other: "RadialFunction") -> "RadialFunction":
        return self + other.scaled(-1.0)


@dataclass
class KernelSample:
    """One kernel evaluation with its quadrature-error estimate."""

    geometry: dict
    t: float
    value: float
    err: float = 0.0

    def __post_init__(self):
        if self.t < 0:
            raise InvalidArgumentError(f"t must be positive, got {self.t}")


@dataclass
class NormReport:
    """The unit every experiment emits: one norm (or ratio) with provenance."""

    p: float
    s: float
    operator: str
    value: float
    error: float = 0.0
    diverged: bool = False
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "p": self.p, "s": self.s, "operator": self.operator,
            "value": self.value, "error": self.error,
            "diverged": self.diverged, "details": self.details,
        }


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    import math
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)
