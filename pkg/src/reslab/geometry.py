"""Curvature data of strictly convex obstacles and the band constants.

kappa = 2^{-1/3} cos(pi/6) (min Q)^{2/3},  K = 2^{-1/3} cos(pi/6) (max Q)^{2/3},

where Q is the second fundamental form on the unit sphere bundle of the
boundary. j0 is the largest index such that max Q / min Q is below
(zeta'_{i+1} / zeta'_i)^{3/2} for every i <= j0.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import gammaln, roots_legendre

BAND_FACTOR = 2.0 ** (-1.0 / 3.0) * math.cos(math.pi / 6.0)
ASPECT_WARN = 1e3
KINDS = ("sphere", "ellipsoid", "explicit")


class ConditioningWarning(UserWarning):
    """Semi-axes so unequal that sampled curvature extremes are unreliable."""


def sphere_area(radius: float, dimension: int = 3) -> float:
    """Area of the round sphere of given radius in R^dimension."""
    n = dimension
    return float(math.exp(math.log(2.0) + 0.5 * n * math.log(math.pi) - gammaln(0.5 * n)) * radius ** (n - 1))


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in R^dim."""
    return float(math.exp(0.5 * dim * math.log(math.pi) - gammaln(0.5 * dim + 1.0)))


def ellipsoid_area(semi_axes: Sequence[float], n: int = 64) -> float:
    """Surface area by Gauss-Legendre in cos(theta) and the trapezoid rule in phi.

    The integrand is smooth and periodic in phi, so both rules converge fast;
    the node count is doubled until two results agree to 1e-12 relative.
    """
    a, b, c = (float(s) for s in semi_axes)

    def area(m):
        u, wu = roots_legendre(m)
        phi = 2 * np.pi * np.arange(2 * m) / (2 * m)
        U, P = np.meshgrid(u, phi, indexing="ij")
        s = np.sqrt(1 - U ** 2)
        # |r_u x r_phi| for r = (a s cos phi, b s sin phi, c u), u = cos(theta)
        nx = b * c * s * np.cos(P)
        ny = a * c * s * np.sin(P)
        nz = a * b * U
        dens = np.sqrt(nx ** 2 + ny ** 2 + nz ** 2)
        return float(np.sum(wu[:, None] * dens) * (2 * np.pi / (2 * m)))

    prev = area(n)
    for _ in range(8):
        n *= 2
        cur = area(n)
        if abs(cur - prev) <= 1e-12 * cur:
            return cur
        prev = cur
    return prev


@dataclass(frozen=True)
class ObstacleModel:
    """A strictly convex obstacle.

    kind "sphere" uses radius; "ellipsoid" uses semi_axes (sorted so that
    a >= b >= c, dimension 3); "explicit" takes Qmin, Qmax and surface_area
    as given.
    """

    kind: str
    radius: Optional[float] = None
    semi_axes: Optional[Tuple[float, float, float]] = None
    Qmin: Optional[float] = None
    Qmax: Optional[float] = None
    surface_area: Optional[float] = None
    dimension: int = 3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        if self.dimension < 2:
            raise ValueError("dimension must be at least 2")
        if self.kind == "sphere":
            if self.radius is None or not self.radius > 0:
                raise ValueError("sphere needs a positive radius")
            object.__setattr__(self, "surface_area", sphere_area(self.radius, self.dimension))
        elif self.kind == "ellipsoid":
            if self.dimension != 3:
                raise ValueError("ellipsoids are supported in dimension 3 only")
            axes = tuple(sorted((float(s) for s in (self.semi_axes or ())), reverse=True))
            if len(axes) != 3 or not axes[-1] > 0:
                raise ValueError("ellipsoid needs three positive semi-axes")
            object.__setattr__(self, "semi_axes", axes)
            if axes[0] / axes[-1] > ASPECT_WARN:
                warnings.warn("semi-axis ratio above 1e3; curvature extremes poorly conditioned", ConditioningWarning)
            object.__setattr__(self, "surface_area", ellipsoid_area(axes))
        else:
            if self.Qmin is None or self.Qmax is None:
                raise ValueError("explicit obstacle needs Qmin and Qmax")
            if not self.Qmin > 0:
                raise ValueError("obstacle must be strictly convex (Qmin > 0)")
            if not self.Qmin <= self.Qmax:
                raise ValueError("Qmin must not exceed Qmax")
            if self.surface_area is None or not self.surface_area > 0:
                raise ValueError("explicit obstacle needs a positive surface_area")

    @classmethod
    def sphere(cls, radius: float = 1.0, dimension: int = 3) -> "ObstacleModel":
        return cls("sphere", radius=float(radius), dimension=int(dimension))

    @classmethod
    def ellipsoid(cls, a: float, b: float, c: float) -> "ObstacleModel":
        return cls("ellipsoid", semi_axes=(a, b, c))

    @classmethod
    def explicit(cls, Qmin: float, Qmax: float, surface_area: float = 4 * math.pi, dimension: int = 3) -> "ObstacleModel":
        return cls("explicit", Qmin=float(Qmin), Qmax=float(Qmax), surface_area=float(surface_area), dimension=int(dimension))

    @classmethod
    def from_dict(cls, d: dict) -> "ObstacleModel":
        kind = d.get("kind")
        dim = int(d.get("dimension", 3))
        if kind == "sphere":
            return cls.sphere(float(d.get("radius", 1.0)), dim)
        if kind == "ellipsoid":
            axes = d.get("semi_axes")
            if not isinstance(axes, (list, tuple)) or len(axes) != 3:
                raise ValueError("ellipsoid config needs semi_axes: [a, b, c]")
            return cls.ellipsoid(*(float(x) for x in axes))
        if kind == "explicit":
            return cls.explicit(
                float(d["Qmin"]), float(d["Qmax"]), float(d.get("surface_area", 4 * math.pi)), dim
            )
        raise ValueError(f"unknown obstacle kind {kind!r}")

    @classmethod
    def from_json(cls, text: str) -> "ObstacleModel":
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "dimension": self.dimension, "surface_area": self.surface_area}
        if self.kind == "sphere":
            d["radius"] = self.radius
        elif self.kind == "ellipsoid":
            d["semi_axes"] = list(self.semi_axes)
        else:
            d["Qmin"], d["Qmax"] = self.Qmin, self.Qmax
        return d

    def dilated(self, s: float) -> "ObstacleModel":
        """The obstacle scaled by s > 0."""
        if not s > 0:
            raise ValueError("scale must be positive")
        if self.kind == "sphere":
            return ObstacleModel.sphere(self.radius * s, self.dimension)
        if self.kind == "ellipsoid":
            return ObstacleModel.ellipsoid(*(x * s for x in self.semi_axes))
        return ObstacleModel.explicit(self.Qmin / s, self.Qmax / s, self.surface_area * s ** (self.dimension - 1), self.dimension)


# curvature of ellipsoids ----------------------------------------------------------


def ellipsoid_principal_curvatures(semi_axes: Sequence[float], points: np.ndarray) -> np.ndarray:
    """Principal curvatures at boundary points, shape (m, 2), ascending.

    With F(x) = sum x_i^2 / a_i^2 - 1 the shape operator is the Hessian of F
    restricted to the tangent plane divided by |grad F|.
    """
    inv = 1.0 / np.asarray(semi_axes, dtype=float) ** 2
    p = np.atleast_2d(points)
    g = p * inv
    gn = np.linalg.norm(g, axis=1)
    n = g / gn[:, None]
    # orthonormal tangent frame
    helper = np.where(np.abs(n[:, :1]) < 0.9, np.array([[1.0, 0, 0]]), np.array([[0, 1.0, 0]]))
    t1 = np.cross(n, helper)
    t1 /= np.linalg.norm(t1, axis=1)[:, None]
    t2 = np.cross(n, t1)
    m11 = np.sum(t1 * t1 * inv, axis=1) / gn
    m12 = np.sum(t1 * t2 * inv, axis=1) / gn
    m22 = np.sum(t2 * t2 * inv, axis=1) / gn
    mean = 0.5 * (m11 + m22)
    rad = np.sqrt((0.5 * (m11 - m22)) ** 2 + m12 ** 2)
    return np.stack([mean - rad, mean + rad], axis=1)


def _surface_point(axes, angles):
    th, ph = angles[..., 0], angles[..., 1]
    s = np.sin(th)
    return np.stack([axes[0] * s * np.cos(ph), axes[1] * s * np.sin(ph), axes[2] * np.cos(th)], axis=-1)


def _fibonacci_angles(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    th = np.arccos(1 - 2 * k / n)
    ph = np.pi * (1 + 5 ** 0.5) * k
    return np.stack([th, np.mod(ph, 2 * np.pi)], axis=1)


@dataclass(frozen=True)
class CurvatureSurvey:
    """Extremes of Q with the change made by local refinement as error bound."""

    Qmin: float
    Qmax: float
    resolution: float
    samples: int


def curvature_survey(model: ObstacleModel, n_samples: int = 10_000) -> CurvatureSurvey:
    if model.kind == "sphere":
        q = 1.0 / model.radius
        return CurvatureSurvey(q, q, 0.0, 0)
    if model.kind == "explicit":
        return CurvatureSurvey(model.Qmin, model.Qmax, 0.0, 0)
    if n_samples < 10_000:
        raise ValueError("ellipsoid surveys need at least 1e4 samples")
    axes = np.array(model.semi_axes)
    ang = _fibonacci_angles(int(n_samples))
    k = ellipsoid_principal_curvatures(axes, _surface_point(axes, ang))
    i_min, i_max = int(np.argmin(k[:, 0])), int(np.argmax(k[:, 1]))
    sampled_min, sampled_max = float(k[i_min, 0]), float(k[i_max, 1])

    def kmin(x):
        return float(ellipsoid_principal_curvatures(axes, _surface_point(axes, np.asarray(x)[None, :]))[0, 0])

    def kmax(x):
        return -float(ellipsoid_principal_curvatures(axes, _surface_point(axes, np.asarray(x)[None, :]))[0, 1])

    opts = {"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000}
    qmin = min(sampled_min, float(minimize(kmin, ang[i_min], method="Nelder-Mead", options=opts).fun))
    qmax = max(sampled_max, -float(minimize(kmax, ang[i_max], method="Nelder-Mead", options=opts).fun))
    resolution = max(sampled_min - qmin, qmax - sampled_max)
    return CurvatureSurvey(qmin, qmax, resolution, int(n_samples))


def curvature_extremes(model: ObstacleModel, n_samples: int = 10_000) -> Tuple[float, float]:
    """(min Q, max Q) over unit tangent vectors of the boundary."""
    s = curvature_survey(model, n_samples)
    return s.Qmin, s.Qmax


# band constants -------------------------------------------------------------------


def pinched_ratios(zeros: np.ndarray) -> np.ndarray:
    """(z_{j+1} / z_j)^{3/2} for j = 1..len(zeros) - 1."""
    z = np.asarray(zeros, dtype=float)
    return (z[1:] / z[:-1]) ** 1.5


def pinched_index(curvature_ratio: float, zeros: np.ndarray) -> int:
    """Largest j with curvature_ratio < (z_{i+1}/z_i)^{3/2} for all i <= j (0 if none)."""
    ok = curvature_ratio < pinched_ratios(zeros)
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if bad.size else int(ok.size)


@dataclass(frozen=True)
class BandConstants:
    kappa: float
    K_const: float
    j0: int
    Qmin: float
    Qmax: float
    pinched: Tuple[bool, ...] = field(default=(), repr=False)

    @property
    def curvature_ratio(self) -> float:
        return self.Qmax / self.Qmin

    def pinched_at(self, j: int) -> bool:
        """The single-index condition max Q / min Q < (zeta'_{j+1}/zeta'_j)^{3/2}."""
        return bool(self.pinched[j - 1])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pinched"] = [bool(x) for x in self.pinched]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def constants_from_curvature(Qmin: float, Qmax: float, zeros_prime: np.ndarray) -> BandConstants:
    if not 0 < Qmin <= Qmax:
        raise ValueError("need 0 < Qmin <= Qmax")
    kappa = BAND_FACTOR * Qmin ** (2.0 / 3.0)
    K = BAND_FACTOR * Qmax ** (2.0 / 3.0)
    ratio = Qmax / Qmin
    flags = tuple(bool(x) for x in ratio < pinched_ratios(zeros_prime))
    return BandConstants(kappa, K, pinched_index(ratio, zeros_prime), Qmin, Qmax, flags)


def band_constants(model: ObstacleModel, zero_table, n_samples: int = 10_000) -> BandConstants:
    """kappa, K and j0 for the obstacle, using the Ai' zeros of zero_table."""
    qmin, qmax = curvature_extremes(model, n_samples)
    if model.kind == "sphere":
        # exact equality so that kappa == K bit for bit
        qmax = qmin
    return constants_from_curvature(qmin, qmax, np.asarray(zero_table.zeros_ai_prime))
