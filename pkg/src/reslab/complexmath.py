"""Shared numerical kernels: polynomial roots, zero counting and quadrature."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_laguerre, roots_legendre

from reslab import kernels

EPS = np.finfo(float).eps
MERGE_RTOL = 1e-7


class RootFindingError(RuntimeError):
    """Simultaneous iteration failed; carries the best iterate and its residual."""

    def __init__(self, message, best, residual):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BoundaryTooCloseError(RuntimeError):
    """A zero sits too close to the counting contour for a reliable winding number."""


@dataclass(frozen=True, eq=False)
class ComplexPolynomial:
    """p(x) = sum_k c_k (x/scale)^k with coefficients in ascending order.

    The scale lets badly balanced polynomials be stored with moderate
    coefficients; roots are always reported in the unscaled variable x.
    """

    coefficients: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex)).copy()
        nz = np.flatnonzero(c != 0)
        c = c[: nz[-1] + 1] if nz.size else c[:1]
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def degree(self) -> int:
        return self.coefficients.size - 1

    @property
    def max_coefficient(self) -> float:
        return float(np.abs(self.coefficients).max())

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: complex = 1.0) -> "ComplexPolynomial":
        c = np.array([leading], dtype=complex)
        for r in roots:
            c = np.concatenate([[0], c]) - r * np.concatenate([c, [0]])
        return cls(c)

    def monic(self) -> "ComplexPolynomial":
        """Monic polynomial in the unscaled variable."""
        k = np.arange(self.degree + 1)
        c = self.coefficients * self.scale ** (self.degree - k.astype(float))
        return ComplexPolynomial(c / c[-1])

    def __call__(self, x):
        y = np.asarray(x, dtype=complex) / self.scale
        out = np.zeros_like(y)
        for c in self.coefficients[::-1]:
            out = out * y + c
        return out

    def newton_ratio(self, x):
        """p(x)/p'(x) in the unscaled variable, stable for large |x|."""
        x = np.asarray(x, dtype=complex)
        shape = x.shape
        r = kernels.horner_ratio(self.coefficients, x.ravel() / self.scale) * self.scale
        return r.reshape(shape)

    def residual_bound(self, x, tol: float):
        """The acceptance threshold tol * max|c| * (1 + |y|)^degree, y = x/scale."""
        y = np.abs(np.asarray(x)) / self.scale
        with np.errstate(over="ignore"):
            return tol * self.max_coefficient * (1.0 + y) ** self.degree


def circle_start(p: ComplexPolynomial) -> np.ndarray:
    """Initial guesses on a circle of radius 1 + max |c_k / c_n| (scaled variable)."""
    c = p.coefficients
    radius = 1.0 + float(np.abs(c[:-1] / c[-1]).max()) if p.degree else 1.0
    n = p.degree
    return p.scale * radius * np.exp(1j * (2 * np.pi * np.arange(n) / n + 0.4))


def aberth(ratio: Callable, start: np.ndarray, max_iter: int = 500, rtol: float = 4 * EPS):
    """Aberth-Ehrlich simultaneous iteration.

    Returns (roots, converged_mask, iterations). A root is frozen once its
    correction falls below rtol*|z| or stops shrinking.
    """
    z = np.array(start, dtype=complex)
    n = z.size
    done = np.zeros(n, dtype=bool)
    last = np.full(n, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        active = ~done
        with np.errstate(all="ignore"):
            nr = ratio(z[active])
            w = kernels.aberth_corrections(z, nr, active)
        bad = ~np.isfinite(w)
        if bad.any():
            # colliding iterates or a pole of the ratio: nudge the root off the spot
            idx = np.flatnonzero(active)[bad]
            nudge = 1e-6 * (1.0 + np.abs(z[idx])) * np.exp(1j * (idx + 0.5))
            w = np.where(bad, 0.0, w)
            w[bad] = -nudge
        z[active] = z[active] - w
        step = np.abs(w)
        small = step <= rtol * np.maximum(np.abs(z[active]), EPS)
        # once the correction is at rounding level it can only jitter
        stalled = (step >= last[active]) & (step <= 1e3 * EPS * np.maximum(np.abs(z[active]), 1.0))
        last[active] = step
        # a non-finite correction leaves the root unconverged so the caller fails loudly
        done[active] = (small | stalled) & ~bad
        if done.all():
            break
    return z, done, it


def newton_polish(ratio: Callable, z: np.ndarray, steps: int = 2) -> np.ndarray:
    """A few Newton steps per root, each kept only if it shrinks the correction."""
    z = np.array(z, dtype=complex)
    with np.errstate(all="ignore"):
        w = ratio(z)
        for _ in range(steps):
            ok = np.isfinite(w)
            trial = np.where(ok, z - w, z)
            w2 = ratio(trial)
            better = ok & np.isfinite(w2) & (np.abs(w2) <= np.abs(w))
            z = np.where(better, trial, z)
            w = np.where(better, w2, w)
    return z


def merge_close_roots(roots: np.ndarray, rtol: float = MERGE_RTOL):
    """Group roots closer than rtol*(1+|r|); returns [(root, multiplicity)]."""
    roots = np.asarray(roots, dtype=complex)
    unused = list(range(roots.size))
    groups = []
    while unused:
        i = unused.pop(0)
        members = [i]
        for j in list(unused):
            if abs(roots[j] - roots[i]) < rtol * (1 + abs(roots[i])):
                members.append(j)
                unused.remove(j)
        groups.append((complex(roots[members].mean()), len(members)))
    return groups


def find_all_roots(
    p: ComplexPolynomial,
    tol: float = 1e-10,
    *,
    ratio: Optional[Callable] = None,
    initial: Optional[np.ndarray] = None,
    max_iter: int = 500,
) -> np.ndarray:
    """All roots of p counted with multiplicity.

    ``ratio`` may supply a numerically stable p/p' (for example from special
    functions) that replaces Horner evaluation; ``initial`` replaces the
    default circle of starting points.
    """
    if p.degree < 1:
        raise ValueError("polynomial must have degree >= 1")
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    c = p.coefficients
    zeros_at_origin = int(np.flatnonzero(c != 0)[0])
    if zeros_at_origin and ratio is None:
        reduced = ComplexPolynomial(c[zeros_at_origin:], p.scale)
        rest = find_all_roots(reduced, tol, max_iter=max_iter) if reduced.degree else np.array([], complex)
        return np.concatenate([np.zeros(zeros_at_origin, complex), rest])
    nr = ratio if ratio is not None else p.newton_ratio
    start = circle_start(p) if initial is None else np.asarray(initial, dtype=complex)
    if start.size != p.degree:
        raise ValueError("need exactly one starting point per root")
    z, done, _ = aberth(nr, start, max_iter=max_iter)
    z = newton_polish(nr, z)
    grouped = merge_close_roots(z)
    roots = np.array([r for r, m in grouped for _ in range(m)], dtype=complex)
    res = np.abs(p(roots))
    bound = p.residual_bound(roots, tol)
    if not (done.all() and np.all(np.isfinite(roots)) and np.all(res <= bound)):
        worst = float(np.max(res / np.where(bound > 0, bound, 1.0))) if np.all(np.isfinite(res)) else math.inf
        raise RootFindingError(
            f"root finder did not converge (worst residual/bound {worst:.3g})", roots, res
        )
    return roots


def _rectangle_nodes(rect, n_boundary):
    x0, x1, y0, y1 = rect
    if not (x1 > x0 and y1 > y0):
        raise ValueError("rectangle must have positive width and height")
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    lengths = [x1 - x0, y1 - y0, x1 - x0, y1 - y0]
    per = sum(lengths)
    pts = []
    for k in range(4):
        a, b = corners[k], corners[(k + 1) % 4]
        m = max(8, int(round(n_boundary * lengths[k] / per)))
        pts.append(a + (b - a) * np.arange(m) / m)
    return np.concatenate(pts)


def _closed_trapezoid(g, z):
    dz = np.roll(z, -1) - z
    return np.sum(0.5 * (g + np.roll(g, -1)) * dz)


def count_zeros_in_rectangle(
    f: Optional[Callable],
    rect: Sequence[float],
    n_boundary: int = 2000,
    *,
    logderiv: Optional[Callable] = None,
) -> int:
    """Number of zeros (with multiplicity) of an analytic f inside rect.

    rect is (xmin, xmax, ymin, ymax). The winding number is (1/2 pi i) times
    the trapezoid value of the contour integral of f'/f, with f' from a central
    difference unless ``logderiv`` supplies f'/f directly.
    """
    if f is None and logderiv is None:
        raise ValueError("need f or logderiv")
    z = _rectangle_nodes(rect, n_boundary)
    scale = max(rect[1] - rect[0], rect[3] - rect[2])
    with np.errstate(all="ignore"):
        if logderiv is not None:
            g = np.asarray(logderiv(z), dtype=complex)
            closeness = 1.0 / np.max(np.abs(g)) / scale
        else:
            h = 1e-6 * scale
            fz = np.asarray(f(z), dtype=complex)
            df = (np.asarray(f(z + h), dtype=complex) - np.asarray(f(z - h), dtype=complex)) / (2 * h)
            g = df / fz
            absf = np.abs(fz)
            closeness = np.min(absf) / np.max(absf)
    if not np.all(np.isfinite(g)):
        raise BoundaryTooCloseError("integrand not finite on the contour")
    full = _closed_trapezoid(g, z) / (2j * np.pi)
    half = _closed_trapezoid(g[::2], z[::2]) / (2j * np.pi)
    err = abs(full - half)
    nearest = round(full.real)
    if closeness <= 10 * err or abs(full - nearest) > 0.25:
        raise BoundaryTooCloseError(
            f"winding number {full:.4f} unreliable (error estimate {err:.2e}, closeness {closeness:.2e})"
        )
    return int(nearest)


# quadrature ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights together with how they were built.

    kind is "legendre" (composite Gauss-Legendre on [a, b]) or "semi-infinite"
    (optional Legendre section on [a, a+split] followed by a Gauss-Laguerre
    tail weighted by exp(-decay*(t - a - split))).
    """

    kind: str
    a: float
    b: float
    n: int
    panels: int = 1
    decay: float = 1.0
    split: float = 0.0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == "legendre":
            x, w = _composite_legendre(self.a, self.b, self.n, self.panels)
        elif self.kind == "semi-infinite":
            if not self.decay > 0:
                raise ValueError("decay rate must be positive")
            xs, ws = [], []
            if self.split > 0:
                x, w = _composite_legendre(self.a, self.a + self.split, self.n, self.panels)
                xs.append(x)
                ws.append(w)
            x, w = _laguerre(self.a + self.split, self.n, self.decay)
            xs.append(x)
            ws.append(w)
            x, w = np.concatenate(xs), np.concatenate(ws)
        else:
            raise ValueError(f"unknown quadrature kind {self.kind!r}")
        keep = w > 0
        object.__setattr__(self, "nodes", x[keep])
        object.__setattr__(self, "weights", w[keep])

    def refined(self) -> "QuadratureRule":
        """Same rule with the node count per panel doubled."""
        return QuadratureRule(self.kind, self.a, self.b, 2 * self.n, self.panels, self.decay, self.split)

    def apply(self, f: Callable) -> tuple:
        vals = np.asarray(f(self.nodes))
        if not np.all(np.isfinite(vals)):
            raise ValueError("integrand returned non-finite values")
        return np.sum(self.weights * vals), np.sum(self.weights * np.abs(vals))


def _composite_legendre(a, b, n, panels):
    x, w = roots_legendre(n)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


MAX_LAGUERRE = 64


def _laguerre(a, n, decay):
    x, w = roots_laguerre(min(n, MAX_LAGUERRE))
    with np.errstate(divide="ignore"):
        weights = np.exp(np.log(w) + x) / decay
    return a + x / decay, weights


def gauss_legendre_rule(a: float, b: float, n: int = 16, panels: int = 1) -> QuadratureRule:
    return QuadratureRule("legendre", float(a), float(b), int(n), int(panels))


def semi_infinite_rule(a: float, n: int = 32, decay: float = 1.0, split: float = 0.0, panels: int = 1) -> QuadratureRule:
    return QuadratureRule("semi-infinite", float(a), math.inf, int(n), int(panels), float(decay), float(split))


@dataclass(frozen=True)
class QuadratureResult:
    value: complex
    error: float
    nodes: int


def _error_floor(abs_sum):
    # 128 ulp of the magnitude, snapped to a power of two so that it does not
    # jitter between refinements once the rule is exact
    if abs_sum <= 0:
        return 0.0
    return 128 * EPS * 2.0 ** round(math.log2(abs_sum))


def integrate(f: Callable, rule: QuadratureRule) -> QuadratureResult:
    """Apply rule and its refinement; the error estimate is their difference."""
    coarse, _ = rule.apply(f)
    fine_rule = rule.refined()
    fine, abs_sum = fine_rule.apply(f)
    err = max(abs(fine - coarse), _error_floor(float(abs_sum)))
    value = complex(fine) if np.iscomplexobj(fine) else float(fine)
    return QuadratureResult(value, float(err), int(fine_rule.nodes.size))


def integrate_adaptive(f: Callable, rule: QuadratureRule, rtol: float = 1e-12, max_doublings: int = 6) -> QuadratureResult:
    """Double the rule until the estimated relative error drops below rtol."""
    res = integrate(f, rule)
    for _ in range(max_doublings):
        if res.error <= rtol * abs(res.value) or res.error <= _error_floor(abs(res.value)):
            return res
        rule = rule.refined()
        res = integrate(f, rule)
    if res.error > rtol * abs(res.value):
        raise ArithmeticError(f"quadrature did not converge: value {res.value}, error {res.error:.3g}")
    return res
