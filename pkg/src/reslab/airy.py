"""Airy functions on the complex plane, their negated zeros, the Neumann
eigenfunctions of D_t^2 + t on the half line and the Poisson functions."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import roots_legendre

from reslab import kernels
from reslab.complexmath import (
    gauss_legendre_rule,
    integrate,
    integrate_adaptive,
    semi_infinite_rule,
)

OMEGA = np.exp(2j * np.pi / 3)
MAX_ABS_Z = 1e4
OVERFLOW_EXPONENT = 700.0
AI_0 = kernels._pykernels.AI0
AIP_0 = kernels._pykernels.AIP0


class ScaledAiry(NamedTuple):
    """Ai(z) = ai * exp(exponent) and Ai'(z) = aip * exp(exponent)."""

    ai: complex
    aip: complex
    exponent: complex


def zeta(z):
    """(2/3) z^{3/2} on the principal branch (positive on the positive axis)."""
    return kernels.zeta(np.asarray(z, dtype=complex))


def airy_scaled(z):
    """Return (Ai e^zeta, Ai' e^zeta, zeta) elementwise, keeping the input shape."""
    z = np.asarray(z, dtype=complex)
    ai, aip = kernels.airy_scaled(z.ravel())
    return ai.reshape(z.shape), aip.reshape(z.shape), zeta(z)


def airy(z):
    """Return (Ai(z), Ai'(z)) elementwise; may overflow far from the origin."""
    ai, aip, ze = airy_scaled(z)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        e = np.exp(-ze)
        return ai * e, aip * e


def airy_real(t):
    """Ai and Ai' at real arguments, as real arrays."""
    ai, aip = airy(np.asarray(t, dtype=float))
    return ai.real, aip.real


def airy_ai(z: complex):
    """Ai(z) and Ai'(z) at a single point with |z| <= 1e4.

    Returns a plain (Ai, Ai') tuple, or a ScaledAiry when |Re zeta| > 700
    so that the caller can keep working with the exponent separately.
    """
    z = complex(z)
    if abs(z) > MAX_ABS_Z:
        raise ValueError("airy_ai is only supported for |z| <= 1e4")
    ai, aip, ze = airy_scaled(np.array([z]))
    ai, aip, ze = complex(ai[0]), complex(aip[0]), complex(ze[0])
    if abs(ze.real) > OVERFLOW_EXPONENT:
        return ScaledAiry(ai, aip, -ze)
    e = np.exp(-ze)
    return ai * e, aip * e


# zeros -------------------------------------------------------------------------


def _newton_zeros(seed, derivative_zero: bool, lo, hi):
    """Newton on x -> Ai(-x) or Ai'(-x); bisection where Newton leaves [lo, hi]."""
    x = np.array(seed, dtype=float)
    for _ in range(30):
        ai, aip = airy_real(-x)
        if derivative_zero:
            # d/dx Ai'(-x) = -Ai''(-x) = x Ai(-x)
            step = aip / (x * ai)
        else:
            # d/dx Ai(-x) = -Ai'(-x)
            step = -ai / aip
        x = x - step
        if np.all(np.abs(step) <= 2e-16 * x):
            break
    bad = ~((x > lo) & (x < hi) & np.isfinite(x))
    for i in np.flatnonzero(bad):
        x[i] = _bisect(lambda s: airy_real(-s)[1 if derivative_zero else 0], lo[i], hi[i])
    return x


def _bisect(g, lo, hi):
    glo = g(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if np.sign(gm) == np.sign(glo):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo <= 4e-16 * hi:
            break
    return 0.5 * (lo + hi)


def zero_seed_ai(j):
    """Stokes-phase seed ((3/2)(j - 1/4) pi)^{2/3} for the j-th negated zero of Ai."""
    return (1.5 * (np.asarray(j, dtype=float) - 0.25) * np.pi) ** (2.0 / 3.0)


def zero_seed_ai_prime(j):
    """Seed ((3/2)(j - 3/4) pi)^{2/3} for the j-th negated zero of Ai'."""
    return (1.5 * (np.asarray(j, dtype=float) - 0.75) * np.pi) ** (2.0 / 3.0)


def leading_zero_asymptotic(j):
    """((3/2) j pi)^{2/3}: the leading-order size of both zero sequences."""
    return (1.5 * np.asarray(j, dtype=float) * np.pi) ** (2.0 / 3.0)


@dataclass(frozen=True, eq=False)
class AiryZeroTable:
    """Negated zeros of Ai and Ai' with boundary data of the Neumann basis.

    zeros_ai[j-1] = zeta_j, zeros_ai_prime[j-1] = zeta'_j,
    norms[j-1] = ||Ai||_{L^2(-zeta'_j, inf)} and
    boundary_values[j-1] = e_j(0) = Ai(-zeta'_j) / norms[j-1].
    """

    zeros_ai: np.ndarray
    zeros_ai_prime: np.ndarray
    boundary_values: np.ndarray
    norms: np.ndarray
    norm_errors: np.ndarray

    @property
    def count(self) -> int:
        return int(self.zeros_ai.size)

    def zeta(self, j: int) -> float:
        return float(self.zeros_ai[j - 1])

    def zeta_prime(self, j: int) -> float:
        return float(self.zeros_ai_prime[j - 1])

    def asymptotic_ratio(self) -> np.ndarray:
        """zeta'_j / ((3/2) j pi)^{2/3} for every j."""
        return self.zeros_ai_prime / leading_zero_asymptotic(np.arange(1, self.count + 1))

    def residuals(self):
        """(|Ai(-zeta_j)|, |Ai'(-zeta'_j)|) for every j."""
        return np.abs(airy_real(-self.zeros_ai)[0]), np.abs(airy_real(-self.zeros_ai_prime)[1])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["j", "zeta_j", "zeta_prime_j", "e_j_0", "norm_j", "asymptotic_ratio"])
        ratio = self.asymptotic_ratio()
        for j in range(self.count):
            w.writerow(
                [j + 1]
                + [
                    f"{v:.17g}"
                    for v in (
                        self.zeros_ai[j],
                        self.zeros_ai_prime[j],
                        self.boundary_values[j],
                        self.norms[j],
                        ratio[j],
                    )
                ]
            )
        return buf.getvalue()


def _ai_squared(t):
    a = airy_real(t)[0]
    return a * a


def _norm_squares(zp):
    """||Ai||^2 on (-zeta'_j, inf) by Gauss-Legendre between consecutive zeros."""
    tail = integrate(_ai_squared, semi_infinite_rule(0.0, 32, decay=6.0, split=8.0, panels=8))
    first = integrate(_ai_squared, gauss_legendre_rule(-zp[0], 0.0, 24, panels=2))
    edges = -zp
    n = 24

    def panel_sums(order):
        x, w = roots_legendre(order)
        a, b = edges[1:], edges[:-1]
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        # two sub-panels per interval between consecutive zeros of Ai'
        vals = 0.0
        for sub in (-0.5, 0.5):
            m = mid + sub * half
            nodes = m[:, None] + 0.5 * half[:, None] * x[None, :]
            f = _ai_squared(nodes.ravel()).reshape(nodes.shape)
            vals = vals + 0.5 * half * (f * w[None, :]).sum(axis=1)
        return vals

    coarse = panel_sums(n)
    fine = panel_sums(2 * n)
    base = tail.value + first.value
    values = base + np.concatenate([[0.0], np.cumsum(fine)])
    errors = tail.error + first.error + np.concatenate([[0.0], np.cumsum(np.abs(fine - coarse))])
    return values, errors


def build_zero_table(J_max: int) -> AiryZeroTable:
    """Zeros of Ai and Ai' (negated) for j = 1..J_max with norms and e_j(0)."""
    if not 1 <= J_max <= 500:
        raise ValueError("J_max must lie in [1, 500]")
    j = np.arange(1, J_max + 2, dtype=float)
    seed_p = zero_seed_ai_prime(j)
    seed_a = zero_seed_ai(j)
    # brackets from interlacing with the seeds of the other family
    lo_p = np.concatenate([[0.0], seed_a[:-1]])
    zp = _newton_zeros(seed_p, True, lo_p, seed_a)
    za = _newton_zeros(seed_a, False, zp, np.concatenate([zp[1:], [seed_p[-1] + 2 * np.pi / math.sqrt(seed_p[-1])]]))
    zp, za = zp[:J_max], za[:J_max]
    sq, err = _norm_squares(zp)
    norms = np.sqrt(sq)
    bv = airy_real(-zp)[0] / norms
    for arr in (za, zp, bv, norms):
        arr.setflags(write=False)
    return AiryZeroTable(za, zp, bv, norms, err / (2 * norms))


_TABLE_CACHE: dict = {}


def zero_table(J_max: int = 200) -> AiryZeroTable:
    """Cached build_zero_table; larger cached tables are sliced when possible."""
    for n, t in _TABLE_CACHE.items():
        if n >= J_max:
            if n == J_max:
                return t
            return AiryZeroTable(
                t.zeros_ai[:J_max], t.zeros_ai_prime[:J_max], t.boundary_values[:J_max],
                t.norms[:J_max], t.norm_errors[:J_max],
            )
    t = build_zero_table(J_max)
    _TABLE_CACHE[J_max] = t
    return t


# eigenfunctions ----------------------------------------------------------------


@dataclass(frozen=True)
class NeumannEigenfunction:
    """e(t) = mu^{1/6} Lambda^{1/2} e_j(mu^{1/3} Lambda t) on [0, inf).

    e_j = Ai(t - zeta'_j) / ||Ai||_{L^2(-zeta'_j, inf)} satisfies
    (D_t^2 + t) e_j = zeta'_j e_j with e_j'(0) = 0, so e solves
    (D_t^2 + mu Lambda^3 t) e = mu^{2/3} Lambda^2 zeta'_j e.
    """

    j: int
    mu: float
    Lambda: float
    zeta_prime: float
    norm: float

    @property
    def stretch(self) -> float:
        return self.mu ** (1.0 / 3.0) * self.Lambda

    @property
    def amplitude(self) -> float:
        return self.mu ** (1.0 / 6.0) * math.sqrt(self.Lambda) / self.norm

    @property
    def eigenvalue(self) -> float:
        return self.mu ** (2.0 / 3.0) * self.Lambda ** 2 * self.zeta_prime

    @property
    def boundary_value(self) -> float:
        return self.amplitude * float(airy_real(-self.zeta_prime)[0])

    @property
    def support_end(self) -> float:
        """Beyond this point |e| is below double precision relative to its peak."""
        return (self.zeta_prime + 15.0) / self.stretch

    def __call__(self, t):
        return self.amplitude * airy_real(self.stretch * np.asarray(t, dtype=float) - self.zeta_prime)[0]

    def derivative(self, t):
        return self.amplitude * self.stretch * airy_real(self.stretch * np.asarray(t, dtype=float) - self.zeta_prime)[1]


MU_RANGE = 10.0


def eigenfunction(j: int, mu: float = 1.0, Lambda: float = 1.0, table: AiryZeroTable | None = None) -> NeumannEigenfunction:
    table = table if table is not None else zero_table(max(j, 10))
    if not 1 <= j <= table.count:
        raise ValueError(f"index j={j} outside the zero table")
    if not 1.0 / MU_RANGE <= mu <= MU_RANGE:
        raise ValueError("mu must lie in [1/10, 10]")
    if Lambda < 1:
        raise ValueError("Lambda must be >= 1")
    return NeumannEigenfunction(j, float(mu), float(Lambda), table.zeta_prime(j), float(table.norms[j - 1]))


# Poisson functions -------------------------------------------------------------


@dataclass(frozen=True)
class PoissonFunction:
    """f(t) = Ai(mu^{1/3} t + a) / (mu^{1/3} Ai'(a)), a = e^{2 pi i/3} lambda mu^{-2/3}.

    It decays on [0, inf), has f'(0) = 1 and solves
    e^{-2 pi i/3} (D_t^2 + mu t) f + lambda f = 0.
    """

    lam: float
    mu: float = 1.0

    @property
    def shift(self) -> complex:
        return complex(OMEGA * self.lam * self.mu ** (-2.0 / 3.0))

    def _parts(self, t, derivative=False):
        c = self.mu ** (1.0 / 3.0)
        a = np.array([self.shift])
        _, aip_a, ze_a = airy_scaled(a)
        s = c * np.asarray(t, dtype=float) + self.shift
        ai_s, aip_s, ze_s = airy_scaled(s)
        top = aip_s * c if derivative else ai_s
        with np.errstate(under="ignore"):
            return top / (c * aip_a[0]) * np.exp(ze_a[0] - ze_s)

    def __call__(self, t):
        return self._parts(t)

    def derivative(self, t):
        return self._parts(t, derivative=True)

    @property
    def decay_rate(self) -> float:
        """Decay rate of |f|^2 near t = 0."""
        return 2.0 * self.mu ** (1.0 / 3.0) * max(np.sqrt(self.shift).real, 0.0) + 1.0

    def norm_rule(self, n: int = 16):
        """A quadrature rule on [0, inf) adapted to the decay of |f|^2."""
        rate = self.decay_rate
        # |f|^2 falls faster than exp(-rate t), so 60/rate leaves < e^{-60}
        length = 60.0 / rate + 4.0 * self.mu ** (-1.0 / 3.0)
        panels = max(4, int(math.ceil(length * max(rate, 1.0) / 4.0)))
        return semi_infinite_rule(0.0, n, decay=rate, split=length, panels=panels)

    def norm(self, rtol: float = 1e-12) -> float:
        res = integrate_adaptive(lambda t: np.abs(self(t)) ** 2, self.norm_rule(), rtol=rtol)
        return math.sqrt(res.value)


@dataclass(frozen=True)
class EasyPoissonFunction:
    """f(t) = -e^{i pi/3} lambda^{-1/2} exp(-e^{-i pi/3} lambda^{1/2} t).

    For negative lambda the branch lambda^{1/2} = i |lambda|^{1/2} is used so
    that f decays. f'(0) = 1.
    """

    lam: float

    @property
    def root(self) -> complex:
        return math.sqrt(self.lam) if self.lam > 0 else 1j * math.sqrt(-self.lam)

    @property
    def rate(self) -> complex:
        return complex(np.exp(-1j * np.pi / 3) * self.root)

    def __call__(self, t):
        return -np.exp(1j * np.pi / 3) / self.root * np.exp(-self.rate * np.asarray(t, dtype=float))

    def derivative(self, t):
        return -self.rate * self(t)

    def closed_form_norm(self) -> float:
        return math.sqrt(1.0 / (abs(self.lam) * 2.0 * self.rate.real))

    def norm(self, rtol: float = 1e-12) -> float:
        rate = 2.0 * self.rate.real
        rule = semi_infinite_rule(0.0, 16, decay=rate)
        res = integrate_adaptive(lambda t: np.abs(self(t)) ** 2, rule, rtol=rtol)
        return math.sqrt(res.value)


def poisson_function(lam: float, mu: float = 1.0, model: str = "airy"):
    if model == "airy":
        return PoissonFunction(float(lam), float(mu))
    if model == "easy":
        return EasyPoissonFunction(float(lam))
    raise ValueError(f"unknown model {model!r}")


def poisson_function_norm(lam: float, sign: str = "+", model: str = "airy") -> float:
    """||f_lambda||_{L^2(0, inf)} for lambda = sign * |lam|, |lam| >= 1.

    Raises ArithmeticError if quadrature fails to converge or if the computed
    function violates f'(0) = 1 by more than 1e-6.
    """
    if abs(lam) < 1:
        raise ValueError("|lambda| must be >= 1")
    if sign not in "+-" or len(sign) != 1:
        raise ValueError("sign must be '+' or '-'")
    value = abs(lam) if sign == "+" else -abs(lam)
    f = poisson_function(value, model=model)
    slope = complex(np.asarray(f.derivative(np.array([0.0]))).ravel()[0])
    if abs(slope - 1) > 1e-6:
        raise ArithmeticError(f"f'(0) = {slope} differs from 1")
    return f.norm()
