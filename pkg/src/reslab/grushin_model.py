"""Model Grushin problems for the complex Airy operator on the half line.

The model operator is

    P_lambda - z = e^{-2 pi i/3} (D_t^2 + mu t) + lambda - z,   gamma_1 u = u'(0),

augmented by R_+ u = (<u, e_j>)_{j <= N} and R_- u_- = sum_j u_-(j) e_j where
e_j = e_{j,mu} are the normalized Neumann eigenfunctions of D_t^2 + mu t.
Functions are represented in the basis {f, e_1, ..., e_J} with f the Poisson
function (f'(0) = 1, (P_lambda - z) f = -z f). In that basis the system is
diagonal and its solution is written down directly. Norms are evaluated by
quadrature on a composite Gauss-Legendre grid.

The module also holds the interval toy model -u'' - z u + u_-/pi = v on
[0, pi] with Neumann conditions, whose effective Hamiltonian is pi z.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import roots_legendre

from reslab.airy import PoissonFunction, airy_real, zero_table
from reslab.complexmath import ComplexPolynomial, find_all_roots
from reslab.parallel import parallel_map

OMEGA = complex(np.exp(2j * np.pi / 3))
OMEGA_BAR = OMEGA.conjugate()
SIN_2PI_3 = math.sin(2 * math.pi / 3)
MU_RANGE = 10.0
DEFAULT_C1 = 6.0
DEFAULT_EXTRA_MODES = 60
MAX_MODES = 500
RESIDUAL_TOL = 1e-10
TAIL_WARN = 1e-3
TAIL_FAIL = 1e-2
NODES_PER_PANEL = 20
FAR_MODES = 2_000_000


class TruncationError(ArithmeticError):
    """The neglected modes j > J_trunc carry too much of the norm."""


class SingularSystemError(ArithmeticError):
    """The discretized toy system is numerically singular at this z."""


def japanese(x: float) -> float:
    """<x> = (1 + |x|^2)^{1/2}."""
    return math.sqrt(1.0 + abs(x) ** 2)


def _table(J: int):
    return zero_table(max(int(J), 200))


def band_count(mu: float, C1: float = DEFAULT_C1) -> int:
    """Largest N with sin(2 pi/3) mu^{2/3} zeta'_N <= C1 (0 if none)."""
    zp = _table(MAX_MODES).zeros_ai_prime
    return int(np.count_nonzero(SIN_2PI_3 * mu ** (2.0 / 3.0) * zp <= C1))


@dataclass(frozen=True)
class ModelParameters:
    """lambda real, z with |Im z| < C1, mu in [1/10, 10]; N follows from (mu, C1)."""

    lam: float
    z: complex = 0.0
    mu: float = 1.0
    C1: float = DEFAULT_C1
    N: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "C1", float(self.C1))
        if not (math.isfinite(self.lam) and np.isfinite(self.z)):
            raise ValueError("lambda and z must be finite")
        if not 1.0 / MU_RANGE <= self.mu <= MU_RANGE:
            raise ValueError("mu must lie in [1/10, 10]")
        if not self.C1 > 0:
            raise ValueError("C1 must be positive")
        if not abs(self.z.imag) < self.C1:
            raise ValueError("|Im z| must be smaller than C1")
        object.__setattr__(self, "N", band_count(self.mu, self.C1))

    @property
    def weight(self) -> float:
        """<lambda - Re z>."""
        return japanese(self.lam - self.z.real)

    def with_lambda(self, lam: float) -> "ModelParameters":
        return ModelParameters(lam, self.z, self.mu, self.C1)

    def eigenvalues(self, J: int) -> np.ndarray:
        """mu^{2/3} zeta'_j for j = 1..J."""
        return self.mu ** (2.0 / 3.0) * _table(J).zeros_ai_prime[:J]

    def eta(self, J: int) -> np.ndarray:
        """eta_j = e^{-2 pi i/3} mu^{2/3} zeta'_j + lambda - z for j = 1..J."""
        return OMEGA_BAR * self.eigenvalues(J) + self.lam - self.z

    def boundary_values(self, J: int) -> np.ndarray:
        """e_{j,mu}(0) = mu^{1/6} e_j(0) for j = 1..J."""
        return self.mu ** (1.0 / 6.0) * _table(J).boundary_values[:J]


# basis on a quadrature grid ------------------------------------------------------


def _panel_rule(edges: np.ndarray, n: int):
    x, w = roots_legendre(n)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (mid[:, None] + half[:, None] * x[None, :]).ravel(), (half[:, None] * w[None, :]).ravel()


@dataclass(frozen=True, eq=False)
class ModelBasis:
    """f and e_1..e_J sampled on a grid that resolves all of them.

    f_coeffs are the quadrature values of <f, e_j>; f_coeffs_exact follow from
    (P - z) f = -z f and Green's formula: f_j = -e^{-2 pi i/3} e_j(0) / (eta_j + z).
    """

    lam: float
    mu: float
    J: int
    nodes: np.ndarray
    weights: np.ndarray
    e: np.ndarray
    de: np.ndarray
    f: np.ndarray
    df: np.ndarray
    eigenvalues: np.ndarray
    boundary: np.ndarray
    boundary_slopes: np.ndarray
    f_slope: complex
    f_value: complex
    f_coeffs: np.ndarray
    f_coeffs_exact: np.ndarray

    def inner(self, a: np.ndarray, b: np.ndarray):
        """<a, b> along the last axis (linear in a)."""
        return np.sum(self.weights * a * np.conj(b), axis=-1)

    def norm(self, a: np.ndarray):
        return np.sqrt(np.sum(self.weights * np.abs(a) ** 2, axis=-1))

    def values(self, u0, u):
        """u0 f + sum_j u_j e_j on the grid; u0 (m,), u (m, J)."""
        return np.asarray(u0)[..., None] * self.f + np.asarray(u) @ self.e

    def derivative_values(self, u0, u):
        return np.asarray(u0)[..., None] * self.df + np.asarray(u) @ self.de

    def second_derivative_values(self, u0, u):
        """u'' from f'' = (mu t + e^{2 pi i/3} lambda) f and e_j'' = (mu t - mu^{2/3} zeta'_j) e_j."""
        t = self.nodes
        f2 = (self.mu * t + OMEGA * self.lam) * self.f
        e2 = (self.mu * t[None, :] - self.eigenvalues[:, None]) * self.e
        return np.asarray(u0)[..., None] * f2 + np.asarray(u) @ e2


@lru_cache(maxsize=64)
def model_basis(lam: float, mu: float, J: int) -> ModelBasis:
    """Grid basis for the model with parameters (lambda, mu) and J modes."""
    table = _table(J)
    zp = np.asarray(table.zeros_ai_prime[:J])
    norms = np.asarray(table.norms[:J])
    c = mu ** (1.0 / 3.0)
    amp = mu ** (1.0 / 6.0) / norms
    poisson = PoissonFunction(float(lam), float(mu))
    # widths in the stretched variable s = mu^{1/3} t
    s_end = zp[-1] + 15.0
    coarse = 3.0 / math.sqrt(max(zp[-1], 1.0))
    fine = min(coarse, 3.0 / math.sqrt(max(abs(poisson.shift), 1.0)))
    s_f = min(s_end, c * (60.0 / poisson.decay_rate + 4.0 / c))
    edges = np.concatenate([
        np.linspace(0.0, s_f, max(1, int(math.ceil(s_f / fine))) + 1),
        np.linspace(s_f, s_end, max(1, int(math.ceil((s_end - s_f) / coarse))) + 1)[1:],
    ]) / c
    nodes, weights = _panel_rule(edges, NODES_PER_PANEL)
    arg = c * nodes[None, :] - zp[:, None]
    ai, aip = airy_real(arg.ravel())
    e = amp[:, None] * ai.reshape(arg.shape)
    de = (amp * c)[:, None] * aip.reshape(arg.shape)
    f = poisson(nodes)
    df = poisson.derivative(nodes)
    a0, ap0 = airy_real(-zp)
    eig = mu ** (2.0 / 3.0) * zp
    boundary = amp * a0
    slopes = amp * c * ap0
    f_coeffs = (weights * f) @ e.T
    f_exact = -OMEGA_BAR * boundary / (OMEGA_BAR * eig + lam)
    end = np.array([0.0])
    basis = ModelBasis(
        float(lam), float(mu), int(J), nodes, weights, e, de, f, df, eig, boundary, slopes,
        complex(poisson.derivative(end)[0]), complex(poisson(end)[0]), f_coeffs, f_exact,
    )
    for arr in (nodes, weights, e, de, f, df, eig, boundary, slopes, f_coeffs, f_exact):
        arr.setflags(write=False)
    return basis


def default_modes(params: ModelParameters) -> int:
    return params.N + DEFAULT_EXTRA_MODES


# truncation tail ---------------------------------------------------------------


def extended_zeros_prime(count: int) -> np.ndarray:
    """zeta'_j for j = 1..count: the table up to 500, then the asymptotic series."""
    zp = np.asarray(_table(MAX_MODES).zeros_ai_prime)
    if count <= zp.size:
        return zp[:count]
    j = np.arange(zp.size + 1, count + 1, dtype=float)
    T = 3.0 * np.pi / 8.0 * (4.0 * j - 3.0)
    far = T ** (2.0 / 3.0) * (1.0 - 7.0 / 48.0 / T ** 2 + 35.0 / 288.0 / T ** 4)
    return np.concatenate([zp, far])


def truncation_tail(params: ModelParameters, J: int) -> float:
    """B-norm of the modes j > J of the solution with v0 = 1 and v_j = 0 (j > J).

    There u_j = -e^{-2 pi i/3} e_j(0) z / (eta_j (eta_j + z)); it vanishes for z = 0.
    The mode sum is evaluated to j = 2e6 with e_j(0)^2 = 1/zeta'_j.
    """
    if params.z == 0:
        return 0.0
    zp = extended_zeros_prime(FAR_MODES)[J:]
    eig = params.mu ** (2.0 / 3.0) * zp
    e0sq = params.mu ** (1.0 / 3.0) / zp
    eta = OMEGA_BAR * eig + params.lam - params.z
    coef2 = e0sq * abs(params.z) ** 2 / np.abs(eta * (eta + params.z)) ** 2
    l2 = math.sqrt(float(np.sum(coef2)))
    graph = math.sqrt(float(np.sum(coef2 * eig ** 2)))
    return params.weight * l2 + graph


# solution of the model system ---------------------------------------------------


@dataclass(frozen=True, eq=False)
class GrushinSolution:
    """u = u0 f + sum_j u_coeffs[j-1] e_j and u_minus in C^N.

    residuals holds the largest violation per equation group; residual is their
    maximum and never exceeds tolerance.
    """

    u0: complex
    u_coeffs: np.ndarray
    u_minus: np.ndarray
    residual: float
    residuals: Dict[str, float]
    tolerance: float
    J_trunc: int


def _coerce(values, size, name):
    arr = np.zeros(size, dtype=complex)
    values = np.atleast_1d(np.asarray(values, dtype=complex))
    if values.size > size:
        raise ValueError(f"{name} has {values.size} entries, at most {size} allowed")
    arr[: values.size] = values
    return arr


def solve_model(
    params: ModelParameters,
    v_coeffs: Sequence[complex],
    v0: complex,
    v_plus: Sequence[complex],
    J_trunc: Optional[int] = None,
    tol: float = RESIDUAL_TOL,
) -> GrushinSolution:
    """Solve the model system with f0 = f'(0) = 1 and r_- = 0.

        u0        = v0
        u_j       = v_+(j) - f_j v0                                  (j <= N)
        u_j       = (v_j - e^{-2 pi i/3} e_j(0) v0) / eta_j - f_j v0     (N < j <= J)
        u_-(j)    = v_j - e^{-2 pi i/3} e_j(0) v0 - eta_j v_+(j)          (j <= N)

    v_coeffs are the coefficients of v in e_1, e_2, ...; missing ones are zero.
    """
    N = params.N
    J = default_modes(params) if J_trunc is None else int(J_trunc)
    if not N < J <= MAX_MODES:
        raise ValueError(f"J_trunc must satisfy N={N} < J_trunc <= {MAX_MODES}")
    v = _coerce(v_coeffs, J, "v_coeffs")
    vp = _coerce(v_plus, N, "v_plus")
    v0 = complex(v0)
    basis = model_basis(params.lam, params.mu, J)
    eta = params.eta(J)
    eb = basis.boundary
    fj = basis.f_coeffs

    u0 = v0
    u = np.empty(J, dtype=complex)
    u[:N] = vp - fj[:N] * v0
    u[N:] = (v[N:] - OMEGA_BAR * eb[N:] * v0) / eta[N:] - fj[N:] * v0
    um = v[:N] - OMEGA_BAR * eb[:N] * v0 - eta[:N] * vp

    # the four equation groups of the coefficient system
    coupling = OMEGA_BAR * eb * basis.f_slope + eta * fj
    lhs = coupling * u0 + eta * u
    lhs[:N] += um
    res = {
        "interior_low": float(np.max(np.abs(lhs[:N] - v[:N]), initial=0.0)),
        "interior_high": float(np.max(np.abs(lhs[N:] - v[N:]), initial=0.0)),
        "boundary": abs(basis.f_slope * u0 - v0),
        "projection": float(np.max(np.abs(fj[:N] * u0 + u[:N] - vp), initial=0.0)),
    }
    # apply the operator itself: (P - z) f = -z f, (P - z) e_j = eta_j e_j
    applied = -params.z * fj * u0 + eta * u
    applied[:N] += um
    res["operator"] = float(np.max(np.abs(applied - v)))
    res["gamma_1"] = abs(basis.f_slope * u0 + np.dot(basis.boundary_slopes, u) - v0)
    residual = max(res.values())
    if not residual <= tol:
        raise ArithmeticError(f"model residual {residual:.3e} exceeds tolerance {tol:.1e}: {res}")
    return GrushinSolution(u0, u, um, residual, res, tol, J)


# effective Hamiltonian -------------------------------------------------------------


def _entries(lam: float, z: complex, mu: float, N: int) -> np.ndarray:
    zp = _table(N).zeros_ai_prime[:N]
    eta = OMEGA_BAR * mu ** (2.0 / 3.0) * zp + lam - z
    return np.diag(-eta)


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    """E_{-+} = -diag(eta_1, ..., eta_N)."""

    entries: np.ndarray
    eta: np.ndarray

    def determinant(self) -> complex:
        return complex(np.prod(-self.eta))


def effective_hamiltonian(params: ModelParameters) -> EffectiveHamiltonian:
    m = _entries(params.lam, params.z, params.mu, params.N)
    eta = -np.diag(m).copy()
    m.setflags(write=False)
    eta.setflags(write=False)
    return EffectiveHamiltonian(m, eta)


def predicted_zeros(lam: float, mu: float, N: int) -> np.ndarray:
    """z = lambda + e^{-2 pi i/3} mu^{2/3} zeta'_j for j = 1..N."""
    return lam + OMEGA_BAR * mu ** (2.0 / 3.0) * _table(N).zeros_ai_prime[:N]


def determinant_zeros(lam: float, mu: float = 1.0, C1: float = DEFAULT_C1) -> np.ndarray:
    """Zeros of z -> det E_{-+}(z), located without the closed form.

    det E_{-+} is sampled on a circle enclosing the band, its Taylor
    coefficients recovered by FFT, the polynomial solved by simultaneous
    iteration and each zero polished by Newton with Jacobi's formula.
    """
    N = band_count(mu, C1)
    if N == 0:
        return np.zeros(0, dtype=complex)
    center = lam + OMEGA_BAR * 0.5 * C1 / SIN_2PI_3
    radius = 0.75 * C1 / SIN_2PI_3 + 1.0
    M = 4 * N + 4
    pts = center + radius * np.exp(2j * np.pi * np.arange(M) / M)
    vals = np.array([np.linalg.det(_entries(lam, w, mu, N)) for w in pts])
    coeffs = np.fft.fft(vals) / M
    poly = ComplexPolynomial(coeffs[: N + 1], scale=radius)
    roots = center + np.array(find_all_roots(poly, tol=1e-12))
    for _ in range(4):
        for i, w in enumerate(roots):
            m = _entries(lam, w, mu, N)
            # d det / dz = det * tr(E^{-1} dE/dz) with dE/dz = I
            try:
                trace = np.trace(np.linalg.inv(m))
            except np.linalg.LinAlgError:
                continue  # already an exact zero

            if trace != 0 and np.isfinite(trace):
                roots[i] = w - 1.0 / trace
    return roots[np.argsort(-roots.imag)]


# well-posedness --------------------------------------------------------------------


@dataclass(frozen=True)
class WellposednessReport:
    lambda_sweep: list
    max_ratio: list
    slope: float
    C_bound: float
    passed: bool
    mu: float
    z: list
    N: int
    trials: int
    J_trunc: list
    seed: int
    tail_fraction: list

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _trial_data(seed: int, trial: int, J: int, N: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
    scales = 10.0 ** rng.uniform(-3.0, 0.0, size=3)
    v = (rng.normal(size=J) + 1j * rng.normal(size=J)) * scales[0]
    v0 = complex(rng.normal(), rng.normal()) * scales[1]
    vp = (rng.normal(size=N) + 1j * rng.normal(size=N)) * scales[2]
    return v, v0, vp


def _rhs_norm(v, v0, vp, w):
    return np.linalg.norm(v) + w ** 0.25 * abs(v0) + w * np.linalg.norm(vp)


def solution_norm(params: ModelParameters, sol: GrushinSolution) -> float:
    """<lambda - Re z> ||u|| + ||D_t^2 u|| + ||t u|| + |u_-| by quadrature."""
    basis = model_basis(params.lam, params.mu, sol.J_trunc)
    u = basis.values(sol.u0, sol.u_coeffs)
    d2 = basis.second_derivative_values(sol.u0, sol.u_coeffs)
    return float(
        params.weight * basis.norm(u) + basis.norm(d2) + basis.norm(basis.nodes * u) + np.linalg.norm(sol.u_minus)
    )


def _choose_modes(params: ModelParameters, J_trunc: Optional[int]) -> int:
    if J_trunc is not None:
        return int(J_trunc)
    J = default_modes(params)
    while J < MAX_MODES and truncation_tail(params, J) > TAIL_WARN:
        J = min(MAX_MODES, 2 * J)
    return J


def _max_ratio(params: ModelParameters, trials: int, J: int, seed: int):
    w = params.weight
    worst, tail_frac = 0.0, 0.0
    tail = truncation_tail(params, J)
    for k in range(trials):
        v, v0, vp = _trial_data(seed, k, J, params.N)
        scale = _rhs_norm(v, v0, vp, w)
        v, v0, vp = v / scale, v0 / scale, vp / scale
        sol = solve_model(params, v, v0, vp, J)
        lhs = solution_norm(params, sol)
        worst = max(worst, lhs)
        if lhs > 0:
            tail_frac = max(tail_frac, tail * abs(v0) / lhs)
    if tail_frac > TAIL_FAIL:
        raise TruncationError(f"modes beyond J_trunc={J} carry {tail_frac:.2%} of the norm; increase J_trunc")
    return worst, tail_frac


def verify_wellposedness(
    params: ModelParameters,
    trials: int = 100,
    J_trunc: Optional[int] = None,
    seed: int = 0,
    lambda_sweep: Optional[Sequence[float]] = (0.0, 10.0, 40.0, 160.0),
    slope_limit: float = 0.1,
) -> WellposednessReport:
    """Largest observed ratio ||(u, u_-)|| / ||(v, v0, v_+)|| over random data.

    The ratio is computed at params.lam, or at every lambda of lambda_sweep
    (with the remaining parameters kept). The slope of log(max ratio) against
    log <lambda - Re z> must stay below slope_limit for the report to pass.
    """
    if trials < 100:
        raise ValueError("at least 100 trials are required")
    lams = [params.lam] if not lambda_sweep else [float(x) for x in lambda_sweep]
    points = [params.with_lambda(lam) for lam in lams]
    modes = [_choose_modes(p, J_trunc) for p in points]

    results = parallel_map(lambda k: _max_ratio(points[k], trials, modes[k], seed), range(len(points)))
    ratios = [r for r, _ in results]
    tails = [t for _, t in results]
    weights = np.array([p.weight for p in points])
    if len(points) > 1 and np.ptp(np.log(weights)) > 0:
        slope = float(np.polyfit(np.log(weights), np.log(ratios), 1)[0])
    else:
        slope = 0.0
    ok = bool(np.all(np.isfinite(ratios)) and slope < slope_limit)
    return WellposednessReport(
        lams, [float(r) for r in ratios], slope, float(max(ratios)), ok, params.mu,
        [params.z.real, params.z.imag], params.N, int(trials), modes, int(seed), tails,
    )


def coercivity_constant(params: ModelParameters, samples: int = 200, modes: int = 20, seed: int = 0) -> float:
    """Smallest C seen in |<(P-z)u,u>| + w^{-1/2} |gamma_1 u|^2 >= C^{-1} w ||u||^2.

    u = c0 f + sum_{j <= modes} c_j e_j with random c; w = <lambda - Re z>.
    """
    J = max(modes, params.N + 1)
    basis = model_basis(params.lam, params.mu, J)
    eta = params.eta(J)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    c0 = rng.normal(size=samples) + 1j * rng.normal(size=samples)
    c = (rng.normal(size=(samples, J)) + 1j * rng.normal(size=(samples, J))) * 10.0 ** rng.uniform(-2, 0, size=(samples, 1))
    u = basis.values(c0, c)
    pu = basis.values(-params.z * c0, c * eta[None, :])
    w = params.weight
    lhs = np.abs(basis.inner(pu, u)) + np.abs(basis.f_slope * c0 + c @ basis.boundary_slopes) ** 2 / math.sqrt(w)
    rhs = w * basis.norm(u) ** 2
    return float(np.max(rhs / lhs))


# identities on truncated functions ---------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    samples: int
    airy_identity_max_relative_error: float
    interpolation_max_ratio: float


def identity_suite(samples: int = 1000, seed: int = 0, modes: int = 12, lambdas=(-3.0, 0.0, 2.0, 8.0)) -> IdentityReport:
    """Check, on random u = c0 f_lambda + sum_j c_j e_j (mu = 1),

        ||(D_t^2+t)u||^2 = ||D_t^2 u||^2 + ||t u||^2 + 2||sqrt(t) D_t u||^2 - |u(0)|^2
        ||D_t u|| <= (sqrt 2 + 1) ||D_t^2 u||^{1/2} ||u||^{1/2}.

    Reports the largest relative error of the first and the largest ratio
    left/right of the second (which must stay <= 1).
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 2]))
    per = -(-samples // len(lambdas))
    worst_id, worst_interp, done = 0.0, 0.0, 0
    for lam in lambdas:
        n = min(per, samples - done)
        if n <= 0:
            break
        basis = model_basis(float(lam), 1.0, modes)
        t = basis.nodes
        c0 = (rng.normal(size=n) + 1j * rng.normal(size=n)) * (rng.uniform(size=n) < 0.8)
        decay = np.arange(1, modes + 1) ** -1.0
        c = (rng.normal(size=(n, modes)) + 1j * rng.normal(size=(n, modes))) * decay
        u = basis.values(c0, c)
        du = basis.derivative_values(c0, c)
        d2 = -basis.second_derivative_values(c0, c)
        airy_u = basis.values(-OMEGA * lam * c0, c * basis.eigenvalues[None, :])
        lhs = basis.norm(airy_u) ** 2
        gamma0 = basis.f_value * c0 + c @ basis.boundary
        rhs = basis.norm(d2) ** 2 + basis.norm(t * u) ** 2 + 2 * basis.norm(np.sqrt(t) * du) ** 2 - np.abs(gamma0) ** 2
        worst_id = max(worst_id, float(np.max(np.abs(lhs - rhs) / lhs)))
        bound = (math.sqrt(2) + 1) * np.sqrt(basis.norm(d2) * basis.norm(u))
        worst_interp = max(worst_interp, float(np.max(basis.norm(du) / bound)))
        done += n
    return IdentityReport(done, worst_id, worst_interp)


# tail sum ---------------------------------------------------------------------------


def tail_sum(lam: float, z: complex = 0.0, mu: float = 1.0, C1: float = DEFAULT_C1) -> float:
    """sum_{j > N} |eta_j|^{-2} |e_{j,mu}(0)|^2 using e_j(0)^2 = 1/zeta'_j.

    Modes up to 2e6 are summed; beyond that the terms behave like
    mu^{-1} ((3/2) pi j)^{-2} and are added as an integral.
    """
    N = band_count(mu, C1)
    zp = extended_zeros_prime(FAR_MODES)[N:]
    eta = OMEGA_BAR * mu ** (2.0 / 3.0) * zp + lam - z
    body = float(np.sum(mu ** (1.0 / 3.0) / zp / np.abs(eta) ** 2))
    far = (2.0 / (3.0 * math.pi)) ** 2 / (mu * FAR_MODES)
    return body + far


def tail_sum_slope(lambdas=(4.0, 16.0, 64.0, 256.0), z: complex = 0.0, mu: float = 1.0) -> float:
    """Least-squares slope of log tail_sum against log <lambda - Re z>."""
    x = np.log([japanese(lam - complex(z).real) for lam in lambdas])
    y = np.log([tail_sum(lam, z, mu) for lam in lambdas])
    return float(np.polyfit(x, y, 1)[0])


# interval toy model -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IntervalToySolution:
    x: np.ndarray
    u: np.ndarray
    u_minus: complex


def solve_interval_toy(z: complex, grid_n: int, v=None, v0: complex = 0.0, v_plus: complex = 0.0) -> IntervalToySolution:
    """Discretize -u'' - z u + u_-/pi = v, u'(0) = v0, u'(pi) = 0, (1/pi) int u = v_+.

    Second-order centered differences inside, one-sided second-order
    differences for the Neumann data and the trapezoid rule for the mean.
    v is a callable or an array of nodal values (None means 0).
    """
    z = complex(z)
    if not z.real < 1:
        raise ValueError("the toy model needs Re z < 1")
    n = int(grid_n)
    if n < 64:
        raise ValueError("grid_n must be at least 64")
    h = math.pi / n
    x = np.linspace(0.0, math.pi, n + 1)
    if v is None:
        rhs_v = np.zeros(n + 1, dtype=complex)
    elif callable(v):
        rhs_v = np.asarray(v(x), dtype=complex)
    else:
        rhs_v = np.asarray(v, dtype=complex)
    m = n + 2
    A = sp.lil_matrix((m, m), dtype=complex)
    b = np.zeros(m, dtype=complex)
    inv_h2 = 1.0 / h ** 2
    for k in range(1, n):
        A[k, k - 1] = -inv_h2
        A[k, k] = 2 * inv_h2 - z
        A[k, k + 1] = -inv_h2
        A[k, n + 1] = 1.0 / math.pi
        b[k] = rhs_v[k]
    A[0, 0], A[0, 1], A[0, 2] = -1.5 / h, 2.0 / h, -0.5 / h
    b[0] = v0
    A[n, n], A[n, n - 1], A[n, n - 2] = 1.5 / h, -2.0 / h, 0.5 / h
    trap = np.full(n + 1, h)
    trap[[0, -1]] = 0.5 * h
    for k in range(n + 1):
        A[n + 1, k] = trap[k] / math.pi
    b[n + 1] = v_plus
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = spla.spsolve(A.tocsc(), b)
    sol = np.asarray(sol)
    if not np.all(np.isfinite(sol)):
        raise SingularSystemError(f"toy system singular at z={z}; shift z")
    check = A.tocsr() @ sol - b
    if np.max(np.abs(check)) > 1e-8 * max(1.0, np.max(np.abs(b)) * inv_h2):
        raise SingularSystemError(f"toy system ill-conditioned at z={z}; shift z")
    return IntervalToySolution(x, sol[: n + 1], complex(sol[n + 1]))


def interval_toy_e_minus_plus(z: complex, grid_n: int = 512, boundary_variant: bool = False) -> complex:
    """E_{-+}(z) of the discretized toy model: the map v_+ -> u_- at v = 0, v0 = 0.

    With boundary_variant the Neumann datum at 0 is an input (gamma_1 u = v0)
    and E_{-+} is read off the same way; both tend to pi z.
    """
    if boundary_variant:
        # remove the v0 response to isolate the v_+ column
        with_plus = solve_interval_toy(z, grid_n, v0=1.0, v_plus=1.0).u_minus
        v0_only = solve_interval_toy(z, grid_n, v0=1.0, v_plus=0.0).u_minus
        return with_plus - v0_only
    return solve_interval_toy(z, grid_n, v_plus=1.0).u_minus
