"""Exact resonances of a sphere in R^3 from spherical Hankel functions.

The outgoing solution h_l(lambda r) Y_lm satisfies the boundary condition at
r = a exactly when lambda a is a root of an explicit polynomial:

    h_l(x) = (-i)^{l+1} (e^{ix}/x) sum_m c_m x^{-m},
    c_m = i^m (l+m)! / (m! (l-m)! 2^m),

so the Dirichlet condition is sum_m c_m x^{l-m} = 0 (degree l) and the Robin
condition x h_l'(x) + eta a h_l(x) = 0 (Neumann when eta = 0) is
sum_m c_m [i x^{l+1-m} - (m + 1 - eta a) x^{l-m}] = 0 (degree l+1).
Each root carries multiplicity 2l+1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln, hankel1, hankel1e

from reslab.airy import zero_table as default_zero_table
from reslab.bands import (
    BAND,
    DEFAULT_C_MARGIN,
    BandAssignment,
    classify_many,
    family_zeros,
    gap_limit,
    minimal_margin,
)
from reslab.complexmath import (
    BoundaryTooCloseError,
    ComplexPolynomial,
    RootFindingError,
    count_zeros_in_rectangle,
    find_all_roots,
)
from reslab.geometry import BandConstants, ObstacleModel, band_constants, unit_ball_volume
from reslab.parallel import parallel_map

L_MAX = 400
SYMMETRY_RTOL = 1e-8
BOUNDARY_PER_ROOT = 40
CSV_COLUMNS = ("bc", "l", "re_lambda", "im_lambda", "multiplicity", "band_kind", "band_index")


@dataclass(frozen=True)
class BoundaryCondition:
    """Dirichlet, Neumann or Robin with a constant real coefficient eta."""

    kind: str
    eta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "neumann", "robin"):
            raise ValueError(f"unknown boundary condition {self.kind!r}")
        if self.kind != "robin" and self.eta != 0.0:
            raise ValueError("eta is only meaningful for the Robin condition")
        if not math.isfinite(self.eta):
            raise ValueError("eta must be finite")

    @property
    def tag(self) -> str:
        return f"robin:{self.eta!r}" if self.kind == "robin" else self.kind

    @property
    def family(self) -> str:
        """Band family: Dirichlet bands sit at Ai zeros, the others at Ai' zeros."""
        return "dirichlet" if self.kind == "dirichlet" else "neumann"

    @classmethod
    def parse(cls, text) -> "BoundaryCondition":
        if isinstance(text, BoundaryCondition):
            return text
        s = str(text).strip().lower()
        if s.startswith("robin"):
            _, _, eta = s.partition(":")
            if not eta:
                raise ValueError("Robin condition needs a coefficient, e.g. robin:0.5")
            return cls("robin", float(eta))
        return cls(s)

    def __str__(self) -> str:
        return self.tag


def _hankel_ratio(nu: float, x: np.ndarray) -> np.ndarray:
    """H_{nu-1}(x) / H_nu(x), falling back to exponentially scaled values."""
    with np.errstate(all="ignore"):
        r = hankel1(nu - 1, x) / hankel1(nu, x)
        bad = ~np.isfinite(r)
        if bad.any():
            r[bad] = hankel1e(nu - 1, x[bad]) / hankel1e(nu, x[bad])
    return r


def _upward_ratio(x: np.ndarray, l: int) -> np.ndarray:
    """h_{l-1}/h_l by the upward recurrence (stable where h_l dominates)."""
    r = -1j + 1.0 / x
    for k in range(1, l):
        r = (2 * k + 1) / x - 1.0 / r
    return r


def hankel_log_derivative(x, l: int) -> np.ndarray:
    """h_l'(x)/h_l(x) for the outgoing spherical Hankel function."""
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    # h_l(-conj x) = (-1)^l conj(h_l(x)) up to sign, so D(-conj x) = -conj D(x)
    neg = x.real < 0
    xr = np.where(neg, -np.conj(x), x)
    out = np.empty_like(xr)
    nu = l + 0.5
    small = np.abs(xr) < 0.5 * nu
    with np.errstate(all="ignore"):
        if small.any():
            xs = xr[small]
            out[small] = 1j - 1.0 / xs if l == 0 else 1.0 / _upward_ratio(xs, l) - (l + 1) / xs
        big = ~small
        if big.any():
            xb = xr[big]
            vb = -0.5 / xb + _hankel_ratio(nu, xb) - nu / xb
            bad = ~np.isfinite(vb)
            if bad.any() and l > 0:
                vb[bad] = 1.0 / _upward_ratio(xb[bad], l) - (l + 1) / xb[bad]
            elif bad.any():
                vb[bad] = 1j - 1.0 / xb[bad]
            out[big] = vb
    return np.where(neg, -np.conj(out), out)


def _log_c(l: int) -> np.ndarray:
    m = np.arange(l + 1)
    return gammaln(l + m + 1) - gammaln(m + 1) - gammaln(l - m + 1) - m * math.log(2.0)


def _i_power(m) -> np.ndarray:
    return np.array([1, 1j, -1, -1j])[np.asarray(m) % 4]


def condition_polynomial(l: int, bc: BoundaryCondition, a: float = 1.0) -> ComplexPolynomial:
    """The Hankel condition in x = lambda a, built in the log domain.

    Coefficients are stored for the scaled variable x / s with s = l + 1/2 and
    normalized so that the largest has modulus one.
    """
    s = l + 0.5
    lc = _log_c(l)
    phase = _i_power(np.arange(l + 1))
    ls = math.log(s)
    if bc.kind == "dirichlet":
        k = l - np.arange(l + 1)
        logs = lc + k * ls
        coeffs = np.zeros(l + 1, dtype=complex)
        coeffs[k] = phase * np.exp(logs - logs.max())
        return ComplexPolynomial(coeffs, scale=s)
    ea = bc.eta * a
    m = np.arange(l + 1)
    k_hi = l + 1 - m
    k_lo = l - m
    log_hi = lc + k_hi * ls
    weight = np.abs(m + 1 - ea)
    with np.errstate(divide="ignore"):
        log_lo = lc + np.log(weight) + k_lo * ls
    top = max(log_hi.max(), log_lo.max())
    coeffs = np.zeros(l + 2, dtype=complex)
    np.add.at(coeffs, k_hi, 1j * phase * np.exp(log_hi - top))
    np.add.at(coeffs, k_lo, -np.sign(m + 1 - ea) * phase * np.exp(log_lo - top))
    return ComplexPolynomial(coeffs, scale=s)


@dataclass(frozen=True, eq=False)
class HankelCondition:
    """Polynomial condition q(lambda a) = 0 for angular momentum l."""

    l: int
    bc: BoundaryCondition
    a: float
    polynomial: ComplexPolynomial

    @property
    def degree(self) -> int:
        return self.polynomial.degree

    def newton_ratio(self, x):
        """q(x)/q'(x) computed from Hankel functions instead of the coefficients."""
        x = np.asarray(x, dtype=complex)
        l = self.l
        d = hankel_log_derivative(x.ravel(), l)
        xs = x.ravel()
        with np.errstate(all="ignore"):
            if self.bc.kind == "dirichlet":
                out = 1.0 / ((l + 1) / xs - 1j + d)
            else:
                # q ~ x^{l+1} e^{-ix} (x h' + ea h); written without dividing by x h' + ea h
                ea = self.bc.eta * self.a
                hpp = -(2.0 / xs) * d - (1.0 - l * (l + 1) / xs**2)
                num = xs * d + ea
                out = num / (((l + 1) / xs - 1j) * num + d * (1.0 + ea) + xs * hpp)
        return out.reshape(x.shape)

    def log_derivative(self, x):
        """q'(x)/q(x)."""
        with np.errstate(all="ignore"):
            return 1.0 / self.newton_ratio(x)

    def initial_guesses(self) -> np.ndarray:
        """Points on a half-ellipse in the lower half-plane, symmetric in Re."""
        n = self.degree
        nu = self.l + 0.5
        theta = np.pi * (np.arange(n) + 0.5) / n
        return nu * np.cos(theta) - 1j * (0.6 * nu * np.sin(theta) + 1.0)

    def covering_rectangle(self) -> Tuple[float, float, float, float]:
        """A rectangle (in x = lambda a) containing every root."""
        half = 1.5 * self.l + 3.0 + abs(self.bc.eta * self.a)
        return (-half, half, -(self.l + 2.0 + abs(self.bc.eta * self.a)), 0.5)

    def roots(self, tol: float = 1e-10) -> np.ndarray:
        """Roots in x = lambda a, with conjugate-pair symmetry x, -conj(x) enforced."""
        if self.degree == 0:
            return np.array([], dtype=complex)
        z = find_all_roots(self.polynomial, tol, ratio=self.newton_ratio, initial=self.initial_guesses())
        return _symmetrize(z)

    def argument_count(self) -> int:
        n = BOUNDARY_PER_ROOT * (self.degree + 1)
        return count_zeros_in_rectangle(None, self.covering_rectangle(), n, logderiv=self.log_derivative)


def _symmetrize(z: np.ndarray) -> np.ndarray:
    """Pair roots with their mirror images -conj(z) and average each pair."""
    z = z[np.lexsort((z.imag, z.real))]
    mirror = -np.conj(z[::-1])
    gap = np.abs(z - mirror)
    if np.any(gap > SYMMETRY_RTOL * np.maximum(np.abs(z), 1.0)):
        raise RootFindingError("roots are not symmetric under x -> -conj(x)", z, gap)
    return 0.5 * (z + mirror)


def hankel_condition(l: int, bc, a: float = 1.0) -> HankelCondition:
    if not 0 <= int(l) <= L_MAX or int(l) != l:
        raise ValueError(f"l must be an integer in [0, {L_MAX}]")
    if not a > 0:
        raise ValueError("radius must be positive")
    bc = BoundaryCondition.parse(bc)
    return HankelCondition(int(l), bc, float(a), condition_polynomial(int(l), bc, float(a)))


@dataclass(frozen=True)
class ResonanceRecord:
    lam: complex
    l: int
    bc: str
    multiplicity: int
    band: BandAssignment


@dataclass(frozen=True)
class LFailure:
    l: int
    reason: str


@dataclass
class ResonanceSweep:
    """Records from a sweep over l, plus the l values that failed."""

    bc: BoundaryCondition
    a: float
    l_max: int
    records: List[ResonanceRecord]
    failures: List[LFailure] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return not self.failures

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def sphere_constants(a: float = 1.0, table=None) -> BandConstants:
    table = table if table is not None else default_zero_table()
    return band_constants(ObstacleModel.sphere(a), table)


def _roots_for_l(cond: HankelCondition, tol: float) -> np.ndarray:
    x = cond.roots(tol)
    if x.size:
        resid = np.abs(cond.newton_ratio(x))
        if np.any(~np.isfinite(resid)) or np.any(resid > tol * np.maximum(np.abs(x), 1.0)):
            raise RootFindingError("Newton correction above tolerance", x, resid)
        if np.any(x.imag >= 0):
            raise RootFindingError("root in the closed upper half-plane", x, resid)
    count = cond.argument_count() if cond.degree else 0
    if count != x.size:
        raise RootFindingError(f"argument principle counts {count} zeros, found {x.size}", x, None)
    return x


def compute_resonances(
    bc,
    a: float = 1.0,
    l_max: int = 10,
    tol: float = 1e-10,
    *,
    l_min: int = 0,
    constants: Optional[BandConstants] = None,
    C_margin: float = DEFAULT_C_MARGIN,
    table=None,
) -> ResonanceSweep:
    """Resonances for l_min <= l <= l_max, ordered by (l, -Im lambda, Re lambda).

    An l whose roots fail verification is reported in the failure list and
    contributes no records; the other l values are unaffected.
    """
    bc = BoundaryCondition.parse(bc)
    if not 0 <= l_min <= l_max <= L_MAX:
        raise ValueError(f"need 0 <= l_min <= l_max <= {L_MAX}")
    if not 0 < tol <= 1e-6:
        raise ValueError("tol must lie in (0, 1e-6]")
    table = table if table is not None else default_zero_table()
    constants = constants if constants is not None else sphere_constants(a, table)

    def one(l):
        try:
            return l, _roots_for_l(hankel_condition(l, bc, a), tol) / a, None
        except (RootFindingError, BoundaryTooCloseError, FloatingPointError) as exc:
            return l, None, str(exc)

    results = parallel_map(one, range(l_min, l_max + 1))
    records, failures, lams, ls = [], [], [], []
    for l, lam, err in results:
        if err is not None:
            failures.append(LFailure(l, err))
            continue
        order = np.lexsort((lam.real, -lam.imag))
        lams.extend(lam[order])
        ls.extend([l] * lam.size)
    if lams:
        kinds, js = classify_many(np.array(lams), constants, table, C_margin, bc.family)
        for lam, l, kind, j in zip(lams, ls, kinds, js):
            band = BandAssignment(kind, int(j) if kind in ("gap", "band") else None)
            records.append(ResonanceRecord(complex(lam), l, bc.tag, 2 * l + 1, band))
    return ResonanceSweep(bc, float(a), int(l_max), records, failures)


def _lambdas(records: Sequence[ResonanceRecord]) -> np.ndarray:
    return np.array([r.lam for r in records], dtype=complex)


@dataclass(frozen=True)
class GapViolation:
    lam: complex
    l: int
    gap: int


@dataclass
class GapReport:
    C_margin: float
    Re_min: float
    gaps: Tuple[int, ...]
    checked: int
    violations: List[GapViolation]
    minimal_C: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "C_margin": self.C_margin,
            "Re_min": self.Re_min,
            "gaps": list(self.gaps),
            "checked": self.checked,
            "violations": len(self.violations),
            "minimal_C": self.minimal_C,
            "pass": self.passed,
        }


def verify_gaps(
    records: Sequence[ResonanceRecord],
    constants: BandConstants,
    C_margin: float = DEFAULT_C_MARGIN,
    Re_min: float = 0.0,
    *,
    table=None,
    family: str = "neumann",
    gaps: Optional[Iterable[int]] = None,
) -> GapReport:
    """Check that no record with Re lambda >= Re_min lies in a listed gap.

    The records are reclassified with the given constants and family, so
    Dirichlet records can be tested against Neumann bands. gaps defaults to
    0..j0. minimal_C is the smallest margin that clears the same gaps.
    """
    table = table if table is not None else default_zero_table()
    zeros = family_zeros(table, family)
    limit = gap_limit(constants, zeros, family)
    gaps = tuple(range(limit + 1)) if gaps is None else tuple(int(g) for g in gaps)
    kept = [r for r in records if r.lam.real >= Re_min]
    violations = []
    lam = _lambdas(kept)
    if kept:
        kinds, js = classify_many(lam, constants, table, C_margin, family)
        for rec, kind, j in zip(kept, kinds, js):
            if kind == "gap" and int(j) in gaps:
                violations.append(GapViolation(rec.lam, rec.l, int(j)))
    min_c = minimal_margin(lam, constants, table, gaps, family) if kept else 0.0
    return GapReport(float(C_margin), float(Re_min), gaps, len(kept), violations, min_c)


class IncompleteRecordsError(ValueError):
    """The records stop at too small an l for the requested Weyl radius."""


@dataclass(frozen=True)
class WeylCount:
    r: float
    j: int
    count: int
    predicted: float

    @property
    def ratio(self) -> float:
        return self.count / self.predicted if self.predicted > 0 else math.nan

    def to_dict(self) -> dict:
        return {"r": self.r, "j": self.j, "count": self.count, "predicted": self.predicted, "ratio": self.ratio}


def weyl_prediction(r: float, surface_area: float, dimension: int = 3) -> float:
    """(2 pi)^{1-n} vol(B^{n-1}) vol(boundary) r^{n-1}."""
    n = dimension
    return (2 * math.pi) ** (1 - n) * unit_ball_volume(n - 1) * surface_area * r ** (n - 1)


def required_l_max(r: float, a: float = 1.0) -> int:
    return int(math.ceil(1.5 * r * a))


def weyl_count(
    records: Sequence[ResonanceRecord],
    r: float,
    j: int,
    constants: BandConstants,
    zero_table=None,
    *,
    C_margin: float = DEFAULT_C_MARGIN,
    family: str = "neumann",
    radius: Optional[float] = None,
) -> WeylCount:
    """Band-j resonances with |lambda| <= r counted with multiplicity.

    The sphere radius defaults to 1/Qmin of the constants; the prediction uses
    the sphere's surface area.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    if j < 1:
        raise ValueError("band index must be >= 1")
    table = zero_table if zero_table is not None else default_zero_table()
    a = float(radius) if radius is not None else 1.0 / constants.Qmin
    predicted = weyl_prediction(r, 4 * math.pi * a * a)
    if not records:
        return WeylCount(float(r), int(j), 0, predicted)
    need = required_l_max(r, a)
    have = max(rec.l for rec in records)
    if have < need:
        raise IncompleteRecordsError(f"records stop at l = {have}; |lambda| <= {r} needs l_max >= {need}")
    lam = _lambdas(records)
    inside = np.abs(lam) <= r
    count = 0
    if inside.any():
        kinds, js = classify_many(lam[inside], constants, table, C_margin, family)
        mult = np.array([rec.multiplicity for rec in records])[inside]
        sel = (kinds == BAND) & (js == j)
        count = int(mult[sel].sum())
    return WeylCount(float(r), int(j), count, predicted)


def records_to_csv(records: Sequence[ResonanceRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow([
            rec.bc,
            rec.l,
            f"{rec.lam.real:.17g}",
            f"{rec.lam.imag:.17g}",
            rec.multiplicity,
            rec.band.kind,
            "" if rec.band.j is None else rec.band.j,
        ])
    return buf.getvalue()


def records_from_csv(text: str) -> List[ResonanceRecord]:
    """Inverse of records_to_csv; an empty text gives no records."""
    if not text.strip():
        return []
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"expected CSV columns {','.join(CSV_COLUMNS)}")
    out = []
    for row in reader:
        j = row["band_index"]
        band = BandAssignment(row["band_kind"], int(j) if j != "" else None)
        lam = complex(float(row["re_lambda"]), float(row["im_lambda"]))
        out.append(ResonanceRecord(lam, int(row["l"]), row["bc"], int(row["multiplicity"]), band))
    return out
