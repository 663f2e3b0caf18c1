"""Resonance bands and resonance-free gaps as predicates on complex numbers.

With X = (Re lambda)^{1/3} and y = -Im lambda, band j is

    kappa z_j X - C <= y <= K z_j X + C,

gap 0 is 0 <= y < kappa z_1 X - C and gap j (1 <= j <= j0) is
K z_j X + C < y < kappa z_{j+1} X - C. Here z_j = zeta'_j (Neumann family)
or zeta_j (Dirichlet family). Boundary points belong to bands.

In the rescaled plane z (h = 1/Re lambda, -Im z = -2 h^{1/3} Im lambda) the same
regions read 2 kappa z_j - 2 C h^{1/3} <= -Im z <= 2 K z_j + 2 C h^{1/3}, etc.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from reslab.geometry import BAND_FACTOR, BandConstants, pinched_index

GAP, BAND, UNCLASSIFIED, TOO_SMALL_RE = "gap", "band", "unclassified", "too_small_re"
DEFAULT_C_MARGIN = 1.0
DEFAULT_RE_CAP = 1e3
FAMILIES = ("neumann", "dirichlet")


@dataclass(frozen=True)
class BandAssignment:
    """Gap(j), Band(j), Unclassified or TooSmallRe."""

    kind: str
    j: Optional[int] = None

    def __str__(self) -> str:
        if self.kind == GAP:
            return f"Gap({self.j})"
        if self.kind == BAND:
            return f"Band({self.j})"
        return "Unclassified" if self.kind == UNCLASSIFIED else "TooSmallRe"

    @classmethod
    def gap(cls, j: int) -> "BandAssignment":
        return cls(GAP, int(j))

    @classmethod
    def band(cls, j: int) -> "BandAssignment":
        return cls(BAND, int(j))


@dataclass(frozen=True)
class BandSpec:
    """Edges of band j and of the gap above it, as multiples of (Re lambda)^{1/3}."""

    j: int
    kappa: float
    K_const: float
    C_margin: float
    zeta_j: float
    zeta_next: float

    @property
    def gap_is_open(self) -> bool:
        """Pinched condition at j: K z_j < kappa z_{j+1}."""
        return self.K_const * self.zeta_j < self.kappa * self.zeta_next

    def gap_threshold(self) -> float:
        """Re lambda beyond which gap j is nonempty (inf if it never opens)."""
        width = self.kappa * self.zeta_next - self.K_const * self.zeta_j
        return (2 * self.C_margin / width) ** 3 if width > 0 else math.inf

    def band_edges(self, re_lambda):
        x = np.cbrt(np.asarray(re_lambda, dtype=float))
        return self.kappa * self.zeta_j * x - self.C_margin, self.K_const * self.zeta_j * x + self.C_margin

    def gap_edges(self, re_lambda):
        x = np.cbrt(np.asarray(re_lambda, dtype=float))
        return self.K_const * self.zeta_j * x + self.C_margin, self.kappa * self.zeta_next * x - self.C_margin


def family_zeros(zero_table, family: str = "neumann") -> np.ndarray:
    if family == "neumann":
        return np.asarray(zero_table.zeros_ai_prime, dtype=float)
    if family == "dirichlet":
        return np.asarray(zero_table.zeros_ai, dtype=float)
    raise ValueError(f"unknown band family {family!r}")


def gap_limit(constants: BandConstants, zeros: np.ndarray, family: str) -> int:
    """Highest gap index asserted: j0 for the Neumann family, else recomputed."""
    if family == "neumann":
        return min(constants.j0, zeros.size - 1)
    return min(pinched_index(constants.Qmax / constants.Qmin, zeros), zeros.size - 1)


def band_spec(j: int, constants: BandConstants, zero_table, C_margin: float = DEFAULT_C_MARGIN, family: str = "neumann") -> BandSpec:
    z = family_zeros(zero_table, family)
    if not 1 <= j < z.size:
        raise ValueError("band index outside the zero table")
    return BandSpec(j, constants.kappa, constants.K_const, C_margin, float(z[j - 1]), float(z[j]))


def _classify_core(scale, y, kappa, K, zeros, j_gap, C):
    """Vectorized classification; scale is the band-curve multiplier per point.

    Returns (kind codes, j) with codes 0 gap, 1 band, 2 unclassified.
    """
    scale = np.atleast_1d(scale).astype(float)
    y = np.atleast_1d(y).astype(float)
    m = y.size
    code = np.full(m, 2, dtype=np.int8)
    jj = np.zeros(m, dtype=np.int64)
    chunk = max(1, 2_000_000 // max(zeros.size, 1))
    for s in range(0, m, chunk):
        sl = slice(s, s + chunk)
        lo = kappa * zeros[None, :] * scale[sl, None] - C[sl, None]
        hi = K * zeros[None, :] * scale[sl, None] + C[sl, None]
        inside = (lo <= y[sl, None]) & (y[sl, None] <= hi)
        hit = inside.any(axis=1)
        first = np.argmax(inside, axis=1)
        code[sl] = np.where(hit, 1, 2)
        jj[sl] = np.where(hit, first + 1, 0)
    # gaps among the points that are in no band
    rest = code == 2
    if rest.any():
        ys, sc, cs = y[rest], scale[rest], C[rest]
        gj = np.full(ys.size, -1, dtype=np.int64)
        gap0 = (ys >= 0) & (ys < kappa * zeros[0] * sc - cs)
        gj[gap0] = 0
        if j_gap >= 1:
            upper = kappa * zeros[1 : j_gap + 1][None, :] * sc[:, None] - cs[:, None]
            lower = K * zeros[:j_gap][None, :] * sc[:, None] + cs[:, None]
            g = (lower < ys[:, None]) & (ys[:, None] < upper)
            anyg = g.any(axis=1) & (gj < 0)
            gj[anyg] = np.argmax(g[anyg], axis=1) + 1
        sub = np.where(gj >= 0, 0, 2)
        code[rest] = sub
        jj[rest] = np.where(gj >= 0, gj, 0)
    return code, jj


_KINDS = {0: GAP, 1: BAND, 2: UNCLASSIFIED}


def classify_many(lambdas, constants: BandConstants, zero_table, C_margin: float = DEFAULT_C_MARGIN, family: str = "neumann"):
    """classify_lambda over an array; returns (kinds, j) as arrays of str and int."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    if np.any(lam.imag > 0):
        raise ValueError("resonances lie in the closed lower half-plane (Im lambda <= 0)")
    zeros = family_zeros(zero_table, family)
    C = np.full(lam.size, float(C_margin))
    small = lam.real < C_margin
    kinds = np.full(lam.size, TOO_SMALL_RE, dtype=object)
    j = np.zeros(lam.size, dtype=np.int64)
    ok = ~small
    if ok.any():
        code, jj = _classify_core(
            np.cbrt(lam.real[ok]), -lam.imag[ok], constants.kappa, constants.K_const, zeros,
            gap_limit(constants, zeros, family), C[ok],
        )
        kinds[ok] = [_KINDS[c] for c in code]
        j[ok] = jj
    return kinds, j


def classify_lambda(lam: complex, constants: BandConstants, zero_table, C_margin: float = DEFAULT_C_MARGIN, family: str = "neumann") -> BandAssignment:
    """Gap(j), Band(j), Unclassified or TooSmallRe for a point of the lower half-plane."""
    kinds, j = classify_many([lam], constants, zero_table, C_margin, family)
    kind = kinds[0]
    return BandAssignment(kind, int(j[0]) if kind in (GAP, BAND) else None)


def rescaled_constants(mu: float, zero_table) -> BandConstants:
    """kappa = K = 2^{-1/3} cos(pi/6) (mu/2)^{2/3} for a fixed curvature mu = 2Q."""
    q = 0.5 * float(mu)
    kappa = BAND_FACTOR * q ** (2.0 / 3.0)
    flags = tuple(True for _ in range(zero_table.count - 1))
    return BandConstants(kappa, kappa, zero_table.count - 1, q, q, flags)


def classify_rescaled(
    z: complex,
    mu: float,
    zero_table,
    C_margin: float = DEFAULT_C_MARGIN,
    h: float = 0.01,
    family: str = "neumann",
    constants: Optional[BandConstants] = None,
    re_cap: float = DEFAULT_RE_CAP,
) -> BandAssignment:
    """Classify z in the rescaled plane with h = 1/Re lambda and margin 2 C h^{1/3}.

    mu is the symbol value 2Q; for a fixed mu the band centres sit at
    -Im z = cos(pi/6) mu^{2/3} z_j = 2 kappa z_j. Passing constants overrides
    kappa, K and j0 (for obstacles with kappa < K).
    """
    z = complex(z)
    if not 0 < h < 1:
        raise ValueError("h must lie in (0, 1)")
    if abs(z.real) > re_cap:
        raise ValueError("|Re z| exceeds the configured cap")
    if z.imag > 0:
        raise ValueError("resonances lie in the closed lower half-plane (Im z <= 0)")
    consts = constants if constants is not None else rescaled_constants(mu, zero_table)
    if 1.0 / h < C_margin:
        return BandAssignment(TOO_SMALL_RE)
    zeros = family_zeros(zero_table, family)
    margin = 2.0 * C_margin * h ** (1.0 / 3.0)
    code, jj = _classify_core(
        np.array([2.0]), np.array([-z.imag]), consts.kappa, consts.K_const, zeros,
        gap_limit(consts, zeros, family), np.array([margin]),
    )
    kind = _KINDS[int(code[0])]
    return BandAssignment(kind, int(jj[0]) if kind != UNCLASSIFIED else None)


def to_rescaled(lam: complex, re_z: float = 0.0):
    """(z, h) with h = 1/Re lambda and -Im z = -2 h^{1/3} Im lambda."""
    lam = complex(lam)
    h = 1.0 / lam.real
    return complex(re_z, 2.0 * h ** (1.0 / 3.0) * lam.imag), h


def minimal_margin(lambdas, constants: BandConstants, zero_table, gaps: Sequence[int], family: str = "neumann") -> float:
    """Smallest C for which no point lies in any of the listed gaps.

    A point with Re lambda = r violates gap j for every C < d_j (its distance
    into the open gap) with C <= r; the bound is the largest min(d_j, r).
    Returns 0 when no point lies inside a listed gap at C = 0.
    """
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    lam = lam[lam.real > 0]
    if lam.size == 0:
        return 0.0
    zeros = family_zeros(zero_table, family)
    x = np.cbrt(lam.real)
    y = -lam.imag
    worst = np.zeros(lam.size)
    limit = gap_limit(constants, zeros, family)
    for j in gaps:
        if j == 0:
            d = np.where(y >= 0, constants.kappa * zeros[0] * x - y, -np.inf)
        elif 1 <= j <= limit:
            d = np.minimum(y - constants.K_const * zeros[j - 1] * x, constants.kappa * zeros[j] * x - y)
        else:
            continue
        worst = np.maximum(worst, np.minimum(d, lam.real))
    return float(max(0.0, worst.max()))


def band_curves(constants: BandConstants, zero_table, re_values, bands: Sequence[int], C_margin: float = DEFAULT_C_MARGIN, family: str = "neumann") -> np.ndarray:
    """Columns Re lambda, then lower and upper edge (-Im lambda) per band."""
    re = np.asarray(re_values, dtype=float)
    zeros = family_zeros(zero_table, family)
    x = np.cbrt(re)
    cols = [re]
    for j in bands:
        cols.append(constants.kappa * zeros[j - 1] * x - C_margin)
        cols.append(constants.K_const * zeros[j - 1] * x + C_margin)
    return np.stack(cols, axis=1)


def band_curves_csv(constants: BandConstants, zero_table, re_values, bands: Sequence[int], C_margin: float = DEFAULT_C_MARGIN, family: str = "neumann") -> str:
    data = band_curves(constants, zero_table, re_values, bands, C_margin, family)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["Re_lambda"]
    for j in bands:
        header += [f"band_{j}_lower", f"band_{j}_upper"]
    w.writerow(header)
    for row in data:
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()
