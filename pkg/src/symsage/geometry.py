"""Exact convex geometry over rational exponent supports.

Hull membership, interiority, barycentric witnesses and simplicial-circuit
enumeration are all decided over `Fraction` arithmetic; the LPs run through a
two-phase simplex with Bland's rule (no float LP anywhere).  Interior-versus-
boundary dichotomies feed directly into exactness and recession arguments
downstream, so these answers must be exact, not approximate.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

from .core import Exponent, exponent

_ZERO = Fraction(0)
_ONE = Fraction(1)


class CircuitBudgetExceeded(RuntimeError):
    """Raised when circuit enumeration would exceed the configured support cap."""


class HullStatus(enum.Enum):
    OUTSIDE = "outside"
    BOUNDARY = "boundary"
    RELATIVE_INTERIOR = "relative_interior"
    INTERIOR = "interior"


@dataclass(frozen=True)
class HullMembership:
    """Exact location of a point relative to conv(generators).

    `witness` carries barycentric coefficients (summing to one, nonnegative,
    recombining to the query point) for the inside cases, with the origin's
    weight split out when the origin was adjoined.  For OUTSIDE, `separator`
    is a rational functional with separator . point > max_g separator . g.
    """

    status: HullStatus
    witness: dict[Exponent, Fraction] | None = None
    origin_weight: Fraction | None = None
    separator: tuple[Fraction, ...] | None = None


# ---------------------------------------------------------------------------
# exact two-phase simplex:  minimize c.x  s.t.  A x = b, x >= 0
# ---------------------------------------------------------------------------


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: list[Fraction] | None = None
    objective: Fraction | None = None
    farkas: list[Fraction] | None = None  # y with y.A <= 0 componentwise, y.b > 0


def _pivot(rows: list[list[Fraction]], basis: list[int], r: int, col: int) -> None:
    piv = rows[r][col]
    rows[r] = [v / piv for v in rows[r]]
    for i, row in enumerate(rows):
        if i != r and row[col] != 0:
            f = row[col]
            prow = rows[r]
            rows[i] = [v - f * p for v, p in zip(row, prow)]
    basis[r] = col


def _iterate(rows, cost, basis, ncols, barred_from) -> str:
    """Bland-rule pivoting until optimal or unbounded; mutates in place."""
    while True:
        enter = -1
        for j in range(ncols):
            if j >= barred_from:
                break
            if j not in basis and cost[j] < 0:
                enter = j
                break
        if enter < 0:
            return "optimal"
        leave_row, best, best_var = -1, None, None
        for i, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < best_var):
                    leave_row, best, best_var = i, ratio, basis[i]
        if leave_row < 0:
            return "unbounded"
        _pivot(rows, basis, leave_row, enter)
        f = cost[enter]
        if f != 0:
            prow = rows[leave_row]
            cost[:] = [v - f * p for v, p in zip(cost, prow)]


def lp_solve(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Sequence[Fraction]) -> LPResult:
    """Exact LP: minimize c.x subject to A x = b, x >= 0."""
    m, n = len(A), len(c)
    signs = [(-1 if bi < 0 else 1) for bi in b]
    rows = [
        [Fraction(v) * s for v in row] + [_ZERO] * m + [Fraction(bi) * s]
        for row, bi, s in zip(A, b, signs)
    ]
    for i in range(m):
        rows[i][n + i] = _ONE
    basis = [n + i for i in range(m)]

    # phase 1: minimize the artificial sum
    cost = [_ZERO] * n + [_ONE] * m + [_ZERO]
    for row in rows:
        cost = [v - r for v, r in zip(cost, row)]
    status = _iterate(rows, cost, basis, n + m, barred_from=n + m)
    assert status == "optimal"
    if -cost[-1] > 0:
        farkas = [(1 - cost[n + i]) * signs[i] for i in range(m)]
        return LPResult("infeasible", farkas=farkas)

    # drive leftover artificials out of the basis (each sits at value 0)
    drop: list[int] = []
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if rows[i][j] != 0), None)
            if col is None:
                drop.append(i)
            else:
                _pivot(rows, basis, i, col)
    for i in reversed(drop):
        del rows[i]
        del basis[i]

    # phase 2
    cost = [Fraction(ci) for ci in c] + [_ZERO] * m + [_ZERO]
    for i, row in enumerate(rows):
        f = cost[basis[i]]
        if f != 0:
            cost = [v - f * r for v, r in zip(cost, row)]
    status = _iterate(rows, cost, basis, n + m, barred_from=n)
    if status == "unbounded":
        return LPResult("unbounded")
    x = [_ZERO] * n
    for i, bi in enumerate(basis):
        if bi < n:
            x[bi] = rows[i][-1]
    return LPResult("optimal", x=x, objective=-cost[-1])


# ---------------------------------------------------------------------------
# rational linear algebra helpers
# ---------------------------------------------------------------------------


def rational_rank(mat: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(r) for r in mat]
    rank, ncols = 0, (len(rows[0]) if rows else 0)
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        prow = [v / rows[rank][col] for v in rows[rank]]
        rows[rank] = prow
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [v - f * p for v, p in zip(rows[i], prow)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def affine_dim(points: Iterable[Exponent]) -> int:
    pts = list(points)
    if len(pts) <= 1:
        return 0
    base = pts[0]
    return rational_rank([[a - b for a, b in zip(p, base)] for p in pts[1:]])


def affinely_independent(points: Sequence[Exponent]) -> bool:
    return affine_dim(points) == len(points) - 1


def barycentric_coordinates(points: Sequence[Exponent], target: Exponent) -> list[Fraction] | None:
    """Unique affine weights with sum(l) = 1, sum(l_i p_i) = target, or None.

    Requires affinely independent `points`; returns None when the target is
    outside their affine hull.  Weights may be negative.
    """
    k, n = len(points), len(target)
    aug = [[Fraction(points[j][i]) for j in range(k)] + [Fraction(target[i])] for i in range(n)]
    aug.append([_ONE] * k + [_ONE])
    rank = 0
    pivots = []
    for col in range(k):
        piv = next((i for i in range(rank, len(aug)) if aug[i][col] != 0), None)
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        prow = [v / aug[rank][col] for v in aug[rank]]
        aug[rank] = prow
        for i in range(len(aug)):
            if i != rank and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [v - f * p for v, p in zip(aug[i], prow)]
        pivots.append(col)
        rank += 1
    if rank < k:  # affinely dependent input
        return None
    for i in range(rank, len(aug)):
        if aug[i][-1] != 0:
            return None  # inconsistent: target outside the affine hull
    sol = [_ZERO] * k
    for r, col in enumerate(pivots):
        sol[col] = aug[r][-1]
    return sol


# ---------------------------------------------------------------------------
# hull membership
# ---------------------------------------------------------------------------


def hull_locate(point, generators: Iterable, include_origin: bool = False) -> HullMembership:
    """Exact location of `point` relative to conv(generators [+ origin]).

    INTERIOR means interior relative to R^n, RELATIVE_INTERIOR relative to
    the affine hull of the generators; BOUNDARY is membership on the relative
    boundary.  Decided by maximizing the minimum barycentric weight.
    """
    p = exponent(point)
    n = len(p)
    gens: list[Exponent] = []
    for g in generators:
        e = exponent(g)
        if len(e) != n:
            raise ValueError(f"generator {e} has dimension {len(e)}, expected {n}")
        if e not in gens:
            gens.append(e)
    if include_origin:
        zero = (_ZERO,) * n
        if zero not in gens:
            gens.append(zero)
    if not gens:
        raise ValueError("generator set must be non-empty")

    # variables: t, s_g  with weights l_g = t + s_g;  maximize t
    G = len(gens)
    A: list[list[Fraction]] = []
    for k in range(n):
        A.append([sum(g[k] for g in gens)] + [g[k] for g in gens])
    A.append([Fraction(G)] + [_ONE] * G)
    b = [p[k] for k in range(n)] + [_ONE]
    c = [-_ONE] + [_ZERO] * G
    res = lp_solve(A, b, c)

    if res.status == "infeasible":
        y = res.farkas
        v, offset = tuple(y[:n]), y[n]
        # column feasibility gives v.g + offset <= 0 while v.p + offset > 0
        return HullMembership(HullStatus.OUTSIDE, separator=v)
    assert res.status == "optimal"
    t = res.x[0]
    weights = {g: t + res.x[1 + i] for i, g in enumerate(gens)}
    origin_w = None
    if include_origin:
        origin_w = weights.get((_ZERO,) * n)
    if t == 0:
        status = HullStatus.BOUNDARY
    elif affine_dim(gens) == n:
        status = HullStatus.INTERIOR
    else:
        status = HullStatus.RELATIVE_INTERIOR
    return HullMembership(status, witness=weights, origin_weight=origin_w)


# ---------------------------------------------------------------------------
# simplicial circuits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitVector:
    """Normalized simplicial circuit: affinely independent positive support
    whose weights are positive, sum to one and recombine to the negative point."""

    positive_support: tuple[tuple[Exponent, Fraction], ...]
    negative_point: Exponent
    normalized: bool = True

    def __post_init__(self):
        pts = [p for p, _ in self.positive_support]
        wts = [w for _, w in self.positive_support]
        if any(w <= 0 for w in wts):
            raise ValueError("circuit weights must be positive")
        if self.negative_point in pts:
            raise ValueError("negative point may not appear in the positive support")
        if self.normalized:
            if sum(wts) != 1:
                raise ValueError("normalized circuit weights must sum to 1")
            n = len(self.negative_point)
            for k in range(n):
                if sum(w * p[k] for p, w in self.positive_support) != self.negative_point[k]:
                    raise ValueError("circuit weights do not recombine to the negative point")

    @property
    def weights(self) -> dict[Exponent, Fraction]:
        return dict(self.positive_support)

    def to_json_dict(self) -> dict:
        return {
            "positive_support": [
                {"exp": [str(c) for c in p], "weight": str(w)} for p, w in self.positive_support
            ],
            "negative_point": [str(c) for c in self.negative_point],
        }


def enumerate_circuits(support: Iterable, beta, max_support: int = 20) -> list[CircuitVector]:
    """All normalized simplicial circuits with negative point `beta` and
    positive support inside `support` minus beta.

    Brute force over affinely independent subsets of size <= n + 1; each
    circuit is found exactly once because the all-positive barycentric
    representation inside an independent set is unique.  Degenerate
    singletons (the point itself) cannot occur since beta is excluded.
    """
    b = exponent(beta)
    pts = sorted({exponent(s) for s in support} - {b})
    if len(pts) > max_support:
        raise CircuitBudgetExceeded(
            f"support has {len(pts)} points, cap is {max_support}; raise max_support to proceed"
        )
    n = len(b)
    out: list[CircuitVector] = []
    for k in range(2, min(len(pts), n + 1) + 1):
        for subset in itertools.combinations(pts, k):
            lam = barycentric_coordinates(subset, b)
            if lam is None or any(l <= 0 for l in lam):
                continue
            out.append(CircuitVector(tuple(zip(subset, lam)), b))
    return out


def sonc_admissible(circuit: CircuitVector) -> bool:
    """True when the positive support is even-integer and the negative point
    integer, the parity condition for circuits usable in polynomial certificates."""
    for p, _ in circuit.positive_support:
        for coord in p:
            if coord.denominator != 1 or coord < 0 or coord.numerator % 2 != 0:
                return False
    return all(c.denominator == 1 and c >= 0 for c in circuit.negative_point)


# ---------------------------------------------------------------------------
# location of the origin relative to a difference support (for AGE recession)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OriginFace:
    """Where the origin sits relative to conv(deltas), with the minimal face
    containing it and, when relevant, an exact recession direction: a vector
    vanishing on the face and strictly negative against every other delta."""

    status: HullStatus
    face: frozenset[Exponent]
    recession: tuple[Fraction, ...] | None


def _max_weight_positive(deltas: list[Exponent], idx: int) -> bool:
    """Does some convex representation of the origin put positive weight on deltas[idx]?"""
    n = len(deltas[0])
    A = [[d[k] for d in deltas] for k in range(n)]
    A.append([_ONE] * len(deltas))
    b = [_ZERO] * n + [_ONE]
    c = [_ZERO] * len(deltas)
    c[idx] = -_ONE
    res = lp_solve(A, b, c)
    return res.status == "optimal" and -res.objective > 0


def _face_recession(deltas: list[Exponent], face: set[Exponent]) -> tuple[Fraction, ...]:
    """Exact v with <d, v> = 0 on the face and <d, v> <= -1 off it."""
    n = len(deltas[0])
    off = [d for d in deltas if d not in face]
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    nslack = len(off)
    for d in face:
        A.append(list(d) + [-x for x in d] + [_ZERO] * nslack)
        b.append(_ZERO)
    for i, d in enumerate(off):
        row = list(d) + [-x for x in d] + [_ZERO] * nslack
        row[2 * n + i] = _ONE
        A.append(row)
        b.append(Fraction(-1))
    res = lp_solve(A, b, [_ZERO] * (2 * n + nslack))
    assert res.status == "optimal", "minimal faces of a polytope are exposed"
    return tuple(res.x[k] - res.x[n + k] for k in range(n))


@lru_cache(maxsize=4096)
def origin_face(deltas: frozenset[Exponent]) -> OriginFace:
    """Cached exact analysis of the origin against conv(deltas)."""
    dl = sorted(deltas)
    n = len(dl[0])
    loc = hull_locate((_ZERO,) * n, dl, include_origin=False)
    if loc.status == HullStatus.OUTSIDE:
        v = loc.separator
        # separation gives <d, v> < <0, v> = 0 strictly for every delta
        return OriginFace(HullStatus.OUTSIDE, frozenset(), v)
    if loc.status in (HullStatus.INTERIOR, HullStatus.RELATIVE_INTERIOR):
        return OriginFace(loc.status, frozenset(dl), None)
    face = {d for i, d in enumerate(dl) if _max_weight_positive(dl, i)}
    return OriginFace(HullStatus.BOUNDARY, frozenset(face), _face_recession(dl, face))
