"""SAGE-cone membership and certified lower bounds.

Membership of f in the cone of sums of AGE signomials is decided by the
cutting-plane feasibility engine (one AGE block per negative coefficient,
positive mass split among the blocks).  The lower bound

    f^SAGE = sup { lambda : f - lambda in the SAGE cone over supp(f) + {0} }

is computed by bisection over that membership oracle.  Two exact prechecks
bracket the search: a negative point strictly outside conv(positive support
+ origin) forces -inf by hyperplane separation, and a one-shot feasibility
probe with unlimited constant mass decides whether ANY shift is feasible,
because lowering lambda only ever adds constant-term budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .age import AgeCertificate, is_age
from .core import Exponent, Signomial, SupportSplit, coefficient_scale, exponent, sig
from .geometry import HullStatus, hull_locate
from .numeric import grid_minimize
from ._feasibility import BlockSpec, BudgetRow, FeasibilityOracle, OracleResult, VarGroup

_WIDEN_LIMIT = 60


@dataclass(frozen=True)
class SageDecomposition:
    """Per-beta AGE components plus a nonnegative monomial remainder; the
    component coefficient vectors and the remainder sum back to the target."""

    components: dict[Exponent, tuple[dict[Exponent, float], AgeCertificate]]
    monomial_remainder: dict[Exponent, float]

    def to_json_dict(self) -> dict:
        return {
            "components": [
                {
                    "beta": [str(c) for c in beta],
                    "coefficients": [
                        {"exp": [str(c) for c in e], "coef": v} for e, v in sorted(coeffs.items())
                    ],
                    "certificate": cert.to_json_dict(),
                }
                for beta, (coeffs, cert) in sorted(self.components.items())
            ],
            "monomial_remainder": [
                {"exp": [str(c) for c in e], "coef": v}
                for e, v in sorted(self.monomial_remainder.items())
                if v != 0.0
            ],
        }


@dataclass(frozen=True)
class SageBound:
    """Result of a lower-bound search; -inf is the explicit `unbounded` flag,
    never a float sentinel."""

    unbounded: bool
    value: float | None = None
    decomposition: SageDecomposition | None = None
    symmetric_decomposition: object | None = None

    def to_json_dict(self) -> dict:
        if self.unbounded:
            return {"bound": "-inf", "certificate": None}
        cert = None
        if self.decomposition is not None:
            cert = self.decomposition.to_json_dict()
        elif self.symmetric_decomposition is not None:
            cert = self.symmetric_decomposition.to_json_dict()
        return {"bound": self.value, "certificate": cert}


def _support_set(e: Exponent) -> frozenset[int]:
    return frozenset(i for i, c in enumerate(e) if c != 0)


def reduce_support(f: Signomial, beta) -> Signomial:
    """Drop positive terms whose variable support is not contained in beta's.

    Valid reduction for AGE membership when every positive exponent vector is
    nonnegative: a circuit summing to beta cannot use a variable absent from
    beta.  Constants always survive (empty support)."""
    b = exponent(beta)
    bsupp = _support_set(b)
    out: dict[Exponent, float] = {}
    for a, c in f.terms.items():
        if a == b:
            out[a] = c
            continue
        if c < 0:
            raise ValueError(f"coefficient at {a} is negative; only {b} may be negative")
        if any(x < 0 for x in a):
            raise ValueError(f"support reduction requires nonnegative exponents, got {a}")
        if _support_set(a) <= bsupp:
            out[a] = c
    return Signomial(f.n, out, f.flavor)


def _build_plain_oracle(
    f: Signomial, negatives: list[Exponent], dynamic_constant: bool
) -> FeasibilityOracle:
    n = f.n
    zero = (Fraction(0),) * n
    sources: dict[Exponent, float] = {
        p: c for p, c in f.terms.items() if c > 0 and not (dynamic_constant and p == zero)
    }
    row_index: dict[Exponent, int] = {}
    rows: list[BudgetRow] = []
    for p in sorted(sources):
        row_index[p] = len(rows)
        rows.append(BudgetRow(sources[p]))
    if dynamic_constant:
        row_index[zero] = len(rows)
        rows.append(BudgetRow(f.coeff(zero), constant_row=True))
    all_nonneg = all(all(c >= 0 for c in p) for p in row_index)

    def allowed(beta: Exponent) -> list[Exponent]:
        pts = [p for p in sorted(row_index) if p != beta]
        if all_nonneg and all(c >= 0 for c in beta):
            bsupp = _support_set(beta)
            pts = [p for p in pts if _support_set(p) <= bsupp]
        return pts

    blocks: list[BlockSpec] = []
    for beta in sorted(negatives):
        groups = [VarGroup((p,), row_index[p], 1.0) for p in allowed(beta)]
        blocks.append(BlockSpec(beta, f.coeff(beta), groups))
    if dynamic_constant:
        groups = [VarGroup((p,), row_index[p], 1.0) for p in allowed(zero)]
        blocks.append(BlockSpec(zero, f.coeff(zero), groups, constant_block=True))
    return FeasibilityOracle(blocks, rows)


def _extract_decomposition(
    f: Signomial, oracle: FeasibilityOracle, result: OracleResult, lam: float, tol: float
) -> SageDecomposition:
    n = f.n
    zero = (Fraction(0),) * n
    components: dict[Exponent, tuple[dict[Exponent, float], AgeCertificate]] = {}
    draws: dict[Exponent, float] = {}
    for blk, alloc in zip(oracle.blocks, result.allocations):
        c_beta = blk.coefficient(lam)
        if c_beta >= 0 and not alloc:
            continue
        block_terms = dict(alloc)
        block_terms[blk.beta] = block_terms.get(blk.beta, 0.0) + c_beta
        cert = is_age(Signomial(n, block_terms), blk.beta, tol=10 * tol)
        if cert is None:
            raise RuntimeError("feasible allocation failed independent AGE re-verification")
        components[blk.beta] = (block_terms, cert)
        for p, v in alloc.items():
            draws[p] = draws.get(p, 0.0) + v
    remainder: dict[Exponent, float] = {}
    for p, c in f.terms.items():
        c_eff = c - lam if p == zero else c
        if p in components:
            continue
        left = c_eff - draws.get(p, 0.0)
        if left < -10 * tol * coefficient_scale(f):
            raise RuntimeError(f"allocation overdraws coefficient at {p}: {left}")
        remainder[p] = max(left, 0.0)
    if zero not in f.terms and lam != 0.0 and zero not in components:
        left = -lam - draws.get(zero, 0.0)
        remainder[zero] = max(left, 0.0)
    return SageDecomposition(components, remainder)


def is_sage(
    f: Signomial, split: SupportSplit | None = None, tol: float = 1e-8
) -> SageDecomposition | None:
    """Split f into per-beta AGE components plus a nonnegative remainder, or None.

    `split` declares which support points may carry negative coefficients;
    by default exactly the points where f's coefficient is negative.  Returned
    decompositions are sound (every block is independently re-verified);
    rejections are certified by the cutting-plane upper bound.
    """
    g = sig(f)
    if split is None:
        split = SupportSplit.from_signomial(g)
    for p in split.positive:
        if g.coeff(p) < 0:
            raise ValueError(f"negative coefficient {g.coeff(p)} on declared positive point {p}")
    negatives = sorted(p for p in split.negatives if g.coeff(p) < 0)
    if not negatives:
        return SageDecomposition({}, dict(g.terms))
    usable = {p: c for p, c in g.terms.items() if c > 0 and p in split.positive | split.negatives}
    restricted = Signomial(g.n, {**usable, **{b: g.coeff(b) for b in negatives}})
    oracle = _build_plain_oracle(restricted, negatives, dynamic_constant=False)
    result = oracle.query(0.0, tol=tol)
    if not result.feasible:
        return None
    return _extract_decomposition(restricted, oracle, result, 0.0, tol)


def _grid_upper_seed(g: Signomial) -> float:
    points = 9 if g.n <= 3 else 7
    val, _ = grid_minimize(g, radius=10.0, points=points)
    return val


def sage_bound(
    f: Signomial,
    tol: float = 1e-6,
    membership_tol: float = 1e-8,
    symmetric: bool | None = None,
) -> SageBound:
    """Certified lower bound f^SAGE with the decomposition witnessing it.

    `symmetric=None` auto-detects coordinate-permutation invariance and then
    solves the reduced per-orbit-representative problem, which is an exact
    reformulation, not a relaxation; True forces it (error when f is not
    symmetric), False forces the plain path.
    """
    g = sig(f)
    n = g.n
    zero = (Fraction(0),) * n
    scale = coefficient_scale(g)
    pos_pts = [p for p, c in g.terms.items() if c > 0 and p != zero]
    negatives = sorted(p for p, c in g.terms.items() if c < 0 and p != zero)

    for beta in negatives:
        if not pos_pts:
            return SageBound(unbounded=True)
        if hull_locate(beta, pos_pts, include_origin=True).status == HullStatus.OUTSIDE:
            return SageBound(unbounded=True)

    if symmetric is None:
        symmetric = g.is_symmetric(tol=1e-12 * scale)
    if symmetric:
        from . import symmetry  # deferred: symmetry builds on this module's types

        if not g.is_symmetric(tol=1e-9 * scale):
            raise ValueError("symmetric=True requires a coordinate-permutation invariant input")
        oracle = symmetry.build_symmetric_oracle(g, negatives, dynamic_constant=True)
    else:
        oracle = _build_plain_oracle(g, negatives, dynamic_constant=True)

    c0 = g.coeff(zero)
    probe = oracle.query(free_constant=True, tol=membership_tol)
    if probe.converged and not probe.feasible:
        return SageBound(unbounded=True)

    grid_seed = _grid_upper_seed(g)
    hi = grid_seed + max(1.0, abs(grid_seed)) * 1e-9
    if probe.converged:
        lo = min(c0 - oracle.constant_mass_used(probe.allocations) - 1.0, hi - 1.0)
        if not oracle.query(lo, tol=membership_tol).feasible:
            lo = None
    else:
        lo = None
    if lo is None:
        lo, width = hi - 1.0, 1.0
        for _ in range(_WIDEN_LIMIT):
            if oracle.query(lo, tol=membership_tol).feasible:
                break
            width *= 2.0
            lo = hi - width
        else:
            return SageBound(unbounded=True)

    for _ in range(_WIDEN_LIMIT):
        if not oracle.query(hi, tol=membership_tol).feasible:
            break
        hi += max(1.0, abs(hi))
    else:
        raise RuntimeError("could not bracket the bound from above")

    best: OracleResult | None = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = oracle.query(mid, tol=membership_tol)
        if res.feasible:
            lo, best = mid, res
        else:
            hi = mid
    if best is None:
        best = oracle.query(lo, tol=membership_tol)
        if not best.feasible:
            raise RuntimeError("bracket lower end lost feasibility")

    if symmetric:
        from . import symmetry

        sym = symmetry.extract_symmetric_decomposition(g, oracle, best, lo, membership_tol)
        return SageBound(unbounded=False, value=lo, symmetric_decomposition=sym)
    decomp = _extract_decomposition(g, oracle, best, lo, membership_tol)
    return SageBound(unbounded=False, value=lo, decomposition=decomp)
