"""Joint feasibility engine for sums-of-AGE membership.

Deciding membership in a SAGE-type cone means splitting the positive
coefficient mass among one AGE block per negative term so that every block is
nonnegative.  Each block's slack

    G_b(x_b) = age infimum of the block's positive allocation + c_beta_b

is concave in the allocation (an infimum of linear functions of the
coefficients), so "all blocks nonnegative" is a jointly convex feasibility
problem.  It is solved here by maximizing the minimum slack with Kelley-style
cutting planes: the factors e^{<a - beta, x>} at any point x give a global
over-estimator of a block's slack (tight at the block's entropy minimizer, by
the envelope theorem), hence the LP value is a true upper bound on the
achievable minimum slack.  That makes rejections certified rather than
heuristic at this scale: UB < -tol proves infeasibility, while acceptance
always comes from an explicitly evaluated allocation.

The same engine serves the plain cone (one variable per support point) and
the symmetric reduction (one variable per stabilizer orbit, with multiplicity
weights in the budget rows).  Cut vectors do not depend on the bound shift
lambda, so a bisection reuses one oracle instance across all its queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .age import AgeAnalysis, analyze_age_infimum
from .core import Exponent

_FREE_CONSTANT_CAP = 1e16
_MAX_CUTS_PER_BLOCK = 120


@dataclass
class VarGroup:
    """One allocation variable: per-point mass on `points`, drawing
    mult * value from budget row `row`."""

    points: tuple[Exponent, ...]
    row: int
    mult: float


@dataclass
class BlockSpec:
    """One AGE block: negative point, its (lambda-dependent) coefficient and
    the allocation variables it may use."""

    beta: Exponent
    c_beta: float
    groups: list[VarGroup]
    constant_block: bool = False  # coefficient is c_beta - lambda

    def coefficient(self, lam: float) -> float:
        return self.c_beta - lam if self.constant_block else self.c_beta


@dataclass
class BudgetRow:
    rhs: float
    constant_row: bool = False  # available mass is rhs - lambda, floored at 0

    def available(self, lam: float) -> float:
        if self.constant_row:
            return max(self.rhs - lam, 0.0)
        return self.rhs


@dataclass
class OracleResult:
    feasible: bool
    min_slack: float
    upper_bound: float
    allocations: list[dict[Exponent, float]]
    analyses: list[AgeAnalysis | None]
    converged: bool = True


class FeasibilityOracle:
    """Cutting-plane maximizer of the minimum AGE-block slack."""

    def __init__(self, blocks: list[BlockSpec], rows: list[BudgetRow]):
        self.blocks = blocks
        self.rows = rows
        self._cuts: list[list[np.ndarray]] = []
        self._offsets: list[int] = []
        self._deltas: list[list[np.ndarray]] = []  # per block, per group: (|group|, n) float
        col = 1  # column 0 is the slack level t
        for blk in blocks:
            self._offsets.append(col)
            col += len(blk.groups)
            self._cuts.append([np.array([float(len(g.points)) for g in blk.groups])])
            beta = np.array([float(x) for x in blk.beta])
            self._deltas.append(
                [
                    np.array([[float(x) for x in p] for p in g.points]) - beta
                    for g in blk.groups
                ]
            )
        self._ncols = col
        self._budget_template = self._build_budget_rows()

    def _build_budget_rows(self) -> list[tuple[int, np.ndarray]]:
        out = []
        for ri in range(len(self.rows)):
            row = np.zeros(self._ncols)
            for bi, blk in enumerate(self.blocks):
                off = self._offsets[bi]
                for gi, grp in enumerate(blk.groups):
                    if grp.row == ri:
                        row[off + gi] += grp.mult
            if row.any():
                out.append((ri, row))
        return out

    # -- LP step -------------------------------------------------------------

    def _solve_lp(self, lam: float, free_constant: bool) -> tuple[float, np.ndarray] | None:
        rows_ub: list[np.ndarray] = []
        rhs_ub: list[float] = []
        for bi, blk in enumerate(self.blocks):
            if free_constant and blk.constant_block:
                continue
            off = self._offsets[bi]
            coef = blk.coefficient(0.0 if free_constant else lam)
            for cut in self._cuts[bi]:
                row = np.zeros(self._ncols)
                row[0] = 1.0
                row[off : off + len(cut)] = -cut
                rows_ub.append(row)
                rhs_ub.append(coef)
        for ri, row in self._budget_template:
            rows_ub.append(row)
            if free_constant and self.rows[ri].constant_row:
                rhs_ub.append(_FREE_CONSTANT_CAP)
            else:
                rhs_ub.append(self.rows[ri].available(lam))
        bounds = [(None, None)] + [(0.0, None)] * (self._ncols - 1)
        cost = np.zeros(self._ncols)
        cost[0] = -1.0
        res = linprog(
            cost, A_ub=np.array(rows_ub), b_ub=np.array(rhs_ub), bounds=bounds, method="highs"
        )
        if not res.success:
            return None
        return float(res.x[0]), np.maximum(res.x, 0.0)

    # -- evaluation ------------------------------------------------------------

    def _expand(self, bi: int, x: np.ndarray) -> dict[Exponent, float]:
        out: dict[Exponent, float] = {}
        off = self._offsets[bi]
        for gi, grp in enumerate(self.blocks[bi].groups):
            v = float(x[off + gi])
            if v > 0.0:
                for p in grp.points:
                    out[p] = v
        return out

    def _add_cut(self, bi: int, analysis: AgeAnalysis) -> None:
        cut = np.array(
            [
                float(np.sum(np.exp(np.clip(dmat @ analysis.cut_point, -700.0, 700.0))))
                if dmat.size
                else 0.0
                for dmat in self._deltas[bi]
            ]
        )
        cuts = self._cuts[bi]
        if len(cuts) >= _MAX_CUTS_PER_BLOCK:
            del cuts[1]  # keep the zero-allocation seed, drop the oldest refinement
        cuts.append(cut)

    def query(
        self,
        lam: float = 0.0,
        tol: float = 1e-8,
        max_iter: int = 300,
        free_constant: bool = False,
    ) -> OracleResult:
        """Maximize the minimum block slack at shift `lam`; feasible iff it
        reaches -tol.

        With free_constant=True the constant budget is unlimited and constant
        blocks are dropped, which decides whether ANY shift is feasible (the
        unboundedness probe for the lower-bound search).
        """
        active = [
            bi for bi, blk in enumerate(self.blocks) if not (free_constant and blk.constant_block)
        ]
        if not active:
            return OracleResult(True, math.inf, math.inf, [{} for _ in self.blocks], [], True)
        scale = 1.0 + max(abs(blk.c_beta) for blk in self.blocks) + max(
            (abs(r.rhs) for r in self.rows), default=0.0
        )
        best = -math.inf
        best_alloc: list[dict[Exponent, float]] | None = None
        best_analyses: list[AgeAnalysis | None] | None = None
        upper = math.inf
        converged = False
        for _ in range(max_iter):
            lp = self._solve_lp(lam, free_constant)
            if lp is None:
                break
            upper, x = lp
            allocs = [self._expand(bi, x) for bi in range(len(self.blocks))]
            analyses: list[AgeAnalysis | None] = [None] * len(self.blocks)
            slack_min = math.inf
            for bi in active:
                blk = self.blocks[bi]
                analysis = analyze_age_infimum(allocs[bi], blk.beta)
                analyses[bi] = analysis
                slack_min = min(
                    slack_min, analysis.value + blk.coefficient(0.0 if free_constant else lam)
                )
                self._add_cut(bi, analysis)
            if slack_min > best:
                best = slack_min
                best_alloc = allocs
                best_analyses = analyses
            if best >= -tol or upper < -tol or upper - best <= max(1e-12 * scale, 0.05 * tol):
                converged = True
                break
        return OracleResult(
            best >= -tol,
            best,
            upper,
            best_alloc if best_alloc is not None else [{} for _ in self.blocks],
            best_analyses if best_analyses is not None else [None] * len(self.blocks),
            converged,
        )

    def constant_mass_used(self, allocations: list[dict[Exponent, float]]) -> float:
        """Total draw against constant budget rows in an allocation."""
        total = 0.0
        for blk, alloc in zip(self.blocks, allocations):
            for grp in blk.groups:
                if self.rows[grp.row].constant_row and grp.points:
                    total += grp.mult * alloc.get(grp.points[0], 0.0)
        return total
