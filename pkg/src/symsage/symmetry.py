"""Coordinate-permutation orbits and the symmetric membership reduction.

For an invariant signomial the membership question collapses to one AGE block
per orbit representative of the negative support: f lies in the symmetric
cone iff there are stabilizer-invariant AGE signomials g_beta_hat whose coset
orbit-sums reproduce f.  Stabilizers of exponent vectors are products of
symmetric groups on the index blocks of equal coordinates, so stabilizer
orbits, canonical forms and counts are all computed per block without ever
enumerating the full group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .age import AgeCertificate, is_age
from .core import Exponent, Signomial, SupportSplit, coefficient_scale, exponent, sig
from .geometry import CircuitVector, enumerate_circuits
from ._feasibility import BlockSpec, BudgetRow, FeasibilityOracle, OracleResult, VarGroup

_MATERIALIZE_CAP = 12  # full orbit materialization bound; counts stay symbolic above


@dataclass(frozen=True)
class OrbitData:
    """Counts and canonical data for one coordinate-permutation orbit."""

    representative: Exponent  # coordinates sorted non-increasing
    orbit_size: int
    stabilizer_order: int
    n: int

    def coset_representatives(self) -> list[tuple[int, ...]]:
        """One permutation per left coset of the stabilizer, i.e. one per
        orbit point, mapping the representative onto that point."""
        return _coset_reps(self.representative)


def apply_perm(perm: tuple[int, ...], e: Exponent) -> Exponent:
    return tuple(e[perm[i]] for i in range(len(perm)))


def _multiset_perms(values: tuple):
    """Distinct permutations of a value tuple, without duplicates."""
    values = tuple(sorted(values, reverse=True))
    n = len(values)
    out: list[tuple] = []

    def rec(prefix: list, remaining: list):
        if len(prefix) == n:
            out.append(tuple(prefix))
            return
        seen = set()
        for i, v in enumerate(remaining):
            if v in seen:
                continue
            seen.add(v)
            rec(prefix + [v], remaining[:i] + remaining[i + 1 :])

    rec([], list(values))
    return out


def orbit(alpha) -> OrbitData:
    """Exact orbit and stabilizer counts from coordinate multiplicities."""
    e = exponent(alpha)
    n = len(e)
    rep = tuple(sorted(e, reverse=True))
    stab = 1
    for v in set(rep):
        stab *= math.factorial(rep.count(v))
    return OrbitData(rep, math.factorial(n) // stab, stab, n)


@lru_cache(maxsize=2048)
def orbit_points(alpha: Exponent) -> tuple[Exponent, ...]:
    if len(alpha) > _MATERIALIZE_CAP:
        raise ValueError(f"orbit materialization is capped at n = {_MATERIALIZE_CAP}")
    return tuple(sorted(_multiset_perms(alpha)))


@lru_cache(maxsize=512)
def _coset_reps(rep: Exponent) -> list[tuple[int, ...]]:
    reps = []
    for target in orbit_points(rep):
        used = [False] * len(rep)
        perm = []
        for value in target:
            j = next(k for k in range(len(rep)) if not used[k] and rep[k] == value)
            used[j] = True
            perm.append(j)
        reps.append(tuple(perm))
    return reps


def stabilizer_generators(beta: Exponent) -> list[tuple[int, ...]]:
    """Adjacent transpositions inside each equal-coordinate index block;
    these generate the full stabilizer."""
    gens = []
    by_value: dict = {}
    for i, v in enumerate(beta):
        by_value.setdefault(v, []).append(i)
    for idxs in by_value.values():
        for a, b in zip(idxs, idxs[1:]):
            perm = list(range(len(beta)))
            perm[a], perm[b] = perm[b], perm[a]
            gens.append(tuple(perm))
    return gens


def _stab_blocks(beta: Exponent) -> list[tuple[int, ...]]:
    by_value: dict = {}
    for i, v in enumerate(beta):
        by_value.setdefault(v, []).append(i)
    return [tuple(idx) for idx in by_value.values()]


def stab_orbit_key(beta: Exponent, p: Exponent) -> Exponent:
    """Canonical form of p under Stab(beta): sort p inside each equal-value
    index block of beta."""
    out = list(p)
    for block in _stab_blocks(beta):
        vals = sorted((p[i] for i in block), reverse=True)
        for i, v in zip(block, vals):
            out[i] = v
    return tuple(out)


def stab_orbit_points(beta: Exponent, p: Exponent) -> tuple[Exponent, ...]:
    """All images of p under Stab(beta), via per-block multiset permutations."""
    blocks = _stab_blocks(beta)
    pts = [tuple(p)]
    for block in blocks:
        expanded = []
        for q in pts:
            for arrangement in _multiset_perms(tuple(q[i] for i in block)):
                r = list(q)
                for i, v in zip(block, arrangement):
                    r[i] = v
                expanded.append(tuple(r))
        pts = list(dict.fromkeys(expanded))
    return tuple(sorted(pts))


def symmetrize(g: Signomial, cosets_of=None, invariance_tol: float = 1e-9) -> Signomial:
    """Orbit-sum of g: over the whole group, or over the cosets of the
    stabilizer of `cosets_of` (which requires g to be stabilizer-invariant)."""
    if cosets_of is None:
        out: dict[Exponent, float] = {}
        for e, c in g.terms.items():
            weight = c * orbit(e).stabilizer_order
            for p in orbit_points(tuple(sorted(e, reverse=True))):
                out[p] = out.get(p, 0.0) + weight
        return Signomial(g.n, out, g.flavor)
    beta = exponent(cosets_of)
    scale = coefficient_scale(g)
    for perm in stabilizer_generators(beta):
        h = g.permute(perm)
        for e in g.support | h.support:
            if abs(g.coeff(e) - h.coeff(e)) > invariance_tol * scale:
                raise ValueError(f"g is not invariant under the stabilizer of {beta}")
    out = {}
    for perm in orbit(beta).coset_representatives():
        h = g.permute(perm)
        for e, c in h.terms.items():
            out[e] = out.get(e, 0.0) + c
    return Signomial(g.n, out, g.flavor)


# ---------------------------------------------------------------------------
# symmetric feasibility oracle
# ---------------------------------------------------------------------------


def _support_set(e: Exponent) -> frozenset[int]:
    return frozenset(i for i, c in enumerate(e) if c != 0)


def build_symmetric_oracle(
    f: Signomial, negatives: list[Exponent], dynamic_constant: bool
) -> FeasibilityOracle:
    """Per-orbit-representative feasibility problem for an invariant f.

    One budget row per positive orbit (right-hand side is the per-point
    coefficient); one block per negative orbit representative with one
    variable per stabilizer orbit of usable positive points.  A variable v on
    a stabilizer orbit of size s inside a positive orbit with stabilizer
    order q draws (q / |Stab(beta_hat)|) * s * v from that orbit's row.
    """
    n = f.n
    zero = (Fraction(0),) * n
    pos_orbits: dict[Exponent, float] = {}
    for p, c in f.terms.items():
        if c <= 0 or (dynamic_constant and p == zero):
            continue
        pos_orbits.setdefault(orbit(p).representative, c)
    row_index: dict[Exponent, int] = {}
    rows: list[BudgetRow] = []
    for rep in sorted(pos_orbits):
        row_index[rep] = len(rows)
        rows.append(BudgetRow(pos_orbits[rep]))
    if dynamic_constant:
        zrep = orbit(zero).representative
        row_index[zrep] = len(rows)
        rows.append(BudgetRow(f.coeff(zero), constant_row=True))
        pos_orbits[zrep] = f.coeff(zero)
    all_nonneg = all(all(c >= 0 for c in rep) for rep in row_index)

    neg_reps = sorted({orbit(b).representative for b in negatives})

    def block_groups(beta_hat: Exponent) -> list[VarGroup]:
        stab_beta = orbit(beta_hat).stabilizer_order
        groups: list[VarGroup] = []
        for rep in sorted(row_index):
            if rep == beta_hat:
                continue
            points = orbit_points(rep)
            if all_nonneg and all(c >= 0 for c in beta_hat):
                bsupp = _support_set(beta_hat)
                points = tuple(p for p in points if _support_set(p) <= bsupp)
            if not points:
                continue
            stab_rep = orbit(rep).stabilizer_order
            seen: set[Exponent] = set()
            for p in points:
                key = stab_orbit_key(beta_hat, p)
                if key in seen:
                    continue
                seen.add(key)
                sub = tuple(q for q in stab_orbit_points(beta_hat, key) if q in set(points))
                groups.append(
                    VarGroup(sub, row_index[rep], float(stab_rep) * len(sub) / stab_beta)
                )
        return groups

    blocks = [BlockSpec(bh, f.coeff(bh), block_groups(bh)) for bh in neg_reps]
    if dynamic_constant:
        zrep = orbit(zero).representative
        blocks.append(
            BlockSpec(zrep, f.coeff(zero), block_groups(zrep), constant_block=True)
        )
    return FeasibilityOracle(blocks, rows)


@dataclass(frozen=True)
class SymmetricPiece:
    """One stabilizer-invariant AGE signomial of a symmetric decomposition."""

    g: Signomial
    certificate: AgeCertificate
    stabilizer_invariant: bool


@dataclass(frozen=True)
class SymmetricSageDecomposition:
    """Per-representative AGE pieces whose coset orbit-sums, plus the
    nonnegative symmetric remainder, reproduce the target."""

    pieces: dict[Exponent, SymmetricPiece]
    monomial_remainder: dict[Exponent, float]

    def to_json_dict(self) -> dict:
        from .core import to_json_dict as sig_json

        return {
            "pieces": [
                {
                    "beta_hat": [str(c) for c in bh],
                    "g": sig_json(piece.g),
                    "certificate": piece.certificate.to_json_dict(),
                    "stabilizer_invariant": piece.stabilizer_invariant,
                }
                for bh, piece in sorted(self.pieces.items())
            ],
            "monomial_remainder": [
                {"exp": [str(c) for c in e], "coef": v}
                for e, v in sorted(self.monomial_remainder.items())
                if v != 0.0
            ],
        }


def extract_symmetric_decomposition(
    f: Signomial, oracle: FeasibilityOracle, result: OracleResult, lam: float, tol: float
) -> SymmetricSageDecomposition:
    n = f.n
    zero = (Fraction(0),) * n
    scale = coefficient_scale(f)
    pieces: dict[Exponent, SymmetricPiece] = {}
    used_per_orbit: dict[Exponent, float] = {}
    for blk, alloc in zip(oracle.blocks, result.allocations):
        c_beta = blk.coefficient(lam)
        if c_beta >= 0 and not alloc:
            continue
        stab_beta = orbit(blk.beta).stabilizer_order
        terms = dict(alloc)
        terms[blk.beta] = terms.get(blk.beta, 0.0) + c_beta
        g = Signomial(n, terms)
        cert = is_age(g, blk.beta, tol=10 * tol)
        if cert is None:
            raise RuntimeError("symmetric piece failed independent AGE re-verification")
        pieces[blk.beta] = SymmetricPiece(g, cert, stabilizer_invariant=True)
        for p, v in alloc.items():
            rep = orbit(p).representative
            used_per_orbit[rep] = used_per_orbit.get(rep, 0.0) + (
                orbit(p).stabilizer_order / stab_beta
            ) * v
    remainder: dict[Exponent, float] = {}
    for p, c in f.terms.items():
        rep = orbit(p).representative
        c_eff = c - lam if p == zero else c
        if rep in pieces:
            continue
        left = c_eff - used_per_orbit.get(rep, 0.0)
        if left < -10 * tol * scale:
            raise RuntimeError(f"symmetric allocation overdraws orbit of {rep}: {left}")
        remainder[p] = max(left, 0.0)
    if zero not in f.terms and lam != 0.0 and orbit(zero).representative not in pieces:
        remainder[zero] = max(-lam - used_per_orbit.get(zero, 0.0), 0.0)
    return SymmetricSageDecomposition(pieces, remainder)


def is_symmetric_sage(
    f: Signomial, split: SupportSplit | None = None, tol: float = 1e-8
) -> SymmetricSageDecomposition | None:
    """Membership via the per-orbit-representative reduction; exact for
    invariant inputs (not a relaxation of the plain membership test)."""
    g = sig(f)
    scale = coefficient_scale(g)
    if not g.is_symmetric(tol=1e-9 * scale):
        raise ValueError("is_symmetric_sage requires a coordinate-permutation invariant input")
    if split is None:
        split = SupportSplit.from_signomial(g)
    for pts in (split.positive, split.negatives):
        for p in pts:
            if any(q not in pts for q in orbit_points(orbit(p).representative) if q in g.support):
                raise ValueError("support split must be closed under coordinate permutations")
    for p in split.positive:
        if g.coeff(p) < 0:
            raise ValueError(f"negative coefficient on declared positive point {p}")
    negatives = sorted(p for p in split.negatives if g.coeff(p) < 0)
    if not negatives:
        return SymmetricSageDecomposition({}, dict(g.terms))
    usable = {p: c for p, c in g.terms.items() if c > 0 and p in split.positive | split.negatives}
    restricted = Signomial(g.n, {**usable, **{b: g.coeff(b) for b in negatives}})
    oracle = build_symmetric_oracle(restricted, negatives, dynamic_constant=False)
    result = oracle.query(0.0, tol=tol)
    if not result.feasible:
        return None
    return extract_symmetric_decomposition(restricted, oracle, result, 0.0, tol)


def reconstruct(decomposition: SymmetricSageDecomposition, n: int) -> Signomial:
    """Assemble the coset orbit-sums plus remainder back into one signomial."""
    total = Signomial(n, decomposition.monomial_remainder)
    for beta_hat, piece in decomposition.pieces.items():
        total = total + symmetrize(piece.g, cosets_of=beta_hat)
    return total


# ---------------------------------------------------------------------------
# circuit refinement of a symmetric decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CircuitPiece:
    """One circuit-supported AGE summand: positive mass on the circuit's
    support and negative magnitude d at its negative point."""

    circuit: CircuitVector
    coefficients: dict[Exponent, float]
    d: float


@dataclass(frozen=True)
class SymmetricCircuitDecomposition:
    pieces: dict[Exponent, list[CircuitPiece]]
    remainders: dict[Exponent, dict[Exponent, float]]


def _circuit_split(g: Signomial, beta: Exponent, tol: float) -> list[CircuitPiece]:
    """Split one AGE signomial into circuit-witnessed summands.

    Jointly concave feasibility in the per-circuit masses and negative
    magnitudes d_j; solved with the same cutting-plane idea as the block
    oracle, with an equality row sum_j d_j = -c_beta."""
    import numpy as np
    from scipy.optimize import linprog

    from .age import analyze_age_infimum

    d_total = -g.coeff(beta)
    if d_total <= 0:
        return []
    pos = {p: c for p, c in g.terms.items() if p != beta and c > 0}
    circuits = enumerate_circuits(set(pos) | {beta}, beta)
    if not circuits:
        raise RuntimeError("AGE piece admits no circuit over its support")
    sup_pts = sorted(pos)
    col_of: dict[tuple[int, Exponent], int] = {}
    ncols = 1 + len(circuits)  # t, d_j
    for j, circ in enumerate(circuits):
        for p, _ in circ.positive_support:
            col_of[(j, p)] = ncols
            ncols += 1
    cuts: list[list[np.ndarray]] = [
        [np.ones(len(circ.positive_support))] for circ in circuits
    ]
    beta_f = np.array([float(x) for x in beta])
    dmats = [
        np.array([[float(x) for x in p] for p, _ in circ.positive_support]) - beta_f
        for circ in circuits
    ]
    best = None
    for _ in range(200):
        rows_ub, rhs_ub = [], []
        for j, circ in enumerate(circuits):
            for cut in cuts[j]:
                row = np.zeros(ncols)
                row[0] = 1.0
                row[1 + j] = 1.0  # slack = inf - d_j
                for i, (p, _) in enumerate(circ.positive_support):
                    row[col_of[(j, p)]] = -cut[i]
                rows_ub.append(row)
                rhs_ub.append(0.0)
        for p in sup_pts:
            row = np.zeros(ncols)
            for j, circ in enumerate(circuits):
                if (j, p) in col_of:
                    row[col_of[(j, p)]] = 1.0
            rows_ub.append(row)
            rhs_ub.append(pos[p])
        a_eq = np.zeros((1, ncols))
        a_eq[0, 1 : 1 + len(circuits)] = 1.0
        cost = np.zeros(ncols)
        cost[0] = -1.0
        bounds = [(None, None)] + [(0.0, None)] * (ncols - 1)
        res = linprog(
            cost,
            A_ub=np.array(rows_ub),
            b_ub=np.array(rhs_ub),
            A_eq=a_eq,
            b_eq=np.array([d_total]),
            bounds=bounds,
            method="highs",
        )
        if not res.success:
            break
        ub, x = float(res.x[0]), np.maximum(res.x, 0.0)
        slack_min, analyses = math.inf, []
        for j, circ in enumerate(circuits):
            alloc = {p: float(x[col_of[(j, p)]]) for p, _ in circ.positive_support}
            analysis = analyze_age_infimum({p: v for p, v in alloc.items() if v > 0}, beta)
            analyses.append((alloc, float(x[1 + j]), analysis))
            slack_min = min(slack_min, analysis.value - float(x[1 + j]))
            cut = np.exp(np.clip(dmats[j] @ analysis.cut_point, -700.0, 700.0))
            if len(cuts[j]) >= 80:
                del cuts[j][1]
            cuts[j].append(cut)
        if best is None or slack_min > best[0]:
            best = (slack_min, analyses)
        if best[0] >= -tol or ub < -tol or ub - best[0] <= 1e-12 * (1 + d_total):
            break
    if best is None or best[0] < -tol:
        raise RuntimeError("circuit refinement infeasible within tolerance")
    out = []
    for circ, (alloc, dj, _) in zip(circuits, best[1]):
        if dj <= tol * (1 + d_total) and all(v <= tol for v in alloc.values()):
            continue
        out.append(CircuitPiece(circ, alloc, dj))
    return out


def symmetric_witness_cone_decomposition(
    f: Signomial, split: SupportSplit | None = None, tol: float = 1e-8
) -> SymmetricCircuitDecomposition | None:
    """Refine the symmetric decomposition circuit by circuit: each piece
    becomes a sum of circuit-supported AGE summands plus monomial leftovers."""
    decomp = is_symmetric_sage(f, split, tol)
    if decomp is None:
        return None
    pieces: dict[Exponent, list[CircuitPiece]] = {}
    remainders: dict[Exponent, dict[Exponent, float]] = {}
    for beta_hat, piece in decomp.pieces.items():
        circuit_pieces = _circuit_split(piece.g, beta_hat, tol)
        pieces[beta_hat] = circuit_pieces
        used: dict[Exponent, float] = {}
        for cp in circuit_pieces:
            for p, v in cp.coefficients.items():
                used[p] = used.get(p, 0.0) + v
        remainders[beta_hat] = {
            p: max(c - used.get(p, 0.0), 0.0)
            for p, c in piece.g.terms.items()
            if p != beta_hat
        }
    return SymmetricCircuitDecomposition(pieces, remainders)
