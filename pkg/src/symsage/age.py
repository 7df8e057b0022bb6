"""Membership in the AGE cones: nonnegative forms with one allowed negative term.

The decision runs through the dual route: with positive coefficients c_a on a
support A and a distinguished point b,

    sum_a c_a e^<a,x> + c_b e^<b,x>  >=  0 on R^n
        iff   inf_x sum_a c_a e^{<a-b, x>}  >=  -c_b.

The shifted positive sum is minimized by first locating the origin against
conv{a - b} exactly (geometry.origin_face); if the origin is outside, the
infimum is 0 along a recession direction, if it sits on the boundary the
infimum equals the sub-sum infimum on the exposed face, and otherwise a unique
minimizer exists on the span of the differences and damped Newton finds it.
The entropy certificate nu_a = c_a e^{<a-b, x*>} falls out of the minimizer
and satisfies D(nu, e c) = -infimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

import numpy as np

from .core import Exponent, exponent
from .geometry import CircuitVector, HullStatus, origin_face, rational_rank

_TINY_FACTOR = 1e-30  # relative size of off-face terms at the cut point


@dataclass(frozen=True)
class AgeCertificate:
    """Dual witness for one AGE membership.

    nu balances the support around beta (sum nu_a (a - beta) = 0) and
    slack = c_beta - D(nu, e c) >= -tol certifies nonnegativity; the
    minimizer is absent when the infimum is only approached along a
    recession direction.
    """

    beta: Exponent
    nu: dict[Exponent, float]
    entropy_value: float
    slack: float
    minimizer: np.ndarray | None = None

    def to_json_dict(self) -> dict:
        return {
            "beta": [str(c) for c in self.beta],
            "nu": [{"exp": [str(c) for c in e], "value": v} for e, v in sorted(self.nu.items())],
            "entropy_value": self.entropy_value,
            "slack": self.slack,
            "minimizer": None if self.minimizer is None else [float(v) for v in self.minimizer],
        }


@dataclass
class AgeAnalysis:
    """Infimum of the shifted positive sum plus everything derived from it.

    `cut_point` is a point x at which the linearization
    sum_a y_a e^{<a - beta, x>} globally over-estimates the infimum as a
    function of the coefficient vector y (tight at the analyzed input); it
    equals the minimizer when one exists and otherwise sits far along the
    recession direction.
    """

    value: float
    minimizer: np.ndarray | None
    nu: dict[Exponent, float]
    cut: dict[Exponent, float]  # factors e^{<a-b, cut_point>} for the analyzed points
    cut_point: np.ndarray
    attained: bool


def relative_entropy(nu: Mapping[Exponent, float], c: Mapping[Exponent, float]) -> float:
    """D(nu, e c) = sum nu_a ln(nu_a / (e c_a)) with the 0 ln 0 = 0 convention."""
    total = 0.0
    for a, v in nu.items():
        if v == 0.0:
            continue
        ca = c.get(a, 0.0)
        if ca <= 0.0:
            return math.inf
        total += v * (math.log(v / ca) - 1.0)
    return total


def _span_basis(face: list[Exponent]) -> list[tuple[Fraction, ...]]:
    """Rational basis (RREF rows) of the linear span of the face deltas."""
    rows = [list(d) for d in face]
    basis: list[tuple[Fraction, ...]] = []
    rank, ncols = 0, len(rows[0])
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
    return [tuple(rows[i]) for i in range(rank)]


def _newton_minimize(coefs: np.ndarray, W: np.ndarray, grad_tol: float) -> tuple[float, np.ndarray]:
    """Minimize sum_i coefs_i exp(W_i . z); strictly convex and coercive here."""
    k = W.shape[1]
    z = np.zeros(k)

    def value_at(zz):
        return float(coefs @ np.exp(np.clip(W @ zz, -700.0, 700.0)))

    val = value_at(z)
    for _ in range(200):
        ew = coefs * np.exp(np.clip(W @ z, -700.0, 700.0))
        grad = ew @ W
        if np.max(np.abs(grad)) <= grad_tol * max(1.0, val):
            break
        H = W.T @ (W * ew[:, None])
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.solve(H + 1e-12 * np.eye(k), grad)
        t, armijo = 1.0, 1e-4 * float(grad @ step)
        for _ in range(80):
            cand = value_at(z - t * step)
            if cand <= val - t * armijo:
                z = z - t * step
                val = cand
                break
            t *= 0.5
        else:
            break
    return val, z


def analyze_age_infimum(
    pos: Mapping[Exponent, float], beta: Exponent, grad_tol: float = 1e-10
) -> AgeAnalysis:
    """Full analysis of inf_x sum_a pos[a] e^{<a - beta, x>} (pos values > 0)."""
    beta = exponent(beta)
    points = sorted(pos)
    if not points:
        return AgeAnalysis(0.0, None, {}, {}, np.zeros(len(beta)), attained=False)
    deltas = {a: tuple(x - y for x, y in zip(a, beta)) for a in points}
    scale = 1.0 + math.fsum(pos.values())
    info = origin_face(frozenset(deltas.values()))

    if info.status == HullStatus.OUTSIDE:
        v = np.array([float(x) for x in info.recession])
        v /= max(1.0, np.max(np.abs(v)))
        dmat = np.array([[float(x) for x in deltas[a]] for a in points])
        slopes = dmat @ v  # strictly negative
        tau = max(
            math.log(_TINY_FACTOR * scale / pos[a]) / slopes[i] for i, a in enumerate(points)
        )
        tau = max(tau, 0.0)
        cut_point = tau * v
        factors = np.exp(np.clip(dmat @ cut_point, -700.0, 700.0))
        cut = {a: float(factors[i]) for i, a in enumerate(points)}
        return AgeAnalysis(0.0, None, {a: 0.0 for a in points}, cut, cut_point, attained=False)

    face_pts = [a for a in points if deltas[a] in info.face]
    basis = _span_basis([deltas[a] for a in face_pts])
    V = np.array([[float(x) for x in row] for row in basis])  # k x n
    W = np.array([[float(x) for x in deltas[a]] for a in face_pts]) @ V.T
    coefs = np.array([pos[a] for a in face_pts])
    val, z = _newton_minimize(coefs, W, grad_tol)
    x_face = V.T @ z  # length n

    factors_face = np.exp(np.clip(W @ z, -700.0, 700.0))
    nu = {a: 0.0 for a in points}
    for i, a in enumerate(face_pts):
        nu[a] = float(pos[a] * factors_face[i])

    attained = info.status != HullStatus.BOUNDARY
    if attained:
        cut_point = x_face
    else:
        v = np.array([float(x) for x in info.recession])
        v /= max(1.0, np.max(np.abs(v)))
        off = [a for a in points if deltas[a] not in info.face]
        doff = np.array([[float(x) for x in deltas[a]] for a in off])
        slopes = doff @ v
        base = doff @ x_face
        tau = max(
            (math.log(_TINY_FACTOR * scale / pos[a]) - base[i]) / slopes[i]
            for i, a in enumerate(off)
        )
        cut_point = x_face + max(tau, 0.0) * v
    dall = np.array([[float(x) for x in deltas[a]] for a in points])
    cut_factors = np.exp(np.clip(dall @ cut_point, -700.0, 700.0))
    cut = {a: float(cut_factors[i]) for i, a in enumerate(points)}
    return AgeAnalysis(float(val), x_face if attained else None, nu, cut, cut_point, attained)


def age_infimum(c: Mapping, beta, grad_tol: float = 1e-10) -> tuple[float, np.ndarray | None]:
    """inf_x sum_a c_a e^{<a - beta, x>} and its minimizer (None when the
    infimum is only approached along a recession direction)."""
    b = exponent(beta)
    pos: dict[Exponent, float] = {}
    for a, v in c.items():
        e = exponent(a)
        v = float(v)
        if v < 0:
            raise ValueError(f"age_infimum requires nonnegative coefficients, got {v} at {e}")
        if e == b:
            raise ValueError("beta must not belong to the positive support")
        if v > 0:
            pos[e] = v
    analysis = analyze_age_infimum(pos, b, grad_tol)
    return analysis.value, analysis.minimizer


def is_age(f, beta, tol: float = 1e-8, grad_tol: float = 1e-10) -> AgeCertificate | None:
    """Certificate that f lies in the AGE cone with negative term at beta, or None.

    Every coefficient away from beta must already be nonnegative (that is a
    structural requirement of the cone, so a violation raises instead of
    returning None).
    """
    b = exponent(beta)
    pos: dict[Exponent, float] = {}
    for a, cval in f.terms.items():
        if a == b:
            continue
        if cval < 0:
            raise ValueError(f"coefficient at {a} is negative but only {b} may be negative")
        pos[a] = cval
    c_beta = f.coeff(b)
    analysis = analyze_age_infimum({a: v for a, v in pos.items() if v > 0}, b, grad_tol)
    if analysis.value + c_beta < -tol:
        return None
    entropy = relative_entropy(analysis.nu, pos)
    return AgeCertificate(
        beta=b,
        nu=analysis.nu,
        entropy_value=entropy,
        slack=c_beta - entropy,
        minimizer=analysis.minimizer,
    )


def circuit_number(c: Mapping, circuit: CircuitVector) -> float:
    """prod_a (c_a / lambda_a)^{lambda_a} over the circuit's positive support,
    the sharp threshold on the negative coefficient (log-space evaluation)."""
    log_cn = 0.0
    for point, weight in circuit.positive_support:
        ca = float(c.get(point, c.get(tuple(point), 0.0)))
        if ca < 0:
            raise ValueError(f"circuit coefficients must be nonnegative, got {ca}")
        if ca == 0.0:
            return 0.0
        log_cn += float(weight) * (math.log(ca) - math.log(float(weight)))
    return math.exp(log_cn)


def circuit_number_test(c: Mapping, d: float, circuit: CircuitVector) -> bool:
    """True iff the circuit number dominates the negative magnitude d,
    i.e. the single-circuit form sum c_a x^a - d x^beta is nonnegative.

    Evaluated in log-space; equality passes (the cones are closed), with a
    1e-12 relative guard against rounding at the threshold.
    """
    if d <= 0:
        return True
    log_cn = 0.0
    for point, weight in circuit.positive_support:
        ca = float(c.get(point, 0.0))
        if ca <= 0.0:
            return False
        log_cn += float(weight) * (math.log(ca) - math.log(float(weight)))
    log_d = math.log(d)
    return log_cn >= log_d - 1e-12 * max(1.0, abs(log_d))
