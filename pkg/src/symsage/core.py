"""Exact-exponent sparse signomials and polynomials.

A signomial is a finite sum  f(x) = sum_a c_a * exp(<a, x>)  with exponent
vectors a in Q^n and float coefficients; a polynomial is the same data with
exponents in N^n, evaluated as  sum_a c_a * x^a.  Exponents are tuples of
`Fraction` so that support geometry (affine dependence, hull membership,
circuit detection) can be decided exactly; coefficients stay binary floats
and every numeric certificate check carries an explicit tolerance.

  Exponent  = tuple[Fraction, ...]     (one entry per variable)
  Signomial = n, flavor, {Exponent: float}   (canonical: merged, zero-pruned)

The zero function has an empty term map.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

Exponent = tuple[Fraction, ...]

SIGNOMIAL = "signomial"
POLYNOMIAL = "polynomial"

# exp() saturates in float64 well before this; clamp to avoid overflow warnings
_EXP_CLIP = 700.0


def exponent(coords: Iterable) -> Exponent:
    """Build an exact exponent vector from ints, Fractions or 'p/q' strings."""
    return tuple(Fraction(c) for c in coords)


@dataclass(frozen=True)
class Term:
    """One (exponent, coefficient) pair of a signomial."""

    exponent: Exponent
    coefficient: float


class Signomial:
    """Immutable sparse signomial/polynomial with exact rational exponents.

    `terms` maps exponent vectors to nonzero float coefficients.  The map is
    canonicalized on construction (duplicates merged, zeros dropped) so that
    ``supp(f)`` is well defined.  Instances are treated as immutable values
    and are safe to share across threads.
    """

    __slots__ = ("n", "flavor", "terms")

    def __init__(self, n: int, terms: Mapping | Iterable, flavor: str = SIGNOMIAL):
        if n < 1:
            raise ValueError(f"dimension must be >= 1, got {n}")
        if flavor not in (SIGNOMIAL, POLYNOMIAL):
            raise ValueError(f"unknown flavor {flavor!r}")
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[Exponent, float] = {}
        for exp, coef in items:
            e = exponent(exp)
            if len(e) != n:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {n}")
            if flavor == POLYNOMIAL and any(c.denominator != 1 or c < 0 for c in e):
                raise ValueError(f"polynomial exponents must lie in N^n, got {e}")
            merged[e] = merged.get(e, 0.0) + float(coef)
        super().__setattr__("n", n)
        super().__setattr__("flavor", flavor)
        super().__setattr__("terms", {e: c for e, c in merged.items() if c != 0.0})

    def __setattr__(self, name, value):
        raise AttributeError("Signomial is immutable")

    # -- basic queries ----------------------------------------------------

    @property
    def support(self) -> frozenset[Exponent]:
        return frozenset(self.terms)

    def coeff(self, exp) -> float:
        return self.terms.get(exponent(exp), 0.0)

    def terms_sorted(self) -> list[Term]:
        return [Term(e, self.terms[e]) for e in sorted(self.terms)]

    def is_polynomial(self) -> bool:
        return self.flavor == POLYNOMIAL

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Signomial)
            and self.n == other.n
            and self.flavor == other.flavor
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, self.flavor, frozenset(self.terms.items())))

    def __repr__(self):
        body = " + ".join(f"{c:g}*X^{tuple(map(str, e))}" for e, c in sorted(self.terms.items()))
        return f"Signomial(n={self.n}, {self.flavor}: {body or '0'})"

    # -- arithmetic (same flavor and dimension) ---------------------------

    def _combine(self, other: "Signomial", sign: float) -> "Signomial":
        if self.n != other.n or self.flavor != other.flavor:
            raise ValueError("signomial arithmetic requires equal dimension and flavor")
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + sign * c
        return Signomial(self.n, out, self.flavor)

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Signomial(self.n, {(0,) * self.n: float(other)}, self.flavor)
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = Signomial(self.n, {(0,) * self.n: float(other)}, self.flavor)
        return self._combine(other, -1.0)

    def __neg__(self):
        return Signomial(self.n, {e: -c for e, c in self.terms.items()}, self.flavor)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return Signomial(self.n, {e: c * scalar for e, c in self.terms.items()}, self.flavor)

    __rmul__ = __mul__

    def permute(self, perm: tuple[int, ...]) -> "Signomial":
        """Apply a coordinate permutation: (sigma f)(x) = f applied to permuted x.

        `perm` lists source indices, i.e. the image exponent is
        e'[i] = e[perm[i]].
        """
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"{perm} is not a permutation of 0..{self.n - 1}")
        return Signomial(
            self.n,
            {tuple(e[perm[i]] for i in range(self.n)): c for e, c in self.terms.items()},
            self.flavor,
        )

    def is_symmetric(self, tol: float = 0.0) -> bool:
        """True when invariant under all coordinate transpositions (i i+1)."""
        for i in range(self.n - 1):
            perm = list(range(self.n))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            g = self.permute(tuple(perm))
            for e in self.support | g.support:
                if abs(self.coeff(e) - g.coeff(e)) > tol:
                    return False
        return True


def signomial(n: int, terms) -> Signomial:
    return Signomial(n, terms, SIGNOMIAL)


def polynomial(n: int, terms) -> Signomial:
    return Signomial(n, terms, POLYNOMIAL)


def sig(f: Signomial) -> Signomial:
    """Exponential substitution x_i = exp(y_i): polynomial -> signomial.

    The substitution preserves the term map; studying the result on R^n is
    equivalent to studying the polynomial on the open positive orthant.
    """
    if f.flavor == SIGNOMIAL:
        return f
    return Signomial(f.n, f.terms, SIGNOMIAL)


# -- evaluation ------------------------------------------------------------


def evaluate(f: Signomial, x) -> float | np.ndarray:
    """Evaluate f at a point (shape (n,)) or a batch of points (shape (m, n))."""
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != f.n:
        raise ValueError(f"point dimension {pts.shape[1]} != signomial dimension {f.n}")
    if not f.terms:
        out = np.zeros(pts.shape[0])
        return float(out[0]) if single else out
    exps = sorted(f.terms)
    coefs = np.array([f.terms[e] for e in exps])
    if f.flavor == SIGNOMIAL:
        emat = np.array([[float(c) for c in e] for e in exps])
        vals = np.exp(np.clip(pts @ emat.T, -_EXP_CLIP, _EXP_CLIP)) @ coefs
    else:
        emat = np.array([[int(c) for c in e] for e in exps], dtype=np.int64)
        # integer exponents keep negative bases exact (float powers would NaN)
        powers = pts[:, None, :] ** emat[None, :, :]
        vals = np.prod(powers, axis=2) @ coefs
    return float(vals[0]) if single else vals


def diagonalize(f: Signomial) -> Signomial:
    """Restrict to the diagonal: the univariate signomial h(t) = f(t, ..., t).

    Exponents collapse to their coordinate sums with coefficients summed per
    fiber.  Polynomials are first pushed through `sig`, so h is always a
    univariate signomial (h(t) is the polynomial value at x = (e^t, ..., e^t)).
    """
    g = sig(f)
    fibers: dict[Exponent, float] = {}
    for e, c in g.terms.items():
        key = (sum(e, Fraction(0)),)
        fibers[key] = fibers.get(key, 0.0) + c
    return Signomial(1, fibers, SIGNOMIAL)


# -- support splits --------------------------------------------------------


@dataclass(frozen=True)
class SupportSplit:
    """Signed-support declaration: coefficients on `positive` are forced >= 0,
    coefficients on `negatives` are unrestricted."""

    positive: frozenset[Exponent]
    negatives: frozenset[Exponent]

    def __post_init__(self):
        if self.positive & self.negatives:
            raise ValueError("positive and negative support sets must be disjoint")

    @staticmethod
    def from_signomial(f: Signomial) -> "SupportSplit":
        neg = frozenset(e for e, c in f.terms.items() if c < 0)
        return SupportSplit(positive=frozenset(f.terms) - neg, negatives=neg)


# -- JSON schema -----------------------------------------------------------
#
# {"n": int, "flavor": "signomial"|"polynomial",
#  "terms": [{"exp": ["p/q", ...], "coef": float}, ...]}


def to_json_dict(f: Signomial) -> dict:
    return {
        "n": f.n,
        "flavor": f.flavor,
        "terms": [
            {"exp": [str(c) for c in e], "coef": f.terms[e]} for e in sorted(f.terms)
        ],
    }


def from_json_dict(data: dict) -> Signomial:
    try:
        n = int(data["n"])
        flavor = data["flavor"]
        terms = [(exponent(t["exp"]), float(t["coef"])) for t in data["terms"]]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed signomial JSON: {exc}") from exc
    return Signomial(n, terms, flavor)


def dumps(f: Signomial, indent: int | None = None) -> str:
    return json.dumps(to_json_dict(f), indent=indent)


def loads(text: str) -> Signomial:
    return from_json_dict(json.loads(text))


def coefficient_scale(f: Signomial) -> float:
    """1 + sum of |coefficients|; the natural scale for residual tolerances."""
    return 1.0 + math.fsum(abs(c) for c in f.terms.values())
