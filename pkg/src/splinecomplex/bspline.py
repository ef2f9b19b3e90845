"""Univariate B-spline kernel with exact rational knots.

Knot vectors store breakpoints as :class:`fractions.Fraction` so that local
knot vectors, mesh coordinates and derivative targets can be compared
exactly.  Evaluation converts to floating point at the call boundary.

Conventions:

* knot vectors are open ("p-open"): first/last breakpoints are 0 and 1 with
  multiplicity exactly ``p + 1``;
* piecewise-constant spans are half-open ``[xi_i, xi_{i+1})``, except that a
  span ending at 1 is closed on the right, so the basis is a partition of
  unity on the closed interval ``[0, 1]`` and right-continuous at internal
  breakpoints;
* 0/0 terms in the Cox-de Boor recursion evaluate to 0.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "KnotVector",
    "Anchor1D",
    "as_fraction",
    "eval_local",
    "eval_local_deriv",
    "curry_scaled",
    "scaled_eval",
    "derivative_decomposition",
    "eval_basis",
    "eval_basis_deriv",
    "insert_knot",
    "grad_matrix_1d",
]

ZERO = Fraction(0)
ONE = Fraction(1)


def as_fraction(x) -> Fraction:
    """Convert ints, strings like ``"1/4"`` and exact binary floats to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, str)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


@dataclass(frozen=True)
class Anchor1D:
    """Anchor of a univariate B-spline: index, parametric position, local knots."""

    index: int
    position: Fraction
    local: tuple  # p+2 knots, the support of the associated basis function

    @property
    def support(self) -> tuple:
        return (self.local[0], self.local[-1])


@dataclass(frozen=True)
class KnotVector:
    """A p-open knot vector on [0, 1] with exact rational breakpoints."""

    degree: int
    breakpoints: tuple
    multiplicities: tuple

    def __post_init__(self):
        p = self.degree
        bp = tuple(as_fraction(b) for b in self.breakpoints)
        mult = tuple(int(m) for m in self.multiplicities)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "multiplicities", mult)
        if p < 0:
            raise ValueError("degree must be non-negative")
        if len(bp) != len(mult) or len(bp) < 2:
            raise ValueError("breakpoints/multiplicities mismatch")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if bp[0] != 0 or bp[-1] != 1:
            raise ValueError("knot vector must span [0, 1]")
        if mult[0] != p + 1 or mult[-1] != p + 1:
            raise ValueError("boundary multiplicity must be exactly p+1 (open knot vector)")
        if any(m < 1 for m in mult):
            raise ValueError("multiplicities must be positive")
        if any(m > p + 1 for m in mult[1:-1]):
            raise ValueError("internal multiplicity exceeds p+1")
        if self.n < p + 1:
            raise ValueError("knot vector defines fewer than p+1 basis functions")

    # -- construction helpers ------------------------------------------------

    @classmethod
    def from_knots(cls, degree: int, knots: Iterable) -> "KnotVector":
        """Build from a full non-decreasing knot list (with repetitions)."""
        ks = [as_fraction(k) for k in knots]
        bp, mult = [], []
        for k in ks:
            if bp and k == bp[-1]:
                mult[-1] += 1
            else:
                bp.append(k)
                mult.append(1)
        return cls(degree, tuple(bp), tuple(mult))

    @classmethod
    def uniform(cls, degree: int, nspans: int) -> "KnotVector":
        """Open knot vector with ``nspans`` equal spans and smooth interior."""
        if nspans < 1:
            raise ValueError("need at least one span")
        bp = [Fraction(i, nspans) for i in range(nspans + 1)]
        mult = [degree + 1] + [1] * (nspans - 1) + [degree + 1]
        return cls(degree, tuple(bp), tuple(mult))

    # -- basic queries ---------------------------------------------------------

    @property
    def n(self) -> int:
        """Dimension of the spline space."""
        return sum(self.multiplicities) - self.degree - 1

    @property
    def knots(self) -> tuple:
        """Expanded knot list of length n + p + 1."""
        out = []
        for b, m in zip(self.breakpoints, self.multiplicities):
            out.extend([b] * m)
        return tuple(out)

    @property
    def internal_multiplicities(self) -> tuple:
        return self.multiplicities[1:-1]

    def multiplicity_of(self, x) -> int:
        x = as_fraction(x)
        try:
            i = self.breakpoints.index(x)
        except ValueError:
            return 0
        return self.multiplicities[i]

    def rendered_lines(self) -> list:
        """Breakpoints expanded with the drawing convention: boundary knots
        are repeated floor(p/2)+1 times, internal knots their multiplicity."""
        b = self.degree // 2 + 1
        out = [self.breakpoints[0]] * b
        for bp, m in zip(self.breakpoints[1:-1], self.multiplicities[1:-1]):
            out.extend([bp] * m)
        out.extend([self.breakpoints[-1]] * b)
        return out

    # -- derived objects -------------------------------------------------------

    def derived(self) -> "KnotVector":
        """Knot vector of the derivative space: degree p-1, boundary
        multiplicities reduced by one, internal ones unchanged."""
        p = self.degree
        if p < 1:
            raise ValueError("cannot derive a degree-0 space")
        if any(m > p for m in self.internal_multiplicities):
            raise ValueError("discontinuous splines (internal multiplicity p+1) unsupported")
        mult = (p,) + self.internal_multiplicities + (p,)
        return KnotVector(p - 1, self.breakpoints, mult)

    def anchors(self) -> list:
        """One anchor per basis function, with its p+2-knot local vector."""
        p = self.degree
        ks = self.knots
        out = []
        for i in range(self.n):
            local = ks[i : i + p + 2]
            if p % 2 == 1:
                pos = local[(p + 1) // 2]
            else:
                pos = (local[p // 2] + local[p // 2 + 1]) / 2
            out.append(Anchor1D(i, pos, tuple(local)))
        return out

    def greville(self) -> list:
        """Greville sites (knot averages), one per basis function."""
        p = self.degree
        if p < 1:
            raise ValueError("Greville sites need degree >= 1")
        ks = self.knots
        return [sum(ks[i + 1 : i + p + 1], ZERO) / p for i in range(self.n)]

    def spans(self) -> list:
        """Nonempty spans as (left, right) pairs of Fractions."""
        return list(zip(self.breakpoints, self.breakpoints[1:]))

    def to_text(self) -> str:
        """Text form ``p; b1/q1:m1 b2/q2:m2 ...``."""
        parts = " ".join(
            f"{b.numerator}/{b.denominator}:{m}"
            for b, m in zip(self.breakpoints, self.multiplicities)
        )
        return f"{self.degree}; {parts}"

    @classmethod
    def from_text(cls, text: str) -> "KnotVector":
        head, _, tail = text.partition(";")
        degree = int(head.strip())
        bp, mult = [], []
        for tok in tail.split():
            val, _, m = tok.rpartition(":")
            bp.append(Fraction(val))
            mult.append(int(m))
        return cls(degree, tuple(bp), tuple(mult))


# -- local (single-function) evaluation ----------------------------------------


def _local_floats(local_knots) -> np.ndarray:
    return np.array([float(k) for k in local_knots])


def eval_local(local_knots: Sequence, degree: int, x) -> np.ndarray:
    """Evaluate the single B-spline N[local_knots] of the given degree.

    ``local_knots`` has degree+2 entries.  Spans are half-open, closed on the
    right where the span ends at 1 so that evaluation at the domain end uses
    the left limit.
    """
    t = _local_floats(local_knots)
    q = degree
    if len(t) != q + 2:
        raise ValueError("local knot vector must have degree+2 entries")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    nlev = q + 1
    vals = np.zeros((nlev, x.size))
    for j in range(nlev):
        a, b = t[j], t[j + 1]
        if b > a:
            inside = (x >= a) & ((x < b) | ((x == b) & (b == 1.0)))
            vals[j, inside] = 1.0
    for qq in range(1, q + 1):
        nxt = np.zeros((nlev - qq, x.size))
        for j in range(nlev - qq):
            acc = nxt[j]
            if t[j + qq] > t[j]:
                acc += (x - t[j]) / (t[j + qq] - t[j]) * vals[j]
            if t[j + qq + 1] > t[j + 1]:
                acc += (t[j + qq + 1] - x) / (t[j + qq + 1] - t[j + 1]) * vals[j + 1]
        vals = nxt
    return vals[0]


def eval_local_deriv(local_knots: Sequence, degree: int, x) -> np.ndarray:
    """First derivative of N[local_knots], via the two-term decomposition."""
    q = degree
    t = list(local_knots)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.size)
    if q == 0:
        return out
    if t[q] > t[0]:
        out += q / float(t[q] - t[0]) * eval_local(t[:-1], q - 1, x)
    if t[q + 1] > t[1]:
        out -= q / float(t[q + 1] - t[1]) * eval_local(t[1:], q - 1, x)
    return out


def scaled_eval(local_knots: Sequence, degree: int, scaling: str, x, deriv: int = 0):
    """Evaluate a basis factor with 'B' (plain) or 'D' (Curry-Schoenberg) scaling.

    A 'D' factor of degree q is ``(q+1)/|support| * N[local_knots]``, the
    scaling under which univariate derivative matrices have +-1 entries.
    """
    if deriv == 0:
        v = eval_local(local_knots, degree, x)
    elif deriv == 1:
        v = eval_local_deriv(local_knots, degree, x)
    else:
        raise ValueError("only derivatives up to order 1 are tabulated")
    if scaling == "B":
        return v
    if scaling == "D":
        supp = float(local_knots[-1] - local_knots[0])
        return (degree + 1) / supp * v
    raise ValueError(f"unknown scaling {scaling!r}")


def curry_scaled(local_knots: Sequence, p: int, x) -> np.ndarray:
    """Curry-Schoenberg spline D(x) = (p/|support|) N[local_knots](x).

    ``local_knots`` has p+1 entries (a degree p-1 function); the scaling makes
    it integrate to one over its support.
    """
    supp = local_knots[-1] - local_knots[0]
    if supp <= 0:
        raise ValueError("zero support length")
    return p / float(supp) * eval_local(local_knots, p - 1, x)


def derivative_decomposition(local_knots: Sequence, degree: int):
    """Split d/dx N[local_knots] into scaled lower-degree neighbours.

    Returns two (target_local_knots, coefficient) pairs with exact Fraction
    coefficients ``+p/|support^-|`` and ``-p/|support^+|``.  A vanishing
    support (missing neighbour at the domain ends) yields ``(None, 0)``.
    """
    p = degree
    t = [as_fraction(k) for k in local_knots]
    lo = t[:-1]
    hi = t[1:]
    if t[p] > t[0]:
        minus = (tuple(lo), Fraction(p, 1) / (t[p] - t[0]))
    else:
        minus = (None, ZERO)
    if t[p + 1] > t[1]:
        plus = (tuple(hi), -Fraction(p, 1) / (t[p + 1] - t[1]))
    else:
        plus = (None, ZERO)
    return minus, plus


# -- full-basis evaluation -------------------------------------------------------


def eval_basis(kv: KnotVector, x) -> np.ndarray:
    """All n basis values N_{i,p}(x); shape (npts, n).

    Raises ValueError for points outside [0, 1].
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("evaluation point outside [0, 1]")
    out = np.zeros((x.size, kv.n))
    ks = kv.knots
    p = kv.degree
    for i in range(kv.n):
        out[:, i] = eval_local(ks[i : i + p + 2], p, x)
    return out


def eval_basis_deriv(kv: KnotVector, x) -> np.ndarray:
    """First derivatives of all n basis functions; shape (npts, n)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("evaluation point outside [0, 1]")
    out = np.zeros((x.size, kv.n))
    ks = kv.knots
    p = kv.degree
    for i in range(kv.n):
        out[:, i] = eval_local_deriv(ks[i : i + p + 2], p, x)
    return out


# -- knot insertion ---------------------------------------------------------------


def insert_knot(kv: KnotVector, coeffs, xbar):
    """Insert the knot xbar, returning the refined knot vector and coefficients.

    The new coefficients follow the three-case convex-combination rule; the
    represented spline is unchanged pointwise.  Inserting an existing value
    reduces the inter-element continuity by one.
    """
    xbar = as_fraction(xbar)
    if not (0 < xbar < 1):
        raise ValueError("inserted knot must lie in (0, 1)")
    p = kv.degree
    if kv.multiplicity_of(xbar) >= p + 1:
        raise ValueError("knot already has multiplicity p+1")
    coeffs = np.asarray(coeffs)
    n = kv.n
    if coeffs.shape[0] != n:
        raise ValueError("coefficient vector has wrong length")
    ks = kv.knots
    k = bisect.bisect_right(ks, xbar)  # number of knots <= xbar (paper's k, 1-based)
    new = np.zeros((n + 1,) + coeffs.shape[1:], dtype=coeffs.dtype)
    for j in range(n + 1):
        i = j + 1
        if i <= k - p:
            new[j] = coeffs[j]
        elif i <= k:
            alpha = float((xbar - ks[j]) / (ks[j + p] - ks[j]))
            new[j] = alpha * coeffs[j] + (1.0 - alpha) * coeffs[j - 1]
        else:
            new[j] = coeffs[j - 1]

    if kv.multiplicity_of(xbar) > 0:
        idx = kv.breakpoints.index(xbar)
        mult = list(kv.multiplicities)
        mult[idx] += 1
        new_kv = KnotVector(p, kv.breakpoints, tuple(mult))
    else:
        bp = list(kv.breakpoints)
        mult = list(kv.multiplicities)
        pos = bisect.bisect_left(bp, xbar)
        bp.insert(pos, xbar)
        mult.insert(pos, 1)
        new_kv = KnotVector(p, tuple(bp), tuple(mult))
    return new_kv, new


def grad_matrix_1d(kv: KnotVector):
    """Derivative matrix S_p(Xi) -> S_{p-1}(Xi') in the B/D-scaled bases.

    Column i carries +1 at row i-1 and -1 at row i; with the Curry-Schoenberg
    scaling of the target this is the signed edge-vertex incidence pattern.
    """
    import scipy.sparse as sp

    n = kv.n
    rows, cols, vals = [], [], []
    for i in range(n):
        if i - 1 >= 0:
            rows.append(i - 1)
            cols.append(i)
            vals.append(1)
        if i <= n - 2:
            rows.append(i)
            cols.append(i)
            vals.append(-1)
    return sp.coo_matrix((vals, (rows, cols)), shape=(n - 1, n), dtype=np.int64).tocsr()
