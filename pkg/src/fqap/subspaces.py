"""Exact q-combinatorics and the plane-sampling AP-richness experiment.

Subspaces are represented canonically by reduced row echelon bases over
Z/q; affine planes add a translate reduced against the pivot columns, so
plane equality is tuple equality of the canonical key.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional

from .base import PointVec, check_modulus
from .measures import PointSet


class ParameterError(ValueError):
    """A combinatorial parameter is out of its valid range."""


ENUMERATION_BUDGET = 10**7


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n (exact integer)."""
    if k < 0 or k > n:
        raise ParameterError(f"need 0 <= k <= n, got k={k}, n={n}")
    num = 1
    den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (k - i) - 1
    assert num % den == 0
    return num // den


def count_subspaces_containing(d: int, dprime: int, q: int) -> int:
    """Number of dprime-dimensional subspaces of F_q^d containing a fixed
    nonzero vector: the Gaussian binomial [d-1, dprime-1]_q."""
    if not 1 <= dprime <= d:
        raise ParameterError(f"need 1 <= dprime <= d, got dprime={dprime}, d={d}")
    return gaussian_binomial(d - 1, dprime - 1, q)


def dependence_probability(d: int, dprime: int, q: int) -> Fraction:
    """Probability of a linear dependence among a fixed nonzero vector and
    dprime - 1 further uniform vectors of F_q^d.

    Telescopes to 1 - prod_{i=1}^{dprime-1} (1 - q^{i-d}).
    """
    if dprime > d:
        raise ParameterError(f"dprime={dprime} exceeds d={d}")
    prod = Fraction(1)
    for i in range(1, dprime):
        prod *= 1 - Fraction(1, q ** (d - i))
    return 1 - prod


def choose_dprime(d: int, alpha: float, alpha0: float) -> int:
    """floor((10000 d / 9999) (1 - alpha) / (1 - alpha0)), guarded to [1, d)."""
    if not alpha0 < alpha < 1:
        raise ParameterError(f"need alpha0 < alpha < 1, got alpha={alpha}, alpha0={alpha0}")
    value = Fraction(10000 * d, 9999) * (1 - Fraction(alpha)) / (1 - Fraction(alpha0))
    dprime = int(value)  # floor for nonnegative value
    if dprime >= d:
        raise ParameterError(
            f"plane dimension {dprime} >= d={d} (alpha={alpha}, alpha0={alpha0})"
        )
    if dprime < 1:
        raise ParameterError(
            f"plane dimension {dprime} < 1 (alpha={alpha}, alpha0={alpha0})"
        )
    return dprime


# ---------------------------------------------------------------------------
# Linear algebra over Z/q


def _rref(vectors, q: int):
    """Reduced row echelon form; returns (rows, pivots) with zero rows dropped."""
    rows = [list(v) for v in vectors]
    d = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for col in range(d):
        piv = next((i for i in range(r, len(rows)) if rows[i][col] % q != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = pow(rows[r][col], q - 2, q)
        rows[r] = [(v * inv) % q for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] % q != 0:
                f = rows[i][col]
                rows[i] = [(a - f * b) % q for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return [tuple(row) for row in rows[:r]], tuple(pivots)


@dataclass(frozen=True)
class Plane:
    """An affine dprime-plane in F_q^d: span(basis) + translate."""

    q: int
    d: int
    basis: tuple[tuple[int, ...], ...]
    translate: tuple[int, ...]
    _rref_rows: tuple = field(init=False, repr=False, compare=False)
    _pivots: tuple = field(init=False, repr=False, compare=False)
    _canonical_translate: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        check_modulus(self.q)
        rows, pivots = _rref(self.basis, self.q)
        if len(rows) != len(self.basis):
            raise ParameterError("basis vectors are linearly dependent")
        t = self._reduce_translate(self.translate, rows, pivots)
        object.__setattr__(self, "_rref_rows", tuple(rows))
        object.__setattr__(self, "_pivots", pivots)
        object.__setattr__(self, "_canonical_translate", t)

    def _reduce_translate(self, t, rows, pivots):
        t = list(t)
        for row, p in zip(rows, pivots):
            f = t[p] % self.q
            if f:
                t = [(a - f * b) % self.q for a, b in zip(t, row)]
        return tuple(v % self.q for v in t)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def canonical_key(self) -> tuple:
        return (self._rref_rows, self._canonical_translate)

    def _solve(self, x: PointVec):
        """Coordinates of x - translate in the rref basis, or None."""
        y = [(a - b) % self.q for a, b in zip(x.digits, self._canonical_translate)]
        coords = tuple(y[p] for p in self._pivots)
        resid = list(y)
        for c, row in zip(coords, self._rref_rows):
            if c:
                resid = [(a - c * b) % self.q for a, b in zip(resid, row)]
        if any(resid):
            return None
        return coords

    def __contains__(self, x: PointVec) -> bool:
        return self._solve(x) is not None

    def coords(self, x: PointVec) -> PointVec:
        c = self._solve(x)
        if c is None:
            raise ParameterError(f"{x} does not lie on the plane")
        return PointVec(self.q, c)

    def point_from_coords(self, c: PointVec) -> PointVec:
        digits = list(self._canonical_translate)
        for ci, row in zip(c.digits, self._rref_rows):
            digits = [(a + ci * b) % self.q for a, b in zip(digits, row)]
        return PointVec(self.q, tuple(digits))

    def members(self) -> Iterator[PointVec]:
        for idx in range(self.q**self.dim):
            yield self.point_from_coords(PointVec.from_index(self.q, self.dim, idx))


def sample_plane(d: int, dprime: int, q: int, rng) -> Plane:
    """Uniform affine dprime-plane: rejection-sample an independent basis
    (uniform over subspaces, since every subspace has equally many ordered
    bases), then a uniform translate."""
    if not 1 <= dprime <= d:
        raise ParameterError(f"need 1 <= dprime <= d, got dprime={dprime}, d={d}")
    if isinstance(rng, int):
        rng = random.Random(rng)
    while True:
        basis = tuple(
            tuple(rng.randrange(q) for _ in range(d)) for _ in range(dprime)
        )
        rows, _ = _rref(basis, q)
        if len(rows) == dprime:
            break
    translate = tuple(rng.randrange(q) for _ in range(d))
    return Plane(q, d, basis, translate)


def enumerate_subspaces(d: int, dprime: int, q: int) -> Iterator[tuple]:
    """All dprime-subspaces as rref basis tuples, budget-guarded."""
    total = gaussian_binomial(d, dprime, q)
    if total > ENUMERATION_BUDGET:
        raise ParameterError(f"{total} subspaces exceed the enumeration budget")
    for pivots in itertools.combinations(range(d), dprime):
        free_positions = [
            (i, col)
            for i in range(dprime)
            for col in range(d)
            if col > pivots[i] and col not in pivots
        ]
        for values in itertools.product(range(q), repeat=len(free_positions)):
            rows = [[0] * d for _ in range(dprime)]
            for i, p in enumerate(pivots):
                rows[i][p] = 1
            for (i, col), v in zip(free_positions, values):
                rows[i][col] = v
            yield tuple(tuple(r) for r in rows)


def enumerate_planes(d: int, dprime: int, q: int) -> Iterator[Plane]:
    """All affine dprime-planes, one canonical representative each."""
    total = gaussian_binomial(d, dprime, q) * q ** (d - dprime)
    if total > ENUMERATION_BUDGET:
        raise ParameterError(f"{total} planes exceed the enumeration budget")
    for basis in enumerate_subspaces(d, dprime, q):
        _, pivots = _rref(basis, q)
        free_cols = [c for c in range(d) if c not in pivots]
        for values in itertools.product(range(q), repeat=len(free_cols)):
            t = [0] * d
            for c, v in zip(free_cols, values):
                t[c] = v
            yield Plane(q, d, basis, tuple(t))


def restrict(points: PointSet, plane: Plane) -> PointSet:
    """Image of the intersection under the plane's coordinate map.

    The map is affine and bijective onto F_q^{dprime}, so three-term APs
    are preserved in both directions.
    """
    if points.q != plane.q or points.d != plane.d:
        raise ParameterError("point set and plane dimensions do not match")
    out = set()
    for i in points.members:
        c = plane._solve(PointVec.from_index(points.q, points.d, i))
        if c is not None:
            out.add(PointVec(points.q, c).index())
    return PointSet(points.q, plane.dim, frozenset(out))


@dataclass
class VarnavidesReport:
    samples: int
    threshold: int
    w_hat: float
    ap_rich_fraction: Fraction
    per_ap_plane_fraction: Fraction
    implied_lower_bound: Fraction
    total_planes: int
    exhaustive: bool

    def to_json_dict(self) -> dict:
        return {
            "samples": self.samples,
            "w_hat": float(self.w_hat),
            "threshold": self.threshold,
            "ap_rich_fraction": float(self.ap_rich_fraction),
            "per_ap_plane_fraction": str(self.per_ap_plane_fraction),
            "implied_lower_bound": float(self.implied_lower_bound),
            "total_planes": f"{self.total_planes}/1",
            "exhaustive": self.exhaustive,
        }


def _restricted_has_ap(points: PointSet, plane: Plane) -> tuple[int, bool]:
    """(intersection size, contains an AP of the restricted set)."""
    sub = restrict(points, plane)
    n = points.q**plane.dim
    members = sub.members
    # x, x+a, x+2a are pairwise distinct for a != 0 and odd q.
    if len(members) < 3:
        return len(members), False
    q, dp = points.q, plane.dim
    for i in members:
        x = PointVec.from_index(q, dp, i)
        for ai in range(1, n):
            a = PointVec.from_index(q, dp, ai)
            if (x + a).index() in members and (x + a + a).index() in members:
                return len(members), True
    return len(members), False


def varnavides_experiment(
    points: PointSet,
    dprime: int,
    threshold: int,
    samples: Optional[int] = None,
    seed: int = 0,
    exhaustive: bool = False,
) -> VarnavidesReport:
    """Plane statistics: the fraction of planes with few points of A, the
    fraction containing an AP of A, and the double-counting lower bound
    on the AP count of A.

    With `exhaustive` every affine plane is visited once and all fractions
    are exact; otherwise `samples` planes are drawn uniformly at random.
    """
    d, q = points.d, points.q
    if not 1 <= dprime <= d:
        raise ParameterError(f"need 1 <= dprime <= d, got dprime={dprime}, d={d}")
    total_planes = gaussian_binomial(d, dprime, q) * q ** (d - dprime)
    if exhaustive:
        planes = enumerate_planes(d, dprime, q)
        count = total_planes
    else:
        if samples is None or samples < 1:
            raise ParameterError("samples must be at least 1 unless exhaustive")
        rng = random.Random(seed)
        planes = (sample_plane(d, dprime, q, rng) for _ in range(samples))
        count = samples
    low = 0
    rich = 0
    for plane in planes:
        size, has_ap = _restricted_has_ap(points, plane)
        if size <= threshold:
            low += 1
        if has_ap:
            rich += 1
    per_ap = Fraction(count_subspaces_containing(d, dprime, q), total_planes)
    rich_fraction = Fraction(rich, count)
    return VarnavidesReport(
        samples=count,
        threshold=threshold,
        w_hat=float(Fraction(low, count)),
        ap_rich_fraction=rich_fraction,
        per_ap_plane_fraction=per_ap,
        implied_lower_bound=rich_fraction / per_ap,
        total_planes=total_planes,
        exhaustive=exhaustive,
    )
