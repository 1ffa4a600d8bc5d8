"""Measures on F_q^d viewed as cylinder measures on F_q^infty.

A weight table at level d assigns its weight uniformly to the radius
q^{-d} ball with the matching d-digit prefix.  This interpretation makes
every diagnostic here (ball condition, Hausdorff content, both sides of
the energy computation) finite and computable in closed form.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .base import CycScalar, LevelError, PointVec, check_modulus, index_digits
from .spectral import DenseTable, SpectralTable, dft_forward


class MeasureError(ValueError):
    """A measure construction or operation precondition failed."""


Weight = Union[Fraction, float]


class MeasureTable:
    """Nonnegative weights on F_q^d, exact (Fraction) or float."""

    def __init__(self, q: int, d: int, weights, mode: str = "exact"):
        check_modulus(q)
        if d < 0:
            raise LevelError(f"negative level {d}")
        n = q**d
        self.q = q
        self.d = d
        self.mode = mode
        if mode == "exact":
            ws = tuple(Fraction(w) for w in weights)
            if len(ws) != n:
                raise MeasureError(f"expected {n} weights, got {len(ws)}")
            if any(w < 0 for w in ws):
                raise MeasureError("negative weight")
            self.weights = ws
            self.mass = sum(ws, Fraction(0))
        elif mode == "float":
            arr = np.asarray(weights, dtype=np.float64)
            if arr.shape != (n,):
                raise MeasureError(f"expected {n} weights, got shape {arr.shape}")
            if np.any(arr < 0):
                raise MeasureError("negative weight")
            self.weights = arr
            self.mass = float(arr.sum())
        else:
            raise MeasureError(f"unknown mode {mode!r}")

    @property
    def size(self) -> int:
        return self.q**self.d

    def weight(self, i: int) -> Weight:
        return self.weights[i]

    def support_indices(self) -> list[int]:
        return [i for i in range(self.size) if self.weights[i] > 0]

    def support(self) -> "PointSet":
        return PointSet(self.q, self.d, frozenset(self.support_indices()))

    def rationalized(self) -> tuple[int, np.ndarray]:
        """Common denominator D and integer weights n_i with w_i = n_i / D."""
        if self.mode != "exact":
            raise MeasureError("rationalized() requires exact mode")
        denom = 1
        for w in self.weights:
            denom = denom * w.denominator // math.gcd(denom, w.denominator)
        ints = np.array([int(w * denom) for w in self.weights], dtype=object)
        return denom, ints

    def float_weights(self) -> np.ndarray:
        if self.mode == "float":
            return self.weights.copy()
        return np.array([float(w) for w in self.weights])

    def to_dense(self) -> DenseTable:
        if self.mode == "exact":
            return DenseTable.build(self.q, self.d, list(self.weights), mode="exact")
        return DenseTable.build(self.q, self.d, self.weights, mode="float")

    def spectrum(self, algorithm: str = "fast") -> SpectralTable:
        return dft_forward(self.to_dense(), algorithm=algorithm)

    def translate(self, t: PointVec) -> "MeasureTable":
        """Pushforward under x -> x + t."""
        if t.q != self.q or t.level != self.d:
            raise MeasureError("translation vector has wrong modulus or level")
        n = self.size
        out = [None] * n
        for i in range(n):
            x = PointVec.from_index(self.q, self.d, i)
            out[(x + t).index()] = self.weights[i]
        return MeasureTable(self.q, self.d, out, mode=self.mode)

    def normalized(self) -> "MeasureTable":
        if self.mass == 0:
            raise MeasureError("cannot normalize the zero measure")
        if self.mode == "exact":
            return MeasureTable(self.q, self.d, [w / self.mass for w in self.weights])
        return MeasureTable(self.q, self.d, self.weights / self.mass, mode="float")


@dataclass(frozen=True)
class PointSet:
    """A subset of F_q^d, stored by point encoding."""

    q: int
    d: int
    members: frozenset[int]

    def __post_init__(self) -> None:
        check_modulus(self.q)
        n = self.q**self.d
        for i in self.members:
            if not 0 <= i < n:
                raise ValueError(f"member index {i} out of range")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i: int) -> bool:
        return i in self.members

    def indicator_measure(self, normalize: bool = True) -> MeasureTable:
        n = self.q**self.d
        if normalize and not self.members:
            raise MeasureError("cannot normalize the empty set")
        w = Fraction(1, len(self.members)) if normalize else Fraction(1)
        return MeasureTable(self.q, self.d, [w if i in self.members else Fraction(0) for i in range(n)])


@dataclass(frozen=True)
class BallReport:
    alpha: float
    c_star: float
    witness_level: int
    witness_center: PointVec


# ---------------------------------------------------------------------------
# Constructions


def make_haar_ball(q: int, d: int, k: int, center: Optional[PointVec] = None) -> MeasureTable:
    """Uniform probability measure on the radius q^{-k} ball about `center`."""
    check_modulus(q)
    if not 0 <= k <= d:
        raise MeasureError(f"ball level k={k} must satisfy 0 <= k <= d={d}")
    cdig = center.digits if center is not None else (0,) * d
    if len(cdig) != d:
        raise MeasureError("center must live at the table level")
    n = q**d
    w = Fraction(1, q ** (d - k))
    prefix = cdig[:k]
    weights = []
    for i in range(n):
        digs = index_digits(q, d, i)
        weights.append(w if digs[:k] == prefix else Fraction(0))
    return MeasureTable(q, d, weights)


def make_capset_measure(d: int) -> MeasureTable:
    """Uniform probability measure on {0,1}^d inside F_3^d (an AP-free support)."""
    q = 3
    n = q**d
    w = Fraction(1, 2**d)
    weights = []
    for i in range(n):
        digs = index_digits(q, d, i)
        weights.append(w if all(v < 2 for v in digs) else Fraction(0))
    return MeasureTable(q, d, weights)


def make_cascade_measure(q: int, d: int, m: int, seed: int) -> MeasureTable:
    """Random multiplicative cascade on the q-ary digit tree.

    Each node keeps m of its q children chosen uniformly at random and splits
    its mass equally among them; leaves carry mass m^{-d}.  Deterministic for
    a fixed seed (nodes are visited in sorted prefix order, level by level).
    """
    check_modulus(q)
    if not 1 <= m <= q:
        raise MeasureError(f"children count m={m} must satisfy 1 <= m <= q")
    rng = random.Random(seed)
    prefixes = [()]
    for _ in range(d):
        nxt = []
        for p in prefixes:
            for c in sorted(rng.sample(range(q), m)):
                nxt.append(p + (c,))
        prefixes = nxt
    w = Fraction(1, m**d)
    weights = [Fraction(0)] * (q**d)
    for p in prefixes:
        weights[PointVec(q, p).index()] = w
    return MeasureTable(q, d, weights)


# ---------------------------------------------------------------------------
# Operations


def pushforward(mu: MeasureTable, d: int) -> MeasureTable:
    """Project to the first d digits; mass is preserved exactly."""
    if d < 0 or d > mu.d:
        raise LevelError(f"pushforward level {d} out of range for level {mu.d}")
    q = mu.q
    block = q**d
    if mu.mode == "exact":
        out = [Fraction(0)] * block
        for i, w in enumerate(mu.weights):
            out[i % block] += w
        return MeasureTable(q, d, out)
    out = np.zeros(block)
    for i in range(mu.size):
        out[i % block] += mu.weights[i]
    return MeasureTable(q, d, out, mode="float")


def threshold_small_atoms(mu: MeasureTable, big_k) -> MeasureTable:
    """Zero every weight <= K q^{-d} / 2 (strictly larger weights survive).

    When the input mass is at least K, the output mass is at least K/2
    (at most q^d atoms are dropped, each of weight at most K q^{-d}/2);
    this pigeonhole consequence is asserted.
    """
    if big_k <= 0:
        raise MeasureError("mass parameter K must be positive")
    cut = Fraction(big_k) / mu.q**mu.d / 2 if mu.mode == "exact" else float(big_k) / mu.q**mu.d / 2
    zero = Fraction(0) if mu.mode == "exact" else 0.0
    out = MeasureTable(
        mu.q, mu.d, [w if w > cut else zero for w in mu.weights], mode=mu.mode
    )
    if mu.mass >= big_k:
        assert out.mass >= Fraction(big_k) / 2 if mu.mode == "exact" else out.mass >= big_k / 2
    return out


def _level_sums(mu: MeasureTable) -> list[list]:
    """sums[j] lists cylinder masses at prefix level j (index = prefix encoding)."""
    q = mu.q
    sums = [list(mu.weights)]
    cur = sums[0]
    for j in range(mu.d, 0, -1):
        block = q ** (j - 1)
        nxt = [cur[p] for p in range(block)]
        for t in range(1, q):
            off = t * block
            for p in range(block):
                nxt[p] = nxt[p] + cur[off + p]
        sums.append(nxt)
        cur = nxt
    sums.reverse()  # sums[j] now corresponds to prefix level j
    return sums


def ball_condition_constant(mu: MeasureTable, alpha: float) -> BallReport:
    """Scan every cylinder ball (levels 0..d) for the largest mu(B)/rad(B)^alpha."""
    if not 0 < alpha <= 1:
        raise MeasureError(f"alpha={alpha} must lie in (0, 1]")
    q = mu.q
    sums = _level_sums(mu)
    best = -1.0
    best_level = 0
    best_prefix = 0
    for j in range(mu.d + 1):
        scale = float(q) ** (j * alpha)
        for p, s in enumerate(sums[j]):
            val = float(s) * scale
            if val > best:
                best, best_level, best_prefix = val, j, p
    center_digits = index_digits(q, best_level, best_prefix) + (0,) * (mu.d - best_level)
    return BallReport(alpha, best, best_level, PointVec(q, center_digits))


def hausdorff_content(points: PointSet, s: float, t: float) -> float:
    """Exact-minimum covering cost over ball covers of radius at most t.

    The set is the union of its level-d cylinders, so the optimum is a
    dynamic program on the q-ary prefix tree: each node is covered either
    by its own ball (cost q^{-js}, allowed once q^{-j} <= t) or by covering
    its occupied children.
    """
    if s <= 0:
        raise MeasureError(f"s={s} must be positive")
    if not 0 < t <= 1:
        raise MeasureError(f"t={t} must lie in (0, 1]")
    q, d = points.q, points.d
    if float(q) ** (-d) > t * (1 + 1e-12):
        raise MeasureError(f"t={t} smaller than the leaf radius q^-{d}")
    if not points.members:
        return 0.0

    def allowed(j: int) -> bool:
        return float(q) ** (-j) <= t * (1 + 1e-12)

    def cost(j: int, members: list[int]) -> float:
        own = float(q) ** (-j * s) if allowed(j) else math.inf
        if j == d:
            return own
        block = q**j
        by_child: dict[int, list[int]] = {}
        for i in members:
            by_child.setdefault((i // block) % q, []).append(i)
        split = sum(cost(j + 1, sub) for sub in by_child.values())
        return min(own, split)

    return cost(0, sorted(points.members))


# ---------------------------------------------------------------------------
# Energies


def self_energy(q: int, d: int, t: float) -> float:
    """Expected |u - v|^{-t} for u, v independent uniform on one radius q^{-d} ball.

    u - v is uniform on the ball, and |w| = q^{-j} with probability
    (1 - 1/q) q^{d-j} for j >= d; summing the geometric series gives
    q^{dt} (1 - 1/q) / (1 - q^{t-1}).
    """
    if not 0 < t < 1:
        raise MeasureError(f"t={t} must lie in (0, 1)")
    return float(q) ** (d * t) * (1 - 1 / q) / (1 - float(q) ** (t - 1))


def energy_baseline(q: int, t: float) -> float:
    """The mass-only term: expected |x - y|^{-t} under Haar on F_q^infty."""
    return self_energy(q, 0, t)


def energy_proportionality(q: int, t: float) -> float:
    """The exact constant relating the two energy computations.

    energy_spatial - mass^2 * energy_baseline equals this constant times
    energy_spectral; derived from the transform of the radial kernel
    |x|^{-t}, whose value at |xi| = q^j is |xi|^{t-1} (1-q^{-t})/(1-q^{t-1}).
    """
    if not 0 < t < 1:
        raise MeasureError(f"t={t} must lie in (0, 1)")
    return (1 - float(q) ** (-t)) / (1 - float(q) ** (t - 1))


def spatial_pair_sums(mu: MeasureTable) -> tuple[list, object]:
    """Exact shell decomposition of the off-diagonal pair mass.

    Returns (pair_sums, diagonal) where pair_sums[j] is the total of
    w(x) w(y) over ordered pairs of distinct cells whose first differing
    digit is j, and diagonal is sum_x w(x)^2.
    """
    sums = _level_sums(mu)
    sq = [sum(v * v for v in sums[j]) for j in range(mu.d + 1)]
    pair_sums = [sq[j] - sq[j + 1] for j in range(mu.d)]
    return pair_sums, sq[mu.d]


def energy_spatial(mu: MeasureTable, t: float) -> float:
    """The t-energy of the cylinder measure on F_q^infty, exactly decomposed.

    Distinct cells whose prefixes first differ at digit j sit at distance
    q^{-j}; pairs inside one cell contribute through the closed-form
    self-energy of a radius q^{-d} ball.
    """
    if not 0 < t < 1:
        raise MeasureError(f"t={t} must lie in (0, 1)")
    q = mu.q
    pair_sums, diag = spatial_pair_sums(mu)
    off = sum(float(p) * float(q) ** (j * t) for j, p in enumerate(pair_sums))
    return off + float(diag) * self_energy(q, mu.d, t)


def spectral_energy_shells(mu: MeasureTable) -> list[Fraction]:
    """Exact per-shell sums of |mu_hat(xi)|^2 for shells j = 0..d (exact mode)."""
    if mu.mode != "exact":
        raise MeasureError("exact shell sums require an exact-mode measure")
    big_f = mu.spectrum()
    out = []
    for j in range(mu.d + 1):
        # A single |mu_hat(xi)|^2 lives in the real subfield and need not be
        # rational; the full-shell sum is Galois-invariant, hence rational.
        acc = CycScalar.zero(mu.q)
        for m in big_f.shell_indices(j):
            z = big_f.scalar(m)
            acc = acc + z * z.conjugate()
        out.append(acc.rational_value())
    return out


def energy_spectral(mu: MeasureTable, t: float) -> float:
    """sum over nonzero xi of |mu_hat(xi)|^2 |xi|^{t-1}.

    The cylinder measure's transform vanishes beyond |xi| = q^d, so the
    level-d table carries the whole sum; the xi = 0 term (mass^2) is
    excluded here.
    """
    if not 0 < t < 1:
        raise MeasureError(f"t={t} must lie in (0, 1)")
    q = mu.q
    if mu.mode == "exact":
        shells = spectral_energy_shells(mu)
        return sum(float(shells[j]) * float(q) ** (j * (t - 1)) for j in range(1, mu.d + 1))
    mags = mu.spectrum().magnitudes()
    total = 0.0
    for j in range(1, mu.d + 1):
        lo, hi = q ** (j - 1), q**j
        total += float((mags[lo:hi] ** 2).sum()) * float(q) ** (j * (t - 1))
    return total


# ---------------------------------------------------------------------------
# File formats


def write_measure(mu: MeasureTable, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(f"q {mu.q}\nd {mu.d}\nmode {mu.mode}\n")
        for w in mu.weights:
            if mu.mode == "exact":
                fh.write(f"{w.numerator}/{w.denominator}\n")
            else:
                fh.write(f"{float(w)!r}\n")


def read_measure(path: str) -> MeasureTable:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        q = int(lines[0].split()[1])
        d = int(lines[1].split()[1])
        mode = lines[2].split()[1]
    except (IndexError, ValueError) as exc:
        raise MeasureError(f"malformed measure file {path}: {exc}") from exc
    body = lines[3:]
    if len(body) != q**d:
        raise MeasureError(f"measure file {path}: expected {q**d} weights, got {len(body)}")
    if mode == "exact":
        return MeasureTable(q, d, [Fraction(b) for b in body])
    return MeasureTable(q, d, [float(b) for b in body], mode="float")


def write_pointset(points: PointSet, path: str) -> None:
    # No mode line: this is what distinguishes a set file from a measure file.
    with open(path, "w") as fh:
        fh.write(f"q {points.q}\nd {points.d}\n")
        for i in sorted(points.members):
            fh.write(f"{i}\n")


def read_pointset(path: str) -> PointSet:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        q = int(lines[0].split()[1])
        d = int(lines[1].split()[1])
    except (IndexError, ValueError) as exc:
        raise MeasureError(f"malformed point-set file {path}: {exc}") from exc
    members = [int(b) for b in lines[2:]]
    if members != sorted(members):
        raise MeasureError(f"point-set file {path}: indices must be ascending")
    return PointSet(q, d, frozenset(members))
