"""Three-term AP counting: brute-force trilinear forms and their spectral split.

The central identity: for a measure at level d_star and a separation level
d < d_star, the separated trilinear sum over pairs (x, a) with a' != 0
equals S_0 + S_neq0, where S_0 collapses to q^{d - d_star} times the
unseparated trilinear sum of the level-d pushforward.  In exact mode the
identity holds with zero tolerance and is asserted on every run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .base import CycScalar, DualVec, LevelError, PointVec, check_modulus, project
from .measures import MeasureTable, PointSet, pushforward
from .spectral import _ExactData, _exact_fast_pass, _float_fast

_DENSE_TABLE_LIMIT = 1500


class IdentityViolation(RuntimeError):
    """The exact decomposition identity failed (internal-error sentinel)."""


@dataclass(frozen=True)
class SeparationPredicate:
    """Keeps differences a whose first d digits are not all zero (a' != 0)."""

    d: int

    def __call__(self, a: PointVec) -> bool:
        return not project(a, self.d).is_zero()


@dataclass
class APReport:
    q: int
    d: int
    d_star: int
    lhs_bruteforce: Union[Fraction, float]
    s0: Union[CycScalar, complex]
    s_neq0: Union[CycScalar, complex]
    g_hat_base: Union[Fraction, float]
    positivity: bool
    bound_rhs: Optional[float] = None
    c2_measured: Optional[float] = None
    holds: Optional[bool] = None

    def _complex(self, v) -> complex:
        if isinstance(v, CycScalar):
            return v.embed()
        return complex(v)

    def to_json_dict(self) -> dict:
        s0 = self._complex(self.s0)
        sn = self._complex(self.s_neq0)
        out = {
            "q": self.q,
            "d": self.d,
            "d_star": self.d_star,
            "lhs": float(self.lhs_bruteforce),
            "re_s0": s0.real,
            "im_s0": s0.imag,
            "re_sneq0": sn.real,
            "im_sneq0": sn.imag,
            "g_hat_base": float(self.g_hat_base),
            "bound": self.bound_rhs,
            "c2_measured": self.c2_measured,
            "positivity": self.positivity,
            "holds": self.holds,
        }
        if isinstance(self.lhs_bruteforce, Fraction):
            out["lhs_exact"] = str(self.lhs_bruteforce)
            out["s0_exact"] = _cyc_string(self.s0)
            out["sneq0_exact"] = _cyc_string(self.s_neq0)
            out["g_hat_base_exact"] = str(self.g_hat_base)
        return out


def _cyc_string(s: CycScalar) -> str:
    return ",".join(str(Fraction(c)) for c in s.coeffs)


# ---------------------------------------------------------------------------
# Index machinery


@lru_cache(maxsize=None)
def _index_tables(q: int, d: int):
    """(digits, powers) for vectorized digit arithmetic on encodings."""
    n = q**d
    powers = q ** np.arange(d, dtype=np.int64)
    digs = (np.arange(n, dtype=np.int64)[:, None] // powers[None, :]) % q
    return digs, powers


@lru_cache(maxsize=None)
def _neg_table(q: int, d: int) -> np.ndarray:
    digs, powers = _index_tables(q, d)
    return ((-digs) % q) @ powers


@lru_cache(maxsize=None)
def _add_table(q: int, d: int) -> np.ndarray:
    n = q**d
    if n > _DENSE_TABLE_LIMIT:
        raise MemoryError(f"dense addition table too large for q^d = {n}")
    digs, powers = _index_tables(q, d)
    return (((digs[:, None, :] + digs[None, :, :]) % q) @ powers).astype(np.int64)


def _int_weights(mu: MeasureTable) -> tuple[int, np.ndarray]:
    """(denominator, int64-or-object integer weight array)."""
    denom, ints = mu.rationalized()
    peak = max((abs(int(v)) for v in ints), default=0)
    if (peak + 1) ** 3 * len(ints) < 2**62:
        return denom, ints.astype(np.int64)
    return denom, ints


# ---------------------------------------------------------------------------
# Brute-force counting


def _trilinear_raw(q: int, d: int, w: np.ndarray, min_prime_level: int) -> int:
    """sum over x and over a != 0 with a' != 0 at level `min_prime_level`
    of w(x) w(x+a) w(x+2a), in integer arithmetic.

    min_prime_level = 0 means plain a != 0 (no separation).
    """
    digs, powers = _index_tables(q, d)
    n = q**d
    rows = np.flatnonzero(w != 0)
    if rows.size == 0:
        return 0
    xd = digs[rows]
    wx = w[rows]
    sep_block = q**min_prime_level if min_prime_level > 0 else 1
    total = 0
    for a in range(1, n):
        if min_prime_level > 0 and a % sep_block == 0:
            continue
        ad = digs[a]
        i1 = ((xd + ad) % q) @ powers
        i2 = ((xd + 2 * ad) % q) @ powers
        total += int((wx * w[i1] * w[i2]).sum())
    return total


def count_aps_set(points: PointSet) -> int:
    """Ordered (x, a) pairs with a != 0 and x, x+a, x+2a all in the set."""
    if points.q == 2:
        raise ValueError("q = 2 is rejected: 2a degenerates")
    n = points.q**points.d
    w = np.zeros(n, dtype=np.int64)
    for i in points.members:
        w[i] = 1
    return _trilinear_raw(points.q, points.d, w, 0)


def trilinear_g(mu_d: MeasureTable):
    """sum_x sum_{a != 0} mu(x) mu(x+a) mu(x+2a)."""
    if mu_d.mode == "exact":
        denom, w = _int_weights(mu_d)
        return Fraction(_trilinear_raw(mu_d.q, mu_d.d, w, 0), denom**3)
    return _trilinear_float(mu_d, 0)


def trilinear_g_separated(mu: MeasureTable, sep: SeparationPredicate):
    """The trilinear sum restricted to differences with a' != 0 at level sep.d."""
    if sep.d > mu.d:
        raise LevelError(f"separation level {sep.d} exceeds measure level {mu.d}")
    if mu.mode == "exact":
        denom, w = _int_weights(mu)
        return Fraction(_trilinear_raw(mu.q, mu.d, w, sep.d), denom**3)
    return _trilinear_float(mu, sep.d)


def _trilinear_float(mu: MeasureTable, min_prime_level: int) -> float:
    q, d = mu.q, mu.d
    digs, powers = _index_tables(q, d)
    w = mu.float_weights()
    sep_block = q**min_prime_level if min_prime_level > 0 else 1
    total = 0.0
    for a in range(1, q**d):
        if min_prime_level > 0 and a % sep_block == 0:
            continue
        ad = digs[a]
        i1 = ((digs + ad) % q) @ powers
        i2 = ((digs + 2 * ad) % q) @ powers
        total += float((w * w[i1] * w[i2]).sum())
    return total


# ---------------------------------------------------------------------------
# Character sums


def character_sum_nonzero(theta: DualVec, d: int) -> CycScalar:
    """sum over nonzero a' in F_q^d of e_q(theta . a'): q^d - 1 or -1.

    Only the first d components of theta participate; the closed form is
    q^d - 1 when they all vanish and -1 otherwise.
    """
    if theta.level < d:
        raise LevelError(f"theta level {theta.level} shorter than d={d}")
    q = theta.q
    if all(v == 0 for v in theta.digits[:d]):
        return CycScalar.from_rational(q, q**d - 1)
    return CycScalar.from_rational(q, -1)


def character_sum_nonzero_bruteforce(theta: DualVec, d: int) -> CycScalar:
    """Direct summation over all nonzero a' in F_q^d (test oracle)."""
    q = theta.q
    acc = CycScalar.zero(q)
    for idx in range(1, q**d):
        a = PointVec.from_index(q, theta.level, idx)
        p = sum(k * v for k, v in zip(theta.digits[:d], a.digits[:d])) % q
        acc = acc + CycScalar.zeta_power(q, p)
    return acc


def doubleprime_character_sum(xi1pp: DualVec, xi2pp: DualVec, d: int) -> CycScalar:
    """sum over a'' (the q^{d*-d} differences with a' = 0) of e_q((2 xi1'' + xi2'') . a'').

    Collapses to q^{d*-d} exactly when 2 xi1'' + xi2'' = 0, else 0.
    """
    q = xi1pp.q
    d_star = xi1pp.level
    theta = xi1pp.scale(2) + xi2pp
    acc = CycScalar.zero(q)
    for idx in range(q ** (d_star - d)):
        a = PointVec.from_index(q, d_star, idx * q**d)
        p = sum(k * v for k, v in zip(theta.digits, a.digits)) % q
        acc = acc + CycScalar.zeta_power(q, p)
    return acc


# ---------------------------------------------------------------------------
# Spectral decomposition


def _cyc_mult_fn(q: int):
    def cmul(u, v):
        acc = [0] * q
        for i, a in enumerate(u):
            if a:
                for j, b in enumerate(v):
                    if b:
                        acc[(i + j) % q] += a * b
        top = acc[q - 1]
        if top:
            return tuple(acc[k] - top for k in range(q - 1))
        return tuple(acc[: q - 1])

    return cmul


def _exact_hat(mu: MeasureTable) -> tuple[int, list]:
    """(denominator, list of integer coefficient tuples for mu_hat)."""
    denom, w = _int_weights(mu)
    coeffs = np.zeros((len(w), mu.q - 1), dtype=object)
    coeffs[:, 0] = [int(v) for v in w]
    data = _exact_fast_pass(mu.q, mu.d, _ExactData(denom, coeffs), 1)
    return denom, [tuple(int(c) for c in row) for row in data.coeffs]


def spectral_decomposition(mu: MeasureTable, d: int) -> APReport:
    """Compute S_0 and S_neq0 and certify the defining identities.

    Exact mode asserts lhs = S_0 + S_neq0 and S_0 = q^{d - d_star} g_hat(0)
    with zero tolerance; float mode checks them to 1e-8 relative.
    """
    q, d_star = mu.q, mu.d
    if d >= d_star:
        raise LevelError(f"separation level d={d} must be below d_star={d_star}")
    if d < 1:
        raise LevelError("separation level d must be at least 1")
    if mu.mode == "exact":
        return _decompose_exact(mu, d)
    return _decompose_float(mu, d)


def _decompose_exact(mu: MeasureTable, d: int) -> APReport:
    q, d_star = mu.q, mu.d
    nd = q**d
    denom, hat = _exact_hat(mu)
    add = _add_table(q, d_star)
    neg = _neg_table(q, d_star)
    cmul = _cyc_mult_fn(q)
    zero = (0,) * (q - 1)

    def pair_sum(xi1pp_idx: int):
        """sum over xi1', xi2' of charsum(2 xi1' + xi2') * triple product."""
        row_pp = add[xi1pp_idx]
        nd2 = neg[add[xi1pp_idx, xi1pp_idx]]  # -2 xi1''
        row_m2 = add[nd2]
        acc = [0] * (q - 1)
        for x1 in range(nd):
            a2 = hat[row_pp[x1]]
            x2_special = neg[add[x1, x1]]  # the unique xi2' with 2 xi1' + xi2' = 0
            inner = [0] * (q - 1)
            row_x1 = add[x1]
            for x2 in range(nd):
                a1 = hat[row_pp[neg[row_x1[x2]]]]
                a3 = hat[row_m2[x2]]
                t = cmul(a1, a3)
                c = nd - 1 if x2 == x2_special else -1
                for k in range(q - 1):
                    inner[k] += c * t[k]
            contrib = cmul(a2, tuple(inner))
            for k in range(q - 1):
                acc[k] += contrib[k]
        return tuple(acc)

    scale = Fraction(1, q ** (d_star + d) * denom**3)
    s0_raw = pair_sum(0)
    s0 = CycScalar(q, tuple(Fraction(c) * scale for c in s0_raw))
    sn_acc = [0] * (q - 1)
    for k in range(1, q ** (d_star - d)):
        part = pair_sum(k * q**d)
        for i in range(q - 1):
            sn_acc[i] += part[i]
    s_neq0 = CycScalar(q, tuple(Fraction(c) * scale for c in sn_acc))

    lhs = trilinear_g_separated(mu, SeparationPredicate(d))
    g_hat_base = trilinear_g(pushforward(mu, d))

    total = s0 + s_neq0
    if not (total.is_rational() and total.rational_value() == lhs):
        raise IdentityViolation(
            f"decomposition identity failed: lhs={lhs} vs s0+s_neq0={total!r}"
        )
    expected_s0 = Fraction(g_hat_base) * Fraction(q**d, q**d_star)
    if not (s0.is_rational() and s0.rational_value() == expected_s0):
        raise IdentityViolation(
            f"base-term identity failed: s0={s0!r} vs q^(d-d*) g_hat(0)={expected_s0}"
        )
    return APReport(q, d, d_star, lhs, s0, s_neq0, g_hat_base, positivity=lhs > 0)


def _decompose_float(mu: MeasureTable, d: int) -> APReport:
    q, d_star = mu.q, mu.d
    nd = q**d
    n = q**d_star
    hat = _float_fast(q, d_star, mu.float_weights().astype(np.complex128), 1)
    add = _add_table(q, d_star)
    neg = _neg_table(q, d_star)

    def pair_sum(xi1pp_idx: int) -> complex:
        row_pp = add[xi1pp_idx]
        nd2 = neg[add[xi1pp_idx, xi1pp_idx]]
        row_m2 = add[nd2]
        acc = 0.0 + 0.0j
        for x1 in range(nd):
            a2 = hat[row_pp[x1]]
            x2_special = neg[add[x1, x1]]
            row_x1 = add[x1]
            a1s = hat[row_pp[neg[row_x1[: nd]]]]
            a3s = hat[row_m2[: nd]]
            prods = a1s * a3s
            inner = nd * prods[x2_special] - prods.sum()
            acc += a2 * inner
        return acc

    scale = 1.0 / q ** (d_star + d)
    s0 = pair_sum(0) * scale
    s_neq0 = sum(pair_sum(k * q**d) for k in range(1, q ** (d_star - d))) * scale
    lhs = trilinear_g_separated(mu, SeparationPredicate(d))
    g_hat_base = trilinear_g(pushforward(mu, d))
    ref = max(abs(lhs), abs(s0), abs(s_neq0), 1e-30)
    if abs(lhs - (s0 + s_neq0)) > 1e-8 * ref:
        raise IdentityViolation(
            f"decomposition identity failed beyond float tolerance: "
            f"lhs={lhs} vs s0+s_neq0={s0 + s_neq0}"
        )
    return APReport(q, d, d_star, lhs, s0, s_neq0, g_hat_base, positivity=lhs > 0)


# ---------------------------------------------------------------------------
# Error bound


@dataclass(frozen=True)
class ErrorBound:
    bound: float
    c2_measured: float
    holds: bool
    s_neq0_abs: float


def error_bound(mu: MeasureTable, d: int, beta: float) -> ErrorBound:
    """Finite-level surrogate of the error-term estimate.

    C2 is measured on the normalized measure as max |mu_hat(xi)| |xi|^{beta/2}
    over nonzero xi; the bound multiplies C2^3, the shell sum of
    |xi''|^{-3 beta/2} over |xi''| > q^d, and the exact character-sum total
    2 q^d (q^d - 1).
    """
    if not 2 / 3 < beta < 1:
        raise ValueError(f"beta={beta} must lie in (2/3, 1)")
    q, d_star = mu.q, mu.d
    if d >= d_star:
        raise LevelError(f"d={d} must be below d_star={d_star}")
    nu = mu.normalized()
    mags = nu.spectrum().magnitudes()
    c2 = 0.0
    for j in range(1, d_star + 1):
        lo, hi = q ** (j - 1), q**j
        peak = float(mags[lo:hi].max())
        c2 = max(c2, peak * float(q) ** (j * beta / 2.0))
    shell_sum = sum(
        (q - 1) * q ** (j - d - 1) * float(q) ** (-1.5 * beta * j)
        for j in range(d + 1, d_star + 1)
    )
    bound = c2**3 * float(q) ** (-(d_star + d)) * shell_sum * 2 * q**d * (q**d - 1)
    report = spectral_decomposition(nu, d)
    s_abs = abs(
        report.s_neq0.embed() if isinstance(report.s_neq0, CycScalar) else report.s_neq0
    )
    return ErrorBound(bound, c2, s_abs <= bound * (1 + 1e-12), s_abs)


# ---------------------------------------------------------------------------
# Witness extraction


def extract_progressions(
    mu: MeasureTable, sep: SeparationPredicate, limit: int
) -> list[tuple[PointVec, PointVec]]:
    """Up to `limit` pairs (x, a) with positive weights on x, x+a, x+2a and a' != 0."""
    q, d = mu.q, mu.d
    if sep.d > d:
        raise LevelError(f"separation level {sep.d} exceeds measure level {d}")
    out = []
    if limit <= 0:
        return out
    n = q**d
    sep_block = q**sep.d
    for xi in range(n):
        if mu.weights[xi] <= 0:
            continue
        x = PointVec.from_index(q, d, xi)
        for ai in range(1, n):
            if ai % sep_block == 0:
                continue
            a = PointVec.from_index(q, d, ai)
            if mu.weights[(x + a).index()] > 0 and mu.weights[(x + a + a).index()] > 0:
                out.append((x, a))
                if len(out) >= limit:
                    return out
    return out
