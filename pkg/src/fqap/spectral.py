"""Forward/inverse transforms on F_q^d, shell statistics, and decay fitting.

Sign convention: the forward transform is F(xi) = sum_x f(x) e_q(xi . x)
with a *plus* sign in the exponent; inversion therefore uses the conjugate
character.  This matches the convention used throughout the trilinear
decomposition, and differs from most signal-processing references.

Exact tables are held internally as an integer coefficient matrix of shape
(q^d, q-1) over the cyclotomic basis together with one common denominator,
so transforms are exact integer linear algebra.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .base import (
    CycScalar,
    LevelError,
    check_modulus,
    shell_of_dual_index,
    _reduce_exponents,
)

_INT64_GUARD = 2**61


@lru_cache(maxsize=None)
def _zeta_matrices(q: int) -> tuple:
    """M[r] is the (q-1)x(q-1) right-multiplication matrix for zeta^r.

    Row convention: if c is a coefficient row vector then c @ M[r] is the
    coefficient row of zeta^r * (sum_k c_k zeta^k).
    """
    mats = []
    for r in range(q):
        rows = []
        for k in range(q - 1):
            exps = [0] * q
            exps[(k + r) % q] = 1
            rows.append(_reduce_exponents(q, exps))
        mats.append(np.array(rows, dtype=object))
    return tuple(mats)


@lru_cache(maxsize=None)
def _conj_matrix(q: int) -> np.ndarray:
    rows = []
    for k in range(q - 1):
        exps = [0] * q
        exps[(q - k) % q] = 1
        rows.append(_reduce_exponents(q, exps))
    return np.array(rows, dtype=object)


@lru_cache(maxsize=None)
def _digit_matrix(q: int, d: int) -> np.ndarray:
    """All little-endian digit vectors, shape (q^d, d), int64."""
    n = np.arange(q**d, dtype=np.int64)
    powers = q ** np.arange(d, dtype=np.int64)
    return (n[:, None] // powers[None, :]) % q


def _as_workable(coeffs: np.ndarray, q: int, d: int) -> np.ndarray:
    """Use int64 when a conservative growth bound allows it.

    Coefficient magnitudes grow by at most a factor 2q per transform pass,
    so (2q)^d bounds the total growth for both the fast and naive paths.
    """
    if coeffs.size == 0:
        return coeffs.astype(np.int64)
    peak = max(abs(int(v)) for v in coeffs.flat)
    if (peak + 1) * (2 * q) ** d < _INT64_GUARD:
        return coeffs.astype(np.int64)
    return coeffs.astype(object)


class _ExactData:
    """q^d cyclotomic scalars = integer matrix (N, q-1) / denom."""

    __slots__ = ("denom", "coeffs")

    def __init__(self, denom: int, coeffs: np.ndarray):
        self.denom = denom
        self.coeffs = coeffs

    @classmethod
    def from_scalars(cls, q: int, scalars) -> "_ExactData":
        denom = 1
        fracs = []
        for s in scalars:
            row = [Fraction(c) for c in s.coeffs]
            fracs.append(row)
            for c in row:
                denom = denom * c.denominator // math.gcd(denom, c.denominator)
        coeffs = np.empty((len(fracs), q - 1), dtype=object)
        for i, row in enumerate(fracs):
            for j, c in enumerate(row):
                coeffs[i, j] = int(c * denom)
        return cls(denom, coeffs)

    def scalar(self, q: int, i: int) -> CycScalar:
        return CycScalar(q, tuple(Fraction(int(c), self.denom) for c in self.coeffs[i]))


def _exact_fast_pass(q: int, d: int, data: _ExactData, sign: int) -> _ExactData:
    mats = _zeta_matrices(q)
    coeffs = _as_workable(data.coeffs, q, d)
    dtype = coeffs.dtype
    n = q**d
    for axis in range(d):
        lo = q**axis
        hi = n // (lo * q)
        view = coeffs.reshape(hi, q, lo, q - 1)
        out = np.zeros_like(view)
        for s in range(q):
            for t in range(q):
                r = (sign * s * t) % q
                if r == 0:
                    out[:, s] += view[:, t]
                else:
                    m = mats[r] if dtype == object else mats[r].astype(np.int64)
                    out[:, s] += np.dot(view[:, t], m)
        coeffs = out.reshape(n, q - 1)
    return _ExactData(data.denom, coeffs)


def _exact_naive(q: int, d: int, data: _ExactData, sign: int) -> _ExactData:
    mats = _zeta_matrices(q)
    digs = _digit_matrix(q, d)
    pairs = (sign * (digs @ digs.T)) % q
    coeffs = _as_workable(data.coeffs, q, d)
    dtype = coeffs.dtype
    out = np.zeros_like(coeffs)
    for r in range(q):
        mask = (pairs == r).astype(dtype)
        bucket = np.dot(mask, coeffs)
        if r == 0:
            out += bucket
        else:
            m = mats[r] if dtype == object else mats[r].astype(np.int64)
            out += np.dot(bucket, m)
    return _ExactData(data.denom, out)


def _float_fast(q: int, d: int, values: np.ndarray, sign: int) -> np.ndarray:
    n = q**d
    fmat = np.exp(2j * math.pi * sign * np.outer(np.arange(q), np.arange(q)) / q)
    vals = values.astype(np.complex128)
    for axis in range(d):
        lo = q**axis
        hi = n // (lo * q)
        view = vals.reshape(hi, q, lo)
        vals = np.einsum("st,htl->hsl", fmat, view).reshape(n)
    return vals


def _float_naive(q: int, d: int, values: np.ndarray, sign: int) -> np.ndarray:
    n = q**d
    digs = _digit_matrix(q, d).astype(np.float64)
    f = values.astype(np.complex128)
    # Pairing sums are bounded by d*(q-1)^2, so an extended root table
    # absorbs the mod-q reduction.
    table = np.exp(
        2j * math.pi * sign * (np.arange(d * (q - 1) ** 2 + 1) % q) / q
    )
    out = np.empty(n, dtype=np.complex128)
    block = max(1, 8_000_000 // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        sums = digs[start:stop] @ digs.T
        out[start:stop] = table[sums.astype(np.int64)] @ f
    return out


class _Table:
    """Shared storage for dense and spectral tables."""

    def __init__(self, q: int, d: int, mode: str, exact: Optional[_ExactData], floats):
        check_modulus(q)
        if mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {mode!r}")
        self.q = q
        self.d = d
        self.mode = mode
        self._exact = exact
        self._floats = floats

    @property
    def size(self) -> int:
        return self.q**self.d

    @classmethod
    def _build(cls, q, d, values, mode):
        n = q**d
        if mode == "float":
            arr = np.asarray(values, dtype=np.complex128)
            if arr.shape != (n,):
                raise ValueError(f"expected {n} values, got shape {arr.shape}")
            return cls(q, d, "float", None, arr)
        values = list(values)
        if len(values) != n:
            raise ValueError(f"expected {n} values, got {len(values)}")
        scalars = [
            v if isinstance(v, CycScalar) else CycScalar.from_rational(q, Fraction(v))
            for v in values
        ]
        return cls(q, d, "exact", _ExactData.from_scalars(q, scalars), None)

    def scalar(self, i: int):
        if self.mode == "exact":
            return self._exact.scalar(self.q, i)
        return complex(self._floats[i])

    def scalars(self):
        return [self.scalar(i) for i in range(self.size)]

    def magnitudes(self) -> np.ndarray:
        """Absolute values as floats (via the complex embedding in exact mode)."""
        if self.mode == "float":
            return np.abs(self._floats)
        q = self.q
        roots = np.exp(2j * math.pi * np.arange(q - 1) / q)
        coeffs = self._exact.coeffs.astype(np.float64)
        return np.abs(coeffs @ roots) / float(self._exact.denom)

    def complex_values(self) -> np.ndarray:
        if self.mode == "float":
            return self._floats.copy()
        q = self.q
        roots = np.exp(2j * math.pi * np.arange(q - 1) / q)
        return (self._exact.coeffs.astype(np.float64) @ roots) / float(self._exact.denom)


class DenseTable(_Table):
    """A function F_q^d -> scalars, indexed by the point encoding."""

    @classmethod
    def build(cls, q: int, d: int, values, mode: str = "exact") -> "DenseTable":
        return cls._build(q, d, values, mode)


class DecayFit:
    """Result of fitting |mu_hat(xi)| <= C |xi|^{-s/2} over frequency shells."""

    def __init__(self, s_hat, c_hat, s_query, shell_max, fit_defined):
        self.s_hat = s_hat
        self.c_hat = c_hat
        self.s_query = s_query
        self.shell_max = shell_max
        self.fit_defined = fit_defined


class SpectralTable(_Table):
    """A function on the dual group, organized by shells |xi| = q^j.

    Shell j >= 1 is the index range [q^{j-1}, q^j); shell 0 is {0}.  The
    shell cardinality (q-1) q^{j-1} is asserted at construction.
    """

    def __init__(self, q, d, mode, exact, floats):
        super().__init__(q, d, mode, exact, floats)
        self.shell_slices = self._checked_shells(q, d)

    @staticmethod
    def _checked_shells(q: int, d: int) -> list:
        slices = [(0, 1)]
        for j in range(1, d + 1):
            lo, hi = q ** (j - 1), q**j
            assert hi - lo == (q - 1) * q ** (j - 1)
            assert shell_of_dual_index(q, lo) == j
            assert shell_of_dual_index(q, hi - 1) == j
            slices.append((lo, hi))
        return slices

    @classmethod
    def build(cls, q: int, d: int, values, mode: str = "exact") -> "SpectralTable":
        return cls._build(q, d, values, mode)

    def shell_indices(self, j: int) -> range:
        lo, hi = self.shell_slices[j]
        return range(lo, hi)


def dft_forward(f: DenseTable, algorithm: str = "fast") -> SpectralTable:
    """F(xi) = sum_x f(x) e_q(xi . x)."""
    return _transform(f, SpectralTable, algorithm, sign=1, denom_factor=1)


def dft_inverse(big_f: SpectralTable, algorithm: str = "fast") -> DenseTable:
    """f(x) = q^{-d} sum_xi F(xi) e_q(-xi . x); exact left-inverse of the forward map."""
    return _transform(big_f, DenseTable, algorithm, sign=-1, denom_factor=big_f.q**big_f.d)


def _transform(table, out_cls, algorithm, sign, denom_factor):
    q, d = table.q, table.d
    if algorithm not in ("naive", "fast"):
        raise ValueError(f"unknown algorithm {algorithm!r}")
    if table.mode == "exact":
        engine = _exact_naive if algorithm == "naive" else _exact_fast_pass
        data = engine(q, d, table._exact, sign)
        return out_cls(q, d, "exact", _ExactData(data.denom * denom_factor, data.coeffs), None)
    engine = _float_naive if algorithm == "naive" else _float_fast
    vals = engine(q, d, table._floats, sign)
    return out_cls(q, d, "float", None, vals / denom_factor)


@dataclass(frozen=True)
class ShellStats:
    shell: int
    count: int
    max_abs: float
    mean_abs: float


def shell_profile(big_f: SpectralTable) -> list[ShellStats]:
    mags = big_f.magnitudes()
    out = []
    for j, (lo, hi) in enumerate(big_f.shell_slices):
        seg = mags[lo:hi]
        out.append(ShellStats(j, hi - lo, float(seg.max()), float(seg.mean())))
    return out


def decay_fit(big_f: SpectralTable, s_query: Optional[float] = None) -> DecayFit:
    """Fit the decay exponent from per-shell maxima of |F|.

    s_hat is -2 times the least-squares slope of log_q(shell max) against
    the shell index j, over nonzero shells j >= 1 with positive maximum.
    c_hat is the exact (finite) max of |F(xi)| |xi|^{s/2} over nonzero xi,
    evaluated at s_query when given, else at s_hat.
    """
    stats = shell_profile(big_f)
    usable = [(st.shell, st.max_abs) for st in stats[1:] if st.max_abs > 0.0]
    shell_max = {st.shell: st.max_abs for st in stats}
    fit_defined = len(usable) >= 2
    s_hat = None
    if fit_defined:
        js = np.array([j for j, _ in usable], dtype=np.float64)
        logs = np.array([math.log(m, big_f.q) for _, m in usable])
        slope = np.polyfit(js, logs, 1)[0]
        s_hat = -2.0 * float(slope)
    s_for_c = s_query if s_query is not None else s_hat
    if s_for_c is None or not usable:
        c_hat = 0.0
    else:
        c_hat = max(m * (big_f.q**j) ** (s_for_c / 2.0) for j, m in usable)
    return DecayFit(s_hat, c_hat, s_query, shell_max, fit_defined)


def write_spectrum_csv(big_f: SpectralTable, path: str) -> None:
    """CSV `xi_index,re,im,abs,shell`; exact mode adds a `.exact.txt` sidecar."""
    vals = big_f.complex_values()
    mags = big_f.magnitudes()
    with open(path, "w") as fh:
        fh.write("xi_index,re,im,abs,shell\n")
        for m in range(big_f.size):
            j = shell_of_dual_index(big_f.q, m)
            fh.write(
                f"{m},{float(vals[m].real)!r},{float(vals[m].imag)!r},"
                f"{float(mags[m])!r},{j}\n"
            )
    if big_f.mode == "exact":
        with open(path + ".exact.txt", "w") as fh:
            for m in range(big_f.size):
                s = big_f.scalar(m)
                parts = []
                for c in s.coeffs:
                    c = Fraction(c)
                    parts.append(f"{c.numerator}/{c.denominator}")
                fh.write(",".join(parts) + "\n")
