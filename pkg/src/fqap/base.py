"""Digit vectors over Z/q, ultrametric absolute values, and exact cyclotomic scalars.

Points are finite digit sequences (x_0, ..., x_{d-1}); dual vectors are
(xi_1, ..., xi_d).  Both embed into F_q^infty by padding with zeros.  The
absolute value of a point is q^{-j} for the first nonzero digit index j;
the absolute value of a dual vector is q^j for the last nonzero index.

Exact arithmetic lives in :class:`CycScalar`, an element of Q(zeta) for a
primitive q-th root of unity zeta, reduced to the basis {1, zeta, ...,
zeta^{q-2}} via 1 + zeta + ... + zeta^{q-1} = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union


class ModulusError(ValueError):
    """The modulus is not an odd prime in the supported range."""


class ModulusMismatchError(ValueError):
    """Operands live over different moduli."""


class LevelError(ValueError):
    """A level parameter is out of range for the given vector."""


MAX_MODULUS = 31


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in range(2, int(math.isqrt(n)) + 1):
        if n % p == 0:
            return False
    return True


@dataclass(frozen=True)
class Modulus:
    """An odd prime q with 3 <= q <= 31."""

    q: int

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or self.q < 3 or self.q > MAX_MODULUS:
            raise ModulusError(f"modulus must be an odd prime in [3, {MAX_MODULUS}], got {self.q}")
        if self.q % 2 == 0 or not _is_prime(self.q):
            raise ModulusError(f"modulus must be an odd prime, got {self.q}")


def check_modulus(q: int) -> int:
    Modulus(q)
    return q


def _check_digits(digits: Sequence[int], q: int) -> tuple[int, ...]:
    out = tuple(int(v) for v in digits)
    for v in out:
        if v < 0 or v >= q:
            raise ValueError(f"digit {v} out of range for q={q}")
    return out


@dataclass(frozen=True)
class PointVec:
    """An element of F_q^d: digits (x_0, ..., x_{d-1})."""

    q: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        check_modulus(self.q)
        object.__setattr__(self, "digits", _check_digits(self.digits, self.q))

    @property
    def level(self) -> int:
        return len(self.digits)

    def __add__(self, other: "PointVec") -> "PointVec":
        self._check_compatible(other)
        return PointVec(self.q, tuple((a + b) % self.q for a, b in zip(self.digits, other.digits)))

    def __sub__(self, other: "PointVec") -> "PointVec":
        self._check_compatible(other)
        return PointVec(self.q, tuple((a - b) % self.q for a, b in zip(self.digits, other.digits)))

    def __neg__(self) -> "PointVec":
        return PointVec(self.q, tuple((-a) % self.q for a in self.digits))

    def scale(self, c: int) -> "PointVec":
        return PointVec(self.q, tuple((c * a) % self.q for a in self.digits))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.digits)

    def index(self) -> int:
        """Little-endian index n = sum x_i q^i; fixes table and file order."""
        n = 0
        for a in reversed(self.digits):
            n = n * self.q + a
        return n

    @classmethod
    def from_index(cls, q: int, d: int, n: int) -> "PointVec":
        digits = []
        for _ in range(d):
            digits.append(n % q)
            n //= q
        if n:
            raise ValueError("index out of range for level")
        return cls(q, tuple(digits))

    def _check_compatible(self, other: "PointVec") -> None:
        if self.q != other.q:
            raise ModulusMismatchError(f"modulus mismatch: {self.q} vs {other.q}")
        if self.level != other.level:
            raise LevelError(f"level mismatch: {self.level} vs {other.level}")


@dataclass(frozen=True)
class DualVec:
    """A character index on F_q^d: digits (xi_1, ..., xi_d)."""

    q: int
    digits: tuple[int, ...]

    def __post_init__(self) -> None:
        check_modulus(self.q)
        object.__setattr__(self, "digits", _check_digits(self.digits, self.q))

    @property
    def level(self) -> int:
        return len(self.digits)

    def __add__(self, other: "DualVec") -> "DualVec":
        self._check_compatible(other)
        return DualVec(self.q, tuple((a + b) % self.q for a, b in zip(self.digits, other.digits)))

    def __sub__(self, other: "DualVec") -> "DualVec":
        self._check_compatible(other)
        return DualVec(self.q, tuple((a - b) % self.q for a, b in zip(self.digits, other.digits)))

    def __neg__(self) -> "DualVec":
        return DualVec(self.q, tuple((-a) % self.q for a in self.digits))

    def scale(self, c: int) -> "DualVec":
        return DualVec(self.q, tuple((c * a) % self.q for a in self.digits))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.digits)

    def index(self) -> int:
        """Little-endian index m = sum xi_k q^{k-1}."""
        n = 0
        for a in reversed(self.digits):
            n = n * self.q + a
        return n

    @classmethod
    def from_index(cls, q: int, d: int, m: int) -> "DualVec":
        digits = []
        for _ in range(d):
            digits.append(m % q)
            m //= q
        if m:
            raise ValueError("index out of range for level")
        return cls(q, tuple(digits))

    def _check_compatible(self, other: "DualVec") -> None:
        if self.q != other.q:
            raise ModulusMismatchError(f"modulus mismatch: {self.q} vs {other.q}")
        if self.level != other.level:
            raise LevelError(f"level mismatch: {self.level} vs {other.level}")


def abs_point(x: PointVec) -> Fraction:
    """q^{-j} for the first nonzero digit index j, or 0 for the zero vector."""
    for j, a in enumerate(x.digits):
        if a != 0:
            return Fraction(1, x.q**j)
    return Fraction(0)


def abs_dual(xi: DualVec) -> int:
    """q^j for the last nonzero (1-based) component index j, or 0 for zero."""
    for j in range(xi.level, 0, -1):
        if xi.digits[j - 1] != 0:
            return xi.q**j
    return 0


def project(x: PointVec, d: int) -> PointVec:
    """Truncate to the first d digits (the projection pi_d)."""
    if d < 0 or d > x.level:
        raise LevelError(f"projection level {d} out of range for level {x.level}")
    return PointVec(x.q, x.digits[:d])


def decompose(v: Union[PointVec, DualVec], d: int):
    """Split v = prime + doubleprime at position d.

    For points the prime part keeps digits x_0..x_{d-1}; for duals it keeps
    xi_1..xi_d.  Both parts live at the original level.
    """
    if d < 0 or d > v.level:
        raise LevelError(f"decomposition level {d} out of range for level {v.level}")
    cls = type(v)
    zeros_hi = (0,) * (v.level - d)
    zeros_lo = (0,) * d
    prime = cls(v.q, v.digits[:d] + zeros_hi)
    doubleprime = cls(v.q, zeros_lo + v.digits[d:])
    return prime, doubleprime


def pair(xi: DualVec, x: PointVec) -> int:
    """The pairing sum xi_1 x_0 + ... + xi_d x_{d-1} in Z/q.

    x may be longer than xi, in which case the extra digits are irrelevant
    (the pairing only sees the first level(xi) digits of x).
    """
    if xi.q != x.q:
        raise ModulusMismatchError(f"modulus mismatch: {xi.q} vs {x.q}")
    if x.level < xi.level:
        raise LevelError(f"point level {x.level} shorter than dual level {xi.level}")
    return sum(k * a for k, a in zip(xi.digits, x.digits)) % xi.q


# ---------------------------------------------------------------------------
# Exact cyclotomic scalars


def _reduce_exponents(q: int, exps: list) -> tuple:
    # Fold zeta^{q-1} = -(1 + zeta + ... + zeta^{q-2}).
    top = exps[q - 1]
    if top:
        return tuple(exps[k] - top for k in range(q - 1))
    return tuple(exps[: q - 1])


class CycScalar:
    """An element of Q(zeta_q) on the basis {1, zeta, ..., zeta^{q-2}}.

    Coefficients are exact rationals (plain ints are accepted and kept as
    ints where possible).  The representation is canonical, so equality is
    coefficient-wise.
    """

    __slots__ = ("q", "coeffs")

    def __init__(self, q: int, coeffs: Sequence):
        check_modulus(q)
        coeffs = tuple(coeffs)
        if len(coeffs) != q - 1:
            raise ValueError(f"need exactly {q - 1} coefficients, got {len(coeffs)}")
        self.q = q
        self.coeffs = coeffs

    @classmethod
    def zero(cls, q: int) -> "CycScalar":
        return cls(q, (0,) * (q - 1))

    @classmethod
    def one(cls, q: int) -> "CycScalar":
        return cls(q, (1,) + (0,) * (q - 2))

    @classmethod
    def from_rational(cls, q: int, value) -> "CycScalar":
        return cls(q, (value,) + (0,) * (q - 2))

    @classmethod
    def zeta_power(cls, q: int, m: int) -> "CycScalar":
        """zeta^m, reduced to the canonical basis."""
        m %= q
        exps = [0] * q
        exps[m] = 1
        return cls(q, _reduce_exponents(q, exps))

    def _check(self, other: "CycScalar") -> None:
        if not isinstance(other, CycScalar):
            raise TypeError(f"cannot mix CycScalar with {type(other).__name__}")
        if self.q != other.q:
            raise ModulusMismatchError(f"modulus mismatch: {self.q} vs {other.q}")

    def __add__(self, other: "CycScalar") -> "CycScalar":
        self._check(other)
        return CycScalar(self.q, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "CycScalar") -> "CycScalar":
        self._check(other)
        return CycScalar(self.q, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "CycScalar":
        return CycScalar(self.q, tuple(-a for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycScalar(self.q, tuple(a * other for a in self.coeffs))
        self._check(other)
        q = self.q
        exps = [0] * q
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        exps[(i + j) % q] += a * b
        return CycScalar(q, _reduce_exponents(q, exps))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "CycScalar":
        if not isinstance(scalar, (int, Fraction)):
            raise TypeError("can only divide by a rational scalar")
        inv = Fraction(1, 1) / scalar
        return CycScalar(self.q, tuple(a * inv for a in self.coeffs))

    def conjugate(self) -> "CycScalar":
        """Complex conjugate: zeta^k -> zeta^{q-k}."""
        q = self.q
        exps = [0] * q
        for k, a in enumerate(self.coeffs):
            exps[(q - k) % q] += a
        return CycScalar(q, _reduce_exponents(q, exps))

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.coeffs)

    def is_rational(self) -> bool:
        return all(a == 0 for a in self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"not a rational scalar: {self!r}")
        return Fraction(self.coeffs[0])

    def embed(self) -> complex:
        return embed_complex(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CycScalar):
            return NotImplemented
        return self.q == other.q and all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self) -> int:
        return hash((self.q, tuple(Fraction(a) for a in self.coeffs)))

    def __repr__(self) -> str:
        return f"CycScalar(q={self.q}, coeffs={self.coeffs})"


def embed_complex(s: CycScalar) -> complex:
    """Evaluate at zeta = exp(2*pi*i/q)."""
    q = s.q
    return sum(
        float(a) * cmath.exp(2j * math.pi * k / q) for k, a in enumerate(s.coeffs) if a
    ) or complex(0.0)


def character(xi: DualVec, x: PointVec, mode: str = "exact"):
    """e_q(xi . x): zeta^{pair} in exact mode, exp(2*pi*i*pair/q) in float mode."""
    p = pair(xi, x)
    if mode == "exact":
        return CycScalar.zeta_power(xi.q, p)
    if mode == "float":
        return cmath.exp(2j * math.pi * p / xi.q)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# Index-level helpers shared by the table modules.


def index_digits(q: int, d: int, n: int) -> tuple[int, ...]:
    digits = []
    for _ in range(d):
        digits.append(n % q)
        n //= q
    return tuple(digits)


def add_index(q: int, d: int, n1: int, n2: int) -> int:
    """Digitwise sum of two little-endian indices."""
    out = 0
    p = 1
    for _ in range(d):
        out += ((n1 % q + n2 % q) % q) * p
        n1 //= q
        n2 //= q
        p *= q
    return out


def neg_index(q: int, d: int, n: int) -> int:
    out = 0
    p = 1
    for _ in range(d):
        out += ((-(n % q)) % q) * p
        n //= q
        p *= q
    return out


def scale_index(q: int, d: int, c: int, n: int) -> int:
    out = 0
    p = 1
    for _ in range(d):
        out += ((c * (n % q)) % q) * p
        n //= q
        p *= q
    return out


def shell_of_dual_index(q: int, m: int) -> int:
    """j such that |xi| = q^j for the dual vector with index m (0 for m = 0)."""
    j = 0
    while m:
        j += 1
        m //= q
    return j
