import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fqap import (
    CycScalar,
    DualVec,
    ModulusError,
    PointVec,
    abs_dual,
    abs_point,
    character,
    check_modulus,
    decompose,
    pair,
    project,
)
from fqap.base import add_index, index_digits, neg_index, scale_index, shell_of_dual_index

QS = [3, 5, 7]


def rand_point(draw, q, d):
    return PointVec(q, tuple(draw(st.integers(0, q - 1)) for _ in range(d)))


@pytest.mark.parametrize("q", [4, 6, 9, 2, 1, 0, -3, 37])
def test_bad_modulus_rejected(q):
    with pytest.raises(ModulusError):
        check_modulus(q)


@pytest.mark.parametrize("q", QS + [11, 31])
def test_good_modulus_accepted(q):
    assert check_modulus(q) == q


def test_point_index_roundtrip():
    for q in QS:
        for d in range(0, 4):
            for n in range(q**d):
                x = PointVec.from_index(q, d, n)
                assert x.index() == n
                assert index_digits(q, d, n) == x.digits


def test_index_arithmetic_matches_vector_arithmetic():
    q, d = 5, 3
    for n1 in range(0, q**d, 7):
        for n2 in range(0, q**d, 11):
            x1 = PointVec.from_index(q, d, n1)
            x2 = PointVec.from_index(q, d, n2)
            assert add_index(q, d, n1, n2) == (x1 + x2).index()
            assert neg_index(q, d, n1) == (-x1).index()
            assert scale_index(q, d, 2, n1) == x1.scale(2).index()


def test_abs_point_ultrametric():
    q, d = 3, 4
    for n1 in range(q**d):
        x = PointVec.from_index(q, d, n1)
        y = PointVec.from_index(q, d, (n1 * 7 + 5) % q**d)
        lhs = abs_point(x + y)
        assert lhs <= max(abs_point(x), abs_point(y))
    assert abs_point(PointVec(q, (0, 0, 0, 0))) == 0
    assert abs_point(PointVec(3, (0, 2, 1))) == Fraction(1, 3)
    assert abs_point(PointVec(5, (0, 0, 0, 4))) == Fraction(1, 5**3)


def test_abs_dual_values():
    q = 3
    assert abs_dual(DualVec(q, (0, 0))) == 0
    assert abs_dual(DualVec(q, (1, 0))) == q
    assert abs_dual(DualVec(q, (0, 2))) == q**2
    assert abs_dual(DualVec(q, (1, 2))) == q**2


def test_shell_of_dual_index():
    q = 3
    for m in range(q**3):
        xi = DualVec.from_index(q, 3, m)
        level = 0 if abs_dual(xi) == 0 else round(math.log(abs_dual(xi), q))
        assert shell_of_dual_index(q, m) == level


def test_decompose_splits_at_level():
    q, d = 3, 2
    x = PointVec(q, (1, 2, 0, 1, 2))
    lo, hi = decompose(x, d)
    assert lo.digits == (1, 2, 0, 0, 0)
    assert hi.digits == (0, 0, 0, 1, 2)
    assert (lo + hi).digits == x.digits
    xi = DualVec(q, (1, 2, 0, 1, 2))
    lo, hi = decompose(xi, d)
    assert lo.digits == (1, 2, 0, 0, 0)
    assert hi.digits == (0, 0, 0, 1, 2)


def test_project_truncates():
    q = 5
    x = PointVec(q, (1, 2, 3, 4))
    assert project(x, 2).digits == (1, 2)


def test_pairing_bilinear():
    q, d = 3, 3
    for m in range(q**d):
        xi = DualVec.from_index(q, d, m)
        for n in range(0, q**d, 5):
            x = PointVec.from_index(q, d, n)
            y = PointVec.from_index(q, d, (n + 11) % q**d)
            assert pair(xi, x + y) == (pair(xi, x) + pair(xi, y)) % q


# ---------------------------------------------------------------------------
# Cyclotomic scalars


@st.composite
def cyc_scalars(draw, q):
    coeffs = [
        Fraction(draw(st.integers(-9, 9)), draw(st.integers(1, 9)))
        for _ in range(q - 1)
    ]
    return CycScalar(q, tuple(coeffs))


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_cyc_ring_axioms(data):
    q = data.draw(st.sampled_from(QS))
    a = data.draw(cyc_scalars(q))
    b = data.draw(cyc_scalars(q))
    c = data.draw(cyc_scalars(q))
    assert a + b == b + a
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + CycScalar.zero(q) == a
    assert a * CycScalar.one(q) == a
    assert a - a == CycScalar.zero(q)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_cyc_embedding_is_ring_hom(data):
    q = data.draw(st.sampled_from(QS))
    a = data.draw(cyc_scalars(q))
    b = data.draw(cyc_scalars(q))
    za, zb = a.embed(), b.embed()
    assert abs((a + b).embed() - (za + zb)) < 1e-9
    assert abs((a * b).embed() - (za * zb)) < 1e-9
    assert abs(a.conjugate().embed() - za.conjugate()) < 1e-9


def test_zeta_power_order():
    for q in QS:
        prod = CycScalar.one(q)
        z = CycScalar.zeta_power(q, 1)
        for _ in range(q):
            prod = prod * z
        assert prod == CycScalar.one(q)
        assert CycScalar.zeta_power(q, q) == CycScalar.one(q)
        root = CycScalar.zeta_power(q, 1).embed()
        assert abs(root - complex(math.cos(2 * math.pi / q), math.sin(2 * math.pi / q))) < 1e-12


def test_zeta_powers_sum_to_zero():
    for q in QS:
        total = CycScalar.zero(q)
        for k in range(q):
            total = total + CycScalar.zeta_power(q, k)
        assert total == CycScalar.zero(q)


def test_rational_detection():
    s = CycScalar.from_rational(5, Fraction(3, 7))
    assert s.is_rational()
    assert s.rational_value() == Fraction(3, 7)
    assert not CycScalar.zeta_power(5, 1).is_rational()


def test_character_exact_matches_float():
    q, d = 5, 2
    for m in range(q**d):
        xi = DualVec.from_index(q, d, m)
        for n in range(q**d):
            x = PointVec.from_index(q, d, n)
            exact = character(xi, x, mode="exact").embed()
            approx = character(xi, x, mode="float")
            assert abs(exact - approx) < 1e-12
            expected = complex(
                math.cos(2 * math.pi * pair(xi, x) / q),
                math.sin(2 * math.pi * pair(xi, x) / q),
            )
            assert abs(exact - expected) < 1e-12
