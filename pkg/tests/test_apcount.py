from fractions import Fraction

import pytest

from fqap import (
    CycScalar,
    DualVec,
    IdentityViolation,
    MeasureTable,
    PointSet,
    PointVec,
    SeparationPredicate,
    character_sum_nonzero,
    count_aps_set,
    error_bound,
    extract_progressions,
    make_capset_measure,
    make_cascade_measure,
    project,
    spectral_decomposition,
    trilinear_g,
    trilinear_g_separated,
)
from fqap.apcount import character_sum_nonzero_bruteforce
from tests.conftest import make_random_measure, make_random_set


def oracle_trilinear(mu, sep_level=0):
    """Triple sum over (x, a) with pure PointVec arithmetic."""
    q, d = mu.q, mu.d
    n = q**d
    total = Fraction(0) if mu.mode == "exact" else 0.0
    for xi in range(n):
        wx = mu.weights[xi]
        if wx == 0:
            continue
        x = PointVec.from_index(q, d, xi)
        for ai in range(n):
            a = PointVec.from_index(q, d, ai)
            if sep_level:
                if project(a, sep_level).is_zero():
                    continue
            elif ai == 0:
                continue
            total += wx * mu.weights[(x + a).index()] * mu.weights[(x + a + a).index()]
    return total


def oracle_count_aps(points):
    q, d = points.q, points.d
    n = q**d
    count = 0
    for xi in points.members:
        x = PointVec.from_index(q, d, xi)
        for ai in range(1, n):
            a = PointVec.from_index(q, d, ai)
            if (x + a).index() in points.members and (x + a + a).index() in points.members:
                count += 1
    return count


@pytest.mark.parametrize("q,d,seed", [(3, 2, 0), (3, 3, 1), (5, 2, 2)])
def test_count_aps_matches_oracle(q, d, seed):
    points = make_random_set(q, d, seed=seed, size=q**d // 2)
    assert count_aps_set(points) == oracle_count_aps(points)


def test_count_aps_known_values():
    # A full line x = {0, a, 2a, ...} in F_3^1 has 3 choices of x and 2 of a.
    line = PointSet(3, 1, frozenset({0, 1, 2}))
    assert count_aps_set(line) == 6
    # Any 2-point set has no AP.
    assert count_aps_set(PointSet(3, 2, frozenset({0, 4}))) == 0


@pytest.mark.parametrize("q,d,seed", [(3, 2, 3), (5, 2, 4)])
def test_trilinear_matches_oracle(q, d, seed):
    mu = make_random_measure(q, d, seed=seed, atoms=7)
    assert trilinear_g(mu) == oracle_trilinear(mu)
    sep = SeparationPredicate(1)
    assert trilinear_g_separated(mu, sep) == oracle_trilinear(mu, sep_level=1)


def test_trilinear_float_close_to_exact():
    mu = make_random_measure(3, 3, seed=5, atoms=9)
    mu_f = MeasureTable(3, 3, mu.float_weights(), mode="float")
    assert abs(trilinear_g(mu_f) - float(trilinear_g(mu))) < 1e-10


def test_separation_predicate():
    sep = SeparationPredicate(2)
    assert not sep(PointVec(3, (0, 0, 1, 2)))
    assert sep(PointVec(3, (0, 1, 0, 0)))
    assert sep(PointVec(3, (2, 0, 0, 0)))


def test_character_sum_closed_form_exhaustive():
    # Sum over nonzero a' at level d of e_q(theta . a'): q^d - 1 when the
    # truncation of theta vanishes, else -1.
    q = 3
    for d in range(1, 4):
        for m in range(q**3):
            theta = DualVec.from_index(q, 3, m)
            assert character_sum_nonzero(theta, d) == character_sum_nonzero_bruteforce(
                theta, d
            )
            truncated_zero = all(v == 0 for v in theta.digits[:d])
            expected = q**d - 1 if truncated_zero else -1
            assert character_sum_nonzero(theta, d) == CycScalar.from_rational(q, expected)


def test_charsum_total_identity():
    # sum over pairs (xi1', xi2') of |sum_{a' != 0} e((2 xi1' + xi2') . a')|
    # equals 2 q^d (q^d - 1).
    for q, d in ((3, 1), (3, 2), (5, 1)):
        n = q**d
        total = 0
        for m1 in range(n):
            for m2 in range(n):
                theta = DualVec.from_index(q, d, m1).scale(2) + DualVec.from_index(q, d, m2)
                val = character_sum_nonzero(theta, d).rational_value()
                total += abs(val)
        assert total == 2 * n * (n - 1)


@pytest.mark.parametrize("q,d,d_star,seed", [(3, 1, 3, 0), (3, 2, 4, 1), (5, 1, 3, 2)])
def test_decomposition_identities_exact(q, d, d_star, seed):
    mu = make_random_measure(q, d_star, seed=seed, atoms=8)
    report = spectral_decomposition(mu, d)
    lhs = oracle_trilinear(mu, sep_level=d)
    assert report.lhs_bruteforce == lhs
    s_total = report.s0 + report.s_neq0
    assert s_total.is_rational()
    assert s_total.rational_value() == lhs
    assert report.positivity == (lhs > 0)


def test_decomposition_float_agrees_with_exact():
    q, d, d_star = 3, 1, 3
    mu = make_random_measure(q, d_star, seed=3, atoms=10)
    mu_f = MeasureTable(q, d_star, mu.float_weights(), mode="float")
    re_exact = spectral_decomposition(mu, d)
    re_float = spectral_decomposition(mu_f, d)
    assert abs(re_float.lhs_bruteforce - float(re_exact.lhs_bruteforce)) < 1e-9
    assert abs(re_float.s0 - re_exact.s0.embed()) < 1e-9
    assert abs(re_float.s_neq0 - re_exact.s_neq0.embed()) < 1e-9


def test_decomposition_rejects_bad_levels():
    mu = make_random_measure(3, 2, seed=1)
    with pytest.raises(ValueError):
        spectral_decomposition(mu, 2)
    with pytest.raises(ValueError):
        spectral_decomposition(mu, 0)


def test_capset_has_no_progressions():
    for d in range(1, 6):
        mu = make_capset_measure(d)
        points = mu.support()
        assert count_aps_set(points) == 0
        assert trilinear_g_separated(mu, SeparationPredicate(1)) == 0
        assert extract_progressions(mu, SeparationPredicate(1), limit=5) == []


def test_extract_progressions_finds_witnesses():
    mu = make_cascade_measure(3, 3, 2, seed=0)
    sep = SeparationPredicate(1)
    found = extract_progressions(mu, sep, limit=10)
    count = trilinear_g_separated(mu, sep)
    assert (count > 0) == (len(found) > 0)
    for x, a in found:
        assert sep(a)
        assert mu.weights[x.index()] > 0
        assert mu.weights[(x + a).index()] > 0
        assert mu.weights[(x + a + a).index()] > 0


def test_error_bound_holds_on_cascades():
    for seed in range(5):
        mu = make_cascade_measure(3, 4, 2, seed=seed)
        for beta in (0.7, 0.8, 0.9):
            assert error_bound(mu, 1, beta).holds


def test_error_bound_rejects_bad_beta():
    mu = make_cascade_measure(3, 3, 2, seed=1)
    for beta in (0.5, 1.0, 1.5, 2 / 3):
        with pytest.raises(ValueError):
            error_bound(mu, 1, beta)
