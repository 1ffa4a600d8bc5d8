import math
import random
from fractions import Fraction

import pytest

from fqap import (
    MeasureError,
    MeasureTable,
    PointSet,
    PointVec,
    ball_condition_constant,
    energy_baseline,
    energy_proportionality,
    energy_spatial,
    energy_spectral,
    hausdorff_content,
    make_capset_measure,
    make_cascade_measure,
    make_haar_ball,
    pushforward,
    read_measure,
    read_pointset,
    self_energy,
    threshold_small_atoms,
    write_measure,
    write_pointset,
)
from fqap.base import abs_point
from tests.conftest import make_random_measure, make_random_set


def test_haar_ball_weights():
    q, d, k = 3, 3, 1
    mu = make_haar_ball(q, d, k)
    assert mu.mass == 1
    # Ball of radius q^{-k} about 0: first k digits are 0.
    for i, w in enumerate(mu.weights):
        x = PointVec.from_index(q, d, i)
        inside = all(v == 0 for v in x.digits[:k])
        assert (w > 0) == inside
    support = mu.support_indices()
    assert len(support) == q ** (d - k)
    assert all(mu.weights[i] == Fraction(1, q ** (d - k)) for i in support)


def test_capset_measure():
    d = 4
    mu = make_capset_measure(d)
    assert mu.q == 3
    assert mu.mass == 1
    support = mu.support_indices()
    assert len(support) == 2**d
    for i in support:
        assert all(v in (0, 1) for v in PointVec.from_index(3, d, i).digits)


def test_cascade_measure_structure():
    q, d, m, seed = 5, 3, 2, 42
    mu = make_cascade_measure(q, d, m, seed)
    assert mu.mass == 1
    support = mu.support_indices()
    assert len(support) == m**d
    assert all(mu.weights[i] == Fraction(1, m**d) for i in support)
    # Deterministic in the seed.
    mu2 = make_cascade_measure(q, d, m, seed)
    assert mu.weights == mu2.weights
    assert make_cascade_measure(q, d, m, seed + 1).weights != mu.weights


def test_pushforward_aggregates_cylinders():
    mu = make_random_measure(3, 3, seed=1, atoms=12)
    nu = pushforward(mu, 2)
    assert nu.d == 2 and nu.mass == mu.mass
    for i in range(3**2):
        expect = sum(mu.weights[j] for j in range(3**3) if j % 9 == i)
        assert nu.weights[i] == expect


def test_pushforward_preserves_low_frequencies():
    q, d, d_star = 3, 2, 4
    mu = make_random_measure(q, d_star, seed=9, atoms=15)
    spec_full = mu.spectrum()
    spec_push = pushforward(mu, d).spectrum()
    for m in range(q**d):
        assert spec_full.scalar(m) == spec_push.scalar(m)


def test_threshold_small_atoms():
    q, d = 3, 2
    w = [Fraction(0)] * 9
    w[0] = Fraction(1, 2)
    w[1] = Fraction(1, 3)
    w[2] = Fraction(1, 36)
    w[3] = Fraction(1, 36)
    mu = MeasureTable(q, d, w)
    big_k = Fraction(1)
    out = threshold_small_atoms(mu, big_k)
    # Cut is strict: keep w > K q^{-d} / 2 = 1/18.
    assert out.weights[0] == Fraction(1, 2)
    assert out.weights[1] == Fraction(1, 3)
    assert out.weights[2] == 0 and out.weights[3] == 0
    assert out.mass >= big_k / 2


def test_ball_condition_on_haar_ball():
    q, d, k = 3, 4, 2
    mu = make_haar_ball(q, d, k)
    # Cylinders of length j >= k carry mass q^{k-j}; radius q^{-j}.
    rep = ball_condition_constant(mu, alpha=1.0)
    assert rep.c_star >= 1.0
    assert abs(rep.c_star - float(q**k)) < 1e-9


def test_ball_condition_scales_with_alpha():
    mu = make_random_measure(3, 3, seed=6, atoms=10)
    c1 = ball_condition_constant(mu, alpha=0.5).c_star
    c2 = ball_condition_constant(mu, alpha=0.9).c_star
    assert c1 > 0 and c2 > 0
    # Larger alpha shrinks r^alpha for r < 1, so the constant cannot drop.
    assert c2 >= c1 - 1e-12


def test_hausdorff_content_full_space_and_point():
    q, d = 3, 3
    full = PointSet(q, d, frozenset(range(q**d)))
    # Covering the whole space with the unit ball costs 1^s = 1; no cheaper
    # cover exists at t = 1 since sub-balls cost more in total for s < 1.
    assert abs(hausdorff_content(full, 0.5, 1.0) - 1.0) < 1e-12
    single = PointSet(q, d, frozenset([5]))
    # A point is covered by one ball of the smallest allowed radius.
    s, t = 0.5, 1.0
    assert abs(hausdorff_content(single, s, t) - (q**-d) ** s) < 1e-12


def test_hausdorff_content_monotone_in_set():
    q, d = 3, 2
    small = make_random_set(q, d, seed=3, size=3)
    big = PointSet(q, d, small.members | {0, 1, 2})
    s, t = 0.7, 1.0
    assert hausdorff_content(small, s, t) <= hausdorff_content(big, s, t) + 1e-12


def test_hausdorff_content_radius_cap():
    q, d = 3, 2
    full = PointSet(q, d, frozenset(range(q**d)))
    # Capping the radius at q^{-1} forces at least q balls of that size.
    s = 0.5
    assert abs(hausdorff_content(full, s, 1.0 / q) - q * (1.0 / q) ** s) < 1e-12
    with pytest.raises(ValueError):
        hausdorff_content(full, 0.5, q ** float(-(d + 1)))


def test_self_energy_monte_carlo():
    # self_energy(q,d,t) = E |w|^{-t} for w = u - v with u, v independent
    # and uniform on one radius q^{-d} ball of the infinite digit space.
    # Simulate w directly: digits below level d vanish, deeper digits are
    # uniform; truncating at depth d + 40 leaves negligible bias.
    q, d, t = 3, 3, 0.5
    rng = random.Random(12345)
    depth = d + 40
    total = 0.0
    samples = 100_000
    for _ in range(samples):
        j = next(
            (i for i in range(d, depth) if rng.randrange(q) != 0),
            depth,
        )
        total += float(q) ** (j * t)
    estimate = total / samples
    exact = self_energy(q, d, t)
    assert abs(estimate - exact) / exact < 0.01


def test_self_energy_series():
    # Direct summation of the defining series
    #   sum_{j >= d} P(|w| = q^{-j}) q^{jt},  P = (1 - 1/q) q^{d-j}.
    q, d, t = 3, 2, 0.5
    series = sum(
        (1 - 1 / q) * float(q) ** (d - j) * float(q) ** (j * t)
        for j in range(d, d + 400)
    )
    assert abs(series - self_energy(q, d, t)) < 1e-10


def test_energy_spatial_matches_bruteforce():
    q, d, t = 3, 2, 0.7
    mu = make_random_measure(q, d, seed=2, atoms=6)
    n = q**d
    w = [float(v) for v in mu.weights]
    total = 0.0
    for i in range(n):
        for j in range(n):
            r = abs_point(PointVec.from_index(q, d, i) - PointVec.from_index(q, d, j))
            kernel = self_energy(q, d, t) if r == 0 else float(r) ** (-t)
            total += w[i] * w[j] * kernel
    assert abs(energy_spatial(mu, t) - total) < 1e-9


def test_energy_identity_exact_for_q3_and_q5():
    for q in (3, 5):
        for t in (0.3, 0.5, 0.7):
            for seed in range(5):
                mu = make_random_measure(q, 2, seed=seed, atoms=7)
                lhs = energy_spatial(mu, t) - float(mu.mass) ** 2 * energy_baseline(q, t)
                rhs = energy_proportionality(q, t) * energy_spectral(mu, t)
                assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs))


def test_energy_identity_on_haar_ball():
    q, d, k, t = 3, 3, 1, 0.5
    mu = make_haar_ball(q, d, k)
    # Spectrum is the indicator of |xi| <= q^k, so the nonzero-mode energy
    # is a geometric shell sum computable by hand.
    expect_spectral = sum(
        (q - 1) * q ** (j - 1) * float(q) ** (-j * (1 - t)) for j in range(1, k + 1)
    )
    assert abs(energy_spectral(mu, t) - expect_spectral) < 1e-12
    lhs = energy_spatial(mu, t) - energy_baseline(q, t)
    assert abs(lhs - energy_proportionality(q, t) * expect_spectral) < 1e-12


def test_measure_file_roundtrip(tmp_path):
    mu = make_random_measure(5, 2, seed=7, atoms=9)
    path = str(tmp_path / "m.txt")
    write_measure(mu, path)
    back = read_measure(path)
    assert back.q == mu.q and back.d == mu.d and back.mode == "exact"
    assert back.weights == mu.weights
    write_measure(mu, path)
    mu_f = MeasureTable(3, 1, [0.25, 0.5, 0.25], mode="float")
    path_f = str(tmp_path / "f.txt")
    write_measure(mu_f, path_f)
    back_f = read_measure(path_f)
    assert back_f.mode == "float"
    assert list(back_f.weights) == list(mu_f.weights)


def test_pointset_file_roundtrip(tmp_path):
    points = make_random_set(3, 3, seed=1, size=8)
    path = str(tmp_path / "s.txt")
    write_pointset(points, path)
    assert read_pointset(path) == points


def test_negative_weight_rejected():
    with pytest.raises(MeasureError):
        MeasureTable(3, 1, [Fraction(-1, 2), Fraction(1), Fraction(1, 2)])
