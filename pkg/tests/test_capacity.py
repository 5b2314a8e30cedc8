from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from choquetq.capacity import (
    Capacity,
    CapacityError,
    MobiusCoefficients,
    additive_capacity,
    choquet_classical,
    choquet_layers,
    choquet_via_mobius,
    choquet_weights,
    classify_modularity,
    comonotonic_functions,
    elements_of,
    inverse_mobius,
    mask_of,
    mobius_transform,
    modularity_defect,
    random_capacity,
    unanimity_capacity,
)
from choquetq.experiments import STUDENT_MARKS, student_capacity


def brute_mobius(values, n):
    """Alternating sum over all subsets, written directly from the definition."""
    out = []
    for a in range(1 << n):
        s = 0
        for b in range(1 << n):
            if b & a == b:
                s += (-1) ** (bin(a).count("1") - bin(b).count("1")) * values[b]
        out.append(s)
    return out


def brute_choquet(f, mu):
    """Choquet integral as sum over thresholds: sum_k (f_(k) - f_(k-1)) mu({f >= f_(k)})."""
    levels = sorted(set(f))
    total, prev = 0, 0
    for t in levels:
        mask = mask_of(i + 1 for i, v in enumerate(f) if v >= t)
        total += (t - prev) * mu(mask)
        prev = t
    return total


def test_mask_helpers():
    assert mask_of([1, 3]) == 0b101
    assert elements_of(0b110) == (2, 3)


def test_student_mobius_coefficients():
    d = mobius_transform(student_capacity())
    assert d((1, 2)) == Fraction(2, 5)
    assert d((1, 3)) == d((2, 3)) == Fraction(-1, 10)
    assert d((1, 2, 3)) == 0
    for s in (1, 2, 3):
        assert d((s,)) == student_capacity()((s,))
    assert d.total() == 1


def test_student_choquet_values():
    mu = student_capacity()
    got = {s: choquet_classical(m, mu) for s, m in STUDENT_MARKS.items()}
    assert got == {"A": 70, "B": 65, "C": 64, "D": 63}
    for s, m in STUDENT_MARKS.items():
        assert got[s] == brute_choquet(m, mu)


def test_student_layers():
    d = mobius_transform(student_capacity())
    assert choquet_layers(STUDENT_MARKS["A"], d) == [48, 22, 0]
    assert choquet_via_mobius(STUDENT_MARKS["A"], d) == 70


def test_student_weights():
    mu = student_capacity()
    # D has distinct marks: lowest mark (subject 3) gets zero weight
    assert choquet_weights(STUDENT_MARKS["D"], mu) == [Fraction(3, 10), Fraction(7, 10), 0]
    w = choquet_weights(STUDENT_MARKS["A"], mu)
    assert sum(w) == 1 and w[2] == 0


def test_tie_order_invariance():
    mu = student_capacity()
    # swapping the labels of tied marks leaves the integral unchanged
    permuted = Capacity.from_values(3, {(1,): mu((2,)), (2,): mu((1,)), (3,): mu((3,)), (1, 2): mu((1, 2)),
                                        (1, 3): mu((2, 3)), (2, 3): mu((1, 3)), (1, 2, 3): 1})
    assert choquet_classical((70, 70, 30), permuted) == choquet_classical((70, 70, 30), mu)


def test_inverse_mobius_recovers():
    mu = student_capacity()
    back = inverse_mobius(mobius_transform(mu))
    assert back.values == mu.values
    assert back((1, 2)) == 1


def test_indicator_coefficients_give_unanimity():
    a = mask_of([1, 3])
    d = MobiusCoefficients(3, tuple(1 if m == a else 0 for m in range(8)))
    mu = inverse_mobius(d, validate=True)
    assert all(mu(m) == (1 if m & a == a else 0) for m in range(8))
    assert mu.values == unanimity_capacity(3, [1, 3]).values
    f = (4, 9, 2.5)
    assert choquet_classical(f, mu) == min(f[0], f[2])


def test_additive_capacity():
    w = (Fraction(1, 5), Fraction(1, 2), Fraction(3, 10))
    mu = additive_capacity(w)
    d = mobius_transform(mu)
    for m in range(8):
        if bin(m).count("1") >= 2:
            assert d(m) == 0
    f = (3, 7, 1)
    assert choquet_classical(f, mu) == sum(wi * fi for wi, fi in zip(w, f))
    assert choquet_via_mobius(f, d) == choquet_classical(f, mu)
    assert classify_modularity(mu) == "additive"


def test_constant_function():
    rng = np.random.default_rng(0)
    mu = random_capacity(5, rng, rational=True)
    assert choquet_classical([Fraction(7)] * 5, mu) == 7
    assert choquet_via_mobius([Fraction(7)] * 5, mobius_transform(mu)) == 7


def test_mobius_matches_brute_force():
    rng = np.random.default_rng(1)
    for n in range(1, 7):
        mu = random_capacity(n, rng, rational=True)
        assert list(mobius_transform(mu).values) == brute_mobius(mu.values, n)
        muf = random_capacity(n, rng)
        assert np.allclose(mobius_transform(muf).values, brute_mobius(muf.values, n), atol=1e-12)


def test_rank_equals_mobius_random():
    rng = np.random.default_rng(2)
    for _ in range(300):
        n = int(rng.integers(1, 7))
        mu = random_capacity(n, rng)
        f = rng.normal(size=n).tolist()
        a = choquet_classical(f, mu)
        assert abs(a - choquet_via_mobius(f, mobius_transform(mu))) < 1e-12
        assert abs(a - brute_choquet(f, mu)) < 1e-12
        assert min(f) - 1e-12 <= a <= max(f) + 1e-12


def test_mixture_law_exact():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(1, 6))
        m1, m2 = random_capacity(n, rng, rational=True), random_capacity(n, rng, rational=True)
        p = Fraction(int(rng.integers(0, 101)), 100)
        f = [Fraction(int(x), 7) for x in rng.integers(-50, 50, n)]
        mix = m1.mix(m2, p)
        mix.validate()
        assert choquet_classical(f, mix) == p * choquet_classical(f, m1) + (1 - p) * choquet_classical(f, m2)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**32 - 1), st.floats(0, 5), st.floats(0, 5))
def test_comonotonic_additivity(n, seed, a, b):
    rng = np.random.default_rng(seed)
    mu = random_capacity(n, rng)
    f = rng.normal(size=n)
    # g shares the ordering of f: an increasing transform plus a constant
    g = np.exp(f) + rng.normal()
    assert comonotonic_functions(f, g)
    lhs = choquet_classical(a * f + b * g, mu)
    rhs = a * choquet_classical(f, mu) + b * choquet_classical(g, mu)
    assert abs(lhs - rhs) < 1e-9 * (1 + abs(rhs))


def test_comonotonic_examples():
    A, B, D = STUDENT_MARKS["A"], STUDENT_MARKS["B"], STUDENT_MARKS["D"]
    assert comonotonic_functions(A, D)
    assert not comonotonic_functions(A, B)
    assert comonotonic_functions(B, [5, 5, 5])
    with pytest.raises(CapacityError):
        comonotonic_functions([1, 2], [1, 2, 3])


def test_capacity_validation():
    with pytest.raises(CapacityError, match="monotone"):
        Capacity.from_values(3, {(1,): 0.7, (1, 2): 0.5, (1, 2, 3): 1})
    with pytest.raises(CapacityError, match="Omega"):
        Capacity.from_values(2, [0, 0.1, 0.2, 0.9])
    with pytest.raises(CapacityError):
        Capacity.from_values(21, [])
    with pytest.raises(CapacityError):
        Capacity.from_values(2, [0, 1, 1])


def test_modularity():
    mu = student_capacity()
    assert modularity_defect(mu, (1,), (2,)) == Fraction(2, 5)
    assert modularity_defect(mu, (1,), (3,)) == Fraction(-1, 10)
    assert classify_modularity(mu) == "neither"
    assert classify_modularity(unanimity_capacity(3, [1, 2, 3])) == "supermodular"


def test_random_capacity_valid():
    rng = np.random.default_rng(4)
    for n in (1, 4, 8):
        mu = random_capacity(n, rng)
        mu.validate()
        assert mu.monotonicity_violation() is None
