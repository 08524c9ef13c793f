import itertools
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from lilrand.dist import (
    DP,
    ENUMERATE_SUBSETS,
    band_maps,
    consecutive_conditional,
    counter_distribution_exact,
    counter_distribution_model,
    counter_distribution_paper,
    counter_zero_probability,
    event_probability,
    heaviside,
    nonconsecutive_conditional_zero,
    pearson_projector,
    walk_pmf,
)
from lilrand.errors import CapacityError, DomainError
from lilrand.logprob import EXACT

mpmath.mp.dps = 40


def phi_mp(n):
    return mpmath.sqrt(2 * n * mpmath.log(mpmath.log(n)))


def pmf_by_enumeration(n):
    """Law of s_n from all 2**n step sequences."""
    law = {}
    for steps in itertools.product((-1, 1), repeat=n):
        k = sum(steps)
        law[k] = law.get(k, 0) + 1
    return {k: Fraction(c, 2**n) for k, c in law.items()}


def pmf_exact(n, k):
    if abs(k) > n or (n + k) % 2:
        return Fraction(0)
    return Fraction(math.comb(n, (n + k) // 2), 2**n)


def heaviside_mp(x):
    return 1 if x >= 0 else 0


def event_oracle(n, eps):
    lo, hi = phi_mp(n) * (1 - mpmath.mpf(eps)), phi_mp(n) * (1 + mpmath.mpf(eps))
    return sum((pmf_exact(n, k) for k in range(-n, n + 1)
                if heaviside_mp(k - lo) and heaviside_mp(hi - k)), Fraction(0))


def consecutive_oracle(n, eps):
    eps = mpmath.mpf(eps)
    step = phi_mp(n) - phi_mp(n - 1)
    f, g = step * (1 - eps), step * (1 + eps)
    total = Fraction(0)
    for k in range(-(n - 1), n):
        p = pmf_exact(n - 1, k)
        total += Fraction(1, 2) * heaviside_mp(k - phi_mp(n - 1) * (1 - eps) - f - 1) * p
        total += Fraction(1, 2) * heaviside_mp(phi_mp(n - 1) * (1 + eps) - k + g - 1) * p
    return total


def zero_case_oracle(n, eps):
    eps = mpmath.mpf(eps)
    step = phi_mp(n) - phi_mp(n - 1)
    f, g = step * (1 - eps), step * (1 + eps)
    total = Fraction(0)
    for k in range(-(n - 1), n):
        p = pmf_exact(n - 1, k)
        a = k - phi_mp(n - 1) * (1 + eps) - g - 1
        b = phi_mp(n - 1) * (1 - eps) - k + f - 1
        total += Fraction(1, 2) * heaviside_mp(a) * (a != 0) * p
        total += Fraction(1, 2) * heaviside_mp(b) * (b != 0) * p
    return total


def test_heaviside():
    assert heaviside(0) == 1
    assert heaviside(2.5) == 1
    assert heaviside(-0.5) == 0
    assert heaviside(float("nan")) == 0
    assert heaviside(complex(0, 1)) == 0
    assert heaviside(None) == 0


@pytest.mark.parametrize("n", [1, 2, 3, 6, 9])
def test_walk_pmf_against_enumeration(n):
    law = pmf_by_enumeration(n)
    for k in range(-n - 1, n + 2):
        assert walk_pmf(n, k, EXACT).exact == law.get(k, 0)
        assert walk_pmf(n, k).value == pytest.approx(float(law.get(k, 0)), rel=1e-13)


def test_walk_pmf_examples():
    assert walk_pmf(2, 0, EXACT).exact == Fraction(1, 2)
    assert walk_pmf(3, 1, EXACT).exact == Fraction(3, 8)
    assert walk_pmf(2, 1).is_zero()


@pytest.mark.parametrize("n", [10, 100, 1000, 10_000])
def test_walk_pmf_normalizes_in_log_mode(n):
    total = math.fsum(walk_pmf(n, k).value for k in range(-n, n + 1))
    assert abs(total - 1) <= 1e-9


def test_walk_pmf_normalizes_exactly():
    for n in (1, 50, 200):
        assert sum(walk_pmf(n, k, EXACT).exact for k in range(-n, n + 1)) == 1


def test_walk_pmf_symmetry():
    for n in range(1, 101):
        for k in range(0, n + 1):
            assert walk_pmf(n, k).log_value == walk_pmf(n, -k).log_value


def test_walk_pmf_deep_tail_does_not_underflow():
    p = walk_pmf(10_000, 10_000)
    assert p.log10 == pytest.approx(-10_000 * math.log10(2), rel=1e-12)


def test_event_probability_examples():
    assert event_probability(1, 0.1).is_zero()
    assert event_probability(2, 0.1).is_zero()
    assert event_probability(3, 0.1, EXACT).exact == 0
    assert event_probability(3, 0.5, EXACT).exact == Fraction(3, 8)


@pytest.mark.parametrize("n", [3, 4, 5, 8, 13, 30, 64])
@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_event_probability_against_oracle(n, eps):
    assert event_probability(n, eps, EXACT).exact == event_oracle(n, eps)


@given(st.integers(3, 300), st.floats(0.01, 2.0), st.floats(0.0, 1.0))
def test_event_probability_bounded_and_monotone(n, eps, extra):
    a, b = event_probability(n, eps), event_probability(n, eps + extra)
    assert a.value <= 1
    assert a.value <= b.value * (1 + 1e-12)


def test_band_maps_examples():
    maps = band_maps(4, 0.1)
    assert maps.f == pytest.approx(0.77877918014785836, rel=1e-13)
    assert maps.g == pytest.approx(0.95184122018071582, rel=1e-13)
    with pytest.raises(DomainError):
        band_maps(3, 0.1)


@given(st.integers(4, 10_000), st.floats(0.001, 0.1))
def test_band_maps_bounds(n, eps):
    maps = band_maps(n, eps)
    assert 0 < maps.f < maps.g < 1


@pytest.mark.parametrize("n", [4, 5, 6, 10, 25, 60])
@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_consecutive_conditional_against_oracle(n, eps):
    expected = consecutive_oracle(n, eps)
    assert consecutive_conditional(n, eps, EXACT).exact == expected
    got = consecutive_conditional(n, eps).value
    assert got == pytest.approx(float(expected), rel=1e-12, abs=1e-300)
    assert 0 <= got <= 1


@pytest.mark.parametrize("n", [4, 5, 6, 10, 25, 60, 100])
@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_zero_case_conditional_against_oracle(n, eps):
    expected = zero_case_oracle(n, eps)
    assert nonconsecutive_conditional_zero(n, eps, EXACT).exact == expected
    assert nonconsecutive_conditional_zero(n, eps).value == pytest.approx(
        float(expected), rel=1e-12)


def test_zero_case_conditional_in_open_unit_interval():
    assert 0 < nonconsecutive_conditional_zero(100, 0.1).value < 1


def test_conditionals_need_n_at_least_four():
    with pytest.raises(DomainError):
        consecutive_conditional(3, 0.1)
    with pytest.raises(DomainError):
        nonconsecutive_conditional_zero(3, 0.1)


def test_zero_case_strict_inequality(monkeypatch):
    # With phi(n) = 2n and eps = 1/2 every threshold is an exact small integer:
    # phi(3) = 6, f = 1, g = 3.  The lower test 3 - k > 0 vanishes at k = 3,
    # which must contribute nothing; k in {-3, -1, 1} carries 7/8.
    import lilrand.dist as dist

    monkeypatch.setattr(dist, "phi", lambda n: 2.0 * n)
    assert dist.nonconsecutive_conditional_zero(4, 0.5, EXACT).exact == Fraction(7, 16)


def test_counter_zero_probability_examples():
    assert counter_zero_probability(3, 0.1, EXACT).exact == 1
    assert counter_zero_probability(4, 0.1, EXACT).exact == \
        nonconsecutive_conditional_zero(4, 0.1, EXACT).exact
    p = counter_zero_probability(100, 0.1)
    assert -35 <= p.log10 <= -31


def test_counter_zero_probability_log_matches_exact():
    for N in (10, 50, 100, 300):
        exact = counter_zero_probability(N, 0.1, EXACT)
        approx = counter_zero_probability(N, 0.1)
        assert approx.log_value == pytest.approx(exact.log_value, rel=1e-12)


def test_counter_zero_probability_composition():
    N, eps = 30, 0.2
    value = 1 - event_oracle(3, eps)
    for n in range(4, N + 1):
        value *= zero_case_oracle(n, eps)
    assert counter_zero_probability(N, eps, EXACT).exact == value


def test_counter_zero_probability_monotone_in_horizon():
    logs = [counter_zero_probability(N, 0.1).log_value for N in range(3, 200)]
    assert all(b <= a for a, b in zip(logs, logs[1:]))


def test_counter_zero_probability_long_horizon_is_finite():
    p = counter_zero_probability(10_000, 0.1)
    assert math.isfinite(p.log_value)
    assert p.log10 < -3000


def test_subset_sum_singletons():
    expected = sum(event_oracle(n, 0.5) for n in (3, 4, 5))
    for strategy in (DP, ENUMERATE_SUBSETS):
        assert counter_distribution_paper(5, 0.5, 1, strategy, EXACT).exact == expected


def test_subset_sum_against_literal_enumeration():
    N, eps = 9, 0.5
    elem = {n: event_oracle(n, eps) for n in range(3, N + 1)}
    cons = {n: consecutive_oracle(n, eps) for n in range(4, N + 1)}
    for m in range(1, N - 1):
        total = Fraction(0)
        for subset in itertools.combinations(range(3, N + 1), m):
            w = elem[subset[0]]
            for a, b in zip(subset, subset[1:]):
                w *= cons[b] if a == b - 1 else elem[b]
            total += w
        assert counter_distribution_paper(N, eps, m, DP, EXACT).exact == total


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_dp_equals_enumeration(eps):
    for N in range(3, 13):
        for m in range(1, N - 1):
            a = counter_distribution_paper(N, eps, m, DP).value
            b = counter_distribution_paper(N, eps, m, ENUMERATE_SUBSETS).value
            assert abs(a - b) <= 1e-12


def test_subset_sum_edge_cases():
    assert counter_distribution_paper(6, 0.1, 5).is_zero()
    with pytest.raises(ValueError):
        counter_distribution_paper(6, 0.1, 0)
    with pytest.raises(CapacityError):
        counter_distribution_paper(60, 0.1, 10, ENUMERATE_SUBSETS)


def test_model_table_uses_product_at_zero():
    table = counter_distribution_model(12, 0.1, range(0, 4))
    assert table[0] == counter_zero_probability(12, 0.1)
    assert table[2] == counter_distribution_paper(12, 0.1, 2)


def test_exact_distribution_small_cases():
    dist = counter_distribution_exact(3, 0.1)
    assert dist[0].exact == 1
    assert all(dist[m].exact == 0 for m in range(1, 4))
    assert dist.method == "exact-enumeration"


def test_exact_distribution_recount_n10():
    dist = counter_distribution_exact(10, 0.1)
    zero = 0
    for steps in itertools.product((-1, 1), repeat=10):
        s, hit = 0, False
        for n, x in enumerate(steps, start=1):
            s += x
            if n >= 3 and 0.9 <= float(s / phi_mp(n)) <= 1.1:
                hit = True
        zero += not hit
    assert dist[0].exact == Fraction(zero, 1024)
    assert dist.total().exact == 1


@pytest.mark.parametrize("eps", [0.1, 0.5])
def test_exact_distribution_normalizes(eps):
    for N in range(3, 17):
        assert abs(counter_distribution_exact(N, eps).total().value - 1) <= 1e-12


def test_exact_distribution_guard():
    with pytest.raises(CapacityError):
        counter_distribution_exact(21, 0.1)


@pytest.mark.parametrize("n", [4, 16, 64])
@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_log_and_exact_backends_agree(n, eps):
    for k in range(-n, n + 1, 2):
        assert walk_pmf(n, k).value == pytest.approx(float(walk_pmf(n, k, EXACT).exact),
                                                      rel=1e-10)
    exact = float(event_probability(n, eps, EXACT).exact)
    assert event_probability(n, eps).value == pytest.approx(exact, rel=1e-10)


def test_projector_examples():
    np.testing.assert_array_equal(pearson_projector([1, 0]), [[0, 0], [0, 1]])
    np.testing.assert_allclose(pearson_projector([0.5, 0.5]),
                               [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
    with pytest.raises(DomainError):
        pearson_projector([0.5, 0.6])
    with pytest.raises(DomainError):
        pearson_projector([1.5, -0.5])


@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=32).filter(lambda v: sum(v) > 0))
def test_projector_idempotent_symmetric(weights):
    p = np.asarray(weights) / math.fsum(weights)
    p[-1] = 1 - math.fsum(p[:-1].tolist())
    if p[-1] < 0:
        return
    a = pearson_projector(p)
    assert np.abs(a @ a - a).max() <= 1e-12
    assert (a == a.T).all()
