import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from lilrand.errors import DomainError, NoQuantileError
from lilrand.logprob import LogProb
from lilrand.stattest import (
    ACCEPT,
    REJECT,
    BinomialModel,
    FrequencyTable,
    chi2_binomial_cumulative,
    chi2_density,
    chi2_quantile,
    chi2_stat_binomial,
    chi2_stat_multinomial,
    decide,
    log_chi2_stat_binomial,
    multinomial_joint_logmass,
    pearson_applicability,
)

rational_p = st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(999, 1000),
                          max_denominator=1000)


def brute_law(n, p):
    """(statistic, mass) for every count, in exact rationals."""
    return [((f - n * p) ** 2 / (n * p * (1 - p)), math.comb(n, f) * p**f * (1 - p) ** (n - f))
            for f in range(n + 1)]


def brute_quantile(alpha, n, p):
    law = brute_law(n, p)
    for f in range(n + 1):
        if sum(m for s, m in law if s <= f) >= alpha:
            return f
    return None


def test_frequency_table():
    table = FrequencyTable.from_observations([0, 2, 2, 5])
    assert table.counts == {0: 1, 2: 2, 5: 1}
    assert table.n == 4
    with pytest.raises(DomainError):
        FrequencyTable({0: 1}, n=3)


def test_multinomial_statistic_examples():
    half = {0: Fraction(1, 2), 1: Fraction(1, 2)}
    assert chi2_stat_multinomial(FrequencyTable({0: 50, 1: 50}), half) == 0
    assert chi2_stat_multinomial(FrequencyTable({0: 60, 1: 40}), half) == pytest.approx(4)
    p = {0: 0.2, 1: 0.3, 2: 0.5}
    q = {"a": 0.5, "b": 0.2, "c": 0.3}
    assert chi2_stat_multinomial(FrequencyTable({0: 3, 1: 10, 2: 7}), p) == pytest.approx(
        chi2_stat_multinomial(FrequencyTable({"a": 7, "b": 3, "c": 10}), q), rel=1e-14)


def test_multinomial_statistic_support_error():
    with pytest.raises(DomainError):
        chi2_stat_multinomial(FrequencyTable({0: 1, 1: 1}), {0: 1.0, 1: 0.0})


def test_binomial_statistic_examples():
    assert chi2_stat_binomial(BinomialModel(Fraction(1, 2), 100, 50)) == 0
    assert chi2_stat_binomial(BinomialModel(Fraction(1, 2), 100, 60)) == pytest.approx(4)
    assert chi2_stat_binomial(BinomialModel(LogProb.from_log(-33 * math.log(10)), 100, 44)) >= 1e34
    with pytest.raises(DomainError):
        chi2_stat_binomial(BinomialModel(Fraction(0), 10, 1))
    with pytest.raises(DomainError):
        chi2_stat_binomial(BinomialModel(Fraction(1), 10, 1))


def test_binomial_statistic_survives_tiny_p():
    p = LogProb.from_log(-3000 * math.log(10))
    # (44 - n p)^2 / (n p (1 - p)) ~ 44^2 / 100 * 10**3000
    expected = math.log(44**2 / 100) + 3000 * math.log(10)
    assert log_chi2_stat_binomial(44, 100, p) == pytest.approx(expected, rel=1e-14)
    # f = 0 gives n p / (1 - p), not 0, even when n p underflows a double.
    assert log_chi2_stat_binomial(0, 100, p) == pytest.approx(
        math.log(100) - 3000 * math.log(10), rel=1e-14)


@given(st.integers(1, 200), st.data(), rational_p)
def test_binomial_equals_two_cell_multinomial(n, data, p):
    f = data.draw(st.integers(0, n))
    binom = chi2_stat_binomial(BinomialModel(p, n, f))
    multi = chi2_stat_multinomial(FrequencyTable({0: f, 1: n - f}), {0: p, 1: 1 - p})
    assert binom == pytest.approx(multi, rel=1e-10, abs=1e-300)
    exact = float((f - n * p) ** 2 / (n * p * (1 - p)))
    assert binom == pytest.approx(exact, rel=1e-10, abs=1e-300)


def test_cumulative_limits():
    model = BinomialModel(0.3, 20)
    assert chi2_binomial_cumulative(math.inf, model).value == pytest.approx(1, abs=1e-12)
    assert chi2_binomial_cumulative(-1, model).is_zero()
    # n p = 6.3 is not a count, so every statistic is positive.
    smallest = min(s for s, _ in brute_law(21, Fraction(3, 10)))
    assert smallest > 0
    below = float(smallest) / 2
    assert chi2_binomial_cumulative(below, BinomialModel(Fraction(3, 10), 21)).is_zero()
    assert chi2_binomial_cumulative(below, BinomialModel(0.3, 21)).is_zero()


def test_cumulative_tiny_p_bound():
    p = LogProb.from_log(-33 * math.log(10))
    assert chi2_binomial_cumulative(1, BinomialModel(p, 100)).value >= 1 - 1e-10


@given(st.integers(1, 40), rational_p)
def test_cumulative_matches_brute_force(n, p):
    law = brute_law(n, p)
    model = BinomialModel(p, n)
    for x in range(0, n + 2):
        expected = sum(m for s, m in law if s <= x)
        assert chi2_binomial_cumulative(x, model).exact == expected
        if any(abs(s - x) <= Fraction(1, 10**9) * (1 + x) for s, _ in law):
            continue  # float(p) != p can move a tie either way
        assert chi2_binomial_cumulative(x, BinomialModel(float(p), n)).value == pytest.approx(
            float(expected), rel=1e-9, abs=1e-300)


@given(st.integers(1, 40), rational_p, st.lists(st.floats(0, 60), min_size=2, max_size=6))
def test_cumulative_monotone(n, p, xs):
    model = BinomialModel(p, n)
    values = [chi2_binomial_cumulative(x, model).exact for x in sorted(xs)]
    assert values == sorted(values)


def test_cumulative_right_continuous_at_statistic_values():
    p = Fraction(1, 2)
    model = BinomialModel(p, 4)
    # Statistic values for n = 4, p = 1/2 are 0, 1 and 4.
    assert chi2_binomial_cumulative(1, model).exact == Fraction(14, 16)
    assert chi2_binomial_cumulative(Fraction(99, 100), model).exact == Fraction(6, 16)


def test_quantile_three_point_law():
    # n = 2, p = 1/2: statistic 0 at f = 1 (mass 1/2) and 2 at f = 0, 2.
    model = BinomialModel(Fraction(1, 2), 2)
    assert chi2_quantile(0.5, model) == 0
    assert chi2_quantile(0.6, model) == 2


def test_quantile_for_tiny_p():
    p = LogProb.from_log(-33 * math.log(10))
    assert chi2_quantile(1 - 1e-10, BinomialModel(p, 100)) == 1


@given(st.integers(1, 50), rational_p, st.floats(0.001, 0.999))
def test_quantile_against_brute_scan(n, p, alpha):
    model = BinomialModel(p, n)
    expected = brute_quantile(Fraction(alpha), n, p)
    if expected is None:
        # Every statistic above n can exceed every candidate f.
        with pytest.raises(NoQuantileError):
            chi2_quantile(alpha, model)
        return
    q = chi2_quantile(alpha, model)
    assert q == expected
    assert chi2_binomial_cumulative(q, model).exact >= Fraction(alpha)
    if q > 0:
        assert chi2_binomial_cumulative(q - 1, model).exact < Fraction(alpha)


def test_quantile_can_be_missing():
    # n = 1, p = 1/1000: f = 1 has statistic 999 > 1, so cumulative(1) = 0.999.
    with pytest.raises(NoQuantileError):
        chi2_quantile(0.9995, BinomialModel(Fraction(1, 1000), 1))


def test_quantile_alpha_range():
    with pytest.raises(ValueError):
        chi2_quantile(1.0, BinomialModel(0.5, 10))


def test_decide():
    assert decide(0.5, 1, 0.9).verdict == ACCEPT
    assert decide(1e34, 1, 1 - 1e-10).verdict == REJECT
    assert decide(1, 1, 0.9).verdict == ACCEPT
    assert decide(math.nextafter(1, 2), 1, 0.9).verdict == REJECT
    assert decide(math.inf, 1, 0.9).verdict == REJECT


def test_applicability():
    assert pearson_applicability(100, {0: 0.5, 1: 0.5}).applicable
    tiny = pearson_applicability(100, {0: LogProb.from_log(-76.0), 1: 1.0})
    assert not tiny.applicable and tiny.violating == [0]
    mixed = pearson_applicability(20, {1: 0.5, 2: 0.4, 3: 0.1})
    # n p = (10, 8, 2): both of the last two cells fall short of 10.
    assert not mixed.applicable and mixed.violating == [2, 3]


def test_density_examples():
    assert chi2_density(2, 1e-12) == pytest.approx(0.5, rel=1e-10)
    assert chi2_density(3, -1) == 0
    assert chi2_density(3, 0) == 0


@pytest.mark.parametrize("k", range(1, 11))
def test_density_integrates_to_one(k):
    total, _ = integrate.quad(lambda x: chi2_density(k, x), 0, math.inf, limit=200)
    assert abs(total - 1) <= 1e-8


def test_joint_mass_examples():
    assert multinomial_joint_logmass(FrequencyTable({0: 1, 1: 1}),
                                     {0: Fraction(1, 2), 1: Fraction(1, 2)}).exact == Fraction(1, 2)
    assert multinomial_joint_logmass(FrequencyTable({0: 3, 1: 0}),
                                     {0: Fraction(1), 1: Fraction(0)}).exact == 1


def test_joint_mass_normalizes():
    p = {0: Fraction(1, 5), 1: Fraction(1, 3), 2: Fraction(7, 15)}
    total_exact = Fraction(0)
    total_float = 0.0
    for f in itertools.product(range(5), repeat=3):
        if sum(f) != 4:
            continue
        table = FrequencyTable(dict(enumerate(f)))
        total_exact += multinomial_joint_logmass(table, p).exact
        total_float += multinomial_joint_logmass(table, {m: float(v) for m, v in p.items()}).value
    assert total_exact == 1
    assert total_float == pytest.approx(1, abs=1e-12)


def test_joint_mass_total_guard():
    with pytest.raises(DomainError):
        FrequencyTable({0: 1, 1: 2}, n=4)
