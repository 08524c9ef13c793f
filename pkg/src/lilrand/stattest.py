"""Chi-squared machinery for testing observed counters against a model law.

The model probability of the zero-counter event can be as small as 1e-3000,
so statistics and binomial masses are handled in log space and threshold
comparisons are made between logs rather than between overflowed floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Union

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, NoQuantileError
from .logprob import EXACT, LogProb, LogValue, log1mexp, log_fraction, logsumexp

ACCEPT = "accept"
REJECT = "reject"

ProbLike = Union[LogValue, float, Fraction]


@dataclass
class FrequencyTable:
    counts: Dict[int, int]
    n: int = 0

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("negative count")
        total = sum(self.counts.values())
        if not self.n:
            self.n = total
        elif self.n != total:
            raise DomainError(f"counts sum to {total}, not {self.n}")

    @classmethod
    def from_observations(cls, observations) -> "FrequencyTable":
        counts: Dict[int, int] = {}
        for value in observations:
            counts[value] = counts.get(value, 0) + 1
        return cls(dict(sorted(counts.items())))


@dataclass
class BinomialModel:
    """Two-cell reduction: P(S1) = p against P(S2) = 1 - p over n trials."""

    p: LogProb
    n: int
    f_tilde: int = 0

    def __post_init__(self):
        self.p = LogProb.coerce(self.p)
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.f_tilde <= self.n:
            raise ValueError(f"f_tilde={self.f_tilde} outside 0..{self.n}")

    @property
    def log_q(self) -> float:
        """log(1 - p)."""
        if self.p.exact is not None:
            return log_fraction(1 - self.p.exact)
        return log1mexp(self.p.log_value)

    def degenerate(self) -> bool:
        return self.p.is_zero() or self.log_q == -math.inf


@dataclass
class TestDecision:
    statistic: float
    quantile: float
    alpha: float
    verdict: str
    log10_statistic: Optional[float] = None

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.verdict not in (ACCEPT, REJECT):
            raise ValueError(self.verdict)


@dataclass
class Applicability:
    applicable: bool
    violating: List = field(default_factory=list)


def _log_expected(n: int, p: LogValue) -> float:
    return math.log(n) + p.log_value


def _log_cell_term(f: int, n: int, p: LogValue) -> float:
    """log of (f - n p)**2 / (n p); -inf when f == n p."""
    if p.exact is not None:
        diff = Fraction(f) - n * p.exact
        if diff == 0:
            return -math.inf
        return 2 * log_fraction(abs(diff)) - log_fraction(n * p.exact)
    log_expected = _log_expected(n, p)
    return 2 * _log_abs_diff(f, log_expected) - log_expected


def _log_abs_diff(f: int, log_expected: float) -> float:
    """log|f - exp(log_expected)| without forming a possibly underflowed n p."""
    if f == 0:
        return log_expected
    log_f = math.log(f)
    if log_expected < log_f:
        return log_f + log1mexp(log_expected - log_f)
    if log_expected == log_f:
        return -math.inf
    return log_expected + log1mexp(log_f - log_expected)


def _exp(log_value: float) -> float:
    try:
        return math.exp(log_value)
    except OverflowError:
        return math.inf


def chi2_stat_multinomial(f: FrequencyTable, p: Mapping[int, ProbLike]) -> float:
    """Pearson statistic summed over the support of ``p``."""
    model = {m: LogValue.coerce(v) for m, v in p.items()}
    for m, count in f.counts.items():
        if count > 0 and (m not in model or model[m].is_zero()):
            raise DomainError(f"observed cell {m} has zero model probability")
    logs = [_log_cell_term(f.counts.get(m, 0), f.n, pm)
            for m, pm in model.items() if not pm.is_zero()]
    return _exp(logsumexp(logs))


def log_chi2_stat_binomial(f_tilde: int, n: int, p: ProbLike) -> float:
    """Natural log of (f - n p)**2 / (n p (1 - p)); -inf when f == n p."""
    p = LogProb.coerce(p)
    model = BinomialModel(p, n)
    if model.degenerate():
        raise DomainError("binomial statistic needs 0 < p < 1")
    if p.exact is not None:
        diff = Fraction(f_tilde) - n * p.exact
        if diff == 0:
            return -math.inf
        return 2 * log_fraction(abs(diff)) - log_fraction(n * p.exact * (1 - p.exact))
    log_expected = _log_expected(n, p)
    return 2 * _log_abs_diff(f_tilde, log_expected) - log_expected - model.log_q


def chi2_stat_binomial(model: BinomialModel) -> float:
    """(f - n p)**2 / (n p (1 - p)); may be ``inf`` when it exceeds a double."""
    return _exp(log_chi2_stat_binomial(model.f_tilde, model.n, model.p))


@dataclass(frozen=True)
class _BinomialLaw:
    log_stats: np.ndarray
    log_masses: np.ndarray
    # Exact statistics when p is rational, so ties with x are decided exactly.
    exact_stats: Optional[List[Fraction]] = None
    exact_masses: Optional[List[Fraction]] = None


def _binomial_law(model: BinomialModel) -> _BinomialLaw:
    if model.degenerate():
        raise DomainError("binomial law needs 0 < p < 1")
    n = model.n
    f = np.arange(n + 1, dtype=float)
    log_comb = gammaln(n + 1.0) - gammaln(f + 1.0) - gammaln(n - f + 1.0)
    log_masses = log_comb + f * model.p.log_value + (n - f) * model.log_q
    log_stats = np.array([log_chi2_stat_binomial(k, n, model.p) for k in range(n + 1)])
    if model.p.exact is None:
        return _BinomialLaw(log_stats, log_masses)
    p = model.p.exact
    exact_stats = [(k - n * p) ** 2 / (n * p * (1 - p)) for k in range(n + 1)]
    exact_masses = [math.comb(n, k) * p**k * (1 - p) ** (n - k) for k in range(n + 1)]
    return _BinomialLaw(log_stats, log_masses, exact_stats, exact_masses)


def _within(log_stat: float, x: float) -> bool:
    """theta(x - stat), decided on logs so neither side over/underflows."""
    if x < 0:
        return False
    if log_stat == -math.inf:
        return True
    if x == 0:
        return False
    if x == math.inf:
        return True
    return log_stat <= math.log(x)


def _cumulative(law: _BinomialLaw, x: float) -> LogProb:
    if law.exact_stats is not None:
        if x < 0:
            return LogProb.zero(EXACT)
        if x == math.inf:
            return LogProb.from_fraction(sum(law.exact_masses, Fraction(0)))
        bound = Fraction(x)
        return LogProb.from_fraction(sum(
            (m for s, m in zip(law.exact_stats, law.exact_masses) if s <= bound),
            Fraction(0)))
    mask = np.array([_within(s, x) for s in law.log_stats.tolist()])
    return LogProb(logsumexp(law.log_masses[mask]))


def chi2_binomial_cumulative(x: float, model: BinomialModel) -> LogProb:
    """P(chi2 <= x) over the n + 1 possible counts of the two-cell reduction."""
    return _cumulative(_binomial_law(model), x)


def chi2_quantile(alpha: float, model: BinomialModel) -> int:
    """Smallest integer f in 0..n with P(chi2 <= f) >= alpha."""
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    law = _binomial_law(model)
    for f in range(model.n + 1):
        cum = _cumulative(law, f)
        reached = cum.exact >= Fraction(alpha) if cum.exact is not None else cum.value >= alpha
        if reached:
            return f
    raise NoQuantileError(f"no f in 0..{model.n} reaches cumulative {alpha}")


def decide(statistic: float, quantile: float, alpha: float,
           log10_statistic: Optional[float] = None) -> TestDecision:
    verdict = ACCEPT if statistic <= quantile else REJECT
    return TestDecision(statistic, quantile, alpha, verdict, log10_statistic)


def pearson_applicability(n: int, p: Mapping[int, ProbLike],
                          threshold: float = 10.0) -> Applicability:
    """Rule of thumb: every cell in the support needs n * p_m >= threshold."""
    violating = []
    for m, value in p.items():
        value = LogValue.coerce(value)
        if value.is_zero():
            continue
        if value.exact is not None:
            ok = n * value.exact >= Fraction(threshold)
        else:
            ok = math.log(n) + value.log_value >= math.log(threshold)
        if not ok:
            violating.append(m)
    return Applicability(not violating, violating)


def chi2_density(k: int, x: float) -> float:
    """Density of the chi-squared law with k degrees of freedom."""
    if k < 1:
        raise ValueError("k must be positive")
    if x <= 0:
        return 0.0
    log_density = ((k / 2 - 1) * math.log(x) - x / 2
                   - (k / 2) * math.log(2.0) - math.lgamma(k / 2))
    return math.exp(log_density)


def multinomial_joint_logmass(f: FrequencyTable, p: Mapping[int, ProbLike]) -> LogProb:
    """log of n! / prod f_m! * prod p_m**f_m."""
    total = sum(f.counts.values())
    if total != f.n:
        raise DomainError(f"counts sum to {total}, not {f.n}")
    model = {m: LogValue.coerce(v) for m, v in p.items()}
    log_mass = math.lgamma(f.n + 1)
    exact = Fraction(math.factorial(f.n)) if all(
        v.exact is not None for v in model.values()) else None
    for m, count in f.counts.items():
        if count == 0:
            continue
        pm = model.get(m)
        if pm is None or pm.is_zero():
            return LogProb.zero("exact" if exact is not None else "log")
        log_mass += count * pm.log_value - math.lgamma(count + 1)
        if exact is not None:
            exact *= pm.exact ** count / math.factorial(count)
    if exact is not None:
        return LogProb.from_fraction(exact)
    return LogProb(min(log_mass, 0.0))
