"""Probability of the band events of a fair +-1 walk and of the band counter.

Every public function takes ``mode="log"`` (log-space doubles) or
``mode="exact"`` (rationals).  The band thresholds themselves are always
doubles, ``phi`` being irrational, so both modes select the same walk
positions and differ only in how the selected binomial masses are summed.

Threshold arguments are evaluated left to right exactly as written in the
formulas (``((k - a) - f) - 1`` and so on), so ties at a threshold resolve the
same way as a machine-precision evaluation of the same expressions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Real
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import CapacityError, DomainError
from .logprob import EXACT, LOG, LogProb, LogValue, check_mode, logsumexp
from .walk import phi, phi_table

ENUMERATE_SUBSETS = "enumerate-subsets"
DP = "dp"
STRATEGIES = (ENUMERATE_SUBSETS, DP)

METHOD_PAPER = "paper-formula"
METHOD_EXACT = "exact-enumeration"
METHOD_DP = "dp-accelerated"

MAX_SUBSETS = 10**6
DP_MAX_HORIZON = 20_000
EXACT_PATH_MAX_HORIZON = 20
# Exact products over n = 4..N carry ~N**2/2-bit denominators.
EXACT_PRODUCT_MAX_HORIZON = 2_000

_LOG2 = math.log(2.0)
_HALF = Fraction(1, 2)


def heaviside(x) -> int:
    """1 for a real x >= 0, else 0.  Non-real input (complex, NaN, None) gives 0."""
    if x is None or isinstance(x, complex):
        return 0
    if not isinstance(x, Real):
        try:
            x = float(x)
        except (TypeError, ValueError):
            return 0
    if math.isnan(x):
        return 0
    return 1 if x >= 0 else 0


@dataclass(frozen=True)
class _PmfRow:
    """P(s_n = k) for the parity-compatible k = -n, -n+2, ..., n."""

    n: int
    ks: np.ndarray
    log_pmf: np.ndarray

    @property
    def combs(self) -> List[int]:
        return _comb_row(self.n)


@lru_cache(maxsize=64)
def _pmf_row(n: int) -> _PmfRow:
    ks = np.arange(-n, n + 1, 2, dtype=np.int64)
    j = np.arange(n + 1, dtype=float)
    log_pmf = gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0) - n * _LOG2
    # Mirror the lower half so P(s_n = k) == P(s_n = -k) bit for bit.
    log_pmf = np.where(j <= n - j, log_pmf, log_pmf[::-1])
    ks.flags.writeable = False
    log_pmf.flags.writeable = False
    return _PmfRow(n, ks, log_pmf)


@lru_cache(maxsize=64)
def _comb_row(n: int) -> List[int]:
    row = [1] * (n + 1)
    for j in range(1, n + 1):
        row[j] = row[j - 1] * (n - j + 1) // j
    return row


def _masked_mass(n: int, mask: np.ndarray, mode: str) -> LogProb:
    """P(s_n in {k : mask}) for a mask aligned with _pmf_row(n).ks."""
    row = _pmf_row(n)
    if mode == EXACT:
        combs = row.combs
        total = sum(combs[j] for j in np.flatnonzero(mask).tolist())
        return LogProb.from_fraction(Fraction(total, 1 << n))
    selected = row.log_pmf[mask]
    if selected.size == 0:
        return LogProb.zero()
    # Terms below e**-60 of the largest cannot move a double-precision sum.
    selected = selected[selected > selected.max() - 60.0]
    return LogProb(logsumexp(selected))


def _average(a: LogProb, b: LogProb, mode: str) -> LogProb:
    if mode == EXACT:
        return LogProb.from_fraction((a.exact + b.exact) * _HALF)
    return LogProb(float(np.logaddexp(a.log_value, b.log_value)) - _LOG2)


def walk_pmf(n: int, k: int, mode: str = LOG) -> LogProb:
    """P(s_n = k) = C(n, (n+k)/2) / 2**n when n + k is even, else 0."""
    check_mode(mode)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if abs(k) > n or (n + k) % 2:
        return LogProb.zero(mode)
    j = (n + k) // 2
    if mode == EXACT:
        return LogProb.from_fraction(Fraction(math.comb(n, j), 1 << n))
    return LogProb(float(_pmf_row(n).log_pmf[j]))


def event_probability(n: int, epsilon: float, mode: str = LOG) -> LogProb:
    """P(s_n / phi(n) in [1 - eps, 1 + eps]); 0 for n in {1, 2}."""
    check_mode(mode)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n <= 2:
        return LogProb.zero(mode)
    ph = phi(n)
    lower = ph * (1 - epsilon)
    upper = ph * (1 + epsilon)
    ks = _pmf_row(n).ks
    mask = ((ks - lower) >= 0) & ((upper - ks) >= 0)
    return _masked_mass(n, mask, mode)


@dataclass(frozen=True)
class BandMaps:
    f: float
    g: float


def band_maps(n: int, epsilon: float) -> BandMaps:
    """Band edges' per-step drift: (phi(n) - phi(n-1)) * (1 -+ eps)."""
    if n <= 3:
        raise DomainError(f"phi(n - 1) is not real for n={n}")
    step = phi(n) - phi(n - 1)
    return BandMaps(step * (1 - epsilon), step * (1 + epsilon))


def consecutive_conditional(n: int, epsilon: float, mode: str = LOG) -> LogProb:
    """P(E_n | E_{n-1}) evaluated against the unconditional law of s_{n-1}."""
    check_mode(mode)
    bands = band_maps(n, epsilon)
    lower = phi(n - 1) * (1 - epsilon)
    upper = phi(n - 1) * (1 + epsilon)
    ks = _pmf_row(n - 1).ks
    down = (((ks - lower) - bands.f) - 1) >= 0
    up = (((upper - ks) + bands.g) - 1) >= 0
    return _average(_masked_mass(n - 1, down, mode),
                    _masked_mass(n - 1, up, mode), mode)


def nonconsecutive_conditional_zero(n: int, epsilon: float, mode: str = LOG) -> LogProb:
    """P(not E_n | not E_{n-1}); both threshold tests are strict."""
    check_mode(mode)
    bands = band_maps(n, epsilon)
    lower = phi(n - 1) * (1 - epsilon)
    upper = phi(n - 1) * (1 + epsilon)
    ks = _pmf_row(n - 1).ks
    # theta(x) * (1 - delta(x, 0)) is the strict test x > 0.
    above = (((ks - upper) - bands.g) - 1) > 0
    below = (((lower - ks) + bands.f) - 1) > 0
    return _average(_masked_mass(n - 1, above, mode),
                    _masked_mass(n - 1, below, mode), mode)


def counter_zero_probability(N: int, epsilon: float, mode: str = LOG) -> LogProb:
    """P(c_{N,eps} = 0) as (1 - P(E_3)) times the chain of zero-case conditionals."""
    check_mode(mode)
    if N < 3:
        raise ValueError(f"N must be >= 3, got {N}")
    if mode == EXACT and N > EXACT_PRODUCT_MAX_HORIZON:
        raise CapacityError(
            f"exact product over {N} factors exceeds the horizon guard "
            f"{EXACT_PRODUCT_MAX_HORIZON}; use log mode")
    first = event_probability(3, epsilon, mode).complement()
    if mode == EXACT:
        value = first.exact
        for n in range(4, N + 1):
            value *= nonconsecutive_conditional_zero(n, epsilon, EXACT).exact
            if value == 0:
                break
        return LogProb.from_fraction(value)
    logs = [first.log_value]
    logs.extend(nonconsecutive_conditional_zero(n, epsilon).log_value
                for n in range(4, N + 1))
    if any(v == -math.inf for v in logs):
        return LogProb.zero()
    return LogProb(math.fsum(logs))


@dataclass
class CounterDistribution:
    horizon: int
    epsilon: float
    values: Dict[int, LogValue]
    method: str
    mode: str = LOG

    def total(self) -> LogValue:
        items = list(self.values.values())
        if self.mode == EXACT:
            return LogValue.from_fraction(sum((v.exact for v in items), Fraction(0)))
        return LogValue(logsumexp([v.log_value for v in items]))

    def __getitem__(self, m: int) -> LogValue:
        return self.values[m]


@dataclass
class _ChainTerms:
    """Per-index factors of the subset sum: P(E_n) and P(E_n | E_{n-1})."""

    N: int
    epsilon: float
    mode: str
    elementary: Dict[int, LogProb] = field(default_factory=dict)
    consecutive: Dict[int, LogProb] = field(default_factory=dict)

    @classmethod
    def build(cls, N: int, epsilon: float, mode: str) -> "_ChainTerms":
        terms = cls(N, epsilon, mode)
        for n in range(3, N + 1):
            terms.elementary[n] = event_probability(n, epsilon, mode)
            if n >= 4:
                terms.consecutive[n] = consecutive_conditional(n, epsilon, mode)
        return terms


@lru_cache(maxsize=32)
def _chain_terms(N: int, epsilon: float, mode: str) -> _ChainTerms:
    return _ChainTerms.build(N, epsilon, mode)


def _subset_weight(subset: Sequence[int], terms: _ChainTerms):
    """Weight of one increasing index tuple, in the mode of ``terms``."""
    exact = terms.mode == EXACT
    acc = terms.elementary[subset[0]].exact if exact else terms.elementary[subset[0]].log_value
    for prev, cur in zip(subset, subset[1:]):
        factor = terms.consecutive[cur] if prev == cur - 1 else terms.elementary[cur]
        if exact:
            acc *= factor.exact
        else:
            acc += factor.log_value
    return acc


def _paper_enumerate(N: int, epsilon: float, m: int, mode: str) -> LogValue:
    count = math.comb(N - 2, m)
    if count > MAX_SUBSETS:
        raise CapacityError(
            f"C({N - 2}, {m}) = {count} subsets exceeds the guard {MAX_SUBSETS}; "
            f"use strategy='dp'")
    terms = _chain_terms(N, epsilon, mode)
    weights = [_subset_weight(s, terms)
               for s in itertools.combinations(range(3, N + 1), m)]
    if mode == EXACT:
        return LogValue.from_fraction(sum(weights, Fraction(0)))
    return LogValue(logsumexp(weights))


@lru_cache(maxsize=16)
def _paper_dp_all(N: int, epsilon: float, mode: str) -> tuple:
    """Subset sums for every m = 0..N-2 at once.

    Indices 3..N are scanned in order keeping, for each count j, the total
    weight of partial subsets whose last scanned index is (flag 1) or is not
    (flag 0) selected; a selected index costs P(E_t | E_{t-1}) after a
    selected neighbour and P(E_t) otherwise.
    """
    terms = _chain_terms(N, epsilon, mode)
    size = N - 1  # counts 0..N-2
    if mode == EXACT:
        off = [Fraction(0)] * size
        on = [Fraction(0)] * size
        off[0] = Fraction(1)
        for t in range(3, N + 1):
            ev = terms.elementary[t].exact
            cons = terms.consecutive[t].exact if t >= 4 else Fraction(0)
            new_on = [Fraction(0)] + [off[j] * ev + on[j] * cons
                                      for j in range(size - 1)]
            off = [a + b for a, b in zip(off, on)]
            on = new_on
        return tuple(a + b for a, b in zip(off, on))

    off = np.full(size, -np.inf)
    on = np.full(size, -np.inf)
    off[0] = 0.0
    with np.errstate(invalid="ignore"):
        for t in range(3, N + 1):
            ev = terms.elementary[t].log_value
            cons = terms.consecutive[t].log_value if t >= 4 else -np.inf
            new_on = np.full(size, -np.inf)
            new_on[1:] = np.logaddexp(off[:-1] + ev, on[:-1] + cons)
            off = np.logaddexp(off, on)
            on = new_on
    return tuple(np.logaddexp(off, on).tolist())


def counter_distribution_paper(N: int, epsilon: float, m: int,
                               strategy: str = DP, mode: str = LOG) -> LogValue:
    """The subset-sum expression for P(c_{N,eps} = m), m >= 1.

    The sum runs over increasing m-subsets of {3..N}; its terms are joint
    event probabilities, so the result is not guaranteed to be <= 1 and is
    returned as a :class:`LogValue`.
    """
    check_mode(mode)
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if m < 1:
        raise ValueError("m must be >= 1; use counter_zero_probability for m = 0")
    if N < 3 or m > N - 2:
        return LogValue.zero(mode)
    if strategy == ENUMERATE_SUBSETS:
        return _paper_enumerate(N, epsilon, m, mode)
    if N > DP_MAX_HORIZON:
        raise CapacityError(f"N={N} exceeds the dp horizon guard {DP_MAX_HORIZON}")
    if mode == EXACT and N > EXACT_PRODUCT_MAX_HORIZON:
        raise CapacityError(
            f"exact dp over N={N} exceeds the horizon guard {EXACT_PRODUCT_MAX_HORIZON}")
    value = _paper_dp_all(N, epsilon, mode)[m]
    if mode == EXACT:
        return LogValue.from_fraction(value)
    return LogValue(value)


def counter_distribution_model(N: int, epsilon: float,
                               m_values: Optional[Iterable[int]] = None,
                               strategy: str = DP, mode: str = LOG
                               ) -> CounterDistribution:
    """Table of the model values: product formula at m = 0, subset sum above."""
    if m_values is None:
        m_values = range(0, N + 1)
    values: Dict[int, LogValue] = {}
    for m in m_values:
        if m == 0:
            values[0] = counter_zero_probability(N, epsilon, mode)
        else:
            values[m] = counter_distribution_paper(N, epsilon, m, strategy, mode)
    method = METHOD_DP if strategy == DP else METHOD_PAPER
    return CounterDistribution(N, epsilon, values, method, mode)


@lru_cache(maxsize=64)
def _band_hits(N: int, epsilon: float, start_index: int) -> np.ndarray:
    """hits[n, s + N] is True when s / phi(n) lies in the closed band."""
    table = phi_table(N)
    hits = np.zeros((N + 1, 2 * N + 1), dtype=bool)
    s = np.arange(-N, N + 1)
    for n in range(start_index, N + 1):
        ratio = s / table[n]
        hits[n] = (ratio >= 1 - epsilon) & (ratio <= 1 + epsilon)
    return hits


def counter_distribution_exact(N: int, epsilon: float, start_index: int = 3,
                               chunk_bits: int = 16) -> CounterDistribution:
    """Law of c_{N,eps} by enumerating all 2**N equally likely sign paths."""
    if N > EXACT_PATH_MAX_HORIZON:
        raise CapacityError(
            f"2**{N} paths exceeds the enumeration guard 2**{EXACT_PATH_MAX_HORIZON}")
    if N < 1:
        raise ValueError("N must be positive")
    if start_index < 3:
        raise DomainError(f"start_index must be >= 3, got {start_index}")
    hits = _band_hits(N, epsilon, start_index)
    tally = np.zeros(N + 1, dtype=np.int64)
    shifts = np.arange(N - 1, -1, -1, dtype=np.int64)
    chunk = 1 << min(N, chunk_bits)
    for base in range(0, 1 << N, chunk):
        codes = np.arange(base, base + chunk, dtype=np.int64)
        steps = 2 * ((codes[:, None] >> shifts) & 1) - 1
        sums = np.cumsum(steps, axis=1)
        counts = np.zeros(chunk, dtype=np.int64)
        for n in range(start_index, N + 1):
            counts += hits[n, sums[:, n - 1] + N]
        tally += np.bincount(counts, minlength=N + 1)
    total = 1 << N
    values = {m: LogProb.from_fraction(Fraction(int(c), total))
              for m, c in enumerate(tally.tolist())}
    return CounterDistribution(N, epsilon, values, METHOD_EXACT, EXACT)


def pearson_projector(p: Sequence[float]) -> np.ndarray:
    """I - sqrt(p) sqrt(p)^T, the projector orthogonal to sqrt(p)."""
    vec = np.asarray(p, dtype=float)
    if vec.ndim != 1 or vec.size == 0:
        raise DomainError("p must be a non-empty vector")
    if (vec < 0).any() or not np.isfinite(vec).all():
        raise DomainError("p has negative or non-finite entries")
    if abs(math.fsum(vec.tolist()) - 1.0) > 1e-12:
        raise DomainError(f"p sums to {math.fsum(vec.tolist())}, not 1")
    root = np.sqrt(vec)
    return np.eye(vec.size) - np.outer(root, root)
