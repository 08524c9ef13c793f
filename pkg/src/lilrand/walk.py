"""Observable statistics of a +-1 sequence: the walk, its iterated-logarithm
ratio, the band counter, the running mean and block-frequency deviations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Union

import numpy as np

from .bitio import BitString, SignSequence
from .errors import DomainError

DEFAULT_START_INDEX = 3


@dataclass(frozen=True)
class WalkTrace:
    partial_sums: np.ndarray

    @property
    def length(self) -> int:
        return int(self.partial_sums.size)

    def __getitem__(self, n: int) -> int:
        """s_n for 1-based ``n``."""
        if not 1 <= n <= self.length:
            raise IndexError(n)
        return int(self.partial_sums[n - 1])


@dataclass(frozen=True)
class CounterResult:
    counter: int
    epsilon: float
    start_index: int
    horizon: int
    hit_indices: List[int]


def walk_sums(x: SignSequence) -> WalkTrace:
    if len(x) < 1:
        raise ValueError("empty sequence")
    sums = np.cumsum(x.signs, dtype=np.int64)
    sums.flags.writeable = False
    return WalkTrace(sums)


def phi(n: int) -> float:
    """sqrt(2 n ln ln n); only real for n >= 3."""
    if n <= 2:
        raise DomainError(f"sqrt(2 n log log n) is not real for n={n}")
    return math.sqrt(2 * n * math.log(math.log(n)))


@lru_cache(maxsize=8)
def _phi_table(upto: int) -> np.ndarray:
    # Index n holds phi(n); entries 0..2 are NaN.  math.log keeps each value
    # identical to phi() rather than to numpy's vectorised log.
    table = np.full(upto + 1, np.nan)
    table[3:] = [phi(n) for n in range(3, upto + 1)]
    table.flags.writeable = False
    return table


def phi_table(upto: int) -> np.ndarray:
    # Round the cache key up so nearby horizons share one table.
    size = max(16, 1 << max(upto, 1).bit_length())
    return _phi_table(size)[: upto + 1]


def lil_ratio(trace: WalkTrace, n: int) -> float:
    if n < 3:
        raise DomainError(f"ratio undefined for n={n}")
    return trace[n] / phi(n)


def lil_ratios(trace: WalkTrace, start_index: int = DEFAULT_START_INDEX) -> np.ndarray:
    """Ratios s_n / phi(n) for n = start_index..N."""
    if start_index < 3:
        raise DomainError(f"start_index must be >= 3, got {start_index}")
    table = phi_table(trace.length)
    return trace.partial_sums[start_index - 1:] / table[start_index:]


def counter(x: Union[SignSequence, WalkTrace], epsilon: float,
            start_index: int = DEFAULT_START_INDEX) -> CounterResult:
    """Count n in [start_index, N] with s_n / phi(n) in [1 - eps, 1 + eps]."""
    if start_index < 3:
        raise DomainError(f"start_index must be >= 3, got {start_index}")
    trace = x if isinstance(x, WalkTrace) else walk_sums(x)
    if trace.length < start_index:
        raise ValueError(f"sequence of length {trace.length} is shorter than "
                         f"start_index {start_index}")
    ratios = lil_ratios(trace, start_index)
    inside = (ratios >= 1 - epsilon) & (ratios <= 1 + epsilon)
    hits = (np.flatnonzero(inside) + start_index).tolist()
    return CounterResult(len(hits), epsilon, start_index, trace.length, hits)


def sample_mean(x: SignSequence, n: int) -> float:
    if not 1 <= n <= len(x):
        raise ValueError(f"n={n} outside 1..{len(x)}")
    return int(x.signs[:n].sum(dtype=np.int64)) / n


def _block_label(value: int, m: int) -> str:
    return format(value, f"0{m}b")


def block_counts(b: BitString, m: int) -> np.ndarray:
    """Occurrences of each length-m block among the floor(n/m) disjoint blocks."""
    if m < 1:
        raise ValueError("m must be positive")
    if len(b) < m:
        raise ValueError(f"need at least {m} bits, got {len(b)}")
    nblocks = len(b) // m
    blocks = b.bits[: nblocks * m].reshape(nblocks, m).astype(np.int64)
    weights = 1 << np.arange(m - 1, -1, -1, dtype=np.int64)
    return np.bincount(blocks @ weights, minlength=1 << m)


def borel_deviation(b: BitString, m: int, *, exact: bool = False
                    ) -> Dict[str, Union[float, Fraction]]:
    """Block frequency minus 2**-m for every length-m block, keyed by block.

    With ``exact=True`` the deviations are Fractions and sum to exactly 0.
    """
    counts = block_counts(b, m)
    nblocks = len(b) // m
    out: Dict[str, Union[float, Fraction]] = {}
    for value, count in enumerate(counts.tolist()):
        if exact:
            out[_block_label(value, m)] = Fraction(count, nblocks) - Fraction(1, 1 << m)
        else:
            out[_block_label(value, m)] = count / nblocks - 2.0 ** -m
    return out
