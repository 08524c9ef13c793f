"""Non-negative quantities carried in natural-log space.

A value is stored as ``log_value`` (a float, ``-inf`` for zero) and, in exact
mode, additionally as a :class:`fractions.Fraction`.  Exact mode is the
correctness anchor; log mode survives magnitudes such as ``C(10**4, 5000) /
2**10**4`` that underflow a double.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

import numpy as np

from .errors import DomainError

LOG = "log"
EXACT = "exact"
MODES = (LOG, EXACT)

# Rounding slack when checking that a log-mode probability does not exceed 1.
_LOG_ONE_SLACK = 1e-9
_LN10 = math.log(10.0)


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    return mode


def log_fraction(q: Fraction) -> float:
    """Natural log of a non-negative rational without going through a float."""
    if q < 0:
        raise DomainError(f"log of negative value {q}")
    if q == 0:
        return -math.inf
    # math.log accepts arbitrarily large ints.
    return math.log(q.numerator) - math.log(q.denominator)


def logsumexp(values: Iterable[float]) -> float:
    """log(sum(exp(v))) with a max shift and exactly rounded summation."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=float)
    if arr.size == 0:
        return -math.inf
    top = float(arr.max())
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(np.exp(arr - top).tolist()))


def log1mexp(a: float) -> float:
    """log(1 - exp(a)) for a <= 0, accurate at both ends."""
    if a > 0:
        raise DomainError(f"log1mexp needs a <= 0, got {a}")
    if a == 0:
        return -math.inf
    if a > -math.log(2.0):
        return math.log(-math.expm1(a))
    return math.log1p(-math.exp(a))


@dataclass(frozen=True)
class LogValue:
    """A non-negative real in log space, optionally with its exact rational value.

    Values are not bounded by 1; see :class:`LogProb` for probabilities.
    """

    log_value: float
    exact: Optional[Fraction] = None

    def __post_init__(self):
        if math.isnan(self.log_value):
            raise DomainError("log value is NaN")
        if self.exact is not None:
            if self.exact < 0:
                raise DomainError(f"negative exact value {self.exact}")

    @classmethod
    def from_log(cls, log_value: float):
        return cls(float(log_value))

    @classmethod
    def from_fraction(cls, value: Fraction):
        value = Fraction(value)
        return cls(log_fraction(value), value)

    @classmethod
    def from_float(cls, value: float):
        """Wrap a float.  Floats are dyadic rationals, so this is exact mode."""
        if value < 0 or math.isnan(value):
            raise DomainError(f"not a non-negative number: {value}")
        return cls.from_fraction(Fraction(value))

    @classmethod
    def coerce(cls, value: Union["LogValue", float, int, Fraction]):
        if isinstance(value, cls):
            return value
        if isinstance(value, LogValue):
            return cls(value.log_value, value.exact)
        if isinstance(value, Fraction) or isinstance(value, int):
            return cls.from_fraction(Fraction(value))
        return cls.from_float(float(value))

    @classmethod
    def zero(cls, mode: str = LOG):
        return cls(-math.inf, Fraction(0) if mode == EXACT else None)

    @classmethod
    def one(cls, mode: str = LOG):
        return cls(0.0, Fraction(1) if mode == EXACT else None)

    @property
    def mode(self) -> str:
        return EXACT if self.exact is not None else LOG

    @property
    def value(self) -> float:
        """The value as a float; underflows to 0.0 below ~1e-308."""
        if self.exact is not None:
            return float(self.exact)
        return math.exp(self.log_value)

    @property
    def log10(self) -> float:
        return self.log_value / _LN10

    def is_zero(self) -> bool:
        if self.exact is not None:
            return self.exact == 0
        return self.log_value == -math.inf

    def __mul__(self, other: "LogValue"):
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = self.exact * other.exact
            return type(self).from_fraction(exact)
        return type(self)(self.log_value + other.log_value)

    def __add__(self, other: "LogValue"):
        if self.exact is not None and other.exact is not None:
            return type(self).from_fraction(self.exact + other.exact)
        return type(self)(float(np.logaddexp(self.log_value, other.log_value)))

    def scale(self, factor: Fraction):
        """Multiply by a positive rational constant (e.g. 1/2)."""
        factor = Fraction(factor)
        if self.exact is not None:
            return type(self).from_fraction(self.exact * factor)
        return type(self)(self.log_value + log_fraction(factor))

    def __float__(self):
        return self.value

    def as_json(self) -> dict:
        out = {"log10": self.log10 if math.isfinite(self.log_value) else None}
        if self.exact is not None:
            out["exact"] = f"{self.exact.numerator}/{self.exact.denominator}"
        return out


@dataclass(frozen=True)
class LogProb(LogValue):
    """A probability: ``log_value <= 0`` (up to log-mode rounding slack)."""

    def __post_init__(self):
        super().__post_init__()
        if self.exact is not None and self.exact > 1:
            raise DomainError(f"probability {self.exact} exceeds 1")
        if self.log_value > 0:
            if self.log_value > _LOG_ONE_SLACK:
                raise DomainError(f"log probability {self.log_value} is positive")
            object.__setattr__(self, "log_value", 0.0)

    def complement(self) -> "LogProb":
        if self.exact is not None:
            return LogProb.from_fraction(1 - self.exact)
        return LogProb(log1mexp(self.log_value))


def sum_logs(items: Iterable[LogValue], mode: str, cls=LogValue):
    """Sum a collection of values, exactly in exact mode."""
    items = list(items)
    if mode == EXACT:
        total = Fraction(0)
        for item in items:
            total += item.exact
        return cls.from_fraction(total)
    return cls(logsumexp([item.log_value for item in items]))
