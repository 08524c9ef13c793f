"""Finite-horizon place selection, the betting game it induces, and pure-strategy
analysis of finite two-player zero-sum games.

A selection rule maps a non-empty prefix over {-1, +1} to ``SELECT`` (+1),
``SKIP`` (-1) or ``DIVERGE`` (None).  The same rule doubles as a betting
strategy: it bets its outcome on the next sign, and divergence means no bet.
Rules are given a step budget and report ``DIVERGE`` once it is spent, which
stands in for a computation that never halts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .bitio import SignSequence
from .errors import EmptyExtractionError

SELECT = 1
SKIP = -1
DIVERGE = None

DEFAULT_STEP_BUDGET = 64


class _BudgetExhausted(Exception):
    pass


class StepCounter:
    """Handed to a rule's evaluator; each ``tick()`` spends one step."""

    def __init__(self, budget: int):
        self.budget = budget
        self.used = 0

    def tick(self, steps: int = 1):
        self.used += steps
        if self.used > self.budget:
            raise _BudgetExhausted


# Evaluators receive the prefix as a read-only int8 array.
Evaluator = Callable[[np.ndarray, StepCounter], int]


@dataclass(frozen=True)
class SelectionRule:
    name: str
    evaluator: Evaluator
    step_budget: int = DEFAULT_STEP_BUDGET

    def __call__(self, prefix: Sequence[int]) -> Optional[int]:
        if len(prefix) == 0:
            # The empty prefix is outside the rule's domain.
            return DIVERGE
        if not isinstance(prefix, np.ndarray):
            prefix = np.asarray(prefix, dtype=np.int8)
        steps = StepCounter(self.step_budget)
        try:
            outcome = self.evaluator(prefix, steps)
        except _BudgetExhausted:
            return DIVERGE
        if outcome not in (SELECT, SKIP):
            raise ValueError(f"rule {self.name!r} returned {outcome!r}")
        return outcome

    def outcomes(self, x: SignSequence) -> List[Optional[int]]:
        """Outcome at every turn n = 1..N, from the prefix x_1..x_{n-1}."""
        signs = x.signs
        return [self(signs[:n]) for n in range(len(signs))]


def _constant(value):
    def rule(prefix, steps):
        steps.tick()
        return value
    return rule


def _after(sign):
    def rule(prefix, steps):
        steps.tick()
        return SELECT if prefix[-1] == sign else SKIP
    return rule


def _majority(prefix, steps):
    steps.tick()
    return SELECT if int(prefix.sum(dtype=np.int64)) >= 0 else SKIP


def _parity(prefix, steps):
    steps.tick()
    return SELECT if int((prefix == 1).sum()) % 2 else SKIP


def _diverge(prefix, steps):
    while True:
        steps.tick()


RULES: Dict[str, Evaluator] = {
    "constant-select": _constant(SELECT),
    "constant-skip": _constant(SKIP),
    "after-plus": _after(1),
    "after-minus": _after(-1),
    "majority-of-prefix": _majority,
    "parity-of-prefix": _parity,
    "always-diverge": _diverge,
}


def get_rule(name: str, step_budget: int = DEFAULT_STEP_BUDGET) -> SelectionRule:
    try:
        return SelectionRule(name, RULES[name], step_budget)
    except KeyError:
        raise KeyError(f"unknown rule {name!r}; known rules: {', '.join(RULES)}") from None


@dataclass(frozen=True)
class Extraction:
    subsequence: SignSequence
    indices: List[int]  # 1-based positions in the source sequence


def extract_with_indices(x: SignSequence, rule: SelectionRule) -> Extraction:
    chosen = [n for n, outcome in enumerate(rule.outcomes(x), start=1)
              if outcome == SELECT]
    signs = x.signs[np.asarray(chosen, dtype=np.int64) - 1] if chosen else np.zeros(0)
    return Extraction(SignSequence(signs), chosen)


def extract(x: SignSequence, rule: SelectionRule) -> SignSequence:
    """Ordered subsequence of the x_n whose prefix the rule selects."""
    return extract_with_indices(x, rule).subsequence


@dataclass(frozen=True)
class Turn:
    n: int
    bet: int
    alice_payoff: int
    bob_payoff: int


@dataclass
class PayoffLedger:
    turns: List[Turn] = field(default_factory=list)

    @property
    def alice_total(self) -> int:
        return sum(t.alice_payoff for t in self.turns)

    @property
    def bob_total(self) -> int:
        return sum(t.bob_payoff for t in self.turns)

    def cumulative(self, player: str = "bob") -> List[int]:
        attr = "bob_payoff" if player == "bob" else "alice_payoff"
        return list(itertools.accumulate(getattr(t, attr) for t in self.turns))

    @property
    def betting_turns(self) -> List[int]:
        return [t.n for t in self.turns if t.bet != 0]


def run_betting_game(x: SignSequence, rule: SelectionRule) -> PayoffLedger:
    ledger = PayoffLedger()
    signs = x.signs.tolist()
    for n, outcome in enumerate(rule.outcomes(x), start=1):
        bet = 0 if outcome is DIVERGE else outcome
        if bet == 0:
            bob = 0
        else:
            bob = 1 if signs[n - 1] == bet else -1
        ledger.turns.append(Turn(n, bet, -bob, bob))
    return ledger


def bias(x: SignSequence, rule: SelectionRule) -> float:
    """Frequency of +1 among the selected signs, minus 1/2."""
    chosen = extract(x, rule)
    if len(chosen) == 0:
        raise EmptyExtractionError(f"rule {getattr(rule, 'name', rule)!r} selects nothing")
    return int((chosen.signs == 1).sum()) / len(chosen) - 0.5


def prefix_order(a: Sequence, b: Sequence) -> bool:
    """True iff ``a`` is a strict prefix of ``b``."""
    return len(a) < len(b) and tuple(b[: len(a)]) == tuple(a)


class MatrixGame:
    """Strictly competitive game given by Alice's payoff matrix.

    Rows are Alice's actions, columns Bob's; Bob receives the negation.
    """

    def __init__(self, alice_payoff_matrix):
        matrix = np.array(alice_payoff_matrix, dtype=float)
        if matrix.ndim != 2 or matrix.size == 0:
            raise ValueError("payoff matrix must be a non-empty 2-D array")
        matrix.flags.writeable = False
        self.alice = matrix

    @property
    def bob(self) -> np.ndarray:
        return -self.alice

    @property
    def shape(self) -> Tuple[int, int]:
        return self.alice.shape

    def maxmin(self) -> float:
        return float(self.alice.min(axis=1).max())

    def minmax(self) -> float:
        return float(self.alice.max(axis=0).min())


def maxminimizers(g: MatrixGame, player: str) -> Tuple[Set[int], float]:
    """Actions maximising the player's worst-case payoff, and that payoff."""
    if player == "alice":
        worst = g.alice.min(axis=1)
    elif player == "bob":
        worst = g.bob.min(axis=0)
    else:
        raise ValueError(f"player must be 'alice' or 'bob', got {player!r}")
    best = worst.max()
    return set(np.flatnonzero(worst == best).tolist()), float(best)


def pure_nash(g: MatrixGame) -> Set[Tuple[int, int]]:
    col_best = g.alice == g.alice.max(axis=0, keepdims=True)
    row_best = g.bob == g.bob.max(axis=1, keepdims=True)
    return {(int(r), int(c)) for r, c in zip(*np.nonzero(col_best & row_best))}


@dataclass
class ClauseResult:
    passed: bool
    witnesses: list = field(default_factory=list)


@dataclass
class MinimaxReport:
    nash: Set[Tuple[int, int]]
    maxmin: float
    minmax: float
    clauses: Dict[int, ClauseResult]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses.values())


def check_minimax_theorem(g: MatrixGame) -> MinimaxReport:
    """Check the three equilibrium/maxmin clauses exhaustively on a finite game.

    1. each pure equilibrium pairs two maxminimizers;
    2. at each pure equilibrium maxmin == minmax == its payoff;
    3. if maxmin == minmax, every pair of maxminimizers is an equilibrium.

    Witnesses list the profiles that break a clause.
    """
    nash = pure_nash(g)
    alice_best, _ = maxminimizers(g, "alice")
    bob_best, _ = maxminimizers(g, "bob")
    lower, upper = g.maxmin(), g.minmax()

    bad1 = sorted(p for p in nash if p[0] not in alice_best or p[1] not in bob_best)
    bad2 = sorted(p for p in nash if not (lower == upper == g.alice[p]))
    bad3 = []
    if lower == upper:
        bad3 = sorted(p for p in itertools.product(sorted(alice_best), sorted(bob_best))
                      if p not in nash)
    clauses = {1: ClauseResult(not bad1, bad1),
               2: ClauseResult(not bad2, bad2),
               3: ClauseResult(not bad3, bad3)}
    return MinimaxReport(nash, lower, upper, clauses)
