"""Command-line front end.

Subcommands::

    lilrand ingest  PATH            corpus summary
    lilrand lil     PATH            per-string band counters and their histogram
    lilrand model                   model law of the counter
    lilrand decide                  two-cell chi-squared decision
    lilrand run     PATH            lil + decide on one corpus
    lilrand vmc     PATH --rule R   betting-game ledger and selection bias
    lilrand borel   PATH --block-length M

``PATH`` may be ``-`` for stdin.  JSON goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Sequence

from . import __version__
from .bitio import FORMATS, Corpus, load_corpus, open_source
from .dist import (
    DP,
    EXACT_PATH_MAX_HORIZON,
    STRATEGIES,
    counter_distribution_exact,
    counter_distribution_paper,
    counter_zero_probability,
)
from .errors import CapacityError, DomainError, NoQuantileError, ParseError
from .logprob import LOG, MODES, LogProb, LogValue
from .stattest import (
    BinomialModel,
    FrequencyTable,
    chi2_quantile,
    decide,
    log_chi2_stat_binomial,
    pearson_applicability,
)
from .vmcgame import DEFAULT_STEP_BUDGET, RULES, bias, extract, get_rule, run_betting_game
from .walk import borel_deviation, block_counts, counter

logger = logging.getLogger("lilrand")

SCHEMA = "lilrand.report/1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CAPACITY = 4
EXIT_DOMAIN = 5
EXIT_EMPTY = 6
EXIT_IO = 7

DEFAULT_ALPHA = 1 - 1e-10


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def data_path(name: str) -> str:
    """Path of a file bundled in ``lilrand/data``."""
    return str(resources.files("lilrand") / "data" / name)


def _log10(value: LogValue) -> Optional[float]:
    return value.log10 if math.isfinite(value.log_value) else None


def _prob_json(value: LogValue) -> dict:
    return value.as_json()


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def _load(args, *, require_records: bool = True) -> Corpus:
    try:
        data = open_source(args.path)
    except OSError as exc:
        raise CliError(f"cannot read {args.path}: {exc}", EXIT_IO)
    corpus = load_corpus(data, args.format, args.length, overflow=args.overflow)
    for issue in corpus.issues:
        label = f"record {issue.record}" if issue.record else "corpus"
        print(f"{issue.kind}: {label}: {issue.message}", file=sys.stderr)
    if corpus.errors and not getattr(args, "keep_going", False):
        bad = ", ".join(str(i.record) for i in corpus.errors)
        raise CliError(f"malformed record(s): {bad}", EXIT_PARSE)
    if require_records and not len(corpus):
        raise CliError("0 records", EXIT_EMPTY)
    return corpus


def _emit_json(obj, out):
    out.write(json.dumps(obj, indent=2, allow_nan=False, ensure_ascii=False))
    out.write("\n")


def _emit_csv(header: Sequence[str], rows, out):
    writer = csv.writer(out, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    writer.writerows(rows)


# -- ingest -------------------------------------------------------------------

def cmd_ingest(args) -> dict:
    corpus = _load(args)
    records = []
    for number, seq in zip(corpus.record_numbers, corpus):
        ones = int((seq.signs == 1).sum())
        records.append({"record": number, "length": len(seq), "ones": ones,
                        "balance": ones / len(seq) - 0.5})
    lengths = sorted({r["length"] for r in records})
    summary = {
        "schema": SCHEMA,
        "command": "ingest",
        "records": len(corpus),
        "record_length": lengths[0] if len(lengths) == 1 else lengths,
        "issues": [vars(i) for i in corpus.issues],
        "per_record": records,
    }
    print(f"{len(corpus)} records × {args.length} bits", file=sys.stderr)
    return summary


# -- lil ----------------------------------------------------------------------

def read_reference_histogram(path: str) -> Dict[int, int]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return {int(row["m"]): int(row["count"]) for row in reader}


def _counters(corpus: Corpus, epsilon: float, start_index: int, jobs: int) -> List[int]:
    def one(seq):
        return counter(seq, epsilon, start_index).counter

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, corpus.records))
    return [one(seq) for seq in corpus.records]


def histogram_diagnostics(observed: Dict[int, int], reference: Dict[int, int],
                          counters_by_record: Dict[int, int]) -> List[dict]:
    """One entry per m where the observed and reference frequencies differ."""
    out = []
    for m in sorted(set(observed) | set(reference)):
        got, want = observed.get(m, 0), reference.get(m, 0)
        if got != want:
            out.append({
                "m": m,
                "observed": got,
                "reference": want,
                "records": [r for r, c in counters_by_record.items() if c == m],
            })
    return out


def cmd_lil(args) -> dict:
    corpus = _load(args)
    started = time.perf_counter()
    counters = _counters(corpus, args.epsilon, args.start_index, args.jobs)
    if args.replicate_listing_bug:
        # Every string reports the first string's counter.
        counters = [counters[0]] * len(counters)
    by_record = dict(zip(corpus.record_numbers, counters))
    table = FrequencyTable.from_observations(counters)
    report = {
        "schema": SCHEMA,
        "command": "lil",
        "parameters": {"epsilon": args.epsilon, "length": args.length,
                       "start_index": args.start_index,
                       "replicate_listing_bug": args.replicate_listing_bug},
        "records": len(corpus),
        "counters": [{"record": r, "counter": c} for r, c in by_record.items()],
        "histogram": [{"m": m, "count": f} for m, f in table.counts.items()],
        "histogram_total": table.n,
        "zero_counter": table.counts.get(0, 0),
    }
    if args.reference:
        reference = read_reference_histogram(args.reference)
        diagnostics = histogram_diagnostics(table.counts, reference, by_record)
        report["reference"] = {"path": args.reference, "matches": not diagnostics,
                               "mismatches": diagnostics}
        for d in diagnostics:
            print(f"mismatch at m={d['m']}: observed {d['observed']}, reference "
                  f"{d['reference']}, records {d['records']}", file=sys.stderr)
    if args.timing:
        report["timing"] = {"seconds": time.perf_counter() - started}
    return report


def lil_csv_rows(report: dict):
    for row in report["counters"]:
        yield ("counter", row["record"], row["counter"])
    for row in report["histogram"]:
        yield ("histogram", row["m"], row["count"])


# -- model --------------------------------------------------------------------

def parse_m_values(text: str, N: int) -> List[int]:
    """``all``, ``a-b`` or a comma list."""
    if text == "all":
        return list(range(0, N + 1))
    values: List[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            values.extend(range(int(lo), int(hi) + 1))
        else:
            values.append(int(part))
    return values


def cmd_model(args) -> dict:
    N, eps = args.length, args.epsilon
    rows = []
    exact = None
    if args.compare_exact:
        if N > EXACT_PATH_MAX_HORIZON:
            raise CapacityError(f"--compare-exact needs N <= {EXACT_PATH_MAX_HORIZON}")
        exact = counter_distribution_exact(N, eps, args.start_index)
    for m in parse_m_values(args.m, N):
        if m == 0:
            value: LogValue = counter_zero_probability(N, eps, args.mode)
            method = "zero-product"
        else:
            value = counter_distribution_paper(N, eps, m, args.strategy, args.mode)
            method = args.strategy
        row = {"m": m, "method": method, "probability": _prob_json(value)}
        if exact is not None:
            row["exact_enumeration"] = _prob_json(exact.values.get(m, LogProb.zero("exact")))
        rows.append(row)
    return {
        "schema": SCHEMA,
        "command": "model",
        "parameters": {"length": N, "epsilon": eps, "strategy": args.strategy,
                       "mode": args.mode},
        "values": rows,
    }


def model_csv_rows(report: dict):
    for row in report["values"]:
        extra = []
        if "exact_enumeration" in row:
            extra = [row["exact_enumeration"]["log10"]]
        yield [row["m"], row["method"], row["probability"]["log10"]] + extra


# -- decide / run -------------------------------------------------------------

@dataclass
class RunReport:
    parameters: dict
    p: LogProb
    observed_zero: int
    experiments: int
    log10_statistic: Optional[float]
    quantile: int
    verdict: str
    applicability: dict
    counters: Optional[List[dict]] = None
    histogram: Optional[List[dict]] = None
    timing: Optional[dict] = field(default=None)

    def to_dict(self, command: str) -> dict:
        out = {"schema": SCHEMA, "command": command, "parameters": self.parameters}
        if self.counters is not None:
            out["counters"] = self.counters
            out["histogram"] = self.histogram
            out["histogram_total"] = sum(h["count"] for h in self.histogram)
        out.update({
            "experiments": self.experiments,
            "observed_zero": self.observed_zero,
            "p": _prob_json(self.p),
            "chi2": {"log10": self.log10_statistic},
            "quantile": self.quantile,
            "verdict": self.verdict,
            "pearson_applicability": self.applicability,
        })
        if self.timing is not None:
            out["timing"] = self.timing
        return out


def decide_report(observed_zero: int, experiments: int, N: int, epsilon: float,
                  alpha: float, mode: str = LOG) -> RunReport:
    p = counter_zero_probability(N, epsilon, mode)
    model = BinomialModel(p, experiments, observed_zero)
    if model.degenerate():
        raise DomainError(f"model probability P(c=0) = {p.value} is degenerate")
    log_stat = log_chi2_stat_binomial(observed_zero, experiments, p)
    # Past the double range the statistic becomes inf, which still compares right.
    statistic = math.exp(log_stat) if log_stat < 709 else math.inf
    quantile = chi2_quantile(alpha, model)
    decision = decide(statistic, quantile, alpha)
    applicability = pearson_applicability(experiments, {0: p, 1: p.complement()})
    return RunReport(
        parameters={"length": N, "epsilon": epsilon, "alpha": alpha, "mode": mode},
        p=p,
        observed_zero=observed_zero,
        experiments=experiments,
        log10_statistic=(log_stat / math.log(10)) if math.isfinite(log_stat) else None,
        quantile=quantile,
        verdict=decision.verdict,
        applicability={"applicable": applicability.applicable,
                       "violating_cells": applicability.violating},
    )


def cmd_decide(args) -> dict:
    if not 0 <= args.observed <= args.experiments:
        raise DomainError("--observed must lie in 0..--experiments")
    started = time.perf_counter()
    report = decide_report(args.observed, args.experiments, args.length, args.epsilon,
                           args.alpha, args.mode)
    if args.timing:
        report.timing = {"seconds": time.perf_counter() - started}
    return report.to_dict("decide")


def cmd_run(args) -> dict:
    started = time.perf_counter()
    lil = cmd_lil(args)
    report = decide_report(lil["zero_counter"], lil["records"], args.length,
                           args.epsilon, args.alpha, args.mode)
    report.parameters["start_index"] = args.start_index
    report.counters = lil["counters"]
    report.histogram = lil["histogram"]
    if args.timing:
        report.timing = {"seconds": time.perf_counter() - started}
    out = report.to_dict("run")
    if "reference" in lil:
        out["reference"] = lil["reference"]
    return out


# -- vmc ----------------------------------------------------------------------

def cmd_vmc(args) -> dict:
    corpus = _load(args)
    rule = get_rule(args.rule, args.budget)
    rows = []
    for number, seq in zip(corpus.record_numbers, corpus):
        if args.horizon:
            seq = seq[: args.horizon]
        ledger = run_betting_game(seq, rule)
        selected = extract(seq, rule)
        try:
            b = bias(seq, rule)
        except ValueError:
            b = None
        rows.append({
            "record": number,
            "turns": len(ledger.turns),
            "bets": len(ledger.betting_turns),
            "selected": len(selected),
            "bob_total": ledger.bob_total,
            "alice_total": ledger.alice_total,
            "zero_sum": ledger.alice_total == -ledger.bob_total and all(
                t.alice_payoff == -t.bob_payoff for t in ledger.turns),
            "bias": b,
        })
    return {
        "schema": SCHEMA,
        "command": "vmc",
        "parameters": {"rule": args.rule, "horizon": args.horizon,
                       "step_budget": args.budget},
        "records": rows,
    }


# -- borel --------------------------------------------------------------------

def cmd_borel(args) -> dict:
    corpus = _load(args)
    m = args.block_length
    rows = []
    worst = 0.0
    for number, seq in zip(corpus.record_numbers, corpus):
        bits = seq.to_bits()
        counts = block_counts(bits, m).tolist()
        deviations = borel_deviation(bits, m)
        for (block, dev), count in zip(deviations.items(), counts):
            rows.append({"record": number, "block": block, "blocks": len(bits) // m,
                         "count": count, "deviation": dev})
            worst = max(worst, abs(dev))
    return {
        "schema": SCHEMA,
        "command": "borel",
        "parameters": {"block_length": m},
        "max_abs_deviation": worst,
        "rows": rows,
    }


# -- argument parsing ---------------------------------------------------------

def _alpha(text: str) -> float:
    """Accept plain floats and the ``1-1e-10`` shorthand."""
    text = text.strip()
    if text.startswith("1-"):
        value = 1 - float(text[2:])
    else:
        value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_input(p: argparse.ArgumentParser):
    p.add_argument("path", help="input file, or - for stdin")
    p.add_argument("--format", choices=FORMATS, default="appendix-decimal")
    p.add_argument("--length", type=_positive_int, default=10_000,
                   help="record length in bits (default 10000)")
    p.add_argument("--overflow", choices=("truncate", "error"), default="truncate",
                   help="what to do with a decimal record wider than --length")
    p.add_argument("--keep-going", action="store_true",
                   help="drop malformed records instead of failing")


def _add_band(p: argparse.ArgumentParser):
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--start-index", type=int, default=3)


def _add_out(p: argparse.ArgumentParser, csv_ok: bool = True):
    choices = ("json", "csv") if csv_ok else ("json",)
    p.add_argument("--out", choices=choices, default="json")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock timing (makes output non-reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lilrand", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="summarise a corpus")
    _add_input(p)
    _add_out(p, csv_ok=False)

    for name in ("lil", "run"):
        p = sub.add_parser(name, help="band counters per string" if name == "lil"
                           else "counters, model probability and decision")
        _add_input(p)
        _add_band(p)
        p.add_argument("--reference", help="CSV histogram (m,count) to compare against")
        p.add_argument("--replicate-listing-bug", action="store_true",
                       help="give every string the first string's counter")
        p.add_argument("--jobs", type=_positive_int, default=1)
        if name == "run":
            p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
            p.add_argument("--mode", choices=MODES, default=LOG)
            _add_out(p, csv_ok=False)
        else:
            _add_out(p)

    p = sub.add_parser("model", help="model probabilities of the counter")
    p.add_argument("--length", type=_positive_int, default=10_000, help="horizon N")
    _add_band(p)
    p.add_argument("--m", default="0", help="'all', 'a-b' or a comma list (default 0)")
    p.add_argument("--strategy", choices=STRATEGIES, default=DP)
    p.add_argument("--mode", choices=MODES, default=LOG)
    p.add_argument("--compare-exact", action="store_true",
                   help=f"add the path-enumeration law (N <= {EXACT_PATH_MAX_HORIZON})")
    _add_out(p)

    p = sub.add_parser("decide", help="chi-squared decision for an observed zero count")
    p.add_argument("--observed", type=int, required=True,
                   help="number of strings with counter 0")
    p.add_argument("--experiments", type=_positive_int, default=100)
    p.add_argument("--length", type=_positive_int, default=10_000, help="horizon N")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--alpha", type=_alpha, default=DEFAULT_ALPHA)
    p.add_argument("--mode", choices=MODES, default=LOG)
    _add_out(p, csv_ok=False)

    p = sub.add_parser("vmc", help="betting game and selection bias")
    _add_input(p)
    p.add_argument("--rule", required=True, choices=sorted(RULES))
    p.add_argument("--horizon", type=_positive_int, default=None)
    p.add_argument("--budget", type=_positive_int, default=DEFAULT_STEP_BUDGET,
                   help="evaluation steps before a rule counts as divergent")
    _add_out(p, csv_ok=False)

    p = sub.add_parser("borel", help="block-frequency deviations")
    _add_input(p)
    p.add_argument("--block-length", "-m", type=_positive_int, required=True)
    _add_out(p)
    return parser


COMMANDS = {
    "ingest": cmd_ingest,
    "lil": cmd_lil,
    "model": cmd_model,
    "decide": cmd_decide,
    "run": cmd_run,
    "vmc": cmd_vmc,
    "borel": cmd_borel,
}


def _write(args, report: dict, out):
    if args.out == "json":
        _emit_json(report, out)
    elif args.command == "lil":
        _emit_csv(("table", "key", "value"), lil_csv_rows(report), out)
    elif args.command == "model":
        header = ["m", "method", "log10_probability"]
        if args.compare_exact:
            header.append("log10_exact_enumeration")
        _emit_csv(header, model_csv_rows(report), out)
    elif args.command == "borel":
        _emit_csv(("record", "block", "blocks", "count", "deviation"),
                  ([r["record"], r["block"], r["blocks"], r["count"], repr(r["deviation"])]
                   for r in report["rows"]), out)
        print(f"max |deviation| = {report['max_abs_deviation']!r}", file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        report = COMMANDS[args.command](args)
        _write(args, report, out)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: lower N, use --strategy dp, or switch to --mode log", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, NoQuantileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
