# file: saltus/main.py

import argparse
import logging
import os
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from analysis.evaluator import ToleranceNotReached, eval_saltus, quotient_sequence
from analysis.verifier import (
    DEFAULT_M_GRID,
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    WitnessQuery,
    check_construction,
    proposition_witness,
    random_witness_query,
)
from enumerations.base import RationalEnumeration, ScanLimitExceeded
from enumerations.cache import DEFAULT_CACHE_SIZE, CorruptCacheError, load_cache, save_cache
from enumerations.calkin_wilf import CalkinWilfEnumeration
from enumerations.constructed import DEFAULT_SCAN_LIMIT, ConstructionError, Denumeration, freeze
from enumerations.prescription import PrescriptionError, load_prescription
from generate_report import params_summary_path, write_construction_report, write_params_summary, write_quotients_csv
from utils.exact import QuadraticIrrational, Weight
from utils.grammar import format_enclosure, parse_m_range, parse_point, parse_rational

logging.basicConfig(level=logging.INFO)

COMMANDS = ["construct", "eval", "quotients", "verify", "witness"]
ENUMERATIONS = ["constructed", "calkin-wilf"]
EXIT_ERROR = 3

DEFAULT_WITNESS_EPS = Fraction(1, 20)
DEFAULT_WITNESS_RANGE = (5, 60)
DEFAULT_WITNESS_QUERIES = 10

DENSE_SET_NOTE = (
    "note: F(x) = sum 2**-n over phi(n) < x never has derivative 2**x at any point; "
    "translating the jump set off the rationals extends this to every countable dense set."
)


@dataclass
class RunConfig:
    command: str
    prescription: Optional[str] = None
    cache: Optional[str] = None
    out: Optional[str] = None
    eps: Optional[Fraction] = None
    kappa: int = 1
    m_range: Optional[tuple[int, int]] = None
    weight: Weight = Weight.INVERSE_SQUARE
    x: Optional[str] = None
    scan_limit: int = DEFAULT_SCAN_LIMIT
    decimal: Optional[int] = None
    cache_size: int = DEFAULT_CACHE_SIZE
    seed: Optional[int] = None
    m_grid: int = DEFAULT_M_GRID
    exponent: int = 0
    enumeration: str = "constructed"
    queries: int = DEFAULT_WITNESS_QUERIES
    verbose: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"Unknown command {self.command!r}")
        if self.eps is not None and self.eps <= 0:
            raise ValueError("--eps must be positive")
        for name in ("prescription", "cache", "out"):
            value = getattr(self, name)
            if value is not None and not value.strip():
                raise ValueError(f"--{name} must be a nonempty path")
        needs_prescription = self.command not in ("eval", "witness") or self.enumeration == "constructed"
        if needs_prescription and self.prescription is None:
            raise ValueError(f"{self.command} needs --prescription")
        if self.command == "construct" and self.cache is None:
            raise ValueError("construct needs --cache")
        if self.command == "eval" and (self.x is None or self.eps is None):
            raise ValueError("eval needs --x and --eps")
        if self.command == "quotients" and (self.m_range is None or self.out is None):
            raise ValueError("quotients needs --m and --out")
        if self.scan_limit < 1 or self.cache_size < 0 or self.m_grid < 1 or self.queries < 1:
            raise ValueError("--scan-limit, --m-grid and --queries must be positive, --cache-size nonnegative")
        if self.decimal is not None and self.decimal < 0:
            raise ValueError("--decimal must be nonnegative")


def _denumeration(config: RunConfig) -> Denumeration:
    prescription = load_prescription(config.prescription)
    if config.cache and os.path.exists(config.cache):
        return load_cache(config.cache, prescription)
    if config.cache:
        logging.warning(f"Cache {config.cache} not found, constructing from {config.prescription}")
    return freeze(prescription)


def _enumeration(config: RunConfig) -> RationalEnumeration:
    if config.enumeration == "calkin-wilf":
        return CalkinWilfEnumeration()
    return _denumeration(config)


def _construct(config: RunConfig) -> int:
    denum = freeze(load_prescription(config.prescription))
    save_cache(denum, config.cache, config.cache_size)
    write_params_summary(denum, params_summary_path(config.cache), config.cache_size)
    return EXIT_PASS


def _eval(config: RunConfig) -> int:
    enumeration = _enumeration(config)
    box = eval_saltus(enumeration, config.weight, parse_point(config.x), config.eps)
    print(format_enclosure(box, config.decimal))
    return EXIT_PASS


def _quotients(config: RunConfig) -> int:
    denum = _denumeration(config)
    m_lo, m_hi = config.m_range
    eps_rule = None
    if config.eps is not None:
        cluster = denum.params[config.kappa]
        eps_rule = lambda m: config.eps * cluster.x(m)  # noqa: E731
    rows = quotient_sequence(denum, config.kappa, m_lo, m_hi, eps_rule, config.scan_limit)
    write_quotients_csv(rows, config.out, config.decimal)
    return EXIT_PASS


def _verify(config: RunConfig) -> int:
    denum = _denumeration(config)
    report = check_construction(denum, config.m_grid)
    if config.out:
        write_construction_report(report, denum.prescription, config.out)
    for failure in report.failures():
        logging.error(failure)
    return report.exit_status


def _witness(config: RunConfig) -> int:
    enumeration = _enumeration(config)
    n_lo, n_hi = config.m_range or DEFAULT_WITNESS_RANGE
    eps = config.eps or DEFAULT_WITNESS_EPS
    if config.seed is not None:
        rng = random.Random(config.seed)
        queries = [random_witness_query(rng, n_lo, n_hi, eps) for _ in range(config.queries)]
    else:
        if config.x is not None:
            xi = parse_point(config.x)
        elif isinstance(enumeration, Denumeration):
            xi = enumeration.params[config.kappa].xi
        else:
            raise ValueError("witness needs --x for this enumeration")
        if not isinstance(xi, QuadraticIrrational):
            raise ValueError("witness points must be irrational (u + v*sqrt(w))")
        queries = [WitnessQuery(xi, config.exponent, eps, n_lo, n_hi)]

    status = EXIT_PASS
    for query in queries:
        m = proposition_witness(enumeration, query)
        if m is None:
            print(f"xi = {query.xi}, x = {query.x_exponent}: inconclusive for m in {query.N}..{query.M}")
            status = EXIT_INCONCLUSIVE
        else:
            print(f"xi = {query.xi}, x = {query.x_exponent}: band violated at m = {m}")
    print(DENSE_SET_NOTE)
    return status


HANDLERS = {
    "construct": _construct,
    "eval": _eval,
    "quotients": _quotients,
    "verify": _verify,
    "witness": _witness,
}


def run(config: RunConfig) -> int:
    try:
        config.validate()
        return HANDLERS[config.command](config)
    except (PrescriptionError, CorruptCacheError, ScanLimitExceeded, ConstructionError, ToleranceNotReached,
            ValueError, OSError) as e:
        logging.error(f"[{config.command}] {e}")
        return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Saltus functions with prescribed derivatives at irrational points.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--prescription", type=str, help="Prescription file (xi = ... ; c = ... per line)")
    parser.add_argument("--cache", type=str, help="Denumeration cache file")
    parser.add_argument("--out", type=str, help="Output path (CSV for quotients, report for verify)")
    parser.add_argument("--eps", type=parse_rational,
                        help="eval: enclosure width; quotients: window tolerance relative to x_m; witness: band epsilon")
    parser.add_argument("--kappa", type=int, default=1, help="Prescription point index (1-based)")
    parser.add_argument("--m", dest="m_range", type=parse_m_range, help="Inclusive range lo..hi")
    parser.add_argument("--weight", type=Weight, default=Weight.INVERSE_SQUARE, choices=list(Weight))
    parser.add_argument("--x", type=str, help="Evaluation point: p/q or u + v*sqrt(w)")
    parser.add_argument("--scan-limit", type=int, default=DEFAULT_SCAN_LIMIT)
    parser.add_argument("--decimal", type=int, help="Write decimals with this many digits, rounded outward")
    parser.add_argument("--cache-size", type=int, default=DEFAULT_CACHE_SIZE, help="Leading indices stored by construct")
    parser.add_argument("--seed", type=int, help="witness: run randomized queries from this seed")
    parser.add_argument("--queries", type=int, default=DEFAULT_WITNESS_QUERIES, help="Number of randomized witness queries")
    parser.add_argument("--m-grid", type=int, default=DEFAULT_M_GRID, help="verify: check the interval claim for m up to this")
    parser.add_argument("--exponent", type=int, default=0, help="witness: candidate derivative 2**exponent")
    parser.add_argument("--enumeration", choices=ENUMERATIONS, default="constructed")
    parser.add_argument("--verbose", action="store_true", help="Debug logging")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    config = RunConfig(**vars(args))
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
