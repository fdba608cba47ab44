# file: saltus/generate_report.py

import csv
import logging
import os
from typing import Optional

from jinja2 import Environment, FileSystemLoader

from analysis.evaluator import QuotientRow
from analysis.verifier import ConstructionReport
from enumerations.constructed import Denumeration
from enumerations.prescription import Prescription
from utils.grammar import format_endpoint, format_enclosure, format_point, format_rational

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "templates")
QUOTIENT_HEADER = ["m", "x_m", "Qplus_lo", "Qplus_hi", "Qminus_lo", "Qminus_hi"]

logger = logging.getLogger(__name__)


def _environment() -> Environment:
    env = Environment(
        loader=FileSystemLoader(TEMPLATE_DIR),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    env.filters["rational"] = format_rational
    env.filters["point"] = format_point
    env.filters["enclosure"] = format_enclosure
    return env


def _write(path: str, text: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def render_construction_report(report: ConstructionReport, prescription: Prescription) -> str:
    template = _environment().get_template("construction_report.txt.j2")
    return template.render(report=report, prescription=prescription)


def write_construction_report(report: ConstructionReport, prescription: Prescription, path: str) -> None:
    _write(path, render_construction_report(report, prescription))
    logger.info(f"Wrote construction report to {path}")


def params_summary_path(cache_path: str) -> str:
    return f"{cache_path}.params.txt"


def write_params_summary(denum: Denumeration, path: str, cache_size: int) -> None:
    template = _environment().get_template("params_summary.txt.j2")
    _write(path, template.render(denum=denum, cache_size=cache_size))
    logger.info(f"Wrote params summary to {path}")


def quotient_csv_rows(rows: list[QuotientRow], digits: Optional[int] = None) -> list[list[str]]:
    """CSV cells; exact p/q unless digits is given, then decimals rounded outward."""
    table = [QUOTIENT_HEADER]
    for row in rows:
        table.append([
            str(row.m),
            format_endpoint(row.x_m, digits, upward=True),
            format_endpoint(row.q_plus.lo, digits, upward=False),
            format_endpoint(row.q_plus.hi, digits, upward=True),
            format_endpoint(row.q_minus.lo, digits, upward=False),
            format_endpoint(row.q_minus.hi, digits, upward=True),
        ])
    return table


def write_quotients_csv(rows: list[QuotientRow], path: str, digits: Optional[int] = None) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows(quotient_csv_rows(rows, digits))
    logger.info(f"Wrote {len(rows)} quotient rows to {path}")
