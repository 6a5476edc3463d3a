from __future__ import annotations

from pathlib import Path

import pytest

from aurcase import parse, validate
from aurcase.diagnostics import Diagnostic
from aurcase.rules import RuleConfig

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def golden_cat_text() -> str:
    return (FIXTURES / "golden_cat.aur").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def golden_min_text() -> str:
    return (FIXTURES / "golden_min.aur").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def golden_ledger_text() -> str:
    return (FIXTURES / "golden.ledger").read_text(encoding="utf-8")


@pytest.fixture()
def golden_case(golden_cat_text):
    result = parse(golden_cat_text, "golden_cat.aur")
    assert not result.fatal
    return result.case


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def pipeline(text: str, config: RuleConfig | None = None, file_name: str = "case.aur") -> list[Diagnostic]:
    """Parse + validate the way the CLI does: parse-fatal diagnostics as-is,
    otherwise the full rule run with the parser's spans."""
    result = parse(text, file_name)
    if result.fatal:
        return list(result.diagnostics)
    return validate(
        result.case,
        config,
        span_index=result.span_index,
        reference_spans=result.reference_spans,
    )
