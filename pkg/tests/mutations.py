"""The rule-by-rule mutation table: for every registered rule, a passing
fixture and a minimal single-defect edit that trips exactly that rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from aurcase.rules import RuleConfig

from conftest import fixture_text


def remove_block(text: str, header_prefix: str) -> str:
    """Delete the first block whose stripped header starts with the prefix,
    tracking brace depth line by line (fixture strings contain no braces)."""
    lines = text.splitlines(keepends=True)
    start = next(
        i for i, line in enumerate(lines) if line.strip().startswith(header_prefix)
    )
    depth = 0
    for index in range(start, len(lines)):
        depth += lines[index].count("{") - lines[index].count("}")
        if depth == 0:
            return "".join(lines[:start] + lines[index + 1 :])
    raise AssertionError(f"unbalanced block at {header_prefix!r}")


def remove_line(text: str, fragment: str) -> str:
    lines = text.splitlines(keepends=True)
    index = next(i for i, line in enumerate(lines) if fragment in line)
    return "".join(lines[:index] + lines[index + 1 :])


def replace_once(text: str, old: str, new: str) -> str:
    assert old in text, f"missing {old!r}"
    return text.replace(old, new, 1)


def append_block(text: str, block: str) -> str:
    """Insert a top-level block just before the case's closing brace."""
    closing = text.rstrip()
    assert closing.endswith("}")
    return closing[:-1] + "\n" + block.rstrip("\n") + "\n}\n"


_EXTRA_HAZARD = """  hazard H9 category = behavioral {
    description = "Hazard nobody addresses"
  }
"""

_DUPLICATE_HAZARD = """  hazard H1 category = behavioral {
    description = "Duplicate declaration"
  }
"""

_UNCLAIMED_CRITERION = """  criterion AC9 hazard = H1 methodology = M2 aggregation = event_level {
    statement = "Criterion without a claim"
  }
"""

_ORPHAN_EVIDENCE = """  evidence E9 methodology = M1 strength = weak {
    kind = "unused"
    uri = "internal://unused"
  }
"""


@dataclass(frozen=True)
class Mutation:
    rule_id: str
    base_fixture: str
    description: str
    apply: Callable[[str], str]
    config: RuleConfig = field(default_factory=RuleConfig)


MUTATIONS: tuple[Mutation, ...] = (
    Mutation(
        "E001",
        "golden_min.aur",
        "strip the case down to its context",
        lambda text: fixture_text("balance_none.aur"),
    ),
    Mutation(
        "E002",
        "golden_cat.aur",
        "delete the reasonableness subclaim of C1",
        lambda text: remove_block(text, "reasonableness SC1 {"),
    ),
    Mutation(
        "E003",
        "golden_cat.aur",
        "delete the satisfaction subclaim of C1",
        lambda text: remove_block(text, "satisfaction SC2 {"),
    ),
    Mutation(
        "E004",
        "golden_cat.aur",
        "delete the coverage assessment under SC2",
        lambda text: remove_block(text, "coverage_assessment {"),
    ),
    Mutation(
        "E005",
        "golden_cat.aur",
        "delete the confidence assessment under SC2",
        lambda text: remove_block(text, "confidence_assessment {"),
    ),
    Mutation(
        "E006",
        "golden_cat.aur",
        "drop the evidence link from row B.1",
        lambda text: remove_line(text, "          evidence = E1\n"),
    ),
    Mutation(
        "E007",
        "golden_cat.aur",
        "declare a hazard no criterion covers",
        lambda text: append_block(text, _EXTRA_HAZARD),
    ),
    Mutation(
        "E008",
        "golden_cat.aur",
        "dangle a reference while the config demands a resolved case",
        lambda text: replace_once(text, "indicator = I1, I2", "indicator = I1, I2, I9"),
        config=RuleConfig(require_resolved=True),
    ),
    Mutation(
        "E009",
        "golden_cat.aur",
        "reference an indicator that does not exist",
        lambda text: replace_once(text, "indicator = I1, I2", "indicator = I1, I2, I9"),
    ),
    Mutation(
        "E010",
        "golden_cat.aur",
        "declare hazard H1 twice",
        lambda text: append_block(text, _DUPLICATE_HAZARD),
    ),
    Mutation(
        "E011",
        "golden_cat.aur",
        "blank the deployment scale on a review-ready case",
        lambda text: replace_once(
            text,
            'deployment_scale = "Up to 400 vehicles, about one million miles per quarter"',
            'deployment_scale = ""',
        ),
        config=RuleConfig(review_ready=True),
    ),
    Mutation(
        "E012",
        "golden_cat.aur",
        "declare a criterion no claim argues for",
        lambda text: append_block(text, _UNCLAIMED_CRITERION),
    ),
    Mutation(
        "E013",
        "golden_cat.aur",
        "truncate the document before the final closing brace",
        lambda text: text.rstrip()[:-1],
    ),
    Mutation(
        "W101",
        "golden_cat.aur",
        "drop the counter-argument from row A.1",
        lambda text: remove_line(
            text, "counter = \"A per-scenario pass requirement was rejected"
        ),
    ),
    Mutation(
        "W102",
        "golden_cat.aur",
        "drop the limitations from row A.1",
        lambda text: remove_line(
            text, "limitations = \"Aggregate scoring does not disposition single events"
        ),
    ),
    Mutation(
        "W103",
        "golden_cat.aur",
        "declare evidence nothing cites",
        lambda text: append_block(text, _ORPHAN_EVIDENCE),
    ),
    Mutation(
        "W104",
        "golden_min.aur",
        "make the event-level criterion aggregate-level",
        lambda text: replace_once(
            text, "aggregation = event_level", "aggregation = aggregate_level"
        ),
    ),
    Mutation(
        "W105",
        "golden_min.aur",
        "make the aggregate-level criterion event-level",
        lambda text: replace_once(
            text, "aggregation = aggregate_level", "aggregation = event_level"
        ),
    ),
    Mutation(
        "W106",
        "golden_cat.aur",
        "shrink the campaign region below the coverage threshold",
        lambda text: replace_once(text, "severity = S0..S3", "severity = S1..S3"),
        config=RuleConfig(coverage_threshold=0.04),
    ),
    Mutation(
        "W107",
        "golden_cat.aur",
        "remove a facet the config requires",
        lambda text: remove_block(text, 'facet "Scoring confidence" {'),
        config=RuleConfig(required_facets=frozenset({"Scoring confidence"})),
    ),
)
