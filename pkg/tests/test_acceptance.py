"""Acceptance suite.

One test per acceptance criterion, each printing a pass/fail line and
enforcing its stated tolerance and runtime budget.  Oracles (direct CDF
summation, separately written bisection, nested-loop cell enumeration)
live in `oracles.py` and never call the code paths they check.
"""

from __future__ import annotations

import functools
import math
import random
import re
import subprocess
import sys
import time
from hypothesis import HealthCheck, given, settings

from aurcase.coverage import (
    FULL_REGION,
    BalanceClass,
    Signal,
    aggregation_balance,
    coverage_map,
    gap_report,
    region_cells,
)
from aurcase.diagnostics import Severity
from aurcase.dsl import parse, serialize
from aurcase.lifecycle import (
    ExposureLedger,
    LedgerEntry,
    Phase,
    TargetStatus,
    rate_upper_bound,
    readiness_review,
)
from aurcase.model import (
    AggregationLevel,
    BehavioralCapability,
    ConflictRole,
    FunctionalityStatus,
    SeverityLevel,
)
from aurcase.rules import RuleConfig, rule_catalog, validate

from conftest import FIXTURES, fixture_text, pipeline
from mutations import MUTATIONS
from oracles import enumerate_cells, upper_bound_bisect
from strategies import safety_cases


def criterion(label: str):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"[acceptance] {label}: FAIL", flush=True)
                raise
            print(f"[acceptance] {label}: PASS", flush=True)
            return result

        return wrapper

    return decorate


@criterion("1. AC-space cardinality (96 cells vs enumeration oracle, <1s)")
def test_criterion_1_space_cardinality():
    started = time.perf_counter()
    cells = region_cells(FULL_REGION)
    oracle = enumerate_cells(
        SeverityLevel,
        ConflictRole,
        BehavioralCapability,
        FunctionalityStatus,
        AggregationLevel,
    )
    elapsed = time.perf_counter() - started
    assert len(cells) == 96
    assert len(oracle) == 96
    assert {
        (c.severity, c.role, c.capability, c.status, c.aggregation) for c in cells
    } == oracle
    assert elapsed < 1.0, f"took {elapsed:.3f}s"


@criterion("2. worked-example coverage map (3 strong + 1 weak, exact)")
def test_criterion_2_worked_example_reproduction(golden_cat_text):
    case = parse(golden_cat_text, "golden_cat.aur").case
    coverage = coverage_map(case)
    strong = coverage.cells_with(Signal.STRONG)
    weak = coverage.cells_with(Signal.WEAK)
    assert len(strong) == 3 and len(weak) == 1
    for cell in strong | weak:
        assert cell.role is ConflictRole.RESPONDER
        assert cell.capability is BehavioralCapability.COLLISION_AVOIDANCE
        assert cell.status is FunctionalityStatus.NOMINAL
        assert cell.aggregation is AggregationLevel.AGGREGATE_LEVEL
    assert {c.severity for c in strong} == {
        SeverityLevel.S0,
        SeverityLevel.S1,
        SeverityLevel.S2,
    }
    assert {c.severity for c in weak} == {SeverityLevel.S3}
    gaps = gap_report(coverage)
    assert (gaps.marginals["role"]["initiator"].numerator,
            gaps.marginals["role"]["initiator"].denominator) == (0, 48)
    assert (gaps.covered.numerator, gaps.covered.denominator) == (4, 96)


@criterion("3. rule-mutation suite (20 registered rules, paired, <1s each)")
def test_criterion_3_rule_mutations():
    registered = [info.rule_id for info in rule_catalog()]
    covered = {mutation.rule_id for mutation in MUTATIONS}
    assert covered == set(registered)
    assert len(MUTATIONS) >= 17
    for mutation in MUTATIONS:
        started = time.perf_counter()
        base = fixture_text(mutation.base_fixture)
        assert pipeline(base, mutation.config) == [], mutation.rule_id
        mutated = pipeline(mutation.apply(base), mutation.config)
        elapsed = time.perf_counter() - started
        assert [d.rule_id for d in mutated] == [mutation.rule_id], (
            f"{mutation.rule_id}: {mutation.description} -> "
            f"{[d.rule_id for d in mutated]}"
        )
        assert elapsed < 1.0, f"{mutation.rule_id} took {elapsed:.3f}s"


@criterion("4. aggregation-balance quadrants (4 classes; none => E001)")
def test_criterion_4_balance_quadrants():
    expectations = {
        "golden_min.aur": BalanceClass.BALANCED,
        "balance_aggregate_only.aur": BalanceClass.AGGREGATE_ONLY,
        "balance_event_only.aur": BalanceClass.EVENT_ONLY,
        "balance_none.aur": BalanceClass.NONE,
    }
    seen = set()
    for fixture, expected in expectations.items():
        case = parse(fixture_text(fixture), fixture).case
        assert aggregation_balance(case) is expected, fixture
        seen.add(expected)
        if expected is BalanceClass.NONE:
            codes = [d.rule_id for d in pipeline(fixture_text(fixture))]
            assert codes == ["E001"]
    assert seen == set(BalanceClass)


@criterion("5. rate-bound oracle equivalence (counts 0-20, 1e-6 rel, <5s)")
def test_criterion_5_rate_bound_oracle_equivalence():
    closed_form = -math.log(0.05) / 1e6
    value = rate_upper_bound(0, 1e6, 0.95)
    assert abs(value - closed_form) / closed_form < 1e-9
    assert abs(closed_form - 2.99573e-6) / 2.99573e-6 < 1e-5

    started = time.perf_counter()
    worst = 0.0
    for count in range(0, 21):
        for exposure in (1e3, 1e4, 1e5, 1e6, 1e7):
            for confidence in (0.9, 0.95, 0.99):
                bound = rate_upper_bound(count, exposure, confidence)
                reference = upper_bound_bisect(count, exposure, confidence)
                worst = max(worst, abs(bound - reference) / reference)
    elapsed = time.perf_counter() - started
    assert worst < 1e-6, f"worst relative error {worst:.2e}"
    assert elapsed < 5.0, f"sweep took {elapsed:.3f}s"


@criterion("6. confidence growth (bound strictly decreasing, 1000 cases)")
def test_criterion_6_confidence_growth():
    rng = random.Random(6021023)
    for _ in range(1000):
        low = rng.uniform(1.0, 1e8)
        high = low * rng.uniform(1.0 + 1e-6, 1e4)
        confidence = rng.uniform(0.5, 0.999)
        assert rate_upper_bound(0, high, confidence) < rate_upper_bound(
            0, low, confidence
        )


@settings(
    max_examples=1000,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
@given(case=safety_cases())
def _round_trip_property(case):
    rendered = serialize(case)
    result = parse(rendered, "round.aur")
    assert not result.fatal, result.diagnostics
    assert result.diagnostics == ()
    assert result.case == case


@criterion("7. round-trip x1000 and 10000-input fuzz (no crashes)")
def test_criterion_7_round_trip_and_fuzz():
    _round_trip_property()
    rng = random.Random(7001)
    for _ in range(10_000):
        blob = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 120)))
        result = parse(blob, "fuzz.aur")
        assert result.case is not None or len(result.diagnostics) >= 1


@criterion("8. gate implication (approved => no errors and targets met)")
def test_criterion_8_gate_implication(golden_cat_text, golden_min_text):
    corpus = [
        parse(golden_cat_text, "golden_cat.aur").case,
        parse(golden_min_text, "golden_min.aur").case,
    ]
    for mutation in MUTATIONS:
        if mutation.rule_id in ("E010", "E013"):
            continue  # parse-fatal: no case to review
        result = parse(mutation.apply(fixture_text(mutation.base_fixture)), "m.aur")
        if result.case is not None:
            corpus.append(result.case)

    rng = random.Random(8001)
    approvals = 0
    for case in corpus:
        for _ in range(8):
            entries = []
            for index in range(rng.randrange(0, 3)):
                entries.append(
                    LedgerEntry(
                        release=f"r{index}",
                        phase=rng.choice(list(Phase)),
                        exposure=10 ** rng.uniform(3, 7),
                        exposure_unit="mi",
                        event_counts={"injury-causing collision": rng.randrange(0, 3)},
                    )
                )
            ledger = ExposureLedger(entries=tuple(entries))
            decision = readiness_review(case, ledger)
            if not decision.approved:
                continue
            approvals += 1
            errors = [
                d
                for d in validate(case, RuleConfig(review_ready=True))
                if d.severity is Severity.ERROR
            ]
            assert errors == [], case.id
            assert all(
                check.status is TargetStatus.MET for check in decision.target_checks
            )
    assert approvals > 0, "property would be vacuous: no approved decision in corpus"


@criterion("9. end-to-end report run (golden byte-match, exit 0, <2s)")
def test_criterion_9_end_to_end(tmp_path):
    out_dir = tmp_path / "out"
    command = [
        sys.executable,
        "-m",
        "aurcase.cli",
        "report",
        "golden_cat.aur",
        "--ledger",
        "golden.ledger",
        "--out",
        str(out_dir),
    ]
    started = time.perf_counter()
    completed = subprocess.run(
        command, cwd=FIXTURES, capture_output=True, text=True, timeout=30
    )
    elapsed = time.perf_counter() - started
    assert completed.returncode == 0, completed.stderr
    assert elapsed < 2.0, f"took {elapsed:.3f}s"

    golden_dir = FIXTURES / "golden_out"
    for name in ("report.txt", "heatmap.svg", "trace.txt"):
        assert (out_dir / name).read_bytes() == (golden_dir / name).read_bytes(), name
    strip = lambda s: re.sub(r'"generated_at": "[^"]*"', "", s)  # noqa: E731
    assert strip((out_dir / "report.json").read_text()) == strip(
        (golden_dir / "report.json").read_text()
    )
