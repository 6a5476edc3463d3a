"""Release exposure ledger, rate-bound target checks, and readiness gating.

Quantitative validation targets cap an event rate per exposure unit at a
stated one-sided confidence.  The check uses the exact Poisson upper
bound: the smallest rate ``lam`` such that observing at most ``count``
events has probability ``1 - confidence`` under a Poisson law with mean
``lam * exposure``.  With zero events this has the closed form
``-ln(1 - confidence) / exposure``; otherwise the bound is bisected on the
Poisson CDF to 1e-9 relative width.  More exposure at the same count
always tightens the bound, which is what lets confidence grow with scale.

The readiness gate is deliberately wider than the rate checks alone: it
blocks on any error-severity structural finding and on incomplete
operational context, not just on unmet targets.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from math import log
from typing import Mapping, TYPE_CHECKING

from .model import (
    AcceptanceCriterion,
    SafetyCase,
    TargetKind,
    UnresolvedCaseError,
    resolve_references,
)

if TYPE_CHECKING:
    from .rules import RuleConfig

_BOUND_REL_TOL = 1e-9


class Phase(enum.Enum):
    PREDICTED = "predicted"
    OBSERVED = "observed"


class TargetStatus(enum.Enum):
    MET = "met"
    UNMET = "unmet"
    INSUFFICIENT_DATA = "insufficient_data"


class DriftStatus(enum.Enum):
    DRIFT = "drift"
    NO_DRIFT = "no_drift"
    INSUFFICIENT_DATA = "insufficient_data"


@dataclass(frozen=True)
class LedgerEntry:
    """Exposure and event counts for one release in one phase."""

    release: str
    phase: Phase
    exposure: float
    exposure_unit: str
    event_counts: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.exposure > 0:
            raise ValueError(f"ledger entry {self.release}: exposure must be > 0")
        for definition, count in self.event_counts.items():
            if count < 0:
                raise ValueError(
                    f"ledger entry {self.release}: negative count for {definition!r}"
                )
        object.__setattr__(self, "event_counts", dict(self.event_counts))


@dataclass(frozen=True)
class ExposureLedger:
    entries: tuple[LedgerEntry, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))
        seen: set[tuple[str, Phase]] = set()
        for entry in self.entries:
            key = (entry.release, entry.phase)
            if key in seen:
                raise ValueError(
                    f"release {entry.release} appears twice in phase {entry.phase.value}"
                )
            seen.add(key)

    def for_phase(self, phase: Phase) -> tuple[LedgerEntry, ...]:
        return tuple(e for e in self.entries if e.phase is phase)


LEDGER_COLUMNS = ("release", "phase", "exposure", "exposure_unit", "event_definition", "count")


def parse_ledger(text: str) -> ExposureLedger:
    """Read the comma-separated ledger format.

    One row per (release, phase, event definition); rows for the same
    release and phase must agree on exposure and unit, and merge into one
    entry.  No unit conversion is ever attempted.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise ValueError("ledger is empty; expected a header line")
    header = tuple(cell.strip() for cell in rows[0])
    if header != LEDGER_COLUMNS:
        raise ValueError(
            f"ledger header must be {','.join(LEDGER_COLUMNS)}, got {','.join(header)}"
        )
    grouped: dict[tuple[str, Phase], dict] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(LEDGER_COLUMNS):
            raise ValueError(f"ledger line {line_no}: expected {len(LEDGER_COLUMNS)} fields")
        release, phase_text, exposure_text, unit, definition, count_text = (
            cell.strip() for cell in row
        )
        try:
            phase = Phase(phase_text)
        except ValueError:
            raise ValueError(
                f"ledger line {line_no}: phase must be 'predicted' or 'observed', "
                f"got {phase_text!r}"
            ) from None
        try:
            exposure = float(exposure_text)
        except ValueError:
            raise ValueError(f"ledger line {line_no}: bad exposure {exposure_text!r}") from None
        try:
            count = int(count_text)
        except ValueError:
            raise ValueError(f"ledger line {line_no}: bad count {count_text!r}") from None
        group = grouped.setdefault(
            (release, phase),
            {"exposure": exposure, "unit": unit, "counts": {}, "line": line_no},
        )
        if group["exposure"] != exposure or group["unit"] != unit:
            raise ValueError(
                f"ledger line {line_no}: exposure for release {release!r} "
                f"({phase.value}) conflicts with line {group['line']}"
            )
        if definition in group["counts"]:
            raise ValueError(
                f"ledger line {line_no}: duplicate event definition {definition!r} "
                f"for release {release!r} ({phase.value})"
            )
        group["counts"][definition] = count
    entries = tuple(
        LedgerEntry(
            release=release,
            phase=phase,
            exposure=group["exposure"],
            exposure_unit=group["unit"],
            event_counts=group["counts"],
        )
        for (release, phase), group in grouped.items()
    )
    return ExposureLedger(entries=entries)


def rate_upper_bound(count: int, exposure: float, confidence: float) -> float:
    """Exact one-sided upper confidence bound on a Poisson event rate.

    Returns the smallest rate ``lam`` with
    ``P(X <= count | mean = lam * exposure) = 1 - confidence``.
    """
    if not isinstance(count, int) or isinstance(count, bool) or count < 0:
        raise ValueError("count must be a non-negative integer")
    if not exposure > 0:
        raise ValueError("exposure must be > 0")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    if count == 0:
        return -log(1.0 - confidence) / exposure

    from scipy.stats import poisson  # deferred: keeps CLI startup light

    tail = 1.0 - confidence
    lo = 0.0
    hi = (count + 1.0) / exposure
    while poisson.cdf(count, hi * exposure) > tail:
        hi *= 2.0
    while hi - lo > _BOUND_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if poisson.cdf(count, mid * exposure) > tail:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TargetCheck:
    """Outcome of checking one criterion's rate bound against the ledger."""

    criterion_id: str
    status: TargetStatus
    target: float
    upper_bound: float | None = None
    exposure: float = 0.0
    count: int = 0

    def __post_init__(self) -> None:
        if self.upper_bound is not None:
            met = self.upper_bound <= self.target
            if met != (self.status is TargetStatus.MET):
                raise ValueError("status must agree with upper_bound vs target")


class TargetNotApplicableError(ValueError):
    """The criterion carries no quantitative target to check."""


def check_target(
    criterion: AcceptanceCriterion, ledger: ExposureLedger, phase: Phase
) -> TargetCheck:
    """Check a rate-bound target against the summed exposure of one phase.

    Every entry of the phase contributes its exposure; counts contribute
    where the event definition matches the target's exactly.  Entries in a
    different exposure unit are a configuration error, not convertible.
    """
    target = criterion.target
    if target is None or target.kind is not TargetKind.RATE_BOUND:
        raise TargetNotApplicableError(
            f"criterion {criterion.id} has no rate-bound target"
        )
    entries = ledger.for_phase(phase)
    if not entries:
        return TargetCheck(
            criterion_id=criterion.id,
            status=TargetStatus.INSUFFICIENT_DATA,
            target=target.max_rate,
        )
    for entry in entries:
        if entry.exposure_unit != target.exposure_unit:
            raise ValueError(
                f"criterion {criterion.id}: ledger exposure unit "
                f"{entry.exposure_unit!r} does not match target unit "
                f"{target.exposure_unit!r} (no unit conversion)"
            )
    exposure = sum(entry.exposure for entry in entries)
    count = sum(entry.event_counts.get(target.event_definition, 0) for entry in entries)
    bound = rate_upper_bound(count, exposure, target.confidence)
    status = TargetStatus.MET if bound <= target.max_rate else TargetStatus.UNMET
    return TargetCheck(
        criterion_id=criterion.id,
        status=status,
        target=target.max_rate,
        upper_bound=bound,
        exposure=exposure,
        count=count,
    )


@dataclass(frozen=True)
class DriftCheck:
    """Whether post-deployment observation still satisfies a target that
    pre-deployment prediction satisfied."""

    criterion_id: str
    status: DriftStatus
    target: float
    observed_upper_bound: float | None = None
    predicted_upper_bound: float | None = None


def drift_check(criterion: AcceptanceCriterion, ledger: ExposureLedger) -> DriftCheck:
    """Flag drift when the observed-phase upper bound exceeds the target."""
    target = criterion.target
    if target is None or target.kind is not TargetKind.RATE_BOUND:
        raise TargetNotApplicableError(
            f"criterion {criterion.id} has no rate-bound target"
        )
    observed = check_target(criterion, ledger, Phase.OBSERVED)
    if observed.status is TargetStatus.INSUFFICIENT_DATA:
        return DriftCheck(
            criterion_id=criterion.id,
            status=DriftStatus.INSUFFICIENT_DATA,
            target=target.max_rate,
        )
    predicted_bound: float | None = None
    if ledger.for_phase(Phase.PREDICTED):
        predicted_bound = check_target(criterion, ledger, Phase.PREDICTED).upper_bound
    drifted = observed.upper_bound is not None and observed.upper_bound > target.max_rate
    return DriftCheck(
        criterion_id=criterion.id,
        status=DriftStatus.DRIFT if drifted else DriftStatus.NO_DRIFT,
        target=target.max_rate,
        observed_upper_bound=observed.upper_bound,
        predicted_upper_bound=predicted_bound,
    )


@dataclass(frozen=True)
class Blocker:
    subject_id: str
    reason: str


@dataclass(frozen=True)
class ReadinessDecision:
    blockers: tuple[Blocker, ...] = ()
    target_checks: tuple[TargetCheck, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "blockers", tuple(self.blockers))
        object.__setattr__(self, "target_checks", tuple(self.target_checks))

    @property
    def approved(self) -> bool:
        return not self.blockers

    @property
    def status(self) -> str:
        return "approved" if self.approved else "blocked"


def quantitative_criteria(case: SafetyCase) -> list[AcceptanceCriterion]:
    return [
        c
        for c in case.criteria
        if c.target is not None and c.target.kind is TargetKind.RATE_BOUND
    ]


def readiness_review(
    case: SafetyCase,
    ledger: ExposureLedger,
    config: "RuleConfig | None" = None,
) -> ReadinessDecision:
    """Gate a release: structural findings, context, and targets together.

    The decision is blocked by any error-severity diagnostic (context
    completeness included; a readiness review is by definition
    review-ready), and by any rate-bound target that predicted-phase data
    leaves unmet or cannot support.  Qualitative targets gate through the
    claim structure alone.  Blockers enumerate every cause.
    """
    from .rules import RuleConfig, validate  # deferred: keeps module import light

    config = config or RuleConfig()
    gate_config = config.replace(review_ready=True)

    blockers: list[Blocker] = []
    findings = resolve_references(case)
    if findings:
        blockers.append(
            Blocker(subject_id=case.id, reason=str(UnresolvedCaseError(findings)))
        )
        return ReadinessDecision(blockers=tuple(blockers))

    from .diagnostics import Severity

    for diagnostic in validate(case, gate_config):
        if diagnostic.severity is Severity.ERROR:
            blockers.append(
                Blocker(
                    subject_id=diagnostic.subject_id or case.id,
                    reason=f"[{diagnostic.rule_id}] {diagnostic.message}",
                )
            )

    checks: list[TargetCheck] = []
    for criterion in quantitative_criteria(case):
        try:
            check = check_target(criterion, ledger, Phase.PREDICTED)
        except ValueError as exc:
            blockers.append(Blocker(subject_id=criterion.id, reason=str(exc)))
            continue
        checks.append(check)
        if check.status is TargetStatus.UNMET:
            blockers.append(
                Blocker(
                    subject_id=criterion.id,
                    reason=(
                        f"target unmet: upper bound {check.upper_bound:.6g} per "
                        f"{criterion.target.exposure_unit} exceeds "
                        f"{check.target:.6g} at confidence "
                        f"{criterion.target.confidence}"
                    ),
                )
            )
        elif check.status is TargetStatus.INSUFFICIENT_DATA:
            blockers.append(
                Blocker(
                    subject_id=criterion.id,
                    reason="no predicted-phase exposure recorded for this target",
                )
            )
    return ReadinessDecision(blockers=tuple(blockers), target_checks=tuple(checks))
