"""Region algebra over the discretized acceptance-criteria space.

The behavioral space is the cartesian product of five dimensions
(4 severities x 2 roles x 3 capabilities x 2 statuses x 2 aggregation
levels = 96 cells).  Methodology regions are rectangular subsets; the
case-wide coverage map joins their per-cell signal (none < weak < strong)
and the gap report summarizes what remains uncovered, per dimension value.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .model import (
    AcSpaceRegion,
    AggregationLevel,
    BehavioralCapability,
    Cell,
    ConflictRole,
    FunctionalityStatus,
    HazardCategory,
    SafetyCase,
    SeverityLevel,
    require_resolved,
)

DIMENSIONS: dict[str, tuple] = {
    "severity": tuple(SeverityLevel),
    "role": tuple(ConflictRole),
    "capability": tuple(BehavioralCapability),
    "status": tuple(FunctionalityStatus),
    "aggregation": tuple(AggregationLevel),
}

FULL_SPACE: tuple[Cell, ...] = tuple(
    Cell(*combo)
    for combo in itertools.product(
        tuple(SeverityLevel),
        tuple(ConflictRole),
        tuple(BehavioralCapability),
        tuple(FunctionalityStatus),
        tuple(AggregationLevel),
    )
)

FULL_REGION = AcSpaceRegion(
    severities=frozenset(SeverityLevel),
    roles=frozenset(ConflictRole),
    capabilities=frozenset(BehavioralCapability),
    statuses=frozenset(FunctionalityStatus),
    aggregations=frozenset(AggregationLevel),
)


class InvalidRegionError(ValueError):
    """A region with an empty dimension set covers nothing and is invalid."""


class Signal(enum.IntEnum):
    """Per-cell signal strength; a lattice with join = max."""

    NONE = 0
    WEAK = 1
    STRONG = 2


class BalanceClass(enum.Enum):
    """Which aggregation levels the behavioral criteria exercise."""

    BALANCED = "balanced"
    AGGREGATE_ONLY = "aggregate_only"
    EVENT_ONLY = "event_only"
    NONE = "none"

    @property
    def advisory(self) -> str:
        return _BALANCE_ADVISORIES[self]


_BALANCE_ADVISORIES = {
    BalanceClass.BALANCED: (
        "event-level and aggregate-level criteria are both present; risk in "
        "individual scenarios and overall residual risk are both addressed"
    ),
    BalanceClass.AGGREGATE_ONLY: (
        "only aggregate-level criteria are stated; aggregate rates can miss "
        "risk the system poses in individual scenarios"
    ),
    BalanceClass.EVENT_ONLY: (
        "only event-level criteria are stated; individual instances alone "
        "cannot bound residual risk across the full operating space"
    ),
    BalanceClass.NONE: (
        "no behavioral acceptance criteria are stated; no argumentation is "
        "possible without them"
    ),
}


def region_cells(region: AcSpaceRegion) -> frozenset[Cell]:
    """Expand a region to the exact set of cells it covers.

    Raises `InvalidRegionError` if any dimension set is empty (the
    cartesian product would be empty, which no valid region is).
    """
    for name, values in region.dimension_sets.items():
        if not values:
            raise InvalidRegionError(f"invalid region: empty dimension set '{name}'")
    return frozenset(
        Cell(sev, role, cap, status, agg)
        for sev in region.severities
        for role in region.roles
        for cap in region.capabilities
        for status in region.statuses
        for agg in region.aggregations
    )


@dataclass(frozen=True)
class CoverageMap:
    """Cell -> signal over the full space, with contributing methodologies.

    Only covered cells are stored; `signal()` reads NONE for the rest.
    """

    signals: Mapping[Cell, Signal] = field(default_factory=dict)
    contributors: Mapping[Cell, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cell, sig in self.signals.items():
            if sig is Signal.NONE:
                raise ValueError("covered-cell map must not store NONE signals")
            if not self.contributors.get(cell):
                raise ValueError(f"covered cell {cell} has no contributors")
        for cell in self.contributors:
            if cell not in self.signals:
                raise ValueError(f"contributors recorded for uncovered cell {cell}")

    def signal(self, cell: Cell) -> Signal:
        return self.signals.get(cell, Signal.NONE)

    def cells_with(self, sig: Signal) -> frozenset[Cell]:
        if sig is Signal.NONE:
            return frozenset(c for c in FULL_SPACE if c not in self.signals)
        return frozenset(c for c, s in self.signals.items() if s is sig)


def coverage_map(case: SafetyCase) -> CoverageMap:
    """Join every behavioral methodology's region into one per-cell map.

    A cell is strong if any methodology covers it outside that
    methodology's weak sub-region, weak if it is only covered weakly, and
    uncovered otherwise.  Contributors list every covering methodology,
    weak or strong.
    """
    require_resolved(case)
    signals: dict[Cell, Signal] = {}
    contributors: dict[Cell, set[str]] = {}
    for methodology in case.methodologies:
        if methodology.region is None:
            continue
        for cell in region_cells(methodology.region):
            sig = Signal.WEAK if cell in methodology.region.weak_cells else Signal.STRONG
            signals[cell] = max(signals.get(cell, Signal.NONE), sig)
            contributors.setdefault(cell, set()).add(methodology.id)
    return CoverageMap(
        signals=signals,
        contributors={cell: frozenset(ids) for cell, ids in contributors.items()},
    )


@dataclass(frozen=True)
class Fraction:
    """An exact cell-count ratio; reports never round these."""

    numerator: int
    denominator: int

    @property
    def value(self) -> float:
        return self.numerator / self.denominator if self.denominator else 0.0

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class GapReport:
    """What the coverage map leaves uncovered, overall and per dimension."""

    covered: Fraction
    strong: Fraction
    uncovered: tuple[Cell, ...]
    marginals: Mapping[str, Mapping[str, Fraction]]

    def uncovered_by_dimension(self) -> dict[str, dict[str, tuple[Cell, ...]]]:
        """Group the uncovered cells by each dimension value they fall under."""
        grouped: dict[str, dict[str, list[Cell]]] = {
            dim: {_value_name(v): [] for v in values} for dim, values in DIMENSIONS.items()
        }
        for cell in self.uncovered:
            grouped["severity"][cell.severity.name].append(cell)
            grouped["role"][cell.role.value].append(cell)
            grouped["capability"][cell.capability.value].append(cell)
            grouped["status"][cell.status.value].append(cell)
            grouped["aggregation"][cell.aggregation.value].append(cell)
        return {
            dim: {name: tuple(cells) for name, cells in by_value.items()}
            for dim, by_value in grouped.items()
        }


def _value_name(value) -> str:
    return value.name if isinstance(value, SeverityLevel) else value.value


def _cell_value(cell: Cell, dimension: str):
    return getattr(cell, dimension)


def gap_report(coverage: CoverageMap) -> GapReport:
    total = len(FULL_SPACE)
    covered_cells = [c for c in FULL_SPACE if coverage.signal(c) is not Signal.NONE]
    strong_cells = [c for c in FULL_SPACE if coverage.signal(c) is Signal.STRONG]
    uncovered = tuple(
        sorted(
            (c for c in FULL_SPACE if coverage.signal(c) is Signal.NONE),
            key=Cell.sort_key,
        )
    )
    marginals: dict[str, dict[str, Fraction]] = {}
    for dimension, values in DIMENSIONS.items():
        per_value: dict[str, Fraction] = {}
        for value in values:
            cells = [c for c in FULL_SPACE if _cell_value(c, dimension) is value]
            hit = sum(1 for c in cells if coverage.signal(c) is not Signal.NONE)
            per_value[_value_name(value)] = Fraction(hit, len(cells))
        marginals[dimension] = per_value
    return GapReport(
        covered=Fraction(len(covered_cells), total),
        strong=Fraction(len(strong_cells), total),
        uncovered=uncovered,
        marginals=marginals,
    )


def behavioral_criteria(case: SafetyCase) -> list:
    """Criteria that address at least one hazard carrying the behavioral
    category (hazards count under every category they carry)."""
    hazards = case.hazard_map()
    return [
        criterion
        for criterion in case.criteria
        if any(
            HazardCategory.BEHAVIORAL in hazards[h].categories
            for h in criterion.hazard_ids
            if h in hazards
        )
    ]


def classify_levels(levels: set[AggregationLevel]) -> BalanceClass:
    """Map a set of aggregation levels onto its quadrant."""
    if not levels:
        return BalanceClass.NONE
    if levels == {AggregationLevel.EVENT_LEVEL, AggregationLevel.AGGREGATE_LEVEL}:
        return BalanceClass.BALANCED
    if levels == {AggregationLevel.AGGREGATE_LEVEL}:
        return BalanceClass.AGGREGATE_ONLY
    return BalanceClass.EVENT_ONLY


def aggregation_balance(case: SafetyCase) -> BalanceClass:
    """Classify which aggregation levels the behavioral criteria exercise.

    Depends only on the multiset of aggregation levels, so reordering or
    duplicating criteria cannot change the class.
    """
    require_resolved(case)
    return classify_levels(
        {criterion.aggregation for criterion in behavioral_criteria(case)}
    )


def criteria_by_category(case: SafetyCase) -> dict[HazardCategory, int]:
    """Count criteria per hazard category (a criterion counts under every
    category its hazards carry).  Only the behavioral category has a
    defined evaluation space; the others are reported by count and
    traceability alone."""
    hazards = case.hazard_map()
    counts = {category: 0 for category in HazardCategory}
    for criterion in case.criteria:
        categories: set[HazardCategory] = set()
        for hazard_id in criterion.hazard_ids:
            if hazard_id in hazards:
                categories |= hazards[hazard_id].categories
        for category in categories:
            counts[category] += 1
    return counts
