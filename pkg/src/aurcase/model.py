"""Core domain model for ADS safety cases.

Pure, immutable data types: hazards, methodologies, indicators, acceptance
criteria with validation targets, claim trees with argument rows, and
evidence.  Construction enforces local invariants (identifier uniqueness,
enum membership, claim-tree shape); cross-reference resolution is a separate
check (`resolve_references`) so that a draft case with dangling references
can still be represented and reported on.

No parsing or I/O lives here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator


class HazardCategory(enum.Enum):
    """The three hazard categories a safety case decomposes risk into."""

    ARCHITECTURAL = "architectural"
    BEHAVIORAL = "behavioral"
    IN_SERVICE_OPERATIONAL = "in_service_operational"


class CausalStage(enum.IntEnum):
    """Ordered stages on the causal chain, from scenario triggering
    conditions through to the manifestation of harm."""

    TRIGGERING_CONDITION = 0
    HAZARDOUS_BEHAVIOR = 1
    HAZARD = 2
    HAZARDOUS_EVENT = 3
    HARM = 4


class IndicatorKind(enum.Enum):
    LEADING = "leading"
    LAGGING = "lagging"


class SeverityLevel(enum.IntEnum):
    """Discretized severity potential, S0 (lowest) through S3 (highest)."""

    S0 = 0
    S1 = 1
    S2 = 2
    S3 = 3


class ConflictRole(enum.Enum):
    INITIATOR = "initiator"
    RESPONDER = "responder"


class BehavioralCapability(enum.Enum):
    REGULATORY_COMPLIANCE = "regulatory_compliance"
    CONFLICT_AVOIDANCE = "conflict_avoidance"
    COLLISION_AVOIDANCE = "collision_avoidance"


class FunctionalityStatus(enum.Enum):
    NOMINAL = "nominal"
    DEGRADED = "degraded"


class AggregationLevel(enum.Enum):
    EVENT_LEVEL = "event_level"
    AGGREGATE_LEVEL = "aggregate_level"


class EvidenceStrength(enum.Enum):
    STRONG = "strong"
    WEAK = "weak"


class TargetKind(enum.Enum):
    QUALITATIVE = "qualitative"
    RATE_BOUND = "rate_bound"


class ClaimKind(enum.Enum):
    TOP_CLAIM = "top_claim"
    REASONABLENESS = "reasonableness"
    SATISFACTION = "satisfaction"
    COVERAGE_ASSESSMENT = "coverage_assessment"
    CONFIDENCE_ASSESSMENT = "confidence_assessment"
    FACET = "facet"


# Which claim kinds may appear as direct children of which parent kind.
# Depth below facets is unconstrained, so a facet may nest facets.
_ALLOWED_CHILDREN: dict[ClaimKind, frozenset[ClaimKind]] = {
    ClaimKind.TOP_CLAIM: frozenset({ClaimKind.REASONABLENESS, ClaimKind.SATISFACTION}),
    ClaimKind.REASONABLENESS: frozenset(),
    ClaimKind.SATISFACTION: frozenset(
        {ClaimKind.COVERAGE_ASSESSMENT, ClaimKind.CONFIDENCE_ASSESSMENT}
    ),
    ClaimKind.COVERAGE_ASSESSMENT: frozenset(),
    ClaimKind.CONFIDENCE_ASSESSMENT: frozenset({ClaimKind.FACET}),
    ClaimKind.FACET: frozenset({ClaimKind.FACET}),
}

# DSL / ledger spellings for each enum, in canonical order.
STAGE_NAMES = {s.name.lower(): s for s in CausalStage}
CATEGORY_NAMES = {c.value: c for c in HazardCategory}
SEVERITY_NAMES = {s.name: s for s in SeverityLevel}
ROLE_NAMES = {r.value: r for r in ConflictRole}
CAPABILITY_NAMES = {c.value: c for c in BehavioralCapability}
STATUS_NAMES = {s.value: s for s in FunctionalityStatus}
AGGREGATION_NAMES = {a.value: a for a in AggregationLevel}


class ModelError(ValueError):
    """A constructed value violates a model invariant."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ModelError(message)


@dataclass(frozen=True)
class Cell:
    """One point of the discretized behavioral acceptance-criteria space."""

    severity: SeverityLevel
    role: ConflictRole
    capability: BehavioralCapability
    status: FunctionalityStatus
    aggregation: AggregationLevel

    def sort_key(self) -> tuple[int, ...]:
        return (
            self.severity.value,
            list(ConflictRole).index(self.role),
            list(BehavioralCapability).index(self.capability),
            list(FunctionalityStatus).index(self.status),
            list(AggregationLevel).index(self.aggregation),
        )

    def __str__(self) -> str:
        return (
            f"({self.severity.name}, {self.role.value}, {self.capability.value}, "
            f"{self.status.value}, {self.aggregation.value})"
        )


@dataclass(frozen=True)
class AcSpaceRegion:
    """A rectangular subset of the 5D acceptance-criteria space.

    Dimension sets may be empty on a draft region; `coverage.region_cells`
    rejects such regions rather than the constructor, so that validity can
    be reported instead of raised.  `weak_cells` marks the sub-region where
    only weak signal is available and must lie inside the region.
    """

    severities: frozenset[SeverityLevel] = frozenset()
    roles: frozenset[ConflictRole] = frozenset()
    capabilities: frozenset[BehavioralCapability] = frozenset()
    statuses: frozenset[FunctionalityStatus] = frozenset()
    aggregations: frozenset[AggregationLevel] = frozenset()
    weak_cells: frozenset[Cell] = frozenset()

    def __post_init__(self) -> None:
        for name, value in (
            ("severities", self.severities),
            ("roles", self.roles),
            ("capabilities", self.capabilities),
            ("statuses", self.statuses),
            ("aggregations", self.aggregations),
            ("weak_cells", self.weak_cells),
        ):
            object.__setattr__(self, name, frozenset(value))
        if self.weak_cells:
            inside = {
                c
                for c in self.weak_cells
                if c.severity in self.severities
                and c.role in self.roles
                and c.capability in self.capabilities
                and c.status in self.statuses
                and c.aggregation in self.aggregations
            }
            _require(
                inside == self.weak_cells,
                "weak_cells must be a subset of the region's own cells",
            )

    @property
    def dimension_sets(self) -> dict[str, frozenset]:
        return {
            "severity": self.severities,
            "role": self.roles,
            "capability": self.capabilities,
            "status": self.statuses,
            "aggregation": self.aggregations,
        }

    def contains(self, cell: Cell) -> bool:
        return (
            cell.severity in self.severities
            and cell.role in self.roles
            and cell.capability in self.capabilities
            and cell.status in self.statuses
            and cell.aggregation in self.aggregations
        )


@dataclass(frozen=True)
class ContextBlock:
    """Operational context the whole case is scoped to.

    The four lifecycle fields (vehicle configuration, operational
    configuration, ODD selection, deployment scale) must be non-empty once
    a case is reviewed as release-ready; drafts may leave them blank.
    """

    use_case: str = ""
    vehicle_configuration: str = ""
    operational_configuration: str = ""
    odd_selection: str = ""
    deployment_scale: str = ""
    platform: str = ""
    release: str = ""

    FIELD_ORDER = (
        "use_case",
        "vehicle_configuration",
        "operational_configuration",
        "odd_selection",
        "deployment_scale",
        "platform",
        "release",
    )
    # The fields a review-ready case may not leave blank.
    LIFECYCLE_FIELDS = (
        "vehicle_configuration",
        "operational_configuration",
        "odd_selection",
        "deployment_scale",
    )


@dataclass(frozen=True)
class Hazard:
    id: str
    description: str
    primary_category: HazardCategory
    secondary_categories: frozenset[HazardCategory] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "secondary_categories", frozenset(self.secondary_categories)
        )
        _require(
            self.primary_category not in self.secondary_categories,
            f"hazard {self.id}: primary category repeated in secondary categories",
        )

    @property
    def categories(self) -> frozenset[HazardCategory]:
        """All categories the hazard carries; it counts under each of them."""
        return self.secondary_categories | {self.primary_category}


@dataclass(frozen=True)
class Indicator:
    id: str
    description: str
    causal_stage: CausalStage


@dataclass(frozen=True)
class Methodology:
    id: str
    name: str
    hazard_categories: frozenset[HazardCategory] = frozenset()
    region: AcSpaceRegion | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "hazard_categories", frozenset(self.hazard_categories))
        if self.region is not None:
            _require(
                HazardCategory.BEHAVIORAL in self.hazard_categories,
                f"methodology {self.id}: an acceptance-criteria region is only "
                "defined for the behavioral hazard category",
            )


@dataclass(frozen=True)
class ValidationTarget:
    """The value against which satisfaction of a criterion is judged.

    A rate bound caps the event rate (events per `exposure_unit`) that may
    be claimed at the stated one-sided confidence level.
    """

    kind: TargetKind
    description: str = ""
    event_definition: str = ""
    max_rate: float = 0.0
    exposure_unit: str = ""
    confidence: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is TargetKind.RATE_BOUND:
            _require(self.max_rate > 0, "rate_bound target: max_rate must be > 0")
            _require(
                0.0 < self.confidence < 1.0,
                "rate_bound target: confidence must lie in (0, 1)",
            )
            _require(
                bool(self.event_definition),
                "rate_bound target: event_definition must be non-empty",
            )
            _require(
                bool(self.exposure_unit),
                "rate_bound target: exposure_unit must be non-empty",
            )


@dataclass(frozen=True)
class AcceptanceCriterion:
    id: str
    statement: str
    hazard_ids: frozenset[str]
    methodology_id: str
    aggregation: AggregationLevel
    indicator_ids: frozenset[str] = frozenset()
    region: AcSpaceRegion | None = None
    target: ValidationTarget | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "hazard_ids", frozenset(self.hazard_ids))
        object.__setattr__(self, "indicator_ids", frozenset(self.indicator_ids))
        _require(
            len(self.hazard_ids) > 0,
            f"criterion {self.id}: must cover at least one identified hazard",
        )
        if self.region is not None:
            _require(
                self.aggregation in self.region.aggregations,
                f"criterion {self.id}: aggregation level {self.aggregation.value} "
                "is outside the criterion's own region",
            )


@dataclass(frozen=True)
class ArgumentRow:
    """One row of the tabular argument: the argument text, the evidence it
    cites, and the self-critical columns (limitations, counter-argument)."""

    label: str
    argument: str
    evidence_ids: frozenset[str] = frozenset()
    limitations: str = ""
    counter_argument: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "evidence_ids", frozenset(self.evidence_ids))
        _require(bool(self.argument), f"argument row {self.label}: text must be non-empty")


@dataclass(frozen=True)
class ClaimNode:
    """A node of the claim tree.

    Roots are `top_claim` nodes bound to exactly one acceptance criterion.
    Coverage/confidence assessments sit directly beneath a satisfaction
    subclaim, facets directly beneath a confidence assessment (or another
    facet); each node carries its argument rows.
    """

    kind: ClaimKind
    id: str = ""
    criterion_id: str = ""
    facet_label: str = ""
    children: tuple[ClaimNode, ...] = ()
    rows: tuple[ArgumentRow, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        object.__setattr__(self, "rows", tuple(self.rows))
        where = self.id or self.kind.value
        if self.kind is ClaimKind.TOP_CLAIM:
            _require(bool(self.id), "a top claim must carry an identifier")
            _require(
                bool(self.criterion_id),
                f"top claim {where}: must reference exactly one acceptance criterion",
            )
        else:
            _require(
                not self.criterion_id,
                f"claim node {where}: only a top claim references a criterion",
            )
        if self.kind is ClaimKind.FACET:
            _require(bool(self.facet_label), f"facet {where}: label must be non-empty")
        else:
            _require(
                not self.facet_label,
                f"claim node {where}: only facets carry a facet label",
            )
        allowed = _ALLOWED_CHILDREN[self.kind]
        for child in self.children:
            _require(
                child.kind in allowed,
                f"claim node {where}: a {child.kind.value} node cannot sit "
                f"beneath a {self.kind.value} node",
            )

    def child_of_kind(self, kind: ClaimKind) -> ClaimNode | None:
        for child in self.children:
            if child.kind is kind:
                return child
        return None


@dataclass(frozen=True)
class Evidence:
    id: str
    methodology_id: str
    kind: str
    uri: str
    strength: EvidenceStrength


@dataclass(frozen=True)
class SafetyCase:
    """The root document.

    Top-level collections are stored sorted by identifier so that two cases
    with the same content compare equal regardless of declaration order.
    Identifier uniqueness (including claim-node ids) is enforced here;
    cross-reference resolution is checked by `resolve_references`.
    """

    id: str
    context: ContextBlock = field(default_factory=ContextBlock)
    hazards: tuple[Hazard, ...] = ()
    methodologies: tuple[Methodology, ...] = ()
    indicators: tuple[Indicator, ...] = ()
    criteria: tuple[AcceptanceCriterion, ...] = ()
    evidence: tuple[Evidence, ...] = ()
    claims: tuple[ClaimNode, ...] = ()

    def __post_init__(self) -> None:
        for name in ("hazards", "methodologies", "indicators", "criteria", "evidence", "claims"):
            items = tuple(sorted(getattr(self, name), key=lambda e: e.id))
            object.__setattr__(self, name, items)
        for root in self.claims:
            _require(
                root.kind is ClaimKind.TOP_CLAIM,
                f"claim {root.id or root.kind.value}: only top claims may be roots",
            )
        seen: set[str] = set()
        for element_id in self._all_ids():
            _require(element_id not in seen, f"duplicate identifier {element_id}")
            seen.add(element_id)

    def _all_ids(self) -> Iterator[str]:
        for collection in (
            self.hazards,
            self.methodologies,
            self.indicators,
            self.criteria,
            self.evidence,
        ):
            for element in collection:
                yield element.id
        for root in self.claims:
            for node, _key in iter_claim_nodes(root):
                if node.id:
                    yield node.id

    def hazard_map(self) -> dict[str, Hazard]:
        return {h.id: h for h in self.hazards}

    def methodology_map(self) -> dict[str, Methodology]:
        return {m.id: m for m in self.methodologies}

    def criterion_map(self) -> dict[str, AcceptanceCriterion]:
        return {c.id: c for c in self.criteria}


@dataclass(frozen=True)
class ReferenceFinding:
    """A cross-reference that does not resolve: who referred, through which
    field, to which missing identifier."""

    referrer: str
    field: str
    missing: str


# What kind of element each reference field points at, for messages.
REFERENCE_NOUNS = {
    "hazard_ids": "hazard",
    "methodology_id": "methodology",
    "indicator_ids": "indicator",
    "criterion_id": "criterion",
    "evidence_ids": "evidence",
}


def classify_indicator(stage: CausalStage) -> IndicatorKind:
    """Classify an indicator by its position on the causal chain.

    Only indicators at the harm-manifestation end of the chain (collision
    counts and the like) are lagging; everything earlier leads the risk.
    """
    return IndicatorKind.LAGGING if stage is CausalStage.HARM else IndicatorKind.LEADING


def iter_claim_nodes(
    root: ClaimNode, _key: str | None = None
) -> Iterator[tuple[ClaimNode, str]]:
    """Walk a claim tree depth-first, yielding (node, key).

    The key addresses a node stably: an explicit id when declared,
    otherwise `<parent key>.<ordinal>` by position among siblings.  The
    parser and the rule engine derive identical keys from the same tree,
    so diagnostics and source spans line up.
    """
    key = _key if _key is not None else (root.id or root.kind.value)
    yield root, key
    for ordinal, child in enumerate(root.children, start=1):
        child_key = child.id or f"{key}.{ordinal}"
        yield from iter_claim_nodes(child, child_key)


def iter_rows(root: ClaimNode) -> Iterator[tuple[ArgumentRow, str, ClaimNode, str]]:
    """Yield (row, row key, owning node, node key) over a claim tree.

    Row keys are `<node key>.<label>`, disambiguated with `@n` if a label
    repeats under one node.
    """
    for node, node_key in iter_claim_nodes(root):
        seen: dict[str, int] = {}
        for row in node.rows:
            count = seen.get(row.label, 0)
            seen[row.label] = count + 1
            suffix = f"@{count + 1}" if count else ""
            yield row, f"{node_key}.{row.label}{suffix}", node, node_key


def resolve_references(case: SafetyCase) -> list[ReferenceFinding]:
    """Check every cross-reference in the case; return findings for those
    that name no existing element.

    An empty result is the precondition for every downstream analysis:
    analyses given an unresolved case refuse rather than guess.
    """
    hazards = {h.id for h in case.hazards}
    methodologies = {m.id for m in case.methodologies}
    indicators = {i.id for i in case.indicators}
    criteria = {c.id for c in case.criteria}
    evidence = {e.id for e in case.evidence}

    findings: list[ReferenceFinding] = []

    def check(referrer: str, field_name: str, refs, pool: set[str]) -> None:
        for ref in sorted(refs):
            if ref not in pool:
                findings.append(ReferenceFinding(referrer, field_name, ref))

    for criterion in case.criteria:
        check(criterion.id, "hazard_ids", criterion.hazard_ids, hazards)
        check(criterion.id, "methodology_id", {criterion.methodology_id}, methodologies)
        check(criterion.id, "indicator_ids", criterion.indicator_ids, indicators)
    for item in case.evidence:
        check(item.id, "methodology_id", {item.methodology_id}, methodologies)
    for root in case.claims:
        check(root.id, "criterion_id", {root.criterion_id}, criteria)
        for row, row_key, _node, _node_key in iter_rows(root):
            check(row_key, "evidence_ids", row.evidence_ids, evidence)
    return findings


class UnresolvedCaseError(ValueError):
    """Raised when an analysis requiring a resolved case is handed one with
    dangling references."""

    def __init__(self, findings: list[ReferenceFinding]):
        self.findings = findings
        preview = ", ".join(
            f"{f.referrer}.{f.field} -> {f.missing}" for f in findings[:3]
        )
        more = "" if len(findings) <= 3 else f" (+{len(findings) - 3} more)"
        super().__init__(f"case has {len(findings)} unresolved reference(s): {preview}{more}")


def require_resolved(case: SafetyCase) -> None:
    """Refuse (raise `UnresolvedCaseError`) unless every reference resolves."""
    findings = resolve_references(case)
    if findings:
        raise UnresolvedCaseError(findings)
