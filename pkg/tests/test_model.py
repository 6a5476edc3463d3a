from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aurcase.model import (
    AcceptanceCriterion,
    AcSpaceRegion,
    AggregationLevel,
    ArgumentRow,
    BehavioralCapability,
    CausalStage,
    Cell,
    ClaimKind,
    ClaimNode,
    ConflictRole,
    FunctionalityStatus,
    Hazard,
    HazardCategory,
    IndicatorKind,
    Methodology,
    ModelError,
    SafetyCase,
    SeverityLevel,
    TargetKind,
    UnresolvedCaseError,
    ValidationTarget,
    classify_indicator,
    iter_claim_nodes,
    iter_rows,
    require_resolved,
    resolve_references,
)


def _hazard(hazard_id="H1", category=HazardCategory.BEHAVIORAL):
    return Hazard(id=hazard_id, description="collision", primary_category=category)


def _criterion(criterion_id="AC1", hazard_ids=("H1",), methodology_id="M1", **kwargs):
    return AcceptanceCriterion(
        id=criterion_id,
        statement="stated",
        hazard_ids=frozenset(hazard_ids),
        methodology_id=methodology_id,
        aggregation=kwargs.pop("aggregation", AggregationLevel.AGGREGATE_LEVEL),
        **kwargs,
    )


class TestClassifyIndicator:
    def test_harm_is_lagging(self):
        assert classify_indicator(CausalStage.HARM) is IndicatorKind.LAGGING

    def test_triggering_condition_is_leading(self):
        assert (
            classify_indicator(CausalStage.TRIGGERING_CONDITION)
            is IndicatorKind.LEADING
        )

    def test_hazardous_event_is_leading(self):
        assert classify_indicator(CausalStage.HAZARDOUS_EVENT) is IndicatorKind.LEADING

    def test_total_with_exactly_one_lagging_stage(self):
        kinds = [classify_indicator(stage) for stage in CausalStage]
        assert len(kinds) == 5
        assert kinds.count(IndicatorKind.LAGGING) == 1


def test_causal_stage_order():
    stages = list(CausalStage)
    assert stages == sorted(stages)
    assert max(CausalStage) is CausalStage.HARM


def test_severity_order():
    assert list(SeverityLevel) == sorted(SeverityLevel)
    assert max(SeverityLevel) is SeverityLevel.S3
    assert len(SeverityLevel) == 4


def test_hazard_category_has_exactly_three_members():
    assert len(HazardCategory) == 3


def test_hazard_rejects_primary_repeated_as_secondary():
    with pytest.raises(ModelError, match="primary category repeated"):
        Hazard(
            id="H1",
            description="x",
            primary_category=HazardCategory.BEHAVIORAL,
            secondary_categories=frozenset({HazardCategory.BEHAVIORAL}),
        )


def test_hazard_counts_under_every_category_it_carries():
    hazard = Hazard(
        id="H1",
        description="x",
        primary_category=HazardCategory.ARCHITECTURAL,
        secondary_categories=frozenset({HazardCategory.BEHAVIORAL}),
    )
    assert hazard.categories == {
        HazardCategory.ARCHITECTURAL,
        HazardCategory.BEHAVIORAL,
    }


def test_methodology_region_requires_behavioral_category():
    region = AcSpaceRegion(
        severities=frozenset(SeverityLevel),
        roles=frozenset(ConflictRole),
        capabilities=frozenset(BehavioralCapability),
        statuses=frozenset(FunctionalityStatus),
        aggregations=frozenset(AggregationLevel),
    )
    with pytest.raises(ModelError, match="behavioral"):
        Methodology(id="M1", name="x", hazard_categories=frozenset(), region=region)


def test_region_rejects_weak_cells_outside_region():
    outside = Cell(
        SeverityLevel.S3,
        ConflictRole.INITIATOR,
        BehavioralCapability.COLLISION_AVOIDANCE,
        FunctionalityStatus.NOMINAL,
        AggregationLevel.AGGREGATE_LEVEL,
    )
    with pytest.raises(ModelError, match="weak_cells"):
        AcSpaceRegion(
            severities=frozenset(SeverityLevel),
            roles=frozenset({ConflictRole.RESPONDER}),
            capabilities=frozenset({BehavioralCapability.COLLISION_AVOIDANCE}),
            statuses=frozenset({FunctionalityStatus.NOMINAL}),
            aggregations=frozenset({AggregationLevel.AGGREGATE_LEVEL}),
            weak_cells=frozenset({outside}),
        )


def test_criterion_requires_a_hazard():
    with pytest.raises(ModelError, match="at least one"):
        _criterion(hazard_ids=())


def test_criterion_aggregation_must_lie_in_own_region():
    region = AcSpaceRegion(
        severities=frozenset({SeverityLevel.S0}),
        roles=frozenset({ConflictRole.RESPONDER}),
        capabilities=frozenset({BehavioralCapability.COLLISION_AVOIDANCE}),
        statuses=frozenset({FunctionalityStatus.NOMINAL}),
        aggregations=frozenset({AggregationLevel.AGGREGATE_LEVEL}),
    )
    with pytest.raises(ModelError, match="aggregation level"):
        _criterion(aggregation=AggregationLevel.EVENT_LEVEL, region=region)


def test_rate_bound_target_invariants():
    with pytest.raises(ModelError, match="max_rate"):
        ValidationTarget(
            kind=TargetKind.RATE_BOUND,
            event_definition="e",
            max_rate=0.0,
            exposure_unit="mi",
            confidence=0.9,
        )
    with pytest.raises(ModelError, match="confidence"):
        ValidationTarget(
            kind=TargetKind.RATE_BOUND,
            event_definition="e",
            max_rate=1e-6,
            exposure_unit="mi",
            confidence=1.0,
        )


def test_argument_row_requires_text():
    with pytest.raises(ModelError, match="non-empty"):
        ArgumentRow(label="A.1", argument="")


class TestClaimShape:
    def test_top_claim_needs_criterion(self):
        with pytest.raises(ModelError, match="criterion"):
            ClaimNode(kind=ClaimKind.TOP_CLAIM, id="C1")

    def test_non_root_must_not_reference_criterion(self):
        with pytest.raises(ModelError, match="only a top claim"):
            ClaimNode(kind=ClaimKind.SATISFACTION, criterion_id="AC1")

    def test_facet_needs_label_and_others_must_not_carry_one(self):
        with pytest.raises(ModelError, match="label"):
            ClaimNode(kind=ClaimKind.FACET)
        with pytest.raises(ModelError, match="only facets"):
            ClaimNode(kind=ClaimKind.SATISFACTION, facet_label="x")

    def test_assessments_only_beneath_satisfaction(self):
        coverage = ClaimNode(kind=ClaimKind.COVERAGE_ASSESSMENT)
        with pytest.raises(ModelError, match="cannot sit"):
            ClaimNode(kind=ClaimKind.REASONABLENESS, children=(coverage,))

    def test_facet_only_beneath_confidence_assessment(self):
        facet = ClaimNode(kind=ClaimKind.FACET, facet_label="Fidelity")
        with pytest.raises(ModelError, match="cannot sit"):
            ClaimNode(kind=ClaimKind.SATISFACTION, children=(facet,))
        # ... but facets may nest under facets: depth is unconstrained.
        ClaimNode(kind=ClaimKind.FACET, facet_label="outer", children=(facet,))

    def test_only_top_claims_may_be_roots(self):
        with pytest.raises(ModelError, match="root"):
            SafetyCase(id="case", claims=(ClaimNode(kind=ClaimKind.SATISFACTION),))


class TestIdentifierUniqueness:
    def test_duplicate_within_collection_rejected(self):
        with pytest.raises(ModelError, match="duplicate identifier H1"):
            SafetyCase(id="case", hazards=(_hazard(), _hazard()))

    def test_duplicate_across_collections_rejected(self):
        with pytest.raises(ModelError, match="duplicate identifier X1"):
            SafetyCase(
                id="case",
                hazards=(_hazard("X1"),),
                methodologies=(Methodology(id="X1", name="n"),),
            )

    def test_duplicate_claim_node_id_rejected(self):
        inner = ClaimNode(kind=ClaimKind.REASONABLENESS, id="H1")
        claim = ClaimNode(
            kind=ClaimKind.TOP_CLAIM, id="C1", criterion_id="AC1", children=(inner,)
        )
        with pytest.raises(ModelError, match="duplicate identifier H1"):
            SafetyCase(id="case", hazards=(_hazard(),), claims=(claim,))


def test_collections_are_normalized_by_id():
    case = SafetyCase(id="case", hazards=(_hazard("H2"), _hazard("H1")))
    assert [h.id for h in case.hazards] == ["H1", "H2"]


class TestResolveReferences:
    def test_fully_resolved_case_has_no_findings(self):
        case = SafetyCase(
            id="case",
            hazards=(_hazard(),),
            methodologies=(Methodology(id="M1", name="n"),),
            criteria=(_criterion(),),
        )
        assert resolve_references(case) == []

    def test_missing_hazard_is_reported(self):
        case = SafetyCase(
            id="case",
            methodologies=(Methodology(id="M1", name="n"),),
            criteria=(_criterion(hazard_ids=("H9",)),),
        )
        findings = resolve_references(case)
        assert [(f.referrer, f.field, f.missing) for f in findings] == [
            ("AC1", "hazard_ids", "H9")
        ]

    def test_missing_evidence_reported_with_row_key(self):
        row = ArgumentRow(label="A.1", argument="a", evidence_ids=frozenset({"E7"}))
        claim = ClaimNode(
            kind=ClaimKind.TOP_CLAIM, id="C1", criterion_id="AC1", rows=(row,)
        )
        case = SafetyCase(
            id="case",
            hazards=(_hazard(),),
            methodologies=(Methodology(id="M1", name="n"),),
            criteria=(_criterion(),),
            claims=(claim,),
        )
        findings = resolve_references(case)
        assert [(f.referrer, f.field, f.missing) for f in findings] == [
            ("C1.A.1", "evidence_ids", "E7")
        ]


def test_analyses_refuse_on_unresolved_case():
    from aurcase import aggregation_balance, coverage_map, serialize, trace_matrix

    case = SafetyCase(
        id="case",
        methodologies=(Methodology(id="M1", name="n"),),
        criteria=(_criterion(hazard_ids=("H9",)),),
    )
    for analysis in (coverage_map, aggregation_balance, trace_matrix, serialize):
        with pytest.raises(UnresolvedCaseError):
            analysis(case)
    with pytest.raises(UnresolvedCaseError, match="unresolved reference"):
        require_resolved(case)


def test_claim_walk_keys_follow_ids_then_ordinals():
    tree = ClaimNode(
        kind=ClaimKind.TOP_CLAIM,
        id="C1",
        criterion_id="AC1",
        children=(
            ClaimNode(kind=ClaimKind.REASONABLENESS, id="SC1"),
            ClaimNode(
                kind=ClaimKind.SATISFACTION,
                children=(
                    ClaimNode(kind=ClaimKind.COVERAGE_ASSESSMENT),
                    ClaimNode(
                        kind=ClaimKind.CONFIDENCE_ASSESSMENT,
                        children=(
                            ClaimNode(
                                kind=ClaimKind.FACET,
                                facet_label="Fidelity",
                                rows=(
                                    ArgumentRow(label="B.1", argument="a"),
                                    ArgumentRow(label="B.1", argument="b"),
                                ),
                            ),
                        ),
                    ),
                ),
            ),
        ),
    )
    keys = [key for _node, key in iter_claim_nodes(tree)]
    assert keys == ["C1", "SC1", "C1.2", "C1.2.1", "C1.2.2", "C1.2.2.1"]
    row_keys = [key for _row, key, _node, _node_key in iter_rows(tree)]
    assert row_keys == ["C1.2.2.1.B.1", "C1.2.2.1.B.1@2"]


@given(st.sampled_from(list(CausalStage)))
def test_classification_matches_position_on_chain(stage):
    kind = classify_indicator(stage)
    assert (kind is IndicatorKind.LAGGING) == (stage is CausalStage.HARM)
