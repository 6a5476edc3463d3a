"""Report rendering: diagnostics text, the machine-readable report, the
coverage heatmap, and the hazard traceability matrix.

Renderers are pure functions of their inputs; the machine report embeds
the tool version and input digests so a review can be reproduced and
checked byte-for-byte (only `generated_at` varies between runs).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping
from xml.sax.saxutils import escape as _xml_escape

from ._version import __version__
from .coverage import (
    DIMENSIONS,
    BalanceClass,
    CoverageMap,
    GapReport,
    Signal,
    aggregation_balance,
    coverage_map,
    criteria_by_category,
    gap_report,
)
from .diagnostics import Diagnostic, Severity, sort_diagnostics
from .lifecycle import ReadinessDecision
from .model import (
    AggregationLevel,
    BehavioralCapability,
    Cell,
    ConflictRole,
    FunctionalityStatus,
    HazardCategory,
    SafetyCase,
    SeverityLevel,
    iter_rows,
    require_resolved,
)

NO_SPACE_NOTE = (
    "no framework space defined for architectural and in-service operational "
    "criteria; they are reported by count and traceability only"
)


@dataclass(frozen=True)
class TraceRow:
    hazard_id: str
    criterion_ids: tuple[str, ...]
    claim_ids: tuple[str, ...]
    evidence_ids: tuple[str, ...]

    @property
    def complete(self) -> bool:
        return bool(self.criterion_ids and self.claim_ids and self.evidence_ids)


@dataclass(frozen=True)
class TraceMatrix:
    rows: tuple[TraceRow, ...]


def trace_matrix(case: SafetyCase) -> TraceMatrix:
    """Chain each hazard through its criteria and top claims to the
    evidence those claim trees cite, one row per hazard."""
    require_resolved(case)
    claims_by_criterion: dict[str, list] = {}
    for root in case.claims:
        claims_by_criterion.setdefault(root.criterion_id, []).append(root)
    rows = []
    for hazard in case.hazards:
        criteria = [c for c in case.criteria if hazard.id in c.hazard_ids]
        claims = [
            root for c in criteria for root in claims_by_criterion.get(c.id, [])
        ]
        evidence: set[str] = set()
        for root in claims:
            for row, _key, _node, _node_key in iter_rows(root):
                evidence |= row.evidence_ids
        rows.append(
            TraceRow(
                hazard_id=hazard.id,
                criterion_ids=tuple(sorted(c.id for c in criteria)),
                claim_ids=tuple(sorted(root.id for root in claims)),
                evidence_ids=tuple(sorted(evidence)),
            )
        )
    return TraceMatrix(rows=tuple(rows))


@dataclass(frozen=True)
class CoverageBundle:
    map: CoverageMap
    gaps: GapReport
    balance: BalanceClass
    by_category: Mapping[HazardCategory, int]


def coverage_bundle(case: SafetyCase) -> CoverageBundle:
    cov = coverage_map(case)
    return CoverageBundle(
        map=cov,
        gaps=gap_report(cov),
        balance=aggregation_balance(case),
        by_category=criteria_by_category(case),
    )


@dataclass(frozen=True)
class ReportDocument:
    """Everything one run knows, ready for rendering."""

    case: SafetyCase
    file_name: str
    diagnostics: tuple[Diagnostic, ...]
    coverage: CoverageBundle
    trace: TraceMatrix
    review: ReadinessDecision | None = None
    input_digests: Mapping[str, Mapping[str, str]] = field(default_factory=dict)
    tool_version: str = __version__
    generated_at: str = ""


def build_report(
    case: SafetyCase,
    file_name: str,
    diagnostics: list[Diagnostic],
    review: ReadinessDecision | None = None,
    input_digests: Mapping[str, Mapping[str, str]] | None = None,
) -> ReportDocument:
    return ReportDocument(
        case=case,
        file_name=file_name,
        diagnostics=tuple(sort_diagnostics(list(diagnostics))),
        coverage=coverage_bundle(case),
        trace=trace_matrix(case),
        review=review,
        input_digests=dict(input_digests or {}),
        generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def digest_of(path: str, data: bytes) -> dict[str, str]:
    return {"path": path, "sha256": hashlib.sha256(data).hexdigest()}


# -- text rendering -----------------------------------------------------------


def diagnostic_line(diagnostic: Diagnostic) -> str:
    body = f"{diagnostic.severity.value}[{diagnostic.rule_id}]: {diagnostic.message}"
    if diagnostic.span is None:
        return body
    span = diagnostic.span
    return f"{span.file}:{span.start_line}:{span.start_col}: {body}"


def summary_line(diagnostics: tuple[Diagnostic, ...] | list[Diagnostic]) -> str:
    errors = sum(1 for d in diagnostics if d.severity is Severity.ERROR)
    warnings = len(diagnostics) - errors
    return f"{errors} error(s), {warnings} warning(s)"


def render_diagnostics(diagnostics: list[Diagnostic] | tuple[Diagnostic, ...]) -> str:
    """One line per diagnostic (errors ahead of warnings at equal spans),
    then the count summary; the summary alone when there is nothing to say."""
    ordered = sort_diagnostics(list(diagnostics))
    lines = [diagnostic_line(d) for d in ordered]
    lines.append(summary_line(ordered))
    return "\n".join(lines) + "\n"


def _marginal_lines(gaps: GapReport) -> list[str]:
    lines = []
    width = max(len(dim) for dim in DIMENSIONS)
    for dimension, per_value in gaps.marginals.items():
        cells = "   ".join(f"{name} {frac}" for name, frac in per_value.items())
        lines.append(f"  {dimension.ljust(width)}  {cells}")
    return lines


def render_coverage_text(bundle: CoverageBundle) -> str:
    gaps = bundle.gaps
    lines = [
        f"coverage: {gaps.covered} cells covered ({gaps.strong} strong)",
        f"balance: {bundle.balance.value} - {bundle.balance.advisory}",
        "marginal coverage by dimension value:",
        *_marginal_lines(gaps),
        f"uncovered: {len(gaps.uncovered)} cell(s)",
    ]
    by_category = bundle.by_category
    lines.append(
        "criteria by hazard category: "
        + ", ".join(
            f"{category.value} {by_category[category]}" for category in HazardCategory
        )
    )
    lines.append(f"note: {NO_SPACE_NOTE}")
    return "\n".join(lines) + "\n"


def render_trace_text(trace: TraceMatrix) -> str:
    lines = ["hazard | criteria | claims | evidence | complete"]
    for row in trace.rows:
        lines.append(
            " | ".join(
                (
                    row.hazard_id,
                    ", ".join(row.criterion_ids) or "-",
                    ", ".join(row.claim_ids) or "-",
                    ", ".join(row.evidence_ids) or "-",
                    "yes" if row.complete else "no",
                )
            )
        )
    if not trace.rows:
        lines.append("(no hazards declared)")
    return "\n".join(lines) + "\n"


def render_review_text(review: ReadinessDecision) -> str:
    lines = [f"readiness: {review.status}"]
    for check in review.target_checks:
        bound = "n/a" if check.upper_bound is None else f"{check.upper_bound:.6g}"
        lines.append(
            f"  target {check.criterion_id}: {check.status.value} "
            f"(upper bound {bound}, target {check.target:.6g}, "
            f"exposure {check.exposure:g}, events {check.count})"
        )
    for blocker in review.blockers:
        lines.append(f"  blocker {blocker.subject_id}: {blocker.reason}")
    return "\n".join(lines) + "\n"


def render_text(
    diagnostics: list[Diagnostic] | tuple[Diagnostic, ...],
    report: ReportDocument | None = None,
) -> str:
    """Human-readable rendering: diagnostics alone, or the full report."""
    if report is None:
        return render_diagnostics(diagnostics)
    case = report.case
    parts = [
        f"aurcase report: {report.file_name}",
        f"case {case.id!r}"
        + (f" release {case.context.release}" if case.context.release else "")
        + (f" platform {case.context.platform}" if case.context.platform else ""),
        "",
        "== diagnostics ==",
        render_diagnostics(diagnostics).rstrip("\n"),
        "",
        "== coverage ==",
        render_coverage_text(report.coverage).rstrip("\n"),
        "",
        "== trace ==",
        render_trace_text(report.trace).rstrip("\n"),
    ]
    if report.review is not None:
        parts += ["", "== review ==", render_review_text(report.review).rstrip("\n")]
    return "\n".join(parts) + "\n"


# -- machine rendering --------------------------------------------------------


def _fraction_dict(fraction) -> dict:
    return {"numerator": fraction.numerator, "denominator": fraction.denominator}


def _diagnostic_dict(diagnostic: Diagnostic) -> dict:
    out: dict = {
        "rule_id": diagnostic.rule_id,
        "severity": diagnostic.severity.value,
        "message": diagnostic.message,
        "subject": diagnostic.subject_id,
    }
    if diagnostic.span is not None:
        out["file"] = diagnostic.span.file
        out["line"] = diagnostic.span.start_line
        out["col"] = diagnostic.span.start_col
    return out


def report_dict(report: ReportDocument) -> dict:
    case = report.case
    gaps = report.coverage.gaps
    uncovered_groups = gaps.uncovered_by_dimension()
    review = None
    if report.review is not None:
        review = {
            "status": report.review.status,
            "blockers": [
                {"subject": b.subject_id, "reason": b.reason}
                for b in report.review.blockers
            ],
            "targets": [
                {
                    "criterion": c.criterion_id,
                    "status": c.status.value,
                    "upper_bound": c.upper_bound,
                    "max_rate": c.target,
                    "exposure": c.exposure,
                    "events": c.count,
                }
                for c in report.review.target_checks
            ],
        }
    return {
        "tool": {"name": "aurcase", "version": report.tool_version},
        "generated_at": report.generated_at,
        "inputs": dict(report.input_digests),
        "case": {
            "id": case.id,
            "release": case.context.release,
            "platform": case.context.platform,
            "use_case": case.context.use_case,
            "counts": {
                "hazards": len(case.hazards),
                "methodologies": len(case.methodologies),
                "indicators": len(case.indicators),
                "criteria": len(case.criteria),
                "evidence": len(case.evidence),
                "claims": len(case.claims),
            },
        },
        "diagnostics": [_diagnostic_dict(d) for d in report.diagnostics],
        "coverage": {
            "overall": _fraction_dict(gaps.covered),
            "strong": _fraction_dict(gaps.strong),
            "balance": {
                "class": report.coverage.balance.value,
                "advisory": report.coverage.balance.advisory,
            },
            "marginals": {
                dimension: {
                    name: _fraction_dict(fraction) for name, fraction in per_value.items()
                }
                for dimension, per_value in gaps.marginals.items()
            },
            "uncovered_count": len(gaps.uncovered),
            "uncovered_by_dimension": {
                dimension: {name: len(cells) for name, cells in groups.items()}
                for dimension, groups in uncovered_groups.items()
            },
            "criteria_by_category": {
                category.value: count
                for category, count in report.coverage.by_category.items()
            },
            "category_note": NO_SPACE_NOTE,
        },
        "trace": {
            "rows": [
                {
                    "hazard": row.hazard_id,
                    "criteria": list(row.criterion_ids),
                    "claims": list(row.claim_ids),
                    "evidence": list(row.evidence_ids),
                    "complete": row.complete,
                }
                for row in report.trace.rows
            ]
        },
        "review": review,
    }


def render_machine(report: ReportDocument) -> str:
    """Stable JSON: sorted keys, two-space indent, plain decimal numbers."""
    return json.dumps(report_dict(report), indent=2, sort_keys=True) + "\n"


# -- heatmap ------------------------------------------------------------------

_FILL = {Signal.NONE: "#d9d9d9", Signal.WEAK: "#9ecae1", Signal.STRONG: "#08519c"}

_CELL = 34
_LEFT = 170
_GRID_W = _CELL * len(SeverityLevel)
_SLICE_W = _LEFT + _GRID_W + 24
_SLICE_H = 40 + len(BehavioralCapability) * _CELL + 24
_LEGEND_H = 46


def render_heatmap(coverage: CoverageMap) -> str:
    """Static SVG: one severity x capability grid per (role, status,
    aggregation) slice, three distinct fills for none/weak/strong.

    Every cell rect carries data attributes naming its five coordinates
    and its signal, so the drawing can be checked against the map.
    """
    slices = [
        (role, status, aggregation)
        for role in ConflictRole
        for status in FunctionalityStatus
        for aggregation in AggregationLevel
    ]
    columns = 2
    rows = (len(slices) + columns - 1) // columns
    width = columns * _SLICE_W + 16
    height = _LEGEND_H + rows * _SLICE_H + 16
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
        '<text x="16" y="20" font-size="13">acceptance-criteria space coverage</text>',
    ]
    legend_x = 16
    for signal in (Signal.NONE, Signal.WEAK, Signal.STRONG):
        out.append(
            f'<rect x="{legend_x}" y="28" width="14" height="14" '
            f'fill="{_FILL[signal]}" stroke="#555555"/>'
        )
        out.append(
            f'<text x="{legend_x + 18}" y="39">{signal.name.lower()}</text>'
        )
        legend_x += 90
    for index, (role, status, aggregation) in enumerate(slices):
        ox = 16 + (index % columns) * _SLICE_W
        oy = _LEGEND_H + (index // columns) * _SLICE_H
        title = f"{role.value} / {status.value} / {aggregation.value}"
        out.append(f'<text x="{ox}" y="{oy + 14}">{_xml_escape(title)}</text>')
        for row_index, capability in enumerate(BehavioralCapability):
            label_y = oy + 40 + row_index * _CELL + _CELL // 2 + 4
            out.append(
                f'<text x="{ox}" y="{label_y}" font-size="10">'
                f"{_xml_escape(capability.value)}</text>"
            )
            for col_index, severity in enumerate(SeverityLevel):
                cell_x = ox + _LEFT + col_index * _CELL
                cell_y = oy + 40 + row_index * _CELL
                cell = Cell(severity, role, capability, status, aggregation)
                signal = coverage.signal(cell)
                out.append(
                    f'<rect x="{cell_x}" y="{cell_y}" width="{_CELL}" height="{_CELL}" '
                    f'fill="{_FILL[signal]}" stroke="#555555" '
                    f'data-severity="{severity.name}" data-role="{role.value}" '
                    f'data-capability="{capability.value}" data-status="{status.value}" '
                    f'data-aggregation="{aggregation.value}" data-signal="{signal.name.lower()}"/>'
                )
        for col_index, severity in enumerate(SeverityLevel):
            label_x = ox + _LEFT + col_index * _CELL + _CELL // 2 - 6
            label_y = oy + 36
            out.append(f'<text x="{label_x}" y="{label_y}">{severity.name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
