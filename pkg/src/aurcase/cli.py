"""Command-line front end.

Subcommands: `check` (parse + validate), `coverage`, `trace`, `review`
(readiness gate against an exposure ledger), `report` (everything, written
to a directory), and `fmt` (canonical form).

Exit codes: 0 when nothing error-severity was found (and, for `review`,
the gate approved); 1 for error diagnostics or a blocked review; 2 for
usage errors and documents that do not parse.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ._version import __version__
from .diagnostics import Diagnostic, Severity, sort_diagnostics
from .dsl import ParseResult, parse, serialize
from .lifecycle import ExposureLedger, parse_ledger, readiness_review
from .model import SafetyCase, resolve_references
from .report import (
    build_report,
    digest_of,
    coverage_bundle,
    render_coverage_text,
    render_diagnostics,
    render_heatmap,
    render_machine,
    render_review_text,
    render_text,
    render_trace_text,
    report_dict,
    trace_matrix,
)
from .rules import RuleConfig, parse_config, validate

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2

CONFIG_ENV_VAR = "AURCASE_CONFIG"


class _CliError(Exception):
    """A usage-level failure: bad paths, unreadable inputs, bad config."""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aurcase",
        description="Parse, validate, and analyze ADS safety-case documents.",
    )
    parser.add_argument("--version", action="version", version=f"aurcase {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("file", help="safety-case document (.aur)")
        p.add_argument(
            "--config",
            help=f"rule configuration file (default: ${CONFIG_ENV_VAR} if set)",
        )
        p.add_argument(
            "--review-ready",
            action="store_true",
            help="require the full operational context (rule E011)",
        )
        p.add_argument(
            "--coverage-threshold",
            type=float,
            metavar="0..1",
            help="warn (W106) when covered fraction of the space falls below this",
        )
        p.add_argument(
            "--format",
            choices=("text", "machine"),
            default="text",
            help="output format (default: text)",
        )

    add_common(sub.add_parser("check", help="parse and validate a document"))
    add_common(sub.add_parser("coverage", help="coverage map, gaps, and balance"))
    add_common(sub.add_parser("trace", help="hazard traceability matrix"))

    review = sub.add_parser("review", help="readiness gate against an exposure ledger")
    add_common(review)
    review.add_argument("--ledger", required=True, help="exposure ledger (.csv)")

    report = sub.add_parser("report", help="full report written to a directory")
    add_common(report)
    report.add_argument("--ledger", help="exposure ledger (.csv)")
    report.add_argument("--out", required=True, help="output directory")

    fmt = sub.add_parser("fmt", help="print the document in canonical form")
    fmt.add_argument("file", help="safety-case document (.aur)")
    return parser


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _CliError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load_config(args: argparse.Namespace) -> RuleConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path:
        try:
            config = parse_config(Path(path).read_text(encoding="utf-8"), source=path)
        except OSError as exc:
            raise _CliError(f"cannot read {path}: {exc.strerror or exc}") from exc
        except ValueError as exc:
            raise _CliError(str(exc)) from exc
    else:
        config = RuleConfig()
    if getattr(args, "review_ready", False):
        config = config.replace(review_ready=True)
    threshold = getattr(args, "coverage_threshold", None)
    if threshold is not None:
        try:
            config = config.replace(coverage_threshold=threshold)
        except ValueError as exc:
            raise _CliError(str(exc)) from exc
    return config


def _parse_document(path: str) -> tuple[ParseResult, bytes]:
    data = _read_bytes(path)
    return parse(data, file_name=path), data


def _emit_parse_failure(result: ParseResult, fmt: str, out) -> int:
    if fmt == "machine":
        payload = {
            "diagnostics": [
                {
                    "rule_id": d.rule_id,
                    "severity": d.severity.value,
                    "message": d.message,
                    "subject": d.subject_id,
                    **(
                        {
                            "file": d.span.file,
                            "line": d.span.start_line,
                            "col": d.span.start_col,
                        }
                        if d.span
                        else {}
                    ),
                }
                for d in result.diagnostics
            ]
        }
        print(json.dumps(payload, indent=2, sort_keys=True), file=out)
    else:
        print(render_diagnostics(list(result.diagnostics)), end="", file=out)
    return EXIT_USAGE


def _validated(result: ParseResult, config: RuleConfig) -> list[Diagnostic]:
    assert result.case is not None
    return validate(
        result.case,
        config,
        span_index=result.span_index,
        reference_spans=result.reference_spans,
    )


def _refusal(result: ParseResult, config: RuleConfig) -> list[Diagnostic] | None:
    """For analysis commands: E009 details plus the E008 refusal when the
    case has dangling references, else None."""
    assert result.case is not None
    if not resolve_references(result.case):
        return None
    diagnostics = _validated(result, config)
    diagnostics += validate(
        result.case,
        config.replace(require_resolved=True),
        span_index=result.span_index,
        reference_spans=result.reference_spans,
    )
    return sort_diagnostics(diagnostics)


def _has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


def _cmd_check(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result, _data = _parse_document(args.file)
    if result.fatal:
        return _emit_parse_failure(result, args.format, sys.stdout)
    diagnostics = _validated(result, config)
    if args.format == "machine":
        payload = {
            "diagnostics": [
                {
                    "rule_id": d.rule_id,
                    "severity": d.severity.value,
                    "message": d.message,
                    "subject": d.subject_id,
                    **(
                        {
                            "file": d.span.file,
                            "line": d.span.start_line,
                            "col": d.span.start_col,
                        }
                        if d.span
                        else {}
                    ),
                }
                for d in diagnostics
            ],
            "summary": {
                "errors": sum(1 for d in diagnostics if d.severity is Severity.ERROR),
                "warnings": sum(
                    1 for d in diagnostics if d.severity is Severity.WARNING
                ),
            },
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(render_diagnostics(diagnostics), end="")
    return EXIT_FINDINGS if _has_errors(diagnostics) else EXIT_OK


def _analysis_preamble(args: argparse.Namespace) -> tuple[ParseResult, RuleConfig, int | None]:
    config = _load_config(args)
    result, _data = _parse_document(args.file)
    if result.fatal:
        return result, config, _emit_parse_failure(result, args.format, sys.stdout)
    refusal = _refusal(result, config)
    if refusal is not None:
        print(render_diagnostics(refusal), end="", file=sys.stderr)
        return result, config, EXIT_FINDINGS
    return result, config, None


def _cmd_coverage(args: argparse.Namespace) -> int:
    result, config, early = _analysis_preamble(args)
    if early is not None:
        return early
    diagnostics = _validated(result, config)
    if args.format == "machine":
        report = build_report(result.case, args.file, diagnostics)
        print(json.dumps(report_dict(report)["coverage"], indent=2, sort_keys=True))
    else:
        print(render_coverage_text(coverage_bundle(result.case)), end="")
    return EXIT_FINDINGS if _has_errors(diagnostics) else EXIT_OK


def _cmd_trace(args: argparse.Namespace) -> int:
    result, config, early = _analysis_preamble(args)
    if early is not None:
        return early
    matrix = trace_matrix(result.case)
    diagnostics = _validated(result, config)
    if args.format == "machine":
        payload = {
            "rows": [
                {
                    "hazard": row.hazard_id,
                    "criteria": list(row.criterion_ids),
                    "claims": list(row.claim_ids),
                    "evidence": list(row.evidence_ids),
                    "complete": row.complete,
                }
                for row in matrix.rows
            ]
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(render_trace_text(matrix), end="")
    return EXIT_FINDINGS if _has_errors(diagnostics) else EXIT_OK


def _load_ledger(path: str) -> ExposureLedger:
    try:
        return parse_ledger(_read_bytes(path).decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise _CliError(f"{path}: {exc}") from exc


def _cmd_review(args: argparse.Namespace) -> int:
    result, config, early = _analysis_preamble(args)
    if early is not None:
        return early
    ledger = _load_ledger(args.ledger)
    decision = readiness_review(result.case, ledger, config)
    if args.format == "machine":
        payload = {
            "status": decision.status,
            "blockers": [
                {"subject": b.subject_id, "reason": b.reason} for b in decision.blockers
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
                for c in decision.target_checks
            ],
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(render_review_text(decision), end="")
    return EXIT_OK if decision.approved else EXIT_FINDINGS


def _cmd_report(args: argparse.Namespace) -> int:
    config = _load_config(args)
    result, data = _parse_document(args.file)
    if result.fatal:
        return _emit_parse_failure(result, args.format, sys.stdout)
    refusal = _refusal(result, config)
    if refusal is not None:
        print(render_diagnostics(refusal), end="", file=sys.stderr)
        return EXIT_FINDINGS
    case: SafetyCase = result.case
    diagnostics = _validated(result, config)
    digests = {"case": digest_of(args.file, data)}
    review = None
    if args.ledger:
        ledger_bytes = _read_bytes(args.ledger)
        digests["ledger"] = digest_of(args.ledger, ledger_bytes)
        try:
            ledger = parse_ledger(ledger_bytes.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise _CliError(f"{args.ledger}: {exc}") from exc
        review = readiness_review(case, ledger, config)
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        digests["config"] = digest_of(config_path, _read_bytes(config_path))
    document = build_report(
        case,
        args.file,
        diagnostics,
        review=review,
        input_digests=digests,
    )
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _CliError(f"cannot create {args.out}: {exc.strerror or exc}") from exc
    (out_dir / "report.txt").write_text(
        render_text(document.diagnostics, document), encoding="utf-8"
    )
    (out_dir / "report.json").write_text(render_machine(document), encoding="utf-8")
    (out_dir / "heatmap.svg").write_text(
        render_heatmap(document.coverage.map), encoding="utf-8"
    )
    (out_dir / "trace.txt").write_text(
        render_trace_text(document.trace), encoding="utf-8"
    )
    print(f"report written to {out_dir}: report.txt report.json heatmap.svg trace.txt")
    blocked = review is not None and not review.approved
    return EXIT_FINDINGS if (_has_errors(diagnostics) or blocked) else EXIT_OK


def _cmd_fmt(args: argparse.Namespace) -> int:
    result, _data = _parse_document(args.file)
    if result.fatal:
        return _emit_parse_failure(result, "text", sys.stderr)
    if resolve_references(result.case):
        print(render_diagnostics(list(result.diagnostics)), end="", file=sys.stderr)
        print(
            "error[E008]: cannot format a case with unresolved references",
            file=sys.stderr,
        )
        return EXIT_FINDINGS
    print(serialize(result.case), end="")
    return EXIT_OK


_COMMANDS = {
    "check": _cmd_check,
    "coverage": _cmd_coverage,
    "trace": _cmd_trace,
    "review": _cmd_review,
    "report": _cmd_report,
    "fmt": _cmd_fmt,
}


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 for --help/--version.
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _CliError as exc:
        print(f"aurcase: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
