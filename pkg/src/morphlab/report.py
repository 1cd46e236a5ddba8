"""Metric report assembly and rendering.

JSON (see ``fileio``) is the canonical serialization; the plain-text tables
here are derived from it cell by cell, so both renderings always carry
identical values. Vulnerability tables show match rates as plain fractions
with three decimals; detectability tables show percentages with two decimals.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .core import MadScoreSet, MetricCell, MetricsReport, Provenance
from .errors import EmptyScoreSet, SchemaError
from .mad import apcer_at_bpcer, eer

POLARITY_WARNING = "polarity_warning"
DEGENERATE_THRESHOLD = "degenerate_threshold"

DEFAULT_BPCER_TARGETS = (0.01, 0.10, 0.20)


def bpcer_op_label(target: float) -> str:
    return f"BPCER{target * 100:.2f}%"


def mad_table(
    score_sets: Mapping[tuple[str, str], MadScoreSet],
    bpcer_targets: Sequence[float] = DEFAULT_BPCER_TARGETS,
    provenance: Provenance = Provenance(),
) -> MetricsReport:
    """Assemble the detectability grid: EER plus APCER at each BPCER budget
    per (MAD model, morph type). EER above 50% is flagged: it means the
    detector ranks bona fide closer to the attack side than the attacks.
    """
    if not score_sets:
        raise EmptyScoreSet("no MAD score sets supplied")
    cells = []
    for (model, morph_type), scores in score_sets.items():
        e = eer(scores)
        cells.append(
            MetricCell(
                model=model,
                morph_type=morph_type,
                metric="EER",
                operating_point="",
                value=e.value,
                threshold=e.threshold,
                flags=(POLARITY_WARNING,) if e.value > 0.5 else (),
            )
        )
        for target in bpcer_targets:
            r = apcer_at_bpcer(scores, target)
            cells.append(
                MetricCell(
                    model=model,
                    morph_type=morph_type,
                    metric="APCER",
                    operating_point=bpcer_op_label(target),
                    value=r.apcer,
                    threshold=r.threshold,
                    achieved_rate=r.achieved_bpcer,
                    flags=(DEGENERATE_THRESHOLD,) if r.degenerate else (),
                )
            )
    return MetricsReport(kind="mad", cells=tuple(cells), provenance=provenance)


def merge_reports(reports: Sequence[MetricsReport]) -> list[MetricsReport]:
    """Concatenate reports of the same kind; duplicate cell keys are rejected."""
    if not reports:
        raise EmptyScoreSet("no reports to merge")
    by_kind: dict[str, list[MetricsReport]] = {}
    for r in reports:
        by_kind.setdefault(r.kind, []).append(r)
    merged = []
    for kind, group in by_kind.items():
        cells = tuple(c for r in group for c in r.cells)
        inputs = tuple(pair for r in group for pair in r.provenance.inputs)
        params = tuple(pair for r in group for pair in r.provenance.parameters)
        tool = group[0].provenance.tool
        merged.append(
            MetricsReport(
                kind=kind,
                cells=cells,
                provenance=Provenance(inputs=inputs, tool=tool, parameters=params),
            )
        )
    return merged


def _ordered_unique(values):
    seen = []
    for v in values:
        if v not in seen:
            seen.append(v)
    return seen


def _span_layout(
    groups: list[tuple[str, int]], sub: list[str], data: list[list[str]]
) -> list[str]:
    """Fixed-width table with a grouped header row spanning sub-columns."""
    widths = [max(len(row[i]) for row in [sub] + data) for i in range(len(sub))]
    start = 0
    for label, span in groups:
        total = sum(widths[start : start + span]) + 3 * (span - 1)
        if len(label) > total:
            widths[start + span - 1] += len(label) - total
        start += span
    top_cells = []
    start = 0
    for label, span in groups:
        total = sum(widths[start : start + span]) + 3 * (span - 1)
        top_cells.append(label.ljust(total))
        start += span
    lines = [" | ".join(top_cells).rstrip()]
    lines.append(" | ".join(c.ljust(w) for c, w in zip(sub, widths)).rstrip())
    lines.append("-+-".join("-" * w for w in widths))
    lines.extend(" | ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in data)
    return lines


def _flag_mark(cell: MetricCell) -> str:
    mark = ""
    if POLARITY_WARNING in cell.flags:
        mark += "*"
    if DEGENERATE_THRESHOLD in cell.flags:
        mark += "!"
    return mark


def _render_vulnerability(report: MetricsReport) -> list[str]:
    models = _ordered_unique(c.model for c in report.cells)
    morph_types = _ordered_unique(c.morph_type for c in report.cells)
    columns = []  # (model, metric, operating_point, header_label)
    for model in models:
        for c in report.cells:
            if c.model != model:
                continue
            key = (model, c.metric, c.operating_point)
            if key in [col[:3] for col in columns]:
                continue
            if c.metric == "MMPMR":
                label = c.operating_point
            elif c.metric == "FMMPMR" and c.operating_point.startswith("MMPMR"):
                label = "F" + c.operating_point
            else:
                label = f"{c.metric} {c.operating_point}".strip()
            columns.append((model, c.metric, c.operating_point, label))
    by_key = {c.key(): c for c in report.cells}
    groups = [("morphing technique", 1)]
    for model in models:
        span = sum(1 for col in columns if col[0] == model)
        groups.append((model, span))
    header_sub = [""] + [label for _, _, _, label in columns]
    data = []
    for morph_type in morph_types:
        row = [morph_type]
        for model, metric, op, _ in columns:
            cell = by_key.get((model, morph_type, metric, op))
            row.append("-" if cell is None else f"{cell.value:.3f}{_flag_mark(cell)}")
        data.append(row)
    return ["Vulnerability (MMPMR at FMR-anchored thresholds)", ""] + _span_layout(
        groups, header_sub, data
    )


def _render_mad(report: MetricsReport) -> list[str]:
    pairs = _ordered_unique((c.model, c.morph_type) for c in report.cells)
    apcer_ops = _ordered_unique(
        c.operating_point for c in report.cells if c.metric == "APCER"
    )
    by_key = {c.key(): c for c in report.cells}
    groups = [("MAD", 1), ("test data", 1), ("EER (%)", 1)]
    if apcer_ops:
        groups.append(("APCER (%) @ BPCER (%)", len(apcer_ops)))
    header_sub = ["", "", ""] + [
        op.removeprefix("BPCER").removesuffix("%") for op in apcer_ops
    ]
    data = []
    for model, morph_type in pairs:
        row = [model, morph_type]
        eer_cell = by_key.get((model, morph_type, "EER", ""))
        row.append("-" if eer_cell is None else f"{eer_cell.value * 100:.2f}{_flag_mark(eer_cell)}")
        for op in apcer_ops:
            cell = by_key.get((model, morph_type, "APCER", op))
            row.append("-" if cell is None else f"{cell.value * 100:.2f}{_flag_mark(cell)}")
        data.append(row)
    return ["Detectability (ISO/IEC 30107-3 error rates)", ""] + _span_layout(
        groups, header_sub, data
    )


def render_text(report: MetricsReport) -> str:
    """Plain-text table mirroring the published layout for the report's kind."""
    if report.kind == "vulnerability":
        lines = _render_vulnerability(report)
    elif report.kind == "mad":
        lines = _render_mad(report)
    else:
        raise SchemaError(f"cannot render report of kind {report.kind!r}")
    if any(POLARITY_WARNING in c.flags for c in report.cells):
        lines += ["", "* EER above 50%: the detector scores bona fide closer to the"
                      " attack side than the attacks themselves."]
    if any(DEGENERATE_THRESHOLD in c.flags for c in report.cells):
        lines += ["", "! only the degenerate all-bona-fide threshold met the BPCER budget."]
    prov = report.provenance
    if prov.tool or prov.inputs or prov.parameters:
        lines.append("")
        if prov.tool:
            lines.append(f"tool: {prov.tool}")
        for key, value in prov.parameters:
            lines.append(f"parameter: {key}={value}")
        for name, digest in prov.inputs:
            lines.append(f"input: {name} {digest}")
    return "\n".join(lines) + "\n"
