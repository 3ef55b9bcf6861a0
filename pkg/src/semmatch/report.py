"""Rendering of reports: text tables, CSV, and figure files.

The delimited outputs are deterministic byte for byte; figures are
rendered with the Agg backend straight to the path the caller names.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

from .agreement import FullAgreement, PeerMatchResult
from .evaluation import EvalReport
from .matcher import HalfAgreement, MatchConfig

SWEEP_COLUMNS = (
    "labelThreshold",
    "externalThreshold",
    "confidenceThreshold",
    "labelWeight",
    "externalWeight",
    "internalWeight",
    "measure",
    "oneToOne",
    "flatNeutral",
    "found",
    "correct",
    "incorrect",
    "missed",
    "precision",
    "recall",
    "fMeasure",
)


def _cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_report_table(report: EvalReport) -> str:
    rows = [
        ("found", str(report.found)),
        ("correct", str(report.correct)),
        ("incorrect", str(report.incorrect)),
        ("missed", str(report.missed)),
        ("precision", f"{report.precision:.4f}"),
        ("recall", f"{report.recall:.4f}"),
        ("fMeasure", f"{report.f_measure:.4f}"),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{name:<{width}}  {value}" for name, value in rows]
    return "\n".join(lines) + "\n"


def sweep_to_csv(rows: Sequence[tuple[MatchConfig, EvalReport]]) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for config, report in rows:
        record = {**config.to_dict(), **report.to_dict()}
        lines.append(",".join(_cell(record[col]) for col in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def _render_rows(header: Sequence[str], body: Sequence[Sequence[str]]) -> str:
    widths = [len(h) for h in header]
    for row in body:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(f"{h:<{w}}" for h, w in zip(header, widths)).rstrip()]
    for row in body:
        lines.append("  ".join(f"{c:<{w}}" for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def half_agreement_table(half: HalfAgreement) -> str:
    header = ("sourceRef", "targetRef", "label", "external", "internal", "confidence", "verdict")
    body = [
        (
            unit.source_ref,
            unit.target_ref,
            f"{unit.label_score:.4f}",
            f"{unit.external_score:.4f}",
            f"{unit.internal_score:.4f}",
            f"{unit.confidence:.4f}",
            unit.verdict,
        )
        for unit in half.units
    ]
    summary = (
        f"peer={half.peer_id} schema={half.schema_id} "
        f"ontology={half.common_ontology_id} units={len(half.units)}\n"
    )
    return _render_rows(header, body) + summary


def match_result_table(result: PeerMatchResult) -> str:
    lines = [
        f"requester  {result.requester_id}",
        f"provider   {result.provider_id}",
        f"overlap    {result.overlap_score:.4f}",
        f"verdict    {result.verdict}",
        f"shared     {', '.join(result.shared_targets) if result.shared_targets else '(none)'}",
    ]
    return "\n".join(lines) + "\n"


def full_agreement_table(full: FullAgreement) -> str:
    header = ("sourceRef", "targetRef", "confidence", "via")
    body = [
        (link.source_ref, link.target_ref, f"{link.confidence:.4f}", link.via)
        for link in full.links
    ]
    summary = (
        f"requester={full.requester_id} provider={full.provider_id} "
        f"links={len(full.links)}\n"
    )
    return _render_rows(header, body) + summary


def save_report_figure(report: EvalReport, path: str | Path, title: str | None = None) -> Path:
    """Render precision / recall / F as a bar chart PNG (or any savefig format)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    names = ["precision", "recall", "F-measure"]
    values = [report.precision, report.recall, report.f_measure]
    bars = ax.bar(names, values, color=["#4878d0", "#ee854a", "#6acc64"])
    for bar, value in zip(bars, values):
        ax.annotate(
            f"{value:.2f}",
            (bar.get_x() + bar.get_width() / 2, value),
            ha="center",
            va="bottom",
            fontsize=9,
        )
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("score")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(
    rows: Sequence[tuple[MatchConfig, EvalReport]],
    path: str | Path,
    title: str | None = None,
) -> Path:
    """Plot precision / recall / F across the sweep grid.

    When the rows vary only in the confidence threshold that threshold
    becomes the x axis; otherwise rows are plotted by grid position.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    configs = [config for config, _ in rows]
    thresholds = [config.confidence_threshold for config in configs]
    only_confidence_varies = len(set(thresholds)) == len(rows) and all(
        config.to_dict() == {**configs[0].to_dict(), "confidenceThreshold": config.confidence_threshold}
        for config in configs
    )
    if only_confidence_varies:
        xs = thresholds
        xlabel = "confidence threshold"
    else:
        xs = list(range(len(rows)))
        xlabel = "grid row"
    fig, ax = plt.subplots(figsize=(4.8, 3.2))
    for name, pick in (
        ("precision", lambda r: r.precision),
        ("recall", lambda r: r.recall),
        ("F-measure", lambda r: r.f_measure),
    ):
        ax.plot(xs, [pick(report) for _, report in rows], marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("score")
    ax.set_ylim(-0.05, 1.05)
    ax.legend(loc="best", fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
