"""Improvement tables, report files and plot data."""

import io
import json
import logging
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from contextrec.core.errors import ExperimentError, ReportMismatchError
from contextrec.experiment.runner import TABLE_TARGETS, ExperimentReport, arm_name, input_configurations
from contextrec.ontology.model import RECOGNIZED_ASPECTS, Aspect

logger = logging.getLogger(__name__)

# Row label and the single aspect it adds; None adds both other aspects.
TABLE_ROWS: tuple[tuple[str, Aspect | None], ...] = (
    ("Sensors + WA", Aspect.WA),
    ("Sensors + WE", Aspect.WE),
    ("Sensors + WO", Aspect.WO),
    ("Sensors + Other Aspects", None),
)
FIRST_COLUMN_WIDTH = 24
COLUMN_WIDTH = 10

ReportGrid = Mapping[Aspect, Mapping[tuple[Aspect, ...], ExperimentReport]]


@dataclass(frozen=True)
class ImprovementTable:
    """
    F1 gains over the sensors-only arm, in percentage points.

    ``cells[(row, target)]`` is None where the row adds the target itself.
    """

    targets: tuple[Aspect, ...]
    rows: tuple[str, ...]
    cells: dict[tuple[str, Aspect], float | None]

    def cell(self, row: str, target: Aspect) -> float | None:
        return self.cells[(row, Aspect(target))]


def save_report(report: ExperimentReport, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n")


def load_report(path: Path) -> ExperimentReport:
    """
    Read a report file.

    Raises:
        ExperimentError: If the file is missing or not a valid report
    """
    try:
        return ExperimentReport.model_validate(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise ExperimentError(f"cannot read report {path}: {e}") from e


def report_filename(report: ExperimentReport) -> str:
    return f"{report.spec.target.value}_{report.spec.arm}.json"


def group_reports(reports: Iterable[ExperimentReport]) -> dict[Aspect, dict[tuple[Aspect, ...], ExperimentReport]]:
    """Index reports by target, then by input aspects."""
    grouped: dict[Aspect, dict[tuple[Aspect, ...], ExperimentReport]] = {}
    for report in reports:
        grouped.setdefault(report.spec.target, {})[report.spec.inputs] = report
    return grouped


def _check_comparable(reports: ReportGrid) -> None:
    flat = [report for arms in reports.values() for report in arms.values()]
    digests = {report.digest for report in flat}
    if len(digests) > 1:
        raise ReportMismatchError(f"reports come from {len(digests)} different datasets")
    protocols = {(report.spec.protocol, report.spec.label_source) for report in flat}
    if len(protocols) > 1:
        raise ReportMismatchError(f"reports mix protocols {sorted(protocols)}")


def improvement_table(reports: ReportGrid, targets: tuple[Aspect, ...] = TABLE_TARGETS) -> ImprovementTable:
    """
    Percentage-point gains in user-mean micro-F1 over the sensors-only arm.

    Raises:
        ReportMismatchError: If reports differ in dataset digest or protocol
        ExperimentError: If an arm needed by the table is missing
    """
    _check_comparable(reports)

    def score(target: Aspect, inputs: tuple[Aspect, ...]) -> float:
        try:
            return reports[target][inputs].summary.user_mean_f1
        except KeyError:
            raise ExperimentError(f"no report for target {target} with {arm_name(inputs)}") from None

    cells: dict[tuple[str, Aspect], float | None] = {}
    for target in targets:
        baseline = score(target, ())
        both = input_configurations(target)[-1]
        for row, added in TABLE_ROWS:
            if added == target:
                cells[(row, target)] = None
                continue
            inputs = both if added is None else (added,)
            cells[(row, target)] = 100.0 * (score(target, inputs) - baseline)
    return ImprovementTable(targets=tuple(targets), rows=tuple(row for row, _ in TABLE_ROWS), cells=cells)


def format_cell(value: float | None) -> str:
    return "--" if value is None else f"{value:+.2f}%"


def render_grid(table: ImprovementTable) -> str:
    """Fixed-width text grid: one row per input configuration, one column per target."""
    lines = ["Inputs".ljust(FIRST_COLUMN_WIDTH) + "".join(t.value.ljust(COLUMN_WIDTH) for t in table.targets)]
    for row in table.rows:
        cells = "".join(format_cell(table.cell(row, t)).ljust(COLUMN_WIDTH) for t in table.targets)
        lines.append(row.ljust(FIRST_COLUMN_WIDTH) + cells)
    return "\n".join(line.rstrip() for line in lines) + "\n"


def render_csv(table: ImprovementTable) -> str:
    """Comma-separated gains; absent diagonal cells are empty."""
    frame = pd.DataFrame(
        [[table.cell(row, t) for t in table.targets] for row in table.rows],
        index=pd.Index(table.rows, name="inputs"),
        columns=[t.value for t in table.targets],
        dtype=float,
    )
    buffer = io.StringIO()
    frame.to_csv(buffer, float_format="%.2f", na_rep="", lineterminator="\n")
    return buffer.getvalue()


def plot_data(reports: Iterable[ExperimentReport]) -> str:
    """
    Long-format CSV of per-label F1 averaged over users.

    Columns: target, arm, label, f1, users, supported.
    """
    order = {aspect: i for i, aspect in enumerate(RECOGNIZED_ASPECTS)}
    rows = []
    ranked = sorted(reports, key=lambda r: (order[r.spec.target], len(r.spec.inputs), r.spec.arm))
    for report in ranked:
        for label, summary in report.per_label.items():
            rows.append(
                {
                    "target": report.spec.target.value,
                    "arm": report.spec.arm,
                    "label": label,
                    "f1": summary.f1,
                    "users": summary.users,
                    "supported": int(summary.supported),
                }
            )
    frame = pd.DataFrame(rows, columns=["target", "arm", "label", "f1", "users", "supported"])
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format="%.6f", lineterminator="\n")
    return buffer.getvalue()
