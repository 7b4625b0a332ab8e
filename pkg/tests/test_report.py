"""Tests for improvement tables, report files and plot data."""

import pytest

from contextrec.core.errors import ExperimentError, ReportMismatchError
from contextrec.experiment import (
    ExperimentReport,
    ExperimentSpec,
    FoldScore,
    LabelSummary,
    ReportSummary,
    group_reports,
    improvement_table,
    input_configurations,
    load_report,
    plot_data,
    render_csv,
    render_grid,
    report_filename,
    save_report,
)
from contextrec.ontology import Aspect

WA, WE, WO = Aspect.WA, Aspect.WE, Aspect.WO

# Gains in percentage points per (target, inputs) used to build the fixture reports.
GAINS = {
    WA: {(WE,): 8.27, (WO,): 3.34, (WE, WO): 11.25},
    WE: {(WA,): 8.80, (WO,): 3.27, (WA, WO): 11.57},
    WO: {(WE,): 3.09, (WA,): 2.36, (WE, WA): 5.31},
}


def make_report(target, inputs, score, digest="abc", protocol="cv5", per_label=None):
    return ExperimentReport(
        spec=ExperimentSpec(target=target, inputs=inputs, protocol=protocol),
        folds=[FoldScore(index=0, size=10, micro_f1=score, depth=4)],
        per_user={"u000": score},
        per_label=per_label or {},
        depth=4,
        digest=digest,
        summary=ReportSummary(user_mean_f1=score, pooled_f1=score, fold_mean_f1=score),
    )


def fixture_reports(gains=GAINS, baseline=0.5):
    reports = []
    for target in (WA, WE, WO):
        reports.append(make_report(target, (), baseline))
        for inputs in input_configurations(target)[1:]:
            reports.append(make_report(target, inputs, baseline + gains[target][inputs] / 100))
    return reports


class TestImprovementTable:
    """Tests for the gains table."""

    def test_golden_grid(self, golden_dir):
        """Test the text grid matches the stored rendering."""
        table = improvement_table(group_reports(fixture_reports()))
        assert render_grid(table) == (golden_dir / "improvement_grid.txt").read_text()

    def test_cells(self):
        """Test gains are percentage points and the diagonal is empty."""
        table = improvement_table(group_reports(fixture_reports()))
        assert table.cell("Sensors + WE", WA) == pytest.approx(8.27)
        assert table.cell("Sensors + Other Aspects", WO) == pytest.approx(5.31)
        assert table.cell("Sensors + WA", WA) is None

    def test_csv(self):
        """Test the comma-separated rendering."""
        table = improvement_table(group_reports(fixture_reports()))
        assert render_csv(table).splitlines() == [
            "inputs,WA,WE,WO",
            "Sensors + WA,,8.80,2.36",
            "Sensors + WE,8.27,,3.09",
            "Sensors + WO,3.34,3.27,",
            "Sensors + Other Aspects,11.25,11.57,5.31",
        ]

    def test_no_gain(self):
        """Test identical scores give a table of zeros."""
        flat = {target: {inputs: 0.0 for inputs in gains} for target, gains in GAINS.items()}
        text = render_grid(improvement_table(group_reports(fixture_reports(flat))))
        assert text.count("+0.00%") == 9
        assert text.count("--") == 3

    def test_losses_are_signed(self):
        """Test a worse arm renders with a minus sign."""
        gains = {target: dict(values) for target, values in GAINS.items()}
        gains[WA][(WO,)] = -1.5
        table = improvement_table(group_reports(fixture_reports(gains)))
        assert "-1.50%" in render_grid(table)

    def test_digest_mismatch(self):
        """Test reports from different datasets cannot be compared."""
        reports = fixture_reports()
        reports[0] = make_report(WA, (), 0.5, digest="other")
        with pytest.raises(ReportMismatchError, match="different datasets"):
            improvement_table(group_reports(reports))

    def test_protocol_mismatch(self):
        """Test reports from different protocols cannot be compared."""
        reports = fixture_reports()
        reports[0] = make_report(WA, (), 0.5, protocol="nested")
        with pytest.raises(ReportMismatchError, match="protocols"):
            improvement_table(group_reports(reports))

    def test_missing_arm(self):
        """Test every arm of the table is required."""
        reports = [r for r in fixture_reports() if r.spec.inputs != (WE, WO)]
        with pytest.raises(ExperimentError, match="sensors\\+WE\\+WO"):
            improvement_table(group_reports(reports))

    def test_single_target(self):
        """Test a table restricted to one target column."""
        reports = [r for r in fixture_reports() if r.spec.target == WO]
        table = improvement_table(group_reports(reports), targets=(WO,))
        assert render_grid(table).splitlines()[0] == "Inputs                  WO"


class TestReportFiles:
    """Tests for report persistence."""

    def test_round_trip(self, workspace):
        """Test save -> load returns an equal report."""
        report = make_report(WA, (WE,), 0.61, per_label={"study": LabelSummary(f1=0.5, users=3, supported=True)})
        path = workspace / report_filename(report)
        save_report(report, path)
        assert path.name == "WA_sensors+WE.json"
        assert load_report(path) == report

    def test_field_order(self, workspace):
        """Test the top-level key order of the file."""
        path = workspace / "r.json"
        save_report(make_report(WE, (), 0.4), path)
        keys = [line.split('"')[1] for line in path.read_text().splitlines() if line.startswith('  "')]
        assert keys == ["spec", "folds", "per_user", "per_label", "depth", "digest", "summary"]

    def test_unreadable(self, workspace):
        """Test missing and malformed report files."""
        with pytest.raises(ExperimentError):
            load_report(workspace / "absent.json")
        (workspace / "bad.json").write_text('{"spec": 1}')
        with pytest.raises(ExperimentError):
            load_report(workspace / "bad.json")


class TestPlotData:
    """Tests for the per-label long-format table."""

    def test_rows(self):
        """Test one row per report and label, ordered by target then arm size."""
        per_label = {
            "home": LabelSummary(f1=0.75, users=4, supported=True),
            "moon": LabelSummary(f1=0.0, users=0, supported=False),
        }
        reports = [
            make_report(WE, (WA, WO), 0.7, per_label=per_label),
            make_report(WA, (), 0.5, per_label={"rest": LabelSummary(f1=0.5, users=2, supported=True)}),
            make_report(WE, (), 0.6, per_label=per_label),
        ]
        lines = plot_data(reports).splitlines()
        assert lines[0] == "target,arm,label,f1,users,supported"
        assert lines[1:] == [
            "WE,sensors,home,0.750000,4,1",
            "WE,sensors,moon,0.000000,0,0",
            "WE,sensors+WA+WO,home,0.750000,4,1",
            "WE,sensors+WA+WO,moon,0.000000,0,0",
            "WA,sensors,rest,0.500000,2,1",
        ]
