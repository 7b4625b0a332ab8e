"""Inter-aspect augmentation experiments and their reports."""

from contextrec.experiment.encoding import (
    augment,
    augment_matrix,
    augmented_names,
    canonical_inputs,
    encode_block,
    one_hot,
)
from contextrec.experiment.folds import kfold, stratified_kfold
from contextrec.experiment.metrics import LabelScore, micro_f1, per_label_f1
from contextrec.experiment.report import (
    TABLE_ROWS,
    ImprovementTable,
    format_cell,
    group_reports,
    improvement_table,
    load_report,
    plot_data,
    render_csv,
    render_grid,
    report_filename,
    save_report,
)
from contextrec.experiment.runner import (
    DEFAULT_DEPTH_GRID,
    TABLE_TARGETS,
    ExperimentReport,
    ExperimentSpec,
    FoldScore,
    LabelSummary,
    ReportSummary,
    arm_name,
    input_configurations,
    make_folds,
    make_spec,
    run_all,
    run_arms,
    run_experiment,
    tune_sensors_only,
)

__all__ = [
    "DEFAULT_DEPTH_GRID",
    "TABLE_ROWS",
    "TABLE_TARGETS",
    "ExperimentReport",
    "ExperimentSpec",
    "FoldScore",
    "ImprovementTable",
    "LabelScore",
    "LabelSummary",
    "ReportSummary",
    "arm_name",
    "augment",
    "augment_matrix",
    "augmented_names",
    "canonical_inputs",
    "encode_block",
    "format_cell",
    "group_reports",
    "improvement_table",
    "input_configurations",
    "kfold",
    "load_report",
    "make_folds",
    "make_spec",
    "micro_f1",
    "per_label_f1",
    "plot_data",
    "render_csv",
    "render_grid",
    "report_filename",
    "run_all",
    "run_arms",
    "run_experiment",
    "save_report",
    "stratified_kfold",
    "tune_sensors_only",
]
