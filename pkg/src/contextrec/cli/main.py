"""Command-line entry point."""

import argparse
import dataclasses
import logging
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from contextrec.core.config import Settings, get_settings, load_config_from_yaml
from contextrec.core.errors import ContextRecError, ExperimentError, ForestError
from contextrec.core.logging import configure_logging
from contextrec.core.manifest import RunManifest, write_manifest
from contextrec.experiment import (
    ExperimentSpec,
    augment_matrix,
    augmented_names,
    group_reports,
    improvement_table,
    load_report,
    make_spec,
    plot_data,
    render_csv,
    render_grid,
    report_filename,
    run_all,
    run_experiment,
    save_report,
    tune_sensors_only,
)
from contextrec.forest import ForestParams, save_forest, train_forest
from contextrec.graph import ContextGraph, classroom_scene
from contextrec.ingestion import (
    build_records,
    impute,
    load_catalog,
    load_recipe,
    read_annotations,
    read_records,
    read_sensor_log,
    write_records,
)
from contextrec.ontology import RECOGNIZED_ASPECTS, Aspect, Ontology, default_ontology, load_ontology_file
from contextrec.ontology.loader import describe_validation_error
from contextrec.synthdata import make_params, sample_dataset, write_dataset

logger = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest.json"


def parse_aspects(text: str) -> tuple[Aspect, ...]:
    """``WE,WO`` -> (WE, WO); empty text means no aspects."""
    try:
        return tuple(Aspect(part.strip().upper()) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def parse_depth(text: str) -> int | None:
    if text.strip().lower() in ("none", "null", "unlimited"):
        return None
    try:
        depth = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid depth {text!r}") from e
    if depth < 1:
        raise argparse.ArgumentTypeError("depth must be positive")
    return depth


def parse_depth_grid(text: str) -> list[int | None]:
    return [parse_depth(part) for part in text.split(",") if part.strip()]


def _resolve_settings(args: argparse.Namespace) -> Settings:
    if args.config is not None:
        try:
            return Settings(**load_config_from_yaml(args.config))
        except ValidationError as e:
            raise ContextRecError(f"{args.config}: {describe_validation_error(e)}") from e
    return get_settings()


def _seed(args: argparse.Namespace, settings: Settings) -> int:
    return args.seed if args.seed is not None else settings.seed


def _ontology(args: argparse.Namespace, settings: Settings) -> Ontology:
    path = getattr(args, "ontology", None) or settings.paths.ontology
    if path is None:
        return default_ontology()
    return load_ontology_file(path, strict=getattr(args, "strict", False))


def _forest_params(args: argparse.Namespace, settings: Settings, seed: int) -> ForestParams:
    values = settings.forest.model_dump()
    if getattr(args, "trees", None) is not None:
        values["trees"] = args.trees
    try:
        return ForestParams(**values, seed=seed)
    except ValidationError as e:
        raise ForestError(describe_validation_error(e)) from e


def _echo(args: argparse.Namespace, settings: Settings) -> dict[str, Any]:
    """Resolved configuration for the manifest."""
    flags = {}
    for key, value in vars(args).items():
        if key == "handler":
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple | list):
            value = [str(v) if v is not None else None for v in value]
        flags[key] = value
    return {"settings": settings.model_dump(mode="json"), "flags": flags}


def _manifest(
    args: argparse.Namespace, settings: Settings, seed: int | None, outputs: list[str], **extra: Any
) -> RunManifest:
    return RunManifest(command=args.command, seed=seed, config=_echo(args, settings), outputs=outputs, extra=extra)


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    ontology = _ontology(args, settings)
    print(f"ok: ontology {ontology.version} with {ontology.label_count()} labels")
    if args.annotations is not None:
        annotations = read_annotations(args.annotations, ontology)
        print(f"ok: {len(annotations)} annotations")
    return 0


def cmd_ingest(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    ontology = _ontology(args, settings)
    catalog = load_catalog(args.catalog or settings.paths.catalog)
    recipe = load_recipe(args.recipe or settings.paths.recipe)
    strict = args.strict or settings.ingestion.strict
    minutes = args.window_minutes or settings.ingestion.window_minutes
    workers = args.workers or settings.ingestion.workers

    log = read_sensor_log(args.sensors, catalog, strict=strict)
    annotations = read_annotations(args.annotations, ontology)
    dataset, stats = build_records(
        log.readings, annotations, catalog, recipe, ontology, window_ms=minutes * 60_000, workers=workers
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_records(dataset, args.out)
    write_manifest(
        args.out,
        _manifest(
            args,
            settings,
            None,
            [args.out.name],
            digest=dataset.digest(),
            vocabularies={aspect.value: list(labels) for aspect, labels in dataset.vocabularies.items()},
            stats=dataclasses.asdict(stats),
            skipped_lines=log.skipped,
            skipped_by_reason=dict(log.skipped_by_reason),
            runtime_seconds=round(time.perf_counter() - started, 3),
        ),
    )
    print(f"wrote {len(dataset)} records of width {dataset.width} to {args.out}")
    return 0


def cmd_generate(args: argparse.Namespace, settings: Settings) -> int:
    values = settings.synth.model_dump()
    overrides = {
        "users": args.users,
        "records_per_user": args.records_per_user,
        "we_size": args.we_size,
        "wa_size": args.wa_size,
        "wo_size": args.wo_size,
        "rho": args.rho,
        "width": args.width,
        "noise_scale": args.noise,
    }
    values.update({key: value for key, value in overrides.items() if value is not None})
    params = make_params(**values, seed=_seed(args, settings))

    dataset = sample_dataset(params, workers=args.workers or 1)
    write_dataset(dataset, params, args.out, config=_echo(args, settings))
    print(f"wrote {len(dataset)} synthetic records (rho={params.rho}) to {args.out}")
    return 0


def cmd_train(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    seed = _seed(args, settings)
    dataset = read_records(args.records)
    spec = make_spec(
        target=args.target,
        inputs=args.with_aspects or (),
        forest=_forest_params(args, settings, seed),
        depth_grid=args.depth_grid or settings.experiment.depth_grid,
        seed=seed,
    )
    depth = args.depth if "depth" in args else tune_sensors_only(dataset, spec, args.workers or 1)

    filled = impute(dataset)
    features = augment_matrix(filled.features, dataset.labels, spec.inputs, dataset.vocabularies)
    forest = train_forest(
        features,
        dataset.encoded(spec.target),
        dataset.vocabularies[spec.target],
        spec.forest.model_copy(update={"max_depth": depth}),
        workers=args.workers or 1,
    )
    save_forest(forest, args.out)
    write_manifest(
        args.out,
        _manifest(
            args,
            settings,
            seed,
            [args.out.name],
            target=spec.target.value,
            inputs=[a.value for a in spec.inputs],
            depth=depth,
            digest=dataset.digest(),
            feature_names=augmented_names(filled.feature_names, spec.inputs, dataset.vocabularies),
            runtime_seconds=round(time.perf_counter() - started, 3),
        ),
    )
    print(f"wrote {len(forest.trees)}-tree forest (max depth {depth}) to {args.out}")
    return 0


def _experiment_template(args: argparse.Namespace, settings: Settings, target: Aspect) -> ExperimentSpec:
    seed = _seed(args, settings)
    return make_spec(
        target=target,
        inputs=args.with_aspects or (),
        protocol=args.protocol or settings.experiment.protocol,
        forest=_forest_params(args, settings, seed),
        depth_grid=args.depth_grid or settings.experiment.depth_grid,
        folds=args.folds or settings.experiment.folds,
        seed=seed,
        label_source=args.label_source,
        stratified=args.stratified,
        append_mask_features=args.mask_features,
    )


def cmd_experiment(args: argparse.Namespace, settings: Settings) -> int:
    started = time.perf_counter()
    dataset = read_records(args.records)
    workers = args.workers or settings.experiment.workers

    if args.target is not None:
        spec = _experiment_template(args, settings, args.target)
        report = run_experiment(dataset, spec, workers)
        save_report(report, args.out)
        outputs = [args.out.name]
        print(f"{spec.target} {spec.arm}: user-mean micro-F1 {report.summary.user_mean_f1:.4f}")
    else:
        if args.with_aspects:
            raise ExperimentError("--with-aspects needs --target; without it every arm is run")
        template = _experiment_template(args, settings, Aspect.WA)
        args.out.mkdir(parents=True, exist_ok=True)
        outputs = []
        for arms in run_all(dataset, template, workers).values():
            for report in arms.values():
                name = report_filename(report)
                save_report(report, args.out / name)
                outputs.append(name)
        print(f"wrote {len(outputs)} reports to {args.out}")

    write_manifest(
        args.out,
        _manifest(
            args,
            settings,
            _seed(args, settings),
            outputs,
            digest=dataset.digest(),
            runtime_seconds=round(time.perf_counter() - started, 3),
        ),
    )
    return 0


def _report_files(paths: Sequence[Path]) -> list[Path]:
    files: list[Path] = []
    for path in paths:
        if path.is_dir():
            files += sorted(
                p for p in path.glob("*.json") if p.name != "manifest.json" and not p.name.endswith(MANIFEST_SUFFIX)
            )
        else:
            files.append(path)
    if not files:
        raise ExperimentError("no report files found")
    return files


def cmd_report(args: argparse.Namespace, settings: Settings) -> int:
    reports = [load_report(path) for path in _report_files(args.reports)]
    if args.format == "plotdata":
        text = plot_data(reports)
    else:
        table = improvement_table(group_reports(reports))
        text = render_grid(table) if args.format == "grid" else render_csv(table)

    if args.out is None:
        sys.stdout.write(text)
        return 0
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text)
    write_manifest(args.out, _manifest(args, settings, None, [args.out.name], digest=reports[0].digest))
    return 0


def cmd_graph(args: argparse.Namespace, settings: Settings) -> int:
    ontology = _ontology(args, settings)
    graph = ContextGraph.import_file(args.input, ontology) if args.input else classroom_scene(ontology)
    if args.aspect is not None:
        for entity in graph.query_context(args.aspect):
            print(f"{entity.id}\t{entity.category}\t{entity.attributes.get('label', '')}")
    if args.entity is not None:
        for relation in graph.relations_of(args.entity):
            print(f"{relation.source}\t{relation.label}\t{relation.target}")
    if args.out is not None:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        graph.export_file(args.out)
        write_manifest(args.out, _manifest(args, settings, None, [args.out.name]))
    if args.aspect is None and args.entity is None:
        print(f"{len(graph)} entities, {len(graph.relations)} relations")
    return 0


def _add_forest_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--trees", type=int, help="Trees per forest")
    parser.add_argument("--depth-grid", type=parse_depth_grid, help="Comma-separated depths; 'none' = unlimited")
    parser.add_argument("--workers", type=int, help="Worker threads")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    common.add_argument("--config", type=Path, help="YAML settings file")
    common.add_argument("--seed", type=int, help="Master seed; every random stream derives from it")

    parser = argparse.ArgumentParser(prog="contextrec", description="Context modeling and recognition toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    validate = commands.add_parser("validate", parents=[common], help="Check an ontology and optional annotations")
    validate.add_argument("--ontology", type=Path)
    validate.add_argument("--annotations", type=Path)
    validate.add_argument("--strict", action="store_true", help="Reject unknown keys")
    validate.set_defaults(handler=cmd_validate)

    ingest = commands.add_parser("ingest", parents=[common], help="Turn sensor logs and annotations into records")
    ingest.add_argument("--sensors", type=Path, required=True)
    ingest.add_argument("--annotations", type=Path, required=True)
    ingest.add_argument("--ontology", type=Path)
    ingest.add_argument("--catalog", type=Path)
    ingest.add_argument("--recipe", type=Path)
    ingest.add_argument("--window-minutes", type=int)
    ingest.add_argument("--strict", action="store_true", help="Fail on unknown sensors and bad values")
    ingest.add_argument("--workers", type=int)
    ingest.add_argument("--out", type=Path, required=True)
    ingest.set_defaults(handler=cmd_ingest)

    generate = commands.add_parser("generate", parents=[common], help="Sample a synthetic dataset")
    generate.add_argument("--rho", type=float, help="Correlation strength in [0,1]")
    generate.add_argument("--users", type=int)
    generate.add_argument("--records-per-user", type=int)
    generate.add_argument("--we-size", type=int)
    generate.add_argument("--wa-size", type=int)
    generate.add_argument("--wo-size", type=int)
    generate.add_argument("--width", type=int)
    generate.add_argument("--noise", type=float)
    generate.add_argument("--workers", type=int)
    generate.add_argument("--out", type=Path, required=True)
    generate.set_defaults(handler=cmd_generate)

    train = commands.add_parser("train", parents=[common], help="Train and save one forest")
    train.add_argument("--records", type=Path, required=True)
    train.add_argument("--target", type=Aspect, choices=list(RECOGNIZED_ASPECTS), required=True)
    train.add_argument("--with-aspects", type=parse_aspects, default=())
    train.add_argument("--depth", type=parse_depth, default=argparse.SUPPRESS, help="Fixed max depth; tuned on the grid when omitted")
    _add_forest_flags(train)
    train.add_argument("--out", type=Path, required=True)
    train.set_defaults(handler=cmd_train)

    experiment = commands.add_parser("experiment", parents=[common], help="Cross-validate recognition arms")
    experiment.add_argument("--records", type=Path, required=True)
    experiment.add_argument("--target", type=Aspect, choices=list(RECOGNIZED_ASPECTS), help="Run one arm; all twelve when omitted")
    experiment.add_argument("--with-aspects", type=parse_aspects, default=())
    experiment.add_argument("--protocol", choices=["cv5", "nested"])
    experiment.add_argument("--folds", type=int)
    experiment.add_argument("--label-source", choices=["truth", "predicted"], default="truth")
    experiment.add_argument("--stratified", action="store_true")
    experiment.add_argument("--mask-features", action="store_true", help="Append missing-value indicators")
    _add_forest_flags(experiment)
    experiment.add_argument("--out", type=Path, required=True)
    experiment.set_defaults(handler=cmd_experiment)

    report = commands.add_parser("report", parents=[common], help="Render reports as a table or plot data")
    report.add_argument("--reports", type=Path, nargs="+", required=True, help="Report files or directories")
    report.add_argument("--format", choices=["grid", "csv", "plotdata"], default="grid")
    report.add_argument("--out", type=Path)
    report.set_defaults(handler=cmd_report)

    graph = commands.add_parser("graph", parents=[common], help="Import, query and export a context graph")
    graph.add_argument("--input", type=Path, help="JSON-lines graph; the classroom scene when omitted")
    graph.add_argument("--ontology", type=Path)
    graph.add_argument("--aspect", type=Aspect, choices=list(Aspect))
    graph.add_argument("--entity")
    graph.add_argument("--out", type=Path)
    graph.set_defaults(handler=cmd_graph)

    return parser


def run(argv: Sequence[str] | None = None) -> int:
    """
    Run one command and return its exit code.

    0 on success, 1 with ``error[<category>]: <detail>`` on stderr for domain
    failures, 2 for usage errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    configure_logging(args.verbose)
    try:
        settings = _resolve_settings(args)
        return args.handler(args, settings)
    except ContextRecError as e:
        print(f"error[{e.category}]: {e.detail}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error[io]: {e.filename or ''}: {e.strerror}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
