"""Exception hierarchy shared by every contextrec module."""


class ContextRecError(Exception):
    """Base class for domain failures.

    ``category`` is a short machine-readable tag; the CLI prints it in front
    of the human detail so failures can be grepped.
    """

    category = "error"

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class OntologyError(ContextRecError):
    category = "ontology"


class InvalidCoordinateError(ContextRecError, ValueError):
    category = "coordinates"


class GraphError(ContextRecError):
    category = "graph"


class LogParseError(ContextRecError):
    """A sensor log or annotation line could not be accepted."""

    category = "ingest-parse"

    def __init__(self, detail: str, line_number: int | None = None):
        if line_number is not None:
            detail = f"line {line_number}: {detail}"
        super().__init__(detail)
        self.line_number = line_number


class WindowingError(ContextRecError):
    category = "windowing"


class FeatureError(ContextRecError):
    category = "features"


class ImputationError(ContextRecError):
    category = "imputation"


class GeneratorParamsError(ContextRecError):
    category = "params"


class ForestError(ContextRecError):
    category = "forest"


class ModelFormatError(ContextRecError):
    category = "model-format"


class ExperimentError(ContextRecError):
    category = "experiment"


class MetricError(ContextRecError):
    category = "metric"


class ReportMismatchError(ContextRecError):
    category = "report-mismatch"
