"""Synthetic datasets with controllable inter-aspect correlation."""

from contextrec.synthdata.generator import (
    GeneratorParams,
    Structure,
    draw_structure,
    make_params,
    prototype_matrix,
    sample_dataset,
    vocabulary,
    write_dataset,
)
from contextrec.synthdata.information import mutual_information

__all__ = [
    "GeneratorParams",
    "Structure",
    "draw_structure",
    "make_params",
    "mutual_information",
    "prototype_matrix",
    "sample_dataset",
    "vocabulary",
    "write_dataset",
]
