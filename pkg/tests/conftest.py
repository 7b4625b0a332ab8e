"""Pytest fixtures for contextrec tests."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def ontology():
    """The packaged questionnaire ontology."""
    from contextrec.ontology import default_ontology

    return default_ontology()


@pytest.fixture
def lesson_context():
    """Machine-level description of the lesson row: 11:00 local time at the classroom."""
    from contextrec.ontology import AspectDescriptor, ContextTuple, GeoPoint

    # 2020-02-17T10:00:00Z, one hour ahead in local time
    at = 1581933600000
    return ContextTuple(
        owner="shen",
        at=at,
        time=AspectDescriptor(objective="Monday 17 February 2020, 11:00", machine=at),
        we=AspectDescriptor(objective="Via Sommarive, 9, Povo", machine=GeoPoint(46.067194, 11.150667)),
        wa=AspectDescriptor(objective="attending a lesson"),
        wo=AspectDescriptor(objective="classmates"),
        wi=AspectDescriptor(objective="laptop"),
    )


@pytest.fixture
def tiny_params():
    """Small, well-separated synthetic dataset parameters."""
    from contextrec.synthdata import GeneratorParams

    return GeneratorParams(
        users=4,
        records_per_user=30,
        we_size=3,
        wa_size=4,
        wo_size=2,
        rho=0.8,
        width=9,
        noise_scale=0.3,
        seed=11,
    )


@pytest.fixture
def tiny_dataset(tiny_params):
    """A 120-record synthetic dataset."""
    from contextrec.synthdata import sample_dataset

    return sample_dataset(tiny_params)


@pytest.fixture
def small_forest_params():
    """A cheap forest for tests that only need a working classifier."""
    from contextrec.forest import ForestParams

    return ForestParams(trees=5, seed=3)


@pytest.fixture
def xor_data():
    """Four points labelled by the XOR of two binary features."""
    features = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    labels = np.array([0, 1, 1, 0])
    return features, labels


@pytest.fixture
def workspace(tmp_path):
    """A temporary directory for run outputs."""
    path = tmp_path / "workspace"
    path.mkdir()
    return path


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR
