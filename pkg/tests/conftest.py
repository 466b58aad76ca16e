from pathlib import Path

import pytest

from hemtkit.measurement import ingest_sweep_file, load_metadata
from hemtkit.synth import generate_paper_fixture, paper_parameters


def load_family(directory, name):
    d = Path(directory)
    meta = load_metadata(d / f"{name}.json")
    return ingest_sweep_file(d / f"{name}.csv", meta), meta


@pytest.fixture(scope="session")
def paper_dir(tmp_path_factory):
    """Freshly generated paper-number fixture (noiseless)."""
    d = tmp_path_factory.mktemp("paper")
    generate_paper_fixture(d)
    return d


@pytest.fixture(scope="session")
def paper_params():
    return paper_parameters()


@pytest.fixture(scope="session")
def paper(paper_dir):
    """Families of the calibrated fixture as ingested from disk."""
    return {name: load_family(paper_dir, name)[0]
            for name in ("transfer_linear", "transfer_saturation", "output", "cv")}


@pytest.fixture(scope="session")
def paper_geometry(paper_dir):
    return load_metadata(Path(paper_dir) / "transfer_linear.json").geometry
