#!/usr/bin/env python3
"""
Shared pytest fixtures for conflab tests.

Sample experiment documents live under data/ at the repository root and are
loaded from there, so the tests exercise the same files the CLI reads.

Key fixtures:
- data_dir: Path to the sample documents
- worked_example: the one-review market with a uniform prior (mu = 1/2, U[0, 1])
- dynamic_gap: the table-estimate market whose dynamic CoNF nears 4/3
- switching: the two-level quality market with a calibrated estimate
- rng: a seeded numpy Generator for property sweeps
"""

import pytest
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[2] / "data"


@pytest.fixture(scope="session")
def data_dir():
    """Fixture to provide the directory of sample experiment documents"""
    if not DATA_DIR.is_dir():
        pytest.fail(f"[FAIL] Sample data directory not found at {DATA_DIR}")
    return DATA_DIR


@pytest.fixture(scope="session")
def worked_example_path(data_dir):
    """Fixture to provide path to the worked-example document"""
    path = data_dir / "worked_example.json"
    if not path.exists():
        pytest.fail(f"[FAIL] Worked example document not found at {path}")
    return path


@pytest.fixture(scope="session")
def worked_example(worked_example_path):
    """Fixture to provide the worked-example instance, parsed from data/"""
    from conflab.config import load_document, parse_instance

    return parse_instance(load_document(worked_example_path)["instance"])


@pytest.fixture(scope="session")
def dynamic_gap(data_dir):
    """Fixture to provide the dynamic-gap instance at mu = 0.1"""
    from conflab.config import load_document, parse_instance

    return parse_instance(load_document(data_dir / "dynamic_gap.json")["instance"])


@pytest.fixture(scope="session")
def switching():
    """Fixture to provide the two-level quality example"""
    from conflab.experiments import switching_example

    return switching_example()


@pytest.fixture
def rng():
    """Fixture to provide a freshly seeded random generator"""
    import numpy as np

    return np.random.default_rng(20240917)
