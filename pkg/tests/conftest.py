"""Shared fixtures: embedding tables and small corpora reused across files."""

from __future__ import annotations

import pytest

from sgir.embeddings import synth_table
from sgir.synthetic import themed_corpus, records_to_annotations
from sgir.graphs import preprocess_corpus


@pytest.fixture(scope="session")
def table16():
    return synth_table(42, n_object=96, n_predicate=48, dim=16)


@pytest.fixture(scope="session")
def table64():
    return synth_table(42, n_object=96, n_predicate=48, dim=64)


@pytest.fixture(scope="session")
def tiny_table():
    return synth_table(7, n_object=10, n_predicate=5, dim=6)


@pytest.fixture(scope="session")
def tiny_graphs(tiny_table):
    """A handful of small lifted scene graphs over the tiny table."""
    records = records_to_annotations(
        themed_corpus(3, 8, 10, 5, n_themes=2, objects_range=(3, 4)))
    graphs, dropped = preprocess_corpus(records, tiny_table)
    assert dropped == 0
    return graphs
