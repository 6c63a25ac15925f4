from __future__ import annotations

from pathlib import Path

import pytest

from assetgraph.etl import build_graph, write_fixture
from assetgraph.router import Router, Workspace


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory) -> Path:
    d = tmp_path_factory.mktemp("fixture")
    write_fixture(d)
    return d


@pytest.fixture(scope="session")
def built(fixture_dir):
    """(graph, report) for the reference fixture; treat as read-only."""
    from assetgraph.etl import SourceBundle

    return build_graph(SourceBundle.from_dir(fixture_dir))


@pytest.fixture(scope="session")
def graph(built):
    return built[0]


@pytest.fixture(scope="session")
def det_router(graph):
    return Router(Workspace(graph))


@pytest.fixture()
def fresh_graph(fixture_dir):
    """A private graph for tests that mutate it."""
    from assetgraph.etl import SourceBundle

    return build_graph(SourceBundle.from_dir(fixture_dir))[0]
