"""Source readers, the graph build pipeline and the demonstration fixture."""

from ..graph.schema import derive_schema
from .fixture import fixture_graph, write_fixture
from .pipeline import EtlReport, Rejection, apply_topology, build_graph
from .sources import EtlFatalError, Record, SourceBundle

__all__ = [
    "EtlFatalError",
    "EtlReport",
    "Record",
    "Rejection",
    "SourceBundle",
    "apply_topology",
    "build_graph",
    "derive_schema",
    "fixture_graph",
    "write_fixture",
]
