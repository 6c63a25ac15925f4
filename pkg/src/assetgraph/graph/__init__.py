from .schema import SchemaDescriptor, derive_schema
from .snapshot import Snapshot, SnapshotError
from .store import LLM_SOURCE, Direction, Edge, GraphError, GraphStore, Node, Provenance
from .values import Scalar, format_timestamp, parse_timestamp

__all__ = [
    "LLM_SOURCE",
    "Direction",
    "Edge",
    "GraphError",
    "GraphStore",
    "Node",
    "Provenance",
    "Scalar",
    "SchemaDescriptor",
    "Snapshot",
    "SnapshotError",
    "derive_schema",
    "format_timestamp",
    "parse_timestamp",
]
