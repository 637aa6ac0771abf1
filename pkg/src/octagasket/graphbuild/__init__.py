"""Cell-graph construction: recursive identification and geometric pairing."""

from ..addressing import address_to_index, index_to_address
from .geometric import build_graph_geometric
from .graph import (
    CellGraph,
    assemble_laplacian,
    build_level1,
    graph_from_json,
    graph_to_dict,
    graph_to_json,
    laplacian_to_matrix_market,
)
from .recursive import (
    build_graph_recursive,
    central_strengths,
    refine_strength_sequence,
    side_curve,
)


def build_graph(m: int, builder: str = "recursive") -> CellGraph:
    if builder == "recursive":
        return build_graph_recursive(m)
    if builder == "geometric":
        return build_graph_geometric(m)
    raise ValueError(f"unknown builder {builder!r}")


__all__ = [
    "CellGraph",
    "address_to_index",
    "assemble_laplacian",
    "build_graph",
    "build_graph_geometric",
    "build_graph_recursive",
    "build_level1",
    "central_strengths",
    "graph_from_json",
    "graph_to_dict",
    "graph_to_json",
    "index_to_address",
    "laplacian_to_matrix_market",
    "refine_strength_sequence",
    "side_curve",
]
