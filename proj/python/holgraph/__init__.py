"""Term graphs, a two-tower GNN premise scorer and a toy prover."""

from ._core import (
    GraphError,
    Model,
    ParseError,
    TacticError,
    apply_tactic,
    canonical,
    generate_corpus,
    graph,
    run_cli,
    stats,
)

__all__ = [
    "GraphError",
    "Model",
    "ParseError",
    "TacticError",
    "apply_tactic",
    "canonical",
    "generate_corpus",
    "graph",
    "run_cli",
    "stats",
]
