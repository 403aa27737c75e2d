"""Maximum (weighted) independent set solvers and benchmark tooling."""

from .exact import brute_force_mis, exact_mwis, export_lp, export_qp
from .gen import GenSpec, gen_ba, gen_er, gen_hk, gen_hrg, gen_weights, gen_ws
from .graph import (
    EXCLUDED,
    INCLUDED,
    UNLABELED,
    Graph,
    GraphError,
    Label,
    VertexLabeling,
    build_graph,
    is_independent_set,
    residual_subgraph,
    set_weight,
    validate_labeling,
)
from .localsearch import improve
from .reduce import ReductionTrace, reduce_unweighted, reduce_weighted, unfold
from .treesearch import SearchConfig, SolveRecord, tree_search

__version__ = "0.1.0"
