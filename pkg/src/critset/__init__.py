"""Critical contributor sets in bipartite dependency networks."""

from .bigraph import (
    BipartiteGraph,
    GraphError,
    GraphStats,
    degree_stats,
    from_edges,
    incidence_transform,
    load_edge_list,
    read_edge_list,
    write_edge_list,
)
from .evaluation import CoverageCurve, auc_of, cov, coverage_curve
from .ranking import Ranking, read_ranking, write_ranking
from .rankcore import BucketQueue, mincov, shapley_cov, shapley_rank

__version__ = "0.1.0"
