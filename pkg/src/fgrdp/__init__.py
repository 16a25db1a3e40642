"""Edge-level (fine-grained) local differential privacy for counting
triangles and k-stars in decentralized graphs."""

from ._accel import backend
from .baselines import BaselineConfig, run_kstar_uniform, run_triangle_uniform
from .graph import (
    DatasetMeta,
    EdgeListParseError,
    Graph,
    barabasi_albert,
    erdos_renyi,
    exact_kstar_count,
    exact_triangle_count,
    load_edge_list,
    max_degree,
    sample_induced_subgraph,
    write_edge_list,
)
from .kstar import KStarEstimate, KStarRunConfig, kstar_sensitivity, run_kstar, variance_prediction
from .metrics import clustering_coefficient, metric_mre, metric_mse
from .privacy import (
    BudgetLedger,
    PrivacyPolicy,
    assign_edge_levels,
    clip_neighbors,
    laplace_sample,
    ledger_check,
    reorder_by_level,
    rr_perturb_bit,
    rr_retention,
)
from .triangle import (
    ObfuscatedMatrix,
    TriangleEstimate,
    TriangleRunConfig,
    round1_upload,
    round2_local_estimate,
    rr_retention_split,
    run_triangle,
    variance_bound,
)

__version__ = "0.1.0"
