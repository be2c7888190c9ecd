"""Refined spectral law and extremal eigenvalue statistics for sparse
symmetric random matrices, with a Monte Carlo verification harness."""

__version__ = "0.1.0"

from .ensembles import (  # noqa: F401
    ENSEMBLE_KINDS,
    MatrixSample,
    RngStream,
    SparsityProfile,
    dyson_flow,
    empirical_s_k,
    exact_s_k,
    sample_adjacency,
    sample_centered_er,
    sample_diluted_wigner,
    sample_goe_zero_diag,
    sample_sparse_generic,
)
from .law import (  # noqa: F401
    STRICT_C4_MAX,
    LawParams,
    RefinedLaw,
    density,
    edge,
    in_domain,
    integrated_density,
    l_dot,
    law_poly,
    semicircle_stieltjes,
    stability_margin,
    stieltjes,
)
from .spectral import (  # noqa: F401
    GreenMatrix,
    LocalLawReport,
    SpectralSample,
    default_grid,
    delocalization_stat,
    eigen,
    eigenvalue_counting,
    empirical_stieltjes,
    green_matrix,
    local_law_scan,
    resolvent_identity_residual,
    smoothed_count,
    ward_residual,
)
from .edge_stats import (  # noqa: F401
    CommunityResult,
    EdgeSampleSet,
    KsResult,
    McConfig,
    OutlierSummary,
    ReferenceCdf,
    adjacency_outlier_check,
    adjacency_shift,
    build_reference_cdf,
    community_statistic,
    edge_density,
    ingest_graph,
    law_from_adjacency,
    mc_extreme,
    rescaled_adjacency_from_raw,
    two_sample_ks,
)
from .flow import (  # noqa: F401
    FlowTrajectory,
    default_t_grid,
    flow_local_law_check,
    trajectory,
)
