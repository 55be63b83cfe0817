"""Robust localized multi-view subspace clustering."""
from .dataset import (
    DatasetError,
    MultiViewDataset,
    SyntheticSpec,
    generate_synthetic,
    load_dataset,
    normalize_unit_l2,
    save_dataset,
)
from .metrics import (
    ClusterEvaluation,
    clustering_accuracy,
    evaluate_runs,
    normalized_mutual_information,
)
from .solver import (
    InitPolicy,
    RepresentationSet,
    SolverConfig,
    SolverTrace,
    fit_rmsc,
    fit_rmsc_wv,
    fit_ssc_single,
    naive_average_similarity,
    objective,
    sample_loss,
    update_consensus,
    update_view_representation,
    update_weights,
)
from .spectral import (
    SpectralConfig,
    gaussian_knn_graph,
    kmeans,
    similarity_from_representation,
    spectral_cluster,
)
from .weighting import WeightRegularizer, conjugacy_residual, latent_loss, minimizer, psi

__version__ = "0.1.0"
