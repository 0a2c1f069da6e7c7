"""Classical reference algorithms and closed-form oracles."""

from sketch_learning.baselines.em import em_gmm, gmm_log_likelihood
from sketch_learning.baselines.kernels import count_local_maxima, mean_kernel, mmd_gaussian_closed_form
from sketch_learning.baselines.lloyd import kmeans_plusplus, lloyd_kmeans, sse
from sketch_learning.baselines.pca import empirical_autocorrelation, exact_pca, principal_angles
from sketch_learning.baselines.risk import empirical_risk, parzen_score
from sketch_learning.baselines.synthetic import SyntheticDataset, place_centroids, synth_gmm

__all__ = [
    "SyntheticDataset",
    "count_local_maxima",
    "em_gmm",
    "empirical_autocorrelation",
    "empirical_risk",
    "exact_pca",
    "gmm_log_likelihood",
    "kmeans_plusplus",
    "lloyd_kmeans",
    "mean_kernel",
    "mmd_gaussian_closed_form",
    "parzen_score",
    "place_centroids",
    "principal_angles",
    "sse",
    "synth_gmm",
]
