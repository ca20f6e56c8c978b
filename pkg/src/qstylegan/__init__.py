"""Style-based quantum WGAN-GP on latent vectors, with a numba-accelerated statevector simulator."""
from ._accel import BACKEND
from .ansatz import AnsatzKind, GeneratorConfig, Readout, StyleParams, param_count
from .errors import (ArgumentError, ConfigurationError, ParseError, QStyleGANError,
                     UndefinedSignificanceError)
from .latent_data import DistributionSpec, LatentDataset, make_rng, sample_synthetic
from .metrics import Direction, MetricRecord, ScenarioTable, wasserstein_1d, z0_average, z0_metric
from .wgan import GeneratorKind, TrainConfig, train

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AnsatzKind", "GeneratorConfig", "Readout", "StyleParams", "param_count",
    "ArgumentError", "ConfigurationError", "ParseError", "QStyleGANError",
    "UndefinedSignificanceError", "DistributionSpec", "LatentDataset", "make_rng",
    "sample_synthetic", "Direction", "MetricRecord", "ScenarioTable", "wasserstein_1d",
    "z0_average", "z0_metric", "GeneratorKind", "TrainConfig", "train",
]
