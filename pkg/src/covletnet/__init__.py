"""Multi-scale covariance wavelet network with trainable scales."""

__version__ = "0.1.0"

from .data import Dataset, load_csv, save_csv
from .kernel import KernelSpec
from .model import TrainConfig, TrainedModel, train
from .spectral import SpectralBasis, covariance, eigendecompose, project
from .transform import ScaleSet, embed_all, embed_one, scale_gradients

__all__ = ["Dataset", "load_csv", "save_csv", "KernelSpec", "TrainConfig", "TrainedModel",
           "train", "SpectralBasis", "covariance", "eigendecompose", "project", "ScaleSet",
           "embed_all", "embed_one", "scale_gradients"]
