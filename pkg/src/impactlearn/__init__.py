"""Impact learning: a rational-form learner built on logistic growth with
feature back-impact, plus the data pipeline, baselines and metrics around it."""

from .dataset import ColumnMeta, Dataset, Schema, impute, load_csv, train_test_split
from .errors import ImpactLearnError
from .model import ImpactModel, impact_scores
from .trainer import TrainConfig, fit_gd, fit_least_squares, init_rni

__version__ = "0.1.0"

__all__ = [
    "ColumnMeta", "Dataset", "ImpactLearnError", "ImpactModel", "Schema", "TrainConfig",
    "fit_gd", "fit_least_squares", "impact_scores", "impute", "init_rni", "load_csv",
    "train_test_split",
]
