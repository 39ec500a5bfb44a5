from .network import ModelConfig, TransformerNet, softmax
from .models import CentroidModel, ScentModel, TransformerModel, fit_centroids
from .voting import Prediction, VoteState, accumulate_vote, vote_result
from .training import TrainConfig, load_training_arrays, train, train_centroid
from .evaluation import Metrics, evaluate, raw_windows_for
from .gradcheck import gradient_check
from .artifact import load_model, save_model

__all__ = [
    "ModelConfig",
    "TransformerNet",
    "softmax",
    "CentroidModel",
    "ScentModel",
    "TransformerModel",
    "fit_centroids",
    "Prediction",
    "VoteState",
    "accumulate_vote",
    "vote_result",
    "TrainConfig",
    "load_training_arrays",
    "train",
    "train_centroid",
    "Metrics",
    "evaluate",
    "raw_windows_for",
    "gradient_check",
    "load_model",
    "save_model",
]
