from .base import Oracle, Prediction, code_tokens
from .markov import MarkovGenerationModel
from .remote import RemoteOracle
from .surrogate import SurrogateClassifier, TrainConfig, feature_counts

__all__ = [
    "Oracle",
    "Prediction",
    "code_tokens",
    "MarkovGenerationModel",
    "RemoteOracle",
    "SurrogateClassifier",
    "TrainConfig",
    "feature_counts",
]
