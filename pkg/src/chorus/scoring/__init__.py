"""Trainable response scorers.

Two architectures (a feed-forward net over hand-crafted features and a
hierarchical GRU net over word vectors), two objectives (supervised upvote
probability and a fitted Q value), hand-written gradients throughout, five
optimizers, checkpointing, and random hyperparameter search.
"""

from chorus.scoring.checkpoint import load_checkpoint, save_checkpoint
from chorus.scoring.losses import (
    cross_entropy_loss,
    cross_entropy_grad,
    huber_loss,
    huber_grad,
)
from chorus.scoring.optimizers import make_optimizer
from chorus.scoring.scorers import (
    ConstantScorer,
    ModelScorer,
    Scorer,
    SeededRandomScorer,
)
from chorus.scoring.train import (
    QExample,
    TrainConfig,
    TrainingDiverged,
    double_dqn_target,
    sync_target,
    train_fitted_q,
    train_supervised,
)
from chorus.scoring.search import SEARCH_GRID, hyperparameter_search

__all__ = [
    "ConstantScorer",
    "ModelScorer",
    "QExample",
    "SEARCH_GRID",
    "Scorer",
    "SeededRandomScorer",
    "TrainConfig",
    "TrainingDiverged",
    "cross_entropy_grad",
    "cross_entropy_loss",
    "double_dqn_target",
    "huber_grad",
    "huber_loss",
    "hyperparameter_search",
    "load_checkpoint",
    "make_optimizer",
    "save_checkpoint",
    "sync_target",
    "train_fitted_q",
    "train_supervised",
]
