"""Ensemble dialog engine.

A pool of candidate-response generators answers every user turn under a hard
deadline, a trained scorer rates each candidate, and a selection policy picks
the reply. The package also ships the data collection service, dataset
tooling, and the training/evaluation harness for the scorers.
"""

from chorus.core import (
    Article,
    Candidate,
    ConversationState,
    Message,
    Speaker,
    TransitionTuple,
    is_terminal,
    shape_reward,
)

__all__ = [
    "Article",
    "Candidate",
    "ConversationState",
    "Message",
    "Speaker",
    "TransitionTuple",
    "is_terminal",
    "shape_reward",
]

__version__ = "0.1.0"
