from .gradcheck import GradCheckReport, finite_difference_check
from .losses import cross_entropy, losses, masked_mse, mse
from .optim import OptimizerState, optimizer_step
from .tape import Node, Tape, backward

__all__ = [
    "GradCheckReport",
    "Node",
    "OptimizerState",
    "Tape",
    "backward",
    "cross_entropy",
    "finite_difference_check",
    "losses",
    "masked_mse",
    "mse",
    "optimizer_step",
]
