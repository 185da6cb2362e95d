from .model import HEADS, ModelConfig, SequenceModel, forward, init_model, param_shapes, predict_count
from .loss import LossConfig, combined_loss, combined_loss_grad, count_loss, count_loss_grad
from .optim import OptimizerState, adam_step
from .training import TrainingLog, TrainSchedule, backward_and_step, target_for_head, train
from .gradcheck import GradCheckReport, grad_check
from .checkpoint import CHECKPOINT_VERSION, PipelineInfo, load_checkpoint, save_checkpoint

__all__ = [
    "HEADS",
    "ModelConfig",
    "SequenceModel",
    "forward",
    "init_model",
    "param_shapes",
    "predict_count",
    "LossConfig",
    "combined_loss",
    "combined_loss_grad",
    "count_loss",
    "count_loss_grad",
    "OptimizerState",
    "adam_step",
    "TrainingLog",
    "TrainSchedule",
    "backward_and_step",
    "target_for_head",
    "train",
    "GradCheckReport",
    "grad_check",
    "CHECKPOINT_VERSION",
    "PipelineInfo",
    "load_checkpoint",
    "save_checkpoint",
]
