"""Desk-scale attention-VQA model, losses, synthetic corpus, and training."""

from .model import (  # noqa: F401
    ForwardTrace,
    LossBreakdown,
    ModelParams,
    ModelSizes,
    batch_loss_and_grad,
    forward,
    init_params,
    plain_finetune_loss,
    squint_loss,
)
from .corpus import Corpus, QAExample, BaseExample, SceneSpec, gen_synthetic_corpus  # noqa: F401
from .train import TrainConfig, train, save_params, load_params  # noqa: F401
from .experiment import ExperimentConfig, run_experiment  # noqa: F401
