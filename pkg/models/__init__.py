from models.checkpoint import load_checkpoint, save_checkpoint
from models.network import (
    LayerSpec,
    Mode,
    ModelSpec,
    Parameters,
    backward,
    forward,
    init_parameters,
    mse_loss,
    predict,
    validate_spec,
)
from models.optim import AdamState, adam_step
from models.presets import PRESET_NAMES, build_preset
from models.training import EarlyStopping, TrainConfig, TrainHistory, train, write_history
