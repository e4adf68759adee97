"""
Model presets
-------------
rnn / gru / lstm (and bi- variants): three recurrent layers of 250, 200 and 150
units, dropout 0.4 each, the first two returning sequences, then Dense(1).

ae: Bi-LSTM 250 -> LSTM 200 -> RepeatVector(W) -> LSTM 200 -> LSTM 250
    -> Flatten -> Dense(1)
"""

from core.errors import ValidationError
from models.network import LayerSpec, ModelSpec, validate_spec

STACK_UNITS = (250, 200, 150)
AE_UNITS = (250, 200, 200, 250)
STACK_DROPOUT = 0.4

_RECURRENT = {
    "rnn": ("SimpleRNN", False),
    "bi-rnn": ("SimpleRNN", True),
    "gru": ("GRU", False),
    "bi-gru": ("GRU", True),
    "lstm": ("LSTM", False),
    "bi-lstm": ("LSTM", True),
}
PRESET_NAMES = tuple(_RECURRENT) + ("ae",)

OUTPUT = LayerSpec("Dense", 1, activation="linear")


def _units(override, default):
    if override is None:
        return default
    override = tuple(int(u) for u in override)
    if len(override) != len(default) or min(override) < 1:
        raise ValidationError(f"units override needs {len(default)} positive counts, got {override}")
    return override


def build_preset(name, units=None):
    """ModelSpec for a preset name; `units` swaps the layer widths (e.g. (16, 16, 8))."""
    key = str(name).strip().lower()
    if key in _RECURRENT:
        kind, bidirectional = _RECURRENT[key]
        widths = _units(units, STACK_UNITS)
        layers = tuple(
            LayerSpec(kind, u, bidirectional=bidirectional, dropout_rate=STACK_DROPOUT, return_sequences=i < 2)
            for i, u in enumerate(widths)
        ) + (OUTPUT,)
    elif key == "ae":
        w1, w2, w3, w4 = _units(units, AE_UNITS)
        layers = (
            LayerSpec("LSTM", w1, bidirectional=True, dropout_rate=0.4, return_sequences=True),
            LayerSpec("LSTM", w2),
            LayerSpec("RepeatVector", 0),
            LayerSpec("LSTM", w3, dropout_rate=0.4, return_sequences=True),
            LayerSpec("LSTM", w4, dropout_rate=0.3, return_sequences=True),
            LayerSpec("Flatten", dropout_rate=0.4),
            OUTPUT,
        )
    else:
        raise ValidationError(f"unknown model preset '{name}', expected one of {', '.join(PRESET_NAMES)}")
    return validate_spec(ModelSpec(layers, name=key))
