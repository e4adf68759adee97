"""
Parameter checkpoints: one .npz holding every array as "<layer>/<name>" plus a
JSON header (spec fingerprint, seed, input width, window, layer specs).
"""

import json
from dataclasses import asdict

import numpy as np

from core.errors import FormatError, ValidationError
from core.io import atomic_path
from models.network import LayerSpec, ModelSpec, Parameters

META_KEY = "__meta__"
FORMAT_VERSION = 1


def save_checkpoint(path, spec, params, seed):
    meta = {
        "format": FORMAT_VERSION,
        "name": spec.name,
        "fingerprint": spec.fingerprint(),
        "seed": int(seed),
        "input_width": params.input_width,
        "window": params.window,
        "layers": [asdict(layer) for layer in spec.layers],
    }
    arrays = {f"{index}/{key}": value for (index, key), value in params.items()}
    arrays[META_KEY] = np.array(json.dumps(meta))
    with atomic_path(path) as tmp:
        with open(tmp, "wb") as fh:
            np.savez(fh, **arrays)


def load_checkpoint(path, spec=None):
    """Return (spec, params, seed); raises if `spec` is given and differs from the stored one."""
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise FormatError(f"not a checkpoint archive ({exc})", path=path) from exc
    with archive:
        if META_KEY not in archive.files:
            raise FormatError("checkpoint has no header", path=path)
        meta = json.loads(str(archive[META_KEY]))
        stored = ModelSpec(tuple(LayerSpec(**layer) for layer in meta["layers"]), name=meta.get("name", ""))
        if stored.fingerprint() != meta["fingerprint"]:
            raise FormatError("checkpoint header fingerprint does not match its layers", path=path)
        if spec is not None and spec.fingerprint() != stored.fingerprint():
            raise ValidationError(f"{path}: checkpoint was saved for a different model ({meta['name'] or 'unnamed'})")

        layers = [{} for _ in stored.layers]
        for name in archive.files:
            if name == META_KEY:
                continue
            index, key = name.split("/", 1)
            layers[int(index)][key] = archive[name]
    return stored, Parameters(layers, meta["input_width"], meta["window"]), meta["seed"]
