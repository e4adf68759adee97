"""
Adam optimiser over a Parameters tree.

    t <- t + 1
    m <- b1 m + (1 - b1) g
    v <- b2 v + (1 - b2) g^2
    theta <- theta - lr * m_hat / (sqrt(v_hat) + eps),  m_hat = m / (1 - b1^t), v_hat = v / (1 - b2^t)
"""

from dataclasses import dataclass

import numpy as np

from core.errors import ContractError, TrainingError


@dataclass
class AdamState:
    m: object
    v: object
    t: int = 0

    @classmethod
    def fresh(cls, params):
        return cls(params.zeros_like(), params.zeros_like(), 0)


def adam_step(params, grads, state, lr=1e-4, beta1=0.9, beta2=0.999, epsilon=1e-8):
    """Update `params` and `state` in place and return them."""
    if params.shapes() != grads.shapes() or params.shapes() != state.m.shapes():
        raise ContractError("gradient or optimiser state shapes do not match the parameters")
    for key, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in layer {key[0]} '{key[1]}'")

    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for (index, name), g in grads.items():
        m = state.m.layers[index][name]
        v = state.v.layers[index][name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        params.layers[index][name] -= lr * (m / bc1) / (np.sqrt(v / bc2) + epsilon)
    return params, state
