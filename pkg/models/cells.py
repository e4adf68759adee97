"""
Recurrent cells over whole sequences, forward and backward through time.

Layout (gates concatenated along the last kernel axis):
    kernel    (D, G*U)   input weights
    recurrent (U, G*U)   hidden weights
    bias      (G*U,)

    SimpleRNN  G=1   h = act(x W + h R + b)
    GRU        G=3   [z | r | h~], reset applied to h before the matmul:
                     h~ = act(x Wh + (r * h) Rh + bh),  h = z * h_prev + (1 - z) * h~
    LSTM       G=4   [i | f | g | o], c = f * c_prev + i * act(g),  h = o * act(c)

Gates are sigmoid; `act` is the layer activation (tanh or linear).
All arrays are (batch, time, features), float64.
"""

import numpy as np
from scipy.special import expit

GATES = {"SimpleRNN": 1, "GRU": 3, "LSTM": 4}


def activate(name, a):
    return np.tanh(a) if name == "tanh" else a


def activation_grad(name, y):
    """Derivative expressed through the activation's output y."""
    return 1.0 - y * y if name == "tanh" else np.ones_like(y)


def sequence_forward(kind, x, kernel, recurrent, bias, activation):
    if kind == "SimpleRNN":
        return _rnn_forward(x, kernel, recurrent, bias, activation)
    if kind == "GRU":
        return _gru_forward(x, kernel, recurrent, bias, activation)
    return _lstm_forward(x, kernel, recurrent, bias, activation)


def sequence_backward(kind, d_h, cache, kernel, recurrent, activation):
    """d_h: gradient w.r.t. every emitted hidden state, (B, T, U).

    Returns (d_x, d_kernel, d_recurrent, d_bias).
    """
    if kind == "SimpleRNN":
        return _rnn_backward(d_h, cache, kernel, recurrent, activation)
    if kind == "GRU":
        return _gru_backward(d_h, cache, kernel, recurrent, activation)
    return _lstm_backward(d_h, cache, kernel, recurrent, activation)


# SimpleRNN

def _rnn_forward(x, W, R, b, activation):
    B, T, _ = x.shape
    U = R.shape[0]
    h = np.zeros((B, T + 1, U))
    for t in range(T):
        h[:, t + 1] = activate(activation, x[:, t] @ W + h[:, t] @ R + b)
    return h[:, 1:], {"x": x, "h": h}


def _rnn_backward(d_h, cache, W, R, activation):
    x, h = cache["x"], cache["h"]
    T = x.shape[1]
    dW, dR, db = np.zeros_like(W), np.zeros_like(R), np.zeros(W.shape[1])
    dx = np.zeros_like(x)
    carry = np.zeros_like(h[:, 0])
    for t in reversed(range(T)):
        da = (d_h[:, t] + carry) * activation_grad(activation, h[:, t + 1])
        dW += x[:, t].T @ da
        dR += h[:, t].T @ da
        db += da.sum(axis=0)
        dx[:, t] = da @ W.T
        carry = da @ R.T
    return dx, dW, dR, db


# GRU

def _gru_forward(x, W, R, b, activation):
    B, T, _ = x.shape
    U = R.shape[0]
    h = np.zeros((B, T + 1, U))
    z = np.zeros((B, T, U))
    r = np.zeros((B, T, U))
    cand = np.zeros((B, T, U))
    for t in range(T):
        xw = x[:, t] @ W + b
        hp = h[:, t]
        z[:, t] = expit(xw[:, :U] + hp @ R[:, :U])
        r[:, t] = expit(xw[:, U:2 * U] + hp @ R[:, U:2 * U])
        cand[:, t] = activate(activation, xw[:, 2 * U:] + (r[:, t] * hp) @ R[:, 2 * U:])
        h[:, t + 1] = z[:, t] * hp + (1.0 - z[:, t]) * cand[:, t]
    return h[:, 1:], {"x": x, "h": h, "z": z, "r": r, "cand": cand}


def _gru_backward(d_h, cache, W, R, activation):
    x, h, z, r, cand = cache["x"], cache["h"], cache["z"], cache["r"], cache["cand"]
    T = x.shape[1]
    U = R.shape[0]
    dW, dR, db = np.zeros_like(W), np.zeros_like(R), np.zeros(W.shape[1])
    dx = np.zeros_like(x)
    carry = np.zeros_like(h[:, 0])
    for t in reversed(range(T)):
        hp = h[:, t]
        dh = d_h[:, t] + carry
        d_cand = dh * (1.0 - z[:, t]) * activation_grad(activation, cand[:, t])
        d_rh = d_cand @ R[:, 2 * U:].T
        d_z = dh * (hp - cand[:, t]) * z[:, t] * (1.0 - z[:, t])
        d_r = d_rh * hp * r[:, t] * (1.0 - r[:, t])
        da = np.concatenate([d_z, d_r, d_cand], axis=1)

        dW += x[:, t].T @ da
        db += da.sum(axis=0)
        dR[:, :U] += hp.T @ d_z
        dR[:, U:2 * U] += hp.T @ d_r
        dR[:, 2 * U:] += (r[:, t] * hp).T @ d_cand
        dx[:, t] = da @ W.T
        carry = dh * z[:, t] + d_rh * r[:, t] + d_z @ R[:, :U].T + d_r @ R[:, U:2 * U].T
    return dx, dW, dR, db


# LSTM

def _lstm_forward(x, W, R, b, activation):
    B, T, _ = x.shape
    U = R.shape[0]
    h = np.zeros((B, T + 1, U))
    c = np.zeros((B, T + 1, U))
    gates = np.zeros((B, T, 4 * U))
    c_act = np.zeros((B, T, U))
    for t in range(T):
        a = x[:, t] @ W + h[:, t] @ R + b
        i = expit(a[:, :U])
        f = expit(a[:, U:2 * U])
        g = activate(activation, a[:, 2 * U:3 * U])
        o = expit(a[:, 3 * U:])
        c[:, t + 1] = f * c[:, t] + i * g
        c_act[:, t] = activate(activation, c[:, t + 1])
        h[:, t + 1] = o * c_act[:, t]
        gates[:, t] = np.concatenate([i, f, g, o], axis=1)
    return h[:, 1:], {"x": x, "h": h, "c": c, "gates": gates, "c_act": c_act}


def _lstm_backward(d_h, cache, W, R, activation):
    x, h, c, gates, c_act = cache["x"], cache["h"], cache["c"], cache["gates"], cache["c_act"]
    T = x.shape[1]
    U = R.shape[0]
    dW, dR, db = np.zeros_like(W), np.zeros_like(R), np.zeros(W.shape[1])
    dx = np.zeros_like(x)
    carry_h = np.zeros_like(h[:, 0])
    carry_c = np.zeros_like(c[:, 0])
    for t in reversed(range(T)):
        i, f, g, o = (gates[:, t, k * U:(k + 1) * U] for k in range(4))
        dh = d_h[:, t] + carry_h
        dc = carry_c + dh * o * activation_grad(activation, c_act[:, t])
        da = np.concatenate(
            [
                dc * g * i * (1.0 - i),
                dc * c[:, t] * f * (1.0 - f),
                dc * i * activation_grad(activation, g),
                dh * c_act[:, t] * o * (1.0 - o),
            ],
            axis=1,
        )
        dW += x[:, t].T @ da
        dR += h[:, t].T @ da
        db += da.sum(axis=0)
        dx[:, t] = da @ W.T
        carry_h = da @ R.T
        carry_c = dc * f
    return dx, dW, dR, db
