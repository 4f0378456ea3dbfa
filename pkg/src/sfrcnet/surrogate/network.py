"""Stacked gated-recurrent network with exact backpropagation through time.

Cell equations (Cho et al. formulation, gate order z/r/c in the fused
weight blocks):

    z_t = sigmoid(x_t Wx_z + h_{t-1} Wh_z + b_z)
    r_t = sigmoid(x_t Wx_r + h_{t-1} Wh_r + b_r)
    c_t = tanh(x_t Wx_c + (r_t * h_{t-1}) Wh_c + b_c)
    h_t = z_t * h_{t-1} + (1 - z_t) * c_t

Hidden states start at zero.  Inputs are z-scored by the model's fitted
normalizer; the linear head (unit activation) emits the 6 stress components.
Inverted dropout acts on the last recurrent layer's output during training.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .scaling import Normalizer


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _glorot(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def _orthogonal(rng, n):
    a = rng.standard_normal((n, n))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


@dataclass
class GruLayer:
    """One recurrent layer; weight blocks fused as [z | r | c]."""
    w_x: np.ndarray   # (in_dim, 3H)
    w_h: np.ndarray   # (H, 3H)
    b: np.ndarray     # (3H,)

    @property
    def hidden(self):
        return self.w_h.shape[0]

    @classmethod
    def create(cls, in_dim, hidden, rng):
        w_x = _glorot(rng, in_dim, 3 * hidden)
        w_h = np.hstack([_orthogonal(rng, hidden) for _ in range(3)])
        return cls(w_x=w_x, w_h=w_h, b=np.zeros(3 * hidden))


@dataclass
class GruModel:
    layers: list
    head_w: np.ndarray    # (H_last, out_dim)
    head_b: np.ndarray    # (out_dim,)
    dropout: float = 0.0
    normalizer: Optional[Normalizer] = None

    @classmethod
    def create(cls, hidden_sizes, rng, in_dim=13, out_dim=6, dropout=0.0):
        layers = []
        dim = in_dim
        for h in hidden_sizes:
            layers.append(GruLayer.create(dim, h, rng))
            dim = h
        return cls(layers=layers, head_w=_glorot(rng, dim, out_dim),
                   head_b=np.zeros(out_dim), dropout=dropout)

    @property
    def in_dim(self):
        return self.layers[0].w_x.shape[0]

    @property
    def out_dim(self):
        return self.head_w.shape[1]

    def parameters(self):
        """Flat parameter list in checkpoint order (live references)."""
        params = []
        for lay in self.layers:
            params.extend([lay.w_x, lay.w_h, lay.b])
        params.extend([self.head_w, self.head_b])
        return params

    def parameter_names(self):
        names = []
        for i in range(len(self.layers)):
            names.extend([f"layer{i}.w_x", f"layer{i}.w_h", f"layer{i}.b"])
        names.extend(["head.w", "head.b"])
        return names

    def set_parameters(self, values):
        for ref, val in zip(self.parameters(), values):
            ref[...] = val

    def weight_indices(self):
        """Positions of weight matrices (L2-penalized; biases excluded)."""
        idx = []
        for i in range(len(self.layers)):
            idx.extend([3 * i, 3 * i + 1])
        idx.append(3 * len(self.layers))
        return idx


def _layer_forward(layer, x):
    """Run one layer over (B, T, in); returns (h_seq, cache)."""
    batch, steps, _ = x.shape
    hid = layer.hidden
    xw = x @ layer.w_x + layer.b           # all input projections at once
    wh_zr = layer.w_h[:, :2 * hid]
    wh_c = layer.w_h[:, 2 * hid:]
    h_all = np.zeros((batch, steps + 1, hid))
    gates_z = np.empty((batch, steps, hid))
    gates_r = np.empty((batch, steps, hid))
    cand = np.empty((batch, steps, hid))
    h = h_all[:, 0]
    for t in range(steps):
        a_zr = xw[:, t, :2 * hid] + h @ wh_zr
        z = _sigmoid(a_zr[:, :hid])
        r = _sigmoid(a_zr[:, hid:])
        c = np.tanh(xw[:, t, 2 * hid:] + (r * h) @ wh_c)
        h = z * h + (1.0 - z) * c
        gates_z[:, t] = z
        gates_r[:, t] = r
        cand[:, t] = c
        h_all[:, t + 1] = h
    return h_all[:, 1:], (x, h_all, gates_z, gates_r, cand)


def _layer_backward(layer, cache, d_h):
    """Backpropagate through one layer; returns (d_x, grads)."""
    x, h_all, gz, gr, gc = cache
    batch, steps, _ = x.shape
    hid = layer.hidden
    wh_z = layer.w_h[:, :hid]
    wh_r = layer.w_h[:, hid:2 * hid]
    wh_c = layer.w_h[:, 2 * hid:]
    d_wx = np.zeros_like(layer.w_x)
    d_wh = np.zeros_like(layer.w_h)
    d_b = np.zeros_like(layer.b)
    d_x = np.empty_like(x)
    d_next = np.zeros((batch, hid))
    for t in range(steps - 1, -1, -1):
        dh = d_h[:, t] + d_next
        z, r, c = gz[:, t], gr[:, t], gc[:, t]
        h_prev = h_all[:, t]
        da_c = dh * (1.0 - z) * (1.0 - c * c)
        da_z = dh * (h_prev - c) * z * (1.0 - z)
        drh = da_c @ wh_c.T                     # gradient on r * h_prev
        da_r = drh * h_prev * r * (1.0 - r)
        da = np.concatenate([da_z, da_r, da_c], axis=1)
        d_wx += x[:, t].T @ da
        d_wh[:, :hid] += h_prev.T @ da_z
        d_wh[:, hid:2 * hid] += h_prev.T @ da_r
        d_wh[:, 2 * hid:] += (r * h_prev).T @ da_c
        d_b += da.sum(axis=0)
        d_x[:, t] = da @ layer.w_x.T
        d_next = dh * z + drh * r + da_z @ wh_z.T + da_r @ wh_r.T
    return d_x, (d_wx, d_wh, d_b)


def forward(model, inputs, training=False, rng=None, dropout_mask=None,
            return_cache=False):
    """Run the network on (T, F) or (B, T, F) inputs; outputs per step.

    Dropout on the last recurrent layer's output is applied only when
    ``training`` is true (inverted scaling); a fixed ``dropout_mask`` may be
    injected for gradient testing.
    """
    inputs = np.asarray(inputs, dtype=float)
    squeeze = inputs.ndim == 2
    if squeeze:
        inputs = inputs[None]
    if inputs.shape[-1] != model.in_dim:
        raise ValueError(f"expected {model.in_dim} input features, "
                         f"got {inputs.shape[-1]}")
    if not np.all(np.isfinite(inputs)):
        raise ValueError("non-finite network inputs")
    if model.normalizer is None:
        raise RuntimeError("feature normalizer has not been fitted")
    x = model.normalizer.transform(inputs)

    caches = []
    for layer in model.layers:
        x, cache = _layer_forward(layer, x)
        caches.append(cache)

    mask = None
    if training and model.dropout > 0.0:
        keep = 1.0 - model.dropout
        if dropout_mask is not None:
            mask = np.asarray(dropout_mask, dtype=float)
        else:
            if rng is None:
                raise ValueError("training forward with dropout needs an rng")
            mask = (rng.random(x.shape) < keep).astype(float)
        x = x * mask / keep
    outputs = x @ model.head_w + model.head_b
    if return_cache:
        return (outputs[0] if squeeze else outputs), (caches, x, mask)
    return outputs[0] if squeeze else outputs


def loss(pred, target, model=None, l2=0.0):
    """Sequence regression cost.

    Per sample C_n = sum over channels and steps of squared error / (2 N_T);
    the batch cost is the mean of C_n, plus l2 * sum of squared weights
    (biases excluded).  The regularization term is omitted when ``model``
    is None or ``l2`` is 0.
    """
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape:
        raise ValueError("prediction/target shape mismatch")
    if pred.ndim == 2:
        pred, target = pred[None], target[None]
    batch, steps, _ = pred.shape
    data = np.sum((pred - target) ** 2) / (2.0 * steps * batch)
    if model is not None and l2 > 0.0:
        params = model.parameters()
        data += l2 * sum(float(np.sum(params[i] ** 2))
                         for i in model.weight_indices())
    return float(data)


def backward(model, inputs, targets, l2=0.0, training=False, rng=None,
             dropout_mask=None, channel_sq_out=None):
    """Exact gradients of :func:`loss` for every parameter.

    Returns (cost, grads) with grads ordered like ``model.parameters()``.
    ``channel_sq_out``, if given, receives the per-channel squared error
    sums (used for cost bookkeeping under target scaling).
    """
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 2:
        targets = targets[None]
    pred, (caches, h_top, mask) = forward(
        model, inputs, training=training, rng=rng, dropout_mask=dropout_mask,
        return_cache=True)
    if pred.ndim == 2:
        pred = pred[None]
    batch, steps, _ = pred.shape
    err = pred - targets
    if channel_sq_out is not None:
        channel_sq_out[...] = np.sum(err ** 2, axis=(0, 1))
    cost = np.sum(err ** 2) / (2.0 * steps * batch)

    d_out = err / (steps * batch)
    flat_h = h_top.reshape(batch * steps, -1)
    d_head_w = flat_h.T @ d_out.reshape(batch * steps, -1)
    d_head_b = d_out.sum(axis=(0, 1))
    d_h = d_out @ model.head_w.T
    if mask is not None:
        d_h = d_h * mask / (1.0 - model.dropout)

    layer_grads = []
    for layer, cache in zip(reversed(model.layers), reversed(caches)):
        d_h, grads = _layer_backward(layer, cache, d_h)
        layer_grads.append(grads)
    layer_grads.reverse()

    grads = []
    for g in layer_grads:
        grads.extend(g)
    grads.extend([d_head_w, d_head_b])

    if l2 > 0.0:
        params = model.parameters()
        for i in model.weight_indices():
            grads[i] = grads[i] + 2.0 * l2 * params[i]
            cost += l2 * float(np.sum(params[i] ** 2))
    return float(cost), grads
