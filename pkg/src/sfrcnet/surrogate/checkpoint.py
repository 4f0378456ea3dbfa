"""Model checkpoint file.

Layout (little-endian):

    magic "SFNN" | u32 version | u32 n_layers | u32 in_dim | u32 out_dim
    n_layers x u32 hidden sizes | f64 dropout
    in_dim x f64 normalizer means | in_dim x f64 normalizer stds
    parameter blocks as f64, in declared order:
        per layer: w_x (in x 3H, row-major), w_h (H x 3H), b (3H)
        head_w (H_last x out), head_b (out)
"""
import struct
from pathlib import Path

import numpy as np

from .network import GruLayer, GruModel
from .scaling import Normalizer

MAGIC = b"SFNN"
FORMAT_VERSION = 1


def save_checkpoint(model, path):
    if model.normalizer is None:
        raise RuntimeError("refusing to save a model without a fitted normalizer")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    hidden = [lay.hidden for lay in model.layers]
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IIII", FORMAT_VERSION, len(model.layers),
                             model.in_dim, model.out_dim))
        fh.write(struct.pack(f"<{len(hidden)}I", *hidden))
        fh.write(struct.pack("<d", model.dropout))
        fh.write(np.asarray(model.normalizer.mean, dtype="<f8").tobytes())
        fh.write(np.asarray(model.normalizer.std, dtype="<f8").tobytes())
        for param in model.parameters():
            fh.write(np.ascontiguousarray(param, dtype="<f8").tobytes())
    return path


def load_checkpoint(path):
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not a model checkpoint (bad magic)")
        version, n_layers, in_dim, out_dim = struct.unpack("<IIII", fh.read(16))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        hidden = struct.unpack(f"<{n_layers}I", fh.read(4 * n_layers))
        (dropout,) = struct.unpack("<d", fh.read(8))
        mean = np.frombuffer(fh.read(8 * in_dim), dtype="<f8").copy()
        std = np.frombuffer(fh.read(8 * in_dim), dtype="<f8").copy()

        def read_block(shape):
            n = int(np.prod(shape))
            return np.frombuffer(fh.read(8 * n), dtype="<f8").reshape(shape).copy()

        layers = []
        dim = in_dim
        for h in hidden:
            layers.append(GruLayer(w_x=read_block((dim, 3 * h)),
                                   w_h=read_block((h, 3 * h)),
                                   b=read_block((3 * h,))))
            dim = h
        head_w = read_block((dim, out_dim))
        head_b = read_block((out_dim,))
    return GruModel(layers=layers, head_w=head_w, head_b=head_b,
                    dropout=dropout, normalizer=Normalizer(mean=mean, std=std))
