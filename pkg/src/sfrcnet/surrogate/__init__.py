"""Gated-recurrent stress surrogate: network, training and checkpoints.

Input features per time step (13): the six orientation tensor components
(a11, a22, a33, a12, a13, a23), the fiber volume fraction, and the six
plain strain components (eps11, eps22, eps33, eps23, eps13, eps12).
Outputs per step: the six plain stress components in MPa.
"""
import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .network import GruLayer, GruModel, backward, forward, loss
from .scaling import Normalizer
from .train import TrainConfig, clip_gradients, lr_at_epoch, train, \
    write_history_csv


def build_features(record):
    """Stack a record's inputs into the (n_rows, 13) network feature array."""
    n_rows = record.strain.shape[0]
    feats = np.empty((n_rows, 13))
    feats[:, :6] = record.orientation
    feats[:, 6] = record.vf
    feats[:, 7:] = record.strain
    return feats
