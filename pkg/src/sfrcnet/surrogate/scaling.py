"""Feature and target scaling for network training."""
from dataclasses import dataclass

import numpy as np


@dataclass
class Normalizer:
    """Per-feature z-score normalizer (mean/std over the training set)."""
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, data):
        """Fit over all rows of (..., n_features) data.

        Features with zero variance get std 1 so transforms stay finite.
        """
        flat = np.asarray(data, dtype=float).reshape(-1, np.shape(data)[-1])
        mean = flat.mean(axis=0)
        std = flat.std(axis=0)
        std = np.where(std > 0.0, std, 1.0)
        return cls(mean=mean, std=std)

    def transform(self, data):
        return (np.asarray(data, dtype=float) - self.mean) / self.std

    def inverse(self, data):
        return np.asarray(data, dtype=float) * self.std + self.mean
