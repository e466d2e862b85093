"""Single-nearest-neighbour regression used as the comparison method."""

import numpy as np

from .errors import EmptyDataset, InvalidArgs


def knn1_evaluate(idx, ts, c):
    """Stored ``(s, d)`` of the training row nearest ``c`` (ties: lowest row id)."""
    if ts is None or len(ts) == 0:
        raise EmptyDataset("training set is empty")
    ids, _ = idx.query(np.asarray(c, dtype=float), 1)
    ids = ids[..., 0]
    return ts.s[ids], ts.d[ids]


def mean_stress_error(s_pred, s_true):
    """``E_S = (1/6) sum_i sum_j (s_pred_ij - s_true_ij)^2`` over test points i and
    stress components j."""
    s_pred = np.asarray(s_pred, dtype=float)
    s_true = np.asarray(s_true, dtype=float)
    if s_pred.shape != s_true.shape or s_pred.shape[-1] != 6:
        raise InvalidArgs("stress arrays must share a (..., 6) shape")
    return float(np.sum((s_pred - s_true) ** 2) / 6.0)


def normalized_component_mse(s_pred, s_true):
    """Per-component MSE divided by the mean square of the true component."""
    err = np.mean((np.asarray(s_pred) - np.asarray(s_true)) ** 2, axis=0)
    scale = np.mean(np.asarray(s_true) ** 2, axis=0)
    return err / np.where(scale > 0, scale, 1.0)
