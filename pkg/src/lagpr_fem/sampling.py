"""Training designs from nested hypercubes and test designs by Latin hypercube."""

from dataclasses import dataclass
import itertools

import numpy as np

from .errors import InvalidArgs
from .mechanics import F_APP_0

# Latin hypercube draws use numpy's PCG64 bit generator (numpy >= 1.17 stream).
LHS_PRNG = "numpy.random.PCG64"


@dataclass(frozen=True)
class HypercubeDesign:
    delta_T: float
    n_h: int
    points: np.ndarray  # (N, 6) applied-stretch vectors

    @property
    def spacing(self):
        return self.delta_T / self.n_h

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class LhsDesign:
    delta_T: float
    n_t: int
    seed: int
    points: np.ndarray

    def __len__(self):
        return len(self.points)


def expected_count(n_h):
    return 729 + (n_h - 1) * 728


# odometer order, last coordinate fastest; values index into (-1, 0, +1)
_OFFSETS = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=6)))
_CENTER_ROW = 364  # the all-zero combination


def hypercube_layers(delta_T, n_h):
    """Nested-hypercube design.

    Layer ``i`` (``i = 0 .. n_h-1``) places all 3^6 combinations of the
    offsets ``{-dc, 0, +dc}`` around ``F_APP_0`` with ``dc = (i+1) delta_T / n_h``.
    Layers after the first omit the unstressed point, which is stored
    once, as the very first row.
    """
    if not (np.isfinite(delta_T) and delta_T > 0):
        raise InvalidArgs(f"delta_T must be positive, got {delta_T!r}")
    if int(n_h) != n_h or n_h < 1:
        raise InvalidArgs(f"n_h must be a positive integer, got {n_h!r}")
    n_h = int(n_h)
    delta = delta_T / n_h
    off_rest = np.delete(_OFFSETS, _CENTER_ROW, axis=0)
    layers = [F_APP_0[None, :]]
    for i in range(n_h):
        dc = (i + 1) * delta
        layers.append(F_APP_0 + dc * off_rest)
    points = np.concatenate(layers)
    return HypercubeDesign(float(delta_T), n_h, points)


def lhs_sample(delta_T, n_t, seed):
    """Plain stratified Latin hypercube over ``F_APP_0 +/- delta_T``.

    Each coordinate is split into ``n_t`` equal bins; a random permutation
    assigns bins to samples and the position inside a bin is uniform.
    """
    if not (np.isfinite(delta_T) and delta_T > 0):
        raise InvalidArgs(f"delta_T must be positive, got {delta_T!r}")
    if int(n_t) != n_t or n_t < 1:
        raise InvalidArgs(f"n_t must be a positive integer, got {n_t!r}")
    n_t = int(n_t)
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((n_t, 6))
    bins = np.stack([rng.permutation(n_t) for _ in range(6)], axis=1)
    unit = (bins + u) / n_t
    points = F_APP_0 + delta_T * (2.0 * unit - 1.0)
    return LhsDesign(float(delta_T), n_t, int(seed), points)
