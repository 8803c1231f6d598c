# tofs/sampling.py

"""
Photon-pair sampling from a joint spectral intensity with Vose's alias
method. Samples are drawn in fixed-size blocks, each seeded from
(seed, block index), so the output depends only on the seed.
"""

from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from spectral.grid import FrequencyGrid
from utils.errors import EmptyDistribution, NegativeInput, NumericError
from utils.logger import logger
from utils.parallel import block_rng, parallel_map

BLOCK_SIZE = 1 << 18


class AliasTable:
    """O(1) sampling from a discrete distribution."""

    def __init__(self, weights: np.ndarray):
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.size == 0 or not np.all(np.isfinite(weights)):
            raise NumericError("alias table needs finite weights")
        if np.any(weights < 0):
            raise NegativeInput("alias table weights must be non-negative")
        total = weights.sum()
        if total <= 0:
            raise EmptyDistribution("alias table weights sum to zero")

        n = weights.size
        scaled = weights * (n / total)
        self.probability = np.ones(n)
        self.alias = np.arange(n)

        small = [i for i in range(n) if scaled[i] < 1.0]
        large = [i for i in range(n) if scaled[i] >= 1.0]
        while small and large:
            s, l = small.pop(), large.pop()
            self.probability[s] = scaled[s]
            self.alias[s] = l
            scaled[l] = (scaled[l] + scaled[s]) - 1.0
            (small if scaled[l] < 1.0 else large).append(l)
        # leftovers are 1 up to rounding
        for i in small + large:
            self.probability[i] = 1.0

    def __len__(self):
        return self.probability.size

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        column = rng.integers(0, len(self), size=size)
        accept = rng.random(size) < self.probability[column]
        return np.where(accept, column, self.alias[column])


@dataclass
class PhotonPairs:
    wavelength1: np.ndarray   # nm
    wavelength2: np.ndarray   # nm

    def __len__(self):
        return int(self.wavelength1.size)

    def __iter__(self) -> Iterator[Tuple[float, float]]:
        return zip(self.wavelength1.tolist(), self.wavelength2.tolist())


def sample_pairs(jsi: np.ndarray, grid1: FrequencyGrid, grid2: FrequencyGrid, n_pairs: int,
                 seed: int) -> PhotonPairs:
    """
    Draw n_pairs wavelength pairs distributed as the JSI. Each pair is placed
    uniformly in wavelength inside its grid cell.
    """
    jsi = np.asarray(jsi, dtype=float)
    if jsi.shape != (grid1.n_points, grid2.n_points):
        raise NumericError(f"JSI shape {jsi.shape} does not match the grids")
    if n_pairs < 0:
        raise NumericError(f"n_pairs must be >= 0, got {n_pairs}")
    table = AliasTable(jsi)
    if n_pairs == 0:
        return PhotonPairs(np.empty(0), np.empty(0))

    short1, long1 = grid1.cell_wavelength_edges()
    short2, long2 = grid2.cell_wavelength_edges()
    n2 = grid2.n_points

    def draw(block: int):
        start = block * BLOCK_SIZE
        size = min(BLOCK_SIZE, n_pairs - start)
        rng = block_rng(seed, block)
        flat = table.sample(rng, size)
        i, j = np.divmod(flat, n2)
        u = rng.random((2, size))
        lam1 = short1[i] + u[0] * (long1[i] - short1[i])
        lam2 = short2[j] + u[1] * (long2[j] - short2[j])
        return lam1, lam2

    n_blocks = -(-n_pairs // BLOCK_SIZE)
    parts = parallel_map(draw, range(n_blocks))
    logger.debug(f"sampled {n_pairs} pairs in {n_blocks} blocks", module="TOFS")
    return PhotonPairs(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
