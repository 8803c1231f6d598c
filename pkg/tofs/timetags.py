# tofs/timetags.py

"""
Time-tag simulation: dispersive delay, Gaussian timing jitter, photon loss
and quantization to the time-tagger resolution.
"""

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from tofs.sampling import BLOCK_SIZE, PhotonPairs
from tofs.spectrometer import TofsConfig, wavelength_to_delay
from utils.errors import NumericError
from utils.logger import logger
from utils.parallel import block_rng, parallel_map

CHANNEL_1 = 1
CHANNEL_2 = 2


@dataclass(frozen=True)
class TimetagEvent:
    channel: int
    time: float   # ps since the first pulse


@dataclass
class TimetagStream:
    """
    Tags sorted by time (channel breaks ties). Times are integers in units
    of `resolution` ps counted from the first pump pulse.
    """
    channels: np.ndarray
    ticks: np.ndarray
    resolution: float
    period_ticks: int
    n_pairs: int = 0
    lost: int = 0

    def __post_init__(self):
        self.channels = np.asarray(self.channels, dtype=np.uint8)
        self.ticks = np.asarray(self.ticks, dtype=np.int64)
        if self.channels.shape != self.ticks.shape:
            raise NumericError("channels and ticks must have equal length")

    def __len__(self):
        return int(self.ticks.size)

    def __iter__(self) -> Iterator[TimetagEvent]:
        for channel, tick in zip(self.channels.tolist(), self.ticks.tolist()):
            yield TimetagEvent(channel, tick * self.resolution)

    @property
    def times(self) -> np.ndarray:
        return self.ticks * self.resolution

    def sorted(self) -> "TimetagStream":
        order = np.lexsort((self.channels, self.ticks))
        return TimetagStream(self.channels[order], self.ticks[order], self.resolution, self.period_ticks,
                             self.n_pairs, self.lost)


def simulate_timetags(pairs: PhotonPairs, config: TofsConfig, seed: int) -> TimetagStream:
    """
    Pair k is emitted by pump pulse k. Each photon arrives at
    k*T + ((D*L*(lambda - lambda_ref) + jitter) mod T), quantized to the
    timing resolution; photons not surviving the loss are dropped.
    """
    n = len(pairs)
    period = config.period_ticks
    resolution = config.timing_resolution
    sigma = config.jitter_sigma

    def tag(block: int):
        start = block * BLOCK_SIZE
        stop = min(start + BLOCK_SIZE, n)
        size = stop - start
        rng = block_rng(seed, block)
        pulse = np.arange(start, stop, dtype=np.int64) * period

        channels, ticks, lost = [], [], 0
        for channel, lam in ((CHANNEL_1, pairs.wavelength1[start:stop]), (CHANNEL_2, pairs.wavelength2[start:stop])):
            delay = wavelength_to_delay(lam, config)
            jitter = rng.normal(0.0, sigma, size) if sigma > 0 else np.zeros(size)
            keep = rng.random(size) < config.survival_probability
            rel = np.mod(np.rint((delay + jitter) / resolution).astype(np.int64), period)
            lost += int(size - keep.sum())
            channels.append(np.full(int(keep.sum()), channel, dtype=np.uint8))
            ticks.append(pulse[keep] + rel[keep])
        return np.concatenate(channels), np.concatenate(ticks), lost

    n_blocks = -(-n // BLOCK_SIZE) if n else 0
    parts = parallel_map(tag, range(n_blocks))
    if parts:
        channels = np.concatenate([p[0] for p in parts])
        ticks = np.concatenate([p[1] for p in parts])
        lost = sum(p[2] for p in parts)
    else:
        channels, ticks, lost = np.empty(0, np.uint8), np.empty(0, np.int64), 0

    stream = TimetagStream(channels, ticks, resolution, period, n_pairs=n, lost=lost).sorted()
    logger.info(f"simulated {len(stream)} tags from {n} pairs ({lost} photons lost)", module="TOFS")
    return stream
