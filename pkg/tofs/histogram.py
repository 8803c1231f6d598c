# tofs/histogram.py

"""
Coincidence pairing per pump pulse, 2-D arrival-time histograms and JSI
reconstruction on a wavelength axis.
"""

from dataclasses import asdict, dataclass, field
from typing import Tuple

import numpy as np

from spectral.lobes import SpectralImage
from tofs.spectrometer import TofsConfig, delay_to_wavelength
from tofs.timetags import CHANNEL_1, CHANNEL_2, TimetagStream
from utils.errors import ConfigError, EmptyHistogram
from utils.logger import logger


@dataclass
class ChainStats:
    """
    Accounting of the detection chain. Every emitted photon ends up in
    exactly one bucket: 2*(coincidences + out_of_range) + singles + lost
    + multi = 2*pairs.
    """
    pairs: int = 0
    coincidences: int = 0
    out_of_range: int = 0
    singles: int = 0
    lost: int = 0
    multi: int = 0

    def balanced(self) -> bool:
        return 2 * (self.coincidences + self.out_of_range) + self.singles + self.lost + self.multi == 2 * self.pairs

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Histogram2D:
    counts: np.ndarray = field(repr=False)   # int64, n_bins x n_bins
    bin_width: float = 25.0                  # ps
    origin: Tuple[float, float] = (0.0, 0.0) # ps
    stats: ChainStats = field(default_factory=ChainStats)

    @property
    def n_bins(self) -> int:
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def bin_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.counts.shape[axis]) + 0.5) * self.bin_width


def _single_per_pulse(pulses: np.ndarray):
    """Pulse ids holding exactly one tag, and the index of that tag."""
    unique, first, counts = np.unique(pulses, return_index=True, return_counts=True)
    one = counts == 1
    return unique[one], first[one], int(counts[~one].sum())


def bin_coincidences(stream: TimetagStream, config: TofsConfig, n_bins: int = None, bin_width: float = None,
                     origin: Tuple[float, float] = (0.0, 0.0)) -> Histogram2D:
    """
    Pair one channel-1 and one channel-2 tag per pulse window and histogram
    their arrival times within the window over [origin, origin + n_bins*bin_width).
    Pulses with more than one tag on a channel are counted in `multi`.
    """
    n_bins = int(n_bins if n_bins is not None else config.n_bins)
    bin_width = float(bin_width if bin_width is not None else config.bin_width)
    if n_bins < 1 or bin_width <= 0:
        raise ConfigError("histogram needs n_bins >= 1 and bin_width > 0")

    stream = stream.sorted()
    pulses = stream.ticks // stream.period_ticks
    phase = (stream.ticks - pulses * stream.period_ticks) * stream.resolution

    ch1 = np.nonzero(stream.channels == CHANNEL_1)[0]
    ch2 = np.nonzero(stream.channels == CHANNEL_2)[0]
    p1, i1, multi1 = _single_per_pulse(pulses[ch1])
    p2, i2, multi2 = _single_per_pulse(pulses[ch2])
    common, a, b = np.intersect1d(p1, p2, assume_unique=True, return_indices=True)

    t1 = phase[ch1[i1[a]]]
    t2 = phase[ch2[i2[b]]]
    edges1 = origin[0] + np.arange(n_bins + 1) * bin_width
    edges2 = origin[1] + np.arange(n_bins + 1) * bin_width
    inside = (t1 >= edges1[0]) & (t1 < edges1[-1]) & (t2 >= edges2[0]) & (t2 < edges2[-1])

    counts, _, _ = np.histogram2d(t1[inside], t2[inside], bins=[edges1, edges2])
    stats = ChainStats(
        pairs=int(stream.n_pairs),
        coincidences=int(inside.sum()),
        out_of_range=int((~inside).sum()),
        singles=int(p1.size + p2.size - 2 * common.size),
        lost=int(stream.lost),
        multi=multi1 + multi2,
    )
    if stream.n_pairs and not stats.balanced():
        logger.warning(f"chain accounting does not balance: {stats}", module="TOFS")
    logger.info(f"{stats.coincidences} coincidences in range, {stats.out_of_range} outside, "
                f"{stats.singles} singles", module="TOFS")
    return Histogram2D(counts.astype(np.int64), bin_width, (float(origin[0]), float(origin[1])), stats)


def reconstruct_jsi(histogram: Histogram2D, config: TofsConfig) -> SpectralImage:
    """Normalized JSI (per nm^2) on the wavelength axis implied by the dispersion."""
    total = histogram.total
    if total == 0:
        raise EmptyHistogram("histogram has no counts")
    wl1 = delay_to_wavelength(histogram.bin_centers(0), config)
    wl2 = delay_to_wavelength(histogram.bin_centers(1), config)
    dlam = histogram.bin_width / config.ps_per_nm
    density = histogram.counts / (total * dlam * dlam)
    return SpectralImage(density, wl1, wl2)
