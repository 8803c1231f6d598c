# ===============================================
# data/containers.py
# ===============================================

"""
Versioned binary and CSV formats for JSAs, mode matrices, histograms,
time tags, HOM curves and intensity images.

Matrix container (little endian): 64-byte header
    magic "BJSA" | u32 version | u32 n1 | u32 n2 | u32 kind
    | f64 center1 | f64 span1 | f64 center2 | f64 span2 | u32 normalized | 8 pad
followed by n1*n2 complex values as interleaved (re, im) float64, row major.
"""

import struct
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from config.version import FORMAT_VERSIONS
from hom.model import CurveKind, HomCurve, delay_to_stage
from spectral.grid import FrequencyGrid, make_grid
from spectral.jsa import JsaMatrix
from spectral.lobes import SpectralImage
from tofs.histogram import ChainStats, Histogram2D
from tofs.timetags import TimetagStream
from utils.errors import FormatError
from utils.logger import logger

MATRIX_MAGIC = b"BJSA"
MATRIX_VERSION = FORMAT_VERSIONS["matrix_container"]
_MATRIX_HEADER = struct.Struct("<4sIIII4dI8x")

TIMETAG_MAGIC = b"BTTG"
TIMETAG_VERSION = FORMAT_VERSIONS["timetag_stream"]
_TIMETAG_HEADER = struct.Struct("<4sIdqq")
_TIMETAG_RECORD = np.dtype([("channel", "u1"), ("time", "<u8")])

CSV_FLOAT = "%.17g"


class MatrixKind(IntEnum):
    JSA = 0          # both axes are frequency grids
    MODES = 1        # axis 2 is a mode index
    HISTOGRAM = 2    # axes are arrival-time bins; center/span in ps


@dataclass
class MatrixFile:
    values: np.ndarray
    kind: MatrixKind
    axis1: Tuple[float, float]
    axis2: Tuple[float, float]
    normalized: bool = False


def write_matrix(path, values: np.ndarray, kind: MatrixKind, axis1=(0.0, 0.0), axis2=(0.0, 0.0),
                 normalized: bool = False):
    values = np.asarray(values)
    if values.ndim != 2:
        raise FormatError("matrix container holds 2-D data only")
    n1, n2 = values.shape
    header = _MATRIX_HEADER.pack(MATRIX_MAGIC, MATRIX_VERSION, n1, n2, int(kind),
                                 float(axis1[0]), float(axis1[1]), float(axis2[0]), float(axis2[1]),
                                 int(bool(normalized)))
    Path(path).write_bytes(header + np.ascontiguousarray(values, dtype="<c16").tobytes())


def read_matrix(path) -> MatrixFile:
    raw = Path(path).read_bytes()
    if len(raw) < _MATRIX_HEADER.size:
        raise FormatError(f"{path}: file shorter than the container header")
    magic, version, n1, n2, kind, c1, s1, c2, s2, normalized = _MATRIX_HEADER.unpack_from(raw)
    if magic != MATRIX_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != MATRIX_VERSION:
        raise FormatError(f"{path}: unknown container version {version}")
    try:
        kind = MatrixKind(kind)
    except ValueError:
        raise FormatError(f"{path}: unknown matrix kind {kind}")
    expected = _MATRIX_HEADER.size + n1 * n2 * 16
    if len(raw) != expected:
        raise FormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<c16", offset=_MATRIX_HEADER.size).reshape(n1, n2).astype(complex)
    return MatrixFile(values, kind, (c1, s1), (c2, s2), bool(normalized))


def write_jsa(path, jsa: JsaMatrix):
    write_matrix(path, jsa.amplitudes, MatrixKind.JSA,
                 (jsa.grid1.center_wavelength, jsa.grid1.span),
                 (jsa.grid2.center_wavelength, jsa.grid2.span), jsa.normalized)


def read_jsa(path) -> JsaMatrix:
    data = read_matrix(path)
    if data.kind != MatrixKind.JSA:
        raise FormatError(f"{path}: holds {data.kind.name}, not a JSA")
    n1, n2 = data.values.shape
    grid1 = make_grid(data.axis1[0], data.axis1[1], n1)
    grid2 = make_grid(data.axis2[0], data.axis2[1], n2)
    return JsaMatrix(grid1, grid2, data.values, normalized=data.normalized)


def write_modes(path, modes: np.ndarray, grid: FrequencyGrid):
    write_matrix(path, modes, MatrixKind.MODES, (grid.center_wavelength, grid.span))


def write_histogram(path, histogram: Histogram2D):
    extent = histogram.n_bins * histogram.bin_width
    write_matrix(path, histogram.counts.astype(float), MatrixKind.HISTOGRAM,
                 (histogram.origin[0] + extent / 2, extent), (histogram.origin[1] + extent / 2, extent))


def read_histogram(path) -> Histogram2D:
    data = read_matrix(path)
    if data.kind != MatrixKind.HISTOGRAM:
        raise FormatError(f"{path}: holds {data.kind.name}, not a histogram")
    n1 = data.values.shape[0]
    bin_width = data.axis1[1] / n1
    origin = (data.axis1[0] - data.axis1[1] / 2, data.axis2[0] - data.axis2[1] / 2)
    return Histogram2D(np.rint(data.values.real).astype(np.int64), bin_width, origin, ChainStats())


def write_timetags(path, stream: TimetagStream):
    """Binary record stream: header, then packed (u8 channel, u64 ticks) records."""
    header = _TIMETAG_HEADER.pack(TIMETAG_MAGIC, TIMETAG_VERSION, float(stream.resolution),
                                  int(stream.period_ticks), len(stream))
    records = np.empty(len(stream), dtype=_TIMETAG_RECORD)
    records["channel"] = stream.channels
    records["time"] = stream.ticks
    Path(path).write_bytes(header + records.tobytes())


def read_timetags(path) -> TimetagStream:
    raw = Path(path).read_bytes()
    if len(raw) < _TIMETAG_HEADER.size:
        raise FormatError(f"{path}: file shorter than the timetag header")
    magic, version, resolution, period_ticks, count = _TIMETAG_HEADER.unpack_from(raw)
    if magic != TIMETAG_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if version != TIMETAG_VERSION:
        raise FormatError(f"{path}: unknown timetag version {version}")
    if len(raw) != _TIMETAG_HEADER.size + count * _TIMETAG_RECORD.itemsize:
        raise FormatError(f"{path}: truncated record stream")
    records = np.frombuffer(raw, dtype=_TIMETAG_RECORD, offset=_TIMETAG_HEADER.size)
    return TimetagStream(records["channel"].copy(), records["time"].astype(np.int64), resolution, period_ticks)


def write_timetags_csv(path, stream: TimetagStream):
    pd.DataFrame({"channel": stream.channels, "time_ps": stream.times}).to_csv(
        path, index=False, float_format=CSV_FLOAT)


def _numeric_columns(frame: pd.DataFrame, columns, path) -> pd.DataFrame:
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise FormatError(f"{path}: missing column(s) {', '.join(missing)}")
    out = frame[list(columns)].apply(pd.to_numeric, errors="coerce")
    bad = out.isna().any(axis=1)
    if bad.any():
        # +2: one header line, 1-based rows
        row = int(np.nonzero(bad.to_numpy())[0][0]) + 2
        raise FormatError(f"{path}: malformed value on line {row}")
    return out


def _read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, dtype=str, skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise FormatError(f"{path}: {e}") from e


def write_hom_csv(path, curve: HomCurve, extra: Optional[dict] = None):
    """Columns: position_mm, delay_ps, counts (or probability), then any extra columns."""
    value_column = "counts" if curve.kind == CurveKind.COUNTS else "probability"
    positions = curve.positions if curve.positions is not None else delay_to_stage(curve.delays)
    frame = pd.DataFrame({"position_mm": positions, "delay_ps": curve.delays, value_column: curve.values})
    for name, values in (extra or {}).items():
        frame[name] = values
    frame.to_csv(path, index=False, float_format=CSV_FLOAT)


def read_hom_csv(path) -> HomCurve:
    frame = _read_csv(path)
    value_column = "counts" if "counts" in frame.columns else "probability"
    kind = CurveKind.COUNTS if value_column == "counts" else CurveKind.PROBABILITY
    columns = ["delay_ps", value_column] + (["position_mm"] if "position_mm" in frame.columns else [])
    data = _numeric_columns(frame, columns, path)
    positions = data["position_mm"].to_numpy() if "position_mm" in data.columns else None
    curve = HomCurve(data["delay_ps"].to_numpy(), data[value_column].to_numpy(), kind, positions)
    logger.debug(f"read {len(curve)} HOM points from {path}", module="CLI")
    return curve


def write_jsi_csv(path, image: SpectralImage):
    """Long table: wavelength1_nm, wavelength2_nm, intensity."""
    mesh1, mesh2 = np.meshgrid(image.wavelengths1, image.wavelengths2, indexing="ij")
    pd.DataFrame({
        "wavelength1_nm": mesh1.ravel(),
        "wavelength2_nm": mesh2.ravel(),
        "intensity": image.intensity.ravel(),
    }).to_csv(path, index=False, float_format=CSV_FLOAT)


def read_jsi_csv(path) -> SpectralImage:
    frame = _numeric_columns(_read_csv(path), ["wavelength1_nm", "wavelength2_nm", "intensity"], path)
    wl1 = pd.unique(frame["wavelength1_nm"])
    wl2 = pd.unique(frame["wavelength2_nm"])
    if wl1.size * wl2.size != len(frame):
        raise FormatError(f"{path}: rows do not form a complete {wl1.size} x {wl2.size} grid")
    table = frame.pivot(index="wavelength1_nm", columns="wavelength2_nm", values="intensity")
    table = table.reindex(index=wl1, columns=wl2)
    if table.isna().any().any():
        raise FormatError(f"{path}: rows do not form a complete grid")
    return SpectralImage(table.to_numpy(), wl1, wl2)


def write_jsa_csv(path, jsa: JsaMatrix):
    mesh1, mesh2 = np.meshgrid(jsa.grid1.wavelengths, jsa.grid2.wavelengths, indexing="ij")
    pd.DataFrame({
        "wavelength1_nm": mesh1.ravel(),
        "wavelength2_nm": mesh2.ravel(),
        "re": jsa.amplitudes.real.ravel(),
        "im": jsa.amplitudes.imag.ravel(),
    }).to_csv(path, index=False, float_format=CSV_FLOAT)


def write_sign_csv(path, signs: np.ndarray):
    pd.DataFrame(np.asarray(signs, dtype=int)).to_csv(path, index=False, header=False)


def write_pgm(path, image: np.ndarray, percentile: float = 99.5):
    """8-bit binary PGM, linear scale saturating at the given percentile."""
    image = np.asarray(image, dtype=float)
    top = np.percentile(image, percentile)
    if top <= 0:
        top = image.max() if image.max() > 0 else 1.0
    pixels = np.rint(np.clip(image / top, 0.0, 1.0) * 255).astype(np.uint8)
    rows, cols = pixels.shape
    Path(path).write_bytes(f"P5\n{cols} {rows}\n255\n".encode("ascii") + pixels.tobytes())


def write_residuals_csv(path, curve: HomCurve, model: np.ndarray):
    pd.DataFrame({
        "delay_ps": curve.delays,
        "data": curve.values,
        "model": model,
        "residual": curve.values - model,
    }).to_csv(path, index=False, float_format=CSV_FLOAT)
