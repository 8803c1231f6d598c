# testing/test_containers.py

import json

import numpy as np
import pandas as pd
import pytest

from config.version import FORMAT_VERSIONS
from data.containers import (
    MatrixKind, read_histogram, read_hom_csv, read_jsa, read_jsi_csv, read_matrix, read_timetags,
    write_histogram, write_hom_csv, write_jsa, write_jsa_csv, write_jsi_csv, write_matrix, write_pgm,
    write_timetags, write_timetags_csv,
)
from data.reports import read_json, write_json, write_schmidt_report
from hom.model import CurveKind, HomCurve
from schmidt.decomposition import decompose
from spectral.jsa import build_state
from spectral.lobes import SpectralImage
from tofs.histogram import bin_coincidences
from tofs.sampling import PhotonPairs
from tofs.spectrometer import TofsConfig
from tofs.timetags import TimetagStream, simulate_timetags
from utils.errors import FormatError


def test_jsa_container_round_trip(tmp_path, small_grid, state):
    jsa = build_state(state, small_grid)
    path = tmp_path / "jsa.bin"
    write_jsa(path, jsa)
    restored = read_jsa(path)
    np.testing.assert_array_equal(restored.amplitudes, jsa.amplitudes)
    assert restored.grid1 == jsa.grid1
    assert restored.normalized
    assert path.stat().st_size == 64 + 16 * small_grid.n_points ** 2


def test_container_rejects_bad_magic_and_version(tmp_path):
    path = tmp_path / "m.bin"
    write_matrix(path, np.eye(3), MatrixKind.MODES)
    raw = bytearray(path.read_bytes())

    bad_magic = tmp_path / "magic.bin"
    bad_magic.write_bytes(b"XXXX" + bytes(raw[4:]))
    with pytest.raises(FormatError):
        read_matrix(bad_magic)

    raw[4] = 9
    bad_version = tmp_path / "version.bin"
    bad_version.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_matrix(bad_version)

    truncated = tmp_path / "short.bin"
    truncated.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(FormatError):
        read_matrix(truncated)


def test_jsa_reader_refuses_other_kinds(tmp_path):
    path = tmp_path / "modes.bin"
    write_matrix(path, np.eye(4), MatrixKind.MODES)
    with pytest.raises(FormatError):
        read_jsa(path)


def test_timetag_stream_round_trip(tmp_path):
    config = TofsConfig()
    pairs = PhotonPairs(np.linspace(1541, 1559, 40), np.linspace(1559, 1541, 40))
    stream = simulate_timetags(pairs, config, seed=12)
    path = tmp_path / "tags.bin"
    write_timetags(path, stream)
    restored = read_timetags(path)
    np.testing.assert_array_equal(restored.channels, stream.channels)
    np.testing.assert_array_equal(restored.ticks, stream.ticks)
    assert restored.resolution == stream.resolution
    assert restored.period_ticks == stream.period_ticks


def test_histogram_round_trip(tmp_path):
    config = TofsConfig(jitter_fwhm=0.0)
    pairs = PhotonPairs(np.linspace(1541, 1559, 40), np.linspace(1559, 1541, 40))
    histogram = bin_coincidences(simulate_timetags(pairs, config, seed=1), config)
    path = tmp_path / "h.bin"
    write_histogram(path, histogram)
    restored = read_histogram(path)
    np.testing.assert_array_equal(restored.counts, histogram.counts)
    assert restored.bin_width == pytest.approx(histogram.bin_width)
    assert restored.origin == pytest.approx(histogram.origin)


def test_hom_csv_round_trip(tmp_path):
    delays = np.linspace(-2.0, 2.0, 21)
    curve = HomCurve(delays, np.arange(21.0), CurveKind.COUNTS)
    path = tmp_path / "hom.csv"
    write_hom_csv(path, curve, extra={"lower": np.zeros(21)})
    restored = read_hom_csv(path)
    np.testing.assert_array_equal(restored.delays, delays)
    np.testing.assert_array_equal(restored.values, curve.values)
    assert restored.kind == CurveKind.COUNTS


def test_malformed_hom_row_names_its_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("delay_ps,counts\n-1.0,10\n0.0,oops\n1.0,12\n")
    with pytest.raises(FormatError, match="line 3"):
        read_hom_csv(path)


def test_missing_column_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time,counts\n0,1\n")
    with pytest.raises(FormatError):
        read_hom_csv(path)


def test_jsi_csv_round_trip(tmp_path):
    image = SpectralImage(np.arange(12.0).reshape(3, 4), np.array([1.0, 2.0, 3.0]),
                          np.array([5.0, 6.0, 7.0, 8.0]))
    path = tmp_path / "jsi.csv"
    write_jsi_csv(path, image)
    restored = read_jsi_csv(path)
    np.testing.assert_array_equal(restored.intensity, image.intensity)
    np.testing.assert_array_equal(restored.wavelengths2, image.wavelengths2)


def test_incomplete_jsi_grid_rejected(tmp_path):
    path = tmp_path / "jsi.csv"
    path.write_text("wavelength1_nm,wavelength2_nm,intensity\n1,5,0.1\n1,6,0.2\n2,5,0.3\n")
    with pytest.raises(FormatError):
        read_jsi_csv(path)


def test_pgm_header_and_size(tmp_path):
    path = tmp_path / "img.pgm"
    write_pgm(path, np.random.default_rng(0).random((5, 7)))
    raw = path.read_bytes()
    assert raw.startswith(b"P5\n7 5\n255\n")
    assert len(raw) == len(b"P5\n7 5\n255\n") + 35


def test_json_reports_carry_format_version(tmp_path, small_grid, state):
    path = tmp_path / "r.json"
    write_json(path, {"value": np.float64(1.5), "items": np.arange(3)})
    assert read_json(path) == {"format_version": 1, "value": 1.5, "items": [0, 1, 2]}

    path.write_text(json.dumps({"format_version": 99}))
    with pytest.raises(FormatError):
        read_json(path)

    summary = write_schmidt_report(tmp_path, decompose(build_state(state, small_grid)), max_modes=4)
    assert (tmp_path / "modes1.bin").exists() and (tmp_path / "modes2.bin").exists()
    assert read_json(tmp_path / "schmidt.json")["schmidt_number"] == pytest.approx(summary["schmidt_number"])


def test_timetag_csv_lists_channel_and_time(tmp_path):
    config = TofsConfig(jitter_fwhm=0.0)
    stream = simulate_timetags(PhotonPairs(np.array([1545.0, 1550.0]), np.array([1555.0, 1548.0])), config, seed=1)
    path = tmp_path / "tags.csv"
    write_timetags_csv(path, stream)
    frame = pd.read_csv(path)
    assert list(frame.columns) == ["channel", "time_ps"]
    assert len(frame) == len(stream) == 4
    np.testing.assert_array_equal(frame["channel"], stream.channels)
    np.testing.assert_allclose(frame["time_ps"], stream.times)
    assert frame["time_ps"].is_monotonic_increasing


def test_jsa_csv_export_is_row_major_in_wavelength(tmp_path, small_grid, state):
    jsa = build_state(state, small_grid)
    path = tmp_path / "jsa.csv"
    write_jsa_csv(path, jsa)
    frame = pd.read_csv(path, float_precision="round_trip")
    n = small_grid.n_points
    assert list(frame.columns) == ["wavelength1_nm", "wavelength2_nm", "re", "im"]
    assert len(frame) == n * n
    # photon 2 varies fastest
    np.testing.assert_allclose(frame["wavelength1_nm"][:n], small_grid.wavelengths[0])
    np.testing.assert_allclose(frame["wavelength2_nm"][:n], small_grid.wavelengths)
    np.testing.assert_array_equal(frame["re"].to_numpy().reshape(n, n), jsa.amplitudes.real)
    np.testing.assert_array_equal(frame["im"].to_numpy().reshape(n, n), jsa.amplitudes.imag)


def test_writers_stamp_the_published_format_versions(tmp_path):
    path = tmp_path / "m.bin"
    write_matrix(path, np.eye(2), MatrixKind.MODES)
    assert int.from_bytes(path.read_bytes()[4:8], "little") == FORMAT_VERSIONS["matrix_container"]

    tags = tmp_path / "t.bin"
    write_timetags(tags, TimetagStream(np.empty(0, np.uint8), np.empty(0, np.int64), 1.0, 12500))
    assert int.from_bytes(tags.read_bytes()[4:8], "little") == FORMAT_VERSIONS["timetag_stream"]

    report = tmp_path / "r.json"
    write_json(report, {})
    assert json.loads(report.read_text())["format_version"] == FORMAT_VERSIONS["json_report"]
