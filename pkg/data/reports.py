# data/reports.py

"""
Deterministic JSON reports. Keys keep insertion order and floats use
their shortest round-trip form, so reruns produce identical bytes.
"""

import json
from enum import Enum
from pathlib import Path

import numpy as np

from config.version import FORMAT_VERSIONS
from data.containers import write_modes
from schmidt.decomposition import SchmidtDecomposition
from utils.errors import FormatError

REPORT_VERSION = FORMAT_VERSIONS["json_report"]


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def write_json(path, payload: dict):
    body = {"format_version": REPORT_VERSION, **_plain(payload)}
    Path(path).write_text(json.dumps(body, indent=2) + "\n", encoding="utf-8")


def read_json(path) -> dict:
    try:
        body = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise FormatError(f"{path}: {e}") from e
    if body.get("format_version") != REPORT_VERSION:
        raise FormatError(f"{path}: unknown report version {body.get('format_version')}")
    return body


def write_schmidt_report(directory, decomposition: SchmidtDecomposition, max_modes: int = 16) -> dict:
    """schmidt.json plus the leading photon-1 and photon-2 modes as matrix containers."""
    directory = Path(directory)
    keep = int(min(max_modes, np.count_nonzero(decomposition.coefficients)))
    write_modes(directory / "modes1.bin", decomposition.modes1[:, :keep], decomposition.grid1)
    write_modes(directory / "modes2.bin", decomposition.modes2[:, :keep], decomposition.grid2)
    payload = {
        "schmidt_number": decomposition.schmidt_number,
        "coefficients": decomposition.coefficients[decomposition.coefficients > 0],
        "modes": {"photon1": "modes1.bin", "photon2": "modes2.bin", "count": keep},
    }
    write_json(directory / "schmidt.json", payload)
    return payload
