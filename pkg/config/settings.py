# config/settings.py

import json
import os
import re
from dataclasses import dataclass, field, fields, is_dataclass
from json.decoder import scanstring
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from spectral.functions import PmfSpec, PumpSpec
from spectral.grid import FrequencyGrid, make_grid
from spectral.jsa import StateConfig
from tofs.spectrometer import TofsConfig
from utils.errors import ConfigError, UnsupportedOrder

DEFAULTS_PATH = Path(__file__).with_name("defaults.json")


# --- These classes MUST be defined BEFORE the main PipelineConfig class ---
@dataclass(frozen=True)
class GridConfig:
    """Frequency grid shared by both photons."""
    center_wavelength: float = 1550.0   # nm
    span: float = 36.0                  # nm
    n_points: int = 512

    def __post_init__(self):
        self.build()

    def build(self) -> FrequencyGrid:
        return make_grid(self.center_wavelength, self.span, self.n_points)


@dataclass(frozen=True)
class HomConfig:
    """Delay scan and theory-curve settings."""
    delay_min: float = -4.0             # ps
    delay_max: float = 4.0              # ps
    points: int = 201
    phis: List[float] = field(default_factory=lambda: [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    normalization_counts: float = 1000.0
    k_sigma: float = 3.0

    def __post_init__(self):
        if not self.delay_max > self.delay_min:
            raise ConfigError("hom.delay_max must exceed hom.delay_min")
        if self.points < 10:
            raise ConfigError(f"hom.points must be >= 10, got {self.points}")
        if not self.normalization_counts > 0:
            raise ConfigError("hom.normalization_counts must be > 0")

    def delays(self) -> np.ndarray:
        return np.linspace(self.delay_min, self.delay_max, int(self.points))


@dataclass(frozen=True)
class MonteCarloConfig:
    rounds: int = 1000
    seed: int = 20240601
    total_counts: float = 1.3e7         # events assumed when a JSI carries no counts

    def __post_init__(self):
        if self.rounds < 2:
            raise ConfigError(f"monte_carlo.rounds must be >= 2, got {self.rounds}")


@dataclass(frozen=True)
class InferenceConfig:
    """Lobe detection and phase disambiguation."""
    threshold: float = 0.1
    nms_radius_nm: float = 1.0
    smoothing_bins: float = 0.0
    bin_symmetry: str = "symmetric"
    candidate_phis: List[float] = field(default_factory=lambda: [0.0, np.pi / 2])
    confidence: float = 1.0

    def __post_init__(self):
        if self.bin_symmetry not in ("symmetric", "antisymmetric"):
            raise ConfigError("inference.bin_symmetry must be 'symmetric' or 'antisymmetric'")
        if not 0 < self.threshold < 1:
            raise ConfigError("inference.threshold must be in (0, 1)")


# --- Main configuration ---
@dataclass(frozen=True)
class PipelineConfig:
    """Main configuration for the hyper-entanglement toolkit."""
    state: StateConfig = field(default_factory=StateConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    tofs: TofsConfig = field(default_factory=TofsConfig)
    hom: HomConfig = field(default_factory=HomConfig)
    monte_carlo: MonteCarloConfig = field(default_factory=MonteCarloConfig)
    inference: InferenceConfig = field(default_factory=InferenceConfig)
    output_dir: str = "output"


# nested dataclass type for each section key
_SECTIONS = {
    PipelineConfig: {"state": StateConfig, "grid": GridConfig, "tofs": TofsConfig, "hom": HomConfig,
                     "monte_carlo": MonteCarloConfig, "inference": InferenceConfig},
    StateConfig: {"pump": PumpSpec, "pmf": PmfSpec},
}


_COLON = re.compile(r"\s*:")


def _key_lines(text: str) -> Dict[str, int]:
    """Dotted key path ("tofs.bin_width") -> 1-based line, for every object key in valid JSON text."""
    lines: Dict[str, int] = {}
    stack: List[Optional[str]] = []
    key: Optional[str] = None
    index, line = 0, 1
    while index < len(text):
        char = text[index]
        if char == '"':
            token, end = scanstring(text, index + 1)
            if _COLON.match(text, end):
                key = token
                lines.setdefault(".".join([*(k for k in stack if k is not None), key]), line)
            index = end
            continue
        if char == "\n":
            line += 1
        elif char in "{[":
            stack.append(key if char == "{" else None)
            key = None
        elif char in "}]":
            stack.pop()
        elif char == ",":
            key = None
        index += 1
    return lines


def _with_line(message: str, line: int) -> str:
    return f"{message} (line {line})" if line else message


def _build(cls, values: dict, lines: Dict[str, int], prefix: str):
    if not isinstance(values, dict):
        raise ConfigError(f"{prefix or 'config'} must be a JSON object")
    known = {f.name for f in fields(cls)}
    for key in values:
        if key not in known:
            raise ConfigError(_with_line(f"unknown field '{prefix}{key}'", lines.get(prefix + key, 0)))

    kwargs = {}
    for key, value in values.items():
        nested = _SECTIONS.get(cls, {}).get(key)
        kwargs[key] = _build(nested, value, lines, f"{prefix}{key}.") if nested else value
    try:
        return cls(**kwargs)
    except (UnsupportedOrder, ConfigError) as e:
        # messages start with the offending field, e.g. "tofs.bin_width must be > 0"
        field_name = str(e).split(" ")[0].split(".")[-1]
        line = lines.get(prefix + field_name) or lines.get(prefix.rstrip("."), 0)
        raise type(e)(_with_line(str(e), line)) from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value in {prefix.rstrip('.') or 'config'}: {e}") from e


def load_config(path=None) -> PipelineConfig:
    """
    Read a JSON configuration. Missing keys take their defaults; unknown
    keys and invalid values raise ConfigError naming the field and line.
    """
    path = Path(path) if path else DEFAULTS_PATH
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        values = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e

    lines = _key_lines(text)
    config = _build(PipelineConfig, values, lines, "")
    if config.state.pmf.order not in (0, 1):
        raise UnsupportedOrder(_with_line(f"pmf.order must be 0 or 1, got {config.state.pmf.order}",
                                          lines.get("state.pmf.order", 0)))
    return config


def get_config() -> PipelineConfig:
    """
    Initializes and returns the main configuration: the file named by
    BST_CONFIG when set, the packaged defaults otherwise.
    """
    return load_config(os.environ.get("BST_CONFIG") or None)


def config_to_dict(config) -> dict:
    """Plain dict of a (nested) config dataclass, for echoing into reports."""
    if is_dataclass(config):
        out = {}
        for f in fields(config):
            value = getattr(config, f.name)
            if is_dataclass(value):
                out[f.name] = config_to_dict(value)
            elif hasattr(value, "value") and not isinstance(value, (int, float)):
                out[f.name] = value.value
            else:
                out[f.name] = value
        return out
    return config
