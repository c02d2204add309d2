"""
Spectrum I/O module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Persist spectra as CSV files with a sibling JSON metadata
document, read measured spectra back, and write JSON reports. Every float
is written with 12 significant digits and no timestamps, so identical
inputs give byte-identical files.
"""

import json
import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np

from emission import SpectralGrid, Spectrum
from errors import ConfigError
from settings import Settings

logger = logging.getLogger(__name__)


def _rounded(value, digits: int):
    """Recursively round floats (and numpy scalars/arrays) for JSON output."""
    if isinstance(value, dict):
        return {str(k): _rounded(v, digits) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v, digits) for v in value]
    if isinstance(value, np.ndarray):
        return [_rounded(v, digits) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{digits}g}")
    return value


def dumps(document: dict, settings: Optional[Settings] = None) -> str:
    settings = settings or Settings()
    return json.dumps(_rounded(document, settings.significant_digits), indent=4, sort_keys=True) + '\n'


def write_json(path: Path, document: dict, settings: Optional[Settings] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document, settings))
    return path


def metadata_path(csv_path: Path) -> Path:
    return Path(csv_path).with_suffix('.json')


def write_spectrum(sp: Spectrum, path: Path, extra: Optional[dict] = None,
                   settings: Optional[Settings] = None) -> Path:
    """Write `sp` as CSV plus a sibling metadata JSON; returns the CSV path."""
    settings = settings or Settings()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fmt = f'%.{settings.significant_digits}g'
    table = np.column_stack([sp.deltas, sp.values])
    np.savetxt(path, table, fmt=fmt, delimiter=',', header=settings.csv_header, comments='')
    meta = dict(sp.meta)
    meta['kind'] = sp.kind
    meta['grid'] = sp.grid.to_dict()
    if extra:
        meta.update(extra)
    write_json(metadata_path(path), meta, settings)
    logger.info("wrote %s (%d points)", path, sp.values.size)
    return path


def read_spectrum(path: Path, settings: Optional[Settings] = None) -> Spectrum:
    """Read a spectrum CSV written by `write_spectrum` or in the same format."""
    settings = settings or Settings()
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read spectrum file {path}: {e}")
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ConfigError(f"spectrum file {path} is empty")
    if lines[0].strip() != settings.csv_header:
        raise ConfigError(f"spectrum file {path} must start with header '{settings.csv_header}'")
    if len(lines) < 3:
        raise ConfigError(f"spectrum file {path} needs at least two data rows")
    try:
        table = np.loadtxt(lines[1:], delimiter=',', ndmin=2)
    except ValueError as e:
        raise ConfigError(f"malformed spectrum file {path}: {e}")
    if table.shape[1] != 2:
        raise ConfigError(f"spectrum file {path} must have exactly two columns")
    deltas, values = table[:, 0], table[:, 1]
    step = (deltas[-1] - deltas[0]) / (deltas.size - 1)
    grid = SpectralGrid(float(deltas[0]), float(deltas[-1]), float(step))
    if grid.size != deltas.size or not np.allclose(grid.points, deltas, rtol=0, atol=1e-6 * step):
        raise ConfigError(f"spectrum file {path} is not on a uniform detuning grid")

    meta = {'source': str(path)}
    kind = 'measured'
    sibling = metadata_path(path)
    if sibling.exists():
        try:
            stored = json.loads(sibling.read_text())
            meta.update(stored)
        except json.JSONDecodeError:
            logger.warning("ignoring unreadable metadata %s", sibling)
    return Spectrum(grid, values, kind, meta)
