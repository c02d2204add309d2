"""
Run configuration module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Load and validate the JSON document describing one run: the
system, optional SI scale, mirror state, wavepacket, grid, oracle
overrides and periodic-force modulation. Unknown keys are rejected at
every level.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from core_model import (PhysicalParams, SystemParams, eta_from_force, ground_state_shifts,
                        periodic_map)
from emission import SpectralGrid
from errors import ConfigError
from mech_states import MechanicalState
from oracle_dynamics import OVERRIDE_KEYS
from scattering import WavePacket
from settings import Settings

logger = logging.getLogger(__name__)

SECTIONS = ('system', 'physical', 'state', 'wavepacket', 'grid', 'oracle', 'modulation')


@dataclass
class RunConfig:
    """Validated run configuration.

    `system` is the effective constant-force model: when a modulation
    frequency is given the periodic mapping has already been applied, and
    `base_system` keeps the parameters as written.
    """
    system: SystemParams
    state: MechanicalState
    base_system: SystemParams
    physical: Optional[PhysicalParams] = None
    wavepacket: Optional[WavePacket] = None
    grid: Optional[SpectralGrid] = None
    oracle: dict = field(default_factory=dict)
    omega_f: Optional[float] = None

    def emission_grid(self, settings: Optional[Settings] = None) -> SpectralGrid:
        return self.grid or SpectralGrid.for_emission(self.system, settings)

    def scattering_grid(self, settings: Optional[Settings] = None) -> SpectralGrid:
        return self.grid or SpectralGrid.for_scattering(self.system, self.require_wavepacket(), settings)

    def require_wavepacket(self) -> WavePacket:
        if self.wavepacket is None:
            raise ConfigError("this command needs a 'wavepacket' section")
        return self.wavepacket

    def snapshot(self) -> dict:
        """Parameter snapshot for metadata documents."""
        return {
            'system': self.system.to_dict(),
            'base_system': self.base_system.to_dict(),
            'omega_f': self.omega_f,
            'state': self.state.to_dict(),
            'ground_state_shifts': list(ground_state_shifts(self.system)),
            'physical': self.physical.to_dict() if self.physical else None,
            'wavepacket': self.wavepacket.to_dict() if self.wavepacket else None,
        }


def _system_section(data, physical: Optional[PhysicalParams]):
    """Replace a force given in newtons by its coupling eta."""
    if not isinstance(data, dict) or 'force' not in data:
        return data
    if physical is None:
        raise ConfigError("'force' in 'system' needs a 'physical' section")
    if 'eta' in data:
        raise ConfigError("give either 'eta' or 'force' in 'system', not both")
    force = data['force']
    if isinstance(force, bool) or not isinstance(force, (int, float)):
        raise ConfigError("'force' must be a number")
    converted = {k: v for k, v in data.items() if k != 'force'}
    converted['eta'] = eta_from_force(physical, float(force))
    return converted


def parse_run_config(data: dict, settings: Optional[Settings] = None) -> RunConfig:
    """Validate an already-decoded configuration document."""
    settings = settings or Settings()
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    if 'system' not in data:
        raise ConfigError("configuration needs a 'system' section")

    physical = PhysicalParams.from_dict(data['physical']) if 'physical' in data else None
    base = SystemParams.from_dict(_system_section(data['system'], physical))
    omega_f = None
    system = base
    if 'modulation' in data:
        modulation = data['modulation']
        if not isinstance(modulation, dict) or set(modulation) != {'omega_f'}:
            raise ConfigError("'modulation' must be exactly {\"omega_f\": <number>}")
        omega_f = modulation['omega_f']
        if isinstance(omega_f, bool) or not isinstance(omega_f, (int, float)):
            raise ConfigError("'omega_f' must be a number")
        system = periodic_map(base, float(omega_f), settings)

    state = MechanicalState.from_dict(data.get('state', {'kind': 'number', 'value': 0}), settings)
    wavepacket = WavePacket.from_dict(data['wavepacket'], system) if 'wavepacket' in data else None
    grid = SpectralGrid.from_dict(data['grid']) if 'grid' in data else None

    oracle = data.get('oracle', {})
    if not isinstance(oracle, dict):
        raise ConfigError("'oracle' must be a JSON object")
    bad = sorted(set(oracle) - set(OVERRIDE_KEYS))
    if bad:
        raise ConfigError(f"unknown key(s) in 'oracle': {', '.join(bad)}")

    return RunConfig(system=system, state=state, base_system=base, physical=physical,
                     wavepacket=wavepacket, grid=grid, oracle=dict(oracle), omega_f=omega_f)


def load_run_config(path: Path, settings: Optional[Settings] = None) -> RunConfig:
    """Read and validate a configuration file."""
    path = Path(path)
    try:
        contents = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read configuration {path}: {e}")
    try:
        data = json.loads(contents)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path}: line {e.lineno} column {e.colno}: {e.msg}")
    logger.debug("loaded configuration %s", path)
    return parse_run_config(data, settings)
