"""
Figure presets module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Named parameter sets reproducing the reference emission and
scattering curves (ids 2a-2c, 3, 4, 5a-5f, 6a, 6b) and the code that turns
a preset into one spectrum per curve.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from core_model import SystemParams
from emission import Spectrum, emission_spectrum
from errors import ConfigError
from mech_states import MechanicalState
from scattering import WavePacket, scattering_spectra
from settings import Settings

logger = logging.getLogger(__name__)

G0 = 0.8
GAMMA_C = 0.01
GAMMA_D = 0.01
ETA = 0.02
FORCE_SWEEP = (0.0, 0.01, 0.02, 0.04)
WIDE_EPSILON = 2.0
NARROW_EPSILON = 0.01


@dataclass(frozen=True)
class FigureCurve:
    """One curve of a preset: process, parameters and initial state."""
    label: str
    kind: str
    system: SystemParams
    state: dict
    epsilon: Optional[float] = None
    delta0: Optional[float] = None

    def wavepacket(self) -> Optional[WavePacket]:
        if self.kind != 'scattering':
            return None
        if self.delta0 is None:
            return WavePacket.resonant(self.system, self.epsilon)
        return WavePacket(self.delta0, self.epsilon)


def _system(eta: float = ETA) -> SystemParams:
    return SystemParams(g0=G0, eta=eta, gamma_c=GAMMA_C, gamma_d=GAMMA_D)


_STATES = (('ground', {'kind': 'number', 'value': 0}),
           ('coherent', {'kind': 'coherent', 'value': 1.0}),
           ('thermal', {'kind': 'thermal', 'value': 1.0}))
_GROUND = _STATES[0][1]


def _presets() -> Dict[str, List[FigureCurve]]:
    presets = {}
    for letter, (name, state) in zip('abc', _STATES):
        presets[f'2{letter}'] = [FigureCurve(name, 'emission', _system(), state)]
        presets[f'5{letter}'] = [FigureCurve(name, 'scattering', _system(), state,
                                             WIDE_EPSILON, 0.0)]
    for letter, (name, state) in zip('def', _STATES):
        presets[f'5{letter}'] = [FigureCurve(name, 'scattering', _system(), state,
                                             NARROW_EPSILON)]
    presets['3'] = [FigureCurve(f'eta_{eta:g}', 'emission', _system(eta), _GROUND)
                    for eta in FORCE_SWEEP]
    branch = 1 / (2 * G0)
    presets['4'] = [FigureCurve(f'eta_{eta:.4g}', 'emission', _system(eta), _GROUND)
                    for eta in (ETA - branch, ETA, ETA + branch)]
    presets['6a'] = [FigureCurve(f'eta_{eta:g}', 'scattering', _system(eta), _GROUND,
                                 WIDE_EPSILON, 0.0) for eta in FORCE_SWEEP]
    presets['6b'] = [FigureCurve(f'eta_{eta:g}', 'scattering', _system(eta), _GROUND,
                                 NARROW_EPSILON) for eta in FORCE_SWEEP]
    return presets


FIGURES = _presets()


def figure_curves(fig_id: str) -> List[FigureCurve]:
    if fig_id not in FIGURES:
        raise ConfigError(f"unknown figure id {fig_id!r}; known: {', '.join(sorted(FIGURES))}")
    return FIGURES[fig_id]


def build_figure(fig_id: str, settings: Optional[Settings] = None) -> List[Tuple[FigureCurve, Spectrum]]:
    """Compute every curve of a preset with its default grid."""
    settings = settings or Settings()
    bundle = []
    for curve in figure_curves(fig_id):
        state = MechanicalState.from_dict(curve.state, settings)
        if curve.kind == 'emission':
            spectrum = emission_spectrum(curve.system, state, settings=settings)
        else:
            spectrum = scattering_spectra(curve.system, state, curve.wavepacket(), settings=settings)[0]
        logger.info("figure %s: curve %s done", fig_id, curve.label)
        bundle.append((curve, spectrum))
    return bundle
