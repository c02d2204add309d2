"""
Scattering module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Long-time amplitudes and spectra for a single photon in a
Lorentzian wavepacket scattered off the force-loaded cavity, in the
detected and undetected output channels, and the probability bookkeeping
that checks unitarity.
"""

import logging
import math
from dataclasses import dataclass
from numbers import Real
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import simpson

from core_model import DerivedParams, SystemParams, derived_params
from emission import Spectrum, SpectralGrid, pole_table, plan_truncation
from errors import ConfigError, DimensionMismatchError
from franck_condon import FranckCondonTable, fc_table
from mech_states import MechanicalState, displaced_projection
from settings import Settings

logger = logging.getLogger(__name__)

_CHUNK = 8192
_ACTIVE_LEVEL = 1e-15
_LINE_WEIGHT = 1e-12


@dataclass(frozen=True)
class WavePacket:
    """Lorentzian single-photon packet: centre detuning and half-width."""
    delta0: float
    epsilon: float

    def __post_init__(self):
        for name in ('delta0', 'epsilon'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, Real) or not math.isfinite(value):
                raise ConfigError(f"wavepacket '{name}' must be a finite number")
        if not self.epsilon > 0:
            raise ConfigError(f"wavepacket epsilon must be positive, got {self.epsilon}")

    @classmethod
    def resonant(cls, p: SystemParams, epsilon: float) -> 'WavePacket':
        """Packet centred on the zero-phonon transition, delta0 = -lambda."""
        return cls(-derived_params(p).lam, epsilon)

    @classmethod
    def from_dict(cls, data: dict, p: SystemParams) -> 'WavePacket':
        if not isinstance(data, dict):
            raise ConfigError("'wavepacket' must be a JSON object")
        unknown = sorted(set(data) - {'delta0', 'epsilon'})
        if unknown:
            raise ConfigError(f"unknown key(s) in 'wavepacket': {', '.join(unknown)}")
        if 'delta0' not in data or 'epsilon' not in data:
            raise ConfigError("'wavepacket' needs 'delta0' and 'epsilon'")
        if data['delta0'] == 'resonant':
            return cls.resonant(p, data['epsilon'])
        if isinstance(data['delta0'], str):
            raise ConfigError(f"wavepacket delta0 must be a number or 'resonant', got {data['delta0']!r}")
        return cls(data['delta0'], data['epsilon'])

    def to_dict(self) -> dict:
        return {'delta0': self.delta0, 'epsilon': self.epsilon}


def _check_beta_table(fc_beta: FranckCondonTable, dp: DerivedParams, *levels: int) -> None:
    if not math.isclose(fc_beta.displacement, dp.beta, abs_tol=1e-15):
        raise DimensionMismatchError("table must be built for displacement beta")
    if max(levels) >= fc_beta.size:
        raise DimensionMismatchError(f"levels {levels} outside truncation {fc_beta.size}")


def _interaction_term(p: SystemParams, dp: DerivedParams, t_beta: np.ndarray, l: int, m: int,
                      delta_k, wp: WavePacket):
    n = np.arange(t_beta.shape[0])
    delta_k = np.asarray(delta_k, dtype=float)
    cavity = delta_k[..., None] + dp.lam - (n - m) * p.omega_M + 1j * dp.gamma / 2
    packet = delta_k - wp.delta0 - (l - m) * p.omega_M + 1j * wp.epsilon
    return (t_beta[m] * t_beta[l] / cavity).sum(axis=-1) / packet


def scattering_amplitude_B(p: SystemParams, dp: DerivedParams, fc_beta: FranckCondonTable,
                           l: int, m: int, delta_k, wp: WavePacket):
    """Detected-channel amplitude for mirror level l -> m and photon at `delta_k`.

    The first term is the directly reflected packet, the second the photon
    that entered the cavity and left through the detected channel.
    """
    _check_beta_table(fc_beta, dp, l, m)
    delta_k = np.asarray(delta_k, dtype=float)
    direct = (1.0 if l == m else 0.0) / (delta_k - wp.delta0 + 1j * wp.epsilon)
    second = _interaction_term(p, dp, fc_beta.entries, l, m, delta_k, wp)
    return math.sqrt(wp.epsilon / math.pi) * (direct - 1j * p.gamma_c * second)


def scattering_amplitude_C(p: SystemParams, dp: DerivedParams, fc_beta: FranckCondonTable,
                           l: int, m: int, delta_q, wp: WavePacket):
    """Undetected-channel amplitude: cavity-mediated term only."""
    _check_beta_table(fc_beta, dp, l, m)
    second = _interaction_term(p, dp, fc_beta.entries, l, m, delta_q, wp)
    return math.sqrt(wp.epsilon / math.pi) * (-1j * math.sqrt(p.gamma_c * p.gamma_d)) * second


def _pure_channels(p: SystemParams, dp: DerivedParams, t_beta: np.ndarray, u: np.ndarray,
                   deltas: np.ndarray, wp: WavePacket) -> Tuple[np.ndarray, np.ndarray]:
    """Densities summed over final levels for one displaced initial vector `u`."""
    size = t_beta.shape[0]
    active = np.nonzero(np.abs(u) > _ACTIVE_LEVEL)[0]
    inv_cavity = pole_table(deltas, size, dp.lam, dp.gamma / 2, p.omega_M)
    inv_packet = pole_table(deltas, size, -wp.delta0, wp.epsilon, p.omega_M)
    weighted = t_beta[active].T * u[active]

    detected = np.zeros(deltas.size)
    second_sum = np.zeros(deltas.size)
    for m in range(size):
        y = weighted @ inv_packet[active - m + size - 1]
        second = np.sum(t_beta[m][:, None] * inv_cavity[size - 1 - m: 2 * size - 1 - m] * y, axis=0)
        direct = u[m] * inv_packet[size - 1]
        detected += np.abs(direct - 1j * p.gamma_c * second) ** 2
        second_sum += np.abs(second) ** 2
    scale = wp.epsilon / math.pi
    return scale * detected, scale * p.gamma_c * p.gamma_d * second_sum


class _ScatteringModel:
    """Truncation, tables and displaced initial vectors for one configuration."""

    def __init__(self, p: SystemParams, s: MechanicalState, wp: WavePacket, settings: Settings):
        self.p = p
        self.s = s
        self.wp = wp
        self.dp = derived_params(p)
        self.size = plan_truncation(s, -self.dp.beta0, (-self.dp.beta, self.dp.beta), settings)
        self.t_beta = fc_table(self.dp.beta, self.size).entries
        projected = displaced_projection(s, -self.dp.beta0, fc_table(-self.dp.beta0, self.size))
        if s.is_pure:
            self.vectors = [(projected, 1.0)]
        else:
            self.vectors = list(zip(projected.T, s.mixed_weights))

    def densities(self, deltas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        detected = np.zeros(deltas.size)
        undetected = np.zeros(deltas.size)
        for start in range(0, deltas.size, _CHUNK):
            chunk = deltas[start:start + _CHUNK]
            for u, weight in self.vectors:
                det, und = _pure_channels(self.p, self.dp, self.t_beta, u, chunk, self.wp)
                detected[start:start + _CHUNK] += weight * det
                undetected[start:start + _CHUNK] += weight * und
        return detected, undetected

    def line_positions(self) -> np.ndarray:
        """Cavity and packet line positions carrying non-negligible weight."""
        size = self.size
        t2 = self.t_beta ** 2
        overlap = t2 @ t2.T
        j = np.arange(-(size - 1), size)
        m, n = np.meshgrid(np.arange(size), np.arange(size), indexing='ij')
        cavity = np.zeros(2 * size - 1)
        packet = np.zeros(2 * size - 1)
        for u, weight in self.vectors:
            occupation = t2.T @ (u ** 2)
            cavity += weight * np.bincount((n - m).ravel() + size - 1,
                                           weights=(t2 * occupation[None, :]).ravel(),
                                           minlength=2 * size - 1)
            # packet lines index (l - m); rows of `overlap` are m, columns l
            packet += weight * np.bincount((n - m).ravel() + size - 1,
                                           weights=(overlap * (u ** 2)[None, :]).ravel(),
                                           minlength=2 * size - 1)
        packet[size - 1] = max(packet[size - 1], 1.0)
        positions = np.concatenate([j[cavity > _LINE_WEIGHT] * self.p.omega_M - self.dp.lam,
                                    j[packet > _LINE_WEIGHT] * self.p.omega_M + self.wp.delta0])
        return positions

    def meta(self, grid: SpectralGrid) -> dict:
        return {
            'system': self.p.to_dict(),
            'state': self.s.to_dict(),
            'wavepacket': self.wp.to_dict(),
            'grid': grid.to_dict(),
            'truncation': self.size,
        }


def scattering_spectra(p: SystemParams, s: MechanicalState, wp: WavePacket,
                       grid: Optional[SpectralGrid] = None, settings: Optional[Settings] = None,
                       check_grid: bool = True) -> Tuple[Spectrum, Spectrum]:
    """Detected and undetected scattering spectra on a common grid.

    The mirror state is expanded in the zero-photon displaced basis
    (displacement -beta0); thermal states average the component spectra.
    """
    settings = settings or Settings()
    grid = grid or SpectralGrid.for_scattering(p, wp, settings)
    if check_grid:
        grid.check_resolution(min(p.gamma, 2 * wp.epsilon), settings)
    model = _ScatteringModel(p, s, wp, settings)
    detected, undetected = model.densities(grid.points)
    meta = model.meta(grid)
    logger.debug("scattering spectra: %d points, truncation %d", grid.size, model.size)
    return (Spectrum(grid, detected, 'scattering-detected', dict(meta)),
            Spectrum(grid, undetected, 'scattering-undetected', dict(meta)))


def scattering_spectrum(p: SystemParams, s: MechanicalState, wp: WavePacket,
                        grid: Optional[SpectralGrid] = None, channel: str = 'detected',
                        settings: Optional[Settings] = None) -> Spectrum:
    """Single-channel scattering spectrum."""
    if channel not in ('detected', 'undetected'):
        raise ConfigError(f"unknown scattering channel {channel!r}")
    detected, undetected = scattering_spectra(p, s, wp, grid, settings)
    return detected if channel == 'detected' else undetected


def scattering_probabilities(p: SystemParams, s: MechanicalState, wp: WavePacket,
                             settings: Optional[Settings] = None) -> Tuple[float, float]:
    """Detected and undetected output probabilities over the whole real line.

    A uniform core covers every populated line plus a margin; the two
    semi-infinite tails are mapped onto [0, 1) and integrated with Simpson.
    """
    settings = settings or Settings()
    model = _ScatteringModel(p, s, wp, settings)
    positions = model.line_positions()
    margin = p.omega_M + 2 * wp.epsilon
    lo, hi = float(positions.min()) - margin, float(positions.max()) + margin
    step = min(p.gamma, 2 * wp.epsilon) * settings.emission_step_fraction
    core = np.linspace(lo, hi, int(math.ceil((hi - lo) / step)) + 1)
    det, und = model.densities(core)
    detected, undetected = simpson(det, x=core), simpson(und, x=core)

    scale = max(wp.epsilon, p.omega_M)
    t = np.linspace(0.0, 1.0 - 1e-6, settings.scattering_tail_points)
    stretch = scale * t / (1.0 - t)
    jacobian = scale / (1.0 - t) ** 2
    for points in (hi + stretch, lo - stretch):
        det, und = model.densities(points)
        detected += simpson(det * jacobian, x=t)
        undetected += simpson(und * jacobian, x=t)
    logger.debug("scattering probabilities: detected %.6g, undetected %.6g", detected, undetected)
    return float(detected), float(undetected)


def total_scattering_probability(p: SystemParams, s: MechanicalState, wp: WavePacket,
                                 settings: Optional[Settings] = None) -> float:
    """Total output probability; one for a unitary scattering process."""
    detected, undetected = scattering_probabilities(p, s, wp, settings)
    return detected + undetected


def closed_form_undetected_probability(p: SystemParams, wp: WavePacket) -> float:
    """Undetected-channel probability of the uncoupled mirror (g0 = 0)."""
    if p.g0 != 0:
        raise ConfigError("closed form only holds for g0 = 0")
    half = p.gamma / 2
    return (p.gamma_c * p.gamma_d * (wp.epsilon + half)
            / (half * (wp.delta0 ** 2 + (wp.epsilon + half) ** 2)))
