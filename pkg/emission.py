"""
Emission module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Long-time single-photon emission amplitudes and spectra of the
force-loaded cavity, the detuning grid they are sampled on, and the
quadrature used for the probability checks. Also home of the phonon
truncation planning shared with scattering and the oracle.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from core_model import SystemParams, derived_params
from errors import ConfigError, DimensionMismatchError
from franck_condon import FranckCondonTable, adaptive_truncation, adaptive_truncation_for_levels, fc_table
from mech_states import MechanicalState, displaced_projection
from settings import Settings

if TYPE_CHECKING:
    from core_model import DerivedParams

logger = logging.getLogger(__name__)

SPECTRUM_KINDS = ('emission', 'emission-undetected', 'scattering-detected',
                  'scattering-undetected', 'oracle', 'measured')


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform detuning grid, in units of the reference mechanical frequency."""
    delta_min: float
    delta_max: float
    step: float

    def __post_init__(self):
        for name in ('delta_min', 'delta_max', 'step'):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ConfigError(f"grid '{name}' must be a finite number")
        if not self.step > 0:
            raise ConfigError(f"grid step must be positive, got {self.step}")
        if not self.delta_min < self.delta_max:
            raise ConfigError("grid needs delta_min < delta_max")

    @property
    def size(self) -> int:
        return int(math.floor((self.delta_max - self.delta_min) / self.step + 1e-9)) + 1

    @property
    def points(self) -> np.ndarray:
        return self.delta_min + self.step * np.arange(self.size)

    @classmethod
    def from_dict(cls, data: dict) -> 'SpectralGrid':
        if not isinstance(data, dict):
            raise ConfigError("'grid' must be a JSON object")
        keys = {'delta_min', 'delta_max', 'step'}
        unknown = sorted(set(data) - keys)
        if unknown:
            raise ConfigError(f"unknown key(s) in 'grid': {', '.join(unknown)}")
        missing = sorted(keys - set(data))
        if missing:
            raise ConfigError(f"missing key(s) in 'grid': {', '.join(missing)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {'delta_min': self.delta_min, 'delta_max': self.delta_max, 'step': self.step}

    @classmethod
    def for_emission(cls, p: SystemParams, settings: Optional[Settings] = None) -> 'SpectralGrid':
        """Default emission grid: [-4, 2] omega_M sampled at gamma/20."""
        settings = settings or Settings()
        lo, hi = settings.emission_range
        return cls(lo * p.omega_M, hi * p.omega_M, p.gamma * settings.emission_step_fraction)

    @classmethod
    def for_scattering(cls, p: SystemParams, wp, settings: Optional[Settings] = None) -> 'SpectralGrid':
        """Default scattering grid covering the packet and the sideband window.

        Spans [delta0 - 4 eps, delta0 + 4 eps] joined with [-3, 1] omega_M,
        with step min(gamma, 2 eps)/20.
        """
        settings = settings or Settings()
        span = settings.scattering_eps_span * wp.epsilon
        lo, hi = settings.scattering_window
        return cls(min(wp.delta0 - span, lo * p.omega_M),
                   max(wp.delta0 + span, hi * p.omega_M),
                   min(p.gamma, 2 * wp.epsilon) * settings.emission_step_fraction)

    def check_resolution(self, gamma: float, settings: Optional[Settings] = None) -> bool:
        """Warn when the step is too coarse to resolve a linewidth `gamma`."""
        settings = settings or Settings()
        if self.step > gamma * settings.coarse_grid_fraction:
            logger.warning("grid step %.4g coarser than linewidth/10 (%.4g)",
                           self.step, gamma * settings.coarse_grid_fraction)
            return False
        return True


@dataclass
class Spectrum:
    """Spectral density S*omega_M sampled on a grid, plus provenance."""
    grid: SpectralGrid
    values: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.kind not in SPECTRUM_KINDS:
            raise ConfigError(f"unknown spectrum kind {self.kind!r}")
        if self.values.shape != (self.grid.size,):
            raise ConfigError(
                f"spectrum has {self.values.size} values for {self.grid.size} grid points")
        if not np.all(np.isfinite(self.values)):
            raise ConfigError("spectrum values must be finite")
        if np.any(self.values < 0):
            raise ConfigError("spectrum values must be non-negative")

    @property
    def deltas(self) -> np.ndarray:
        return self.grid.points


def plan_truncation(state: MechanicalState, initial_displacement: float,
                    chain: Sequence[float] = (), settings: Optional[Settings] = None) -> int:
    """Phonon truncation for a spectrum or an oracle run.

    The state is expanded in the basis displaced by `initial_displacement`
    and padded with guard levels; every displacement in `chain` then has to
    keep the columns of all retained levels complete.
    """
    settings = settings or Settings()
    size = adaptive_truncation(initial_displacement, state, settings.fc_weight_tol, settings)
    size = min(size + settings.guard_levels, settings.truncation_cap)
    for d in chain:
        size = max(size, adaptive_truncation_for_levels(d, range(size), settings.fc_weight_tol, settings))
    return size


def pole_table(deltas: np.ndarray, size: int, shift: float, width: float,
               omega_M: float) -> np.ndarray:
    """Rows j + size - 1 hold 1/(delta + shift - j*omega_M + i*width)."""
    j = np.arange(-(size - 1), size)[:, None]
    return 1.0 / (deltas[None, :] + shift - j * omega_M + 1j * width)


def _pure_emission(p: SystemParams, dp: 'DerivedParams', t_beta: np.ndarray,
                   v: np.ndarray, deltas: np.ndarray) -> np.ndarray:
    """Amplitudes B[m, k] for the displaced initial coefficients `v`."""
    size = t_beta.shape[0]
    inv = pole_table(deltas, size, dp.lam, dp.gamma / 2, p.omega_M)
    amplitudes = np.empty((size, deltas.size), dtype=complex)
    for m in range(size):
        amplitudes[m] = (t_beta[m] * v) @ inv[size - 1 - m: 2 * size - 1 - m]
    return math.sqrt(p.gamma_c / (2 * math.pi)) * amplitudes


def emission_amplitude(p: SystemParams, dp: 'DerivedParams', fc_beta: FranckCondonTable,
                       fc_beta1: FranckCondonTable, m0: int, m: int, delta_k):
    """Long-time amplitude for a photon at `delta_k` leaving the mirror in level m.

    `fc_beta` is the table for displacement beta, `fc_beta1` the one for
    -beta1; the free-evolution phase is left out.
    """
    if not math.isclose(fc_beta.displacement, dp.beta, abs_tol=1e-15) or \
            not math.isclose(fc_beta1.displacement, -dp.beta1, abs_tol=1e-15):
        raise DimensionMismatchError("tables must be built for beta and -beta1")
    size = min(fc_beta.size, fc_beta1.size)
    if m0 >= size or m >= size:
        raise DimensionMismatchError(f"levels m0={m0}, m={m} outside truncation {size}")
    v = fc_beta1.entries[:size, m0]
    n = np.arange(size)
    delta_k = np.asarray(delta_k, dtype=float)
    denominators = delta_k[..., None] + dp.lam - (n - m) * p.omega_M + 1j * dp.gamma / 2
    terms = fc_beta.entries[m, :size] * v / denominators
    return math.sqrt(p.gamma_c / (2 * math.pi)) * terms.sum(axis=-1)


def line_weights(p: SystemParams, s: MechanicalState, settings: Optional[Settings] = None):
    """Positions and integrated weights of the emission lines.

    Weights are normalized to one over all lines; multiply by gamma_c/gamma
    for the detected-channel area.
    """
    settings = settings or Settings()
    dp = derived_params(p)
    size = plan_truncation(s, -dp.beta1, (dp.beta,), settings)
    t_beta = fc_table(dp.beta, size).entries
    projected = displaced_projection(s, -dp.beta1, fc_table(-dp.beta1, size))
    if s.is_pure:
        occupation = projected ** 2
    else:
        occupation = (projected ** 2) @ s.mixed_weights
    m, n = np.meshgrid(np.arange(size), np.arange(size), indexing='ij')
    weights = np.bincount((n - m).ravel() + size - 1,
                          weights=(t_beta ** 2 * occupation[None, :]).ravel(),
                          minlength=2 * size - 1)
    positions = np.arange(-(size - 1), size) * p.omega_M - dp.lam
    return positions, weights


def emission_spectrum(p: SystemParams, s: MechanicalState, grid: Optional[SpectralGrid] = None,
                      channel: str = 'detected', settings: Optional[Settings] = None,
                      check_grid: bool = True) -> Spectrum:
    """Emission spectrum S(delta)*omega_M for the initial mirror state `s`.

    A pure state is summed coherently over its number components; a thermal
    state averages the single-component spectra with its weights. The
    undetected channel is the detected one scaled by gamma_d/gamma_c.
    """
    settings = settings or Settings()
    if channel not in ('detected', 'undetected'):
        raise ConfigError(f"unknown emission channel {channel!r}")
    grid = grid or SpectralGrid.for_emission(p, settings)
    if check_grid:
        grid.check_resolution(p.gamma, settings)
    dp = derived_params(p)
    size = plan_truncation(s, -dp.beta1, (dp.beta,), settings)
    t_beta = fc_table(dp.beta, size).entries
    projected = displaced_projection(s, -dp.beta1, fc_table(-dp.beta1, size))
    deltas = grid.points

    if s.is_pure:
        values = np.sum(np.abs(_pure_emission(p, dp, t_beta, projected, deltas)) ** 2, axis=0)
    else:
        values = np.zeros(deltas.size)
        for column, weight in zip(projected.T, s.mixed_weights):
            amplitudes = _pure_emission(p, dp, t_beta, column, deltas)
            values += weight * np.sum(np.abs(amplitudes) ** 2, axis=0)

    if channel == 'undetected':
        values = values * (p.gamma_d / p.gamma_c)
    positions, weights = line_weights(p, s, settings)
    outside = (positions < grid.delta_min) | (positions > grid.delta_max)
    meta = {
        'system': p.to_dict(),
        'state': s.to_dict(),
        'grid': grid.to_dict(),
        'truncation': size,
        'uncovered_weight': float(np.sum(weights[outside])),
    }
    kind = 'emission' if channel == 'detected' else 'emission-undetected'
    logger.debug("emission spectrum: %d points, truncation %d", deltas.size, size)
    return Spectrum(grid, values, kind, meta)


def _edge_slope(values: np.ndarray, step: float, at_start: bool) -> float:
    if at_start:
        return (-3 * values[0] + 4 * values[1] - values[2]) / (2 * step)
    return (3 * values[-1] - 4 * values[-2] + values[-3]) / (2 * step)


def integrate_spectrum(sp: Spectrum, settings: Optional[Settings] = None) -> float:
    """Area under the spectrum, with a 1/delta^2 estimate of the cut-off tails."""
    settings = settings or Settings()
    values = sp.values
    peak = float(np.max(values)) if values.size else 0.0
    if peak == 0.0:
        return 0.0
    total = float(trapezoid(values, sp.deltas))

    uncovered = sp.meta.get('uncovered_weight', 0.0)
    if uncovered > settings.edge_tail_fraction:
        logger.warning("grid misses populated sidebands carrying weight %.3g", uncovered)
    for at_start, edge in ((True, values[0]), (False, values[-1])):
        if edge > settings.edge_tail_fraction * peak:
            logger.warning("spectrum edge value %.3g is not in the tail regime", edge)
        if not settings.tail_correction or values.size < 3 or edge == 0.0:
            continue
        slope = _edge_slope(values, sp.grid.step, at_start)
        if at_start and slope > 0:
            total += 2 * edge ** 2 / slope
        elif not at_start and slope < 0:
            total += -2 * edge ** 2 / slope
    return total
