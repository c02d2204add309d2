"""
Inference module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Turn a measured spectrum back into a force estimate. Peaks are
located with sub-grid refinement, the zero-phonon line is inverted into
every force branch allowed by the prior, competing branches are ranked by
forward-model residuals, and weak forces are read from the spectral
height at a fixed detuning.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize, signal

from core_model import PhysicalParams, SystemParams, force_from_eta, miscount_force_error
from emission import SpectralGrid, Spectrum, emission_spectrum
from errors import ConfigError, EmptyPriorError, InferenceError, UnresolvedBranchError
from mech_states import MechanicalState
from oracle_dynamics import relative_l2
from scattering import WavePacket, scattering_spectra
from settings import Settings

logger = logging.getLogger(__name__)


class Peak(NamedTuple):
    position: float
    height: float
    prominence: float


@dataclass
class PeakSet:
    """Local maxima and minima of a spectrum, ordered by position."""
    peaks: List[Peak] = field(default_factory=list)
    dips: List[Peak] = field(default_factory=list)

    def nearest(self, position: float) -> Peak:
        if not self.peaks:
            raise InferenceError("no peak qualifies as zero-phonon-line candidate")
        return min(self.peaks, key=lambda pk: abs(pk.position - position))


class Candidate(NamedTuple):
    l: int
    eta: float
    residual: float


@dataclass
class ForceEstimate:
    """Force coupling estimate with every branch that was considered."""
    eta_hat: float
    candidates: List[Candidate]
    resolvable: bool
    method: str
    f_hat: Optional[float] = None
    diagnostics: dict = field(default_factory=dict)
    system: Optional[SystemParams] = None

    def to_dict(self, phys: Optional[PhysicalParams] = None) -> dict:
        return {
            'eta_hat': self.eta_hat,
            'f_hat_newtons': self.f_hat,
            'candidates': [
                {'l': c.l, 'eta': c.eta, 'residual': None if math.isnan(c.residual) else c.residual,
                 'f_newtons': force_from_eta(phys, c.eta) if phys else None,
                 'miscount_error_newtons': (miscount_force_error(phys, self.system, c.l)
                                            if phys and self.system and self.system.g0 > 0 else None)}
                for c in self.candidates],
            'resolvable': self.resolvable,
            'method': self.method,
            'diagnostics': self.diagnostics,
        }


def resolvability(p: SystemParams) -> bool:
    """True when the force shift 2*g0*|eta|/omega_M exceeds the linewidth."""
    return 2 * p.g0 * abs(p.eta) / p.omega_M > p.gamma


def _refine(values: np.ndarray, index: int) -> Tuple[float, float]:
    """Parabolic vertex through three neighbouring samples, in index units."""
    if index == 0 or index == values.size - 1:
        return 0.0, float(values[index])
    left, mid, right = values[index - 1], values[index], values[index + 1]
    denom = left - 2 * mid + right
    if denom == 0:
        return 0.0, float(mid)
    offset = 0.5 * (left - right) / denom
    return float(offset), float(mid - 0.25 * (left - right) * offset)


def find_peaks(sp: Spectrum, rel_prominence: Optional[float] = None,
               settings: Optional[Settings] = None) -> PeakSet:
    """Peaks and dips whose prominence is at least rel_prominence * max(S)."""
    settings = settings or Settings()
    rel_prominence = settings.rel_prominence if rel_prominence is None else rel_prominence
    if not 0 < rel_prominence < 1:
        raise ConfigError(f"rel_prominence must lie in (0, 1), got {rel_prominence}")
    values = sp.values
    if values.size == 0:
        raise ConfigError("empty spectrum")
    top = float(values.max())
    if top <= 0:
        return PeakSet()
    threshold = rel_prominence * top
    x = sp.deltas
    step = sp.grid.step

    found = PeakSet()
    for sign, target in ((1.0, found.peaks), (-1.0, found.dips)):
        indices, props = signal.find_peaks(sign * values, prominence=threshold)
        for index, prominence in zip(indices, props['prominences']):
            offset, height = _refine(sign * values, index)
            target.append(Peak(float(x[index] + offset * step), sign * height, float(prominence)))
    return found


def zpl_branches(position: float, p: SystemParams, prior: Sequence[float]) -> List[Candidate]:
    """Force couplings for which `position` is a line of the spectrum.

    Branch l assumes the observed line is the zero-phonon line shifted by
    -l*omega_M, so eta_l = eta_0 + l*omega_M^2/(2*g0).
    """
    lo, hi = _check_prior(prior)
    if p.g0 <= 0:
        raise InferenceError("zero-phonon-line inversion needs g0 > 0")
    eta0 = -position * p.omega_M / (2 * p.g0) - p.g0 / 2
    spacing = p.omega_M ** 2 / (2 * p.g0)
    first = math.ceil((lo - eta0) / spacing - 1e-12)
    last = math.floor((hi - eta0) / spacing + 1e-12)
    return [Candidate(l, eta0 + l * spacing, math.nan) for l in range(first, last + 1)]


def _check_prior(prior: Sequence[float]) -> Tuple[float, float]:
    try:
        lo, hi = (float(v) for v in prior)
    except (TypeError, ValueError):
        raise ConfigError(f"prior must be a pair of numbers, got {prior!r}")
    if not lo <= hi:
        raise ConfigError(f"prior needs lo <= hi, got [{lo}, {hi}]")
    return lo, hi


def _finish(p: SystemParams, eta: float, candidates, method: str,
            phys: Optional[PhysicalParams], diagnostics: dict) -> ForceEstimate:
    return ForceEstimate(
        eta_hat=float(eta),
        candidates=list(candidates),
        resolvable=resolvability(p.with_eta(eta)),
        method=method,
        f_hat=force_from_eta(phys, eta) if phys else None,
        diagnostics=diagnostics,
        system=p,
    )


def estimate_force_zpl(pk: PeakSet, p: SystemParams, prior: Sequence[float],
                       phys: Optional[PhysicalParams] = None) -> ForceEstimate:
    """Invert the zero-phonon-line position into force branches.

    The line nearest to the unforced zero-phonon line -g0^2/omega_M is
    taken as the candidate; `p.eta` is ignored. With several branches in
    the prior, eta_hat is the l = 0 branch when admissible and the list
    should go through `disambiguate`.
    """
    if p.g0 <= 0:
        raise InferenceError("zero-phonon-line inversion needs g0 > 0")
    line = pk.nearest(-p.g0 ** 2 / p.omega_M)
    candidates = zpl_branches(line.position, p, prior)
    if not candidates:
        raise EmptyPriorError(
            f"empty prior intersection: no branch of the line at {line.position:.6g} lies in {list(prior)}")
    chosen = next((c for c in candidates if c.l == 0), candidates[0])
    if len(candidates) > 1:
        logger.info("%d force branches inside the prior", len(candidates))
    return _finish(p, chosen.eta, candidates, 'zpl', phys,
                   {'zpl_position': line.position, 'zpl_height': line.height})


@dataclass
class ForwardModel:
    """Spectrum of a fixed configuration as a function of eta only."""
    system: SystemParams
    state: MechanicalState
    kind: str = 'emission'
    wavepacket: Optional[WavePacket] = None
    settings: Settings = field(default_factory=Settings)

    def __post_init__(self):
        if self.kind not in ('emission', 'scattering'):
            raise ConfigError(f"forward model kind must be emission or scattering, got {self.kind!r}")
        if self.kind == 'scattering' and self.wavepacket is None:
            raise ConfigError("scattering forward model needs a wavepacket")

    def spectrum(self, eta: float, grid: SpectralGrid) -> np.ndarray:
        p = self.system.with_eta(eta)
        if self.kind == 'emission':
            return emission_spectrum(p, self.state, grid, settings=self.settings,
                                     check_grid=False).values
        return scattering_spectra(p, self.state, self.wavepacket, grid, self.settings,
                                  check_grid=False)[0].values


def disambiguate(measured: Spectrum, candidates: Sequence[Candidate], model: ForwardModel,
                 phys: Optional[PhysicalParams] = None) -> ForceEstimate:
    """Rank candidate branches by relative L2 residual against the measurement.

    Heights carry the branch information, so spectra are compared on an
    absolute scale. Raises UnresolvedBranchError when the two best
    residuals lie within the tie tolerance.
    """
    if not candidates:
        raise InferenceError("no candidates to compare")
    settings = model.settings
    scored = [Candidate(c.l, c.eta, relative_l2(model.spectrum(c.eta, measured.grid), measured.values))
              for c in candidates]
    ranked = sorted(scored, key=lambda c: c.residual)
    best = ranked[0]
    if len(ranked) > 1:
        second = ranked[1]
        if second.residual - best.residual <= settings.tie_tolerance * second.residual:
            raise UnresolvedBranchError(
                f"branches l={best.l} and l={second.l} fit within {settings.tie_tolerance:.0%}",
                scored)
    logger.info("branch l=%d selected, residual %.3g", best.l, best.residual)
    return _finish(model.system, best.eta, scored, 'zpl', phys, {'selected_branch': best.l})


def _bracket(grid: SpectralGrid, reference: float) -> SpectralGrid:
    """Two-point grid of the measured samples around `reference`."""
    points = grid.points
    if not points[0] <= reference <= points[-1]:
        raise ConfigError(f"reference point {reference} outside the grid")
    index = min(int(np.searchsorted(points, reference, side='right')) - 1, points.size - 2)
    return SpectralGrid(float(points[index]), float(points[index + 1]), grid.step)


def estimate_force_height(measured: Spectrum, reference_point: float, model: ForwardModel,
                          prior: Sequence[float],
                          phys: Optional[PhysicalParams] = None) -> ForceEstimate:
    """Fit eta to the spectral height at one detuning.

    The squared height mismatch is scanned over the prior, each local
    minimum is polished with a bounded scalar search, and every minimizer
    within the candidate tolerance of the best is reported.
    """
    settings = model.settings
    lo, hi = _check_prior(prior)
    bracket = _bracket(measured.grid, reference_point)
    edges = bracket.points
    target = float(np.interp(reference_point, measured.deltas, measured.values))

    def model_height(eta: float) -> float:
        return float(np.interp(reference_point, edges, model.spectrum(eta, bracket)))

    def objective(eta: float) -> float:
        return (model_height(eta) - target) ** 2

    etas = np.linspace(lo, hi, settings.height_scan_points if hi > lo else 1)
    heights = np.array([model_height(eta) for eta in etas])
    scale = settings.residual_floor * max(abs(target), float(np.max(np.abs(heights))), 1e-300)
    if np.ptp(heights) <= scale:
        raise InferenceError(
            f"flat objective: spectral height at {reference_point} does not depend on eta")
    scan = (heights - target) ** 2

    minima = []
    for i in range(scan.size):
        left = scan[i - 1] if i > 0 else np.inf
        right = scan[i + 1] if i < scan.size - 1 else np.inf
        if scan[i] <= left and scan[i] <= right:
            result = optimize.minimize_scalar(
                objective, bounds=(etas[max(i - 1, 0)], etas[min(i + 1, scan.size - 1)]),
                method='bounded', options={'xatol': 1e-10})
            minima.append(Candidate(0, float(result.x), float(result.fun)))

    best_value = min(c.residual for c in minima)
    limit = (1 + settings.candidate_tolerance) * best_value + scale ** 2
    candidates = []
    for c in sorted(minima, key=lambda c: c.eta):
        if c.residual > limit:
            continue
        if candidates and abs(c.eta - candidates[-1].eta) <= 1e-8 * max(1.0, hi - lo):
            if c.residual < candidates[-1].residual:
                candidates[-1] = c
            continue
        candidates.append(c)
    best = min(candidates, key=lambda c: c.residual)

    step = max((hi - lo) * 1e-4, 1e-9)
    curvature = (objective(best.eta + step) - 2 * objective(best.eta)
                 + objective(best.eta - step)) / step ** 2
    if len(candidates) > 1:
        logger.warning("%d height-method minimizers fit equally well", len(candidates))
    return _finish(model.system, best.eta, candidates, 'height', phys, {
        'reference_point': reference_point,
        'measured_height': target,
        'curvature': curvature,
        'ambiguous': len(candidates) > 1,
    })


def default_reference_point(p: SystemParams, grid: SpectralGrid) -> float:
    """Half-maximum flank on the blue side of the unforced zero-phonon line."""
    reference = -p.g0 ** 2 / p.omega_M + p.gamma / 2
    if not grid.delta_min <= reference <= grid.delta_max:
        raise ConfigError(f"default reference point {reference:.6g} outside the grid")
    return reference
