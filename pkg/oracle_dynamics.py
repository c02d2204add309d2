"""
Oracle dynamics module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Brute-force check of the long-time spectra. The single-excitation
amplitude equations are integrated with explicitly discretized detected
and undetected baths, and the final bath occupations are read out as a
spectrum that never touches the closed-form amplitudes.

Bath amplitudes and the diagonal of the cavity block are carried in the
interaction picture, so within one fixed RK4 step every stage increment of the bath block is an outer
product of a phonon vector and a mode vector. Only the phonon block sees
the integrator; the bath block costs two matrix-vector products and one
rank-3 update per step.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from core_model import SystemParams, derived_params
from emission import Spectrum, SpectralGrid, emission_spectrum, line_weights, plan_truncation
from errors import ConfigError, DimensionMismatchError, NormDriftError, OracleRefusal
from franck_condon import fc_table
from mech_states import MechanicalState, displaced_projection
from scattering import WavePacket, scattering_spectra
from settings import Settings

logger = logging.getLogger(__name__)

OVERRIDE_KEYS = ('window', 'spacing', 'dt', 't_end')


@dataclass(frozen=True)
class BathDiscretization:
    """Uniform comb of bath modes on [-window, window], shared by both channels."""
    window: float
    n_modes: int
    coupling_scale: float = 1.0

    def __post_init__(self):
        if not self.window > 0:
            raise ConfigError(f"bath window must be positive, got {self.window}")
        if int(self.n_modes) != self.n_modes or self.n_modes < 2:
            raise ConfigError(f"bath needs at least two modes, got {self.n_modes}")

    @classmethod
    def from_spacing(cls, window: float, spacing: float,
                     coupling_scale: float = 1.0) -> 'BathDiscretization':
        if not spacing > 0:
            raise ConfigError(f"bath spacing must be positive, got {spacing}")
        return cls(window, int(round(2 * window / spacing)) + 1, coupling_scale)

    @property
    def spacing(self) -> float:
        return 2 * self.window / (self.n_modes - 1)

    @property
    def grid(self) -> SpectralGrid:
        return SpectralGrid(-self.window, self.window, self.spacing)

    @property
    def detunings(self) -> np.ndarray:
        return self.grid.points

    @property
    def recurrence_time(self) -> float:
        return 2 * math.pi / self.spacing

    def coupling(self, rate: float) -> float:
        """Per-mode hopping strength reproducing the decay `rate`."""
        return self.coupling_scale * math.sqrt(rate * self.spacing / (2 * math.pi))

    def to_dict(self) -> dict:
        return {'window': self.window, 'n_modes': self.n_modes, 'spacing': self.spacing,
                'coupling_scale': self.coupling_scale}


@dataclass
class AmplitudeSet:
    """Cavity amplitudes A[m] and bath amplitudes B[m, k], C[m, q] at `time`.

    A is in the Schroedinger picture over the one-photon displaced levels.
    B and C are stored without their free phase, so |B| and |C| are the
    physical moduli.
    """
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    time: float = 0.0
    max_drift: float = 0.0

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=complex)
        self.B = np.asarray(self.B, dtype=complex)
        self.C = np.asarray(self.C, dtype=complex)
        if self.B.shape != self.C.shape or self.B.shape[0] != self.A.size:
            raise DimensionMismatchError(
                f"amplitude shapes disagree: A {self.A.shape}, B {self.B.shape}, C {self.C.shape}")

    def norm(self) -> float:
        return float(np.vdot(self.A, self.A).real + np.vdot(self.B, self.B).real
                     + np.vdot(self.C, self.C).real)

    def cavity_population(self) -> float:
        return float(np.vdot(self.A, self.A).real)


def emission_initial(v: np.ndarray, bath: BathDiscretization) -> AmplitudeSet:
    """Photon in the cavity, mirror in the one-photon displaced expansion `v`."""
    v = np.asarray(v, dtype=complex)
    empty = np.zeros((v.size, bath.n_modes), dtype=complex)
    return AmplitudeSet(v, empty, empty.copy(), 0.0)


def scattering_initial(u: np.ndarray, wp: WavePacket, bath: BathDiscretization) -> AmplitudeSet:
    """Incoming Lorentzian packet, mirror in the zero-photon expansion `u`."""
    u = np.asarray(u, dtype=complex)
    packet = (math.sqrt(wp.epsilon * bath.spacing / math.pi)
              / (bath.detunings - wp.delta0 + 1j * wp.epsilon))
    captured = float(np.sum(np.abs(packet) ** 2))
    if captured < 1 - 1e-3:
        logger.warning("bath window holds only %.4f of the incoming packet", captured)
    return AmplitudeSet(np.zeros(u.size, dtype=complex), np.outer(u, packet),
                        np.zeros((u.size, bath.n_modes), dtype=complex), 0.0)


def band_edge_shift(p: SystemParams, t_beta: np.ndarray, bath: BathDiscretization) -> np.ndarray:
    """Level shift matrix a bath cut to [-W, W] induces on the cavity block."""
    dp = derived_params(p)
    size = t_beta.shape[0]
    levels = np.arange(size)
    nu = (levels[None, :] - levels[:, None]) * p.omega_M - dp.lam   # [m, n]
    w = bath.window
    # transitions sitting on the window edge only enter through vanishing overlaps
    shift = (dp.gamma * bath.coupling_scale ** 2 / (2 * math.pi)) * np.log(
        np.maximum(np.abs(w + nu), 1e-12) / np.maximum(np.abs(w - nu), 1e-12))
    weighted = np.where(t_beta != 0, t_beta * shift, 0.0)
    return 0.5 * (t_beta.T @ weighted + weighted.T @ t_beta)


def evolve(p: SystemParams, initial: AmplitudeSet, bath: BathDiscretization, t_end: float,
           dt: float, settings: Optional[Settings] = None,
           state_levels: Optional[int] = None) -> AmplitudeSet:
    """Integrate the amplitude equations from `initial.time` to `t_end`.

    Fixed-step RK4 with step at most `dt`. The step has to stay below
    oracle_max_phase_step / max(W, omega_M * state_levels), where
    `state_levels` is the truncation of the mirror state being evolved
    (all cavity levels when omitted). Raises OracleRefusal when it does not
    and NormDriftError when the total probability moves by more than the
    configured tolerance.
    """
    settings = settings or Settings()
    size = initial.A.size
    if initial.B.shape != (size, bath.n_modes):
        raise DimensionMismatchError(
            f"bath amplitudes {initial.B.shape} do not match {size} levels x {bath.n_modes} modes")
    state_levels = size if state_levels is None else state_levels
    max_dt = settings.oracle_max_phase_step / max(bath.window, state_levels * p.omega_M)
    if dt > max_dt * (1 + 1e-12):
        raise OracleRefusal(f"time step {dt:.4g} exceeds the phase-resolution bound {max_dt:.4g}")
    t0 = float(initial.time)
    if t_end < t0:
        raise OracleRefusal(f"t_end {t_end} lies before the initial time {t0}")
    norm0 = initial.norm()
    if not norm0 <= 1 + settings.oracle_norm_tol:
        raise OracleRefusal(f"initial state is not normalized (norm {norm0:.8f})")
    steps = max(1, math.ceil((t_end - t0) / dt - 1e-9))
    h = (t_end - t0) / steps

    dp = derived_params(p)
    t_beta = fc_table(dp.beta, size).entries
    levels = np.arange(size)
    energies = levels * p.omega_M - dp.lam
    # the diagonal is carried exactly; only the band-edge counter term is integrated
    if settings.band_edge_correction:
        residual = -band_edge_shift(p, t_beta, bath).astype(complex)
    else:
        residual = np.zeros((size, size), dtype=complex)

    xi = bath.coupling(p.gamma_c)
    ratio2 = p.gamma_d / p.gamma_c
    ratio = math.sqrt(ratio2)
    deltas = bath.detunings
    source = initial.B + ratio * initial.C
    has_source = bool(np.any(source))
    norm_const = float(np.vdot(initial.B, initial.B).real + np.vdot(initial.C, initial.C).real)

    def mode_vector(t):
        return xi * np.exp(-1j * deltas * t)

    def corr(tau):
        return xi ** 2 * np.sum(np.exp(-1j * deltas * tau))

    c_zero, c_half, c_full = corr(0.0), corr(h / 2), corr(h)
    half_turn = np.exp(-1j * deltas * h / 2)

    def derivative(t, amps, xw, sw):
        rotation = np.exp(-1j * energies * t)
        feed = np.exp(-1j * levels * p.omega_M * t) * (sw + (1 + ratio2) * xw)
        return np.conj(rotation) * (-1j * (residual @ (rotation * amps)) - 1j * (t_beta.T @ feed))

    def emitted(t, amps):
        return np.exp(1j * levels * p.omega_M * t) * (t_beta @ (np.exp(-1j * energies * t) * amps))

    A = np.exp(1j * energies * t0) * initial.A
    X = np.zeros_like(initial.B)
    zero = np.zeros(size, dtype=complex)
    w0 = mode_vector(t0)
    xw0 = zero
    sw0 = source @ w0 if has_source else zero
    max_drift = 0.0
    kick = -1j * h

    for step in range(steps):
        t = t0 + step * h
        w_mid = w0 * half_turn
        w_end = w_mid * half_turn
        if (step + 1) % settings.oracle_resync_steps == 0:
            w_mid, w_end = mode_vector(t + h / 2), mode_vector(t + h)
        xw_mid, xw_end = X @ w_mid, X @ w_end
        sw_mid = source @ w_mid if has_source else zero
        sw_end = source @ w_end if has_source else zero

        a1 = emitted(t, A)
        k1 = derivative(t, A, xw0, sw0)
        A2 = A + h / 2 * k1
        a2 = emitted(t + h / 2, A2)
        k2 = derivative(t + h / 2, A2, xw_mid + kick / 2 * a1 * c_half, sw_mid)
        A3 = A + h / 2 * k2
        a3 = emitted(t + h / 2, A3)
        k3 = derivative(t + h / 2, A3, xw_mid + kick / 2 * a2 * c_zero, sw_mid)
        A4 = A + h * k3
        a4 = emitted(t + h, A4)
        k4 = derivative(t + h, A4, xw_end + kick * a3 * c_half, sw_end)

        A = A + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        left = (kick / 6) * np.stack([a1, 2 * (a2 + a3), a4], axis=1)
        X += left @ np.conj(np.stack([w0, w_mid, w_end]))
        xw0 = xw_end + (kick / 6) * (a1 * c_full + 2 * (a2 + a3) * c_half + a4 * c_zero)
        sw0, w0 = sw_end, w_end

        norm = (np.vdot(A, A).real + norm_const + (1 + ratio2) * np.vdot(X, X).real
                + (2 * np.vdot(source, X).real if has_source else 0.0))
        drift = abs(norm - norm0)
        # NaN fails this comparison too
        if not drift <= settings.oracle_norm_tol:
            raise NormDriftError(
                f"norm drift {drift:.3g} at t={t + h:.4g} (step {step + 1}/{steps})")
        max_drift = max(max_drift, drift)

    logger.debug("evolved %d steps to t=%.4g, max norm drift %.3g", steps, t_end, max_drift)
    A = np.exp(-1j * energies * t_end) * A
    return AmplitudeSet(A, initial.B + X, initial.C + ratio * X, t_end,
                        max(initial.max_drift, max_drift))


def oracle_spectrum(final: AmplitudeSet, bath: BathDiscretization, p: SystemParams,
                    wp: Optional[WavePacket] = None, channel: str = 'detected',
                    settings: Optional[Settings] = None) -> Spectrum:
    """Bath occupation per unit detuning, summed over mirror levels.

    Refuses horizons outside the long-time window: shorter than a few decay
    (or packet) times, or past half the comb recurrence time.
    """
    settings = settings or Settings()
    horizon = settings.oracle_min_horizon_factor / p.gamma
    if wp is not None:
        horizon = max(horizon, settings.oracle_min_horizon_factor / (2 * wp.epsilon))
    if final.time < horizon * (1 - 1e-9):
        raise OracleRefusal(f"evolution time {final.time:.4g} shorter than {horizon:.4g}")
    if final.time > bath.recurrence_time / 2:
        raise OracleRefusal(
            f"evolution time {final.time:.4g} past half the recurrence time {bath.recurrence_time:.4g}")
    if channel not in ('detected', 'undetected'):
        raise ConfigError(f"unknown oracle channel {channel!r}")
    amplitudes = final.B if channel == 'detected' else final.C
    values = np.sum(np.abs(amplitudes) ** 2, axis=0) / bath.spacing
    meta = {'channel': channel, 'time': final.time, 'bath': bath.to_dict()}
    return Spectrum(bath.grid, values, 'oracle', meta)


def relative_l2(values: np.ndarray, reference: np.ndarray) -> float:
    """||values - reference|| / ||reference||."""
    scale = float(np.linalg.norm(reference))
    if scale == 0.0:
        raise ConfigError("reference spectrum is identically zero")
    return float(np.linalg.norm(np.asarray(values) - np.asarray(reference)) / scale)


@dataclass
class OracleReport:
    """Outcome of one oracle run against the closed-form spectrum."""
    process: str
    system: SystemParams
    state: MechanicalState
    wavepacket: Optional[WavePacket]
    bath: BathDiscretization
    dt: float
    t_end: float
    truncation: int
    norm_drift: float
    cavity_population: float
    relative_l2: float
    oracle: Spectrum = field(repr=False)
    analytic: Spectrum = field(repr=False)

    def to_dict(self) -> dict:
        return {
            'process': self.process,
            'system': self.system.to_dict(),
            'state': self.state.to_dict(),
            'wavepacket': self.wavepacket.to_dict() if self.wavepacket else None,
            'discretization': dict(self.bath.to_dict(), dt=self.dt, t_end=self.t_end,
                                   truncation=self.truncation),
            'norm_drift': self.norm_drift,
            'cavity_population': self.cavity_population,
            'relative_l2': self.relative_l2,
        }


def plan_discretization(p: SystemParams, s: MechanicalState, process: str,
                        wp: Optional[WavePacket] = None, overrides: Optional[dict] = None,
                        settings: Optional[Settings] = None):
    """Choose bath window, spacing, time step and horizon for an oracle run.

    Defaults always satisfy the validity constraints; user overrides that
    break them make the oracle refuse instead of running degraded.
    Returns (bath, dt, t_end, truncation, widest populated line).
    """
    settings = settings or Settings()
    overrides = dict(overrides or {})
    unknown = sorted(set(overrides) - set(OVERRIDE_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s) in 'oracle': {', '.join(unknown)}")
    if process not in ('emission', 'scattering'):
        raise ConfigError(f"unknown oracle process {process!r}")
    if process == 'scattering' and wp is None:
        raise ConfigError("scattering oracle needs a wavepacket")

    dp = derived_params(p)
    if process == 'emission':
        size = plan_truncation(s, -dp.beta1, (dp.beta,), settings)
        linewidth = p.gamma
    else:
        size = plan_truncation(s, -dp.beta0, (-dp.beta, dp.beta), settings)
        linewidth = min(p.gamma, wp.epsilon)

    positions, weights = line_weights(p, s, settings)
    populated = positions[weights >= settings.populated_sideband_weight]
    widest = float(np.max(np.abs(populated))) if populated.size else 0.0
    if wp is not None:
        widest = max(widest, abs(wp.delta0))
    window = max(settings.oracle_min_window, settings.oracle_window_margin * widest)
    if wp is not None:
        window = max(window, abs(wp.delta0) + settings.scattering_eps_span * wp.epsilon)
    window = overrides.get('window', window)
    spacing = overrides.get('spacing', settings.oracle_spacing_fraction * linewidth)

    t_end = settings.oracle_t_end_factor / p.gamma
    if wp is not None:
        t_end = max(t_end, settings.oracle_packet_horizon_factor / wp.epsilon)
    t_end = overrides.get('t_end', t_end)
    bound = settings.oracle_max_phase_step / max(window, s.truncation * p.omega_M)
    dt = overrides.get('dt', min(settings.oracle_dt, bound))

    for name, value in (('window', window), ('spacing', spacing), ('t_end', t_end), ('dt', dt)):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise ConfigError(f"oracle '{name}' must be a positive number")
    bath = BathDiscretization.from_spacing(window, spacing)
    if window < settings.oracle_window_margin * widest:
        raise OracleRefusal(
            f"window {window:.4g} below {settings.oracle_window_margin} x widest populated line {widest:.4g}")
    if bath.recurrence_time <= 2 * t_end:
        raise OracleRefusal(
            f"recurrence time {bath.recurrence_time:.4g} not beyond twice the horizon {t_end:.4g}")
    horizon = settings.oracle_min_horizon_factor / p.gamma
    if wp is not None:
        horizon = max(horizon, settings.oracle_min_horizon_factor / (2 * wp.epsilon))
    if t_end < horizon * (1 - 1e-9):
        raise OracleRefusal(f"horizon {t_end:.4g} shorter than the long-time bound {horizon:.4g}")
    if dt > bound * (1 + 1e-12):
        raise OracleRefusal(f"time step {dt:.4g} exceeds the phase-resolution bound {bound:.4g}")
    return bath, float(dt), float(t_end), size, widest


def run_oracle(p: SystemParams, s: MechanicalState, process: str = 'emission',
               wp: Optional[WavePacket] = None, overrides: Optional[dict] = None,
               settings: Optional[Settings] = None) -> OracleReport:
    """Plan, evolve, read out and compare with the closed-form spectrum.

    Thermal states run one evolution per number component and average the
    spectra with the thermal weights.
    """
    settings = settings or Settings()
    bath, dt, t_end, size, widest = plan_discretization(p, s, process, wp, overrides, settings)
    dp = derived_params(p)
    displacement = -dp.beta1 if process == 'emission' else -dp.beta0
    projected = displaced_projection(s, displacement, fc_table(displacement, size))
    vectors = [(projected, 1.0)] if s.is_pure else list(zip(projected.T, s.mixed_weights))
    logger.info("oracle %s: %d levels x %d modes, dt=%.4g, t_end=%.4g, %d run(s)",
                process, size, bath.n_modes, dt, t_end, len(vectors))

    values = np.zeros(bath.n_modes)
    drift = 0.0
    cavity = 0.0
    for vector, weight in vectors:
        if process == 'emission':
            initial = emission_initial(vector, bath)
        else:
            initial = scattering_initial(vector, wp, bath)
        final = evolve(p, initial, bath, t_end, dt, settings, state_levels=s.truncation)
        values += weight * oracle_spectrum(final, bath, p, wp, settings=settings).values
        drift = max(drift, final.max_drift)
        cavity += weight * final.cavity_population()

    oracle = Spectrum(bath.grid, values, 'oracle',
                      {'process': process, 'bath': bath.to_dict(), 'dt': dt, 't_end': t_end})
    if process == 'emission':
        analytic = emission_spectrum(p, s, bath.grid, settings=settings, check_grid=False)
    else:
        analytic = scattering_spectra(p, s, wp, bath.grid, settings, check_grid=False)[0]
    error = relative_l2(oracle.values, analytic.values)
    logger.info("oracle %s: relative L2 %.4g, norm drift %.3g", process, error, drift)
    return OracleReport(process, p, s, wp, bath, dt, t_end, size, drift, cavity, error,
                        oracle, analytic)
