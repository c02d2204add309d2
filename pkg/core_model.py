"""
Core model module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Model parameters of the force-loaded optomechanical cavity, the
quantities derived from them, eigen-energies, resonance conditions, SI
force conversion and the periodic-force mapping. Every frequency is kept
in units of the reference mechanical frequency with hbar = 1; SI units
appear only through `PhysicalParams`.
"""

import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from numbers import Real
from typing import Optional

from scipy import constants

from errors import ConfigError
from settings import Settings

logger = logging.getLogger(__name__)


def _number(name: str, value) -> float:
    """Coerce a configuration value to float, rejecting bools and strings."""
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ConfigError(f"'{name}' must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"'{name}' must be finite, got {value!r}")
    return value


def _check_keys(section: str, data, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"'{section}' must be a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(unknown)}")


@dataclass(frozen=True)
class SystemParams:
    """Cavity, mechanics, coupling, force and decay parameters.

    All rates are in units of the reference mechanical frequency. `eta` is
    the force coupling f*x0/hbar and may be negative. `omega_c` is optional
    metadata; spectra live on detuning axes relative to the cavity.
    """
    g0: float
    eta: float
    gamma_c: float
    gamma_d: float
    omega_M: float = 1.0
    omega_c: Optional[float] = None

    def __post_init__(self):
        if not self.omega_M > 0:
            raise ConfigError(f"omega_M must be positive, got {self.omega_M}")
        if not self.gamma_c > 0:
            raise ConfigError(f"gamma_c must be positive, got {self.gamma_c}")
        if self.gamma_d < 0:
            raise ConfigError(f"gamma_d must be non-negative, got {self.gamma_d}")
        if self.g0 < 0:
            raise ConfigError(f"g0 must be non-negative, got {self.g0}")
        if (self.gamma_c + self.gamma_d) / self.omega_M >= Settings().resolved_sideband_limit:
            logger.warning(
                "outside the resolved-sideband regime: (gamma_c+gamma_d)/omega_M = %.4g",
                (self.gamma_c + self.gamma_d) / self.omega_M)

    @classmethod
    def from_dict(cls, data: dict) -> 'SystemParams':
        """Build parameters from a config section keyed by field name."""
        names = [f.name for f in fields(cls)]
        _check_keys('system', data, names)
        missing = [n for n in ('g0', 'eta', 'gamma_c', 'gamma_d') if n not in data]
        if missing:
            raise ConfigError(f"missing key(s) in 'system': {', '.join(missing)}")
        values = {}
        for name, value in data.items():
            if name == 'omega_c' and value is None:
                values[name] = None
            else:
                values[name] = _number(name, value)
        return cls(**values)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_eta(self, eta: float) -> 'SystemParams':
        """Same system under a different force coupling."""
        return replace(self, eta=float(eta))

    @property
    def gamma(self) -> float:
        return self.gamma_c + self.gamma_d


@dataclass(frozen=True)
class DerivedParams:
    """Displacements, shifts and total decay derived from `SystemParams`."""
    beta0: float
    beta1: float
    beta: float
    lam: float
    zeta: float
    gamma: float


@dataclass(frozen=True)
class PhysicalParams:
    """SI scale of the mechanics: frequency, zero-point spread and hbar."""
    omega_M_si: float
    x0: float
    hbar: float = constants.hbar

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"{f.name} must be strictly positive")

    @classmethod
    def from_dict(cls, data: dict) -> 'PhysicalParams':
        _check_keys('physical', data, [f.name for f in fields(cls)])
        missing = [n for n in ('omega_M_si', 'x0') if n not in data]
        if missing:
            raise ConfigError(f"missing key(s) in 'physical': {', '.join(missing)}")
        return cls(**{k: _number(k, v) for k, v in data.items()})

    def to_dict(self) -> dict:
        return asdict(self)


def derived_params(p: SystemParams) -> DerivedParams:
    """Return beta0, beta1, beta, lambda, zeta and gamma for `p`."""
    beta0 = p.eta / p.omega_M
    beta1 = (p.g0 + p.eta) / p.omega_M
    return DerivedParams(
        beta0=beta0,
        beta1=beta1,
        beta=p.g0 / p.omega_M,
        lam=(p.g0 ** 2 + 2 * p.g0 * p.eta) / p.omega_M,
        zeta=p.eta ** 2 / p.omega_M,
        gamma=p.gamma_c + p.gamma_d,
    )


def ground_state_shifts(p: SystemParams) -> tuple:
    """Mirror ground-state energy shifts in the zero- and one-photon sectors."""
    return p.eta ** 2 / p.omega_M, (p.g0 + p.eta) ** 2 / p.omega_M


def eigen_energy(p: SystemParams, m: int, j: int) -> float:
    """Energy of m photons with the mirror in displaced level j.

    Without an absolute cavity frequency the energy is measured in the frame
    rotating at the cavity frequency.
    """
    if m < 0 or j < 0:
        raise ConfigError("photon and phonon numbers must be non-negative")
    omega_c = p.omega_c if p.omega_c is not None else 0.0
    return m * omega_c + j * p.omega_M - (p.g0 * m + p.eta) ** 2 / p.omega_M


def resonance_detuning(p: SystemParams, n: int, m: int) -> float:
    """Detuning of the n -> m phonon transition line."""
    if n < 0 or m < 0:
        raise ConfigError("phonon numbers must be non-negative")
    return (n - m) * p.omega_M - (p.g0 ** 2 + 2 * p.g0 * p.eta) / p.omega_M


def force_from_eta(phys: PhysicalParams, eta: float) -> float:
    """Force in newtons for a coupling `eta` given in reference units."""
    return phys.hbar * eta * phys.omega_M_si / phys.x0


def eta_from_force(phys: PhysicalParams, force: float) -> float:
    return force * phys.x0 / (phys.hbar * phys.omega_M_si)


def min_measurable_force(phys: PhysicalParams, p: SystemParams) -> float:
    """Smallest force whose zero-phonon-line shift exceeds the linewidth (N)."""
    if p.g0 <= 0:
        raise ConfigError("minimum measurable force needs g0 > 0")
    return phys.hbar * p.gamma * p.omega_M * phys.omega_M_si / (2 * p.g0 * phys.x0)


def miscount_force_error(phys: PhysicalParams, p: SystemParams, l: int) -> float:
    """Force error from reading the line l sidebands away from the ZPL (N)."""
    if p.g0 <= 0:
        raise ConfigError("miscount error needs g0 > 0")
    return l * phys.hbar * p.omega_M ** 2 * phys.omega_M_si / (2 * p.g0 * phys.x0)


def periodic_map(p: SystemParams, omega_f: float,
                 settings: Optional[Settings] = None) -> SystemParams:
    """Map a force oscillating at `omega_f` onto an equivalent static model.

    Within the rotating-wave approximation the modulated system behaves as a
    constant-force system with omega_M - omega_f, g0/2 and eta/2.
    """
    settings = settings or Settings()
    if not omega_f > 0:
        raise ConfigError(f"omega_f must be positive, got {omega_f}")
    if omega_f >= p.omega_M:
        raise ConfigError(
            f"omega_f must stay below omega_M ({omega_f} >= {p.omega_M})")
    scale = abs(p.g0 + p.eta) / 2
    if p.omega_M + omega_f < settings.rwa_factor * scale:
        logger.warning(
            "rotating-wave approximation doubtful: omega_M+omega_f = %.4g, (g0+eta)/2 = %.4g",
            p.omega_M + omega_f, scale)
    return replace(p, omega_M=p.omega_M - omega_f, g0=p.g0 / 2, eta=p.eta / 2)
