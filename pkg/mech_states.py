"""
Mechanical states module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Provide the `MechanicalState` class describing the mirror's
initial state (number, coherent or thermal), its truncated number-basis
expansion, and its projection onto a displaced number basis.
"""

import math
from dataclasses import dataclass
from numbers import Integral, Real
from typing import TYPE_CHECKING, Optional

import numpy as np
from scipy.special import gammaln

from errors import ConfigError, DimensionMismatchError, TruncationError
from settings import Settings

if TYPE_CHECKING:
    from franck_condon import FranckCondonTable

KINDS = ('number', 'coherent', 'thermal')


@dataclass(frozen=True, eq=False)
class MechanicalState:
    """Initial mirror state with its truncated expansion.

    Pure states (number, coherent) carry `pure_coeffs`; the thermal state
    carries `mixed_weights`. Exactly one of the two is present.
    """
    kind: str
    value: float
    truncation: int
    pure_coeffs: Optional[np.ndarray] = None
    mixed_weights: Optional[np.ndarray] = None

    @property
    def is_pure(self) -> bool:
        return self.pure_coeffs is not None

    @classmethod
    def number(cls, m0: int) -> 'MechanicalState':
        if isinstance(m0, bool) or not isinstance(m0, Integral) or m0 < 0:
            raise ConfigError(f"number state index must be a non-negative integer, got {m0!r}")
        m0 = int(m0)
        coeffs = np.zeros(m0 + 1)
        coeffs[m0] = 1.0
        coeffs.setflags(write=False)
        return cls('number', m0, m0 + 1, pure_coeffs=coeffs)

    @classmethod
    def coherent(cls, alpha: float, settings: Optional[Settings] = None) -> 'MechanicalState':
        settings = settings or Settings()
        if isinstance(alpha, bool) or not isinstance(alpha, Real) or not math.isfinite(alpha):
            raise ConfigError(f"coherent amplitude must be a real number, got {alpha!r}")
        alpha = float(alpha)
        if alpha == 0.0:
            coeffs = np.ones(1)
        else:
            n = np.arange(settings.truncation_cap)
            log_c = -0.5 * alpha ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
            coeffs = np.sign(alpha) ** n * np.exp(log_c)
            size = _cumulative_cut(coeffs ** 2, settings)
            coeffs = coeffs[:size]
        coeffs.setflags(write=False)
        return cls('coherent', alpha, coeffs.size, pure_coeffs=coeffs)

    @classmethod
    def thermal(cls, nbar: float, settings: Optional[Settings] = None) -> 'MechanicalState':
        settings = settings or Settings()
        if isinstance(nbar, bool) or not isinstance(nbar, Real) or not nbar >= 0:
            raise ConfigError(f"thermal occupation must be a non-negative number, got {nbar!r}")
        nbar = float(nbar)
        if nbar == 0.0:
            weights = np.ones(1)
        else:
            ratio = nbar / (nbar + 1)
            size = math.ceil(math.log(settings.state_weight_tol) / math.log(ratio))
            if size > settings.truncation_cap:
                raise TruncationError(
                    f"thermal state nbar={nbar} needs {size} levels, cap is {settings.truncation_cap}")
            weights = (1 - ratio) * ratio ** np.arange(size)
        weights.setflags(write=False)
        return cls('thermal', nbar, weights.size, mixed_weights=weights)

    @classmethod
    def from_dict(cls, data: dict, settings: Optional[Settings] = None) -> 'MechanicalState':
        """Build a state from {"kind": ..., "value": ...}."""
        if not isinstance(data, dict):
            raise ConfigError("'state' must be a JSON object")
        unknown = sorted(set(data) - {'kind', 'value'})
        if unknown:
            raise ConfigError(f"unknown key(s) in 'state': {', '.join(unknown)}")
        kind = data.get('kind')
        if kind not in KINDS:
            raise ConfigError(f"state kind must be one of {KINDS}, got {kind!r}")
        if 'value' not in data:
            raise ConfigError("missing key 'value' in 'state'")
        value = data['value']
        if kind == 'number':
            if isinstance(value, float) and value.is_integer():
                value = int(value)
            return cls.number(value)
        if kind == 'coherent':
            return cls.coherent(value, settings)
        return cls.thermal(value, settings)

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'value': self.value}

    def components(self):
        """Indices and probabilities of the number-state components."""
        probs = self.pure_coeffs ** 2 if self.is_pure else self.mixed_weights
        indices = np.nonzero(probs > 0)[0]
        return indices, probs[indices]


def _cumulative_cut(probs: np.ndarray, settings: Settings) -> int:
    reached = np.nonzero(np.cumsum(probs) >= 1.0 - settings.state_weight_tol)[0]
    if reached.size == 0:
        raise TruncationError(
            f"state needs more than {settings.truncation_cap} levels")
    return int(reached[0]) + 1


def fock_expansion(s: MechanicalState) -> np.ndarray:
    """Number-basis coefficients (pure) or occupation weights (thermal)."""
    if s.is_pure:
        return np.array(s.pure_coeffs)
    return np.array(s.mixed_weights)


def displaced_projection(s: MechanicalState, d: float, fc: 'FranckCondonTable') -> np.ndarray:
    """Expand the state in the basis displaced by `d`.

    A pure state gives one coefficient vector of length fc.size. A thermal
    state gives one column per number-state component; combine the columns
    with `mixed_weights`.
    """
    if not math.isclose(fc.displacement, d, rel_tol=1e-12, abs_tol=1e-15):
        raise DimensionMismatchError(
            f"table displacement {fc.displacement} does not match requested {d}")
    if fc.size < s.truncation:
        raise DimensionMismatchError(
            f"table size {fc.size} smaller than state truncation {s.truncation}")
    columns = fc.entries[:, :s.truncation]
    if s.is_pure:
        return columns @ s.pure_coeffs
    return np.array(columns)
