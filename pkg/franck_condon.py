"""
Franck-Condon module.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Overlaps <m|D(d)|n> between number states and displaced number
states for a real, signed displacement d, tabulated stably up to a few
hundred phonons, and the adaptive choice of the phonon truncation.

The closed form used for n >= m is

    sqrt(m!/n!) exp(-d^2/2) (-d)^(n-m) L_m^(n-m)(d^2)

and for m > n the transposed expression with d in place of -d. The
associated Laguerre polynomial is run through its three-term recurrence
with periodic rescaling, and the factorial prefactor is kept in log space.
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Optional

import numpy as np
from scipy.special import gammaln

from errors import TruncationError
from settings import Settings

if TYPE_CHECKING:
    from mech_states import MechanicalState

logger = logging.getLogger(__name__)

_RESCALE_AT = 1e50


def _laguerre_log_table(k_max: int, alphas: np.ndarray, x: float):
    """Return log|L_k^a(x)| and sign for k < k_max and every a in `alphas`.

    Both arrays have shape (k_max, len(alphas)).
    """
    alphas = np.asarray(alphas, dtype=float)
    log_abs = np.empty((k_max, alphas.size))
    signs = np.empty((k_max, alphas.size))
    log_scale = np.zeros(alphas.size)

    prev = np.ones(alphas.size)
    cur = 1.0 + alphas - x

    def store(k, values):
        with np.errstate(divide='ignore'):
            log_abs[k] = np.log(np.abs(values)) + log_scale
        signs[k] = np.sign(values)

    store(0, prev)
    if k_max > 1:
        store(1, cur)
    for k in range(1, k_max - 1):
        nxt = ((2 * k + 1 + alphas - x) * cur - (k + alphas) * prev) / (k + 1)
        big = np.abs(nxt) > _RESCALE_AT
        if np.any(big):
            scale = np.where(big, np.abs(nxt), 1.0)
            nxt = nxt / scale
            cur = cur / scale
            log_scale += np.log(scale)
        prev, cur = cur, nxt
        store(k + 1, cur)
    return log_abs, signs


def _log_displacement_power(alpha, d: float):
    """alpha * log|d|, with the a = 0 term exactly zero even for d = 0."""
    alpha = np.asarray(alpha, dtype=float)
    if d == 0.0:
        return np.where(alpha == 0, 0.0, -np.inf)
    return alpha * np.log(abs(d))


def displaced_overlap(m: int, n: int, d: float) -> float:
    """Return <m|D(d)|n> for the real displacement `d`."""
    if m < 0 or n < 0:
        raise ValueError("phonon numbers must be non-negative")
    low, alpha = min(m, n), abs(n - m)
    x = d * d
    log_abs, signs = _laguerre_log_table(low + 1, np.array([alpha]), x)
    log_pref = (0.5 * (gammaln(low + 1) - gammaln(low + alpha + 1))
                - 0.5 * x + _log_displacement_power(alpha, d))
    sign = np.sign(-d) ** alpha if n >= m else np.sign(d) ** alpha
    if alpha == 0:
        sign = 1.0
    with np.errstate(invalid='ignore'):
        value = sign * signs[low, 0] * np.exp(log_pref + log_abs[low, 0])
    return float(np.nan_to_num(value))


@dataclass(frozen=True, eq=False)
class FranckCondonTable:
    """Truncated table of overlaps, entries[m, n] = <m|D(d)|n>.

    The entries array is read-only so one table can be shared between
    spectra, the oracle and inference.
    """
    displacement: float
    size: int
    entries: np.ndarray


def fc_table(d: float, size: int) -> FranckCondonTable:
    """Tabulate <m|D(d)|n> for 0 <= m, n < size."""
    if size < 1:
        raise ValueError("table size must be positive")
    d = float(d)
    x = d * d
    alphas = np.arange(size)
    log_abs, signs = _laguerre_log_table(size, alphas, x)

    k = np.arange(size)[:, None]
    a = alphas[None, :]
    valid = k + a < size
    log_pref = (0.5 * (gammaln(k + 1) - gammaln(k + a + 1))
                - 0.5 * x + _log_displacement_power(a, d))
    with np.errstate(invalid='ignore', over='ignore'):
        magnitude = np.where(valid, np.exp(log_pref + log_abs), 0.0)
    magnitude = np.nan_to_num(magnitude)
    # upper[k, a] = <k|D(d)|k+a>
    upper = magnitude * signs * np.sign(-d) ** a if d != 0 else magnitude * signs

    entries = np.zeros((size, size))
    rows, offs = np.nonzero(valid)
    entries[rows, rows + offs] = upper[rows, offs]
    lower = offs > 0
    parity = np.where(offs[lower] % 2 == 0, 1.0, -1.0)
    entries[rows[lower] + offs[lower], rows[lower]] = parity * upper[rows[lower], offs[lower]]
    entries.setflags(write=False)
    return FranckCondonTable(displacement=d, size=size, entries=entries)


def adaptive_truncation_for_levels(d: float, levels: Iterable[int], weight_tol: float,
                                   settings: Optional[Settings] = None) -> int:
    """Smallest size capturing 1 - weight_tol of every displaced level.

    For each number state |j> in `levels`, D(d)|j> is expanded in the
    number basis and the returned size keeps at least 1 - weight_tol of its
    norm. Never smaller than max(levels) + 1.
    """
    settings = settings or Settings()
    if not 0 < weight_tol < 1:
        raise ValueError("weight_tol must lie in (0, 1)")
    levels = np.unique(np.asarray(list(levels), dtype=int))
    if levels.size == 0:
        return 1
    top = int(levels.max())
    if top + 1 > settings.truncation_cap:
        raise TruncationError(
            f"state support {top + 1} exceeds truncation cap {settings.truncation_cap}")

    trial = max(16, 2 * (top + 1))
    while True:
        trial = min(trial, settings.truncation_cap)
        table = fc_table(d, trial)
        captured = np.cumsum(table.entries[:, levels] ** 2, axis=0)
        reached = captured >= 1.0 - weight_tol
        if np.all(reached[-1]):
            need = int(np.max(np.argmax(reached, axis=0))) + 1
            size = max(top + 1, need)
            logger.debug("truncation d=%.4g levels<=%d -> %d", d, top, size)
            return size
        if trial == settings.truncation_cap:
            raise TruncationError(
                f"displacement {d:.4g} needs more than {settings.truncation_cap} phonon levels")
        trial *= 2


def adaptive_truncation(d: float, states: 'MechanicalState', weight_tol: float,
                        settings: Optional[Settings] = None) -> int:
    """Truncation size for the displaced expansion of every state component."""
    indices, _ = states.components()
    return adaptive_truncation_for_levels(d, indices, weight_tol, settings)
