import logging
import math

import numpy as np
import pytest

from core_model import SystemParams, derived_params, periodic_map, resonance_detuning
from emission import (SpectralGrid, Spectrum, emission_amplitude, emission_spectrum,
                      integrate_spectrum, line_weights)
from errors import ConfigError, DimensionMismatchError
from franck_condon import fc_table
from inference import find_peaks
from mech_states import MechanicalState
from settings import Settings

WIDE = SpectralGrid(-12.0, 10.0, 0.0005)


def test_grid_points():
    grid = SpectralGrid(-1.0, 1.0, 0.25)
    assert grid.size == 9
    np.testing.assert_allclose(grid.points, np.linspace(-1, 1, 9))
    assert SpectralGrid.from_dict(grid.to_dict()) == grid


@pytest.mark.parametrize('data', [
    {'delta_min': 1.0, 'delta_max': -1.0, 'step': 0.1},
    {'delta_min': -1.0, 'delta_max': 1.0, 'step': 0.0},
    {'delta_min': -1.0, 'delta_max': 1.0},
    {'delta_min': -1.0, 'delta_max': 1.0, 'step': 0.1, 'offset': 2},
    {'delta_min': 'a', 'delta_max': 1.0, 'step': 0.1},
])
def test_grid_rejects(data):
    with pytest.raises(ConfigError):
        SpectralGrid.from_dict(data)


def test_default_emission_grid(reference_system):
    grid = SpectralGrid.for_emission(reference_system)
    assert (grid.delta_min, grid.delta_max) == (-4.0, 2.0)
    assert grid.step == pytest.approx(0.001)


def test_coarse_grid_warns(caplog, reference_system, ground):
    with caplog.at_level(logging.WARNING):
        sp = emission_spectrum(reference_system, ground, SpectralGrid(-1.0, 0.0, 0.01))
    assert 'coarser' in caplog.text
    assert sp.values.size == 101


def test_spectrum_validates_values():
    grid = SpectralGrid(0.0, 1.0, 0.5)
    with pytest.raises(ConfigError):
        Spectrum(grid, [1.0, -1.0, 0.0], 'emission')
    with pytest.raises(ConfigError):
        Spectrum(grid, [1.0, 1.0], 'emission')
    with pytest.raises(ConfigError):
        Spectrum(grid, [1.0, np.nan, 0.0], 'emission')
    with pytest.raises(ConfigError):
        Spectrum(grid, [1.0, 1.0, 1.0], 'absorption')


def test_uncoupled_amplitude_is_lorentzian(uncoupled_system):
    p = uncoupled_system
    dp = derived_params(p)
    deltas = np.array([-0.3, 0.0, 0.05])
    amplitude = emission_amplitude(p, dp, fc_table(dp.beta, 3), fc_table(-dp.beta1, 3), 0, 0, deltas)
    expected = math.sqrt(p.gamma_c / (2 * math.pi)) / (deltas + 0.5j * p.gamma)
    np.testing.assert_allclose(amplitude, expected)
    assert emission_amplitude(p, dp, fc_table(dp.beta, 3), fc_table(-dp.beta1, 3), 0, 1, 0.0) == 0


def test_amplitude_rejects_wrong_tables(reference_system):
    dp = derived_params(reference_system)
    with pytest.raises(DimensionMismatchError):
        emission_amplitude(reference_system, dp, fc_table(dp.beta1, 5), fc_table(-dp.beta1, 5), 0, 0, 0.0)
    with pytest.raises(DimensionMismatchError):
        emission_amplitude(reference_system, dp, fc_table(dp.beta, 5), fc_table(-dp.beta1, 5), 0, 7, 0.0)


def test_amplitude_matches_spectrum(reference_system, ground):
    p = reference_system
    dp = derived_params(p)
    grid = SpectralGrid(-1.0, 0.5, 0.001)
    size = 60
    tb, tb1 = fc_table(dp.beta, size), fc_table(-dp.beta1, size)
    direct = sum(np.abs(emission_amplitude(p, dp, tb, tb1, 0, m, grid.points)) ** 2 for m in range(size))
    np.testing.assert_allclose(emission_spectrum(p, ground, grid).values, direct, rtol=1e-6, atol=1e-12)


def test_uncoupled_peak_value(uncoupled_system, ground):
    sp = emission_spectrum(uncoupled_system, ground, SpectralGrid(-1.0, 1.0, 0.001))
    assert sp.values.max() == pytest.approx(0.01 / (2 * math.pi * 0.01 ** 2), rel=1e-6)
    assert sp.deltas[np.argmax(sp.values)] == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize('gamma_c, gamma_d', [(0.01, 0.01), (0.015, 0.005), (0.01, 0.0)])
def test_normalization(gamma_c, gamma_d, ground):
    p = SystemParams(g0=0.8, eta=0.02, gamma_c=gamma_c, gamma_d=gamma_d)
    sp = emission_spectrum(p, ground, WIDE)
    assert sp.meta['uncovered_weight'] < 1e-6
    assert integrate_spectrum(sp) == pytest.approx(gamma_c / (gamma_c + gamma_d), abs=1e-3)


@pytest.mark.slow
def test_normalization_thermal():
    p = SystemParams(g0=0.8, eta=0.02, gamma_c=0.01, gamma_d=0.01)
    sp = emission_spectrum(p, MechanicalState.thermal(1.0), WIDE)
    assert integrate_spectrum(sp) == pytest.approx(0.5, abs=1e-3)


def test_undetected_channel_scales(reference_system, ground):
    p = SystemParams(g0=0.8, eta=0.02, gamma_c=0.015, gamma_d=0.005)
    grid = SpectralGrid(-1.0, 0.5, 0.001)
    detected = emission_spectrum(p, ground, grid)
    undetected = emission_spectrum(p, ground, grid, channel='undetected')
    assert undetected.kind == 'emission-undetected'
    np.testing.assert_allclose(undetected.values, detected.values / 3)
    with pytest.raises(ConfigError):
        emission_spectrum(p, ground, grid, channel='both')


def test_zero_spectrum_integrates_to_zero():
    grid = SpectralGrid(0.0, 1.0, 0.1)
    assert integrate_spectrum(Spectrum(grid, np.zeros(grid.size), 'measured')) == 0.0


def test_default_grid_reports_uncovered_weight(caplog, reference_system, ground):
    sp = emission_spectrum(reference_system, ground)
    assert sp.meta['uncovered_weight'] > 1e-3
    with caplog.at_level(logging.WARNING):
        integrate_spectrum(sp)
    assert 'misses' in caplog.text


def test_line_weights_sum_to_one(reference_system):
    positions, weights = line_weights(reference_system, MechanicalState.coherent(1.0))
    assert np.sum(weights) == pytest.approx(1.0, abs=1e-7)
    zpl = np.argmin(np.abs(positions + 0.672))
    assert positions[zpl] == pytest.approx(-0.672)


def test_force_shifts_every_line(ground):
    etas = (0.0, 0.01, 0.02, 0.04)
    zpl = []
    for eta in etas:
        p = SystemParams(g0=0.8, eta=eta, gamma_c=0.01, gamma_d=0.01)
        sp = emission_spectrum(p, ground)
        peaks = find_peaks(sp).peaks
        assert peaks
        for peak in find_peaks(sp, rel_prominence=0.1).peaks:
            j = round(peak.position + derived_params(p).lam)
            assert peak.position == pytest.approx(resonance_detuning(p, max(j, 0), max(-j, 0)),
                                                  abs=sp.grid.step)
        zpl.append(min(peaks, key=lambda pk: abs(pk.position - resonance_detuning(p, 0, 0))).position)
    shifts = [zpl[0] - z for z in zpl[1:]]
    np.testing.assert_allclose(shifts, [0.016, 0.032, 0.064], atol=0.001)


def test_peak_positions_do_not_depend_on_initial_state(reference_system):
    grid = SpectralGrid.for_emission(reference_system)
    states = (MechanicalState.number(0), MechanicalState.coherent(1.0), MechanicalState.thermal(1.0))
    populated = []
    for state in states:
        positions, weights = line_weights(reference_system, state)
        inside = (weights >= 0.02) & (positions > grid.delta_min) & (positions < grid.delta_max)
        populated.append({round(float(x), 9) for x in positions[inside]})
    shared = sorted(set.intersection(*populated))
    assert len(shared) >= 3

    heights = []
    for state in states:
        peaks = find_peaks(emission_spectrum(reference_system, state, grid)).peaks
        row = []
        for line in shared:
            match = min(peaks, key=lambda pk: abs(pk.position - line))
            assert match.position == pytest.approx(line, abs=grid.step)
            row.append(match.height)
        heights.append(row)
    heights = np.array(heights)
    assert np.max(np.abs(heights[1:] / heights[0] - 1)) > 0.05


def test_periodic_force_uses_constant_force_path(ground):
    base = SystemParams(g0=0.8, eta=0.04, gamma_c=0.01, gamma_d=0.01)
    primed = SystemParams(g0=0.4, eta=0.02, gamma_c=0.01, gamma_d=0.01, omega_M=0.5)
    grid = SpectralGrid(-2.0, 1.0, 0.001)
    mapped = emission_spectrum(periodic_map(base, 0.5), ground, grid)
    direct = emission_spectrum(primed, ground, grid)
    np.testing.assert_array_equal(mapped.values, direct.values)


def test_integral_is_stable_under_grid_refinement(reference_system, ground):
    coarse = emission_spectrum(reference_system, ground, SpectralGrid(-12.0, 10.0, 0.001))
    fine = emission_spectrum(reference_system, ground, WIDE)
    assert integrate_spectrum(fine) == pytest.approx(integrate_spectrum(coarse), abs=1e-4)


def test_heights_scale_with_gamma_c_at_fixed_linewidth(ground):
    grid = SpectralGrid(-3.0, 1.0, 0.001)
    strong = emission_spectrum(SystemParams(0.8, 0.02, 0.015, 0.005), ground, grid)
    weak = emission_spectrum(SystemParams(0.8, 0.02, 0.005, 0.015), ground, grid)
    np.testing.assert_allclose(strong.values, 3 * weak.values, rtol=1e-10)


def test_thermal_spectrum_averages_number_states(reference_system):
    settings = Settings()
    settings.state_weight_tol = 0.01
    state = MechanicalState.thermal(0.2, settings)
    assert state.truncation == 3
    grid = SpectralGrid(-3.0, 1.0, 0.001)
    averaged = sum(weight * emission_spectrum(reference_system, MechanicalState.number(m0), grid,
                                              settings=settings).values
                   for m0, weight in enumerate(state.mixed_weights))
    thermal = emission_spectrum(reference_system, state, grid, settings=settings)
    np.testing.assert_allclose(thermal.values, averaged, rtol=1e-5, atol=1e-9)
