import logging

import pytest

from core_model import (PhysicalParams, SystemParams, derived_params, eigen_energy, eta_from_force,
                        force_from_eta, ground_state_shifts, min_measurable_force,
                        miscount_force_error, periodic_map, resonance_detuning)
from errors import ConfigError


def test_derived_params_reference(reference_system):
    dp = derived_params(reference_system)
    assert dp.beta == pytest.approx(0.8)
    assert dp.beta0 == pytest.approx(0.02)
    assert dp.beta1 == pytest.approx(0.82)
    assert dp.lam == pytest.approx(0.672)
    assert dp.zeta == pytest.approx(0.0004)
    assert dp.gamma == pytest.approx(0.02)


def test_derived_params_uncoupled(uncoupled_system):
    dp = derived_params(uncoupled_system)
    assert (dp.beta0, dp.beta1, dp.beta, dp.lam, dp.zeta) == (0, 0, 0, 0, 0)
    assert dp.gamma == pytest.approx(0.02)


def test_unforced_shift():
    dp = derived_params(SystemParams(g0=0.8, eta=0.0, gamma_c=0.01, gamma_d=0.01))
    assert dp.lam == pytest.approx(0.64)
    assert dp.zeta == 0


def test_eigen_energy():
    unforced = SystemParams(g0=0.8, eta=0.0, gamma_c=0.01, gamma_d=0.01, omega_c=50.0)
    assert eigen_energy(unforced, 0, 0) == 0
    assert eigen_energy(unforced, 1, 0) == pytest.approx(50.0 - 0.64)
    forced = SystemParams(g0=0.8, eta=0.02, gamma_c=0.01, gamma_d=0.01)
    assert eigen_energy(forced, 0, 0) == pytest.approx(-0.0004)
    assert eigen_energy(forced, 0, 3) == pytest.approx(3 - 0.0004)
    with pytest.raises(ConfigError):
        eigen_energy(forced, -1, 0)


def test_resonance_detuning(reference_system, uncoupled_system):
    assert resonance_detuning(reference_system, 2, 2) == pytest.approx(-0.672)
    assert resonance_detuning(uncoupled_system, 1, 0) == pytest.approx(1.0)
    strong = reference_system.with_eta(0.04)
    weak = reference_system.with_eta(0.0)
    shift = resonance_detuning(strong, 0, 0) - resonance_detuning(weak, 0, 0)
    assert shift == pytest.approx(-0.064)


def test_ground_state_shifts(reference_system):
    zero, one = ground_state_shifts(reference_system)
    assert zero == pytest.approx(0.0004)
    assert one == pytest.approx(0.82 ** 2)


def test_min_measurable_force_lab_scale(lab_scale):
    p = SystemParams(g0=1.0, eta=0.0, gamma_c=0.005, gamma_d=0.005)
    assert min_measurable_force(lab_scale, p) == pytest.approx(8.25e-14, rel=1e-2)
    doubled = SystemParams(g0=2.0, eta=0.0, gamma_c=0.005, gamma_d=0.005)
    assert min_measurable_force(lab_scale, doubled) == pytest.approx(
        min_measurable_force(lab_scale, p) / 2)


def test_min_measurable_force_needs_coupling(lab_scale, uncoupled_system):
    with pytest.raises(ConfigError):
        min_measurable_force(lab_scale, uncoupled_system)


def test_force_conversion_round_trip(lab_scale):
    force = force_from_eta(lab_scale, 0.02)
    assert force > 0
    assert eta_from_force(lab_scale, force) == pytest.approx(0.02)


def test_miscount_error_matches_branch_spacing(lab_scale, reference_system):
    spacing = 1 / (2 * reference_system.g0)
    assert miscount_force_error(lab_scale, reference_system, 1) == pytest.approx(
        force_from_eta(lab_scale, spacing), rel=1e-12)
    assert miscount_force_error(lab_scale, reference_system, -2) == pytest.approx(
        -2 * miscount_force_error(lab_scale, reference_system, 1))


def test_periodic_map():
    p = SystemParams(g0=0.8, eta=0.04, gamma_c=0.01, gamma_d=0.01)
    mapped = periodic_map(p, 0.5)
    assert (mapped.omega_M, mapped.g0, mapped.eta) == (0.5, 0.4, 0.02)
    assert mapped.gamma_c == p.gamma_c
    slow = periodic_map(p, 1e-9)
    assert slow.g0 == pytest.approx(0.4) and slow.omega_M == pytest.approx(1.0)


@pytest.mark.parametrize('omega_f', [1.0, 1.5, 0.0, -0.1])
def test_periodic_map_rejects_out_of_range(omega_f, reference_system):
    with pytest.raises(ConfigError):
        periodic_map(reference_system, omega_f)


def test_periodic_map_warns_outside_rwa(caplog):
    p = SystemParams(g0=0.8, eta=0.04, gamma_c=0.01, gamma_d=0.01)
    with caplog.at_level(logging.WARNING):
        periodic_map(p, 0.5)
    assert 'rotating-wave' in caplog.text


def test_system_validation():
    with pytest.raises(ConfigError):
        SystemParams(g0=0.8, eta=0.0, gamma_c=0.0, gamma_d=0.01)
    with pytest.raises(ConfigError):
        SystemParams(g0=-0.1, eta=0.0, gamma_c=0.01, gamma_d=0.01)
    with pytest.raises(ConfigError):
        SystemParams(g0=0.8, eta=0.0, gamma_c=0.01, gamma_d=-0.01)
    with pytest.raises(ConfigError):
        SystemParams(g0=0.8, eta=0.0, gamma_c=0.01, gamma_d=0.01, omega_M=0.0)


def test_unresolved_sidebands_warn(caplog):
    with caplog.at_level(logging.WARNING):
        SystemParams(g0=0.8, eta=0.0, gamma_c=0.6, gamma_d=0.6)
    assert 'resolved-sideband' in caplog.text


def test_from_dict():
    p = SystemParams.from_dict({'g0': 0.8, 'eta': -0.02, 'gamma_c': 0.01, 'gamma_d': 0})
    assert p.eta == -0.02 and p.omega_M == 1.0 and p.omega_c is None
    assert SystemParams.from_dict(p.to_dict()) == p
    with pytest.raises(ConfigError, match='unknown'):
        SystemParams.from_dict({'g0': 0.8, 'eta': 0, 'gamma_c': 0.01, 'gamma_d': 0, 'kappa': 1})
    with pytest.raises(ConfigError, match='missing'):
        SystemParams.from_dict({'g0': 0.8, 'eta': 0})


def test_physical_params_validation():
    with pytest.raises(ConfigError):
        PhysicalParams(omega_M_si=0.0, x0=1e-14)
    with pytest.raises(ConfigError):
        PhysicalParams.from_dict({'omega_M_si': 1e8})
