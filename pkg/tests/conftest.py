"""Shared fixtures: the reference parameter sets used across the suite."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from core_model import PhysicalParams, SystemParams  # noqa: E402
from mech_states import MechanicalState  # noqa: E402
from settings import Settings  # noqa: E402


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def reference_system():
    """g0 = 0.8, eta = 0.02, gamma_c = gamma_d = 0.01 (units of omega_M)."""
    return SystemParams(g0=0.8, eta=0.02, gamma_c=0.01, gamma_d=0.01)


@pytest.fixture
def uncoupled_system():
    return SystemParams(g0=0.0, eta=0.0, gamma_c=0.01, gamma_d=0.01)


@pytest.fixture
def ground():
    return MechanicalState.number(0)


@pytest.fixture
def lab_scale():
    return PhysicalParams(omega_M_si=2e8 * 3.141592653589793, x0=0.4e-14)
