"""
Settings module for the optomechanical force spectrometer.

Author: Christopher Orta
Date: 11/24/2025

Purpose: Centralized numerical configuration. The `Settings` class stores
static tolerances, file locations and default grids used throughout the
toolkit, and provides methods to initialize and refine the dynamic values
that drive the brute-force amplitude integrator.
"""

from pathlib import Path


class Settings:
    """Container for toolkit settings and configuration.

    Static values (file paths, tolerances, truncation caps, output format)
    are initialized in the constructor. Dynamic values such as the oracle
    time step are set in `initialize_numerics()` so they can be reset
    between runs and refined by `refine_discretization()`.
    """
    def __init__(self):
        """Initialize static settings."""
        self.name: str = 'Optomechanical Force Spectrometer'
        self.output_dir = Path.cwd() / 'output'

        self.csv_header = 'delta_over_omegaM,S_times_omegaM'
        self.significant_digits = 12

        self.truncation_cap = 512
        self.fc_weight_tol = 1e-10
        self.state_weight_tol = 1e-8
        self.guard_levels = 10

        # emission grid in units of omega_M, step in units of gamma
        self.emission_range = (-4.0, 2.0)
        self.emission_step_fraction = 1 / 20
        # scattering grid: [delta0 - 4 eps, delta0 + 4 eps] joined with the sideband window
        self.scattering_eps_span = 4.0
        self.scattering_window = (-3.0, 1.0)
        self.coarse_grid_fraction = 1 / 10
        self.tail_correction = True
        self.edge_tail_fraction = 1e-3
        self.populated_sideband_weight = 1e-2
        self.scattering_tail_points = 4001

        self.resolved_sideband_limit = 1.0
        self.rwa_factor = 10.0

        self.rel_prominence = 0.01
        self.tie_tolerance = 0.01
        self.height_scan_points = 201
        self.candidate_tolerance = 0.1
        self.residual_floor = 1e-6

        self.exit_ok = 0
        self.exit_input_error = 2

        self.initialize_numerics()

    def initialize_numerics(self):
        """Initialize the oracle discretization to its base values.

        Called on construction and whenever a run needs the default
        discretization back after a refinement.
        """
        self.oracle_dt = 0.01
        self.oracle_max_phase_step = 0.02
        self.oracle_resync_steps = 256
        self.oracle_spacing_fraction = 1 / 4
        self.oracle_t_end_factor = 10.0
        self.oracle_packet_horizon_factor = 10.0
        self.oracle_min_window = 6.0
        self.oracle_window_margin = 1.5
        self.oracle_min_horizon_factor = 5.0
        self.oracle_norm_tol = 1e-6
        self.band_edge_correction = True
        self.refinement_scale = 0.5

    def refine_discretization(self):
        """Halve the oracle time step, its phase bound and the bath spacing."""
        self.oracle_dt *= self.refinement_scale
        self.oracle_max_phase_step *= self.refinement_scale
        self.oracle_spacing_fraction *= self.refinement_scale
