"""
Optomechanical Force Spectrometer - Main Module

Author: Christopher Orta
Date: 11/24/2025

Purpose: This module contains the ForceSpectrometer application class that
reads run configurations, computes emission and scattering spectra, runs
the brute-force oracle, reproduces the figure data sets and infers forces
from measured spectra. Every subcommand writes deterministic CSV/JSON
artifacts and reports problems through exit codes.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from core_model import min_measurable_force
from emission import emission_spectrum, integrate_spectrum
from errors import ConfigError, SpectrometerError
from figures import build_figure, figure_curves
from inference import (ForwardModel, default_reference_point, disambiguate, estimate_force_height,
                       estimate_force_zpl, find_peaks)
from oracle_dynamics import run_oracle
from run_config import load_run_config
from scattering import scattering_probabilities, scattering_spectra
from settings import Settings
from spectrum_io import dumps, read_spectrum, write_json, write_spectrum

logger = logging.getLogger(__name__)


class ForceSpectrometer:
    """
    Command-line application for the force spectrometer.

    Holds the settings shared by every subcommand, builds the argument
    parser and dispatches to one handler per subcommand. Handlers raise
    `SpectrometerError` subclasses; `run` turns them into exit codes.
    """
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or Settings()
        self.parser = self._build_parser()

    def _build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog='force_spectrometer', description=self.settings.name)
        parser.add_argument('-v', '--verbose', action='store_true', help='debug diagnostics on stderr')
        commands = parser.add_subparsers(dest='command', required=True)

        emit = commands.add_parser('emit', help='single-photon emission spectrum')
        emit.add_argument('config', type=Path)
        emit.add_argument('out', type=Path, nargs='?',
                          default=self.settings.output_dir / 'emission.csv')
        emit.add_argument('--channel', choices=('detected', 'undetected'), default='detected')
        emit.set_defaults(handler=self.emit)

        scatter = commands.add_parser('scatter', help='single-photon scattering spectra')
        scatter.add_argument('config', type=Path)
        scatter.add_argument('out', type=Path, nargs='?',
                             default=self.settings.output_dir / 'scattering.csv')
        scatter.set_defaults(handler=self.scatter)

        infer = commands.add_parser('infer', help='force estimate from a measured spectrum')
        infer.add_argument('spectrum', type=Path)
        infer.add_argument('config', type=Path)
        infer.add_argument('--mode', choices=('zpl', 'height'), default='zpl')
        infer.add_argument('--prior', required=True, help='admissible eta interval as lo,hi')
        infer.add_argument('--reference', type=float, default=None,
                           help='detuning of the height reading (height mode)')
        infer.add_argument('--process', choices=('emission', 'scattering'), default=None,
                           help='forward model; defaults to the kind stored with the spectrum')
        infer.add_argument('--out', type=Path, default=None)
        infer.set_defaults(handler=self.infer)

        oracle = commands.add_parser('oracle', help='brute-force check against the closed form')
        oracle.add_argument('config', type=Path)
        oracle.add_argument('out', type=Path, nargs='?',
                            default=self.settings.output_dir / 'oracle.json')
        oracle.add_argument('--process', choices=('emission', 'scattering'), default='emission')
        oracle.add_argument('--refine', type=int, default=0,
                            help='halve the default time step and bath spacing this many times')
        oracle.set_defaults(handler=self.oracle)

        figure = commands.add_parser('figure', help='reproduce a reference data set')
        figure.add_argument('--id', dest='fig_id', required=True)
        figure.add_argument('outdir', type=Path, nargs='?', default=self.settings.output_dir)
        figure.set_defaults(handler=self.figure)
        return parser

    def run(self, argv: Optional[List[str]] = None) -> int:
        """Parse `argv`, run the selected subcommand and return its exit code."""
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return self.settings.exit_input_error if e.code else self.settings.exit_ok
        self._configure_logging(args.verbose)
        try:
            args.handler(args)
        except SpectrometerError as e:
            logger.error("%s", e)
            return e.exit_code
        return self.settings.exit_ok

    @staticmethod
    def _configure_logging(verbose: bool):
        logging.basicConfig(stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')
        logging.getLogger().setLevel(logging.DEBUG if verbose else logging.INFO)

    def emit(self, args):
        """Write the emission spectrum of a configuration."""
        cfg = load_run_config(args.config, self.settings)
        sp = emission_spectrum(cfg.system, cfg.state, cfg.emission_grid(self.settings),
                               channel=args.channel, settings=self.settings)
        extra = cfg.snapshot()
        extra['integrated_probability'] = integrate_spectrum(sp, self.settings)
        if cfg.physical and cfg.system.g0 > 0:
            extra['min_measurable_force_newtons'] = min_measurable_force(cfg.physical, cfg.system)
        write_spectrum(sp, args.out, extra, self.settings)

    def scatter(self, args):
        """Write the detected and undetected scattering spectra.

        The output path names the pair: `<stem>_detected.csv` and
        `<stem>_undetected.csv`, each with its metadata JSON.
        """
        cfg = load_run_config(args.config, self.settings)
        wp = cfg.require_wavepacket()
        spectra = scattering_spectra(cfg.system, cfg.state, wp, cfg.scattering_grid(self.settings),
                                     self.settings)
        detected, undetected = scattering_probabilities(cfg.system, cfg.state, wp, self.settings)
        extra = cfg.snapshot()
        extra.update(probability_detected=detected, probability_undetected=undetected,
                     probability_sum=detected + undetected)
        if abs(detected + undetected - 1) > 1e-3:
            logger.warning("scattering probabilities sum to %.6g", detected + undetected)
        out = Path(args.out)
        for channel, sp in zip(('detected', 'undetected'), spectra):
            write_spectrum(sp, out.with_name(f'{out.stem}_{channel}.csv'), extra, self.settings)

    def infer(self, args):
        """Estimate eta (and the force, given physical scales) from a spectrum."""
        cfg = load_run_config(args.config, self.settings)
        measured = read_spectrum(args.spectrum, self.settings)
        prior = _parse_prior(args.prior)
        process = args.process
        if process is None:
            process = 'scattering' if str(measured.meta.get('kind', '')).startswith('scattering') else 'emission'
        model = ForwardModel(cfg.system, cfg.state, process,
                             cfg.require_wavepacket() if process == 'scattering' else None,
                             self.settings)

        if args.mode == 'zpl':
            estimate = estimate_force_zpl(find_peaks(measured, settings=self.settings),
                                          cfg.system, prior, cfg.physical)
            if len(estimate.candidates) > 1:
                estimate = disambiguate(measured, estimate.candidates, model, cfg.physical)
        else:
            reference = args.reference
            if reference is None:
                reference = default_reference_point(cfg.system, measured.grid)
            estimate = estimate_force_height(measured, reference, model, prior, cfg.physical)

        text = dumps(estimate.to_dict(cfg.physical), self.settings)
        sys.stdout.write(text)
        out = args.out or Path(args.spectrum).with_name(f'{Path(args.spectrum).stem}_estimate.json')
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
        logger.info("eta_hat = %.6g (%s)", estimate.eta_hat, estimate.method)

    def oracle(self, args):
        """Integrate the amplitude equations and report the agreement."""
        cfg = load_run_config(args.config, self.settings)
        wp = cfg.require_wavepacket() if args.process == 'scattering' else None
        self.settings.initialize_numerics()
        for _ in range(max(args.refine, 0)):
            self.settings.refine_discretization()
        report = run_oracle(cfg.system, cfg.state, args.process, wp, cfg.oracle, self.settings)
        write_json(args.out, report.to_dict(), self.settings)
        logger.info("oracle report written to %s", args.out)

    def figure(self, args):
        """Write one CSV per curve of a figure preset."""
        figure_curves(args.fig_id)
        outdir = Path(args.outdir)
        for curve, sp in build_figure(args.fig_id, self.settings):
            write_spectrum(sp, outdir / f'fig{args.fig_id}_{curve.label}.csv',
                           {'figure': args.fig_id, 'label': curve.label}, self.settings)


def _parse_prior(text: str):
    try:
        lo, hi = (float(part) for part in text.split(','))
    except ValueError:
        raise ConfigError(f"--prior must be 'lo,hi', got {text!r}")
    return lo, hi


def main(argv: Optional[List[str]] = None) -> int:
    return ForceSpectrometer().run(argv)


if __name__ == '__main__':
    sys.exit(main())
