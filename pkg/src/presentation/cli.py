# src/presentation/cli.py
"""
Command-line front end.

Every Settings field is also a flag (--rel-tol 1e-9); flags beat the
--config file, which beats ADINV_* environment variables. Results go to
files under --output-dir; diagnostics go to stderr through structlog.
Negative powers need the '=' form: --power=-4dBm.
"""

import argparse
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import structlog
from pydantic import ValidationError

from src import __version__
from src.application.services.estimation_service import (
    FitResult,
    ForwardModel,
    fit_global,
    fit_sqrtp_law,
    initial_b1_guess,
    residual_table,
)
from src.application.services.figure_service import (
    lz_curve_table,
    reproduce_sweep_figure,
    robustness_table,
    sweep_time_grid,
)
from src.application.services.spectrum_service import (
    average_spectrum,
    fit_bimodal,
    snapshot_line,
    synth_spectrum_series,
)
from src.core.config import Settings, load_settings
from src.core.exceptions import AdiabaticInversionError, ConfigurationError, ConvergenceError
from src.core.logging import configure_logging
from src.domain.entities.sweep_protocol import SweepDirection, SweepProtocol
from src.domain.services.dynamics import evolve
from src.domain.services.fidelity import inversion_fidelity_from_angle_fidelity
from src.domain.services.units import b1_from_nu1, nu1_from_b1
from src.domain.value_objects.density_matrix import DensityMatrix2
from src.infrastructure.exporters.csv_export import CsvHeader, write_csv
from src.infrastructure.exporters.report import write_report
from src.infrastructure.importers import ImporterFactory, SpectrumCSVImporter, SweepCSVImporter

log = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_ARGUMENTS = 2
CONFIG_DEST_PREFIX = 'cfg_'


def _settings_parent() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group('configuration')
    group.add_argument('--config', type=Path, help='flat KEY=value configuration file')
    for name, info in Settings.model_fields.items():
        flags = [f"--{name.replace('_', '-')}"]
        if '_' in name:
            flags.append(f"--{name}")
        group.add_argument(*flags, dest=CONFIG_DEST_PREFIX + name, default=argparse.SUPPRESS, metavar='VALUE',
                           help=f"default: {info.default}")
    return parent


def _add_drive(parser: argparse.ArgumentParser, required: bool = True) -> None:
    drive = parser.add_mutually_exclusive_group(required=required)
    drive.add_argument('--b1', type=float, help='rotating-frame drive amplitude (T)')
    drive.add_argument('--nu1', type=float, help='drive coupling (Hz); Rabi frequency is 2*nu1')


def build_parser() -> argparse.ArgumentParser:
    parent = _settings_parent()
    parser = argparse.ArgumentParser(prog='adinv', description='Adiabatic inversion of a donor electron spin')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', required=True)

    lz = commands.add_parser('lz-curve', parents=[parent], help='Landau-Zener inversion vs sweep time')
    _add_drive(lz)
    lz.add_argument('--tmin', type=float, default=0.1e-6, help='shortest sweep time (s)')
    lz.add_argument('--tmax', type=float, default=50e-6, help='longest sweep time (s)')
    lz.add_argument('--points', type=int, default=200)
    lz.add_argument('--output', type=Path, help='CSV path (default: <output-dir>/lz_curve.csv)')

    fig = commands.add_parser('reproduce-fig2', parents=[parent],
                              help='black/gray/red model curves and synthetic shots at one power')
    fig.add_argument('--power', required=True, help="source power, e.g. 5dBm or --power=-4dBm")
    fig.add_argument('--tmin', type=float, default=10e-9)
    fig.add_argument('--tmax', type=float, default=50e-6)
    fig.add_argument('--points', type=int, default=80)

    fit = commands.add_parser('fit-sweeps', parents=[parent], help='global fit of B1, F_up and T2')
    fit.add_argument('--data', type=Path, nargs='+', required=True)

    spectrum = commands.add_parser('fit-spectrum', parents=[parent], help='bimodal fit of an averaged spectrum')
    spectrum.add_argument('--data', type=Path, required=True)

    commands.add_parser('synth-spectra', parents=[parent], help='synthetic drifting ESR spectra')

    sweep = commands.add_parser('simulate-sweep', parents=[parent], help='single sweep through the master equation')
    _add_drive(sweep)
    sweep.add_argument('--sweep-time', type=float, required=True, help='sweep duration (s)')
    sweep.add_argument('--offset', type=float, default=0.0, help='sweep center minus resonance (Hz)')
    sweep.add_argument('--direction', choices=[d.value for d in SweepDirection], default='up')
    sweep.add_argument('--trajectory', action='store_true', help='write the full density-matrix trajectory')

    fidelity = commands.add_parser('convert-fidelity', parents=[parent],
                                   help='angle-control fidelity -> inversion fidelity')
    fidelity.add_argument('--fc', type=float, required=True)

    robust = commands.add_parser('robustness', parents=[parent],
                                 help='sweep vs resonant pi pulse under Gaussian line broadening')
    _add_drive(robust)
    robust.add_argument('--sweep-time', type=float, default=6e-6)
    robust.add_argument('--linewidths', default='0,1e6,2e6,5e6,10e6,20e6', help='comma-separated FWHM values (Hz)')
    return parser


def parse_power(text: str) -> float:
    cleaned = text.strip().lower()
    if cleaned.endswith('dbm'):
        cleaned = cleaned[:-3]
    try:
        value = float(cleaned)
    except ValueError:
        raise ConfigurationError(f"cannot parse power {text!r}; use e.g. 5dBm") from None
    if not math.isfinite(value):
        raise ConfigurationError(f"power must be finite, got {text!r}")
    return value


def _settings_from(args: argparse.Namespace) -> Settings:
    overrides = {key[len(CONFIG_DEST_PREFIX):]: value for key, value in vars(args).items()
                 if key.startswith(CONFIG_DEST_PREFIX)}
    return load_settings(args.config, overrides)


def _drive(args: argparse.Namespace, settings: Settings) -> Dict[str, float]:
    constants = settings.physical_constants()
    if args.b1 is not None:
        return {'b1': args.b1, 'nu1': nu1_from_b1(args.b1, constants)}
    return {'b1': b1_from_nu1(args.nu1, constants), 'nu1': args.nu1}


def _header(settings: Settings, command: str, metadata: Optional[Dict[str, str]] = None) -> CsvHeader:
    return CsvHeader(command=command, seed=settings.seed, config_hash=settings.fingerprint(),
                     metadata=metadata or {})


def cmd_lz_curve(args: argparse.Namespace, settings: Settings) -> int:
    drive = _drive(args, settings)
    table = lz_curve_table(drive['nu1'], settings.span, args.tmin, args.tmax, args.points)
    path = args.output or settings.output_dir / 'lz_curve.csv'
    write_csv(table, path, _header(settings, 'lz-curve', {'nu1_hz': f"{drive['nu1']:.10g}",
                                                          'span_hz': f"{settings.span:.10g}"}))
    return EXIT_OK


def cmd_reproduce_fig2(args: argparse.Namespace, settings: Settings) -> int:
    power = settings.power(parse_power(args.power))
    b1 = settings.b1_for_power(power.p_mw_dbm)
    nu1 = nu1_from_b1(b1, settings.physical_constants())
    figure = reproduce_sweep_figure(
        power=power,
        b1=b1,
        nu1=nu1,
        p=settings.spin_params(),
        span=settings.span,
        readout=settings.readout_model(),
        seed=settings.seed,
        times=sweep_time_grid(args.tmin, args.tmax, args.points),
        settings=settings.evolution_settings(),
    )
    label = power.label()
    header = _header(settings, f"reproduce-fig2 --power={label}", {'b1_t': f"{b1:.10g}"})
    write_csv(figure.curves, settings.output_dir / f"fig2_{label}_curves.csv", header)
    write_csv(figure.shots, settings.output_dir / f"fig2_{label}_shots.csv", header)
    write_report(figure.summary, settings.output_dir / f"fig2_{label}_summary.txt")
    return EXIT_OK


def cmd_fit_sweeps(args: argparse.Namespace, settings: Settings) -> int:
    factory = ImporterFactory(span=settings.span, attenuation_db=settings.attenuation_db)
    datasets = []
    for path in args.data:
        datasets.extend(factory.import_file(str(path), SweepCSVImporter.source_type).records)

    readout = settings.readout_model()
    constants = settings.physical_constants()
    init = FitResult(
        b1_per_power=[initial_b1_guess(d, readout, constants) for d in datasets],
        f_up=settings.f_up,
        t2=settings.t2,
        background=settings.background,
    )
    exit_code = EXIT_OK
    with ForwardModel(settings.evolution_settings(), constants, workers=settings.workers) as model:
        try:
            result = fit_global(datasets, init, settings.background, model, settings.max_iterations)
        except ConvergenceError as e:
            if e.result is None:
                raise
            log.error("fit_not_converged", error=str(e))
            result, exit_code = e.result, e.exit_code
        residuals = residual_table(datasets, result, model)

    report = {
        'converged': result.converged,
        'f_up': result.f_up,
        't2_s': result.t2,
        'background': result.background,
        'residual_norm': result.residual_norm,
        'b1_t': {d.power.label(): b for d, b in zip(datasets, result.b1_per_power)},
        'std_errors': result.std_errors,
        'at_bound': result.at_bound,
        'unidentifiable': result.unidentifiable,
        'iterations': len(result.cost_history),
    }
    if exit_code == EXIT_OK:
        law = fit_sqrtp_law(result.b1_per_power, [d.power for d in datasets])
        report['sqrt_power_law'] = {
            'slope_t_per_sqrt_mw': law.slope,
            'r_squared': law.r_squared,
            'max_relative_deviation': law.max_relative_deviation,
        }
    write_report(report, settings.output_dir / 'fit_report.txt')
    write_csv(residuals, settings.output_dir / 'fit_residuals.csv',
              _header(settings, 'fit-sweeps', {'data': ','.join(str(p) for p in args.data)}))
    return exit_code


def cmd_fit_spectrum(args: argparse.Namespace, settings: Settings) -> int:
    factory = ImporterFactory(span=settings.span, attenuation_db=settings.attenuation_db)
    frame = factory.import_file(str(args.data), SpectrumCSVImporter.source_type).records[0]
    averaged = average_spectrum(frame)
    fit = fit_bimodal(averaged['freq_hz'], averaged['r_up'], averaged['shots'],
                      max_iterations=settings.max_iterations * 10)
    report = {
        'splitting_hz': fit.model.splitting,
        'peak_fwhm_hz': fit.model.fwhm,
        'center_hz': fit.model.center,
        'baseline': fit.model.baseline,
        'amplitudes': [p.amplitude for p in fit.model.peaks],
        'envelope_fwhm_hz': fit.envelope_fwhm,
        'std_errors': fit.std_errors,
        'residual_sum': fit.residual_sum,
        'rank_deficient': fit.rank_deficient,
    }
    write_report(report, settings.output_dir / 'spectrum_fit.txt')
    write_csv(averaged, settings.output_dir / 'spectrum_average.csv',
              _header(settings, 'fit-spectrum', {'data': str(args.data)}))
    return EXIT_OK


def cmd_synth_spectra(args: argparse.Namespace, settings: Settings) -> int:
    series = synth_spectrum_series(
        m=snapshot_line(settings.line_splitting, settings.snapshot_fwhm),
        d=settings.drift_process(),
        n_spectra=settings.n_spectra,
        freq_grid=settings.freq_grid(),
        readout=settings.readout_model(),
        acquisition_minutes=settings.acquisition_minutes,
    )
    header = _header(settings, 'synth-spectra', series.assumptions)
    write_csv(series.frame, settings.output_dir / 'spectra.csv', header)
    write_csv(average_spectrum(series.frame), settings.output_dir / 'spectrum_average.csv', header)
    return EXIT_OK


def cmd_simulate_sweep(args: argparse.Namespace, settings: Settings) -> int:
    drive = _drive(args, settings)
    protocol = SweepProtocol(span=settings.span, duration=args.sweep_time, center_offset=args.offset,
                             direction=SweepDirection(args.direction))
    trajectory = evolve(DensityMatrix2.spin_down(), protocol, settings.spin_params(nu1=drive['nu1']),
                        settings.evolution_settings(store_trajectory=args.trajectory))
    p_up = min(1.0, max(0.0, trajectory.final.p_up))
    if args.trajectory:
        write_csv(trajectory.to_frame(), settings.output_dir / 'trajectory.csv',
                  _header(settings, 'simulate-sweep', {'nu1_hz': f"{drive['nu1']:.10g}",
                                                       'sweep_time_s': f"{args.sweep_time:.10g}"}))
    print(f"p_up = {p_up:.6f}")
    return EXIT_OK


def cmd_convert_fidelity(args: argparse.Namespace, settings: Settings) -> int:
    print(f"F_I = {inversion_fidelity_from_angle_fidelity(args.fc):.3f}")
    return EXIT_OK


def cmd_robustness(args: argparse.Namespace, settings: Settings) -> int:
    drive = _drive(args, settings)
    try:
        linewidths = [float(w) for w in args.linewidths.split(',') if w.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse linewidths {args.linewidths!r}") from None
    table = robustness_table(
        settings.spin_params(nu1=drive['nu1']),
        SweepProtocol(span=settings.span, duration=args.sweep_time),
        linewidths,
        settings.evolution_settings(),
    )
    write_csv(table, settings.output_dir / 'robustness.csv',
              _header(settings, 'robustness', {'nu1_hz': f"{drive['nu1']:.10g}",
                                                'sweep_time_s': f"{args.sweep_time:.10g}"}))
    return EXIT_OK


COMMANDS = {
    'lz-curve': cmd_lz_curve,
    'reproduce-fig2': cmd_reproduce_fig2,
    'fit-sweeps': cmd_fit_sweeps,
    'fit-spectrum': cmd_fit_spectrum,
    'synth-spectra': cmd_synth_spectra,
    'simulate-sweep': cmd_simulate_sweep,
    'convert-fidelity': cmd_convert_fidelity,
    'robustness': cmd_robustness,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging()
    try:
        settings = _settings_from(args)
        if settings.debug:
            configure_logging(debug=True)
        return COMMANDS[args.command](args, settings)
    except AdiabaticInversionError as e:
        log.error(type(e).__name__, error=str(e))
        return e.exit_code
    except ValidationError as e:
        log.error("invalid_parameters", error=str(e))
        return EXIT_ARGUMENTS


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))
