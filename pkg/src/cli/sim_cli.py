# -*- coding: utf-8 -*-
"""
Command-line interface for receptorlab.

Subcommands:
    sweep         BEP of the detectors along one parameter axis
    hist          Histograms of the four statistics against their Gaussian model
    crn-validate  Reaction-network decisions against direct threshold decisions
    bep           Analytic and Monte Carlo BEP at a single scenario

Usage:
    python -m src.cli.sim_cli SUBCOMMAND [OPTIONS]

Examples:
    # Interference sweep, analytic only
    python -m src.cli.sim_cli sweep --preset interference --trials 0 --out results/fig_interference.csv

    # Receptor-count sweep with 10^5 Monte Carlo bits per point
    python -m src.cli.sim_cli sweep --preset receptors --trials 100000 --workers 4 --json

    # Custom axis
    python -m src.cli.sim_cli sweep --axis bit-ratio --from 0.1 --to 0.99 --points 10

    # Histograms at the reference scenario
    python -m src.cli.sim_cli hist --trials 50000 --out results/hist.csv

    # CRN validation on 10^4 symbols
    python -m src.cli.sim_cli crn-validate --trials 10000 --out results/crn.json
"""

import argparse
import logging
import sys
from typing import List, Optional

import yaml

# Try to import tqdm for progress bars
try:
    from tqdm import tqdm
    TQDM_AVAILABLE = True
except ImportError:
    TQDM_AVAILABLE = False

from src.config.sim_config import (
    PRESETS,
    Axis,
    SimulationConfig,
    load_config_from_yaml,
    parse_detectors,
    save_config_to_yaml,
)
from src.core.crn.receptors import TransductionMode
from src.core.detection.detectors import analytic_bep, binning_for, build_decision_model, monte_carlo_bep_all
from src.core.detection.estimators import VarianceMethod
from src.core.errors import ConfigError, DomainError, NumericError, ReceptorLabError, SingularityError
from src.core.experiments.crn_validation import run_crn_validation
from src.core.experiments.histograms import emit_histograms
from src.core.experiments.sweep import SweepRunner
from src.reports.sweep_reporter import SweepReporter, write_json
from src.utils.logger import level_for_verbosity, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INTERRUPTED = 130


class ProgressBar:
    """Progress bar wrapper that works with or without tqdm."""

    def __init__(self, total: int, desc: str = "", disable: bool = False, unit: str = "it"):
        self.total = total
        self.desc = desc
        self.disable = disable
        self.current = 0
        self._pbar = None

        if TQDM_AVAILABLE and not disable:
            self._pbar = tqdm(total=total, desc=desc, unit=unit, file=sys.stderr)

    def update(self, current: int, message: str = ""):
        """Update progress."""
        if self._pbar:
            increment = current - self.current
            if increment > 0:
                self._pbar.update(increment)
            if message:
                self._pbar.set_description(message[:40])
        else:
            if not self.disable and self.total > 0:
                pct = current / self.total * 100
                print(f"\r{message[:50]:50} [{pct:5.1f}%]", end="", flush=True, file=sys.stderr)

        self.current = current

    def close(self):
        """Close the progress bar."""
        if self._pbar:
            self._pbar.close()
        elif not self.disable:
            print(file=sys.stderr)


class ProgressReporter:
    """Progress callback creating a bar per phase (a new total starts a new bar)."""

    def __init__(self, enabled: bool, unit: str = "it"):
        self.enabled = enabled
        self.unit = unit
        self._pbar: Optional[ProgressBar] = None

    def __call__(self, current: int, total: int, message: str):
        if not self.enabled:
            return
        if self._pbar is None or self._pbar.total != total:
            self.close()
            self._pbar = ProgressBar(total, message, unit=self.unit)
        self._pbar.update(current, message)

    def close(self):
        if self._pbar:
            self._pbar.close()
            self._pbar = None


# =============================================================================
# ARGUMENTS
# =============================================================================

def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    run_group = parser.add_argument_group('Run options')
    run_group.add_argument(
        '--seed',
        type=int,
        metavar='N',
        help='Root seed (default: from config, 0)'
    )
    run_group.add_argument(
        '--trials',
        type=int,
        metavar='N',
        help='Monte Carlo bits (sweep/bep), iterations (hist) or symbols (crn-validate)'
    )
    run_group.add_argument(
        '--detectors',
        metavar='LIST',
        help='Comma-separated detectors: DNBR,DRUT,DRBT,DRUBT (default: all)'
    )
    run_group.add_argument(
        '--workers',
        type=int,
        metavar='N',
        help='Parallel workers (0 = auto)'
    )
    run_group.add_argument(
        '--variance-method',
        choices=[m.value for m in VarianceMethod],
        help='Poisson averaging of the variances (default: closed)'
    )

    scenario_group = parser.add_argument_group('Scenario options')
    scenario_group.add_argument('--c0', type=float, metavar='C', help='Signal concentration for bit 0 (μm⁻³)')
    scenario_group.add_argument('--c1', type=float, metavar='C', help='Signal concentration for bit 1 (μm⁻³)')
    scenario_group.add_argument('--mean-c-in', type=float, metavar='C', help='Mean interferer concentration (μm⁻³)')
    scenario_group.add_argument('--affinity-ratio', type=float, metavar='ETA',
                                help='k_off(signal) / k_off(interferer)')
    scenario_group.add_argument('--receptors', type=int, metavar='N', help='Number of receptors')
    scenario_group.add_argument('--volume', type=float, metavar='V', help='Reception volume (μm³)')
    scenario_group.add_argument('--nu', type=float, help='Bin threshold factor (t1 = nu / k_off(interferer))')

    output_group = parser.add_argument_group('Output options')
    output_group.add_argument(
        '-o', '--out',
        metavar='PATH',
        help='Output file'
    )
    output_group.add_argument(
        '--json',
        action='store_true',
        help='Also write a JSON mirror'
    )
    output_group.add_argument(
        '--no-progress',
        action='store_true',
        help='Disable progress display'
    )

    log_group = parser.add_argument_group('Logging options')
    log_group.add_argument(
        '--log-file',
        metavar='FILE',
        help='Log file path'
    )
    log_group.add_argument(
        '-v', '--verbose',
        action='count',
        default=1,
        help='Increase verbosity (use -vv for debug output)'
    )
    log_group.add_argument(
        '-q', '--quiet',
        action='store_true',
        help='Suppress non-essential output'
    )

    config_group = parser.add_argument_group('Configuration options')
    config_group.add_argument(
        '-c', '--config',
        metavar='FILE',
        help='Load configuration from YAML file'
    )
    config_group.add_argument(
        '--save-config',
        metavar='FILE',
        help='Save effective configuration to YAML file'
    )


def create_argument_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog='receptorlab',
        description='Detection under molecular interference: BEP sweeps, histograms and CRN validation.',
        epilog='Example: receptorlab sweep --preset interference --trials 0',
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    sweep = subparsers.add_parser('sweep', help='Sweep one parameter axis')
    sweep_group = sweep.add_argument_group('Sweep options')
    sweep_group.add_argument(
        '--preset',
        choices=sorted(PRESETS),
        help='Named sweep (scenario and grid)'
    )
    sweep_group.add_argument(
        '--axis',
        choices=[a.value for a in Axis],
        help='Swept parameter'
    )
    sweep_group.add_argument('--from', dest='start', type=float, metavar='X', help='First axis value')
    sweep_group.add_argument('--to', dest='stop', type=float, metavar='X', help='Last axis value')
    sweep_group.add_argument('--points', type=int, metavar='N', help='Number of grid points')
    sweep_group.add_argument('--log-spaced', action='store_true', help='Geometric grid spacing')
    sweep_group.add_argument('--txt', action='store_true', help='Also write a TXT summary')
    _add_common_arguments(sweep)

    hist = subparsers.add_parser('hist', help='Histograms of the decision statistics')
    hist_group = hist.add_argument_group('Histogram options')
    hist_group.add_argument('--bit', type=int, choices=[0, 1], help='Transmitted bit (default: 0)')
    hist_group.add_argument('--bins', type=int, metavar='N', help='Number of bins (default: 60)')
    _add_common_arguments(hist)

    crn = subparsers.add_parser('crn-validate', help='Validate the reaction-network detectors')
    crn_group = crn.add_argument_group('CRN options')
    crn_group.add_argument(
        '--transduction',
        choices=[m.value for m in TransductionMode],
        help='Bound-duration split used for decisions (default: ideal)'
    )
    crn_group.add_argument('--kappa', type=float, help='Proofreading factor (default: 0.6)')
    crn_group.add_argument('--ode-check', type=int, metavar='N', help='Symbols integrated numerically')
    _add_common_arguments(crn)

    bep = subparsers.add_parser('bep', help='BEP at a single scenario')
    _add_common_arguments(bep)

    return parser


def build_config_from_args(args: argparse.Namespace) -> SimulationConfig:
    """
    Build configuration from parsed arguments.

    Raises:
        ConfigError: If the configuration file or an override is invalid
        FileNotFoundError: If the configuration file does not exist
    """
    config = load_config_from_yaml(args.config) if args.config else SimulationConfig()

    if getattr(args, 'preset', None):
        config.apply_preset(args.preset)

    # Scenario overrides
    overrides = {
        'c_bit0': args.c0,
        'c_bit1': args.c1,
        'mean_c_in': args.mean_c_in,
        'affinity_ratio': args.affinity_ratio,
        'n_receptors': args.receptors,
        'volume': args.volume,
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config.scenario, key, value)

    if args.nu is not None:
        config.detection.nu = args.nu
    if args.variance_method:
        config.detection.variance_method = VarianceMethod(args.variance_method)
    if args.detectors:
        config.detection.detectors = [k.value for k in parse_detectors(args.detectors)]
    if args.seed is not None:
        config.monte_carlo.seed = args.seed
    if args.workers is not None:
        config.performance.max_workers = args.workers
    config.performance.show_progress = config.performance.show_progress and not args.no_progress

    if args.command == 'sweep':
        if args.trials is not None:
            config.monte_carlo.trials = args.trials
        if args.axis:
            config.sweep.axis = Axis.from_name(args.axis)
        if args.start is not None:
            config.sweep.start = args.start
            config.sweep.values = []
        if args.stop is not None:
            config.sweep.stop = args.stop
            config.sweep.values = []
        if args.points is not None:
            config.sweep.points = args.points
            config.sweep.values = []
        if args.log_spaced:
            config.sweep.log_spaced = True
        if args.out:
            config.output.output_path = args.out
        config.output.write_json = config.output.write_json or args.json
    elif args.command == 'hist':
        if args.trials is not None:
            config.histogram.iterations = args.trials
        if args.bit is not None:
            config.histogram.bit = args.bit
        if args.bins is not None:
            config.histogram.bins = args.bins
    elif args.command == 'crn-validate':
        if args.trials is not None:
            config.crn.symbols = args.trials
        if args.transduction:
            config.crn.transduction = TransductionMode(args.transduction)
        if args.kappa is not None:
            config.crn.kappa = args.kappa
        if args.ode_check is not None:
            config.crn.ode_check_symbols = args.ode_check
    elif args.command == 'bep':
        if args.trials is not None:
            config.monte_carlo.trials = args.trials

    # Logging
    config.logging.verbose = 0 if args.quiet else args.verbose
    config.logging.level = level_for_verbosity(config.logging.verbose)
    if args.log_file:
        config.logging.log_file = args.log_file
        config.logging.log_to_file = True

    return config


# =============================================================================
# COMMANDS
# =============================================================================

def _print_header(title: str, config: SimulationConfig):
    if config.logging.verbose == 0:
        return
    scenario = config.scenario
    print("\n" + "=" * 60)
    print(f"  receptorlab - {title}")
    print("=" * 60)
    print(f"\nc0={scenario.c_bit0:g}  c1={scenario.c_bit1:g}  mean c_in={scenario.mean_c_in:g}  "
          f"eta={scenario.affinity_ratio:g}  N={scenario.n_receptors}")
    print(f"Detectors: {', '.join(config.detection.detectors)}")
    print()


def run_sweep_command(config: SimulationConfig, args: argparse.Namespace) -> int:
    spec = config.sweep_spec()
    _print_header(f"Sweep ({spec.axis.value}, {len(spec.values)} points)", config)
    progress = ProgressReporter(config.performance.show_progress and config.logging.verbose > 0, unit="pt")
    runner = SweepRunner(
        spec,
        nu=config.detection.nu,
        method=config.detection.variance_method,
        max_workers=config.performance.workers,
        block_size=config.monte_carlo.block_size,
    )
    try:
        result = runner.run(progress)
    finally:
        progress.close()

    reporter = SweepReporter.for_path(result, spec.output_path, nu=config.detection.nu,
                                      method=config.detection.variance_method)
    files = {'CSV': reporter.generate_csv()}
    if config.output.write_json:
        files['JSON'] = reporter.generate_json()
    if args.txt:
        files['TXT'] = reporter.generate_txt()

    if config.logging.verbose > 0:
        kinds = spec.detectors
        print(f"  {'value':>12}" + "".join(f"{k.value:>12}" for k in kinds))
        for row in result.rows:
            print(f"  {row.axis_value:>12.4g}" + "".join(f"{row.detectors[k].analytic_bep:>12.3e}" for k in kinds))
        print()
        for label, path in files.items():
            print(f"  {label}: {path}")
    return EXIT_OK


def run_hist_command(config: SimulationConfig, args: argparse.Namespace) -> int:
    _print_header(f"Histograms (bit {config.histogram.bit}, {config.histogram.iterations:,} symbols)", config)
    report = emit_histograms(
        config.build_scenario(),
        bit=config.histogram.bit,
        iterations=config.histogram.iterations,
        seed=config.monte_carlo.seed,
        kinds=config.detection.kinds,
        bins=config.histogram.bins,
        nu=config.detection.nu,
        method=config.detection.variance_method,
        output_path=args.out or "results/histograms.csv",
    )
    if config.logging.verbose > 0:
        print(f"  {'statistic':<10}{'mean z':>10}{'var z':>10}{'KS':>10}")
        for kind, histogram in report.histograms.items():
            print(f"  {kind.value:<10}{histogram.mean_z:>+10.2f}{histogram.variance_z:>+10.2f}"
                  f"{histogram.ks_fitted:>10.4f}")
        print()
        for label, path in report.files.items():
            print(f"  {label.upper()}: {path}")
    return EXIT_OK


def run_crn_command(config: SimulationConfig, args: argparse.Namespace) -> int:
    crn = config.crn
    _print_header(f"CRN validation ({crn.symbols:,} symbols, {crn.transduction.value} transduction)", config)
    progress = ProgressReporter(config.performance.show_progress and config.logging.verbose > 0, unit="sym")
    try:
        report = run_crn_validation(
            config.build_scenario(),
            symbols=crn.symbols,
            seed=config.monte_carlo.seed,
            kinds=config.detection.kinds,
            nu=config.detection.nu,
            method=config.detection.variance_method,
            kappa=crn.kappa,
            transduction=crn.transduction,
            s_rate=crn.s_rate,
            s_amplification=crn.s_amplification,
            threshold_amplification=crn.threshold_amplification,
            comparator_rate=crn.comparator_rate,
            ode_check_symbols=crn.ode_check_symbols,
            t_end=crn.t_end,
            rtol=crn.ode_rtol,
            atol=crn.ode_atol,
            progress_callback=progress,
        )
    finally:
        progress.close()

    if args.out:
        report.files['json'] = write_json(report.to_dict(), args.out)
    if config.logging.verbose > 0:
        print(f"  {'detector':<10}{'agreement':>12}{'max ODE err':>14}{'BEP direct':>12}{'BEP CRN':>12}")
        for kind, agreement in report.detectors.items():
            print(f"  {kind.value:<10}{agreement.agreement_rate:>12.4%}{agreement.max_steady_state_error:>14.2e}"
                  f"{agreement.direct_errors / agreement.symbols:>12.3e}"
                  f"{agreement.network_errors / agreement.symbols:>12.3e}")
        print(f"\n  Proofreading D1 relative error: {report.kpr_relative_error:.3%} (kappa={report.kappa:g})")
        for label, path in report.files.items():
            print(f"  {label.upper()}: {path}")
    return EXIT_OK


def run_bep_command(config: SimulationConfig, args: argparse.Namespace) -> int:
    scenario = config.build_scenario()
    kinds = config.detection.kinds
    nu, method = config.detection.nu, config.detection.variance_method
    _print_header("Single-point BEP", config)

    scheme = binning_for(scenario, kinds, nu)
    models = {kind: build_decision_model(scenario, kind, scheme, nu, method) for kind in kinds}
    summary = {'scenario': scenario.to_dict(), 'nu': nu, 'variance_method': method.value, 'detectors': {}}
    for kind, model in models.items():
        summary['detectors'][kind.value] = {
            'threshold': model.threshold,
            'bit0': model.moments_bit0.to_dict(),
            'bit1': model.moments_bit1.to_dict(),
            'analytic_bep': analytic_bep(model),
        }

    trials = config.monte_carlo.trials
    if trials > 0:
        progress = ProgressReporter(config.performance.show_progress and config.logging.verbose > 0, unit="blk")
        try:
            results = monte_carlo_bep_all(
                scenario, kinds, trials, seed=config.monte_carlo.seed, nu=nu, method=method,
                workers=config.performance.workers, block_size=config.monte_carlo.block_size,
                models=models, progress_callback=progress,
            )
        finally:
            progress.close()
        for kind, result in results.items():
            summary['detectors'][kind.value].update(result.to_dict())

    if config.logging.verbose > 0:
        print(f"  {'detector':<10}{'threshold':>14}{'analytic':>12}{'monte carlo':>14}{'ci95':>11}")
        for kind in kinds:
            entry = summary['detectors'][kind.value]
            mc = f"{entry['mc_bep']:>14.3e}{entry['mc_ci95']:>11.1e}" if trials > 0 else f"{'-':>14}{'-':>11}"
            print(f"  {kind.value:<10}{entry['threshold']:>14.6g}{entry['analytic_bep']:>12.3e}{mc}")
    if args.out or args.json:
        path = write_json(summary, args.out or "results/bep.json")
        if config.logging.verbose > 0:
            print(f"\n  JSON: {path}")
    return EXIT_OK


COMMANDS = {
    'sweep': run_sweep_command,
    'hist': run_hist_command,
    'crn-validate': run_crn_command,
    'bep': run_bep_command,
}


def main(args: Optional[List[str]] = None) -> int:
    """
    Main entry point for the CLI.

    Args:
        args: Command-line arguments (defaults to sys.argv)

    Returns:
        Exit code: 0 success, 2 configuration error, 3 numeric error, 130 interrupted
    """
    parser = create_argument_parser()
    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as exc:
        return int(exc.code or 0)

    # Build configuration
    try:
        config = build_config_from_args(parsed_args)
        errors = config.validate()
        if errors:
            raise ConfigError("; ".join(errors), errors)
    except (ConfigError, DomainError, yaml.YAMLError, FileNotFoundError) as e:
        for line in getattr(e, 'errors', None) or [str(e)]:
            print(f"Error: {line}", file=sys.stderr)
        return EXIT_CONFIG

    # Save config if requested
    if parsed_args.save_config:
        try:
            save_config_to_yaml(config, parsed_args.save_config)
            print(f"Configuration saved to: {parsed_args.save_config}")
        except OSError as e:
            print(f"Error saving configuration: {e}", file=sys.stderr)
            return EXIT_FAILURE

    setup_logging(config.logging.level, config.logging.log_to_file, config.logging.log_file)

    try:
        return COMMANDS[parsed_args.command](config, parsed_args)

    except KeyboardInterrupt:
        print("\n\nOperation cancelled by user.", file=sys.stderr)
        return EXIT_INTERRUPTED

    except (ConfigError, DomainError) as e:
        print(f"\nError: {e}", file=sys.stderr)
        return EXIT_CONFIG

    except (NumericError, SingularityError) as e:
        logger.debug("Numeric failure", exc_info=True)
        print(f"\nNumeric error: {e}", file=sys.stderr)
        return EXIT_NUMERIC

    except ReceptorLabError as e:
        logger.exception("Simulation error")
        print(f"\nError: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
