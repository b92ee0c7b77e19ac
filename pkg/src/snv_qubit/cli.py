"""CLI entry point for snv-sim."""

import argparse
import logging
import math
import os
import sys

import numpy as np

from snv_qubit import __version__
from snv_qubit.config import RunConfig
from snv_qubit.constants import MHZ, PER_US, US
from snv_qubit.errors import ConfigError, NumericalError
from snv_qubit.experiments import ALL_EXPERIMENTS
from snv_qubit.levels import branching_ratio, branching_ratio_estimate, branching_sweep, transition_table
from snv_qubit.manifest import RunManifest, timestamp
from snv_qubit.models import (
    MODELS,
    build_model,
    fit,
    fit_decay,
    fit_lorentzian_pair,
    fit_rabi_master,
    fit_t1,
)
from snv_qubit.protocols import (
    ramsey_closed_form_scan,
    run_cpt,
    run_decoupling,
    run_init_trace,
    run_odmr,
    run_phase_sweep,
    run_rabi,
    run_ramsey,
    run_t1,
)
from snv_qubit.raman import ac_stark, fidelity_map
from snv_qubit.report import generate_report, write_report
from snv_qubit.results import read_columns, write_table
from snv_qubit.sequences import pulse_rates

logger = logging.getLogger(__name__)

EXIT_CONFIG = 1
EXIT_NUMERICAL = 2


def _grid(start, stop, points):
    if points < 1:
        raise ConfigError(f"grid needs at least one point, got {points}")
    return np.linspace(start, stop, points)


def _stepped(start, stop, step):
    if step <= 0:
        raise ConfigError(f"grid step must be positive, got {step}")
    return np.linspace(start, stop, int(round((stop - start) / step)) + 1)


def _write(scan, out, name):
    scan.write_csv(os.path.join(out, name))
    print(f"  Wrote: {name}")
    return name


def _report(result, out, stem, title):
    names = write_report(result, out, stem, title)
    for name in names:
        print(f"  Wrote: {name}")
    return names


def cmd_levels(args, config, out):
    """Transition table, branching ratio and optional strain sweep."""
    dev = config.device()
    strain = config.strain()
    s = config.section("levels")
    place = config.section("strain")["place_in"]
    try:
        table = transition_table(dev, strain, place, s["pin_excited_spin"])
        eta = branching_ratio(dev, strain, place, s["pin_excited_spin"])
    except ValueError as e:
        raise ConfigError(str(e)) from None
    table.write_csv(os.path.join(out, "transitions.csv"))
    print("  Wrote: transitions.csv")
    print(f"Branching ratio eta = {eta:.6g} (closed form {branching_ratio_estimate(dev):.6g})")
    files = ["transitions.csv"]
    if args.sweep:
        rows = branching_sweep(dev, _grid(s["c_min"], s["c_max"], s["c_points"]), place, s["pin_excited_spin"])
        write_table(os.path.join(out, "branching_sweep.csv"), ["c_GHz", "eta"], rows)
        print("  Wrote: branching_sweep.csv")
        files.append("branching_sweep.csv")
    return files


def cmd_cpt(args, config, out):
    s = config.section("cpt")
    scan = run_cpt(
        _grid(s["scan_min"], s["scan_max"], s["scan_points"]),
        config.drive("cpt"),
        config.device(),
        config.noise("cpt"),
        config.nuclear(),
        ground_dephasing=None if s["ground_dephasing"] is None else s["ground_dephasing"] * PER_US,
        ground_relaxation=None if s["ground_relaxation"] is None else s["ground_relaxation"] * PER_US,
        threads=config.threads,
    )
    return [_write(scan, out, "cpt.csv")]


def cmd_odmr(args, config, out):
    s = config.section("odmr")
    scan = run_odmr(
        _grid(s["scan_min"], s["scan_max"], s["scan_points"]),
        config.drive("odmr"),
        config.device(),
        config.noise("odmr"),
        config.nuclear(),
        config.readout(),
        seed=config.seed,
        shots=config.shots,
        threads=config.threads,
    )
    files = [_write(scan, out, "odmr.csv")]
    sigma = scan.stderr if np.all(scan.stderr > 0) else None
    result = fit_lorentzian_pair(scan.axes[0], scan.values, sigma)
    files += _report(result, out, "odmr", "ODMR Lorentzian pair")
    value, error = result.derived["splitting"]
    print(f"Hyperfine splitting = {value:.4f} +- {error:.4f} MHz")
    return files


def cmd_rabi(args, config, out):
    s = config.section("rabi")
    dev = config.device()
    noise = config.noise("rabi")
    times = _grid(0.0, s["t_max"], s["t_points"])
    scan = run_rabi(
        times,
        config.drive("rabi"),
        dev,
        noise,
        config.readout(),
        seed=config.seed,
        shots=config.shots,
        threads=config.threads,
    )
    files = [_write(scan, out, "rabi.csv")]
    if args.fit:
        sigma = scan.stderr if np.all(scan.stderr > 0) else None
        result = fit_rabi_master(
            times,
            scan.values,
            dev,
            noise,
            sigma=sigma,
            seed=config.seed,
            shots=config.shots,
            init_fidelity=config.readout().init_fidelity,
            threads=config.threads,
        )
        files += _report(result, out, "rabi", "Rabi (master-equation model)")
        print(f"Omega/2pi = {result['omega']:.4f} +- {result.error('omega'):.4f} MHz")
    return files


def cmd_phase_sweep(args, config, out):
    s = config.section("phase_sweep")
    scan = run_phase_sweep(
        _grid(0.0, 2.0 * math.pi, s["phi_points"]),
        config.drive("phase_sweep"),
        config.device(),
        config.noise("phase_sweep"),
        config.readout(),
        seed=config.seed,
        shots=config.shots,
        threads=config.threads,
    )
    return [_write(scan, out, "phase_sweep.csv")]


def cmd_ramsey(args, config, out):
    s = config.section("ramsey")
    dev = config.device()
    drive = config.drive("ramsey")
    noise = config.noise("ramsey")
    taus = _stepped(0.0, s["tau_max"], s["tau_step"])
    deltas = _stepped(s["delta_min"], s["delta_max"], s["delta_step"])
    if args.closed_form:
        rates = pulse_rates(drive, dev, noise)
        shift = s["ac_stark_mhz"]
        if shift is None:
            shift = ac_stark(drive, dev, omega=rates.omega).shift / MHZ
        scan = ramsey_closed_form_scan(
            taus,
            deltas,
            s["serrodyne_mhz"],
            shift,
            dev.t2_star,
            math.pi / (2.0 * rates.omega) / US,
        )
        return [_write(scan, out, "ramsey_closed_form.csv")]
    scan = run_ramsey(
        taus,
        deltas,
        drive,
        s["serrodyne_mhz"],
        dev,
        noise,
        config.readout(),
        seed=config.seed,
        shots=config.shots,
        threads=config.threads,
        ac_stark_mhz=s["ac_stark_mhz"],
    )
    print(f"Delta_AC/2pi = {scan.metadata['ac_stark_MHz']:.4f} MHz")
    return [_write(scan, out, "ramsey.csv")]


def _decoupling(kind, section, config, out):
    s = config.section(section)
    result = run_decoupling(
        kind,
        _grid(s["tau_min"], s["tau_max"], s["tau_points"]),
        np.linspace(0.0, 2.0 * math.pi, s["phi_points"], endpoint=False),
        config.drive(section),
        config.device(),
        config.noise(section),
        config.readout(),
        seed=config.seed,
        shots=config.shots,
        threads=config.threads,
    )
    files = [
        _write(result.scan, out, f"{section}.csv"),
        _write(result.visibility, out, f"{section}_visibility.csv"),
    ]
    vis = result.visibility
    sigma = vis.stderr if np.all(vis.stderr > 0) else None
    decay = fit_decay(vis.axes[0], vis.values, sigma)
    files += _report(decay, out, section, f"{kind} visibility decay")
    print(f"T2 = {decay['t2']:.4g} +- {decay.error('t2'):.2g} us, n = {decay['n']:.3g}")
    return files


def cmd_echo(args, config, out):
    return _decoupling("hahn", "echo", config, out)


def cmd_cpmg(args, config, out):
    return _decoupling("cpmg", "cpmg", config, out)


def cmd_t1(args, config, out):
    s = config.section("t1")
    scan = run_t1(
        _grid(0.0, s["delay_max"], s["delay_points"]),
        config.device(),
        config.noise("t1"),
        config.readout(),
        seed=config.seed,
    )
    files = [_write(scan, out, "t1.csv")]
    if np.ptp(scan.values) > 0:
        result = fit_t1(scan.axes[0], scan.values)
        files += _report(result, out, "t1", "T1 recovery")
        print(f"T1 = {result['t1']:.4g} +- {result.error('t1'):.2g} ms")
    else:
        print("No relaxation in the configured window; T1 fit skipped")
    return files


def cmd_init_rate(args, config, out):
    s = config.section("init_rate")
    result = run_init_trace(
        np.geomspace(s["p_min"], s["p_max"], s["p_points"]),
        config.device(),
        _grid(0.0, s["t_max"], s["t_points"]),
        config.readout(),
        seed=config.seed,
        background=s["background"],
    )
    files = [
        _write(result.traces, out, "init_traces.csv"),
        _write(result.rates, out, "init_rates.csv"),
    ]
    if result.fit is not None:
        files += _report(result.fit, out, "init_rate", "Initialization rate saturation")
        print(f"p_sat = {result.fit['p_sat']:.4g} nW, eta = {result.fit['eta']:.4g}")
    return files


def cmd_fidelity_map(args, config, out):
    s = config.section("fidelity_map")
    scan = fidelity_map(
        np.geomspace(s["s_min"], s["s_max"], s["s_points"]),
        np.geomspace(s["delta_min"], s["delta_max"], s["delta_points"]),
        config.device(),
    )
    return [_write(scan, out, "fidelity_map.csv")]


def _keyvalues(items, flag):
    values = {}
    for item in items or ():
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"{flag} expects name=value, got {item!r}")
        try:
            values[key.strip()] = float(raw)
        except ValueError:
            raise ConfigError(f"{flag} {key.strip()}: not a number: {raw!r}") from None
    return values


def cmd_fit(args, config, out):
    """Fit a library model to the columns of a CSV file.

    The first column(s) are x (two for ramsey-2d), the next is y; a column
    named ``stderr`` is used as the y uncertainty.
    """
    fixed = _keyvalues(args.fixed, "--fixed")
    if args.model == "init-rate" and "gamma_mhz" not in fixed:
        fixed["gamma_mhz"] = config.device().gamma
    try:
        model = build_model(args.model, **fixed)
    except TypeError as e:
        raise ConfigError(f"--fixed: {e}") from None
    try:
        columns = read_columns(args.input)
    except OSError as e:
        raise ConfigError(f"cannot read {args.input}: {e.strerror}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    names = [n for n in columns if n != "stderr"]
    if len(names) < model.n_inputs + 1:
        raise ConfigError(f"{args.input}: model {args.model} needs {model.n_inputs + 1} data columns")
    x_cols = [columns[n] for n in names[: model.n_inputs]]
    x = x_cols[0] if model.n_inputs == 1 else np.column_stack(x_cols)
    y = columns[names[model.n_inputs]]
    sigma = columns.get("stderr")
    if sigma is not None and not np.all(sigma > 0):
        sigma = None
    try:
        result = fit(model, x, y, sigma, initial=_keyvalues(args.guess, "--guess"))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    stem = os.path.splitext(os.path.basename(args.input))[0]
    files = write_report(result, out, stem)
    print(generate_report(result), end="")
    return files


COMMANDS = {
    "levels": cmd_levels,
    "cpt": cmd_cpt,
    "odmr": cmd_odmr,
    "rabi": cmd_rabi,
    "phase-sweep": cmd_phase_sweep,
    "ramsey": cmd_ramsey,
    "echo": cmd_echo,
    "cpmg": cmd_cpmg,
    "t1": cmd_t1,
    "init-rate": cmd_init_rate,
    "fidelity-map": cmd_fidelity_map,
    "fit": cmd_fit,
}


def _common_options():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    common.add_argument(
        "--config",
        metavar="PATH",
        help="'defaults' or a config file (default: $SNV_SIM_CONFIG or defaults)",
    )
    common.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config value (section.key or bare key); repeatable",
    )
    common.add_argument("--seed", type=int, help="Master seed (default: run.seed)")
    common.add_argument("--threads", type=int, help="Worker threads for scans (default: run.threads)")
    common.add_argument("--output-dir", metavar="DIR", help="Output directory (default: run.output_dir)")
    return common


def build_parser():
    parser = argparse.ArgumentParser(
        prog="snv-sim",
        description="Simulate and fit all-optical control of a tin-vacancy spin qubit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _common_options()
    sub = parser.add_subparsers(dest="command")
    subparsers = {}
    for name, meta in ALL_EXPERIMENTS.items():
        subparsers[name] = sub.add_parser(name, help=meta["help"], parents=[common])

    subparsers["levels"].add_argument(
        "--sweep", action="store_true", help="Also write the branching ratio versus strain"
    )
    subparsers["rabi"].add_argument(
        "--fit", action="store_true", help="Fit the result with the master-equation model"
    )
    subparsers["ramsey"].add_argument(
        "--closed-form", action="store_true", help="Evaluate the closed-form map instead of simulating"
    )
    p_fit = subparsers["fit"]
    p_fit.add_argument("--model", required=True, choices=sorted(MODELS), help="Model name")
    p_fit.add_argument("--input", required=True, metavar="CSV", help="Data file")
    p_fit.add_argument(
        "--guess", action="append", default=[], metavar="NAME=VALUE", help="Initial value override"
    )
    p_fit.add_argument(
        "--fixed", action="append", default=[], metavar="NAME=VALUE",
        help="Fixed model constant (e.g. t2_star_us for ramsey-2d)",
    )
    return parser


def _load(args):
    meta = ALL_EXPERIMENTS[args.command]
    extra = []
    if args.seed is not None:
        extra.append(f"run.seed={args.seed}")
    if args.threads is not None:
        extra.append(f"run.threads={args.threads}")
    config = RunConfig.load(args.config, args.assignments + extra, meta["section"])
    if args.output_dir is not None:
        config.output_dir = args.output_dir
    for section in meta["sections"]:
        config.section(section)
    if config.seed < 0:
        raise ConfigError(f"run.seed must be >= 0, got {config.seed}")
    if config.shots < 1:
        raise ConfigError(f"run.shots must be >= 1, got {config.shots}")
    if config.threads < 1:
        raise ConfigError(f"run.threads must be >= 1, got {config.threads}")
    return config


def run(args):
    config = _load(args)
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    manifest = RunManifest(
        command=args.command, config_hash=config.hash(), seed=config.seed, started=timestamp()
    )
    logger.debug("config %s, output to %s", manifest.config_hash[:12], out)
    manifest.files = COMMANDS[args.command](args, config, out)
    manifest.finished = timestamp()
    manifest.write(out)
    print("  Wrote: manifest.json")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        run(args)
    except NumericalError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as e:
        # ConfigError and invalid physical parameters
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return 0
