"""Command-line front end: config-driven pipelines behind the figure data.

Each subcommand reads one JSON config (strict schema, see
:mod:`wellrot.config`), runs the corresponding library pipeline and writes
CSV/JSON files into the output directory. Outputs embed the resolved config
and are byte-reproducible. Exit codes: 0 success, 2 config violation,
3 numerical failure; failures also print a machine-readable error JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .adiabatic import optimize_schedule
from .basis import parity_operator
from .config import TWO_PI, ExperimentConfig
from .errors import ConfigError, WellrotError
from .evolution import logical_propagator
from .hamiltonians import (
    low_energy_hamiltonian,
    potential_grid,
    well_distance,
)
from .junctions import abs_energy, harmonic_amplitudes, squid_coeffs
from .spectral import (
    compare_models,
    lowest_eigenpairs,
    noise_matrix_elements,
    spectrum_vs_angle,
    to_phase_space,
    _family_for,
)

_POTENTIAL_MODELS = ("ideal", "circuit", "sinsin", "lowenergy", "lowenergy-corrected")


def _out_dir(args, config: ExperimentConfig) -> Path:
    if args.out:
        path = Path(args.out)
    elif config.raw["output_dir"]:
        path = Path(config.raw["output_dir"])
    elif os.environ.get("WELLROT_OUT"):
        path = Path(os.environ["WELLROT_OUT"])
    else:
        path = Path("wellrot-out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _log(args, message: str) -> None:
    if args.verbose:
        print(message, file=sys.stderr)


# --- subcommands -----------------------------------------------------------


def cmd_junction(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    flux = config.flux()
    harm_rows = []
    coeff_rows = []
    pot_rows = []
    theta_axis = np.linspace(-np.pi, np.pi, raw["grid_points"], endpoint=False)
    for swept in raw["junction"]["swept_transmissions"]:
        left, right = config.junction_pair(swept)
        amps = {"left": harmonic_amplitudes(left), "right": harmonic_amplitudes(right)}
        for side, amp in amps.items():
            for m in range(1, len(amp) + 1):
                harm_rows.append((side, swept, m, amp[m - 1] / TWO_PI, amp.method))
        coeffs = squid_coeffs(left, right, flux)
        u_total = abs_energy(left, theta_axis) + abs_energy(right, theta_axis - flux)
        minima = _count_periodic_minima(np.asarray(u_total))
        coeff_rows.append(
            (
                swept,
                coeffs.alpha / TWO_PI,
                coeffs.beta / TWO_PI,
                coeffs.epsilon / TWO_PI,
                minima,
            )
        )
        for theta, value in zip(theta_axis, np.asarray(u_total)):
            pot_rows.append((swept, theta, value / TWO_PI))
    io.write_csv(
        out / "junction_harmonics.csv",
        raw,
        ["junction", "transmission", "m", "ejm_ghz", "method"],
        harm_rows,
    )
    io.write_csv(
        out / "squid_coeffs.csv",
        raw,
        ["transmission", "alpha_ghz", "beta_ghz", "epsilon_ghz", "minima_count"],
        coeff_rows,
        extra={"flux_over_pi": raw["junction"]["flux_over_pi"]},
    )
    io.write_csv(
        out / "junction_potential.csv",
        raw,
        ["transmission", "theta_rad", "u_ghz"],
        pot_rows,
    )


def _count_periodic_minima(values: np.ndarray) -> int:
    left = np.roll(values, 1)
    right = np.roll(values, -1)
    return int(np.sum((values < left) & (values < right)))


def cmd_potential(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    params = config.circuit_params()
    models = [m for m in raw["models"] if m in _POTENTIAL_MODELS] or list(_POTENTIAL_MODELS)
    for model in models:
        for idx, phi in enumerate(config.angle_list()):
            grid = potential_grid(model, phi, params, n_points=raw["grid_points"])
            io.write_grid_csv(
                out / f"potential_{model}_a{idx}.csv",
                raw,
                grid.theta_axis,
                grid.phi_axis,
                grid.values / TWO_PI,
                extra={
                    "model": model,
                    "rotation_angle_over_pi": phi / math.pi,
                    "well_distance": well_distance(phi),
                },
            )
            _log(args, f"potential {model} angle {idx} done")


def cmd_spectrum(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    results = spectrum_vs_angle(
        config.circuit_params(), config.phi_grid(), raw["levels"], config.mode_pair()
    )
    k = raw["levels"]
    columns = (
        ["phi_rad", "phi_over_pi"]
        + [f"omega_{n}_ghz" for n in range(k)]
        + ["omega_01_ghz"]
        + [f"parity_{n}" for n in range(k)]
    )
    rows = []
    for res in results:
        omega = res.energies / TWO_PI
        rows.append(
            [res.phi_angle, res.phi_angle / math.pi]
            + [w for w in omega]
            + [omega[1] - omega[0]]
            + [p for p in res.parities]
        )
    io.write_csv(out / "spectrum.csv", raw, columns, rows)


def _hamiltonian_for(model: str, phi: float, config: ExperimentConfig):
    params = config.circuit_params()
    modes = config.mode_pair()
    if model in ("lowenergy", "lowenergy-corrected"):
        return low_energy_hamiltonian(
            phi, params, modes, corrected=model == "lowenergy-corrected"
        )
    return _family_for(model, params, modes).operator(phi)


def _dump_eigenstates(
    config: ExperimentConfig,
    out: Path,
    model: str,
    basis: str,
    levels: int,
    header_config: dict | None = None,
) -> None:
    raw = config.raw
    header = header_config if header_config is not None else raw
    modes = config.mode_pair()
    parity = parity_operator(modes)
    for a_idx, phi in enumerate(config.angle_list()):
        result = lowest_eigenpairs(
            _hamiltonian_for(model, phi, config), levels, parity=parity, phi_angle=phi
        )
        for n in range(levels):
            meta = {
                "model": model,
                "basis": basis,
                "level": n,
                "rotation_angle_over_pi": phi / math.pi,
                "energy_ghz": result.energies[n] / TWO_PI,
                "parity": result.parities[n],
            }
            name = f"eigenstate_{model}_{basis}_a{a_idx}_n{n}.csv"
            if basis == "phase":
                ps = to_phase_space(result.states[n], modes, raw["grid_points"])
                io.write_grid_csv(
                    out / name,
                    header,
                    ps.theta_axis,
                    ps.phi_axis,
                    np.abs(ps.amplitudes) ** 2,
                    extra=meta,
                )
            else:
                coeffs = result.states[n].reshape(modes[0].dimension, modes[1].dimension)
                io.write_grid_csv(
                    out / name,
                    header,
                    modes[0].charges.astype(float),
                    modes[1].charges.astype(float),
                    np.abs(coeffs) ** 2,
                    extra=meta,
                )


def cmd_eigenstates(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    basis = args.basis or raw["basis"]
    models = [args.model] if args.model else raw["models"]
    for model in models:
        _dump_eigenstates(config, out, model, basis, raw["levels"])
        _log(args, f"eigenstates {model} done")


def cmd_matrix_elements(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    modes = config.mode_pair()
    results = spectrum_vs_angle(
        config.circuit_params(), config.phi_grid(), max(raw["levels"], 2), modes
    )
    sample = noise_matrix_elements(results[0], modes)
    keys = sorted(sample.keys())
    rows = []
    for res in results:
        table = noise_matrix_elements(res, modes)
        rows.append([res.phi_angle, res.phi_angle / math.pi] + [table[k] for k in keys])
    io.write_csv(
        out / "matrix_elements.csv", raw, ["phi_rad", "phi_over_pi"] + keys, rows
    )


def _build_schedule(config: ExperimentConfig, zeta_ghz=None, ec_ghz=None):
    s = config.raw["schedule"]
    return optimize_schedule(
        config.circuit_params(zeta_ghz=zeta_ghz, ec_ghz=ec_ghz),
        config.mode_pair(ec_ghz=ec_ghz),
        bound_factor=s["bound_factor"],
        phi_resolution=s["resolution"],
        m_count=s["m_count"],
        rate_ceiling=s["rate_ceiling"],
    )


def cmd_schedule(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    schedule = _build_schedule(config)
    table = schedule.to_table()
    header = "\n".join(io.config_header(raw)) + "\n"
    path = out / "schedule.csv"
    path.write_text(header + table, newline="\n")
    io.write_json(
        out / "schedule_meta.json",
        raw,
        {
            "gate_time_ns": schedule.total_time,
            "interpolation": schedule.interpolation,
            "samples": len(schedule.times),
        },
    )


def cmd_gate(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    schedule = _build_schedule(config)
    n_snapshots = raw["evolution"]["snapshots"]
    snapshot_times = (
        np.linspace(0.0, schedule.total_time, n_snapshots) if n_snapshots else None
    )
    gate = logical_propagator(
        config.circuit_params(),
        config.mode_pair(),
        schedule,
        step_tol=raw["evolution"]["step_tol"],
        norm_tol=raw["evolution"]["norm_tol"],
        snapshot_times=snapshot_times,
    )
    m = gate.projected_propagator
    io.write_json(
        out / "gate.json",
        raw,
        {
            "gate_time_ns": gate.gate_time,
            "fidelity": gate.fidelity,
            "leakage": gate.leakage,
            "dynamical_phase_rad": gate.dynamical_phase,
            "residual_phase_rad": gate.doublet_phase,
            "propagator_real": m.real.tolist(),
            "propagator_imag": m.imag.tolist(),
        },
    )
    modes = config.mode_pair()
    for s_idx, (t, state_even, state_odd) in enumerate(gate.trajectory_samples or []):
        for label, state in (("even", state_even), ("odd", state_odd)):
            ps = to_phase_space(state, modes, raw["grid_points"])
            io.write_grid_csv(
                out / f"trajectory_{label}_s{s_idx}.csv",
                raw,
                ps.theta_axis,
                ps.phi_axis,
                np.abs(ps.amplitudes) ** 2,
                extra={"time_ns": t, "initial_state": label},
            )
    _log(args, f"gate time {gate.gate_time:.2f} ns fidelity {gate.fidelity:.6f}")


def _sweep_point(payload):
    config_raw, zeta_over_ej, ec_ghz = payload
    config = ExperimentConfig(config_raw)
    ej_ghz = config.raw["circuit"]["alpha_ghz"]
    zeta_ghz = zeta_over_ej * ej_ghz
    schedule = _build_schedule(config, zeta_ghz=zeta_ghz, ec_ghz=ec_ghz)
    gate = logical_propagator(
        config.circuit_params(zeta_ghz=zeta_ghz, ec_ghz=ec_ghz),
        config.mode_pair(ec_ghz=ec_ghz),
        schedule,
        step_tol=config.raw["evolution"]["step_tol"],
        norm_tol=config.raw["evolution"]["norm_tol"],
    )
    return (
        ec_ghz,
        zeta_over_ej,
        zeta_ghz,
        gate.gate_time,
        gate.fidelity,
        gate.leakage,
        gate.dynamical_phase,
    )


def cmd_sweep_zeta(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    points = [
        (raw, z, ec) for ec in raw["sweep"]["ec_ghz"] for z in raw["sweep"]["zeta_over_ej"]
    ]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    io.write_csv(
        out / "sweep_zeta.csv",
        raw,
        [
            "ec_ghz",
            "zeta_over_ej",
            "zeta_ghz",
            "gate_time_ns",
            "fidelity",
            "leakage",
            "dynamical_phase_rad",
        ],
        rows,
    )


def cmd_compare_models(args, config: ExperimentConfig, out: Path) -> None:
    raw = config.raw
    modes = config.mode_pair()
    report = compare_models(
        config.circuit_params(),
        config.phi_grid(),
        max(raw["levels"], 3),
        modes,
    )
    variant_names = sorted(report.rows[0].overlaps.keys()) if report.rows else []
    columns = ["phi_rad", "phi_over_pi"]
    for name in ["circuit"] + variant_names:
        columns += [f"split_{name}_ghz", f"gap02_{name}_ghz"]
    for name in variant_names:
        columns += [f"overlap_{name}_n{n}" for n in range(3)]
    rows = []
    for row in report.rows:
        record = [row.phi_angle, row.phi_angle / math.pi]
        for name in ["circuit"] + variant_names:
            record += [row.splitting[name] / TWO_PI, row.gap02[name] / TWO_PI]
        for name in variant_names:
            record += list(row.overlaps[name])
        rows.append(record)
    io.write_csv(out / "compare_models.csv", raw, columns, rows)
    io.write_json(
        out / "model_asymmetry.json",
        raw,
        {"quarter_angle_gap02_asymmetry": report.asymmetry},
    )
    # state dumps for the two coupler models at the configured angles
    for model in ("circuit", "sinsin"):
        for basis in ("phase", "charge"):
            _dump_eigenstates(config, out, model, basis, 3, header_config=raw)


_COMMANDS = {
    "junction": cmd_junction,
    "potential": cmd_potential,
    "spectrum": cmd_spectrum,
    "eigenstates": cmd_eigenstates,
    "matrix-elements": cmd_matrix_elements,
    "schedule": cmd_schedule,
    "gate": cmd_gate,
    "sweep-zeta": cmd_sweep_zeta,
    "compare-models": cmd_compare_models,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wellrot",
        description="Double-well rotation Z-gate simulator: config-driven data pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config path (defaults apply)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="dotted-path config override, repeatable",
        )
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--verbose", action="store_true")
        if name == "eigenstates":
            p.add_argument("--basis", choices=["phase", "charge"], default=None)
            p.add_argument(
                "--model",
                choices=list(_POTENTIAL_MODELS) + ["sinsin-cos"],
                default=None,
            )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.load(args.config, args.override)
        out = _out_dir(args, config)
        _COMMANDS[args.command](args, config, out)
    except ConfigError as exc:
        print(json.dumps({"error": {"type": "config", "message": str(exc)}}))
        return 2
    except WellrotError as exc:
        print(
            json.dumps(
                {"error": {"type": type(exc).__name__, "message": str(exc)}}
            )
        )
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
