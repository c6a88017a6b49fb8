"""Command-line front end: ham, qcc, uccsd, fci, extrapolate, measure, pes.

Exit codes: 0 success, 2 input parse failure, 3 numerical failure,
4 configuration failure. All outputs are JSON or CSV with a schema tag;
energies are printed in Hartree with 10 decimal places. Reruns with the
same inputs and seeds produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import click

from . import chem, oracle, simulator, solver
from .pauli import PauliString, QubitHamiltonian
from .solver import QccConfig, QccTrace

EXIT_PARSE = 2
EXIT_NUMERIC = 3
EXIT_CONFIG = 4


class ConfigError(Exception):
    """User-supplied settings (flags, manifest, CAS spec) are unusable."""


def _die(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _read_text(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        _die(EXIT_CONFIG, f"cannot read {path}: {exc}")
        raise AssertionError  # unreachable


def _load_json(path: Path) -> dict:
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        _die(EXIT_PARSE, f"{path}: invalid JSON: {exc}")
        raise AssertionError


def _write_json(path: Path | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        click.echo(text, nl=False)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


def _fmt(value: float) -> str:
    # adding 0.0 after rounding turns -0.0 into 0.0
    return f"{round(value, 10) + 0.0:.10f}"


def _parse_window(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(part) for part in text.replace(" ", "").split(",") if part]
    except ValueError:
        raise ConfigError(f"window must be comma-separated integers, got {text!r}")


@dataclass(frozen=True)
class GeometryProblem:
    """Everything one geometry needs downstream of the FCIDUMP parse."""

    problem: chem.ActiveSpaceProblem
    hamiltonian: QubitHamiltonian
    reference: str
    mapping: str
    source: str


def _build_problem(
    fcidump_path: Path,
    n_active_electrons: int | None,
    n_active_orbitals: int | None,
    window: Sequence[int] | None,
    mapping: str,
) -> GeometryProblem:
    """Parse and reduce one FCIDUMP file; raises FcidumpError / ConfigError /
    ValueError for parse, configuration, and numeric problems respectively."""
    text = fcidump_path.read_text(encoding="utf-8")
    ints = chem.parse_fcidump(text)
    try:
        mapping = chem.normalize_mapping(mapping)
        if n_active_electrons is None:
            n_active_electrons = ints.n_electrons
        if n_active_orbitals is None and window is None:
            n_active_orbitals = ints.n_orbitals
        if window is None:
            window = chem.default_window(ints, n_active_electrons, n_active_orbitals)
        prob = chem.cas_reduce(ints, window, n_active_electrons)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    fermion = chem.build_active_hamiltonian(prob)
    ham = chem.map_operator(fermion, mapping)
    reference = chem.hf_bitstring(
        prob.n_active_electrons, prob.n_spin_orbitals, mapping
    )
    return GeometryProblem(
        problem=prob,
        hamiltonian=ham,
        reference=reference,
        mapping=mapping,
        source=str(fcidump_path),
    )


def _build_problem_or_die(
    fcidump_path: Path,
    n_active_electrons: int | None,
    n_active_orbitals: int | None,
    window: Sequence[int] | None,
    mapping: str,
) -> GeometryProblem:
    try:
        return _build_problem(
            fcidump_path, n_active_electrons, n_active_orbitals, window, mapping
        )
    except OSError as exc:
        _die(EXIT_CONFIG, f"cannot read {fcidump_path}: {exc}")
    except chem.FcidumpError as exc:
        _die(EXIT_PARSE, f"{fcidump_path}: {exc}")
    except ConfigError as exc:
        _die(EXIT_CONFIG, f"{fcidump_path}: {exc}")
    except ValueError as exc:
        _die(EXIT_NUMERIC, f"{fcidump_path}: {exc}")
    raise AssertionError  # unreachable


def _ground_energy(geom: GeometryProblem) -> oracle.GroundState:
    decoder = chem.occupation_decoder(geom.mapping, geom.hamiltonian.n_qubits)
    return oracle.exact_ground(
        geom.hamiltonian,
        n_electrons=geom.problem.n_active_electrons,
        occupation_of=decoder,
    )


def _hamiltonian_payload(geom: GeometryProblem) -> dict:
    payload = geom.hamiltonian.to_json_dict()
    return {
        "schema": "qubit-hamiltonian/1",
        **payload,
        "metadata": {
            "mapping": geom.mapping,
            "e_inactive": geom.problem.e_inactive,
            "e_nuclear": geom.problem.e_nuclear,
            "n_active_orbitals": geom.problem.n_active_orbitals,
            "n_active_electrons": geom.problem.n_active_electrons,
            "reference": geom.reference,
            "source": geom.source,
        },
    }


@click.group()
@click.version_option(package_name="qccvqe")
def main() -> None:
    """Variational eigensolver with gradient-screened Pauli entanglers."""


_cas_options = [
    click.option(
        "--active-electrons", "-e", type=int, default=None,
        help="Electrons in the active space (default: all).",
    ),
    click.option(
        "--active-orbitals", "-o", "n_orbitals", type=int, default=None,
        help="Spatial orbitals in the active space (default: all).",
    ),
    click.option(
        "--window", default=None,
        help="Explicit active orbital indices, comma-separated (0-based).",
    ),
    click.option(
        "--mapping", default="jordan_wigner", show_default=True,
        help="Fermion-to-qubit mapping: jordan_wigner (jw) or parity.",
    ),
]


def _with_options(options):
    def wrap(func):
        for option in reversed(options):
            func = option(func)
        return func
    return wrap


@main.command()
@click.argument("fcidump", type=click.Path(exists=True, path_type=Path))
@_with_options(_cas_options)
@click.option("--output", type=click.Path(path_type=Path), default=None,
              help="Output JSON path (default: stdout).")
def ham(fcidump, active_electrons, n_orbitals, window, mapping, output):
    """Map an FCIDUMP file to an active-space qubit Hamiltonian."""
    try:
        window_list = _parse_window(window)
    except ConfigError as exc:
        _die(EXIT_CONFIG, str(exc))
    geom = _build_problem_or_die(
        fcidump, active_electrons, n_orbitals, window_list, mapping
    )
    _write_json(output, _hamiltonian_payload(geom))
    if output is not None:
        click.echo(
            f"{geom.hamiltonian.n_qubits} qubits, {len(geom.hamiltonian)} terms, "
            f"e_inactive {_fmt(geom.problem.e_inactive)}, "
            f"e_nuclear {_fmt(geom.problem.e_nuclear)} -> {output}"
        )


@main.command()
@click.argument("fcidump", type=click.Path(exists=True, path_type=Path))
@_with_options(_cas_options)
@click.option("--full-spectrum", is_flag=True,
              help="Diagonalize without the particle-number restriction.")
@click.option("--output", type=click.Path(path_type=Path), default=None)
def fci(fcidump, active_electrons, n_orbitals, window, mapping, full_spectrum, output):
    """Exact ground energy of the mapped active-space Hamiltonian."""
    try:
        window_list = _parse_window(window)
    except ConfigError as exc:
        _die(EXIT_CONFIG, str(exc))
    geom = _build_problem_or_die(
        fcidump, active_electrons, n_orbitals, window_list, mapping
    )
    try:
        if full_spectrum:
            ground = oracle.exact_ground(geom.hamiltonian)
        else:
            ground = _ground_energy(geom)
    except ValueError as exc:
        _die(EXIT_NUMERIC, str(exc))
    e_total = ground.energy + geom.problem.e_inactive + geom.problem.e_nuclear
    payload = {
        "schema": "fci-result/1",
        "n_qubits": geom.hamiltonian.n_qubits,
        "mapping": geom.mapping,
        "sector_restricted": not full_spectrum,
        "e_active": ground.energy,
        "e_inactive": geom.problem.e_inactive,
        "e_nuclear": geom.problem.e_nuclear,
        "e_total": e_total,
        "degenerate": ground.degenerate,
    }
    _write_json(output, payload)
    if output is not None:
        click.echo(f"E_total {_fmt(e_total)} -> {output}")


@main.command()
@click.argument("fcidump", type=click.Path(exists=True, path_type=Path))
@_with_options(_cas_options)
@click.option("--optimize", "run_opt", is_flag=True,
              help="Variationally optimize the amplitudes (slow).")
@click.option("--force", is_flag=True,
              help="Optimize even above the parameter ceiling.")
@click.option("--param-ceiling", type=int, default=30, show_default=True,
              help="Refuse --optimize above this many parameters without --force.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--output", type=click.Path(path_type=Path), default=None)
def uccsd(fcidump, active_electrons, n_orbitals, window, mapping,
          run_opt, force, param_ceiling, seed, output):
    """Count (and optionally optimize) single-Trotter UCCSD parameters."""
    try:
        window_list = _parse_window(window)
    except ConfigError as exc:
        _die(EXIT_CONFIG, str(exc))
    geom = _build_problem_or_die(
        fcidump, active_electrons, n_orbitals, window_list, mapping
    )
    prob = geom.problem
    exc_list = chem.uccsd_excitations(prob.n_active_electrons, prob.n_active_orbitals)
    payload = {
        "schema": "uccsd-report/1",
        "n_active_electrons": prob.n_active_electrons,
        "n_active_orbitals": prob.n_active_orbitals,
        "singles": len(exc_list.singles),
        "doubles": len(exc_list.doubles),
        "parameter_count": exc_list.parameter_count,
    }
    if run_opt:
        if exc_list.parameter_count > param_ceiling and not force:
            _die(
                EXIT_CONFIG,
                f"{exc_list.parameter_count} parameters exceed the ceiling "
                f"{param_ceiling}; pass --force to optimize anyway",
            )
        try:
            generators = chem.uccsd_generator_paulis(
                exc_list, prob.n_spin_orbitals, geom.mapping
            )
            ref = simulator.prepare_basis_state(
                geom.hamiltonian.n_qubits, geom.reference
            )
            cfg = QccConfig(seed=seed)
            energy, amplitudes = solver.optimize_uccsd(
                geom.hamiltonian, ref, generators, cfg
            )
        except ValueError as exc:
            _die(EXIT_NUMERIC, str(exc))
        payload["optimized"] = {
            "e_active": energy,
            "e_total": energy + prob.e_inactive + prob.e_nuclear,
            "amplitudes": amplitudes,
            "note": "single Trotter step, desk-scale simplex optimization",
        }
    _write_json(output, payload)
    if output is not None:
        click.echo(f"parameters {exc_list.parameter_count} -> {output}")


@dataclass(frozen=True)
class ManifestEntry:
    label: str
    fcidump: Path


@dataclass(frozen=True)
class Manifest:
    entries: tuple[ManifestEntry, ...]
    n_active_electrons: int | None
    n_active_orbitals: int | None
    window: tuple[int, ...] | None
    mapping: str
    output_dir: Path
    config: QccConfig
    shots: int | None
    seed: int


def _load_manifest(
    path: Path,
    output_override: Path | None,
    config_overrides: Mapping[str, object],
) -> Manifest:
    data = _load_json(path)
    try:
        schema = data.get("schema", "qcc-manifest/1")
        if schema != "qcc-manifest/1":
            raise ConfigError(f"unsupported manifest schema {schema!r}")
        raw_entries = data.get("geometries")
        if not raw_entries:
            raise ConfigError("manifest lists no geometries")
        entries = []
        seen = set()
        for item in raw_entries:
            label = str(item["label"])
            if label in seen:
                raise ConfigError(f"duplicate geometry label {label!r}")
            seen.add(label)
            fcid = Path(item["fcidump"])
            if not fcid.is_absolute():
                fcid = path.parent / fcid
            if not fcid.exists():
                raise ConfigError(f"geometry {label!r}: missing file {fcid}")
            entries.append(ManifestEntry(label=label, fcidump=fcid))
        window = data.get("orbital_window")
        cfg_data = dict(data.get("qcc", {}))
        cfg_data.update(config_overrides)
        config = QccConfig.from_mapping(cfg_data)
        out_dir = output_override or Path(data.get("output_dir", "qcc-out"))
        if not out_dir.is_absolute() and output_override is None:
            out_dir = path.parent / out_dir
        return Manifest(
            entries=tuple(sorted(entries, key=lambda e: e.label)),
            n_active_electrons=data.get("active_electrons"),
            n_active_orbitals=data.get("active_orbitals"),
            window=tuple(window) if window is not None else None,
            mapping=chem.normalize_mapping(data.get("mapping", "jordan_wigner")),
            output_dir=out_dir,
            config=config,
            shots=data.get("shots"),
            seed=int(data.get("seed", config.seed)),
        )
    except (KeyError, TypeError, ValueError, ConfigError) as exc:
        _die(EXIT_CONFIG, f"{path}: {exc}")
        raise AssertionError


@dataclass(frozen=True)
class GeometryResult:
    label: str
    row: dict[str, str]
    trace_payload: dict | None
    error: str | None


def _run_geometry(entry: ManifestEntry, manifest: Manifest) -> GeometryResult:
    try:
        geom = _build_problem(
            entry.fcidump,
            manifest.n_active_electrons,
            manifest.n_active_orbitals,
            manifest.window,
            manifest.mapping,
        )
    except (OSError, ValueError, ConfigError) as exc:
        return GeometryResult(
            label=entry.label,
            row=_error_row(entry.label, str(exc)),
            trace_payload=None,
            error=str(exc),
        )
    try:
        ref = simulator.prepare_basis_state(geom.hamiltonian.n_qubits, geom.reference)
        trace = solver.qcc_run(
            geom.hamiltonian,
            ref,
            manifest.config,
            e_inactive=geom.problem.e_inactive,
            e_nuclear=geom.problem.e_nuclear,
        )
        ground = _ground_energy(geom)
        e_qcc = solver.total_energy(trace)
        e_fci = ground.energy + geom.problem.e_inactive + geom.problem.e_nuclear
        payload = trace.to_json_dict()
        payload["label"] = entry.label
        payload["mapping"] = geom.mapping
        payload["e_fci_active"] = ground.energy
        row = {
            "geometry": entry.label,
            "E_qcc_total": _fmt(e_qcc),
            "E_fci_total": _fmt(e_fci),
            "delta": _fmt(e_qcc - e_fci),
            "iterations": str(len(trace.iterations)),
            "parameters_used": str(trace.parameters_used),
            "status": "ok",
        }
        return GeometryResult(entry.label, row, payload, None)
    except ValueError as exc:
        return GeometryResult(
            label=entry.label,
            row=_error_row(entry.label, str(exc)),
            trace_payload=None,
            error=str(exc),
        )


_SUMMARY_COLUMNS = [
    "geometry", "E_qcc_total", "E_fci_total", "delta",
    "iterations", "parameters_used", "status",
]


def _error_row(label: str, message: str) -> dict[str, str]:
    return {
        "geometry": label,
        "E_qcc_total": "nan",
        "E_fci_total": "nan",
        "delta": "nan",
        "iterations": "0",
        "parameters_used": "0",
        "status": f"error: {message}",
    }


def _merge_summary(path: Path, rows: list[dict[str, str]]) -> None:
    """Rewrite the summary CSV, replacing rows whose geometry reappears."""
    existing: dict[str, dict[str, str]] = {}
    if path.exists():
        with path.open(newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                existing[row["geometry"]] = {
                    key: row.get(key, "") for key in _SUMMARY_COLUMNS
                }
    for row in rows:
        existing[row["geometry"]] = row
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=_SUMMARY_COLUMNS)
        writer.writeheader()
        for label in sorted(existing):
            writer.writerow(existing[label])


def _run_manifest(manifest: Manifest, workers: int, summary_name: str) -> int:
    out_dir = manifest.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(lambda e: _run_geometry(e, manifest), manifest.entries)
        )
    rows = []
    failures = 0
    for result in sorted(results, key=lambda r: r.label):
        rows.append(result.row)
        if result.error is not None:
            failures += 1
            click.echo(f"geometry {result.label}: {result.error}", err=True)
            continue
        _write_json(out_dir / f"{result.label}.trace.json", result.trace_payload)
        click.echo(
            f"{result.label}: E_qcc {row_get(result.row, 'E_qcc_total')} "
            f"E_fci {row_get(result.row, 'E_fci_total')} "
            f"delta {row_get(result.row, 'delta')} "
            f"({row_get(result.row, 'iterations')} iterations)"
        )
    _merge_summary(out_dir / summary_name, rows)
    click.echo(f"summary -> {out_dir / summary_name}")
    return failures


def row_get(row: dict[str, str], key: str) -> str:
    return row.get(key, "")


_qcc_overrides = [
    click.option("--generators-per-iteration", "-n", type=int, default=None,
                 help="Override the manifest's generator count per iteration."),
    click.option("--max-iterations", type=int, default=None),
    click.option("--energy-tolerance", type=float, default=None),
    click.option("--seed", type=int, default=None),
]


def _collect_overrides(**kwargs) -> dict[str, object]:
    return {key: value for key, value in kwargs.items() if value is not None}


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, path_type=Path))
@_with_options(_qcc_overrides)
@click.option("--output-dir", type=click.Path(path_type=Path), default=None,
              help="Override the manifest's output directory.")
@click.option("--workers", type=int, default=None,
              help="Worker pool size (default: available parallelism).")
def qcc(manifest_path, generators_per_iteration, max_iterations,
        energy_tolerance, seed, output_dir, workers):
    """Run the iterative solver for every geometry in a manifest."""
    overrides = _collect_overrides(
        generators_per_iteration=generators_per_iteration,
        max_iterations=max_iterations,
        energy_tolerance=energy_tolerance,
        seed=seed,
    )
    manifest = _load_manifest(manifest_path, output_dir, overrides)
    workers = workers or min(len(manifest.entries), _default_workers())
    failures = _run_manifest(manifest, workers, "summary.csv")
    if failures == len(manifest.entries):
        _die(EXIT_NUMERIC, "every geometry failed")


def _default_workers() -> int:
    import os

    return max(os.cpu_count() or 1, 1)


@main.command()
@click.argument("manifest_path", type=click.Path(exists=True, path_type=Path))
@_with_options(_qcc_overrides)
@click.option("--output-dir", type=click.Path(path_type=Path), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--shots", type=int, default=None,
              help="Also emulate finite-shot measurement of each final state.")
def pes(manifest_path, generators_per_iteration, max_iterations,
        energy_tolerance, seed, output_dir, workers, shots):
    """Composite potential-energy-surface sweep: QCC + exact reference per point."""
    overrides = _collect_overrides(
        generators_per_iteration=generators_per_iteration,
        max_iterations=max_iterations,
        energy_tolerance=energy_tolerance,
        seed=seed,
    )
    manifest = _load_manifest(manifest_path, output_dir, overrides)
    workers = workers or min(len(manifest.entries), _default_workers())
    failures = _run_manifest(manifest, workers, "pes.csv")
    shots = shots if shots is not None else manifest.shots
    if shots:
        for entry in manifest.entries:
            trace_path = manifest.output_dir / f"{entry.label}.trace.json"
            if not trace_path.exists():
                continue
            try:
                geom = _build_problem(
                    entry.fcidump,
                    manifest.n_active_electrons,
                    manifest.n_active_orbitals,
                    manifest.window,
                    manifest.mapping,
                )
                trace = QccTrace.from_json_dict(_load_json(trace_path))
                estimate_payload = _measure_state(
                    geom.hamiltonian, trace.reference, trace.all_generators,
                    shots, manifest.seed,
                )
            except (OSError, ValueError, ConfigError) as exc:
                click.echo(f"geometry {entry.label}: shot emulation: {exc}", err=True)
                continue
            _write_json(
                manifest.output_dir / f"{entry.label}.shots.json", estimate_payload
            )
    if failures == len(manifest.entries):
        _die(EXIT_NUMERIC, "every geometry failed")


@main.command()
@click.argument("trace_path", type=click.Path(exists=True, path_type=Path))
@click.option("--discard", type=int, default=5, show_default=True,
              help="Leading iterations excluded from the fit.")
@click.option("--window", type=int, default=35, show_default=True,
              help="Number of iterations fitted after the discard.")
@click.option("--threshold", "thresholds", type=float, multiple=True,
              default=(1.6e-3, 1.6e-4), show_default=True,
              help="Energy-difference thresholds to locate on the fit.")
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.option("--curve", type=click.Path(path_type=Path), default=None,
              help="Also write the fitted convergence curve as CSV.")
def extrapolate(trace_path, discard, window, thresholds, output, curve):
    """Fit the energy-difference decay of a trace and extrapolate."""
    data = _load_json(trace_path)
    if data.get("schema") != "qcc-trace/1":
        _die(EXIT_PARSE, f"{trace_path}: expected schema qcc-trace/1")
    trace = QccTrace.from_json_dict(data)
    try:
        result = solver.extrapolate(
            trace, discard=discard, window=window, thresholds=thresholds
        )
    except solver.ExtrapolationError as exc:
        _die(EXIT_NUMERIC, str(exc))
    payload = {
        "schema": "extrapolation/1",
        "a": result.a,
        "b": result.b,
        "e0_estimate": result.e0_estimate,
        "iter_at_threshold": {
            f"{t:.1e}": i for t, i in sorted(result.iter_at_threshold.items())
        },
        "fit_window": {"discard": result.fit_window[0], "window": result.fit_window[1]},
        "residual": result.residual,
    }
    _write_json(output, payload)
    if curve is not None:
        energies = trace.energies
        c = result.b + math.log10(10.0 ** (-result.a) - 1.0)
        curve_path = Path(curve)
        curve_path.parent.mkdir(parents=True, exist_ok=True)
        with curve_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["iteration", "energy", "fitted_energy", "difference", "fitted_difference"]
            )
            for i in range(1, len(energies)):
                fitted_e = result.e0_estimate + 10.0 ** (result.a * i + result.b)
                writer.writerow(
                    [
                        i,
                        _fmt(energies[i]),
                        _fmt(fitted_e),
                        _fmt(energies[i - 1] - energies[i]),
                        _fmt(10.0 ** (result.a * i + c)),
                    ]
                )
    if output is not None:
        click.echo(f"e0 {_fmt(result.e0_estimate)} -> {output}")


def _measure_state(
    ham: QubitHamiltonian,
    reference: str,
    generators: list,
    shots: int,
    seed: int,
) -> dict:
    state = simulator.prepare_basis_state(ham.n_qubits, reference)
    state = simulator.apply_rotation_sequence(state, generators)
    grouping = simulator.group_qwc(ham)
    estimate = simulator.sample_energy(state, grouping, shots, seed)
    exact = simulator.expectation(state, ham)
    errors = simulator.per_group_error(estimate, state, grouping)
    groups = []
    for (gid, sampled, group_shots), (gid2, diff), group in zip(
        estimate.per_group, errors, grouping.groups
    ):
        groups.append(
            {
                "id": gid,
                "basis": group.shared_basis,
                "estimate": sampled,
                "exact": sampled + diff,
                "difference": diff,
                "shots": group_shots,
            }
        )
    return {
        "schema": "shot-estimate/1",
        "energy": estimate.energy,
        "exact": exact,
        "difference": exact - estimate.energy,
        "std_error": estimate.std_error,
        "constant": estimate.constant,
        "shots_per_group": estimate.shots,
        "n_groups": len(grouping.groups),
        "seed": estimate.seed,
        "rng": estimate.rng,
        "groups": groups,
    }


@main.command()
@click.argument("hamiltonian_path", type=click.Path(exists=True, path_type=Path))
@click.option("--circuit", type=click.Path(exists=True, path_type=Path), default=None,
              help="Trace or circuit JSON supplying reference and rotations "
                   "(default: bare reference from the Hamiltonian metadata).")
@click.option("--shots", type=int, default=10000, show_default=True,
              help="Measurement shots per commuting group.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.option("--per-group", type=click.Path(path_type=Path), default=None,
              help="Also write per-group estimates and errors as CSV.")
def measure(hamiltonian_path, circuit, shots, seed, output, per_group):
    """Emulate finite-shot measurement of a prepared state."""
    data = _load_json(hamiltonian_path)
    if data.get("schema") != "qubit-hamiltonian/1":
        _die(EXIT_PARSE, f"{hamiltonian_path}: expected schema qubit-hamiltonian/1")
    try:
        ham = QubitHamiltonian.from_json_dict(data)
    except ValueError as exc:
        _die(EXIT_PARSE, f"{hamiltonian_path}: {exc}")
    metadata = data.get("metadata", {})
    if circuit is not None:
        circuit_data = _load_json(circuit)
        if "iterations" in circuit_data:
            trace = QccTrace.from_json_dict(circuit_data)
            reference = trace.reference
            generators = trace.all_generators
        else:
            try:
                reference = str(circuit_data["reference"])
                generators = [
                    (PauliString.from_label(g["pauli"]), float(g["tau"]))
                    for g in circuit_data.get("generators", [])
                ]
            except (KeyError, ValueError) as exc:
                _die(EXIT_PARSE, f"{circuit}: {exc}")
    else:
        reference = metadata.get("reference")
        if reference is None:
            _die(
                EXIT_CONFIG,
                "no --circuit given and the Hamiltonian metadata has no reference",
            )
        generators = []
    if shots < 1:
        _die(EXIT_CONFIG, f"shots must be positive, got {shots}")
    if len(reference) != ham.n_qubits:
        _die(
            EXIT_CONFIG,
            f"reference {reference!r} does not match {ham.n_qubits} qubits",
        )
    try:
        payload = _measure_state(ham, reference, generators, shots, seed)
    except ValueError as exc:
        _die(EXIT_NUMERIC, str(exc))
    _write_json(output, payload)
    if per_group is not None:
        per_group_path = Path(per_group)
        per_group_path.parent.mkdir(parents=True, exist_ok=True)
        with per_group_path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["group", "shared_basis", "estimate", "exact", "difference"])
            for group in payload["groups"]:
                writer.writerow(
                    [
                        group["id"],
                        group["basis"],
                        _fmt(group["estimate"]),
                        _fmt(group["exact"]),
                        _fmt(group["difference"]),
                    ]
                )
    if output is not None:
        click.echo(
            f"E_sampled {_fmt(payload['energy'])} "
            f"E_exact {_fmt(payload['exact'])} -> {output}"
        )


if __name__ == "__main__":
    main()
