"""Experiment runner: config file in, CSV + JSON manifest out.

Usage::

    ctqrw --config run.ini [--out-dir DIR] [--seed-override N] [--threads N]

Exit codes: 0 success, 2 malformed configuration (message names the key),
3 numeric failure (message names the operation).  ``CTQRW_THREADS`` is the
environment fallback for ``--threads``; threads parallelize realizations
and walkers only, and the outputs are byte-identical for any thread count.

CSV files carry one header row naming columns (times in seconds, other
columns dimensionless), 17-significant-digit values, LF line endings.
The JSON manifest echoes the configuration, seeds, library version and
wall time, and validates against ``manifest_schema.json``.
"""

import argparse
import importlib.resources
import json
import os
import sys
import time

import numpy as np

from . import __version__, engine, models, solvers
from .config import ExperimentConfig, parse_config
from .errors import ConfigError, CtqrwError
from .kernels import classify_kernel, waiting_from_kernel
from .models import qubit_closed_solution, qubit_kraus, wigner_ctrw, WignerWalkConfig
from .quantum import damping_basis, linear_entropy, lindblad_from_kraus


def _format_row(values) -> str:
    return ",".join(f"{v:.17g}" for v in values)


def write_csv(path: str, header: list, columns: list):
    """Columns are equal-length 1-d arrays; 17 significant digits, LF."""
    rows = np.column_stack(columns)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(_format_row(row) + "\n")


def _manifest(cfg: ExperimentConfig, seeds, outputs, wall, extra=None) -> dict:
    doc = {
        "experiment": cfg.kind,
        "config": cfg.raw,
        "seeds": [int(s) for s in seeds],
        "library_version": __version__,
        "wall_time_sec": float(wall),
        "outputs": list(outputs),
    }
    if extra:
        doc.update(extra)
    return doc


def validate_manifest(doc: dict):
    import jsonschema

    schema = json.loads(
        importlib.resources.files("ctqrw").joinpath("manifest_schema.json").read_text()
    )
    jsonschema.validate(doc, schema)


def _solution_columns(states, grid):
    from .quantum import SIGMA_X, SIGMA_Y, SIGMA_Z

    cols = {
        "t": grid,
        "P_up": states[:, 0, 0].real,
        "P_down": states[:, 1, 1].real,
        "re_coherence": states[:, 0, 1].real,
        "im_coherence": states[:, 0, 1].imag,
        "M_x": np.einsum("kij,ji->k", states, SIGMA_X).real,
        "M_y": np.einsum("kij,ji->k", states, SIGMA_Y).real,
        "M_z": np.einsum("kij,ji->k", states, SIGMA_Z).real,
        "linear_entropy": np.array([linear_entropy(s) for s in states]),
    }
    return list(cols.keys()), list(cols.values())


def _run_realizations(cfg, grid, out_csv):
    emap = qubit_kraus(cfg.model)
    waiting = waiting_from_kernel(cfg.kernels[0][1])
    header = ["t"]
    columns = [grid]
    seeds = []
    from .seeding import derive_seed

    for k in range(cfg.n_realizations):
        seed = derive_seed(cfg.seed, k)
        seeds.append(seed)
        traj = engine.run_realization(cfg.initial, emap, waiting, grid, seed=seed)
        for name in ("M_x", "M_y", "M_z"):
            header.append(f"{name}_r{k}")
            columns.append(traj.observables[name])
    write_csv(out_csv, header, columns)
    return seeds, {}


def _run_ensemble(cfg, grid, out_csv):
    emap = qubit_kraus(cfg.model)
    kernel = cfg.kernels[0][1]
    waiting = waiting_from_kernel(kernel)
    stats = engine.ensemble_average(
        cfg.initial,
        emap,
        waiting,
        grid,
        n_realizations=cfg.n_realizations,
        base_seed=cfg.seed,
        threads=cfg.threads,
    )
    sol = qubit_closed_solution(cfg.model, kernel, cfg.initial, grid)
    analytic_mx = 2.0 * sol.coherence_up.real
    header = ["t", "mc_mean_Mx", "mc_stderr", "analytic_Mx", "mc_mean_Mz", "mc_stderr_Mz"]
    columns = [
        grid,
        stats.observable_means["M_x"],
        stats.observable_stderrs["M_x"],
        analytic_mx,
        stats.observable_means["M_z"],
        stats.observable_stderrs["M_z"],
    ]
    write_csv(out_csv, header, columns)
    return [cfg.seed], {}


def _run_solve(cfg, grid, out_csv):
    emap = qubit_kraus(cfg.model)
    kernel = cfg.kernels[0][1]
    gen = lindblad_from_kraus(emap)
    if cfg.route == "closed":
        states = qubit_closed_solution(cfg.model, kernel, cfg.initial, grid).states
    elif cfg.route == "volterra":
        states = solvers.volterra_solve(gen, kernel, cfg.initial, grid)
    elif cfg.route == "subordination":
        states = solvers.subordination_solve(kernel, damping_basis(gen), cfg.initial, grid)
    else:  # series
        waiting = waiting_from_kernel(kernel)
        states, _ = engine.series_solution(cfg.initial, emap, waiting, grid)
    header, columns = _solution_columns(states, grid)
    write_csv(out_csv, header, columns)
    return [cfg.seed], {}


def _run_classify(cfg, grid, out_csv):
    label, kernel = cfg.kernels[0]
    verdict = classify_kernel(kernel)
    doc = {
        "kernel": label,
        "verdict": verdict.verdict,
        "certificate": verdict.certificate,
        "witness": verdict.witness,
    }
    with open(out_csv, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return [cfg.seed], {"verdict": doc}


def _run_cp_audit(cfg, grid, out_csv):
    emap = qubit_kraus(cfg.model)
    kernel = cfg.kernels[0][1]
    gen = lindblad_from_kraus(emap)
    basis = damping_basis(gen)

    def route(batch):
        return solvers.closed_form_solve(basis, kernel, batch, grid)

    defects = solvers.cp_defect_over_time(route, 2, grid)
    states = solvers.closed_form_solve(basis, kernel, cfg.initial, grid)
    min_eigs = np.array([np.linalg.eigvalsh((s + s.conj().T) / 2).min() for s in states])
    write_csv(
        out_csv,
        ["t", "cp_defect", "min_state_eigenvalue"],
        [grid, defects, min_eigs],
    )
    return [cfg.seed], {}


def _run_entropy(cfg, grid, out_csv):
    header = ["t"]
    columns = [grid]
    for label, kernel in cfg.kernels:
        sol = qubit_closed_solution(cfg.model, kernel, cfg.initial, grid)
        delta = np.array([linear_entropy(s) for s in sol.states])
        header.append(f"delta_{label}")
        columns.append(delta)
    write_csv(out_csv, header, columns)
    return [cfg.seed], {}


def _run_wigner(cfg, grid, out_csv):
    wcfg = WignerWalkConfig(
        jumps=cfg.jumps, kernel=cfg.kernels[0][1], n_walkers=cfg.n_walkers
    )
    result = wigner_ctrw(wcfg, grid, base_seed=cfg.seed)
    header = ["t", "mean_count"]
    columns = [grid, result.mean_counts]
    if result.n_estimate is not None:
        header.append("n_estimate")
        columns.append(result.n_estimate)
    write_csv(out_csv, header, columns)
    return [cfg.seed], {}


def _run_intrinsic(cfg, grid, out_csv):
    kernel = cfg.kernels[0][1]
    dim = cfg.spectrum.dim
    rho0 = np.full((dim, dim), 1.0 / dim, dtype=complex)
    result = models.intrinsic_decoherence(cfg.spectrum, kernel, rho0, grid)
    header = ["t"]
    columns = [grid]
    for n in range(dim):
        for m in range(dim):
            header.append(f"re_rho_{n}{m}")
            columns.append(result.states[:, n, m].real)
            header.append(f"im_rho_{n}{m}")
            columns.append(result.states[:, n, m].imag)
    write_csv(out_csv, header, columns)
    return [cfg.seed], {}


_RUNNERS = {
    "realizations": _run_realizations,
    "ensemble": _run_ensemble,
    "solve": _run_solve,
    "classify": _run_classify,
    "cp-audit": _run_cp_audit,
    "entropy": _run_entropy,
    "wigner": _run_wigner,
    "intrinsic": _run_intrinsic,
}

_FIGURE_KIND = {
    "figure1": "realizations",
    "figure2": "ensemble",
    "figure3": "entropy",
    "figure4": "entropy",
}


def run(config_path: str, out_dir: str = ".", seed_override: int | None = None,
        threads: int | None = None) -> int:
    """Execute one experiment; returns the process exit code."""
    t0 = time.perf_counter()
    try:
        cfg = parse_config(config_path)
        if seed_override is not None:
            cfg.seed = int(seed_override)
        if threads is not None:
            cfg.threads = int(threads)
        elif cfg.threads is None and os.environ.get("CTQRW_THREADS"):
            cfg.threads = int(os.environ["CTQRW_THREADS"])
        grid = cfg.grid()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    kind = _FIGURE_KIND.get(cfg.kind, cfg.kind)
    runner = _RUNNERS[kind]
    os.makedirs(out_dir, exist_ok=True)
    out_csv = os.path.join(out_dir, cfg.csv_name)
    try:
        seeds, extra = runner(cfg, grid, out_csv)
    except CtqrwError as exc:
        print(f"numeric failure in {kind}: {exc}", file=sys.stderr)
        return 3
    wall = time.perf_counter() - t0
    manifest = _manifest(cfg, seeds, [os.path.basename(out_csv)], wall, extra)
    validate_manifest(manifest)
    out_manifest = os.path.join(out_dir, cfg.manifest_name)
    with open(out_manifest, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ctqrw", description="run a configured renewal-dynamics experiment"
    )
    parser.add_argument("--config", required=True, help="experiment file (INI grammar)")
    parser.add_argument("--out-dir", default=".", help="directory for CSV/manifest outputs")
    parser.add_argument("--seed-override", type=int, default=None)
    parser.add_argument(
        "--threads", type=int, default=None, help="worker threads (CTQRW_THREADS fallback)"
    )
    args = parser.parse_args(argv)
    return run(args.config, args.out_dir, args.seed_override, args.threads)


if __name__ == "__main__":
    sys.exit(main())
