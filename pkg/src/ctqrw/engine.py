"""Stochastic realizations of the renewal dynamics and the series solution.

One realization draws renewal intervals from the waiting-time distribution;
after the n-th event the state is ``E^n[rho0]`` (the unitary part commutes
with the scattering map, so states are piecewise constant between events
and observable sampling on a grid is exact).  The ensemble average over
seeds converges to ``rho(t) = sum_n P_n(t) E^n[rho0]``, which the
deterministic series route evaluates directly from convolution-quadrature
renewal probabilities.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import seeding
from .errors import GridTooCoarseError, TruncationError
from .kernels import (
    WaitingTimeDistribution,
    sample_waiting,
    survival_cell_integrals,
    waiting_survival,
)
from .quantum import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, KrausMap, apply_kraus, linear_entropy

_NORMALIZATION_DRIFT = 1e-4


def default_observables(dim: int) -> dict:
    """Pauli set for qubits; nothing but the linear entropy otherwise."""
    if dim == 2:
        return {"M_x": SIGMA_X, "M_y": SIGMA_Y, "M_z": SIGMA_Z}
    return {}


@dataclass(frozen=True)
class Trajectory:
    """One realization: event times plus observable series on the grid."""

    seed: int
    grid: np.ndarray
    event_times: np.ndarray
    observables: dict
    states: np.ndarray | None = None


@dataclass(frozen=True)
class EnsembleStats:
    """Per-grid-point mean and standard error over realizations."""

    n_realizations: int
    grid: np.ndarray
    mean_state: np.ndarray
    observable_means: dict
    observable_stderrs: dict


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 1:
        raise ValueError("grid must be a nonempty 1-d array")
    if grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be increasing and start at t >= 0")
    return grid


def draw_event_times(
    waiting: WaitingTimeDistribution, t_end: float, rng: np.random.Generator
) -> np.ndarray:
    """Renewal event times in (0, t_end]; empty array if the first interval
    overshoots."""
    times = []
    clock = sample_waiting(waiting, rng)
    while clock <= t_end:
        times.append(clock)
        clock += sample_waiting(waiting, rng)
    return np.asarray(times)


def run_realization(
    rho0,
    emap: KrausMap,
    waiting: WaitingTimeDistribution,
    grid,
    seed: int,
    observables: dict | None = None,
    store_states: bool = False,
) -> Trajectory:
    """Simulate one realization, fully reproducible from `seed`."""
    grid = _check_grid(grid)
    rho = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    rng = seeding.stream(seed)
    events = draw_event_times(waiting, float(grid[-1]), rng)

    states = [rho]
    for _ in range(len(events)):
        states.append(apply_kraus(emap, states[-1]))
    states = np.asarray(states)

    if observables is None:
        observables = default_observables(rho.shape[0])
    # state index per grid point: number of events that occurred by then
    idx = np.searchsorted(events, grid, side="right")
    series = {}
    for name, op in observables.items():
        per_state = np.einsum("ij,nji->n", np.asarray(op, dtype=complex), states).real
        series[name] = per_state[idx]
    series["linear_entropy"] = np.array([linear_entropy(s) for s in states])[idx]

    return Trajectory(
        seed=seed,
        grid=grid,
        event_times=events,
        observables=series,
        states=states[idx] if store_states else None,
    )


def ensemble_average(
    rho0,
    emap: KrausMap,
    waiting: WaitingTimeDistribution,
    grid,
    n_realizations: int,
    base_seed: int,
    observables: dict | None = None,
    threads: int | None = None,
) -> EnsembleStats:
    """Monte Carlo mean and standard error over `n_realizations` streams.

    Realization k uses the seed ``splitmix64(base_seed + k * GOLDEN)``;
    reductions run over gathered per-realization arrays with numpy pairwise
    summation, so the output is bit-identical for any thread count.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    grid = _check_grid(grid)
    rho = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    dim = rho.shape[0]
    if observables is None:
        observables = default_observables(dim)
    names = list(observables.keys()) + ["linear_entropy"]

    def one(k: int):
        traj = run_realization(
            rho, emap, waiting, grid,
            seed=seeding.derive_seed(base_seed, k),
            observables=observables, store_states=True,
        )
        return traj

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            trajectories = list(pool.map(one, range(n_realizations)))
    else:
        trajectories = [one(k) for k in range(n_realizations)]

    n = n_realizations
    means, stderrs = {}, {}
    for name in names:
        samples = np.stack([t.observables[name] for t in trajectories])  # (n, n_grid)
        total = np.sum(samples, axis=0)
        mean = total / n
        if n > 1:
            sq = np.sum((samples - mean) ** 2, axis=0)
            stderrs[name] = np.sqrt(sq / (n - 1) / n)
        else:
            stderrs[name] = np.zeros_like(mean)
        means[name] = mean

    # fixed chunk tree keeps the state mean deterministic without storing
    # n_realizations * n_grid full state histories at once
    chunk = 256
    partials = []
    for lo in range(0, n, chunk):
        block = np.stack([t.states for t in trajectories[lo : lo + chunk]])
        partials.append(block.sum(axis=0))
    mean_state = np.sum(np.stack(partials), axis=0) / n

    return EnsembleStats(
        n_realizations=n,
        grid=grid,
        mean_state=mean_state,
        observable_means=means,
        observable_stderrs=stderrs,
    )


@dataclass(frozen=True)
class RenewalProbabilities:
    """Table P_n(t) for n = 0..n_max on a grid, with the truncation tail."""

    grid: np.ndarray
    table: np.ndarray  # (n_max+1, n_grid)
    tail: np.ndarray  # 1 - sum_n P_n per grid point

    @property
    def n_max(self) -> int:
        return self.table.shape[0] - 1


def _fine_grid(grid: np.ndarray, min_points: int):
    """Uniform refinement of [0, t_end] that contains every (uniform) grid
    point exactly; non-uniform grids are interpolated."""
    t_end = float(grid[-1])
    steps = np.diff(grid)
    uniform = grid[0] == 0.0 and steps.size > 0 and np.allclose(steps, steps[0], rtol=1e-9)
    if uniform:
        factor = max(1, int(np.ceil(min_points / (grid.size - 1))))
        n_fine = (grid.size - 1) * factor
        fine = np.linspace(0.0, t_end, n_fine + 1)
        index = np.arange(grid.size) * factor
        return fine, index
    n_fine = max(min_points, 4 * grid.size)
    return np.linspace(0.0, t_end, n_fine + 1), None


def _waiting_cell_weights(waiting, fine: np.ndarray):
    """Product-integration weights of the waiting density on a uniform grid.

    A0[m] = int_cell w, A1[m] = int_cell w (s/h - m): exact in the weight
    (survival differences and first moments), so only the linear
    interpolation of the convolved factor contributes error.  The first
    cell is refined geometrically to absorb an integrable t^(alpha-1)
    singularity.
    """
    h = fine[1] - fine[0]
    edges = fine
    surv = waiting_survival(waiting, edges)
    a0 = surv[:-1] - surv[1:]
    # first moments: int s w ds = [-s S]_a^b + int S ds
    int_s = survival_cell_integrals(waiting, edges)
    s_w = -edges[1:] * surv[1:] + edges[:-1] * surv[:-1] + int_s
    # refine cell 0: the kink (or divergence) of w sits at s = 0
    sub = np.geomspace(h * 1e-8, h, 64)
    sub = np.concatenate([[0.0], sub])
    surv_sub = waiting_survival(waiting, sub)
    int_s0 = survival_cell_integrals(waiting, sub).sum()
    s_w0 = -sub[-1] * surv_sub[-1] + 0.0 + int_s0
    s_w[0] = s_w0
    a1 = s_w / h - np.arange(len(a0)) * a0
    return a0, a1


def renewal_probabilities(
    waiting: WaitingTimeDistribution,
    n_max: int | None,
    grid,
    min_points: int = 32000,
    tail_tol: float = 1e-6,
) -> RenewalProbabilities:
    """P_n(t) by iterated product convolution (FFT accelerated).

    ``P_0`` is the survival function; ``P_n(t) = int_0^t w(t-s) P_{n-1}(s)
    ds`` uses exact cell moments of w against a piecewise-linear P_{n-1}
    (second-order accurate; `min_points` internal cells keep the error
    below ~1e-8 for smooth waiting densities).  When `n_max` is None it
    grows until the tail bound drops below `tail_tol` at the grid end
    (capped at 512).
    """
    grid = _check_grid(grid)
    fine, index = _fine_grid(grid, min_points)
    a0, a1 = _waiting_cell_weights(waiting, fine)

    def restrict(row):
        return row[index] if index is not None else np.interp(grid, fine, row)

    prev = waiting_survival(waiting, fine)
    rows = [restrict(prev)]
    total_fine = prev.copy()
    cap = 512 if n_max is None else int(n_max)
    n = 0
    while n < cap:
        # P_n[k] = sum_{m=0}^{k-1} prev[k-1-m] A1[m] + prev[k-m] (A0[m]-A1[m])
        c1 = fftconvolve(prev, a1)[: fine.size - 1]
        c2 = fftconvolve(prev[1:], a0 - a1)[: fine.size - 1]
        nxt = np.zeros_like(prev)
        nxt[1:] = c1 + c2
        nxt = np.clip(nxt, 0.0, None)
        rows.append(restrict(nxt))
        total_fine += nxt
        prev = nxt
        n += 1
        if n_max is None and 1.0 - total_fine[-1] < tail_tol:
            break

    table = np.asarray(rows)
    tail_fine = 1.0 - total_fine
    # self-consistency: the quadrature must not inflate total probability
    drift = max(0.0, float(-tail_fine.min()))
    if drift > _NORMALIZATION_DRIFT:
        raise GridTooCoarseError(
            f"normalization drift {drift:.2e} after {table.shape[0] - 1} convolutions"
        )
    tail = restrict(tail_fine)
    return RenewalProbabilities(grid=grid, table=table, tail=tail)


def series_solution(
    rho0,
    emap: KrausMap,
    waiting: WaitingTimeDistribution,
    grid,
    n_max: int | None = None,
    tol: float = 1e-6,
    min_points: int = 32000,
):
    """Deterministic route: ``rho(t) = sum_n P_n(t) E^n[rho0]``.

    Returns (states, error_bound) where states has shape (n_grid, d, d) and
    the bound is ``tail(t) * max_n ||E^n rho0 - rho_inf||``-style crude
    envelope (the renewal tail times the largest operator spread).
    Raises :class:`TruncationError` when the tail at the grid end exceeds
    `tol` at the allowed truncation.
    """
    grid = _check_grid(grid)
    rho = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    probs = renewal_probabilities(waiting, n_max, grid, min_points=min_points, tail_tol=tol / 10)
    if probs.tail[-1] > tol:
        raise TruncationError(
            f"renewal tail {probs.tail[-1]:.2e} at t={grid[-1]:g} exceeds tol={tol:g} "
            f"with n_max={probs.n_max}"
        )
    powers = [rho]
    for _ in range(probs.n_max):
        powers.append(apply_kraus(emap, powers[-1]))
    powers = np.asarray(powers)  # (n_max+1, d, d)
    states = np.einsum("nk,nij->kij", probs.table, powers)
    spread = np.max(np.abs(powers - powers.mean(axis=0)))
    bound = probs.tail * spread
    return states, bound
