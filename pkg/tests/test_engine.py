"""Stochastic realizations, ensemble statistics, renewal probabilities."""

import numpy as np
import pytest
from scipy.special import gammaln

from ctqrw import engine
from ctqrw.errors import TruncationError
from ctqrw.kernels import (
    ExponentialWaiting,
    HypoexponentialWaiting,
    MittagLefflerWaiting,
    waiting_survival,
)
from ctqrw.models import Depolarizing, qubit_kraus
from ctqrw.quantum import KrausMap, make_density
from ctqrw.seeding import derive_seed, splitmix64, stream
from ctqrw.special import mittag_leffler

GRID = np.linspace(0.0, 20.0, 201)


def poisson_table(rate, t, n_max):
    n = np.arange(n_max + 1)[:, None]
    lam = rate * t[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(n * np.where(lam > 0, np.log(lam), -np.inf) - lam - gammaln(n + 1))
    out[0, t == 0] = 1.0
    out[1:, t == 0] = 0.0
    return out


def test_splitmix_determinism_and_spread():
    assert splitmix64(12345) == splitmix64(12345)
    seeds = {derive_seed(1, k) for k in range(1000)}
    assert len(seeds) == 1000


def test_realization_no_events_is_constant(plus_x_state):
    emap = qubit_kraus(Depolarizing())
    # waiting time so long the first interval overshoots
    w = ExponentialWaiting(rate=1e-9)
    traj = engine.run_realization(plus_x_state, emap, w, GRID, seed=5)
    assert traj.event_times.size == 0
    assert np.allclose(traj.observables["M_x"], 1.0)


def test_depolarizing_realization_structure(plus_x_state):
    # after the first event M_x = 0 forever; M_z = (-1)^N(t) M_z(0)
    emap = qubit_kraus(Depolarizing())
    w = ExponentialWaiting(rate=1.0)
    rho0 = make_density(0.5 * (np.eye(2) + (np.array([[0, 1], [1, 0]]) + np.diag([1, -1])) / np.sqrt(2)))
    traj = engine.run_realization(rho0, emap, w, GRID, seed=7)
    assert traj.event_times.size > 0
    counts = np.searchsorted(traj.event_times, GRID, side="right")
    mz0 = rho0.matrix[0, 0].real - rho0.matrix[1, 1].real
    assert np.allclose(traj.observables["M_z"], mz0 * (-1.0) ** counts, atol=1e-12)
    after = counts > 0
    assert np.allclose(traj.observables["M_x"][after], 0.0, atol=1e-12)
    mx0 = (rho0.matrix[0, 1] + rho0.matrix[1, 0]).real
    assert np.allclose(traj.observables["M_x"][~after], mx0, atol=1e-12)


def test_realization_states_are_cp_images(rng, plus_x_state):
    emap = qubit_kraus(Depolarizing())
    w = HypoexponentialWaiting(r1=0.5, r2=1.5)
    for seed in range(20):
        traj = engine.run_realization(
            plus_x_state, emap, w, GRID, seed=seed, store_states=True
        )
        traces = np.einsum("kii->k", traj.states)
        assert np.max(np.abs(traces - 1.0)) < 1e-12
        eigs = np.linalg.eigvalsh((traj.states + np.conj(np.swapaxes(traj.states, 1, 2))) / 2)
        assert eigs.min() > -1e-12


def test_ensemble_reproducibility_and_mean(plus_x_state):
    emap = qubit_kraus(Depolarizing())
    w = ExponentialWaiting(rate=0.5)
    s1 = engine.ensemble_average(plus_x_state, emap, w, GRID, 200, base_seed=3)
    s2 = engine.ensemble_average(plus_x_state, emap, w, GRID, 200, base_seed=3)
    assert np.array_equal(s1.observable_means["M_x"], s2.observable_means["M_x"])
    # identical for any thread count (pairwise reduction on gathered arrays)
    s4 = engine.ensemble_average(plus_x_state, emap, w, GRID, 200, base_seed=3, threads=4)
    assert np.array_equal(s1.observable_means["M_x"], s4.observable_means["M_x"])
    assert np.array_equal(s1.mean_state, s4.mean_state)
    # mean equals the plain average of the individual trajectories
    trajs = [
        engine.run_realization(plus_x_state, emap, w, GRID, seed=derive_seed(3, k))
        for k in range(200)
    ]
    manual = np.sum(np.stack([t.observables["M_x"] for t in trajs]), axis=0) / 200
    assert np.array_equal(manual, s1.observable_means["M_x"])


def test_ensemble_identity_kraus_zero_stderr(plus_x_state):
    emap = KrausMap(operators=(np.eye(2, dtype=complex),))
    w = ExponentialWaiting(rate=1.0)
    stats = engine.ensemble_average(plus_x_state, emap, w, GRID, 50, base_seed=1)
    assert np.allclose(stats.observable_means["M_x"], 1.0)
    assert np.allclose(stats.observable_stderrs["M_x"], 0.0)


def test_ensemble_matches_markovian_decay(plus_x_state):
    # Poisson statistics: mean M_z(t) = e^{-2 A1 t} M_z(0)
    emap = qubit_kraus(Depolarizing())
    a1 = 0.5
    rho0 = make_density(np.diag([1.0, 0.0]))
    stats = engine.ensemble_average(
        rho0, emap, ExponentialWaiting(rate=a1), GRID, 10_000, base_seed=42
    )
    expected = np.exp(-2 * a1 * GRID)
    resid = np.abs(stats.observable_means["M_z"] - expected)
    bound = 3.0 * stats.observable_stderrs["M_z"]
    assert np.all(resid <= bound + 1e-12)


def test_stderr_scales_inverse_sqrt(plus_x_state):
    emap = qubit_kraus(Depolarizing())
    w = ExponentialWaiting(rate=0.5)
    s1 = engine.ensemble_average(plus_x_state, emap, w, GRID, 500, base_seed=9)
    s2 = engine.ensemble_average(plus_x_state, emap, w, GRID, 2000, base_seed=9)
    mid = 20  # t = 2, where the survival probability is mid-range
    ratio = s1.observable_stderrs["M_x"][mid] / s2.observable_stderrs["M_x"][mid]
    assert ratio == pytest.approx(2.0, rel=0.25)


def test_renewal_probabilities_poisson_oracle():
    # criterion-7 precursor: product convolution vs the closed form
    a1 = 0.5
    probs = engine.renewal_probabilities(ExponentialWaiting(rate=a1), 10, GRID)
    expected = poisson_table(a1, GRID, 10)
    assert np.max(np.abs(probs.table - expected)) < 1e-8


def test_renewal_probabilities_initial_point():
    probs = engine.renewal_probabilities(HypoexponentialWaiting(r1=0.5, r2=1.5), 5, GRID)
    assert probs.table[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(probs.table[1:, 0], 0.0, atol=1e-12)
    assert np.all(probs.table >= 0.0)
    assert np.all(probs.table <= 1.0 + 1e-12)


def test_renewal_probabilities_ml_survival():
    w = MittagLefflerWaiting(amplitude=1 / np.sqrt(2), alpha=0.5)
    probs = engine.renewal_probabilities(w, None, GRID)
    expected = mittag_leffler(0.5, (1 / np.sqrt(2)) * np.sqrt(GRID))
    assert np.max(np.abs(probs.table[0] - expected)) < 1e-6
    # normalization with the tail bound
    total = probs.table.sum(axis=0) + probs.tail
    assert np.max(np.abs(total - 1.0)) < 1e-8


def test_series_solution_identity_map(plus_x_state):
    # the truncated series misses exactly the renewal tail mass
    emap = KrausMap(operators=(np.eye(2, dtype=complex),))
    states, bound = engine.series_solution(
        plus_x_state, emap, ExponentialWaiting(rate=1.0), GRID, tol=1e-6
    )
    assert np.max(np.abs(states - plus_x_state.matrix[None])) < 1e-6


def test_series_solution_markovian_closed_form(plus_x_state):
    emap = qubit_kraus(Depolarizing())
    a1 = 0.5
    states, _ = engine.series_solution(
        plus_x_state, emap, ExponentialWaiting(rate=a1), GRID
    )
    mx = 2 * states[:, 0, 1].real
    assert np.max(np.abs(mx - np.exp(-a1 * GRID))) < 1e-6


def test_series_solution_fractional_matches_ml(plus_x_state):
    emap = qubit_kraus(Depolarizing())
    amp = 1 / np.sqrt(2)
    w = MittagLefflerWaiting(amplitude=amp, alpha=0.5)
    states, _ = engine.series_solution(plus_x_state, emap, w, GRID, tol=1e-6)
    mx = 2 * states[:, 0, 1].real
    expected = mittag_leffler(0.5, amp * np.sqrt(GRID))
    assert np.max(np.abs(mx - expected)) < 1e-5
    rho0 = make_density(np.diag([1.0, 0.0]))
    states, _ = engine.series_solution(rho0, emap, w, GRID, tol=1e-6)
    mz = states[:, 0, 0].real - states[:, 1, 1].real
    assert np.max(np.abs(mz - mittag_leffler(0.5, 2 * amp * np.sqrt(GRID)))) < 1e-5


def test_series_truncation_error():
    emap = qubit_kraus(Depolarizing())
    rho0 = make_density(np.diag([1.0, 0.0]))
    with pytest.raises(TruncationError):
        engine.series_solution(
            rho0, emap, ExponentialWaiting(rate=1.0), GRID, n_max=2, tol=1e-6
        )


def test_event_count_mean_matches_renewal_mean():
    from ctqrw.kernels import MarkovianKernel, renewal_mean_count

    w = ExponentialWaiting(rate=0.5)
    t_end = 20.0
    n = 4000
    counts = np.array(
        [engine.draw_event_times(w, t_end, stream(77, k)).size for k in range(n)]
    )
    expected = renewal_mean_count(MarkovianKernel(rate=0.5), t_end)
    se = counts.std(ddof=1) / np.sqrt(n)
    assert abs(counts.mean() - expected) < 3 * se


def test_fractional_first_event_time_has_no_scale():
    # heavy tail: the running mean of first-event times grows without bound
    w = MittagLefflerWaiting(amplitude=1 / np.sqrt(2), alpha=0.5)
    rng = stream(123, 0)
    from ctqrw.kernels import sample_waiting

    draws = sample_waiting(w, rng, size=100_000)
    means = [draws[:n].mean() for n in (1000, 10_000, 100_000)]
    assert means[0] < means[1] < means[2]


def test_series_solution_telegraph_matches_closed_form(plus_x_state):
    # resummation of renewal probabilities against the damping-basis route
    from ctqrw import solvers
    from ctqrw.kernels import ExponentialKernel, waiting_from_kernel
    from ctqrw.quantum import damping_basis, lindblad_from_kraus

    kern = ExponentialKernel(amplitude=0.75, decay=2.0)
    emap = qubit_kraus(Depolarizing())
    grid = np.linspace(0.0, 20.0, 201)
    states, _ = engine.series_solution(
        plus_x_state, emap, waiting_from_kernel(kern), grid, tol=1e-7
    )
    gen = lindblad_from_kraus(emap)
    closed = solvers.closed_form_solve(damping_basis(gen), kern, plus_x_state, grid)
    assert np.max(np.abs(states - closed)) < 1e-5


def test_ensemble_agrees_with_series_all_safe_kernels(plus_x_state):
    # Monte Carlo vs deterministic series within 3 stderr for the three
    # stochastically interpretable kernels
    from ctqrw.kernels import (
        ExponentialKernel,
        FractionalKernel,
        MarkovianKernel,
        waiting_from_kernel,
    )

    emap = qubit_kraus(Depolarizing())
    grid = np.linspace(0.0, 20.0, 81)
    for kern in (
        MarkovianKernel(rate=0.5),
        ExponentialKernel(amplitude=0.75, decay=2.0),
        FractionalKernel(amplitude=1 / np.sqrt(2), alpha=0.5),
    ):
        waiting = waiting_from_kernel(kern)
        n_real = 3000
        stats = engine.ensemble_average(plus_x_state, emap, waiting, grid, n_real, base_seed=8)
        states, _ = engine.series_solution(plus_x_state, emap, waiting, grid, tol=1e-7)
        series_mx = 2 * states[:, 0, 1].real
        diff = np.abs(stats.observable_means["M_x"] - series_mx)
        # 3/N covers the zero-count tail where every realization has
        # already scattered and the empirical stderr collapses to zero
        bound = 3 * stats.observable_stderrs["M_x"] + 3.0 / n_real
        assert np.all(diff <= bound), kern
