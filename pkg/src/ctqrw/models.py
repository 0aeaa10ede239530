"""Concrete physical models driven by the renewal dynamics.

Qubit reservoirs with closed-form solutions and CP analysis (depolarizing,
dephasing, thermal / generalized amplitude damping), the Fock-space
displacement walk whose Wigner function performs a classical continuous
time random walk, and the generalized intrinsic-decoherence channel with
random Hamiltonian phases.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import solvers
from .errors import (
    BadMomentsError,
    BadParametersError,
    DangerousKernelError,
    UnsupportedKernelError,
)
from .kernels import (
    ExponentialKernel,
    FractionalKernel,
    MarkovianKernel,
    MemoryKernel,
    classify_kernel,
    sample_waiting,
    waiting_from_kernel,
)
from .quantum import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
    GeneratorMatrix,
    KrausMap,
    dissipator,
)
from .seeding import stream
from .solvers import telegraph_h

# ---------------------------------------------------------------------------
# qubit reservoirs


@dataclass(frozen=True)
class Depolarizing:
    """Scattering by sigma_x / sigma_y with probabilities p_x + p_y = 1."""

    p_x: float = 0.5
    p_y: float = 0.5

    def __post_init__(self):
        if self.p_x < 0 or self.p_y < 0 or abs(self.p_x + self.p_y - 1.0) > 1e-12:
            raise BadParametersError("need p_x, p_y >= 0 with p_x + p_y = 1")


@dataclass(frozen=True)
class Dephasing:
    """Scattering by sigma_z: coherences flip sign, populations untouched."""


@dataclass(frozen=True)
class Thermal:
    """Generalized amplitude damping with strength kappa and level weights.

    Detailed balance sets the temperature through
    p_up / p_down = exp(-beta dE); kappa_tilde is the induced dispersive
    admixture 0.5 (1 - kappa/2 - sqrt(1 - kappa)) in [0, 1/4].
    """

    kappa: float
    p_up: float
    p_down: float

    def __post_init__(self):
        if not (0.0 < self.kappa <= 1.0):
            raise BadParametersError(f"kappa must be in (0, 1], got {self.kappa}")
        if self.p_up < 0 or self.p_down < 0 or abs(self.p_up + self.p_down - 1.0) > 1e-12:
            raise BadParametersError("need p_up, p_down >= 0 with p_up + p_down = 1")

    @property
    def kappa_tilde(self) -> float:
        return 0.5 * (1.0 - self.kappa / 2.0 - np.sqrt(1.0 - self.kappa))


QubitModel = Depolarizing | Dephasing | Thermal


def qubit_kraus(model: QubitModel) -> KrausMap:
    """The scattering map of a qubit reservoir model."""
    if isinstance(model, Depolarizing):
        return KrausMap(
            operators=(np.sqrt(model.p_x) * SIGMA_X, np.sqrt(model.p_y) * SIGMA_Y)
        )
    if isinstance(model, Dephasing):
        return KrausMap(operators=(SIGMA_Z.copy(),))
    if isinstance(model, Thermal):
        k, pu, pd = model.kappa, model.p_up, model.p_down
        c1 = np.sqrt(pu) * np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - k)]], dtype=complex)
        c2 = np.sqrt(pu) * np.array([[0.0, np.sqrt(k)], [0.0, 0.0]], dtype=complex)
        c3 = np.sqrt(pd) * np.array([[np.sqrt(1.0 - k), 0.0], [0.0, 1.0]], dtype=complex)
        c4 = np.sqrt(pd) * np.array([[0.0, 0.0], [np.sqrt(k), 0.0]], dtype=complex)
        ops = tuple(c for c in (c1, c2, c3, c4) if np.max(np.abs(c)) > 0)
        return KrausMap(operators=ops)
    raise BadParametersError(f"unknown qubit model {model!r}")


def thermal_lindblad_parts(model: Thermal):
    """The thermal and dispersive pieces of L = kappa L_th + kappa_tilde L_d.

    L_th is the paper-normalized thermal dissipator
    (p_up/2)([s^dag, . s] + [s^dag ., s]) + (p_down/2)([s, . s^dag] + [s ., s^dag])
    and L_d the dephasing one (1/2)([s_z, . s_z] + [s_z ., s_z]).
    """
    lower = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |down><up|
    raise_ = lower.conj().T
    l_th = 0.5 * model.p_up * dissipator(raise_) + 0.5 * model.p_down * dissipator(lower)
    l_d = 0.5 * dissipator(SIGMA_Z)
    return l_th, l_d


def _model_rates(model: QubitModel):
    """Damping eigenvalues (lam_pop, lam_coh) and equilibrium upper level."""
    if isinstance(model, Depolarizing):
        if abs(model.p_x - 0.5) > 1e-12:
            raise UnsupportedKernelError(
                "closed forms are implemented for p_x = p_y = 1/2; use the generic solvers"
            )
        return 2.0, 1.0, 0.5
    if isinstance(model, Dephasing):
        return 0.0, 2.0, None  # populations frozen
    if isinstance(model, Thermal):
        lam_coh = 1.0 - np.sqrt(1.0 - model.kappa)  # = kappa/2 + 2 kappa_tilde
        return model.kappa, lam_coh, model.p_up
    raise BadParametersError(f"unknown qubit model {model!r}")


@dataclass(frozen=True)
class QubitSolution:
    """Closed-form trajectory of a qubit model.

    ``states[k]`` is rho(grid[k]); populations/coherences are the matrix
    elements in the sigma_z eigenbasis; for the equal-weight depolarizing
    model `g` holds the map decomposition coefficients
    rho(t) = g_I rho0 + sum_j g_j sigma_j rho0 sigma_j whose positivity is
    exactly the CP condition.
    """

    grid: np.ndarray
    states: np.ndarray
    p_up: np.ndarray
    p_down: np.ndarray
    coherence_up: np.ndarray
    coherence_down: np.ndarray
    h_pop: np.ndarray
    h_coh: np.ndarray
    g: dict | None = field(default=None)


def qubit_closed_solution(
    model: QubitModel, kernel: MemoryKernel, rho0, grid
) -> QubitSolution:
    """Populations/coherences under a built-in kernel, in closed form.

    ``P_+(t) = P_eq + (P_+(0) - P_eq) h_pop(t)``,
    ``C(t) = C(0) h_coh(t)``, with the model's damping eigenvalues feeding
    the kernel's decay function (exp / telegraph / Mittag-Leffler).
    """
    grid = np.asarray(grid, dtype=float)
    m = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    if abs(np.trace(m) - 1.0) > 1e-9:
        raise BadParametersError("qubit_closed_solution expects a unit-trace state")
    lam_pop, lam_coh, p_eq = _model_rates(model)
    h_pop = np.asarray(solvers.decay_function(kernel, lam_pop)(grid), dtype=complex).real
    h_coh = np.asarray(solvers.decay_function(kernel, lam_coh)(grid), dtype=complex).real
    p0_up = m[0, 0].real
    p0_down = m[1, 1].real
    if p_eq is None:  # dephasing: populations frozen
        p_up = np.full(grid.shape, p0_up)
        p_down = np.full(grid.shape, p0_down)
    else:
        p_up = p_eq + (p0_up - p_eq) * h_pop
        p_down = (1.0 - p_eq) + (p0_down - (1.0 - p_eq)) * h_pop
    c_up = m[0, 1] * h_coh
    c_down = m[1, 0] * h_coh
    states = np.zeros((grid.size, 2, 2), dtype=complex)
    states[:, 0, 0] = p_up
    states[:, 1, 1] = p_down
    states[:, 0, 1] = c_up
    states[:, 1, 0] = c_down
    g = None
    if isinstance(model, Depolarizing):
        g_i = 0.5 * ((1.0 + h_pop) / 2.0 + h_coh)
        g_x = (1.0 - h_pop) / 4.0
        g_z = 0.5 * ((1.0 + h_pop) / 2.0 - h_coh)
        g = {"g_I": g_i, "g_x": g_x, "g_y": g_x.copy(), "g_z": g_z}
    return QubitSolution(
        grid=grid,
        states=states,
        p_up=p_up,
        p_down=p_down,
        coherence_up=c_up,
        coherence_down=c_down,
        h_pop=h_pop,
        h_coh=h_coh,
        g=g,
    )


# ---------------------------------------------------------------------------
# Fock-space displacement walk


def ladder_operators(dim: int):
    """Truncated annihilation/creation matrices."""
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def displacement_operator(beta: complex, dim: int) -> np.ndarray:
    """exp(beta a^dag - beta* a) on the truncated Fock space (exactly
    unitary: the exponent is skew-Hermitian)."""
    a, adag = ladder_operators(dim)
    return scipy.linalg.expm(beta * adag - np.conj(beta) * a)


def displacement_kraus(beta: complex, dim: int) -> KrausMap:
    return KrausMap(operators=(displacement_operator(beta, dim),))


def second_order_generator(
    mean_beta: complex, mean_beta_sq: complex, mean_abs_sq: float, fock_dim: int
) -> GeneratorMatrix:
    """Second-order moment expansion of the displacement mixture generator.

    ``L ~= [<b> a^dag - <b*> a, .]
          + <|b|^2> (D[a] + D[a^dag])
          - (1/2)<b^2>  (2 a^dag . a^dag - {a^dag a^dag, .})
          - (1/2)<b*^2> (2 a . a - {a a, .})``

    (the adjoint-action expansion of E = <D rho D^dag>; the infinite
    temperature pair carries <|b|^2>, the squeezing pair <b^2>/<b*^2>).
    Raises :class:`BadMomentsError` on inconsistent moments.
    """
    if fock_dim < 2:
        raise BadMomentsError("fock_dim must be >= 2")
    if mean_abs_sq < abs(mean_beta) ** 2 - 1e-12:
        raise BadMomentsError("<|b|^2> < |<b>|^2 is not a valid moment set")
    if abs(mean_beta_sq) > mean_abs_sq + 1e-12:
        raise BadMomentsError("|<b^2>| must not exceed <|b|^2>")
    a, adag = ladder_operators(fock_dim)
    ident = np.eye(fock_dim)
    drift_op = mean_beta * adag - np.conj(mean_beta) * a
    drift = np.kron(ident, drift_op) - np.kron(drift_op.T, ident)

    def anti(op):
        return np.kron((op.conj().T @ op).T, ident) + np.kron(ident, op.conj().T @ op)

    def sandwich(left, right):
        # rho -> left rho right in column stacking: right^T kron left
        return np.kron(right.T, left)

    diff = mean_abs_sq * 0.5 * (dissipator(a) + dissipator(adag))
    sq = -0.5 * mean_beta_sq * (2.0 * sandwich(adag, adag) - np.kron((adag @ adag).T, ident) - np.kron(ident, adag @ adag))
    sq_c = -0.5 * np.conj(mean_beta_sq) * (2.0 * sandwich(a, a) - np.kron((a @ a).T, ident) - np.kron(ident, a @ a))
    return GeneratorMatrix(drift + diff + sq + sq_c, fock_dim)


# jump laws -----------------------------------------------------------------


@dataclass(frozen=True)
class GaussianJumps:
    """Complex Gaussian jumps with moments <b>, <b^2>, <|b|^2>."""

    mean: complex = 0.0
    mean_sq: complex = 0.0
    mean_abs_sq: float = 1.0

    def __post_init__(self):
        c = self.mean_abs_sq - abs(self.mean) ** 2
        p = self.mean_sq - self.mean**2
        if c < -1e-12 or abs(p) > c + 1e-12:
            raise BadMomentsError("inconsistent Gaussian jump moments")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        c = self.mean_abs_sq - abs(self.mean) ** 2
        p = self.mean_sq - self.mean**2
        var_x = max((c + p.real) / 2.0, 0.0)
        var_y = max((c - p.real) / 2.0, 0.0)
        cov = p.imag / 2.0
        cov_mat = np.array([[var_x, cov], [cov, var_y]])
        xy = rng.multivariate_normal([self.mean.real, self.mean.imag], cov_mat, size=n)
        return xy[:, 0] + 1j * xy[:, 1]

    def characteristic(self, k: np.ndarray) -> np.ndarray:
        """E exp(i Re(k conj(b)))."""
        k = np.asarray(k, dtype=complex)
        u, v = k.real, k.imag
        c = self.mean_abs_sq - abs(self.mean) ** 2
        p = self.mean_sq - self.mean**2
        var_x = (c + p.real) / 2.0
        var_y = (c - p.real) / 2.0
        cov = p.imag / 2.0
        quad = var_x * u**2 + var_y * v**2 + 2.0 * cov * u * v
        phase = u * self.mean.real + v * self.mean.imag
        return np.exp(1j * phase - 0.5 * quad)


@dataclass(frozen=True)
class PointMassJumps:
    """Deterministic jump by beta0 at every event."""

    beta0: complex = 0.0

    @property
    def mean_abs_sq(self) -> float:
        return abs(self.beta0) ** 2

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.full(n, complex(self.beta0))

    def characteristic(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        return np.exp(1j * (k.real * self.beta0.real + k.imag * self.beta0.imag))


@dataclass(frozen=True)
class LevyJumps:
    """Isotropic heavy-tailed jumps, characteristic exp(-sigma^mu |k|^mu).

    Sampled sub-Gaussian style: beta = sqrt(A) (g1 + i g2)/sqrt(2) with A a
    positive stable(mu/2) subordinator (Kanter-style draw, validated by a
    Laplace-transform test), g Gaussian.  mu = 2 reduces to the isotropic
    Gaussian.  Second moments diverge for mu < 2.
    """

    mu: float
    sigma: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.mu <= 2.0):
            raise BadParametersError(f"mu must be in (0, 2], got {self.mu}")
        if self.sigma <= 0:
            raise BadParametersError("sigma must be > 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        # beta = 2 sigma sqrt(S) g with S positive stable(mu/2): the Gaussian
        # char exp(-A|k|^2/4) averaged over A = 4 sigma^2 S gives exactly
        # exp(-sigma^mu |k|^mu)
        g = (rng.normal(size=n) + 1j * rng.normal(size=n)) / np.sqrt(2.0)
        if self.mu == 2.0:
            return 2.0 * self.sigma * g
        s = positive_stable(self.mu / 2.0, rng, n)
        return 2.0 * self.sigma * np.sqrt(s) * g

    def characteristic(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=complex)
        return np.exp(-(self.sigma**self.mu) * np.abs(k) ** self.mu)


JumpLaw = GaussianJumps | PointMassJumps | LevyJumps


def positive_stable(a: float, rng: np.random.Generator, n: int) -> np.ndarray:
    """One-sided stable draws with Laplace transform exp(-s^a), 0 < a < 1.

    Kanter's representation: ``S = (A(U)/W)^((1-a)/a)`` with U uniform on
    (0, pi), W exponential(1) and
    ``A(u) = sin(a u)^(a/(1-a)) sin((1-a) u) / sin(u)^(1/(1-a))``;
    validated against the Laplace transform in the tests.
    """
    if not (0.0 < a < 1.0):
        raise BadParametersError("positive_stable needs 0 < a < 1")
    u = rng.uniform(0.0, np.pi, size=n)
    w = rng.exponential(1.0, size=n)
    return (
        np.sin(a * u)
        * np.sin((1.0 - a) * u) ** ((1.0 - a) / a)
        / (np.sin(u) ** (1.0 / a) * w ** ((1.0 - a) / a))
    )


def fourier_mode_rate(jumps: JumpLaw, k) -> np.ndarray:
    """Relaxation rate gamma(k, k*) = 1 - P_hat(k, k*) of a Fourier mode.

    Convention: P_hat(k) = E exp(i Re(k conj(beta))), so the Levy law gives
    exactly exp(-sigma^mu |k|^mu) and the isotropic Gaussian with
    <|b|^2> = c matches the mu = 2 Levy law at sigma^2 = c/4.
    """
    return 1.0 - jumps.characteristic(np.asarray(k, dtype=complex))


@dataclass(frozen=True)
class WignerWalkConfig:
    jumps: JumpLaw
    kernel: MemoryKernel
    n_walkers: int
    initial: complex = 0.0


@dataclass(frozen=True)
class WignerWalkResult:
    grid: np.ndarray
    positions: np.ndarray  # (n_grid, n_walkers) complex
    mean_counts: np.ndarray
    n_estimate: np.ndarray | None  # n(0) + <|b|^2> <N(t)>, finite-moment laws
    radial_bins: np.ndarray
    radial_counts: np.ndarray


def wigner_ctrw(cfg: WignerWalkConfig, grid, base_seed: int, n0: float = 0.0) -> WignerWalkResult:
    """Ensemble of phase-space walkers with renewal jump times.

    Each walker owns a seed-split stream; at every renewal event it jumps
    by a draw from the jump law.  The mean excitation estimate is
    ``n(t) = n(0) + <|b|^2> x (empirical mean event count)``; it is None
    for jump laws without second moments.  Raises
    :class:`DangerousKernelError` for kernels without a waiting density.
    """
    verdict = classify_kernel(cfg.kernel)
    if not verdict.is_safe:
        raise DangerousKernelError(verdict.certificate)
    waiting = waiting_from_kernel(cfg.kernel)
    grid = np.asarray(grid, dtype=float)
    t_end = float(grid[-1])
    n_w = int(cfg.n_walkers)
    positions = np.empty((grid.size, n_w), dtype=complex)
    counts = np.empty((grid.size, n_w), dtype=np.int64)
    chunk = 16
    for wlk in range(n_w):
        rng = stream(base_seed, wlk)
        times = []
        clock = 0.0
        while True:
            draws = sample_waiting(waiting, rng, size=chunk)
            cum = clock + np.cumsum(draws)
            times.append(cum[cum <= t_end])
            clock = float(cum[-1])
            if clock > t_end:
                break
        events = np.concatenate(times)
        jumps = cfg.jumps.sample(rng, events.size)
        path = complex(cfg.initial) + np.concatenate([[0.0 + 0.0j], np.cumsum(jumps)])
        idx = np.searchsorted(events, grid, side="right")
        positions[:, wlk] = path[idx]
        counts[:, wlk] = idx
    mean_counts = counts.mean(axis=1)
    n_est = None
    if not isinstance(cfg.jumps, LevyJumps):
        n_est = n0 + cfg.jumps.mean_abs_sq * mean_counts
    radii = np.abs(positions[-1])
    hist, edges = np.histogram(radii, bins=64)
    return WignerWalkResult(
        grid=grid,
        positions=positions,
        mean_counts=mean_counts,
        n_estimate=n_est,
        radial_bins=edges,
        radial_counts=hist,
    )


# ---------------------------------------------------------------------------
# generalized intrinsic decoherence


@dataclass(frozen=True)
class DeltaPhase:
    """P(tau) = delta(tau - tau_b): every event applies exp(-i H tau_b)."""

    tau_b: float

    def fourier(self, omega):
        return np.exp(-1j * np.asarray(omega) * self.tau_b)

    def sample(self, rng, n):
        return np.full(n, self.tau_b)


@dataclass(frozen=True)
class ExponentialPhase:
    """P(tau) = exp(-tau/tau_b)/tau_b on tau > 0."""

    tau_b: float

    def fourier(self, omega):
        return 1.0 / (1.0 + 1j * np.asarray(omega) * self.tau_b)

    def sample(self, rng, n):
        return rng.exponential(self.tau_b, size=n)


@dataclass(frozen=True)
class LogFormalPhase:
    """Formal-rate preset gamma = ln(1 + i omega tau_b).

    The generating density exp(-tau/tau_b)/tau is not normalizable, so the
    rate is exposed directly rather than derived from a distribution; no
    sampler exists for this preset.
    """

    tau_b: float

    def fourier(self, omega):
        return 1.0 - np.log(1.0 + 1j * np.asarray(omega) * self.tau_b)

    def sample(self, rng, n):
        raise BadParametersError("the logarithmic preset has no normalizable density")


PhaseDistribution = DeltaPhase | ExponentialPhase | LogFormalPhase


@dataclass(frozen=True)
class SpectrumModel:
    """Hamiltonian spectrum (hbar = 1) plus the event-phase distribution."""

    levels: np.ndarray
    phase: PhaseDistribution

    def __post_init__(self):
        lv = np.asarray(self.levels, dtype=float)
        if lv.ndim != 1 or not np.all(np.isfinite(lv)):
            raise BadParametersError("levels must be a finite 1-d array")
        object.__setattr__(self, "levels", lv)

    @property
    def dim(self) -> int:
        return self.levels.size

    def bohr_frequencies(self) -> np.ndarray:
        return self.levels[:, None] - self.levels[None, :]

    def rates(self) -> np.ndarray:
        """gamma_nm = 1 - P_hat(omega_nm); exactly zero on the diagonal."""
        om = self.bohr_frequencies()
        g = 1.0 - self.phase.fourier(om)
        np.fill_diagonal(g, 0.0)
        return g


@dataclass(frozen=True)
class IntrinsicResult:
    grid: np.ndarray
    states: np.ndarray
    rates: np.ndarray


def intrinsic_generator(spectrum: SpectrumModel) -> GeneratorMatrix:
    """Diagonal superoperator L[rho]_nm = -gamma_nm rho_nm."""
    g = spectrum.rates()
    return GeneratorMatrix(np.diag(-g.flatten(order="F")), spectrum.dim)


def intrinsic_decoherence(
    spectrum: SpectrumModel,
    kernel: MemoryKernel,
    rho0,
    grid,
    route: str = "closed",
    n_realizations: int = 2000,
    base_seed: int = 0,
) -> IntrinsicResult:
    """Matrix-element relaxation ``drho_nm/dt = -gamma_nm int K rho_nm``.

    Routes: "closed" evaluates h_{gamma_nm}(t) element-wise (Markovian and
    exponential kernels; the fractional kernel needs a complex-argument
    Mittag-Leffler function and is delegated to the Volterra quadrature),
    "volterra" always uses the quadrature, and "stochastic" samples renewal
    events with random phases (safe kernels).  Populations are conserved
    exactly (gamma_nn = 0).
    """
    grid = np.asarray(grid, dtype=float)
    m = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    if m.shape != (spectrum.dim, spectrum.dim):
        raise BadParametersError("state dimension does not match the spectrum")
    g = spectrum.rates()

    if route == "stochastic":
        verdict = classify_kernel(kernel)
        if not verdict.is_safe:
            raise DangerousKernelError(verdict.certificate)
        waiting = waiting_from_kernel(kernel)
        om = spectrum.bohr_frequencies()
        acc = np.zeros((grid.size, spectrum.dim, spectrum.dim), dtype=complex)
        for r in range(n_realizations):
            rng = stream(base_seed, r)
            events = []
            clock = sample_waiting(waiting, rng)
            while clock <= grid[-1]:
                events.append(clock)
                clock += sample_waiting(waiting, rng)
            events = np.asarray(events)
            taus = spectrum.phase.sample(rng, events.size)
            idx = np.searchsorted(events, grid, side="right")
            # cumulative phase factor after each event
            phases = np.concatenate(
                [[0.0], np.cumsum(taus)]
            )  # total extra Hamiltonian time
            factors = np.exp(-1j * om[None, :, :] * phases[idx][:, None, None])
            acc += factors * m[None, :, :]
        states = acc / n_realizations
        return IntrinsicResult(grid=grid, states=states, rates=g)

    if route == "closed":
        if isinstance(kernel, MarkovianKernel):
            h = np.exp(-kernel.rate * g[None, :, :] * grid[:, None, None])
        elif isinstance(kernel, ExponentialKernel):
            h = np.empty((grid.size, spectrum.dim, spectrum.dim), dtype=complex)
            for n in range(spectrum.dim):
                for mm in range(spectrum.dim):
                    h[:, n, mm] = telegraph_h(grid, g[n, mm], kernel.decay, kernel.amplitude)
        elif isinstance(kernel, FractionalKernel):
            return intrinsic_decoherence(spectrum, kernel, m, grid, route="volterra")
        else:
            raise UnsupportedKernelError("closed intrinsic route needs a built-in kernel")
        states = h * m[None, :, :]
        return IntrinsicResult(grid=grid, states=states, rates=g)

    if route == "volterra":
        gen = intrinsic_generator(spectrum)
        states = solvers.volterra_solve(gen, kernel, m, grid)
        return IntrinsicResult(grid=grid, states=states, rates=g)

    raise BadParametersError(f"unknown route {route!r}")


def milburn_generator(spectrum: SpectrumModel, tau_a: float) -> np.ndarray:
    """Superoperator (1/tau_a)(e^{-iH tau_b} . e^{iH tau_b} - .) for the
    delta-phase preset, used as the reduction oracle."""
    if not isinstance(spectrum.phase, DeltaPhase):
        raise BadParametersError("the Milburn form needs a DeltaPhase spectrum")
    u = np.diag(np.exp(-1j * spectrum.levels * spectrum.phase.tau_b))
    d = spectrum.dim
    return (np.kron(u.conj(), u) - np.eye(d * d)) / tau_a
