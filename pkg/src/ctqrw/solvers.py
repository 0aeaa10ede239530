"""Deterministic solution routes for the memory-kernel master equation.

Four independent paths to ``drho/dt = int_0^t K(t-s) L[rho(s)] ds``:

* ``closed_form_solve``: damping-basis expansion with per-eigenvalue decay
  functions h_lam(t) (exponential / telegraph / Mittag-Leffler);
* ``volterra_solve``: product-integration quadrature of the integrated
  equation (second-order quadratic panels for regular kernels,
  singular-prefix corrected weights for the fractional kernel);
* ``telegraph_ode_solve``: the exponential-kernel dynamics as the
  equivalent second-order ODE system, propagated by one matrix exponential
  per step (an independent check route, exact up to expm);
* ``subordination_solve``: the internal-time integral
  ``rho(t) = int_0^inf P(t,tau) rho^M(tau) dtau`` with P obtained by
  fixed-Talbot inversion.  For exponential kernels no pointwise density
  exists even in the safe regime (hypoexponential renewal counting is
  under-dispersed, so no positive Poisson mixture reproduces it); there the
  same object is evaluated in the Laplace domain by inverting
  ``h_lam(u) = 1/(u + lam Ktilde(u))``.

Plus the short-time linear-entropy laws and the Choi-matrix CP audit of a
solution route.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln, roots_legendre

from . import laplace, special
from .errors import (
    DangerousKernelError,
    SubordinationUnavailableError,
    UnstableStepError,
    UnsupportedKernelError,
)
from .kernels import (
    ExponentialKernel,
    FractionalKernel,
    LaplaceKernel,
    MarkovianKernel,
    MemoryKernel,
    classify_kernel,
    kernel_laplace,
    renewal_mean_count,
)
from .quantum import DampingBasis, DensityMatrix, GeneratorMatrix, KrausMap, choi_of_map, vec

# ---------------------------------------------------------------------------
# decay functions h_lam(t)


def telegraph_h(t, lam, gamma: float, a_eps: float):
    """Exponential-kernel decay factor.

    ``h(t) = e^{-gamma t/2} [cosh(t Phi/2) + (gamma/Phi) sinh(t Phi/2)]``
    with ``Phi = sqrt(gamma^2 - 4 lam a_eps)``; h is even in Phi, so the
    complex square root branch is irrelevant, the oscillatory regime
    Phi^2 < 0 comes out through cosh(i x) = cos(x), and a sinh(z)/z series
    guard removes the cancellation at the degeneracy Phi -> 0.  Accepts
    complex lam.  h(0) = 1, h'(0) = 0.
    """
    t = np.asarray(t, dtype=float)
    phi = np.sqrt(complex(gamma * gamma - 4.0 * complex(lam) * a_eps))
    z = 0.5 * t * phi
    big = np.abs(z.real) > 30.0
    small = np.abs(z) < 1e-6
    z_safe = np.where(small | big, 1.0, z)
    sinhc = np.where(small, 1.0 + z * z / 6.0, np.sinh(z_safe) / z_safe)
    z_mod = np.where(big, 0.0, z)  # the big branch is overwritten below
    out = np.asarray(
        np.exp(-0.5 * gamma * t) * (np.cosh(z_mod) + 0.5 * gamma * t * sinhc), dtype=complex
    )
    if big.any():
        # log-stabilized two-exponential form: both exponents have
        # nonpositive real part for decaying dynamics, so nothing overflows
        ratio = gamma / phi
        e_plus = np.exp(z - 0.5 * gamma * t)
        e_minus = np.exp(-z - 0.5 * gamma * t)
        stable = 0.5 * (1.0 + ratio) * e_plus + 0.5 * (1.0 - ratio) * e_minus
        out = np.where(big, stable, out)
    if np.max(np.abs(out.imag)) <= 1e-12 * max(1.0, np.max(np.abs(out.real))):
        out = out.real
    return out


def markov_h(t, lam, a1: float):
    """Markovian decay factor exp(-lam A1 t)."""
    out = np.exp(-np.asarray(lam) * a1 * np.asarray(t, dtype=float))
    if np.iscomplexobj(out) and np.max(np.abs(out.imag)) <= 1e-12:
        out = out.real
    return out


def fractional_h(t, lam, a_alpha: float, alpha: float):
    """Mittag-Leffler decay factor E_alpha(-lam A_alpha t^alpha), lam real >= 0."""
    lam = _real_rate(lam)
    return special.mittag_leffler(alpha, lam * a_alpha * np.asarray(t, dtype=float) ** alpha)


def _real_rate(lam) -> float:
    lam_c = complex(lam)
    if abs(lam_c.imag) > 1e-10 * max(1.0, abs(lam_c.real)):
        raise UnsupportedKernelError(
            f"complex damping rate {lam_c} unsupported by this decay function"
        )
    return float(lam_c.real)


@dataclass(frozen=True)
class TelegraphDecay:
    """h(t, Phi_lam) of the exponential kernel."""

    gamma: float
    a_eps: float
    lam: complex

    @property
    def phi(self) -> complex:
        return np.sqrt(complex(self.gamma**2 - 4.0 * self.lam * self.a_eps))

    def __call__(self, t):
        return telegraph_h(t, self.lam, self.gamma, self.a_eps)


@dataclass(frozen=True)
class ExponentialDecay:
    """exp(-rate t), the Markovian-kernel factor with rate = lam A1."""

    rate: float

    def __call__(self, t):
        return np.exp(-self.rate * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class MittagLefflerDecay:
    """E_alpha(-rate t^alpha) with rate = lam A_alpha."""

    alpha: float
    rate: float

    def __call__(self, t):
        return special.mittag_leffler(self.alpha, self.rate * np.asarray(t, dtype=float) ** self.alpha)


def decay_function(kernel: MemoryKernel, lam):
    """The h_lam(t) appropriate to a built-in kernel variant."""
    if isinstance(kernel, MarkovianKernel):
        return ExponentialDecay(rate=_real_rate(lam) * kernel.rate)
    if isinstance(kernel, ExponentialKernel):
        return TelegraphDecay(gamma=kernel.decay, a_eps=kernel.amplitude, lam=complex(lam))
    if isinstance(kernel, FractionalKernel):
        return MittagLefflerDecay(alpha=kernel.alpha, rate=_real_rate(lam) * kernel.amplitude)
    raise UnsupportedKernelError("closed-form decay functions exist for built-in kernels only")


# ---------------------------------------------------------------------------
# closed-form route


def _as_batch(rho0):
    m = rho0.matrix if isinstance(rho0, DensityMatrix) else np.asarray(rho0, dtype=complex)
    if m.ndim == 2:
        return m[None, :, :], True
    return m, False


def _unvec_trajectories(y: np.ndarray, dim: int) -> np.ndarray:
    """(n_grid, d^2, n_rhs) column-stacked history -> (n_rhs, n_grid, d, d)."""
    n_grid, _, n_rhs = y.shape
    states = np.transpose(y, (2, 0, 1)).reshape(n_rhs, n_grid, dim, dim)
    return np.swapaxes(states, -1, -2)


def closed_form_solve(basis: DampingBasis, kernel: MemoryKernel, rho0, grid):
    """``rho(t) = sum_lam c_lam h_lam(t) P_lam`` on the grid.

    `rho0` may be one matrix or a batch (n, d, d); returns (n_grid, d, d)
    or (n, n_grid, d, d) accordingly.  Raises
    :class:`UnsupportedKernelError` for kernels without closed-form decay
    functions (use :func:`volterra_solve`).
    """
    grid = np.asarray(grid, dtype=float)
    batch, single = _as_batch(rho0)
    coeffs = np.array([[np.trace(p @ m) for p in basis.dual_ops] for m in batch])
    hs = np.array([np.asarray(decay_function(kernel, lam)(grid), dtype=complex) for lam in basis.rates])
    ops = np.array(basis.right_ops)
    states = np.einsum("nl,lk,lij->nkij", coeffs, hs, ops)
    return states[0] if single else states


# ---------------------------------------------------------------------------
# Volterra quadrature route

_TRACE_DRIFT = 1e-6


def _check_uniform(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    steps = np.diff(grid)
    if grid.size < 2 or grid[0] != 0.0 or not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("this solver needs a uniform grid starting at 0")
    return grid


def _exp_aux_integrals(a: float) -> np.ndarray:
    """I_p(a) = int_0^1 e^{a theta} theta^p dtheta, p = 0, 1, 2."""
    if abs(a) < 1e-5:
        return np.array(
            [
                1.0 + a / 2 + a * a / 6 + a**3 / 24,
                0.5 + a / 3 + a * a / 8 + a**3 / 30,
                1.0 / 3 + a / 4 + a * a / 10 + a**3 / 36,
            ]
        )
    ea = np.exp(a)
    return np.array(
        [
            (ea - 1.0) / a,
            (ea * (a - 1.0) + 1.0) / a**2,
            (ea * (a * a - 2.0 * a + 2.0) - 2.0) / a**3,
        ]
    )


def _regular_kernel_moments(kernel, h: float, n: int) -> np.ndarray:
    """B_p[m] = h int_0^1 R((m + 1 - theta) h) theta^p dtheta, p = 0, 1, 2,
    where R(x) = int_0^x K is the integrated kernel (exact for the
    exponential kernel, per-cell Gauss on Talbot values otherwise)."""
    m = np.arange(n)
    b = np.empty((3, n))
    if isinstance(kernel, ExponentialKernel):
        a_eps, g = kernel.amplitude, kernel.decay
        iv = _exp_aux_integrals(g * h)
        decay = np.exp(-g * (m + 1.0) * h)
        for p in range(3):
            b[p] = h * (a_eps / g) * (1.0 / (p + 1) - decay * iv[p])
        return b
    nodes, wts = roots_legendre(8)
    theta = 0.5 * (nodes + 1.0)
    w = 0.5 * wts
    lags = (m[:, None] + 1.0 - theta[None, :]) * h
    r_vals = laplace.invert(lambda u: kernel_laplace(kernel, u) / u, lags.ravel()).reshape(lags.shape)
    for p in range(3):
        b[p] = h * (r_vals * theta[None, :] ** p * w[None, :]).sum(axis=1)
    return b


def _volterra_regular(gen, kernel, batch, grid):
    """Quadratic product integration of y = y0 + int_0^t R(t-s) G y(s) ds.

    Piecewise-quadratic interpolation of y on node pairs with exact
    product moments of R; the first step uses the linear rule (no forward
    node yet), a one-off O(h^3) contribution.
    """
    h = grid[1] - grid[0]
    n = grid.size - 1
    d2 = gen.matrix.shape[0]
    g_mat = gen.matrix
    b0, b1, b2 = _regular_kernel_moments(kernel, h, n)
    # nodal weights of the quadratic shaped on pair (2i, 2i+1, 2i+2):
    # cell 2i uses xi = theta, cell 2i+1 uses xi = 1 + theta
    w_first = np.stack([(b2 - 3 * b1 + 2 * b0) / 2, 2 * b1 - b2, (b2 - b1) / 2])
    w_second = np.stack([(b2 - b1) / 2, b0 - b2, (b2 + b1) / 2])
    y = np.zeros((n + 1, d2, batch.shape[0]), dtype=complex)
    y[0] = np.stack([vec(b) for b in batch], axis=1)
    gy = np.zeros_like(y)
    gy[0] = g_mat @ y[0]
    # implicit node-k weight: odd k closes with the backward pair's second
    # cell alone; even k also collects the last forward pair's first cell
    # at lag 1
    inv_odd = np.linalg.inv(np.eye(d2) - w_second[2, 0] * g_mat)
    inv_even = (
        np.linalg.inv(np.eye(d2) - (w_second[2, 0] + w_first[2, 1]) * g_mat)
        if n >= 2
        else inv_odd
    )
    inv_lin = np.linalg.inv(np.eye(d2) - b1[0] * g_mat)
    for k in range(1, n + 1):
        w = np.zeros(k + 1)
        if k == 1:
            w[0] = b0[0] - b1[0]
            w[1] = b1[0]
            inv = inv_lin
        else:
            n_paired = k if k % 2 == 0 else k - 1
            # even cells (first of pair) have lags k-1, k-3, ...;
            # odd cells (second of pair) have lags k-2, k-4, ...
            stop_f = k - 1 - n_paired
            stop_s = k - 2 - n_paired
            m_first = slice(k - 1, stop_f if stop_f >= 0 else None, -2)
            m_second = slice(k - 2, stop_s if stop_s >= 0 else None, -2)
            for p in range(3):
                # pair anchored at even cell 2i: its first cell adds
                # w_first[p] and its second cell w_second[p], both to node
                # 2i + p; the slices walk the anchors in ascending order
                # while the lag slices walk m = k-1-cell descending
                w[p : p + n_paired : 2] += w_first[p][m_first]
                w[p : p + n_paired : 2] += w_second[p][m_second]
            if k % 2 == 1:
                # trailing cell k-1 through the backward pair (k-2, k-1, k)
                for p in range(3):
                    w[k - 2 + p] += w_second[p][0]
                inv = inv_odd
            else:
                inv = inv_even
        y[k] = inv @ (y[0] + np.tensordot(w[:k], gy[:k], axes=(0, 0)))
        gy[k] = g_mat @ y[k]
    return y


def _volterra_markovian(gen, kernel, batch, grid):
    prop = scipy.linalg.expm(kernel.rate * (grid[1] - grid[0]) * gen.matrix)
    n = grid.size - 1
    y = np.zeros((n + 1, gen.matrix.shape[0], batch.shape[0]), dtype=complex)
    y[0] = np.stack([vec(b) for b in batch], axis=1)
    for k in range(1, n + 1):
        y[k] = prop @ y[k - 1]
    return y


def _volterra_fractional(gen, kernel, batch, grid, n_subtract: int | None = None):
    """Product integration of the Riemann-Liouville (integrated) form
    ``y = y0 + (A/Gamma(a)) int (t-s)^(a-1) G y ds`` with exact subtraction
    of the leading singular powers.

    Writing y = sum_{k<=m} c_k t^{k a} + phi with the exact short-time
    coefficients c_k = A^k G^k y0 / Gamma(1 + k a), the remainder solves
    ``phi(t) = c_{m+1} t^{(m+1)a} + (A/Gamma(a)) int (t-s)^(a-1) G phi ds``
    and is smooth enough at the origin for linear product integration once
    (m+1) a >= 2.
    """
    alpha, a_amp = kernel.alpha, kernel.amplitude
    h = grid[1] - grid[0]
    n = grid.size - 1
    d2 = gen.matrix.shape[0]
    g_mat = gen.matrix
    if n_subtract is None:
        n_subtract = max(1, int(np.ceil(2.0 / alpha)) - 1)
    m_arr = np.arange(n, dtype=float)
    ha = h**alpha
    up = (m_arr + 1.0) ** alpha
    dn = m_arr**alpha
    d0 = ha * (up - dn) / alpha
    d1 = ha * (
        (m_arr + 1.0) * (up - dn) / alpha
        - ((m_arr + 1.0) ** (alpha + 1.0) - m_arr ** (alpha + 1.0)) / (alpha + 1.0)
    )
    c_pref = a_amp / np.exp(gammaln(alpha))
    y0 = np.stack([vec(b) for b in batch], axis=1)
    c_vecs = [y0.astype(complex)]
    for k in range(1, n_subtract + 2):
        c_vecs.append(
            a_amp
            * (g_mat @ c_vecs[-1])
            * np.exp(gammaln(1 + (k - 1) * alpha) - gammaln(1 + k * alpha))
        )
    t_pows = np.array([grid ** (k * alpha) for k in range(n_subtract + 2)])
    lhs_inv = np.linalg.inv(np.eye(d2) - c_pref * d1[0] * g_mat)
    phi = np.zeros((n + 1, d2, batch.shape[0]), dtype=complex)
    gphi = np.zeros_like(phi)
    top = c_vecs[n_subtract + 1]
    for k in range(1, n + 1):
        w_prev = (d0 - d1)[:k][::-1]  # pairs with gphi[0..k-1]
        conv = np.tensordot(w_prev, gphi[:k], axes=(0, 0))
        if k > 1:
            w_next = d1[1:k][::-1]  # pairs with gphi[1..k-1]
            conv += np.tensordot(w_next, gphi[1:k], axes=(0, 0))
        phi[k] = lhs_inv @ (t_pows[n_subtract + 1][k] * top + c_pref * conv)
        gphi[k] = g_mat @ phi[k]
    series = np.einsum("kt,kdr->tdr", t_pows[: n_subtract + 1].astype(complex), np.stack(c_vecs[: n_subtract + 1]))
    return series + phi


def volterra_solve(gen: GeneratorMatrix, kernel: MemoryKernel, rho0, grid):
    """Quadrature solution of the memory master equation on a uniform grid.

    Markovian kernels step with the exact matrix exponential; regular
    kernels (exponential, custom) use second-order product integration of
    the integrated form; the fractional kernel uses singular-prefix
    corrected product integration (at least first-order accurate; in
    practice close to second order).  `rho0` may be a single matrix or a
    batch (n, d, d).  Raises :class:`UnstableStepError` on trace drift
    beyond 1e-6.
    """
    grid = _check_uniform(grid)
    batch, single = _as_batch(rho0)
    if isinstance(kernel, MarkovianKernel):
        y = _volterra_markovian(gen, kernel, batch, grid)
    elif isinstance(kernel, FractionalKernel):
        y = _volterra_fractional(gen, kernel, batch, grid)
    elif isinstance(kernel, (ExponentialKernel, LaplaceKernel)):
        y = _volterra_regular(gen, kernel, batch, grid)
    else:
        raise UnsupportedKernelError(f"unknown kernel {kernel!r}")
    states = _unvec_trajectories(y, gen.dim)
    traces = np.einsum("nkii->nk", states).real
    trace0 = np.einsum("nii->n", batch).real
    drift = np.max(np.abs(traces - trace0[:, None]))
    if drift > _TRACE_DRIFT * max(1.0, float(np.max(np.abs(trace0)))):
        raise UnstableStepError(f"trace drift {drift:.2e} exceeds {_TRACE_DRIFT:g}")
    return states[0] if single else states


def telegraph_ode_solve(gen: GeneratorMatrix, kernel: ExponentialKernel, rho0, grid):
    """Check route: the exponential-kernel equation as a second-order ODE.

    ``rho'' + gamma rho' = A_eps L rho`` with ``rho(0) = rho0,
    rho'(0) = 0``, propagated by the matrix exponential of the companion
    block on each uniform step (exact up to expm rounding).
    """
    if not isinstance(kernel, ExponentialKernel):
        raise UnsupportedKernelError("telegraph_ode_solve applies to exponential kernels")
    grid = _check_uniform(grid)
    batch, single = _as_batch(rho0)
    d2 = gen.matrix.shape[0]
    block = np.zeros((2 * d2, 2 * d2), dtype=complex)
    block[:d2, d2:] = np.eye(d2)
    block[d2:, :d2] = kernel.amplitude * gen.matrix
    block[d2:, d2:] = -kernel.decay * np.eye(d2)
    prop = scipy.linalg.expm((grid[1] - grid[0]) * block)
    state = np.zeros((grid.size, 2 * d2, batch.shape[0]), dtype=complex)
    state[0, :d2] = np.stack([vec(b) for b in batch], axis=1)
    for k in range(1, grid.size):
        state[k] = prop @ state[k - 1]
    states = _unvec_trajectories(state[:, :d2, :], gen.dim)
    return states[0] if single else states


# ---------------------------------------------------------------------------
# subordination route


@dataclass(frozen=True)
class DeltaLine:
    """Symbolic P(t, tau) = delta(tau - location) (Markovian kernel)."""

    location: float


def _subordination_mode(kernel: MemoryKernel) -> str:
    if isinstance(kernel, MarkovianKernel):
        return "delta"
    if isinstance(kernel, FractionalKernel):
        return "density"
    if isinstance(kernel, ExponentialKernel):
        if kernel.discriminant < 0:
            raise DangerousKernelError(
                "dangerous exponential kernel: subordination requires a stochastically "
                "interpretable kernel"
            )
        return "laplace"
    if isinstance(kernel, LaplaceKernel):
        verdict = classify_kernel(kernel)
        if not verdict.is_safe:
            raise DangerousKernelError(verdict.certificate)
        return "density"
    raise UnsupportedKernelError(f"unknown kernel {kernel!r}")


def _density_at(kernel: MemoryKernel, t: float, taus: np.ndarray, n_nodes: int = 32) -> np.ndarray:
    """P(t, tau) for many tau at one t, sharing the Talbot contour."""
    theta, cot, sigma = laplace.talbot_nodes(n_nodes)
    r = 2.0 * n_nodes / (5.0 * t)
    s = r * theta * (cot + 1j)  # (m-1,)
    ks = kernel_laplace(kernel, s)
    kr = kernel_laplace(kernel, np.array([r + 0j]))[0]
    pf_nodes = np.exp(-taus[:, None] * s[None, :] / ks[None, :]) / ks[None, :]
    terms = np.real(np.exp(s * t)[None, :] * pf_nodes * (1.0 + 1j * sigma)[None, :])
    head = 0.5 * np.exp(r * t) * np.real(np.exp(-taus * r / np.real(kr)) / np.real(kr))
    return (r / n_nodes) * (head + terms.sum(axis=1))


def subordination_pdf(kernel: MemoryKernel, t: float, tau):
    """Internal-time density P(t, tau) via fixed-Talbot inversion of
    ``(1/Ktilde(u)) exp(-tau u/Ktilde(u))``.

    Markovian kernels return the symbolic :class:`DeltaLine` at
    ``tau = A1 t``.  Exponential kernels raise
    :class:`SubordinationUnavailableError` (no pointwise density exists
    even in the safe regime; see :func:`subordination_solve`).  Dangerous
    kernels raise :class:`DangerousKernelError`.
    """
    mode = _subordination_mode(kernel)
    if mode == "delta":
        return DeltaLine(location=kernel.rate * float(t))
    if mode == "laplace":
        raise SubordinationUnavailableError(
            "the exponential kernel admits no pointwise subordination density "
            "(under-dispersed renewal counting); use subordination_solve"
        )
    if t <= 0:
        raise ValueError("t must be > 0")
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    out = _density_at(kernel, float(t), tau_arr)
    return float(out[0]) if np.isscalar(tau) or getattr(tau, "ndim", 1) == 0 else out


def _tau_quadrature(tau_max: float, n_panels: int = 24, n_nodes: int = 10):
    nodes, wts = roots_legendre(n_nodes)
    edges = np.linspace(0.0, tau_max, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    return (mid + half * nodes[None, :]).ravel(), (half * wts[None, :]).ravel()


def _second_moment(kernel: MemoryKernel, t: float) -> float:
    """int tau^2 P(t, tau) dtau = L^-1[2 Ktilde^2/u^3](t)."""
    if isinstance(kernel, FractionalKernel):
        return (
            2.0
            * kernel.amplitude**2
            * t ** (2 * kernel.alpha)
            / np.exp(gammaln(1 + 2 * kernel.alpha))
        )
    return float(laplace.invert(lambda u: 2.0 * kernel_laplace(kernel, u) ** 2 / u**3, t))


def subordination_solve(kernel: MemoryKernel, basis: DampingBasis, rho0, grid):
    """``rho(t) = int_0^inf P(t,tau) rho^M(tau) dtau`` on the grid.

    The lam = 0 sector integrates exactly to one by normalization of P;
    each decaying sector gets ``h_lam(t) = int P(t,tau) e^{-lam tau} dtau``
    by panel quadrature against the Talbot-inverted density (fractional and
    CM-verified custom kernels), truncated where both the density mass and
    the e^{-lam tau} weight are negligible.  Safe exponential kernels use
    the Laplace-domain form instead (see module docstring); dangerous
    kernels raise :class:`DangerousKernelError`.
    """
    mode = _subordination_mode(kernel)
    grid = np.asarray(grid, dtype=float)
    batch, single = _as_batch(rho0)
    coeffs = np.array([[np.trace(p @ m) for p in basis.dual_ops] for m in batch])
    ops = np.array(basis.right_ops)
    lams = basis.rates
    zero = np.abs(lams) < 1e-12
    live = np.where(~zero)[0]

    hs = np.ones((lams.size, grid.size), dtype=complex)
    if live.size:
        if mode == "delta":
            for i in live:
                hs[i] = np.exp(-lams[i] * kernel.rate * grid)
        elif mode == "laplace":
            for i in live:

                def htilde(u, _lam=lams[i]):
                    return 1.0 / (u + _lam * kernel_laplace(kernel, u))

                vals = np.ones(grid.size, dtype=complex)
                pos = grid > 0
                vals[pos] = laplace.invert(htilde, grid[pos])
                hs[i] = vals
        else:
            lam_min = float(np.min(np.real(lams[live])))
            for k, t in enumerate(grid):
                if t <= 0:
                    continue
                m1 = float(renewal_mean_count(kernel, float(t)))
                m2 = _second_moment(kernel, float(t))
                sigma = np.sqrt(max(m2 - m1 * m1, 1e-30))
                tau_max = max(min(m1 + 12.0 * sigma, m1 + 30.0 / lam_min), 1e-6)
                taus, weights = _tau_quadrature(tau_max)
                p_vals = _density_at(kernel, float(t), taus)
                for i in live:
                    hs[i, k] = np.sum(weights * p_vals * np.exp(-np.real(lams[i]) * taus))
    states = np.einsum("nl,lk,lij->nkij", coeffs, hs, ops)
    return states[0] if single else states


# ---------------------------------------------------------------------------
# short-time entropy and CP audit


@dataclass(frozen=True)
class ShortTimeEntropy:
    """Leading-order linear-entropy law delta(t) ~ prefactor * t^exponent."""

    coefficient: float
    exponent: float
    prefactor: float

    def law(self, t):
        return self.prefactor * np.asarray(t, dtype=float) ** self.exponent


def short_time_entropy(emap: KrausMap, psi, kernel: MemoryKernel) -> ShortTimeEntropy:
    """Scattering spread ``<<E>> = sum_i <Ci^dag Ci> - <Ci^dag><Ci>`` of a
    pure state, and the induced leading small-t law of
    ``delta(t) = 1 - Tr[rho^2]``:

    fractional ``2 A_alpha t^alpha/Gamma(1+alpha) <<E>>``, exponential
    ``A_eps t^2 <<E>>``, Markovian ``2 A1 t <<E>>`` (the alpha -> 1 case).
    """
    ket = np.asarray(psi, dtype=complex).ravel()
    ket = ket / np.linalg.norm(ket)
    coeff = 0.0
    for c in emap.operators:
        coeff += float(np.real(ket.conj() @ (c.conj().T @ c) @ ket))
        coeff -= abs(complex(ket.conj() @ (c @ ket))) ** 2
    if isinstance(kernel, FractionalKernel):
        expo = kernel.alpha
        pref = 2.0 * kernel.amplitude / np.exp(gammaln(1.0 + kernel.alpha)) * coeff
    elif isinstance(kernel, ExponentialKernel):
        expo = 2.0
        pref = kernel.amplitude * coeff
    elif isinstance(kernel, MarkovianKernel):
        expo = 1.0
        pref = 2.0 * kernel.rate * coeff
    else:
        raise UnsupportedKernelError("short-time laws exist for built-in kernels")
    return ShortTimeEntropy(coefficient=coeff, exponent=expo, prefactor=pref)


def cp_defect_over_time(solve, dim: int, grid) -> np.ndarray:
    """Minimum Choi eigenvalue of the solution map at every grid point.

    `solve` maps a batch (n, d, d) of initial operators to trajectories
    (n, n_grid, d, d); all d^2 matrix units are propagated at once and the
    time-t map assembled from their images.  A value below -1e-9 certifies
    loss of complete positivity well beyond quadrature noise.
    """
    grid = np.asarray(grid, dtype=float)
    units = np.zeros((dim * dim, dim, dim), dtype=complex)
    for j in range(dim):
        for l in range(dim):
            units[j * dim + l, j, l] = 1.0
    images = solve(units)
    defects = np.empty(grid.size)
    for k in range(grid.size):
        imgs = images[:, k]

        def action(m, _imgs=imgs):
            return np.tensordot(m.ravel(), _imgs.reshape(dim * dim, dim, dim), axes=(0, 0))

        _, defects[k] = choi_of_map(action, dim)
    return defects
