"""Truncated mild-solution simulation and the experiments built on it.

The one-step exponential-Euler map is

    X_{k+1} = e^(dtA) X_k + Theta(dt) B(X_k) + xi_k,

with Theta(dt) = integral_0^dt e^(sA) ds in closed form per block and
xi_k an exact Gaussian convolution increment, so the drift-free scheme is
distributionally exact at any step size.  The Picard scheme iterates the
grid Duhamel map with trapezoidal drift weights instead; at zero drift
the two schemes produce bit-identical trajectories.

Experiments: pathwise-uniqueness decay (two schemes on shared noise),
Galerkin truncation gaps, the deterministic two-solutions counterexample,
and the pathwise identity residual that couples a simulated path to a
backward-equation solution.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .drift import Drift, counterexample_pointwise
from .errors import (
    MissingKolmogorovSolution,
    PicardNoConvergence,
    SpectrumMismatch,
    UnsupportedCandidate,
)
from .noise import NoisePath, NoiseSpec, step_covariance_factor
from .spectral import Spectrum

__all__ = [
    "SimGrid",
    "PathPair",
    "simulate_mild",
    "uniqueness_experiment",
    "UniquenessReport",
    "galerkin_convergence",
    "GalerkinReport",
    "counterexample_residual",
    "counterexample_trajectory",
    "ito_tanaka_residual",
    "ItoTanakaReport",
]


@dataclass(frozen=True)
class SimGrid:
    """Uniform time grid with the scheme used to step on it."""

    T: float
    steps: int
    scheme: str = "exponential_euler"
    picard_iterations: int = 80
    picard_tolerance: float = 1e-10

    def __post_init__(self) -> None:
        if self.T <= 0 or self.steps < 1:
            raise ValueError("need T > 0 and steps >= 1")
        if self.scheme not in ("exponential_euler", "picard"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.picard_iterations < 1 or self.picard_tolerance <= 0:
            raise ValueError("picard needs iterations >= 1 and tolerance > 0")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)


def _apply(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Blockwise matrix action, (n,d,d) on (...,n,d)."""
    return np.einsum("nij,...nj->...ni", M, x)


def noise_increments(
    spectrum: Spectrum,
    grid: SimGrid,
    noise: NoiseSpec | None,
    samples: int,
) -> np.ndarray:
    """Exact convolution increments xi ~ N(0, Q_dt), shape (S, steps, n, d).

    noise=None means the deterministic equation (all increments zero).
    """
    n, d = len(spectrum), spectrum.dim
    if noise is None:
        return np.zeros((samples, grid.steps, n, d))
    g = noise.resolve_gamma(spectrum)
    L = step_covariance_factor(spectrum, g, grid.dt)
    path = NoisePath(noise.seed, grid.dt, grid.steps, n * d)
    z = path.batch(samples).reshape(samples, grid.steps, n, d)
    return np.einsum("nij,sknj->skni", L, z)


def _drift_values(drift: Drift | None, x: np.ndarray) -> np.ndarray:
    if drift is None:
        return np.zeros_like(x)
    return drift(x)


def _euler_trajectory(
    spectrum: Spectrum,
    drift: Drift | None,
    grid: SimGrid,
    x0: np.ndarray,
    xi: np.ndarray,
) -> np.ndarray:
    S = xi.shape[0]
    n, d = len(spectrum), spectrum.dim
    E = spectrum.expm_phys(grid.dt)
    Th = spectrum.duhamel_phys(grid.dt)
    X = np.empty((S, grid.steps + 1, n, d))
    X[:, 0] = x0
    for k in range(grid.steps):
        b = _drift_values(drift, X[:, k])
        X[:, k + 1] = _apply(E, X[:, k]) + _apply(Th, b) + xi[:, k]
    return X


def _flow(spectrum: Spectrum, grid: SimGrid, x0: np.ndarray) -> np.ndarray:
    """e^(t_k A) x0 on the grid, (steps+1, n, d)."""
    E = spectrum.expm_phys(grid.dt)
    out = np.empty((grid.steps + 1,) + x0.shape)
    out[0] = x0
    for k in range(grid.steps):
        out[k + 1] = _apply(E, out[k])
    return out


def _convolution_path(spectrum: Spectrum, grid: SimGrid, xi: np.ndarray) -> np.ndarray:
    """Accumulated stochastic convolution from the increments, (S, K+1, n, d)."""
    E = spectrum.expm_phys(grid.dt)
    S = xi.shape[0]
    wa = np.zeros((S, grid.steps + 1) + xi.shape[2:])
    for k in range(grid.steps):
        wa[:, k + 1] = _apply(E, wa[:, k]) + xi[:, k]
    return wa


def _picard_trajectory(
    spectrum: Spectrum,
    drift: Drift | None,
    grid: SimGrid,
    x0: np.ndarray,
    xi: np.ndarray,
    init: str | np.ndarray = "flow",
) -> np.ndarray:
    """Fixed-point iteration of the trapezoidal grid Duhamel map.

    X(t_k) = e^(t_k A) x0 + dt * sum_j''  e^((t_k-t_j)A) B(X(t_j)) + W_A(t_k)

    with trapezoid weights (half at j=0 and j=k).  The running sums
    telescope, so one sweep costs one drift evaluation per grid point.
    """
    if drift is None:
        # same linear recursion as the Euler scheme, bit for bit
        return _euler_trajectory(spectrum, None, grid, x0, xi)
    S = xi.shape[0]
    K = grid.steps
    n, d = len(spectrum), spectrum.dim
    E = spectrum.expm_phys(grid.dt)
    flow = _flow(spectrum, grid, x0)
    wa = _convolution_path(spectrum, grid, xi)
    base = flow[None] + wa
    if isinstance(init, str):
        if init == "flow":
            X = np.broadcast_to(flow, (S, K + 1, n, d)).copy()
        elif init == "x0":
            X = np.broadcast_to(x0, (S, K + 1, n, d)).copy()
        else:
            raise ValueError(f"unknown picard init {init!r}")
    else:
        X = np.broadcast_to(np.asarray(init, dtype=float), (S, K + 1, n, d)).copy()
    scale = max(1.0, float(np.sqrt(np.mean(base[:, -1] ** 2) * n * d)))
    for _ in range(grid.picard_iterations):
        B = drift(X.reshape(S * (K + 1), n, d)).reshape(S, K + 1, n, d)
        # P_k = sum_{j<=k} e^((t_k-t_j)A) B_j ; R_k = e^(t_k A) B_0
        P = np.empty_like(B)
        R = np.empty_like(B)
        P[:, 0] = B[:, 0]
        R[:, 0] = B[:, 0]
        for k in range(1, K + 1):
            P[:, k] = _apply(E, P[:, k - 1]) + B[:, k]
            R[:, k] = _apply(E, R[:, k - 1])
        Xn = base + grid.dt * (P - 0.5 * (B + R))
        dist = float(
            np.max(np.sqrt(grid.dt * np.sum((Xn - X) ** 2, axis=(1, 2, 3))))
        )
        X = Xn
        if dist < grid.picard_tolerance * scale:
            return X
    raise PicardNoConvergence(grid.picard_iterations, dist)


def simulate_mild(
    spectrum: Spectrum,
    drift: Drift | None,
    noise: NoiseSpec | None,
    grid: SimGrid,
    x0: np.ndarray,
    samples: int = 1,
    increments: np.ndarray | None = None,
    picard_init: str | np.ndarray = "flow",
) -> np.ndarray:
    """Trajectories of the truncated mild equation, (S, steps+1, n, d).

    ``increments`` overrides the keyed-noise draw so two schemes can
    consume bit-identical noise.
    """
    if drift is not None and drift.spectrum is not spectrum:
        raise SpectrumMismatch("drift was built on a different spectrum")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (len(spectrum), spectrum.dim):
        raise SpectrumMismatch(
            f"x0 has shape {x0.shape}, spectrum needs {(len(spectrum), spectrum.dim)}"
        )
    if increments is None:
        increments = noise_increments(spectrum, grid, noise, samples)
    if grid.scheme == "picard":
        return _picard_trajectory(spectrum, drift, grid, x0, increments, picard_init)
    return _euler_trajectory(spectrum, drift, grid, x0, increments)


# ---------------------------------------------------------------------------
# path pairs and the uniqueness experiment


def _position_sq_norm(spectrum: Spectrum, x: np.ndarray) -> np.ndarray:
    """Squared field L2 norm of the position component, (..., n, d) -> (...)."""
    if spectrum.spec.is_damped:
        return np.sum(x[..., :, 0] ** 2 / spectrum.mu, axis=-1)
    return np.sum(x[..., :, 0] ** 2, axis=-1)


@dataclass
class PathPair:
    """Two trajectories driven by bit-identical noise."""

    times: np.ndarray
    path1: np.ndarray
    path2: np.ndarray
    noise_checksum: int

    def gap_history(self, spectrum: Spectrum) -> np.ndarray:
        """Mean over samples of the squared position gap, per grid time."""
        return _position_sq_norm(spectrum, self.path1 - self.path2).mean(axis=0)

    def d_metric(self, spectrum: Spectrum) -> np.ndarray:
        """Per-sample trapezoid-in-time integral of the squared position gap."""
        g = _position_sq_norm(spectrum, self.path1 - self.path2)
        return np.trapezoid(g, self.times, axis=1)


def pair_paths(
    spectrum: Spectrum,
    drift: Drift | None,
    noise: NoiseSpec | None,
    grid: SimGrid,
    x0: np.ndarray,
    samples: int,
    schemes: tuple[str, str] = ("exponential_euler", "picard"),
    picard_init: str | np.ndarray = "flow",
) -> PathPair:
    """Run two schemes on the same increments and pair the trajectories."""
    xi = noise_increments(spectrum, grid, noise, samples)
    checksum = zlib.crc32(np.ascontiguousarray(xi).tobytes())
    paths = []
    for scheme in schemes:
        g = SimGrid(
            grid.T, grid.steps, scheme, grid.picard_iterations, grid.picard_tolerance
        )
        paths.append(
            simulate_mild(
                spectrum, drift, noise, g, x0,
                samples=samples, increments=xi, picard_init=picard_init,
            )
        )
    return PathPair(grid.times, paths[0], paths[1], checksum)


@dataclass
class UniquenessReport:
    """Scheme-gap decay D(dt) over a step-size ladder."""

    dts: np.ndarray
    d_mean: np.ndarray
    d_stderr: np.ndarray
    order: float

    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.d_mean) < 0.0))


def uniqueness_experiment(
    spectrum: Spectrum,
    drift: Drift | None,
    noise: NoiseSpec | None,
    T: float,
    steps_ladder: tuple[int, ...],
    x0: np.ndarray,
    samples: int = 256,
    schemes: tuple[str, str] = ("exponential_euler", "picard"),
    picard_init: str | np.ndarray = "flow",
    picard_tolerance: float = 1e-10,
) -> UniquenessReport:
    """D(dt) = mean integral of the squared gap between the paired schemes.

    The fitted log-log order is reported when every level is positive;
    identically zero gaps (zero drift) report order nan.
    """
    dts, means, errs = [], [], []
    for steps in steps_ladder:
        grid = SimGrid(T, steps, picard_tolerance=picard_tolerance)
        init = picard_init
        if callable(picard_init):
            init = picard_init(grid.times)
        pair = pair_paths(
            spectrum, drift, noise, grid, x0, samples,
            schemes=schemes, picard_init=init,
        )
        d = pair.d_metric(spectrum)
        dts.append(grid.dt)
        means.append(float(d.mean()))
        errs.append(float(d.std(ddof=1) / np.sqrt(len(d))) if len(d) > 1 else 0.0)
    dts_a, means_a = np.array(dts), np.array(means)
    if np.all(means_a > 0.0):
        order = float(np.polyfit(np.log(dts_a), np.log(means_a), 1)[0])
    else:
        order = float("nan")
    return UniquenessReport(dts_a, means_a, np.array(errs), order)


# ---------------------------------------------------------------------------
# Galerkin truncation gaps


@dataclass
class GalerkinReport:
    """Truncation gaps against a fixed reference resolution.

    ``gap``: drift evaluated along the reference path (linear sub-systems);
    ``gap_hat``: classical Galerkin, drift on its own truncated path.
    """

    ns: np.ndarray
    gap_mean: np.ndarray
    gap_stderr: np.ndarray
    gap_hat_mean: np.ndarray
    gap_hat_stderr: np.ndarray

    def monotone(self, slack: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.gap_mean) <= slack))


def _state_sq_norm(x: np.ndarray) -> np.ndarray:
    return np.sum(x**2, axis=(-2, -1))


def galerkin_convergence(
    spectrum: Spectrum,
    drift: Drift | None,
    noise: NoiseSpec | None,
    grid: SimGrid,
    n_ladder: tuple[int, ...],
    x0: np.ndarray,
    samples: int = 64,
) -> GalerkinReport:
    """Mean integrated squared state gap to the reference path, per n."""
    N = len(spectrum)
    if max(n_ladder) > N:
        raise SpectrumMismatch(f"ladder reaches {max(n_ladder)} > {N} blocks")
    xi = noise_increments(spectrum, grid, noise, samples)
    ref = simulate_mild(spectrum, drift, noise, grid, x0, samples, increments=xi)
    S, K1 = ref.shape[0], ref.shape[1]
    if drift is not None:
        b_ref = drift(ref.reshape(S * K1, N, -1)).reshape(ref.shape)
    else:
        b_ref = np.zeros_like(ref)
    gaps, gaps_hat = [], []
    for n in n_ladder:
        sub = spectrum.truncate(n)
        E = sub.expm_phys(grid.dt)
        Th = sub.duhamel_phys(grid.dt)
        xn = np.empty((S, K1, n, spectrum.dim))
        xh = np.empty_like(xn)
        xn[:, 0] = x0[:n]
        xh[:, 0] = x0[:n]
        pad = np.zeros((S, N - n, spectrum.dim))
        for k in range(grid.steps):
            xn[:, k + 1] = (
                _apply(E, xn[:, k]) + _apply(Th, b_ref[:, k, :n]) + xi[:, k, :n]
            )
            xh[:, k + 1] = _apply(E, xh[:, k]) + xi[:, k, :n]
            if drift is not None:
                b_own = drift(np.concatenate([xh[:, k], pad], axis=1))[:, :n]
                xh[:, k + 1] += _apply(Th, b_own)
        tail = _state_sq_norm(ref[:, :, n:])
        gap_t = _state_sq_norm(ref[:, :, :n] - xn) + tail
        gap_h_t = _state_sq_norm(ref[:, :, :n] - xh) + tail
        for acc, g in ((gaps, gap_t), (gaps_hat, gap_h_t)):
            d = np.trapezoid(g, grid.times, axis=1)
            err = float(d.std(ddof=1) / np.sqrt(S)) if S > 1 else 0.0
            acc.append((float(d.mean()), err))
    gm, ge = np.array([g[0] for g in gaps]), np.array([g[1] for g in gaps])
    hm, he = np.array([g[0] for g in gaps_hat]), np.array([g[1] for g in gaps_hat])
    return GalerkinReport(np.array(n_ladder), gm, ge, hm, he)


# ---------------------------------------------------------------------------
# deterministic counterexample


_CE_ALPHA = 7.0 / 12.0


def counterexample_residual(
    p_coeffs,
    j: int = 2,
    tau_points: int = 4001,
    xi_points: int = 1025,
) -> float:
    """Grid L2 residual of the forced damped-wave equation on (0, pi).

    The candidate is y(tau, xi) = p(tau) sin(j xi) with p given by its
    polynomial coefficients (low order first).  Only j=2 is supported:
    the nonlinearity is built around the second sine mode.
    """
    if j != 2:
        raise UnsupportedCandidate(
            f"the nonlinearity is tied to the sin(2 xi) mode, got j={j}"
        )
    p = np.polynomial.Polynomial(np.asarray(p_coeffs, dtype=float))
    dp = p.deriv()
    ddp = dp.deriv()
    mu = float(j * j)
    tau = np.linspace(0.0, 1.0, tau_points)
    xi = np.linspace(0.0, np.pi, xi_points)
    lhs = (ddp(tau) + mu**_CE_ALPHA * dp(tau) + mu * p(tau))[:, None] * np.sin(
        j * xi
    )[None, :]
    y = p(tau)[:, None] * np.sin(j * xi)[None, :]
    rhs = counterexample_pointwise(xi[None, :], y)
    res_sq = np.trapezoid(np.trapezoid((lhs - rhs) ** 2, xi, axis=1), tau)
    return float(np.sqrt(res_sq))


def counterexample_trajectory(spectrum: Spectrum, times: np.ndarray) -> np.ndarray:
    """Block coordinates of the nonzero closed-form solution tau^8 sin(2 xi).

    Usable as a Picard initial guess: position coordinate
    mu^(1/2) tau^8 ||sin(2 xi)|| and velocity coordinate 8 tau^7 ||sin(2 xi)||
    on the second block, zero elsewhere.
    """
    n, d = len(spectrum), spectrum.dim
    out = np.zeros((len(times), n, d))
    amp = np.sqrt(np.pi / 2.0)
    out[:, 1, 0] = np.sqrt(spectrum.mu[1]) * np.asarray(times) ** 8 * amp
    out[:, 1, 1] = 8.0 * np.asarray(times) ** 7 * amp
    return out


# ---------------------------------------------------------------------------
# pathwise identity residual


@dataclass
class ItoTanakaReport:
    """Residual statistics of the seven-term pathwise identity."""

    times: np.ndarray
    per_time: np.ndarray
    mean: float
    max: float
    terminal_field_norm: float


def ito_tanaka_residual(
    spectrum: Spectrum,
    drift: Drift | None,
    noise: NoiseSpec | None,
    grid: SimGrid,
    solution,
    x0: np.ndarray,
    samples: int = 32,
) -> ItoTanakaReport:
    """Residual of the pathwise identity along simulated trajectories.

    The drift integral of the mild formula is replaced through the
    backward-equation solution U (solved with the drift as both its
    transport field and its data): flow of (x0 + U(0, x0)), minus U along
    the path, minus the closed-form propagation of U under A, plus the
    gradient-coupled noise integral, plus the stochastic convolution.
    With the left-point reading of the integrals the residual decays
    like sqrt(dt).

    ``solution`` must expose value(t, x) and gradient(t, x) on every grid
    time; drift None with solution None collapses to the mild formula.
    """
    n, d = len(spectrum), spectrum.dim
    dim = n * d
    K = grid.steps
    x0 = np.asarray(x0, dtype=float)
    xi = noise_increments(spectrum, grid, noise, samples)
    X = simulate_mild(spectrum, drift, noise, grid, x0, samples, increments=xi)
    wa = _convolution_path(spectrum, grid, xi)
    E = spectrum.expm_phys(grid.dt)
    S = samples

    def u_val(t: float, x: np.ndarray) -> np.ndarray:
        if solution is None:
            return np.zeros(x.shape[:-2] + (n, d))
        return solution.value(t, x)

    def u_grad(t: float, x: np.ndarray) -> np.ndarray:
        if solution is None:
            return np.zeros(x.shape[:-2] + (dim, dim))
        return solution.gradient(t, x)

    if solution is not None:
        missing = [
            t for t in grid.times
            if np.min(np.abs(np.asarray(solution.times) - t)) > 1e-9 * max(grid.T, 1.0)
        ]
        if missing:
            raise MissingKolmogorovSolution(
                f"{len(missing)} grid times absent from the solution grid"
            )

    u0 = u_val(0.0, x0[None])[0]
    flow_init = _flow(spectrum, grid, x0 + u0)
    # running sums, all (S, n, d) flattened to (S, dim) where matrices act
    t3 = np.zeros((S, n, d))
    t6 = np.zeros((S, n, d))
    per_time = np.zeros(K + 1)
    residual_max = 0.0
    for k in range(K + 1):
        t = grid.times[k]
        uk = u_val(t, X[:, k])
        if k > 0:
            t3 = _apply(E, t3 + u_prev) - u_prev
            t6 = _apply(E, t6) + du_xi_prev
        rhs = flow_init[k] - uk - t3 + t6 + wa[:, k]
        r = np.sqrt(np.sum((X[:, k] - rhs) ** 2, axis=(1, 2)))
        per_time[k] = float(r.mean())
        residual_max = max(residual_max, float(r.max()))
        if k < K:
            du = u_grad(t, X[:, k])  # (S, dim, dim)
            du_xi_prev = np.einsum(
                "sij,sj->si", du, xi[:, k].reshape(S, dim)
            ).reshape(S, n, d)
            u_prev = uk
    if solution is not None:
        z = u_val(grid.T, X[:, -1])
        terminal = float(np.max(np.abs(z)))
    else:
        terminal = 0.0
    return ItoTanakaReport(
        grid.times, per_time, float(per_time.mean()), residual_max, terminal
    )
