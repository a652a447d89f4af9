"""Backward Kolmogorov equations on small spectral truncations.

The vector field U solving the backward integral equation

    U(t, x) = int_t^T R(s - t)[DU(s, .) N(.) + M(.)](x) ds,    U(T, .) = 0,

is computed by a weighted-norm fixed-point iteration.  R is the transition
operator of the drift-free linear dynamics (an Ornstein-Uhlenbeck semigroup
whose covariance is the controllability Gramian), evaluated by tensor
Gauss-Hermite quadrature; each time slice U(t_j, .) is stored as a tensor
Hermite polynomial fitted at the Gauss-Hermite collocation nodes of a box
scaled to four standard deviations of the terminal Gaussian.

Components of U decouple: U_i solves a scalar equation whose data couples
only to its own gradient, so the sweep machinery batches all components and
all time levels of one lag together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.polynomial import hermite_e as herme

from .control import _gamma_of_times, gramian
from .errors import (
    ContractionFailure,
    InvalidSpec,
    MissingKolmogorovSolution,
    PicardNoConvergence,
    QuadratureDegreeTooLow,
    ResidualTooLarge,
)
from .quadrature import gauss_hermite_probabilists, singular_integral
from .spectral import Spectrum

__all__ = [
    "OUKernel",
    "OUGradientReport",
    "ou_apply",
    "ou_gradient",
    "KolmogorovField",
    "solve_backward",
    "ConstantsLedger",
    "constants_ledger",
    "k_profile",
    "drift_field_data",
]


def _dense(blocks: np.ndarray) -> np.ndarray:
    """Block-diagonal embedding of (n, d, d) stacked blocks."""
    return scipy.linalg.block_diag(*blocks)


def _tensor_rule(dim: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensorized probabilists' Gauss-Hermite rule: points (Q, dim), weights (Q,)."""
    z, w = gauss_hermite_probabilists(nodes)
    grids = np.meshgrid(*([z] * dim), indexing="ij")
    Z = np.stack([g.ravel() for g in grids], axis=-1)
    W = w.copy()
    for _ in range(dim - 1):
        W = np.multiply.outer(W, w)
    return Z, W.ravel()


class OUKernel:
    """Gauss-Hermite representation of the transition operator R(t).

    Parameters
    ----------
    spectrum : Spectrum
        Truncated operator; the flat state dimension is len(spectrum) * d.
    gamma : float
        Noise smoothing exponent (forcing is scaled per mode by mu^-gamma).
    t : float
        Transition lag.  The Gaussian covariance is the Gramian Q_t.
    nodes_per_dim : int
        Gauss-Hermite nodes per state dimension; the tensor rule is exact
        for polynomial integrands of degree <= 2 * nodes_per_dim - 1.
    """

    def __init__(self, spectrum: Spectrum, gamma: float, t: float,
                 nodes_per_dim: int = 16):
        self.spectrum = spectrum
        self.gamma = float(gamma)
        self.t = float(t)
        self.dim = len(spectrum) * spectrum.dim
        self.nodes_per_dim = int(nodes_per_dim)
        gset = gramian(spectrum, gamma, t)
        self.mean_map = _dense(gset.expm)
        self.cov = _dense(gset.Q)
        w, v = np.linalg.eigh(self.cov)
        self.cov_sqrt = (v * np.sqrt(np.maximum(w, 0.0))) @ v.T
        self.steer_map = _dense(gset.steer)
        self.gamma_norm = float(np.linalg.svd(self.steer_map, compute_uv=False)[0])
        self.nodes, self.weights = _tensor_rule(self.dim, self.nodes_per_dim)
        self.shifts = self.nodes @ self.cov_sqrt.T

    def moment_defect(self) -> float:
        """Worst error of the rule on Gaussian moments of degree <= 2.

        Checks the weight sum, the mean, and the full second-moment matrix
        of the shift distribution against the covariance (whose trace is the
        usual scalar check).
        """
        d0 = abs(float(self.weights.sum()) - 1.0)
        d1 = float(np.max(np.abs(self.weights @ self.shifts)))
        m2 = np.einsum("q,qi,qj->ij", self.weights, self.shifts, self.shifts)
        d2 = float(np.max(np.abs(m2 - self.cov)))
        return max(d0, d1, d2)


def _shifted_points(kernel: OUKernel, x: np.ndarray) -> np.ndarray:
    """Quadrature points e^{tA}x + Q_t^{1/2} z, shape (B, Q, dim)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[-1] != kernel.dim:
        raise InvalidSpec(f"points have dimension {x.shape[-1]}, kernel has {kernel.dim}")
    return (x @ kernel.mean_map.T)[:, None, :] + kernel.shifts[None]


def ou_apply(kernel: OUKernel, phi, x, require_degree: int | None = None) -> np.ndarray:
    """Apply R(t) to a function by Gauss-Hermite quadrature.

    Parameters
    ----------
    phi : callable
        Maps flat points (P, dim) to values (P,) or (P, k).
    x : array_like
        Evaluation points, (B, dim) or a single (dim,) vector.
    require_degree : int, optional
        Polynomial degree for which exactness is required; raises
        QuadratureDegreeTooLow when the rule cannot deliver it.

    Returns
    -------
    ndarray
        R(t)phi at x, shape (B,) or (B, k) matching phi's output.
    """
    if require_degree is not None and require_degree > 2 * kernel.nodes_per_dim - 1:
        raise QuadratureDegreeTooLow(
            f"rule with {kernel.nodes_per_dim} nodes per dimension is exact to degree "
            f"{2 * kernel.nodes_per_dim - 1}, requested {require_degree}"
        )
    pts = _shifted_points(kernel, x)
    B, Q, dim = pts.shape
    vals = np.asarray(phi(pts.reshape(-1, dim)), dtype=float)
    vals = vals.reshape(B, Q, *vals.shape[1:])
    out = np.einsum("q,bq...->b...", kernel.weights, vals)
    return out


@dataclass(frozen=True)
class OUGradientReport:
    """Malliavin-style derivatives of R(t)phi with bound checks.

    grad_bounded / hess_bounded compare the measured norms against the
    smoothing bounds Gamma_t * sup|phi| and sqrt(2) * Gamma_t^2 * sup|phi|;
    they are None when no sup norm was supplied.
    """

    gradient: np.ndarray          # (B, dim)
    hessian: np.ndarray           # (B, dim, dim)
    gamma: float                  # Gamma_t of the kernel
    grad_norms: np.ndarray        # (B,) Euclidean norms
    hess_norms: np.ndarray        # (B,) spectral norms
    grad_bounded: bool | None
    hess_bounded: bool | None


def ou_gradient(kernel: OUKernel, phi, x, phi_sup: float | None = None) -> OUGradientReport:
    """Gradient and Hessian of R(t)phi for scalar phi.

    The derivatives fall on the quadrature weights rather than on phi:
    with Lambda = Q_t^{-1/2} e^{tA},

        D  R(t)phi(x) = E[phi(pt) Lambda^T z],
        D^2 R(t)phi(x) = E[phi(pt) Lambda^T (z z^T - I) Lambda],

    so bounded phi suffices (no derivatives of phi are taken).
    """
    pts = _shifted_points(kernel, x)
    B, Q, dim = pts.shape
    vals = np.asarray(phi(pts.reshape(-1, dim)), dtype=float).reshape(B, Q)
    lam = kernel.steer_map
    wz = kernel.weights[:, None] * kernel.nodes
    grad = np.einsum("bq,qi->bi", vals, wz) @ lam
    mean = vals @ kernel.weights
    m2 = np.einsum("bq,qi,qj->bij", vals * kernel.weights[None], kernel.nodes, kernel.nodes)
    m2 -= mean[:, None, None] * np.eye(dim)[None]
    hess = np.einsum("ki,bkl,lj->bij", lam, m2, lam)
    hess = 0.5 * (hess + np.swapaxes(hess, -1, -2))
    gnorm = np.linalg.norm(grad, axis=-1)
    hnorm = np.max(np.abs(np.linalg.eigvalsh(hess)), axis=-1)
    gb = hb = None
    if phi_sup is not None:
        gb = bool(np.all(gnorm <= kernel.gamma_norm * phi_sup * (1.0 + 1e-12)))
        hb = bool(np.all(hnorm <= np.sqrt(2.0) * kernel.gamma_norm**2 * phi_sup * (1.0 + 1e-12)))
    return OUGradientReport(grad, hess, kernel.gamma_norm, gnorm, hnorm, gb, hb)


# ---------------------------------------------------------------------------
# collocation polynomial machinery
#
# All coefficient tensors live in the orthonormal basis He_m / sqrt(m!).
# At the rule's own nodes the collocation matrix V satisfies V^T diag(w) V = I
# exactly (the quadrature integrates He_m He_m' for m + m' <= 2n - 2), so the
# fit is a stable weighted transpose instead of an ill-conditioned solve.

_EVAL_SUBS = {
    1: "...a,pa->...p",
    2: "...ab,pa,pb->...p",
    3: "...abc,pa,pb,pc->...p",
    4: "...abcd,pa,pb,pc,pd->...p",
}


def _herme_norms(deg: int) -> np.ndarray:
    fact = np.cumprod(np.concatenate([[1.0], np.arange(1.0, deg + 1.0)]))
    return 1.0 / np.sqrt(fact)


def _vander(u: np.ndarray, deg: int) -> np.ndarray:
    """Vandermonde of the orthonormal probabilists' Hermite basis."""
    return herme.hermevander(u, deg) * _herme_norms(deg)[None, :]


def _poly_eval(coeffs: np.ndarray, vs: list[np.ndarray]) -> np.ndarray:
    """Evaluate tensor-Hermite coefficients (..., n1..nk) at points, -> (..., P)."""
    return np.einsum(_EVAL_SUBS[len(vs)], coeffs, *vs, optimize=True)


def _poly_fit(values: np.ndarray, vinv: np.ndarray, k: int) -> np.ndarray:
    """Fit coefficients from collocation values (..., nodes^k) in C node order."""
    nodes = vinv.shape[0]
    c = values.reshape(values.shape[:-1] + (nodes,) * k)
    for a in range(k):
        axis = c.ndim - k + a
        c = np.moveaxis(np.tensordot(vinv, c, axes=(1, axis)), 0, axis)
    return c


def _d_axis(coeffs: np.ndarray, axis_in_basis: int, k: int, scl: float) -> np.ndarray:
    """Differentiate along one basis axis: (d/du) He_m/sqrt(m!) = sqrt(m) He_{m-1}/sqrt((m-1)!)."""
    axis = coeffs.ndim - k + axis_in_basis
    c = np.moveaxis(coeffs, axis, -1)
    dc = np.zeros_like(c)
    m = np.arange(1.0, c.shape[-1])
    dc[..., :-1] = c[..., 1:] * np.sqrt(m) * scl
    return np.moveaxis(dc, -1, axis)


class KolmogorovField:
    """Collocation solution U(t_j, .) of the backward integral equation.

    value/gradient follow the state layout of the simulator: states are
    (B, n, d) arrays and the flat dimension is n * d in C order.  Evaluation
    outside the collocation box clamps coordinates to the box edge.
    """

    def __init__(self, spectrum: Spectrum, times: np.ndarray, coefficients: np.ndarray,
                 scale: float, node_edge: float, weight_gamma: float,
                 contraction_factor: float, iterate_distances: tuple[float, ...],
                 residual: float, sup_c2_profile: np.ndarray):
        self.spectrum = spectrum
        self.times = times
        self.coefficients = coefficients        # (J+1, dim, nodes^dim tensor)
        self.scale = scale
        self.node_edge = node_edge
        self.weight_gamma = weight_gamma
        self.contraction_factor = contraction_factor
        self.iterate_distances = iterate_distances
        self.residual = residual
        self.sup_c2_profile = sup_c2_profile
        self.dim = coefficients.shape[1]
        self._k = coefficients.ndim - 2
        self._deg = coefficients.shape[-1] - 1
        self._dstack: np.ndarray | None = None

    def _level(self, t: float) -> int:
        j = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[j] - t) > 1e-9 * max(1.0, self.times[-1]):
            raise MissingKolmogorovSolution(
                f"no solution slice at t={t!r}; grid spacing {self.times[1] - self.times[0]!r}"
            )
        return j

    def _vandermondes(self, flat: np.ndarray) -> list[np.ndarray]:
        u = np.clip(flat / self.scale, -self.node_edge, self.node_edge)
        return [_vander(u[:, a], self._deg) for a in range(self._k)]

    def _deriv_stack(self) -> np.ndarray:
        # (k, J+1, dim, basis...) first-derivative coefficients, cached
        if self._dstack is None:
            self._dstack = np.stack(
                [_d_axis(self.coefficients, a, self._k, 1.0 / self.scale)
                 for a in range(self._k)]
            )
        return self._dstack

    def value(self, t: float, x: np.ndarray) -> np.ndarray:
        """U(t, x) for states x of shape (B, n, d); returns the same shape."""
        j = self._level(t)
        shape = x.shape
        flat = np.asarray(x, dtype=float).reshape(shape[0], -1)
        vs = self._vandermondes(flat)
        return _poly_eval(self.coefficients[j], vs).T.reshape(shape)

    def gradient(self, t: float, x: np.ndarray) -> np.ndarray:
        """DU(t, x) as (B, dim, dim): row i holds the gradient of U_i."""
        j = self._level(t)
        flat = np.asarray(x, dtype=float).reshape(x.shape[0], -1)
        vs = self._vandermondes(flat)
        g = _poly_eval(self._deriv_stack()[:, j], vs)   # (k, dim, B)
        return np.transpose(g, (2, 1, 0))


# ---------------------------------------------------------------------------
# constants and contraction factor


def k_profile(spectrum: Spectrum, gamma: float, theta: float, ts: np.ndarray) -> np.ndarray:
    """Smoothing-cost profile K_t = 1 + |e^{tA}|^th G^{1-th} + 2^{(1-th)/2}|e^{tA}|^th G^{2-th}."""
    ts = np.asarray(ts, dtype=float)
    g = _gamma_of_times(spectrum, gamma, ts)
    E = spectrum.expm_phys(ts)
    if E.ndim == 3:
        E = E[None]
    op = np.linalg.svd(E, compute_uv=False)[..., 0].max(axis=1)
    return (1.0 + op**theta * g ** (1.0 - theta)
            + 2 ** ((1.0 - theta) / 2.0) * op**theta * g ** (2.0 - theta))


@dataclass(frozen=True)
class ConstantsLedger:
    """Integrated smoothing constants for one (spectrum, T, theta) choice."""

    T: float
    theta: float
    b_norm: float
    C_T: float                     # integral of K_t over (0, T]
    M_T: float                     # C_T * exp(C_T * b_norm)
    endpoint_exponent: float       # fitted blow-up rate of K_t at t -> 0
    k_times: np.ndarray
    k_values: np.ndarray
    small_T_threshold: float | None  # largest scanned T' with 2 K M^2 < 1


def constants_ledger(spectrum: Spectrum, gamma: float, T: float, theta: float,
                     b_norm: float, k_constant: float | None = None,
                     scan_points: int = 13) -> ConstantsLedger:
    """Compute C_T, M_T and the small-horizon engagement threshold.

    The K_t integrand inherits the Gamma_t endpoint singularity, integrated
    with the same power-law-head scheme as the Gamma integrals (and raising
    DivergentGammaIntegral for non-integrable parameter choices).
    """
    if not 0 < theta < 1:
        raise InvalidSpec(f"need theta in (0,1), got {theta}")

    def f(ts: np.ndarray) -> np.ndarray:
        return k_profile(spectrum, gamma, theta, ts)

    c_t, q = singular_integral(f, T)
    m_t = c_t * float(np.exp(c_t * b_norm))
    k_times = np.geomspace(T * 1e-3, T, 33)
    k_values = f(k_times)

    k_c = b_norm if k_constant is None else float(k_constant)
    threshold = None
    for tp in np.geomspace(T, T / 256.0, scan_points):
        c = singular_integral(f, float(tp))[0]
        m = c * float(np.exp(c * b_norm))
        if 2.0 * k_c * m * m < 1.0:
            threshold = float(tp)
            break
    return ConstantsLedger(T, theta, b_norm, float(c_t), float(m_t), float(q),
                           k_times, k_values, threshold)


def _contraction_factor(spectrum: Spectrum, gamma: float, T: float, theta: float,
                        n_holder: float, weight_gamma: float) -> float:
    """n_holder * integral of e^{-weight_gamma * s} K_s over (0, T]."""

    def f(ts: np.ndarray) -> np.ndarray:
        return np.exp(-weight_gamma * ts) * k_profile(spectrum, gamma, theta, ts)

    return n_holder * singular_integral(f, T)[0]


# ---------------------------------------------------------------------------
# the backward solver


def drift_field_data(drift, spectrum: Spectrum):
    """Adapt a block-state drift to the flat-point callable the solver takes."""
    n, d = len(spectrum), spectrum.dim

    def f(pts: np.ndarray) -> np.ndarray:
        return np.asarray(drift(pts.reshape(-1, n, d))).reshape(-1, n * d)

    return f


def _c2_norms(vals: np.ndarray, grads: np.ndarray, hesses: np.ndarray) -> np.ndarray:
    """Grid C^2 norm per time level: max over components of the three sups.

    vals (J+1, dim, P); grads (k, J+1, dim, P); hesses (k, k, J+1, dim, P).
    The Hessian is measured in Frobenius norm (an upper bound of the
    spectral norm, so bound checks against it are conservative).
    """
    sup_v = np.max(np.abs(vals), axis=-1)                       # (J+1, dim)
    gnorm = np.sqrt(np.sum(grads**2, axis=0))                   # (J+1, dim, P)
    sup_g = np.max(gnorm, axis=-1)
    hnorm = np.sqrt(np.sum(hesses**2, axis=(0, 1)))             # (J+1, dim, P)
    sup_h = np.max(hnorm, axis=-1)
    return np.max(sup_v + sup_g + sup_h, axis=-1)               # (J+1,)


def _eval_bundle(coeffs: np.ndarray, vs: list[np.ndarray], k: int, scale: float):
    """Values, gradients and Hessians of a coefficient stack at given points."""
    vals = _poly_eval(coeffs, vs)
    dstack = np.stack([_d_axis(coeffs, a, k, 1.0 / scale) for a in range(k)])
    grads = _poly_eval(dstack, vs)
    d2 = np.stack([
        np.stack([_d_axis(dstack[a], b, k, 1.0 / scale) for b in range(k)])
        for a in range(k)
    ])
    hesses = _poly_eval(d2, vs)
    return vals, grads, hesses


def solve_backward(spectrum: Spectrum, gamma: float, n_drift, m_data, T: float,
                   steps: int = 64, theta: float = 0.75, n_holder: float = 1.0,
                   m_holder: float | None = None, weight_gamma: float = 1.0,
                   nodes_per_dim: int = 16, tolerance: float = 1e-8,
                   max_iterations: int = 400,
                   weight_gamma_max: float = 2.0**20) -> KolmogorovField:
    """Solve the backward integral equation by weighted fixed-point sweeps.

    Parameters
    ----------
    n_drift, m_data : callable
        Flat-point fields (P, dim) -> (P, dim): the drift N entering through
        DU . N and the data M.  n_holder is the known Holder norm of N used
        in the contraction factor.
    weight_gamma : float
        Starting exponential weight; doubled until the computed contraction
        factor drops below one (ContractionFailure past weight_gamma_max).

    Returns
    -------
    KolmogorovField
        With iterate distances, the engaged contraction factor and the
        plug-back residual attached.

    Notes
    -----
    Convergence and residual are measured in the weighted grid C^2 norm
    sup_j e^{weight_gamma (t_j - T)} (sup|U| + sup|DU| + sup|D2U|)(t_j).
    """
    n, d = len(spectrum), spectrum.dim
    dim = n * d
    if dim > 4:
        raise InvalidSpec(f"state dimension {dim} > 4: tensor collocation would need "
                          f"{nodes_per_dim ** dim} nodes")
    if steps < 1 or T <= 0:
        raise InvalidSpec(f"need steps >= 1 and T > 0, got {steps}, {T}")

    factor = _contraction_factor(spectrum, gamma, T, theta, n_holder, weight_gamma)
    while factor >= 1.0:
        weight_gamma *= 2.0
        if weight_gamma > weight_gamma_max:
            raise ContractionFailure(
                f"no weight below {weight_gamma_max} contracts (factor {factor:.3f} at "
                f"weight {weight_gamma / 2.0})"
            )
        factor = _contraction_factor(spectrum, gamma, T, theta, n_holder, weight_gamma)

    J = int(steps)
    dt = T / J
    times = np.linspace(0.0, T, J + 1)

    z1, w1 = gauss_hermite_probabilists(nodes_per_dim)
    Z, W = _tensor_rule(dim, nodes_per_dim)
    edge = float(np.max(np.abs(z1)))
    q_T = _dense(gramian(spectrum, gamma, T).Q)
    scale = 4.0 * float(np.sqrt(np.linalg.eigvalsh(q_T)[-1])) / edge
    X = scale * Z                                    # collocation points (P, dim)
    P = X.shape[0]
    deg = nodes_per_dim - 1
    Vinv = _vander(z1, deg).T * w1[None, :]          # quadrature inverse

    # per-lag transition data and the (sweep-constant) N, M evaluations
    lag_vs: list[list[np.ndarray]] = []
    lag_n: list[np.ndarray] = []
    lag_m: list[np.ndarray] = []
    grid_vs = [_vander(Z[:, a], deg) for a in range(dim)]
    lag_vs.append(grid_vs)
    lag_n.append(np.asarray(n_drift(X), dtype=float))
    lag_m.append(np.asarray(m_data(X), dtype=float))
    for k in range(1, J + 1):
        gset = gramian(spectrum, gamma, k * dt)
        E = _dense(gset.expm)
        qw, qv = np.linalg.eigh(_dense(gset.Q))
        L = (qv * np.sqrt(np.maximum(qw, 0.0))) @ qv.T
        pts = (X @ E.T)[:, None, :] + (Z @ L.T)[None]     # (P, Q, dim)
        flat = pts.reshape(-1, dim)
        u = np.clip(flat / scale, -edge, edge)
        lag_vs.append([_vander(u[:, a], deg) for a in range(dim)])
        lag_n.append(np.asarray(n_drift(flat), dtype=float))
        lag_m.append(np.asarray(m_data(flat), dtype=float))

    Q = Z.shape[0]
    basis = (nodes_per_dim,) * dim
    coeffs = np.zeros((J + 1, dim) + basis)
    weight = np.exp(weight_gamma * (times - T))

    def sweep(c: np.ndarray) -> np.ndarray:
        dstack = np.stack([_d_axis(c, a, dim, 1.0 / scale) for a in range(dim)])
        out = np.zeros((J + 1, dim, P))
        for k in range(0, J + 1):
            lvals = np.arange(k, J + 1)            # levels entering at this lag
            g = _poly_eval(dstack[:, lvals], lag_vs[k])        # (kdim, L, dim, PQ)
            integ = np.einsum("almp,pa->lmp", g, lag_n[k])     # DU_i . N
            integ += lag_m[k].T[None]                          # + M_i
            if k == 0:
                rk = integ                                     # R(0) direct, (L, dim, P)
            else:
                rk = integ.reshape(len(lvals), dim, P, Q) @ W  # (L, dim, P)
            for j in range(0, J):
                l = j + k
                if l > J:
                    break
                w = dt * (0.5 if (l == j or l == J) else 1.0)
                out[j] += w * rk[l - k]
        return out

    def fit(vals: np.ndarray) -> np.ndarray:
        return _poly_fit(vals, Vinv, dim)

    def weighted_c2_distance(ca: np.ndarray, cb: np.ndarray) -> float:
        diff = ca - cb
        vals, grads, hesses = _eval_bundle(diff, grid_vs, dim, scale)
        return float(np.max(weight * _c2_norms(vals, grads, hesses)))

    distances: list[float] = []
    for _ in range(max_iterations):
        new_coeffs = fit(sweep(coeffs))
        new_coeffs[J] = 0.0
        dist = weighted_c2_distance(new_coeffs, coeffs)
        distances.append(dist)
        coeffs = new_coeffs
        if dist < tolerance:
            break
    else:
        raise PicardNoConvergence(max_iterations, distances[-1])

    res_coeffs = fit(sweep(coeffs))
    res_coeffs[J] = 0.0
    residual = weighted_c2_distance(res_coeffs, coeffs)
    if residual >= 10.0 * tolerance:
        raise ResidualTooLarge(
            f"plug-back residual {residual:.3e} >= 10 x tolerance {tolerance:.1e}"
        )

    vals, grads, hesses = _eval_bundle(coeffs, grid_vs, dim, scale)
    profile = _c2_norms(vals, grads, hesses)
    return KolmogorovField(spectrum, times, coeffs, scale, edge, weight_gamma,
                           factor, tuple(distances), residual, profile)
