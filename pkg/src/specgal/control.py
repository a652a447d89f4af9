"""Controllability Gramians, steering norms, and explicit steering controls.

Per block the controllability Gramian of the pair (A_k, G_k) is

    Q_k(t) = integral_0^t e^(sA_k) G_k G_k^T e^(sA_k^T) ds,

computed in closed form through the eigen chart: with v(s) = e^(sA)g real,
Q = P M P^T where M_ij = ge_i * ge_j * (e^((li+lj)t) - 1)/(li+lj) and
ge = Pinv g.  The steering norm Gamma_t is the largest singular value of
Q_k(t)^(-1/2) e^(tA_k) over the blocks; its powers integrate against the
singular endpoint with an analytic power-law head.

The explicit steering control for the damped families is the feedback

    u(tau) = K1 psi(tau) + K2 psi'(tau),    psi(tau) = -Phi_t(tau) e^(tauA) h,

with the bump Phi_t(tau) = c * tau^mbar * (t - tau) normalized to unit
integral, and per-block gains K1(k1,k2) = rho*mu^(a-1/2+g)*k1 + mu^g*k2,
K2(k1,k2) = mu^(g-1/2)*k1.  These satisfy G K1 + A G K2 = Id exactly, so
after integration by parts the terminal state is -(integral Phi) e^(tA)h +
e^(tA)h = 0; the only numerical error is quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegreeTooSmall,
    GridTooCoarse,
    RangeViolation,
    SingularGramian,
)
from .quadrature import gauss_legendre_panels, singular_integral
from .spectral import SpectralField, Spectrum

__all__ = [
    "GramianSet",
    "gramian",
    "gamma_norm",
    "GammaReport",
    "gamma_integral",
    "GammaIntegralReport",
    "minimal_energy",
    "ControlSignal",
    "synthesize_control",
    "verify_steering",
    "worst_case_energy",
    "default_profile_degree",
]


def _expm1c(z: np.ndarray) -> np.ndarray:
    """expm1 for complex arrays without cancellation for small |z|."""
    x, y = z.real, z.imag
    ex = np.expm1(x)
    return (ex * np.cos(y) - 2.0 * np.sin(y / 2.0) ** 2) + 1j * (np.exp(x) * np.sin(y))


def _gramian_raw(spectrum: Spectrum, gamma: float, ts: np.ndarray) -> np.ndarray:
    """Gramian blocks for an array of times.  Returns (T, n, d, d) real."""
    g_phys = spectrum.forcing_phys(gamma)  # (n, d)
    ge = np.einsum("nij,nj->ni", spectrum.Pinv, g_phys.astype(complex))  # (n, d)
    z = spectrum.eig[:, :, None] + spectrum.eig[:, None, :]  # (n, d, d)
    e = _expm1c(z[None, :, :, :] * ts[:, None, None, None]) / z[None, :, :, :]
    m = ge[:, :, None] * ge[:, None, :]
    core = m[None, :, :, :] * e
    q = np.einsum("nij,tnjk,nlk->tnil", spectrum.P, core, spectrum.P)
    q = q.real
    return 0.5 * (q + np.swapaxes(q, -1, -2))


@dataclass(eq=False)
class GramianSet:
    """Per-block Gramian data at a single time t."""

    spectrum: Spectrum
    gamma: float
    t: float
    Q: np.ndarray          # (n, d, d) real symmetric
    Qinv_sqrt: np.ndarray  # (n, d, d)
    expm: np.ndarray       # (n, d, d) = e^(tA) per block
    steer: np.ndarray      # (n, d, d) = Qinv_sqrt @ expm

    @property
    def gamma_profile(self) -> np.ndarray:
        return np.linalg.svd(self.steer, compute_uv=False)[:, 0]


def _inv_sqrt_psd(Q: np.ndarray, context: str) -> np.ndarray:
    """Batched inverse square root of symmetric positive definite blocks."""
    w, v = np.linalg.eigh(Q)
    bad = ~np.isfinite(w[..., 0]) | (w[..., 0] <= 0.0)
    if np.any(bad):
        k = int(np.argwhere(bad)[0][-1])
        raise SingularGramian(k, context)
    return np.einsum("...ij,...j,...kj->...ik", v, w**-0.5, v)


def gramian(spectrum: Spectrum, gamma: float, t: float) -> GramianSet:
    """Controllability Gramian blocks Q_k(t) with their inverse square roots.

    Raises SingularGramian(k) when a block is numerically semi-definite
    (underflow at tiny t against huge mu, or extreme noise smoothing).
    """
    if t <= 0:
        raise ValueError(f"need t > 0, got {t}")
    Q = _gramian_raw(spectrum, gamma, np.array([t]))[0]
    Qis = _inv_sqrt_psd(Q, f"t={t!r}, gamma={gamma!r}")
    E = spectrum.expm_phys(t)
    steer = Qis @ E
    return GramianSet(spectrum, gamma, t, Q, Qis, E, steer)


@dataclass(frozen=True)
class GammaReport:
    value: float            # Gamma_{t,n} = max over blocks
    profile: np.ndarray     # per-block operator norms
    argmax_block: int


def gamma_norm(gset: GramianSet) -> GammaReport:
    """Steering norm Gamma_{t,n} and the per-block profile it maximizes."""
    prof = gset.gamma_profile
    k = int(np.argmax(prof))
    return GammaReport(float(prof[k]), prof, k)


def _gamma_of_times(spectrum: Spectrum, gamma: float, ts: np.ndarray) -> np.ndarray:
    Q = _gramian_raw(spectrum, gamma, ts)
    Qis = _inv_sqrt_psd(Q, "gamma profile scan")
    E = spectrum.expm_phys(ts)
    sv = np.linalg.svd(Qis @ E, compute_uv=False)[..., 0]
    return sv.max(axis=1)


@dataclass(frozen=True)
class GammaIntegralReport:
    value: float
    theta: float
    endpoint_exponent: float   # fitted blow-up rate q of Gamma_s^(2-theta)
    t_max: float


def gamma_integral(
    spectrum: Spectrum,
    gamma: float,
    t_max: float,
    theta: float,
    t_min_factor: float = 1e-4,
    n_panels: int = 48,
    n_nodes: int = 12,
) -> GammaIntegralReport:
    """Integral of Gamma_{s,n}^(2-theta) over (0, t_max].

    The body uses log-spaced composite Gauss-Legendre; the endpoint head is
    integrated analytically from a power-law fit.  Raises
    DivergentGammaIntegral when the fitted endpoint exponent is >= 1.
    """
    if not 0 < theta < 1:
        raise ValueError(f"need theta in (0,1), got {theta}")

    def f(ts: np.ndarray) -> np.ndarray:
        return _gamma_of_times(spectrum, gamma, ts) ** (2.0 - theta)

    val, q = singular_integral(f, t_max, t_min_factor, n_panels, n_nodes)
    return GammaIntegralReport(val, theta, q, t_max)


def _as_block_coeffs(spectrum: Spectrum, h) -> np.ndarray:
    if isinstance(h, SpectralField):
        return h.real_phys()
    arr = np.asarray(h, dtype=float)
    return arr.reshape(len(spectrum), spectrum.dim)


def minimal_energy(gset: GramianSet, h) -> float:
    """Minimal L^2 norm of a control steering h to 0 at time t.

    Equals ||Q_t^(-1/2) e^(tA) h|| summed over blocks in quadrature.
    """
    hb = _as_block_coeffs(gset.spectrum, h)
    v = np.einsum("nij,nj->ni", gset.steer, hb)
    return float(np.linalg.norm(v))


def default_profile_degree(alpha: float, gamma: float) -> int:
    """Smallest admissible bump degree plus one.

    The degree constraint keeps the control energy integrable:
    2*mbar > 2*p - 1 with p = (gamma+alpha-1/2)/(1-alpha) for alpha >= 1/2,
    and 2*mbar > 4*gamma - 1 for alpha <= 1/2.
    """
    if alpha >= 0.5:
        p = (gamma + alpha - 0.5) / (1.0 - alpha)
        bound = p - 0.5
    else:
        bound = 2.0 * gamma - 0.5
    m_min = max(1, math.floor(bound) + 1)
    if not 2 * m_min > 2 * bound:  # exact-boundary guard
        m_min += 1
    return m_min + 1


def _check_degree(alpha: float, gamma: float, mbar: int) -> None:
    if alpha >= 0.5:
        p = (gamma + alpha - 0.5) / (1.0 - alpha)
        ok = 2 * mbar > 2 * p - 1
    else:
        ok = 2 * mbar > 4 * gamma - 1
    if not ok or mbar < 1:
        raise DegreeTooSmall(
            f"profile degree mbar={mbar} too small for alpha={alpha}, gamma={gamma}"
        )


@dataclass(eq=False)
class ControlSignal:
    """A steering control sampled on its own composite Gauss rule."""

    spectrum: Spectrum
    gamma: float
    h: np.ndarray         # (n, 2) initial state, physical chart
    t: float
    mbar: int
    nodes: np.ndarray     # (N,) quadrature nodes in (0, t)
    weights: np.ndarray   # (N,) quadrature weights
    values: np.ndarray    # (N, n) control input per block

    @property
    def energy(self) -> float:
        return float(np.sqrt(np.dot(self.weights, np.sum(self.values**2, axis=1))))


def _control_values(
    spectrum: Spectrum, gamma: float, hb: np.ndarray, t: float, mbar: int, taus: np.ndarray
) -> np.ndarray:
    """u(tau) for every block, (N, n) real."""
    mu, alpha, rho = spectrum.mu, spectrum.spec.alpha, spectrum.spec.rho
    cbar = (mbar + 1) * (mbar + 2) / t ** (mbar + 2)
    phi = cbar * taus**mbar * (t - taus)
    dphi = cbar * (mbar * taus ** (mbar - 1) * (t - taus) - taus**mbar)
    he = np.einsum("nij,nj->ni", spectrum.Pinv, hb.astype(complex))  # eigen coords of h
    ph = np.exp(spectrum.eig[None, :, :] * taus[:, None, None]) * he[None, :, :]
    flow = np.einsum("nij,tnj->tni", spectrum.P, ph).real  # (N, n, 2) = e^(tauA)h
    aflow = np.einsum("nij,tnj->tni", spectrum.A_phys, flow)  # A e^(tauA) h
    psi = -phi[:, None, None] * flow
    dpsi = -dphi[:, None, None] * flow - phi[:, None, None] * aflow
    k1 = rho * mu ** (alpha - 0.5 + gamma) * psi[:, :, 0] + mu**gamma * psi[:, :, 1]
    k2 = mu ** (gamma - 0.5) * dpsi[:, :, 0]
    return k1 + k2


def synthesize_control(
    spectrum: Spectrum,
    h,
    t: float,
    gamma: float | None = None,
    mbar: int | None = None,
    n_panels: int = 64,
    n_nodes: int = 64,
) -> ControlSignal:
    """Explicit control steering h to zero at time t for a damped family.

    gamma defaults to the operator's noise exponent.  mbar defaults to the
    smallest admissible profile degree plus one; passing a degree below the
    energy-integrability constraint raises DegreeTooSmall.
    """
    spec = spectrum.spec
    if not spec.is_damped:
        raise RangeViolation(float("nan"), spec.gamma, "steering is defined for the damped families")
    g = spec.gamma if gamma is None else gamma
    if g < 0 or not 0 <= spec.alpha < 1:
        raise RangeViolation(spec.alpha, g)
    if mbar is None:
        mbar = default_profile_degree(spec.alpha, g)
    _check_degree(spec.alpha, g, mbar)
    hb = _as_block_coeffs(spectrum, h)
    nodes, weights = gauss_legendre_panels(0.0, t, n_panels, n_nodes)
    values = _control_values(spectrum, g, hb, t, mbar, nodes)
    return ControlSignal(spectrum, g, hb, t, mbar, nodes, weights, values)


def _terminal_state(signal: ControlSignal, nodes: np.ndarray, weights: np.ndarray,
                    values: np.ndarray) -> np.ndarray:
    """e^(tA)h + sum_i w_i e^((t-tau_i)A) G u(tau_i), physical chart (n, 2)."""
    sp = signal.spectrum
    t = signal.t
    gvec = sp.forcing_phys(signal.gamma)  # (n, 2), second component mu^-gamma
    ge = np.einsum("nij,nj->ni", sp.Pinv, gvec.astype(complex))
    ph = np.exp(sp.eig[None, :, :] * (t - nodes)[:, None, None])
    acc = np.einsum("t,tnj,tn->nj", weights, ph * ge[None, :, :], values)
    forced = np.einsum("nij,nj->ni", sp.P, acc).real
    he = np.einsum("nij,nj->ni", sp.Pinv, signal.h.astype(complex))
    free = np.einsum("nij,nj->ni", sp.P, np.exp(sp.eig * t) * he).real
    return free + forced


def verify_steering(signal: ControlSignal, tol: float | None = None) -> float:
    """Norm of the terminal state reached by the signal.

    With tol set, the control is re-synthesized on a doubled rule and the
    two terminal norms must agree within tol, else GridTooCoarse.
    """
    r = float(np.linalg.norm(_terminal_state(signal, signal.nodes, signal.weights, signal.values)))
    if tol is not None:
        n_pan = max(2, 2 * int(round(len(signal.nodes) ** 0.5)))
        nodes, weights = gauss_legendre_panels(0.0, signal.t, n_pan, 64)
        values = _control_values(
            signal.spectrum, signal.gamma, signal.h, signal.t, signal.mbar, nodes
        )
        r_ref = float(np.linalg.norm(_terminal_state(signal, nodes, weights, values)))
        if abs(r - r_ref) > tol:
            raise GridTooCoarse(f"terminal residual moved {abs(r - r_ref):.3e} under refinement")
    return r


def worst_case_energy(
    spectrum: Spectrum,
    t: float,
    gamma: float | None = None,
    mbar: int | None = None,
    n_panels: int = 64,
    n_nodes: int = 32,
) -> float:
    """Largest control energy over unit initial states h.

    Per block the control depends linearly on h, so the worst case is the
    square root of the largest eigenvalue of the 2x2 energy form
    M_ab = integral u_{e_a} u_{e_b} dtau, maximized over blocks.
    """
    spec = spectrum.spec
    g = spec.gamma if gamma is None else gamma
    if mbar is None:
        mbar = default_profile_degree(spec.alpha, g)
    nodes, weights = gauss_legendre_panels(0.0, t, n_panels, n_nodes)
    n = len(spectrum)
    basis = np.zeros((2, n, 2))
    basis[0, :, 0] = 1.0
    basis[1, :, 1] = 1.0
    u0 = _control_values(spectrum, g, basis[0], t, mbar, nodes)  # (N, n)
    u1 = _control_values(spectrum, g, basis[1], t, mbar, nodes)
    m00 = weights @ (u0 * u0)
    m01 = weights @ (u0 * u1)
    m11 = weights @ (u1 * u1)
    tr = m00 + m11
    det = m00 * m11 - m01 * m01
    lam_max = 0.5 * (tr + np.sqrt(np.maximum(tr * tr - 4 * det, 0.0)))
    return float(np.sqrt(lam_max.max()))
