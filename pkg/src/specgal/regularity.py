"""Numerical probes of analyticity-linked estimates.

Two instruments:

* ``maxreg_ratio`` measures the maximal-regularity quotient
  ||A g||_{L^2} / ||f||_{L^2} for g(t) = int_0^t e^{(t-s)A} f(s) ds.  The
  forcing is taken piecewise constant between its samples, which makes the
  Duhamel integral block-exact per interval, so the measured ratio carries
  no time-integration error.  The quotient is reported against the
  vertical-line bound 2*pi*(c1 + c2)*e^{2*|zeta|*T}, where c1 and c2 are
  the suprema of ||R(z, A)|| and ||A R(z, A)|| over the scanned line
  Re z = zeta.

* ``resolvent_line_scan`` evaluates ||A R(z, A)|| along a vertical line in
  closed form per block, together with per-block witness responses at the
  heights of the eigenvalues.  For weakly damped blocks (alpha < 1/2) the
  witness response along the fast eigendirection grows like mu^(1/2-alpha),
  which is the numerical signature of the missing analyticity; for
  alpha >= 1/2 the same sequence stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, InvalidSpec, SpectrumHit, SpectrumMismatch
from .spectral import Spectrum

__all__ = [
    "MaxRegReport",
    "ResolventScan",
    "maxreg_ratio",
    "resolvent_line_scan",
]


@dataclass(frozen=True)
class ResolventScan:
    """Line scan of ||A R(z, A)|| at z = zeta + i eta.

    etas contains the logarithmic grid plus the per-block witness heights
    Im lambda^+; norms is the max over blocks at each point.  witness_norms
    holds the per-block eigendirection response |lambda^+| / |zeta - Re
    lambda^+| at the block's own witness height.
    """

    zeta: float
    etas: np.ndarray           # (n_points,)
    norms: np.ndarray          # (n_points,)
    sup_norm: float
    witness_mu: np.ndarray     # (n_blocks,)
    witness_norms: np.ndarray  # (n_blocks,)


@dataclass(frozen=True)
class MaxRegReport:
    """Measured maximal-regularity quotient and its line bound."""

    ratio: float
    bound: float
    zeta: float
    c1: float        # sup over the line of ||R(z, A)||
    c2: float        # sup over the line of ||A R(z, A)||
    T: float

    @property
    def within_bound(self) -> bool:
        return self.ratio <= self.bound


def _spectral_abscissa(spectrum: Spectrum) -> tuple[float, complex, int]:
    """Largest real part over all block eigenvalues, with a witness."""
    re = spectrum.eig.real
    flat = int(np.argmax(re))
    k, j = divmod(flat, spectrum.dim)
    return float(re[k, j]), complex(spectrum.eig[k, j]), k


def _check_line(spectrum: Spectrum, zeta: float) -> None:
    bound, lam, k = _spectral_abscissa(spectrum)
    if zeta <= bound + 1e-12 * max(1.0, abs(bound)):
        raise SpectrumHit(lam, k)


def _line_norms(spectrum: Spectrum, zs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """||R(z, A)|| and ||A R(z, A)||, max over blocks, per point.

    Exact per block: scalar quotients for heat modes, closed-form 2x2
    inverses for damped blocks.
    """
    zs = np.asarray(zs, dtype=complex)
    if spectrum.dim == 1:
        lam = spectrum.eig[:, 0]                           # (n,)
        dist = np.abs(zs[:, None] - lam[None, :])          # (p, n)
        r = (1.0 / dist).max(axis=1)
        ar = (np.abs(lam)[None, :] / dist).max(axis=1)
        return r, ar
    A = spectrum.A_phys.astype(complex)                    # (n, 2, 2)
    eye = np.eye(2, dtype=complex)
    M = zs[:, None, None, None] * eye - A[None]            # (p, n, 2, 2)
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    inv = np.empty_like(M)
    inv[..., 0, 0] = M[..., 1, 1]
    inv[..., 1, 1] = M[..., 0, 0]
    inv[..., 0, 1] = -M[..., 0, 1]
    inv[..., 1, 0] = -M[..., 1, 0]
    inv /= det[..., None, None]
    r = np.linalg.svd(inv, compute_uv=False)[..., 0].max(axis=1)
    ar = np.linalg.svd(A[None] @ inv, compute_uv=False)[..., 0].max(axis=1)
    return r, ar


def _scan_points(spectrum: Spectrum, zeta: float, n_eta: int,
                 eta_min: float, eta_max: float) -> np.ndarray:
    etas = np.geomspace(eta_min, eta_max, n_eta)
    witness = np.abs(spectrum.eig[:, 0].imag)
    return np.concatenate([etas, witness])


def resolvent_line_scan(
    spectrum: Spectrum,
    zeta: float = 0.0,
    n_eta: int = 512,
    eta_min: float = 1e-2,
    eta_max: float = 1e6,
) -> ResolventScan:
    """Scan ||A R(zeta + i eta, A)|| over a logarithmic eta grid.

    The grid always includes each block's witness height eta_k = Im
    lambda_k^+, where the horizontal distance to the eigenvalue is exactly
    |zeta - Re lambda_k^+|.  witness_norms reports the response along the
    corresponding unit eigendirection, |lambda_k^+| / |zeta - Re
    lambda_k^+|; on real and heat blocks (Im lambda^+ = 0) this reduces to
    |lambda^+| / |zeta - lambda^+|.

    Raises SpectrumHit unless the half-plane Re z >= zeta lies strictly in
    the resolvent set (zeta must exceed the largest eigenvalue real part).
    """
    _check_line(spectrum, zeta)
    etas = _scan_points(spectrum, zeta, n_eta, eta_min, eta_max)
    _, ar = _line_norms(spectrum, zeta + 1j * etas)
    lam = spectrum.eig[:, 0]
    witness = np.abs(lam) / np.abs(zeta - lam.real)
    return ResolventScan(
        zeta=float(zeta),
        etas=etas,
        norms=ar,
        sup_norm=float(ar.max()),
        witness_mu=spectrum.mu.copy(),
        witness_norms=witness,
    )


def maxreg_ratio(
    spectrum: Spectrum,
    samples: np.ndarray,
    T: float,
    zeta: float = 1.0,
) -> MaxRegReport:
    """Maximal-regularity quotient of a sampled forcing path.

    Parameters
    ----------
    spectrum : Spectrum
        Block data of the generator A.
    samples : ndarray, shape (J+1, n_blocks, dim)
        Forcing coefficients on the uniform grid j*T/J in the physical
        chart; the path is treated as constant on each [t_j, t_{j+1}), so
        the final sample only marks the grid end.  Real or complex.
    T : float
        Window length.
    zeta : float
        Abscissa of the vertical line used for the reported bound
        2*pi*(c1 + c2)*e^{2*|zeta|*T}; must lie strictly right of the
        spectrum.

    Returns
    -------
    MaxRegReport
        Measured ratio ||A g||_{L^2} / ||f||_{L^2} (grid norms: trapezoid
        for g, interval sums for the piecewise-constant f) and the line
        bound.  A zero forcing path reports ratio 0.

    Raises
    ------
    GridTooCoarse
        Fewer than 8 sample intervals.
    SpectrumMismatch
        Sample shape does not match the spectrum.
    """
    if T <= 0:
        raise InvalidSpec(f"window T={T} must be > 0")
    f = np.asarray(samples)
    J = f.shape[0] - 1
    if J < 8:
        raise GridTooCoarse(f"need at least 8 sample intervals, got {J}")
    if f.shape[1:] != (len(spectrum), spectrum.dim):
        raise SpectrumMismatch(
            f"samples have shape {f.shape}, expected ({J + 1}, "
            f"{len(spectrum)}, {spectrum.dim})"
        )
    h = T / J
    E = spectrum.expm_phys(h)        # (n, d, d)
    S = spectrum.duhamel_phys(h)     # integral of e^(sA) over [0, h]
    dtype = np.result_type(f.dtype, float)
    g = np.zeros((J + 1, len(spectrum), spectrum.dim), dtype=dtype)
    for j in range(J):
        g[j + 1] = np.einsum("nij,nj->ni", E, g[j]) + np.einsum(
            "nij,nj->ni", S, f[j]
        )
    Ag = np.einsum("nij,tnj->tni", spectrum.A_phys, g)
    times = np.linspace(0.0, T, J + 1)
    num_sq = np.trapezoid(np.sum(np.abs(Ag) ** 2, axis=(1, 2)), times)
    den_sq = float(np.sum(np.abs(f[:-1]) ** 2) * h)
    ratio = 0.0 if den_sq == 0.0 else float(np.sqrt(num_sq / den_sq))

    _check_line(spectrum, zeta)
    pts = zeta + 1j * _scan_points(spectrum, zeta, 512, 1e-2, 1e6)
    r, ar = _line_norms(spectrum, pts)
    c1, c2 = float(r.max()), float(ar.max())
    bound = 2.0 * np.pi * (c1 + c2) * float(np.exp(2.0 * abs(zeta) * T))
    return MaxRegReport(ratio=ratio, bound=bound, zeta=float(zeta), c1=c1, c2=c2, T=float(T))
