"""Deterministic quadrature helpers used across the package.

Composite Gauss-Legendre panels (optionally log-spaced), probabilists'
Gauss-Hermite rules normalized against the standard Gaussian, and a
power-law treatment for integrals whose integrand blows up like s^(-q)
at the left endpoint.
"""

from __future__ import annotations

import numpy as np

from .errors import DivergentGammaIntegral, QuadratureDegreeTooLow

__all__ = [
    "gauss_legendre_panels",
    "gauss_hermite_probabilists",
    "power_law_head",
    "singular_integral",
]


def gauss_legendre_panels(
    a: float,
    b: float,
    n_panels: int = 32,
    n_nodes: int = 16,
    spacing: str = "linear",
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [a, b].

    Parameters
    ----------
    a, b : float
        Integration limits, a < b.
    n_panels : int
        Number of sub-intervals.
    n_nodes : int
        Gauss-Legendre nodes per panel.
    spacing : str
        "linear" for equal panels, "log" for geometrically spaced panel
        edges (requires a > 0); log spacing resolves integrands that vary
        over several decades near the left endpoint.

    Returns
    -------
    nodes, weights : ndarray
        Flat arrays of length n_panels * n_nodes; sum(w * f(x)) approximates
        the integral.
    """
    if not b > a:
        raise ValueError(f"need b > a, got [{a}, {b}]")
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    if spacing == "log":
        if a <= 0:
            raise ValueError("log spacing needs a > 0")
        edges = np.geomspace(a, b, n_panels + 1)
    elif spacing == "linear":
        edges = np.linspace(a, b, n_panels + 1)
    else:
        raise ValueError(f"unknown spacing {spacing!r}")
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def gauss_hermite_probabilists(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite rule for the standard Gaussian weight.

    Returns nodes z and weights w with sum(w) = 1 such that
    sum(w * f(z)) approximates E[f(Z)] for Z ~ N(0, 1).  Exact for
    polynomials of degree < 2n.
    """
    if n < 1:
        raise QuadratureDegreeTooLow(f"need at least 1 node, got {n}")
    z, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / w.sum()
    return z, w


def power_law_head(s1: float, f1: float, s2: float, f2: float, s_cut: float) -> tuple[float, float]:
    """Integrate a power-law model C * s^(-q) over (0, s_cut].

    The model is fitted through the two samples (s1, f1), (s2, f2) with
    0 < s1 < s2.  Returns (integral, q).  Raises DivergentGammaIntegral
    when q >= 1 (the endpoint integral does not exist).
    """
    if not (0 < s1 < s2):
        raise ValueError("need 0 < s1 < s2")
    if f1 <= 0 or f2 <= 0:
        # No singular growth to model; a linear head is plenty.
        return 0.5 * s_cut * (f1 + max(f2, 0.0)) * 0.0, 0.0
    q = float(np.log(f1 / f2) / np.log(s2 / s1))
    if q >= 1.0:
        raise DivergentGammaIntegral(
            f"endpoint exponent q={q:.4f} >= 1: integral diverges at s -> 0"
        )
    if q <= 0.0:
        # Bounded at the endpoint: trapezoid from 0 with f(0) ~ f1.
        return float(0.5 * s_cut * 2.0 * f1), q
    c = f1 * s1**q
    return float(c * s_cut ** (1.0 - q) / (1.0 - q)), q


def singular_integral(
    f,
    t_max: float,
    t_min_factor: float = 1e-4,
    n_panels: int = 40,
    n_nodes: int = 12,
) -> tuple[float, float]:
    """Integrate f over (0, t_max] when f may blow up like a power at 0.

    f must accept an ndarray of times and return the integrand values.
    The body [t_min, t_max] uses log-spaced composite Gauss-Legendre; the
    head (0, t_min] is integrated analytically from a power-law fit through
    the two smallest body samples.  Returns (integral, endpoint_exponent).
    """
    t_min = t_max * t_min_factor
    nodes, weights = gauss_legendre_panels(t_min, t_max, n_panels, n_nodes, spacing="log")
    vals = np.asarray(f(nodes), dtype=float)
    body = float(np.dot(weights, vals))
    # Two probe samples just above t_min for the head model.
    s1, s2 = t_min, t_min * 2.0
    f1, f2 = float(f(np.array([s1]))[0]), float(f(np.array([s2]))[0])
    head, q = power_law_head(s1, f1, s2, f2, t_min)
    return body + head, q
