"""Concrete drift nonlinearities for the truncated evolution equations.

Four kinds are provided:

* ``zero`` -- no drift;
* ``b_r`` -- a bounded Holder averaging functional: the state is read out
  pointwise, clamped through ``sgn(f) min(|f|, r)^(1/theta)``, averaged
  against a weight ``h`` and re-emitted along a fixed profile ``g``;
* ``structure`` -- drifts that act through the same smoothing channel as
  the noise (a scalar functional of the position field injected into the
  forcing direction), in constant, mode-wise ``tanh`` or ``b_r`` form;
* ``counterexample`` -- the explicit 3/4-Holder nonlinearity on (0, pi)
  whose deterministic damped-wave equation has two distinct solutions
  from the same zero initial state.

Drifts act on physical-chart coefficient arrays and are pure functions,
so they are safe to evaluate concurrently across samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, InvalidSpec
from .spectral import OperatorSpec, SpectralField, Spectrum, mode_values

_KINDS = ("zero", "b_r", "structure", "counterexample")
_STRUCTURE_FORMS = ("tanh", "constant", "b_r")

# quadrature nodes per dimension, by spatial dimension
_DEFAULT_NODES = {1: 512, 2: 128, 3: 64}


@dataclass(frozen=True)
class DriftSpec:
    """Declarative description of a drift nonlinearity.

    Parameters
    ----------
    kind : str
        One of ``zero``, ``b_r``, ``structure``, ``counterexample``.
    theta : float
        Holder exponent of the nonlinearity, in (0, 1].
    r : float
        Clamp radius for the ``b_r`` kind (and ``structure`` in b_r form).
    g, h : tuple of float
        Mode coefficients of the output profile and the averaging weight
        for the ``b_r`` kind.  Shorter tuples are zero-padded.
    form : str
        Concrete shape of a ``structure`` drift: ``tanh`` (mode-wise
        saturating), ``constant`` (state-independent) or ``b_r``.
    scale, width : float
        Amplitude and input width of the ``tanh`` form.
    c : tuple of float
        Mode coefficients of the ``constant`` form.
    """

    kind: str = "zero"
    theta: float = 1.0
    r: float = 1.0
    g: tuple[float, ...] = ()
    h: tuple[float, ...] = ()
    form: str = "tanh"
    scale: float = 1.0
    width: float = 1.0
    c: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise InvalidSpec(f"unknown drift kind {self.kind!r}")
        if not 0.0 < self.theta <= 1.0:
            raise InvalidSpec(f"theta must lie in (0, 1], got {self.theta}")
        if self.kind == "b_r" and self.r <= 0.0:
            raise InvalidSpec("clamp radius r must be positive")
        if self.kind == "structure" and self.form not in _STRUCTURE_FORMS:
            raise InvalidSpec(f"unknown structure form {self.form!r}")
        if self.kind == "b_r" and (not self.g or not self.h):
            raise InvalidSpec("b_r drift needs g and h coefficients")


def clamp(values: np.ndarray, r: float, theta: float) -> np.ndarray:
    """Symmetric saturating clamp ``sgn(s) min(|s|, r)^(1/theta)``.

    Bounded by ``r^(1/theta)`` and theta-Holder continuous, which is what
    the averaging functional needs from its scalar readout.
    """
    a = np.minimum(np.abs(values), r)
    return np.sign(values) * a ** (1.0 / theta)


# ---------------------------------------------------------------------------
# counterexample nonlinearity

_CE_C1 = 56.0
_CE_C2 = 8.0 * 4.0 ** (7.0 / 12.0)
_CE_C3 = 4.0


def _ramp(u: np.ndarray) -> np.ndarray:
    """exp(-1/u) on u > 0, zero elsewhere; the standard smooth-step atom."""
    out = np.zeros_like(u, dtype=float)
    pos = u > 0.0
    out[pos] = np.exp(-1.0 / u[pos])
    return out


def bump(s: np.ndarray) -> np.ndarray:
    """Smooth cutoff equal to 1 on |s| <= 2 and 0 on |s| >= 3."""
    s2 = np.asarray(s, dtype=float) ** 2
    inner = _ramp(9.0 - s2)
    outer = _ramp(s2 - 4.0)
    return inner / (inner + outer)


def counterexample_pointwise(xi: np.ndarray, y: np.ndarray) -> np.ndarray:
    """The cutoff 3/4-Holder nonlinearity c(xi, y) on (0, pi).

    On states of the form ``y = p sin(2 xi)`` with ``|p| <= 2`` it reduces
    to ``(56 |p|^(3/4) + 8 * 4^(7/12) |p|^(7/8) + 4 p) sin(2 xi)``, which
    is what makes ``tau^8 sin(2 xi)`` an exact solution of the forced
    damped-wave equation.
    """
    s = np.sin(2.0 * np.asarray(xi, dtype=float))
    sg = np.sign(s)
    ab = np.abs(s)
    ay = np.abs(y)
    return bump(y) * (
        _CE_C1 * sg * (ab * ay**3) ** 0.25
        + _CE_C2 * sg * (np.sqrt(ab) * ay**3.5) ** 0.25
        + _CE_C3 * y
    )


def counterexample_scalar_terms(p: np.ndarray) -> np.ndarray:
    """Mode-2 coefficient of c at the single-mode state ``p sin(2 xi)``.

    Valid only while ``|p| <= 2`` (inside the cutoff plateau).
    """
    ap = np.abs(np.asarray(p, dtype=float))
    return _CE_C1 * ap**0.75 + _CE_C2 * ap**0.875 + _CE_C3 * np.asarray(p)


def counterexample_operator() -> OperatorSpec:
    """The damped-wave operator the counterexample lives on."""
    return OperatorSpec(
        family="damped_wave", m=1, alpha=7.0 / 12.0, rho=1.0, gamma=0.0, length=np.pi
    )


# ---------------------------------------------------------------------------
# runtime evaluator


def _mode_vector(coeffs: tuple[float, ...], n: int, label: str) -> np.ndarray:
    if len(coeffs) > n:
        raise InvalidSpec(f"{label} has {len(coeffs)} coefficients but only {n} modes")
    v = np.zeros(n)
    v[: len(coeffs)] = coeffs
    return v


def _quad_grid(spec: OperatorSpec, nodes_per_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced tensor quadrature on the box, exact for trig polynomials.

    Dirichlet uses the trapezoid rule with endpoints (where the modes
    vanish); periodic uses the endpoint-free rectangle rule.
    """
    if spec.bc == "dirichlet":
        x1 = np.linspace(0.0, spec.length, nodes_per_dim + 1)
        w1 = np.full(nodes_per_dim + 1, spec.length / nodes_per_dim)
        w1[0] *= 0.5
        w1[-1] *= 0.5
    else:
        x1 = np.arange(nodes_per_dim) * (spec.length / nodes_per_dim)
        w1 = np.full(nodes_per_dim, spec.length / nodes_per_dim)
    axes = [x1] * spec.m
    grids = np.meshgrid(*axes, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=-1)
    weights = w1
    for _ in range(spec.m - 1):
        weights = np.multiply.outer(weights, w1)
    return points, weights.ravel()


class Drift:
    """Evaluator binding a :class:`DriftSpec` to a concrete spectrum.

    ``scalar_coeffs`` maps physical-chart states ``(..., n, d)`` to the
    mode coefficients ``(..., n)`` of the scalar nonlinearity;
    ``__call__`` injects that scalar field into the state space (for the
    damped families through the same smoothing weight as the noise).
    """

    def __init__(
        self, spec: DriftSpec, spectrum: Spectrum, nodes_per_dim: int | None = None
    ) -> None:
        self.spec = spec
        self.spectrum = spectrum
        op = spectrum.spec
        if nodes_per_dim is None:
            nodes_per_dim = _DEFAULT_NODES[op.m]
        self.points, self.weights = _quad_grid(op, nodes_per_dim)
        # mode values on the grid, (n, P)
        self._E = mode_values(op, [b.base for b in spectrum.blocks], self.points)
        n = len(spectrum)
        if spec.kind == "b_r" or (spec.kind == "structure" and spec.form == "b_r"):
            self._g = _mode_vector(spec.g, n, "g")
            self._h = _mode_vector(spec.h, n, "h")
            self._g_vals = self._g @ self._E
            self._h_vals = self._h @ self._E
        elif spec.kind == "structure" and spec.form == "constant":
            self._c = _mode_vector(spec.c, n, "c")
        if op.is_damped:
            self._inject = spectrum.mu ** (-op.gamma)
            # block position coordinate is mu^(1/2) times the field coefficient
            self._pos_weight = spectrum.mu**-0.5
        else:
            self._inject = np.ones(n)
            self._pos_weight = np.ones(n)
        self.bound = self._analytic_bound()

    def _analytic_bound(self) -> float:
        """Pointwise sup bound on the scalar nonlinearity (sampled sups)."""
        spec = self.spec
        if spec.kind == "zero":
            return 0.0
        if spec.kind == "b_r" or (spec.kind == "structure" and spec.form == "b_r"):
            vol = float(np.sum(self.weights))
            g_sup = float(np.max(np.abs(self._g_vals)))
            h_sup = float(np.max(np.abs(self._h_vals)))
            return g_sup * h_sup * spec.r ** (1.0 / spec.theta) * vol
        if spec.kind == "structure" and spec.form == "constant":
            return float(np.max(np.abs(self._c @ self._E)))
        if spec.kind == "structure":
            return float(spec.scale * np.sum(np.max(np.abs(self._E), axis=1)))
        # counterexample: dense scan of |c| over the cutoff support
        y = np.linspace(-3.0, 3.0, 4001)
        xi = np.full_like(y, np.pi / 4.0)  # sin(2 xi) = 1 maximizes every term
        return float(np.max(np.abs(counterexample_pointwise(xi, y))))

    # -- evaluation ---------------------------------------------------------

    def _readout(self, x: np.ndarray) -> np.ndarray:
        """Position-field values on the grid, (..., P)."""
        return (np.asarray(x)[..., :, 0] * self._pos_weight) @ self._E

    def scalar_coeffs(self, x: np.ndarray) -> np.ndarray:
        """Mode coefficients of the scalar drift at states ``x (..., n, d)``."""
        x = np.asarray(x, dtype=float)
        spec = self.spec
        if spec.kind == "zero":
            return np.zeros(x.shape[:-1])
        if spec.kind == "b_r" or (spec.kind == "structure" and spec.form == "b_r"):
            f = self._readout(x)
            s = clamp(f, spec.r, spec.theta) @ (self.weights * self._h_vals)
            return s[..., None] * self._g
        if spec.kind == "structure" and spec.form == "constant":
            return np.broadcast_to(self._c, x.shape[:-1]).copy()
        if spec.kind == "structure":
            y = x[..., :, 0] * self._pos_weight
            return spec.scale * np.tanh(y / spec.width)
        y = self._readout(x)
        c_vals = counterexample_pointwise(self.points[:, 0], y)
        return (c_vals * self.weights) @ self._E.T

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """State-space drift vector at ``x``, same shape ``(..., n, d)``."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        out[..., :, -1] = self._inject * self.scalar_coeffs(x)
        return out


def apply_drift(
    drift: Drift, field: SpectralField, tol: float = 1e-8
) -> SpectralField:
    """Drift of a single state as a field, with a quadrature self-check.

    The scalar projection is recomputed on every other grid node; if the
    two quadratures disagree by more than ``tol`` relative to the drift's
    bound the grid is declared too coarse.
    """
    x = field.to_physical().coeffs.real
    coeffs = drift.scalar_coeffs(x[None])[0]
    if drift.spec.kind in ("b_r", "counterexample") or (
        drift.spec.kind == "structure" and drift.spec.form == "b_r"
    ):
        coarse = _coarse_scalar_coeffs(drift, x)
        err = float(np.linalg.norm(coeffs - coarse))
        if err > tol * max(drift.bound, 1.0):
            raise GridTooCoarse(
                f"drift quadrature self-check failed: {err:.3e} on half grid"
            )
    out = np.zeros_like(x)
    out[:, -1] = drift._inject * coeffs
    return SpectralField(drift.spectrum, out.astype(complex), chart="phys")


def _coarse_scalar_coeffs(drift: Drift, x: np.ndarray) -> np.ndarray:
    """Scalar coefficients recomputed on the every-other-node subgrid."""
    coarse = getattr(drift, "_coarse", None)
    if coarse is None:
        op = drift.spectrum.spec
        if op.bc == "dirichlet":
            n1 = round(len(drift.points) ** (1.0 / op.m)) - 1
        else:
            n1 = round(len(drift.points) ** (1.0 / op.m))
        coarse = Drift(drift.spec, drift.spectrum, nodes_per_dim=n1 // 2)
        drift._coarse = coarse
    return coarse.scalar_coeffs(x[None])[0]


# ---------------------------------------------------------------------------
# empirical Holder estimation


def holder_seminorm_estimate(
    drift: Drift, samples: int = 10_000, seed: int = 0, scale: float = 1.0
) -> float:
    """Empirical lower bound on the theta-Holder seminorm of the drift.

    Maximizes ``|B(x) - B(y)| / |x - y|^theta`` (state norms) over random
    Gaussian coefficient pairs.  A lower bound only: the true seminorm is
    a supremum over the whole state space.
    """
    n, d = len(drift.spectrum), drift.spectrum.spec.block_dim
    rng = np.random.default_rng(seed)
    x = scale * rng.standard_normal((samples, n, d))
    y = scale * rng.standard_normal((samples, n, d))
    bx = drift(x).reshape(samples, -1)
    by = drift(y).reshape(samples, -1)
    num = np.linalg.norm(bx - by, axis=1)
    den = np.linalg.norm((x - y).reshape(samples, -1), axis=1) ** drift.spec.theta
    good = den > 0
    if not np.any(good):
        return 0.0
    return float(np.max(num[good] / den[good]))


def per_mode_holder_norms(
    drift: Drift, samples: int = 2000, seed: int = 0, scale: float = 1.0
) -> np.ndarray:
    """Empirical per-mode Holder norms of the scalar drift functional.

    For mode k this estimates ``sup |C_k| + [C_k]_theta`` over random
    Gaussian state pairs; the result feeds the mode-weighted series
    condition of the noise module.
    """
    n, d = len(drift.spectrum), drift.spectrum.spec.block_dim
    rng = np.random.default_rng(seed)
    x = scale * rng.standard_normal((samples, n, d))
    y = scale * rng.standard_normal((samples, n, d))
    cx = drift.scalar_coeffs(x)
    cy = drift.scalar_coeffs(y)
    sup = np.maximum(np.abs(cx), np.abs(cy)).max(axis=0)
    den = np.linalg.norm((x - y).reshape(samples, -1), axis=1) ** drift.spec.theta
    good = den > 0
    semi = np.abs(cx - cy)[good] / den[good, None]
    return sup + semi.max(axis=0)
