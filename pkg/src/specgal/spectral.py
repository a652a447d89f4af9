"""Block spectral calculus for damped second-order equations and heat flows.

The damped families (wave and beam) act on pairs (position, velocity).  On
the n-th eigenspace of the base operator the generator restricts to the
real 2x2 block

    A_n = [[0,        mu^(1/2)],
           [-mu^(1/2), -rho * mu^alpha]]

written in the orthonormal basis ((e_n, 0), (0, e_n)).  Its eigenvalues are
the roots of lambda^2 + rho*mu^alpha*lambda + mu = 0, a conjugate pair when
rho^2 * mu^(2*alpha - 1) < 4 and a real pair when > 4.  The heat family
contributes scalar blocks with the single eigenvalue -mu^beta.

Everything downstream (Gramians, exact noise sampling, mild schemes,
backward solves) runs on the per-block data assembled here: eigenvalues,
the unit eigenvector chart, and the coefficients of the forcing direction
in that chart.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateMode,
    InsufficientModes,
    InvalidSpec,
    SpectrumHit,
    SpectrumMismatch,
)

__all__ = [
    "OperatorSpec",
    "BaseMode",
    "SpectralBlock",
    "Spectrum",
    "SpectralField",
    "build_spectrum",
    "semigroup_apply",
    "fractional_power_apply",
    "resolvent_apply",
    "fit_asymptotics",
    "AsymptoticsReport",
    "mode_values",
]

_FAMILIES = ("heat", "damped_wave", "damped_beam")
_BCS = ("dirichlet", "periodic")


@dataclass(frozen=True)
class OperatorSpec:
    """Parameters of one operator family on a box.

    family : "heat", "damped_wave" or "damped_beam"
    m : spatial dimension (1..3 for mode enumeration)
    alpha : damping exponent of the damped families, in [0, 1)
    rho : damping strength, > 0
    beta : diffusion exponent of the heat family, > 0
    gamma : noise smoothing exponent, >= 0
    bc : "dirichlet" on (0, length)^m or "periodic" on [0, length)^m
    length : box side; defaults to 1 (dirichlet) or 2*pi (periodic)
    """

    family: str
    m: int = 1
    alpha: float = 0.5
    rho: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0
    bc: str = "dirichlet"
    length: float = 0.0  # 0 means family default

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise InvalidSpec(f"unknown family {self.family!r}")
        if self.bc not in _BCS:
            raise InvalidSpec(f"unknown boundary condition {self.bc!r}")
        if not 1 <= self.m <= 3:
            raise InvalidSpec(f"dimension m={self.m} outside 1..3")
        if self.gamma < 0:
            raise InvalidSpec(f"gamma={self.gamma} must be >= 0")
        if self.is_damped:
            if not 0.0 <= self.alpha < 1.0:
                raise InvalidSpec(f"alpha={self.alpha} outside [0, 1)")
            if self.rho <= 0:
                raise InvalidSpec(f"rho={self.rho} must be > 0")
        else:
            if self.beta <= 0:
                raise InvalidSpec(f"beta={self.beta} must be > 0")
        if self.length < 0:
            raise InvalidSpec("length must be positive")
        if self.length == 0.0:
            object.__setattr__(self, "length", 2 * math.pi if self.bc == "periodic" else 1.0)

    @property
    def is_damped(self) -> bool:
        return self.family in ("damped_wave", "damped_beam")

    @property
    def block_dim(self) -> int:
        return 2 if self.is_damped else 1


@dataclass(frozen=True)
class BaseMode:
    """One eigenfunction of the base operator."""

    index: int          # 0-based position in the sorted enumeration
    mu: float           # eigenvalue of Lambda (already squared for the beam)
    jvec: tuple[int, ...]
    kind: str           # "sin" (dirichlet), or "cos"/"sin" phase (periodic)

    @property
    def tag(self) -> str:
        js = ",".join(str(j) for j in self.jvec)
        return f"{self.kind}({js})"


@dataclass(frozen=True, eq=False)
class SpectralBlock:
    """Eigen data of one block of the full generator."""

    base: BaseMode
    eigs: tuple[complex, ...]    # (lam_plus, lam_minus) or (-mu^beta,)
    chi: float
    base_norm: float             # norm of the unnormalized eigenvector factor
    b: tuple[complex, ...]       # forcing direction (0,1) in the eigen chart
    to_phys: np.ndarray          # columns = unit eigenvectors, physical chart
    to_eigen: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigs)

    @property
    def mu(self) -> float:
        return self.base.mu

    @property
    def lam_plus(self) -> complex:
        return self.eigs[0]

    @property
    def lam_minus(self) -> complex:
        return self.eigs[-1]

    @property
    def is_complex_pair(self) -> bool:
        return self.dim == 2 and abs(self.eigs[0].imag) > 0


def _enumerate_dirichlet(m: int, n: int) -> list[tuple[float, tuple[int, ...], str]]:
    # nu values are |j|^2 scaled later; enumerate enough lattice points.
    jmax = 2
    while True:
        combos = [(sum(jj * jj for jj in j), j) for j in itertools.product(range(1, jmax + 1), repeat=m)]
        combos.sort(key=lambda t: (t[0], t[1]))
        # Keep only points that cannot be displaced by a larger jmax shell.
        safe = [c for c in combos if c[0] <= jmax * jmax]
        if len(safe) >= n:
            return [(float(s), j, "sin") for s, j in safe[:n]]
        jmax *= 2


def _enumerate_periodic(m: int, n: int) -> list[tuple[float, tuple[int, ...], str]]:
    # One representative per {j, -j} class, each contributing a cos and a sin mode.
    jmax = 2
    while True:
        reps = []
        for j in itertools.product(range(-jmax, jmax + 1), repeat=m):
            if all(jj == 0 for jj in j):
                continue
            # first nonzero component positive picks one of {j, -j}
            lead = next(jj for jj in j if jj != 0)
            if lead < 0:
                continue
            reps.append((sum(jj * jj for jj in j), j))
        reps.sort(key=lambda t: (t[0], t[1]))
        safe = [r for r in reps if r[0] <= jmax * jmax]
        out: list[tuple[float, tuple[int, ...], str]] = []
        for s, j in safe:
            out.append((float(s), j, "cos"))
            out.append((float(s), j, "sin"))
        if len(out) >= n:
            return out[:n]
        jmax *= 2


def _base_modes(spec: OperatorSpec, n: int) -> list[BaseMode]:
    if spec.bc == "dirichlet":
        raw = _enumerate_dirichlet(spec.m, n)
        scale = (math.pi / spec.length) ** 2
    else:
        raw = _enumerate_periodic(spec.m, n)
        scale = (2 * math.pi / spec.length) ** 2
    modes = []
    for idx, (s, j, kind) in enumerate(raw):
        nu = scale * s
        mu = nu * nu if spec.family == "damped_beam" else nu
        modes.append(BaseMode(index=idx, mu=mu, jvec=j, kind=kind))
    return modes


def _damped_block(spec: OperatorSpec, mode: BaseMode) -> SpectralBlock:
    mu, alpha, rho = mode.mu, spec.alpha, spec.rho
    trace = -rho * mu**alpha
    disc = trace * trace - 4.0 * mu
    if abs(disc) <= 1e-12 * max(trace * trace, 4.0 * mu):
        raise DegenerateMode(mode.index, mu)
    if disc < 0:
        om = math.sqrt(-disc) / 2.0
        lam_p = complex(trace / 2.0, om)
        lam_m = complex(trace / 2.0, -om)
    else:
        root = math.sqrt(disc)
        lam_m = complex((trace - root) / 2.0)
        # product of the roots is mu exactly; avoids cancellation in lam_plus
        lam_p = complex(mu / lam_m.real)
    ap2 = abs(lam_p) ** 2
    am2 = abs(lam_m) ** 2
    base_norm = 1.0 / math.sqrt(mu + ap2)
    chi = math.sqrt((mu + ap2) / (mu + am2))
    b_plus = 1.0 / (base_norm * (lam_p - lam_m))
    b_minus = -b_plus / chi
    smu = math.sqrt(mu)
    to_phys = np.array(
        [
            [base_norm * smu, chi * base_norm * smu],
            [base_norm * lam_p, chi * base_norm * lam_m],
        ],
        dtype=complex,
    )
    det = to_phys[0, 0] * to_phys[1, 1] - to_phys[0, 1] * to_phys[1, 0]
    to_eigen = (
        np.array([[to_phys[1, 1], -to_phys[0, 1]], [-to_phys[1, 0], to_phys[0, 0]]], dtype=complex)
        / det
    )
    return SpectralBlock(
        base=mode,
        eigs=(lam_p, lam_m),
        chi=chi,
        base_norm=base_norm,
        b=(b_plus, b_minus),
        to_phys=to_phys,
        to_eigen=to_eigen,
    )


def _heat_block(spec: OperatorSpec, mode: BaseMode) -> SpectralBlock:
    lam = complex(-(mode.mu ** spec.beta))
    one = np.ones((1, 1), dtype=complex)
    return SpectralBlock(
        base=mode,
        eigs=(lam,),
        chi=1.0,
        base_norm=1.0,
        b=(1.0 + 0.0j,),
        to_phys=one.copy(),
        to_eigen=one.copy(),
    )


class Spectrum:
    """The first n blocks of one operator, with vectorized per-block data.

    Behaves like a sequence of SpectralBlock.  The arrays `eig` (n, d),
    `P`/`Pinv` (n, d, d) and `A_phys` (n, d, d) carry the same data in a
    form the batched routines can broadcast over.
    """

    def __init__(self, spec: OperatorSpec, blocks: list[SpectralBlock]):
        self.spec = spec
        self.blocks = blocks
        d = spec.block_dim
        n = len(blocks)
        self.dim = d
        self.mu = np.array([b.mu for b in blocks])
        self.eig = np.array([b.eigs for b in blocks], dtype=complex).reshape(n, d)
        self.P = np.stack([b.to_phys for b in blocks]).reshape(n, d, d)
        self.Pinv = np.stack([b.to_eigen for b in blocks]).reshape(n, d, d)
        if spec.is_damped:
            smu = np.sqrt(self.mu)
            self.A_phys = np.zeros((n, 2, 2))
            self.A_phys[:, 0, 1] = smu
            self.A_phys[:, 1, 0] = -smu
            self.A_phys[:, 1, 1] = -spec.rho * self.mu**spec.alpha
        else:
            self.A_phys = self.eig.real.reshape(n, 1, 1).copy()

    def __len__(self) -> int:
        return len(self.blocks)

    def __getitem__(self, i: int) -> SpectralBlock:
        return self.blocks[i]

    def __iter__(self):
        return iter(self.blocks)

    @property
    def state_dim(self) -> int:
        return len(self.blocks) * self.dim

    def truncate(self, n: int) -> "Spectrum":
        if n > len(self.blocks):
            raise SpectrumMismatch(f"cannot truncate to {n} from {len(self.blocks)} blocks")
        return Spectrum(self.spec, self.blocks[:n])

    def forcing_phys(self, gamma: float | None = None) -> np.ndarray:
        """Coefficient vector of the noise input per block, physical chart.

        Damped blocks force the velocity component with weight mu^(-gamma);
        heat blocks are forced directly with weight mu^(-gamma/2), so that
        the input covariance per mode is mu^(-gamma) in both conventions.
        """
        g = self.spec.gamma if gamma is None else gamma
        out = np.zeros((len(self.blocks), self.dim))
        if self.spec.is_damped:
            out[:, 1] = self.mu ** (-g)
        else:
            out[:, 0] = self.mu ** (-g / 2.0)
        return out

    def expm_phys(self, t) -> np.ndarray:
        """Matrix exponential e^(tA) per block in the physical chart.

        t may be a scalar (returns (n, d, d)) or a 1-d array of times
        (returns (T, n, d, d)).  The result is real.
        """
        t_arr = np.asarray(t, dtype=float)
        ph = np.exp(self.eig * t_arr[..., None, None])  # (..., n, d)
        mat = np.einsum("nij,...nj,njk->...nik", self.P, ph, self.Pinv)
        return mat.real

    def duhamel_phys(self, dt) -> np.ndarray:
        """Integral of e^(sA) over [0, dt] per block, physical chart, real."""
        dt_arr = np.asarray(dt, dtype=float)
        ph = (np.exp(self.eig * dt_arr[..., None, None]) - 1.0) / self.eig
        mat = np.einsum("nij,...nj,njk->...nik", self.P, ph, self.Pinv)
        return mat.real

    def field(self, coeffs: np.ndarray, chart: str = "phys") -> "SpectralField":
        c = np.asarray(coeffs, dtype=complex).reshape(len(self.blocks), self.dim)
        return SpectralField(self, c.copy(), chart)


def build_spectrum(spec: OperatorSpec, n: int) -> Spectrum:
    """Assemble the first n blocks of the operator described by spec.

    Blocks are sorted by base eigenvalue (ties broken lexicographically on
    the lattice index), so build_spectrum(spec, n) always produces a prefix
    of build_spectrum(spec, N) for n <= N.

    Raises DegenerateMode if any requested block has colliding eigenvalue
    branches (rho^2 * mu^(2*alpha-1) = 4 within floating tolerance).
    """
    if n < 1:
        raise InvalidSpec(f"need at least one block, got n={n}")
    modes = _base_modes(spec, n)
    if spec.is_damped:
        blocks = [_damped_block(spec, mo) for mo in modes]
    else:
        blocks = [_heat_block(spec, mo) for mo in modes]
    return Spectrum(spec, blocks)


@dataclass(eq=False)
class SpectralField:
    """Coefficients of a state in either the physical or the eigen chart.

    The physical chart is orthonormal, so the H-norm is the plain euclidean
    norm there; the eigen chart is not orthogonal and is only used for
    diagonal calculus.
    """

    spectrum: Spectrum
    coeffs: np.ndarray  # (n_blocks, dim) complex
    chart: str = "phys"

    def __post_init__(self):
        if self.chart not in ("phys", "eigen"):
            raise ValueError(f"unknown chart {self.chart!r}")

    def to_physical(self) -> "SpectralField":
        if self.chart == "phys":
            return self
        c = np.einsum("nij,nj->ni", self.spectrum.P, self.coeffs)
        return SpectralField(self.spectrum, c, "phys")

    def to_eigen(self) -> "SpectralField":
        if self.chart == "eigen":
            return self
        c = np.einsum("nij,nj->ni", self.spectrum.Pinv, self.coeffs)
        return SpectralField(self.spectrum, c, "eigen")

    def norm(self) -> float:
        return float(np.linalg.norm(self.to_physical().coeffs))

    def inner(self, other: "SpectralField") -> complex:
        a = self.to_physical().coeffs
        b = other.to_physical().coeffs
        return complex(np.sum(a * np.conj(b)))

    def real_phys(self) -> np.ndarray:
        """Physical coefficients as a real (n, d) array (imag parts dropped)."""
        return self.to_physical().coeffs.real


def _check_same(spectrum: Spectrum, x: SpectralField) -> None:
    if x.spectrum is not spectrum and len(x.spectrum) != len(spectrum):
        raise SpectrumMismatch("field does not live on the given spectrum")


def semigroup_apply(spectrum: Spectrum, t: float, x: SpectralField) -> SpectralField:
    """Apply e^(tA) to a field.  Returns a field in the caller's chart."""
    _check_same(spectrum, x)
    ce = x.to_eigen().coeffs * np.exp(spectrum.eig * t)
    out = SpectralField(spectrum, ce, "eigen")
    return out.to_physical() if x.chart == "phys" else out


def fractional_power_apply(spectrum: Spectrum, theta: float, x: SpectralField) -> SpectralField:
    """Apply (-A)^theta through the eigen chart (principal branch)."""
    _check_same(spectrum, x)
    ce = x.to_eigen().coeffs * np.power(-spectrum.eig, theta)
    out = SpectralField(spectrum, ce, "eigen")
    return out.to_physical() if x.chart == "phys" else out


def resolvent_apply(
    spectrum: Spectrum, lam: complex, x: SpectralField, tol: float = 1e-12
) -> SpectralField:
    """Apply the resolvent (lam - A)^(-1) to a field.

    Raises SpectrumHit when lam sits within `tol` (relative to max(1, |lam|))
    of an eigenvalue of any block.
    """
    _check_same(spectrum, x)
    denom = lam - spectrum.eig
    dist = np.abs(denom)
    cut = tol * max(1.0, abs(lam))
    if dist.min() < cut:
        k = int(np.unravel_index(np.argmin(dist), dist.shape)[0])
        raise SpectrumHit(lam, k)
    ce = x.to_eigen().coeffs / denom
    out = SpectralField(spectrum, ce, "eigen")
    return out.to_physical() if x.chart == "phys" else out


@dataclass(frozen=True)
class AsymptoticsReport:
    regime: str                      # "complex", "real" or "heat"
    slopes: dict                     # fitted log-log slopes against mu
    predicted: dict                  # tabulated exponents for the regime
    window: tuple[int, int]          # block index range used for the fit
    mu_vs_index: float               # growth exponent of mu against 1-based index


def _loglog_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def fit_asymptotics(spectrum: Spectrum, min_modes: int = 32) -> AsymptoticsReport:
    """Fit the large-mu growth exponents of the per-block quantities.

    The fit window is the top half of the blocks ordered by mu.  For damped
    spectra the window must be of one eigenvalue type (all conjugate pairs
    or all real pairs); otherwise more modes are needed and
    InsufficientModes is raised.
    """
    n = len(spectrum)
    if n < min_modes:
        raise InsufficientModes(f"{n} blocks < {min_modes} required for a fit")
    i0 = n // 2
    window = spectrum.blocks[i0:]
    mus = np.array([b.mu for b in window])
    k_index = np.arange(1, n + 1, dtype=float)
    mu_vs_index = _loglog_slope(k_index[i0:], np.array([b.mu for b in window]))

    if not spectrum.spec.is_damped:
        lam = np.abs(np.array([b.eigs[0] for b in window]))
        slopes = {"lam": _loglog_slope(mus, lam)}
        predicted = {"lam": spectrum.spec.beta}
        return AsymptoticsReport("heat", slopes, predicted, (i0, n), mu_vs_index)

    kinds = {b.is_complex_pair for b in window}
    if len(kinds) != 1:
        raise InsufficientModes(
            "fit window mixes conjugate-pair and real-pair blocks; increase n"
        )
    complex_regime = kinds.pop()
    alpha = spectrum.spec.alpha
    slopes = {
        "lam_plus": _loglog_slope(mus, np.abs([b.lam_plus for b in window])),
        "lam_minus": _loglog_slope(mus, np.abs([b.lam_minus for b in window])),
        "chi": _loglog_slope(mus, np.array([b.chi for b in window])),
        "b_plus": _loglog_slope(mus, np.abs([b.b[0] for b in window])),
        "base_norm": _loglog_slope(mus, np.array([b.base_norm for b in window])),
    }
    if complex_regime:
        predicted = {
            "lam_plus": 0.5,
            "lam_minus": 0.5,
            "chi": 0.0,
            "b_plus": 0.0,
            "base_norm": -0.5,
        }
        regime = "complex"
    else:
        predicted = {
            "lam_plus": 1.0 - alpha,
            "lam_minus": alpha,
            "chi": 0.5 - alpha,
            "b_plus": 0.5 - alpha,
            "base_norm": -0.5,
        }
        regime = "real"
    return AsymptoticsReport(regime, slopes, predicted, (i0, n), mu_vs_index)


def mode_values(spec: OperatorSpec, modes: list[BaseMode], points: np.ndarray) -> np.ndarray:
    """Evaluate normalized base eigenfunctions on spatial points.

    points : (P, m) array inside the box.
    Returns (len(modes), P).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != spec.m:
        raise InvalidSpec(f"points have dimension {pts.shape[1]}, expected {spec.m}")
    out = np.empty((len(modes), pts.shape[0]))
    if spec.bc == "dirichlet":
        scale = math.sqrt(2.0 / spec.length) ** spec.m
        base = math.pi / spec.length
        for i, mo in enumerate(modes):
            vals = np.ones(pts.shape[0])
            for axis, j in enumerate(mo.jvec):
                vals = vals * np.sin(base * j * pts[:, axis])
            out[i] = scale * vals
    else:
        norm = math.sqrt(2.0 / spec.length**spec.m)
        base = 2 * math.pi / spec.length
        for i, mo in enumerate(modes):
            phase = base * (pts @ np.array(mo.jvec, dtype=float))
            out[i] = norm * (np.cos(phase) if mo.kind == "cos" else np.sin(phase))
    return out
