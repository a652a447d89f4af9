"""Exception types shared across the package.

Every error raised deliberately by specgal derives from SpecgalError, so
callers (and the CLI) can distinguish modelling/configuration problems from
genuine bugs.  The CLI maps these onto process exit codes.
"""

from __future__ import annotations

__all__ = [
    "SpecgalError",
    "InvalidSpec",
    "DegenerateMode",
    "SpectrumMismatch",
    "SpectrumHit",
    "InsufficientModes",
    "SingularGramian",
    "DegreeTooSmall",
    "RangeViolation",
    "GridTooCoarse",
    "PicardNoConvergence",
    "UnsupportedCandidate",
    "MissingKolmogorovSolution",
    "QuadratureDegreeTooLow",
    "ContractionFailure",
    "ResidualTooLarge",
    "DivergentGammaIntegral",
    "OutOfRange",
    "ConfigInvalid",
]


class SpecgalError(Exception):
    """Base class for all deliberate specgal failures."""


class InvalidSpec(SpecgalError):
    """Operator parameters outside their admissible ranges."""


class DegenerateMode(SpecgalError):
    """A block where the two eigenvalue branches collide (rho^2 = 4 mu^(1-2a))."""

    def __init__(self, k: int, mu: float):
        self.k = k
        self.mu = mu
        super().__init__(f"mode {k}: eigenvalue branches collide at mu={mu!r}")


class SpectrumMismatch(SpecgalError):
    """Two spectra that were assumed to share blocks do not."""


class SpectrumHit(SpecgalError):
    """Resolvent evaluated too close to an eigenvalue."""

    def __init__(self, lam: complex, k: int):
        self.lam = lam
        self.k = k
        super().__init__(f"resolvent point {lam!r} within tolerance of eigenvalue of block {k}")


class InsufficientModes(SpecgalError):
    """An asymptotic fit was requested on too few modes to be meaningful."""


class SingularGramian(SpecgalError):
    """A controllability Gramian block is numerically singular."""

    def __init__(self, k: int, detail: str = ""):
        self.k = k
        super().__init__(f"gramian block {k} is numerically singular{': ' + detail if detail else ''}")


class DegreeTooSmall(SpecgalError):
    """Steering profile degree too small for the requested energy integrability."""


class RangeViolation(SpecgalError):
    """Control synthesis requested outside the supported (alpha, gamma) range."""

    def __init__(self, alpha: float, gamma: float, detail: str = ""):
        self.alpha = alpha
        self.gamma = gamma
        super().__init__(
            f"unsupported parameter range alpha={alpha!r}, gamma={gamma!r}"
            + (f": {detail}" if detail else "")
        )


class GridTooCoarse(SpecgalError):
    """A grid-based evaluation failed its internal refinement check."""


class PicardNoConvergence(SpecgalError):
    """Fixed-point iteration did not reach tolerance within the sweep budget."""

    def __init__(self, iterations: int, distance: float):
        self.iterations = iterations
        self.distance = distance
        super().__init__(f"no convergence after {iterations} sweeps (last distance {distance:.3e})")


class UnsupportedCandidate(SpecgalError):
    """Residual check requested for a candidate outside the single-mode family."""


class MissingKolmogorovSolution(SpecgalError):
    """Identity-check requested without a backward solution to insert."""


class QuadratureDegreeTooLow(SpecgalError):
    """Gauss rule too short for the requested moment accuracy."""


class ContractionFailure(SpecgalError):
    """No weight gamma in the scanned range makes the fixed-point map contract."""


class ResidualTooLarge(SpecgalError):
    """A plug-back residual exceeded its tolerance."""


class DivergentGammaIntegral(SpecgalError):
    """The singular endpoint of a Gamma-profile integral fails integrability."""


class OutOfRange(SpecgalError):
    """Admissibility query outside the domain of the statement being checked."""


class ConfigInvalid(SpecgalError):
    """Experiment configuration failed validation."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")
