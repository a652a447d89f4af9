"""Parameter-range vetting for the uniqueness statements behind the toolkit.

Every experiment declares an operator family (`OperatorSpec`) and a drift
(`DriftSpec`).  This module answers, purely from those declared parameters,
which uniqueness statement covers the configuration, and spells out the
inequality that blocks it when none does.  Five statements are vetted:

``damped_range``
    the general damped family with mode growth ``mu_n ~ n**delta``:
    alpha in [1/2, 2/3), gamma in [0, 1 - 3*alpha/2), theta above the
    steering threshold, and a noise condition (trace-class smoothing or
    fast mode growth plus a summable drift series).
``damped_wave_1d``
    the wave ladder ``mu_n ~ n**2`` where the growth condition becomes
    gamma > 1/4 - alpha/2.
``damped_beam``
    the beam ladder ``mu_n ~ n**(4/m)`` with alpha < min(2/3, 1 - m/8)
    and gamma > m/8 - alpha/2.
``heat``
    the heat family at beta = 1 with per-dimension gamma/theta windows
    and a drift of averaged or noise-factored shape.
``structure_condition``
    drifts that factor through the noise operator with a bounded Holder
    map; state and noise space coincide (heat family), any beta, with
    (m - 2*beta)/2 < gamma < beta*theta/(2 - theta).

Three checklists accompany the statements: ``finite_dim_hypotheses`` (the
truncation-level requirements: analyticity, steering-cost window, noise
nondegeneracy), ``noise_hilbert_schmidt`` (square-summable noise
amplitudes) and ``drift_series`` (eigencoordinates plus a summable
per-mode Holder series).  A configuration is admissible when any
statement covers it; the checklists are informational.

All comparisons run in exact rational arithmetic: float inputs convert to
fractions losslessly, so open endpoints reject their boundary values
reliably (gamma equal to 1/4 - alpha/2 is rejected, not rounded in).
gamma >= 0 is enforced in every statement, including where the algebraic
lower bound is negative, matching the sign convention of the noise
smoothing exponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .drift import DriftSpec
from .errors import OutOfRange
from .spectral import OperatorSpec

__all__ = [
    "CHECKLISTS",
    "STATEMENTS",
    "AdmissibilityReport",
    "Verdict",
    "check",
    "theta_threshold",
]

STATEMENTS = (
    "damped_range",
    "damped_wave_1d",
    "damped_beam",
    "heat",
    "structure_condition",
)
CHECKLISTS = ("finite_dim_hypotheses", "noise_hilbert_schmidt", "drift_series")

_HALF = Fraction(1, 2)
_TWO_THIRDS = Fraction(2, 3)

# Drift shapes whose per-mode Holder norms are summable by construction:
# finitely many active modes, or a bounded average feeding a fixed profile.
_SUMMABLE_SHAPES = ("zero", "b_r")
_SUMMABLE_STRUCTURE_FORMS = ("b_r", "constant")


@dataclass(frozen=True)
class Verdict:
    """Outcome of one statement or checklist.

    Parameters
    ----------
    name : str
        Statement identifier, one of ``STATEMENTS`` or ``CHECKLISTS``.
    admissible : bool
        Whether every clause of the statement holds.
    binding : str
        The first violated clause, instantiated with the supplied values;
        empty when admissible.
    checks : tuple of str
        Every clause in evaluation order, suffixed ``[ok]`` or
        ``[violated]``.
    """

    name: str
    admissible: bool
    binding: str = ""
    checks: tuple[str, ...] = ()


@dataclass(frozen=True)
class AdmissibilityReport:
    """All statement and checklist verdicts for one configuration.

    The report is a pure function of the operator and drift declarations:
    equal inputs produce equal reports, including the explanation strings.
    """

    verdicts: tuple[Verdict, ...]

    @property
    def admissible(self) -> bool:
        """True when at least one statement covers the configuration."""
        return bool(self.covering)

    @property
    def covering(self) -> tuple[str, ...]:
        """Names of the statements that cover the configuration."""
        return tuple(
            v.name for v in self.verdicts if v.name in STATEMENTS and v.admissible
        )

    def verdict(self, name: str) -> Verdict:
        """Return the verdict with the given name."""
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def as_dict(self) -> dict:
        """JSON-ready form of the report."""
        return {
            "admissible": self.admissible,
            "covering": list(self.covering),
            "verdicts": [
                {
                    "name": v.name,
                    "admissible": v.admissible,
                    "binding": v.binding,
                    "checks": list(v.checks),
                }
                for v in self.verdicts
            ],
        }


def theta_threshold(alpha: object, gamma: object) -> Fraction:
    """Smallest Holder exponent the damped statements admit.

    Parameters
    ----------
    alpha : int, float or Fraction
        Damping exponent, must lie in [1/2, 1).
    gamma : int, float or Fraction
        Noise smoothing exponent; ``2*gamma + alpha`` must be positive.

    Returns
    -------
    Fraction
        ``2 - (2 - 2*alpha)/(2*gamma + alpha)``, clipped below at 0.  The
        admissible window is ``(threshold, 1)``; a return of 1 or more
        means the window is empty.  Monotone nondecreasing in gamma.

    Raises
    ------
    OutOfRange
        If alpha falls outside [1/2, 1) or ``2*gamma + alpha <= 0``.
    """
    a = Fraction(alpha)
    g = Fraction(gamma)
    if not _HALF <= a < 1:
        raise OutOfRange(f"alpha must lie in [1/2, 1), got {float(a)!r}")
    if 2 * g + a <= 0:
        raise OutOfRange(
            f"2*gamma + alpha must be positive, got {float(2 * g + a)!r}"
        )
    t = 2 - (2 - 2 * a) / (2 * g + a)
    return t if t > 0 else Fraction(0)


# ---------------------------------------------------------------------------
# clause helpers


def _ineq(value: Fraction, op: str, bound: Fraction, label: str) -> tuple[bool, str]:
    """Evaluate ``value op bound`` exactly and render the instance."""
    ok = {
        "<": value < bound,
        "<=": value <= bound,
        ">": value > bound,
        ">=": value >= bound,
    }[op]
    shown = op if ok else {"<": ">=", "<=": ">", ">": "<=", ">=": "<"}[op]
    return ok, f"{label}: {float(value)!r} {shown} {float(bound)!r}"


def _growth(spec: OperatorSpec) -> Fraction:
    """Exponent delta in the mode growth ``mu_n ~ n**delta``."""
    if spec.family == "damped_beam":
        return Fraction(4, spec.m)
    return Fraction(2, spec.m)


def _series_clause(
    delta: Fraction, alpha: Fraction, drift: DriftSpec
) -> tuple[bool, str]:
    """Summability of the per-mode Holder norms weighted by mu_n**(-alpha)."""
    if alpha * delta > 1:
        return True, (
            "drift series summable for any bounded Holder drift: "
            f"alpha*delta = {float(alpha * delta)!r} > 1"
        )
    if drift.kind in _SUMMABLE_SHAPES or (
        drift.kind == "structure" and drift.form in _SUMMABLE_STRUCTURE_FORMS
    ):
        return True, (
            f"drift series summable by shape: {drift.kind!r} drift touches "
            "finitely many mode profiles"
        )
    return False, (
        f"drift series not summable: alpha*delta = {float(alpha * delta)!r} <= 1 "
        f"and per-mode Holder norms of a {drift.kind!r} drift do not decay"
    )


def _heat_shape_clause(drift: DriftSpec) -> tuple[bool, str]:
    """Per-mode Holder summability for the heat family (shape only)."""
    if drift.kind in _SUMMABLE_SHAPES or (
        drift.kind == "structure" and drift.form in _SUMMABLE_STRUCTURE_FORMS
    ):
        return True, (
            f"drift series summable by shape: {drift.kind!r} drift touches "
            "finitely many mode profiles"
        )
    return False, (
        f"drift series not summable: per-mode Holder norms of a "
        f"{drift.kind!r} drift do not decay"
    )


def _verdict(name: str, clauses: list[tuple[bool, str]]) -> Verdict:
    checks = []
    binding = ""
    ok_all = True
    for ok, text in clauses:
        checks.append(f"{text} [{'ok' if ok else 'violated'}]")
        if not ok and not binding:
            binding = text
        ok_all = ok_all and ok
    return Verdict(name=name, admissible=ok_all, binding=binding, checks=tuple(checks))


def _inapplicable(name: str, reason: str) -> Verdict:
    return Verdict(
        name=name, admissible=False, binding=reason, checks=(f"{reason} [violated]",)
    )


# ---------------------------------------------------------------------------
# statement predicates


def _damped_core(
    a: Fraction,
    g: Fraction,
    t: Fraction,
    alpha_hi: Fraction,
    alpha_hi_label: str,
    gamma_lo: Fraction | None,
    gamma_lo_label: str,
) -> list[tuple[bool, str]]:
    clauses = [
        _ineq(a, ">=", _HALF, "alpha >= 1/2"),
        _ineq(a, "<", alpha_hi, alpha_hi_label),
        _ineq(g, ">=", Fraction(0), "gamma >= 0"),
    ]
    if gamma_lo is not None:
        clauses.append(_ineq(g, ">", gamma_lo, gamma_lo_label))
    clauses.append(
        _ineq(g, "<", 1 - 3 * a / 2, "gamma < 1 - 3*alpha/2")
    )
    if 2 * g + a > 0:
        thr = 2 - (2 - 2 * a) / (2 * g + a)
        clauses.append(
            _ineq(t, ">", thr, "theta > 2 - (2 - 2*alpha)/(2*gamma + alpha)")
        )
    else:
        clauses.append((False, "theta threshold undefined: 2*gamma + alpha <= 0"))
    clauses.append(_ineq(t, "<", Fraction(1), "theta < 1"))
    return clauses


def _noise_route_clause(
    delta: Fraction, a: Fraction, g: Fraction, drift: DriftSpec, allow_growth: bool
) -> tuple[bool, str]:
    """Trace-class route, optionally OR-ed with growth plus drift series."""
    trace_ok = 2 * g * delta > 1
    if trace_ok:
        return True, (
            "noise condition: trace-class smoothing, 2*gamma*delta = "
            f"{float(2 * g * delta)!r} > 1"
        )
    if allow_growth and 2 * g + a > 0:
        growth_ok = delta > 1 / (2 * g + a)
        series_ok, series_text = _series_clause(delta, a, drift)
        if growth_ok and series_ok:
            return True, (
                f"noise condition: mode growth, delta = {float(delta)!r} > "
                f"1/(2*gamma + alpha) = {float(1 / (2 * g + a))!r}, and "
                + series_text
            )
        return False, (
            "noise condition fails: 2*gamma*delta = "
            f"{float(2 * g * delta)!r} <= 1; growth route "
            f"{'holds' if growth_ok else 'fails'} "
            f"(delta = {float(delta)!r} vs 1/(2*gamma + alpha) = "
            f"{float(1 / (2 * g + a))!r}) and {series_text}"
        )
    return False, (
        "noise condition fails: 2*gamma*delta = "
        f"{float(2 * g * delta)!r} <= 1 and no growth route applies"
    )


def _damped_range(
    spec: OperatorSpec, drift: DriftSpec, a: Fraction, g: Fraction, t: Fraction
) -> Verdict:
    name = "damped_range"
    if not spec.is_damped:
        return _inapplicable(
            name, f"covers damped families, got family {spec.family!r}"
        )
    delta = _growth(spec)
    clauses = _damped_core(a, g, t, _TWO_THIRDS, "alpha < 2/3", None, "")
    clauses.append(_noise_route_clause(delta, a, g, drift, allow_growth=True))
    return _verdict(name, clauses)


def _damped_wave_1d(
    spec: OperatorSpec, drift: DriftSpec, a: Fraction, g: Fraction, t: Fraction
) -> Verdict:
    name = "damped_wave_1d"
    if spec.family != "damped_wave" or spec.m != 1:
        return _inapplicable(
            name,
            "covers the 1d wave ladder, got family "
            f"{spec.family!r} with m = {spec.m}",
        )
    clauses = _damped_core(
        a,
        g,
        t,
        _TWO_THIRDS,
        "alpha < 2/3",
        Fraction(1, 4) - a / 2,
        "gamma > 1/4 - alpha/2",
    )
    clauses.append(_series_clause(Fraction(2), a, drift))
    return _verdict(name, clauses)


def _damped_beam(
    spec: OperatorSpec, drift: DriftSpec, a: Fraction, g: Fraction, t: Fraction
) -> Verdict:
    name = "damped_beam"
    if spec.family != "damped_beam":
        return _inapplicable(
            name, f"covers the beam ladder, got family {spec.family!r}"
        )
    delta = _growth(spec)
    clauses = _damped_core(
        a,
        g,
        t,
        min(_TWO_THIRDS, 1 - Fraction(spec.m, 8)),
        "alpha < min(2/3, 1 - m/8)",
        Fraction(spec.m, 8) - a / 2,
        "gamma > m/8 - alpha/2",
    )
    trace_ok, trace_text = _ineq(
        2 * g * delta, ">", Fraction(1), "2*gamma*delta > 1 (trace-class smoothing)"
    )
    series_ok, series_text = _series_clause(delta, a, drift)
    clauses.append(
        (trace_ok or series_ok, trace_text if trace_ok else series_text)
    )
    return _verdict(name, clauses)


def _heat(
    spec: OperatorSpec, drift: DriftSpec, g: Fraction, t: Fraction
) -> Verdict:
    name = "heat"
    if spec.family != "heat":
        return _inapplicable(name, f"covers the heat family, got {spec.family!r}")
    b = Fraction(spec.beta)
    clauses: list[tuple[bool, str]] = []
    if b == 1:
        clauses.append((True, "beta == 1: 1.0 == 1.0"))
    else:
        clauses.append((False, f"beta == 1: got beta = {float(b)!r}"))
    if drift.kind in ("zero", "b_r", "structure"):
        clauses.append(
            (True, f"drift shape covered: {drift.kind!r} is averaged or factored")
        )
    else:
        clauses.append(
            (
                False,
                f"drift shape not covered: {drift.kind!r} is neither an averaged "
                "profile nor factored through the noise",
            )
        )
    if spec.m == 1:
        clauses.append(_ineq(g, ">=", Fraction(0), "gamma >= 0"))
    elif spec.m == 2:
        clauses.append(_ineq(g, ">", Fraction(0), "gamma > 0"))
    else:
        clauses.append(_ineq(g, ">", _HALF, "gamma > 1/2"))
    clauses.append(_ineq(g, "<", t / (2 - t), "gamma < theta/(2-theta)"))
    if spec.m == 3:
        clauses.append(_ineq(t, ">", _TWO_THIRDS, "theta > 2/3"))
    else:
        clauses.append(_ineq(t, ">", Fraction(0), "theta > 0"))
    clauses.append(_ineq(t, "<", Fraction(1), "theta < 1"))
    return _verdict(name, clauses)


def _structure_condition(
    spec: OperatorSpec, drift: DriftSpec, g: Fraction, t: Fraction
) -> Verdict:
    name = "structure_condition"
    if spec.family != "heat":
        return _inapplicable(
            name,
            "needs state space equal to noise space, got family "
            f"{spec.family!r} (damped families pair position and velocity)",
        )
    b = Fraction(spec.beta)
    clauses: list[tuple[bool, str]] = []
    if drift.kind == "structure":
        clauses.append(
            (True, "drift factors through the noise with a bounded Holder map")
        )
    else:
        clauses.append(
            (
                False,
                f"drift does not factor through the noise: kind {drift.kind!r}",
            )
        )
    clauses.append(_ineq(g, ">=", Fraction(0), "gamma >= 0"))
    clauses.append(_ineq(g, ">", (Fraction(spec.m) - 2 * b) / 2, "gamma > (m - 2*beta)/2"))
    clauses.append(_ineq(g, "<", b * t / (2 - t), "gamma < beta*theta/(2-theta)"))
    clauses.append(_ineq(t, ">", Fraction(0), "theta > 0"))
    clauses.append(_ineq(t, "<", Fraction(1), "theta < 1"))
    return _verdict(name, clauses)


# ---------------------------------------------------------------------------
# checklists


def _finite_dim(
    spec: OperatorSpec, drift: DriftSpec, a: Fraction, g: Fraction, t: Fraction
) -> Verdict:
    name = "finite_dim_hypotheses"
    if spec.is_damped:
        delta = _growth(spec)
        clauses = [
            _ineq(a, ">=", _HALF, "alpha >= 1/2 (analytic semigroup)"),
            _ineq(a, "<", Fraction(1), "alpha < 1 (analytic semigroup)"),
            _ineq(g, ">=", Fraction(0), "gamma >= 0"),
            _ineq(g, "<", 1 - 3 * a / 2, "gamma < 1 - 3*alpha/2 (cost window)"),
        ]
        if 2 * g + a > 0:
            thr = 2 - (2 - 2 * a) / (2 * g + a)
            clauses.append(
                _ineq(
                    t, ">", thr, "theta > 2 - (2 - 2*alpha)/(2*gamma + alpha)"
                )
            )
        else:
            clauses.append(
                (False, "theta threshold undefined: 2*gamma + alpha <= 0")
            )
        clauses.append(_ineq(t, "<", Fraction(1), "theta < 1"))
        trace_ok = 2 * g * delta > 1
        growth_ok = 2 * g + a > 0 and delta > 1 / (2 * g + a)
        if trace_ok or growth_ok:
            route = "trace-class smoothing" if trace_ok else "mode growth"
            clauses.append(
                (True, f"noise nondegeneracy via {route} (delta = {float(delta)!r})")
            )
        else:
            clauses.append(
                (
                    False,
                    "noise nondegeneracy fails: 2*gamma*delta = "
                    f"{float(2 * g * delta)!r} <= 1 and delta = {float(delta)!r}"
                    " <= 1/(2*gamma + alpha)",
                )
            )
        return _verdict(name, clauses)
    b = Fraction(spec.beta)
    clauses = [
        _ineq(g, ">=", Fraction(0), "gamma >= 0"),
        _ineq(g, ">", (Fraction(spec.m) - 2 * b) / 2, "gamma > (m - 2*beta)/2"),
        _ineq(g, "<", b * t / (2 - t), "gamma < beta*theta/(2-theta)"),
        _ineq(t, ">", Fraction(0), "theta > 0"),
        _ineq(t, "<", Fraction(1), "theta < 1"),
    ]
    return _verdict(name, clauses)


def _noise_hs(spec: OperatorSpec, g: Fraction) -> Verdict:
    name = "noise_hilbert_schmidt"
    delta = _growth(spec)
    if spec.is_damped:
        clause = _ineq(
            2 * g * delta,
            ">",
            Fraction(1),
            f"2*gamma*delta > 1 (delta = {float(delta)!r})",
        )
    else:
        clause = _ineq(
            g * delta,
            ">",
            Fraction(1),
            f"gamma*delta > 1 (delta = {float(delta)!r})",
        )
    return _verdict(name, [clause])


def _drift_series(spec: OperatorSpec, drift: DriftSpec, a: Fraction) -> Verdict:
    name = "drift_series"
    clauses = [
        (True, "eigenvector coordinates available on every truncation"),
    ]
    if spec.is_damped:
        clauses.append(_series_clause(_growth(spec), a, drift))
    else:
        clauses.append(_heat_shape_clause(drift))
    return _verdict(name, clauses)


# ---------------------------------------------------------------------------
# entry point


def check(spec: OperatorSpec, drift: DriftSpec) -> AdmissibilityReport:
    """Vet a configuration against every statement and checklist.

    Parameters
    ----------
    spec : OperatorSpec
        Operator family, dimension and exponents.
    drift : DriftSpec
        Drift shape and its declared Holder exponent theta.

    Returns
    -------
    AdmissibilityReport
        One verdict per statement and checklist, in the fixed order
        ``STATEMENTS + CHECKLISTS``.  Deterministic in its inputs.
    """
    a = Fraction(spec.alpha)
    g = Fraction(spec.gamma)
    t = Fraction(drift.theta)
    verdicts = (
        _damped_range(spec, drift, a, g, t),
        _damped_wave_1d(spec, drift, a, g, t),
        _damped_beam(spec, drift, a, g, t),
        _heat(spec, drift, g, t),
        _structure_condition(spec, drift, g, t),
        _finite_dim(spec, drift, a, g, t),
        _noise_hs(spec, g),
        _drift_series(spec, drift, a),
    )
    return AdmissibilityReport(verdicts=verdicts)
