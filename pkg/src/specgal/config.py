"""Declarative experiment configurations: schema, presets, hashing.

An :class:`ExperimentConfig` pins everything a run needs: the operator
family, the drift, grids and ladders, sample counts, and a mandatory
seed.  Configs round-trip losslessly through JSON (floats survive via
shortest-repr encoding), and ``config_hash`` gives the sha256 of the
canonical serialization, which every output file embeds so artifacts can
be traced back to the exact inputs that produced them.

Named presets cover the stock applications: three heat dimensions, the
1d damped wave, three beam dimensions, and the explosive-drift
counterexample configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, replace

from .drift import DriftSpec, counterexample_operator
from .errors import ConfigInvalid, InvalidSpec
from .spectral import OperatorSpec

__all__ = [
    "ExperimentConfig",
    "config_hash",
    "from_dict",
    "load_config",
    "preset",
    "preset_names",
    "save_config",
]

_FIELDS = (
    "name",
    "operator",
    "drift",
    "seed",
    "statement",
    "n_modes",
    "ladder",
    "steps_ladder",
    "horizon",
    "steps",
    "samples",
    "t_grid",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    Parameters
    ----------
    name : str
        Label used in output file names and the manifest.
    operator : OperatorSpec
        Operator family and exponents.
    drift : DriftSpec
        Drift shape and declared Holder exponent.
    seed : int
        Root seed for every random draw in the run.  Mandatory: there is
        no wall-clock default, so reruns reproduce byte-identical CSVs.
    statement : str
        Coverage statement the run claims to exercise (a name from
        ``admissibility.STATEMENTS``), or empty for none.  When set, runs
        refuse to start if the statement does not cover the config.
    n_modes : int
        Truncation used to build the spectrum.
    ladder : tuple of int
        Increasing truncations for convergence scans.
    steps_ladder : tuple of int
        Increasing step counts for time-refinement scans; each entry must
        divide the largest so solution slices line up across levels.
    horizon : float
        Final time T.
    steps : int
        Time steps for single-grid simulations.
    samples : int
        Monte Carlo sample count.
    t_grid : (float, float, int)
        Geometric time scan: smallest time, largest time, point count.
    """

    name: str
    operator: OperatorSpec
    drift: DriftSpec
    seed: int
    statement: str = ""
    n_modes: int = 64
    ladder: tuple[int, ...] = (8, 16, 32, 64)
    steps_ladder: tuple[int, ...] = (32, 64, 128, 256)
    horizon: float = 1.0
    steps: int = 256
    samples: int = 256
    t_grid: tuple[float, float, int] = (1e-3, 1.0, 33)

    def __post_init__(self) -> None:
        def bad(reason: str) -> ConfigInvalid:
            return ConfigInvalid(f"<config {self.name!r}>", reason)

        if not isinstance(self.name, str) or not self.name:
            raise bad("name must be a non-empty string")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int):
            raise bad("seed is mandatory and must be an integer")
        if not isinstance(self.statement, str):
            raise bad("statement must be a string")
        if self.n_modes < 1:
            raise bad(f"n_modes must be >= 1, got {self.n_modes}")
        for label, ladder in (("ladder", self.ladder),
                              ("steps_ladder", self.steps_ladder)):
            if len(ladder) < 1 or any(k < 1 for k in ladder):
                raise bad(f"{label} entries must be positive")
            if any(b <= a for a, b in zip(ladder, ladder[1:])):
                raise bad(f"{label} must be strictly increasing, got {ladder}")
        if max(self.ladder) > self.n_modes:
            raise bad(
                f"ladder reaches {max(self.ladder)} but n_modes is {self.n_modes}"
            )
        if any(max(self.steps_ladder) % k for k in self.steps_ladder):
            raise bad(
                "steps_ladder entries must divide the largest entry, got "
                f"{self.steps_ladder}"
            )
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise bad(f"horizon must be positive and finite, got {self.horizon}")
        if self.steps < 1:
            raise bad(f"steps must be >= 1, got {self.steps}")
        if self.samples < 1:
            raise bad(f"samples must be >= 1, got {self.samples}")
        lo, hi, pts = self.t_grid
        if not (0 < lo < hi and math.isfinite(hi)):
            raise bad(f"t_grid needs 0 < lo < hi, got ({lo}, {hi})")
        if pts < 2:
            raise bad(f"t_grid needs at least 2 points, got {pts}")

    def to_dict(self) -> dict:
        """JSON-ready dict; tuples become lists."""
        data = asdict(self)
        data["operator"] = asdict(self.operator)
        data["drift"] = asdict(self.drift)
        for key in ("g", "h", "c"):
            data["drift"][key] = list(data["drift"][key])
        data["ladder"] = list(self.ladder)
        data["steps_ladder"] = list(self.steps_ladder)
        data["t_grid"] = list(self.t_grid)
        return data


def from_dict(data: dict, path: str = "<dict>") -> ExperimentConfig:
    """Build a config from parsed JSON, rejecting unknown or missing keys."""
    if not isinstance(data, dict):
        raise ConfigInvalid(path, f"expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigInvalid(path, f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in ("name", "operator", "drift", "seed") if k not in data]
    if missing:
        raise ConfigInvalid(path, f"missing keys: {', '.join(missing)}")
    kwargs = dict(data)
    try:
        operator = OperatorSpec(**kwargs.pop("operator"))
    except (InvalidSpec, TypeError) as exc:
        raise ConfigInvalid(path, f"operator: {exc}") from exc
    drift_data = kwargs.pop("drift")
    try:
        for key in ("g", "h", "c"):
            if key in drift_data:
                drift_data[key] = tuple(drift_data[key])
        drift = DriftSpec(**drift_data)
    except (InvalidSpec, TypeError) as exc:
        raise ConfigInvalid(path, f"drift: {exc}") from exc
    for key in ("ladder", "steps_ladder"):
        if key in kwargs:
            kwargs[key] = tuple(kwargs[key])
    if "t_grid" in kwargs:
        lo, hi, pts = kwargs["t_grid"]
        kwargs["t_grid"] = (float(lo), float(hi), int(pts))
    try:
        return ExperimentConfig(operator=operator, drift=drift, **kwargs)
    except ConfigInvalid as exc:
        raise ConfigInvalid(path, exc.reason) from exc
    except TypeError as exc:
        raise ConfigInvalid(path, str(exc)) from exc


def load_config(path: str) -> ExperimentConfig:
    """Read a JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigInvalid(str(path), f"cannot read: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(str(path), f"not valid JSON: {exc}") from exc
    return from_dict(data, path=str(path))


def save_config(cfg: ExperimentConfig, path: str) -> None:
    """Write a config as formatted JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_hash(cfg: ExperimentConfig) -> str:
    """sha256 of the canonical JSON serialization."""
    blob = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# presets

_SEED = 20260816


def _averaging_drift(theta: float) -> DriftSpec:
    return DriftSpec(kind="b_r", theta=theta, r=1.0, g=(1.0,), h=(1.0,))


def _presets() -> dict[str, ExperimentConfig]:
    br = _averaging_drift
    table = {
        "heat-m1": ExperimentConfig(
            name="heat-m1",
            operator=OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0),
            drift=br(0.5),
            seed=_SEED,
            statement="heat",
        ),
        "heat-m2": ExperimentConfig(
            name="heat-m2",
            operator=OperatorSpec(family="heat", m=2, beta=1.0, gamma=0.25),
            drift=br(0.75),
            seed=_SEED,
            statement="heat",
        ),
        "heat-m3": ExperimentConfig(
            name="heat-m3",
            operator=OperatorSpec(family="heat", m=3, beta=1.0, gamma=0.6),
            drift=br(0.8),
            seed=_SEED,
            statement="heat",
        ),
        # length 1.0 keeps every block strictly underdamped at alpha = 7/12;
        # on the length-pi ladder mu = 4096 hits the critical-damping root
        # collision exactly and the spectrum refuses to build.
        "damped-wave-1d": ExperimentConfig(
            name="damped-wave-1d",
            operator=OperatorSpec(
                family="damped_wave", m=1, alpha=7 / 12, rho=1.0, gamma=0.0,
                length=1.0,
            ),
            drift=DriftSpec(kind="structure", theta=0.75, form="tanh", scale=0.5),
            seed=_SEED,
            statement="damped_wave_1d",
        ),
        "beam-m1": ExperimentConfig(
            name="beam-m1",
            operator=OperatorSpec(
                family="damped_beam", m=1, alpha=0.5, rho=1.0, gamma=0.2,
                length=1.0,
            ),
            drift=br(0.95),
            seed=_SEED,
            statement="damped_beam",
        ),
        "beam-m2": ExperimentConfig(
            name="beam-m2",
            operator=OperatorSpec(
                family="damped_beam", m=2, alpha=0.55, rho=1.0, gamma=0.1,
                length=1.0,
            ),
            drift=br(0.9),
            seed=_SEED,
            statement="damped_beam",
        ),
        "beam-m3": ExperimentConfig(
            name="beam-m3",
            operator=OperatorSpec(
                family="damped_beam", m=3, alpha=0.6, rho=1.0, gamma=0.09,
                length=1.0,
            ),
            drift=br(0.99),
            seed=_SEED,
            statement="damped_beam",
        ),
        # The explosive-drift configuration: the nonlinearity is pinned to
        # the second sine mode on (0, pi), so the operator keeps length pi.
        "counterexample": ExperimentConfig(
            name="counterexample",
            operator=counterexample_operator(),
            drift=DriftSpec(kind="counterexample", theta=0.75),
            seed=_SEED,
            statement="damped_wave_1d",
            n_modes=8,
            ladder=(2, 4, 8),
            samples=64,
        ),
    }
    return table


def preset_names() -> tuple[str, ...]:
    """Names of the built-in presets."""
    return tuple(_presets())


def preset(name: str, seed: int | None = None) -> ExperimentConfig:
    """Return a built-in preset, optionally reseeded."""
    table = _presets()
    if name not in table:
        raise ConfigInvalid(
            f"<preset {name!r}>",
            f"unknown preset; available: {', '.join(table)}",
        )
    cfg = table[name]
    return cfg if seed is None else replace(cfg, seed=seed)
