"""Command-line orchestration: config resolution, dispatch, artifacts.

Every subcommand resolves one :class:`ExperimentConfig` (``--preset`` or
``--config``, with ``--seed`` overriding the config seed), runs one module
operation, and writes two artifacts into ``--out``: a CSV table whose
first row carries the config hash, and a JSON manifest with the config,
its hash, the seed, library versions, the admissibility report and the
wall time.  Identical (config, seed) pairs produce byte-identical CSVs.

Exit codes: 0 success, 1 numeric failure (residual or tolerance
violated), 2 invalid config or usage, 3 parameters outside the declared
coverage (including divergent smoothing-cost integrals).

``SPECGAL_THREADS`` supplies the default for ``--threads`` and is the
only environment variable consulted.  The numeric kernels are vectorized
and run sequentially, so outputs never depend on the thread setting; the
value is recorded in the manifest.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .admissibility import check
from .config import (
    ExperimentConfig,
    config_hash,
    load_config,
    preset,
    preset_names,
)
from .control import (
    gamma_norm,
    gramian,
    minimal_energy,
    synthesize_control,
    verify_steering,
    worst_case_energy,
)
from .drift import Drift, per_mode_holder_norms
from .errors import (
    ConfigInvalid,
    DivergentGammaIntegral,
    OutOfRange,
    RangeViolation,
    ResidualTooLarge,
    SpecgalError,
)
from .kolmogorov import constants_ledger, drift_field_data, solve_backward
from .noise import NoiseSpec, sample_convolution, weighted_trace_test
from .regularity import maxreg_ratio, resolvent_line_scan
from .reports import manifest_dict, write_csv, write_manifest
from .simulate import (
    SimGrid,
    counterexample_residual,
    galerkin_convergence,
    ito_tanaka_residual,
    simulate_mild,
    uniqueness_experiment,
)
from .spectral import build_spectrum

__all__ = ["COMMANDS", "main", "run"]

COMMANDS = (
    "spectrum",
    "gramian",
    "control",
    "trace",
    "convolution",
    "simulate",
    "uniqueness",
    "galerkin",
    "counterexample",
    "itotanaka",
    "kolmogorov",
    "maxreg",
    "resolvent",
    "admissible",
)

_HELP = {
    "spectrum": "eigenvalue table of the truncated operator",
    "gramian": "steering-factor scan over a geometric time grid",
    "control": "explicit steering energies against the Gramian optimum",
    "trace": "weighted trace convergence diagnostic per singularity weight",
    "convolution": "Monte Carlo covariance of the stochastic convolution",
    "simulate": "mild-solution trajectories of the truncated equation",
    "uniqueness": "scheme-gap decay D(dt) over a step-size ladder",
    "galerkin": "truncation convergence against a reference resolution",
    "counterexample": "residuals of the explosive-drift closed forms",
    "itotanaka": "pathwise identity residual over a step-size ladder",
    "kolmogorov": "backward-equation constants and fixed-point solve",
    "maxreg": "maximal regularity ratios across the truncation ladder",
    "resolvent": "resolvent norms along a vertical line with witnesses",
    "admissible": "coverage report for the configured parameters",
}


# ---------------------------------------------------------------------------
# subcommand bodies: each returns (csv columns, manifest extras)


def _cmd_spectrum(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    lam1 = sp.eig[:, 0]
    cols = {
        "block": list(range(len(sp))),
        "mu": sp.mu,
        "eig1_re": lam1.real,
        "eig1_im": lam1.imag,
    }
    if cfg.operator.is_damped:
        lam2 = sp.eig[:, 1]
        cols["eig2_re"] = lam2.real
        cols["eig2_im"] = lam2.imag
        cols["chi"] = [b.chi for b in sp.blocks]
    cols["base_norm"] = [b.base_norm for b in sp.blocks]
    extra = {
        "state_dim": sp.state_dim,
        "spectral_abscissa": float(sp.eig.real.max()),
    }
    return cols, extra


def _cmd_gramian(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    lo, hi, pts = cfg.t_grid
    g = cfg.operator.gamma
    ts, values, argmax, qmin = np.geomspace(lo, hi, pts), [], [], []
    for t in ts:
        gset = gramian(sp, g, float(t))
        rep = gamma_norm(gset)
        values.append(rep.value)
        argmax.append(rep.argmax_block)
        qmin.append(float(np.linalg.eigvalsh(gset.Q).min()))
    cols = {"t": ts, "gamma_value": values, "argmax_block": argmax,
            "q_min_eig": qmin}
    return cols, {"gamma": g}


def _cmd_control(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    g = cfg.operator.gamma
    rng = np.random.default_rng(cfg.seed)
    h = rng.standard_normal((len(sp), sp.dim))
    h /= np.linalg.norm(h)
    lo, hi, pts = cfg.t_grid
    ts = np.geomspace(lo, hi, pts)
    minimal, explicit, worst, terminal = [], [], [], []
    for t in ts:
        minimal.append(minimal_energy(gramian(sp, g, float(t)), h))
        sig = synthesize_control(sp, h, float(t))
        explicit.append(sig.energy)
        terminal.append(verify_steering(sig))
        worst.append(worst_case_energy(sp, float(t)))
    cols = {"t": ts, "minimal_energy": minimal, "explicit_energy": explicit,
            "worst_case_energy": worst, "terminal_norm": terminal}
    return cols, {"gamma": g, "max_terminal_norm": float(max(terminal))}


def _cmd_trace(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    rep = weighted_trace_test(
        sp, NoiseSpec(seed=cfg.seed, truncation=cfg.n_modes), T=cfg.horizon
    )
    cols = {
        "eta": [row.eta for row in rep.per_eta],
        "quarter_sum": [row.quarter_sum for row in rep.per_eta],
        "half_sum": [row.half_sum for row in rep.per_eta],
        "full_sum": [row.full_sum for row in rep.per_eta],
        "tail_frac": [row.tail_frac for row in rep.per_eta],
        "growth_ratio": [row.growth_ratio for row in rep.per_eta],
        "convergent": [row.convergent for row in rep.per_eta],
    }
    extra = {
        "convergent": rep.convergent,
        "analytic_convergent": rep.analytic_convergent,
        "analytic_note": rep.analytic_note,
    }
    return cols, extra


def _cmd_convolution(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    g = cfg.operator.gamma
    paths = sample_convolution(
        sp, cfg.horizon, cfg.steps, NoiseSpec(seed=cfg.seed), samples=cfg.samples
    )
    terminal = paths[:, -1]
    exact = np.einsum("nii->ni", gramian(sp, g, cfg.horizon).Q)
    mc = terminal.var(axis=0, ddof=1)
    se = exact * np.sqrt(2.0 / (cfg.samples - 1))
    z = (mc - exact) / se
    n, d = exact.shape
    cols = {
        "block": np.repeat(np.arange(n), d),
        "slot": np.tile(np.arange(d), n),
        "exact_var": exact.ravel(),
        "mc_var": mc.ravel(),
        "stderr": se.ravel(),
        "z": z.ravel(),
    }
    return cols, {"samples": cfg.samples, "max_abs_z": float(np.abs(z).max())}


def _cmd_simulate(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    dr = Drift(cfg.drift, sp)
    grid = SimGrid(cfg.horizon, cfg.steps)
    samples = min(cfg.samples, 64)
    paths = simulate_mild(
        sp, dr, NoiseSpec(seed=cfg.seed), grid,
        np.zeros((len(sp), sp.dim)), samples=samples,
    )
    sq = np.sum(paths**2, axis=(2, 3))
    cols = {
        "time": grid.times,
        "mean_sq": sq.mean(axis=0),
        "min_sq": sq.min(axis=0),
        "max_sq": sq.max(axis=0),
        "sample0_sq": sq[0],
    }
    return cols, {"samples": samples, "terminal_mean_sq": float(sq[:, -1].mean())}


def _cmd_uniqueness(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    dr = Drift(cfg.drift, sp)
    rep = uniqueness_experiment(
        sp, dr, NoiseSpec(seed=cfg.seed), cfg.horizon, cfg.steps_ladder,
        np.zeros((len(sp), sp.dim)), samples=cfg.samples,
    )
    cols = {"dt": rep.dts, "d_mean": rep.d_mean, "d_stderr": rep.d_stderr}
    return cols, {"order": float(rep.order), "monotone": rep.monotone()}


def _cmd_galerkin(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    dr = Drift(cfg.drift, sp)
    rep = galerkin_convergence(
        sp, dr, NoiseSpec(seed=cfg.seed), SimGrid(cfg.horizon, cfg.steps),
        cfg.ladder, np.zeros((len(sp), sp.dim)), samples=min(cfg.samples, 64),
    )
    cols = {
        "n": rep.ns,
        "gap_mean": rep.gap_mean,
        "gap_stderr": rep.gap_stderr,
        "gap_hat_mean": rep.gap_hat_mean,
        "gap_hat_stderr": rep.gap_hat_stderr,
    }
    return cols, {"monotone": rep.monotone()}


def _cmd_counterexample(cfg: ExperimentConfig):
    if cfg.drift.kind != "counterexample":
        raise ConfigInvalid(
            f"<config {cfg.name!r}>",
            "the counterexample command needs the explosive-drift "
            "configuration (preset 'counterexample')",
        )
    res_zero = counterexample_residual([0.0])
    res_tau8 = counterexample_residual([0.0] * 8 + [1.0])
    res_tau7 = counterexample_residual([0.0] * 7 + [1.0])
    cols = {
        "candidate": ["zero", "tau8_sin2xi", "tau7_sin2xi"],
        "residual": [res_zero, res_tau8, res_tau7],
    }
    if max(res_zero, res_tau8) > 1e-10:
        raise ResidualTooLarge(
            "closed-form candidates should solve the forced equation, got "
            f"residuals {res_zero:.3e} and {res_tau8:.3e}"
        )
    if res_tau7 <= 0.1:
        raise ResidualTooLarge(
            f"the tau^7 probe should NOT solve the equation, residual {res_tau7:.3e}"
        )
    extra = {"solution_tolerance": 1e-10, "probe_floor": 0.1}
    return cols, extra


def _cmd_itotanaka(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, 1)
    dr = Drift(cfg.drift, sp)
    f = drift_field_data(dr, sp)
    norms = per_mode_holder_norms(dr, samples=500, seed=cfg.seed)
    n_holder = float(max(norms.max(), 1e-6))
    field = solve_backward(
        sp, cfg.operator.gamma, f, f, T=cfg.horizon,
        steps=max(cfg.steps_ladder), theta=cfg.drift.theta,
        n_holder=n_holder, nodes_per_dim=12, tolerance=1e-8,
    )
    dts, means, maxes = [], [], []
    for steps in cfg.steps_ladder:
        grid = SimGrid(cfg.horizon, steps)
        rep = ito_tanaka_residual(
            sp, dr, NoiseSpec(seed=cfg.seed), grid, field,
            np.zeros((1, sp.dim)), samples=min(cfg.samples, 32),
        )
        dts.append(grid.dt)
        means.append(rep.mean)
        maxes.append(rep.max)
    cols = {"steps": list(cfg.steps_ladder), "dt": dts,
            "residual_mean": means, "residual_max": maxes}
    extra = {"solver_residual": float(field.residual)}
    if all(v > 0 for v in means):
        slope = np.polyfit(np.log(dts), np.log(means), 1)[0]
        extra["order"] = float(slope)
    return cols, extra


def _cmd_kolmogorov(cfg: ExperimentConfig):
    n_small = 2 if cfg.operator.family == "heat" else 1
    sp = build_spectrum(cfg.operator, n_small)
    dr = Drift(cfg.drift, sp)
    theta = cfg.drift.theta
    led = constants_ledger(
        sp, cfg.operator.gamma, cfg.horizon, theta, b_norm=dr.bound
    )
    f = drift_field_data(dr, sp)
    norms = per_mode_holder_norms(dr, samples=500, seed=cfg.seed)
    field = solve_backward(
        sp, cfg.operator.gamma, f, f, T=cfg.horizon, steps=64, theta=theta,
        n_holder=float(max(norms.max(), 1e-6)), nodes_per_dim=10,
        tolerance=1e-8,
    )
    cols = {"t": led.k_times, "k_value": led.k_values}
    extra = {
        "C_T": led.C_T,
        "M_T": led.M_T,
        "endpoint_exponent": led.endpoint_exponent,
        "small_T_threshold": led.small_T_threshold,
        "contraction_factor": float(field.contraction_factor),
        "iterations": len(field.iterate_distances),
        "solver_residual": float(field.residual),
        "sup_c2_max": float(field.sup_c2_profile.max()),
    }
    return cols, extra


def _cmd_maxreg(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    steps, n_freq, zeta = 512, 8, 1.0
    times = np.linspace(0.0, cfg.horizon, steps + 1)
    rng = np.random.default_rng(cfg.seed)
    n_max, d = max(cfg.ladder), sp.dim
    a = rng.standard_normal((n_freq, n_max, d))
    b = rng.standard_normal((n_freq, n_max, d))
    omegas = 2.0 * np.pi * np.arange(1, n_freq + 1) / cfg.horizon
    cos = np.cos(omegas[:, None] * times[None, :])
    sin = np.sin(omegas[:, None] * times[None, :])
    ratios, bounds, within = [], [], []
    for n in cfg.ladder:
        samples = np.einsum("qt,qnd->tnd", cos, a[:, :n]) + np.einsum(
            "qt,qnd->tnd", sin, b[:, :n]
        )
        rep = maxreg_ratio(sp.truncate(n), samples, cfg.horizon, zeta=zeta)
        ratios.append(rep.ratio)
        bounds.append(rep.bound)
        within.append(rep.within_bound)
    cols = {"n": list(cfg.ladder), "ratio": ratios, "bound": bounds,
            "within_bound": within}
    spread = max(ratios) / min(ratios) if min(ratios) > 0 else float("inf")
    return cols, {"zeta": zeta, "ratio_spread": float(spread)}


def _cmd_resolvent(cfg: ExperimentConfig):
    sp = build_spectrum(cfg.operator, cfg.n_modes)
    scan = resolvent_line_scan(sp, zeta=0.0)
    w_eta = np.abs(sp.eig[:, 0].imag)
    k_grid, k_wit = len(scan.etas), len(scan.witness_mu)
    cols = {
        "kind": ["grid"] * k_grid + ["witness"] * k_wit,
        "eta": np.concatenate([scan.etas, w_eta]),
        "norm": np.concatenate([scan.norms, scan.witness_norms]),
        "mu": np.concatenate([np.full(k_grid, np.nan), scan.witness_mu]),
    }
    extra = {"zeta": scan.zeta, "sup_norm": float(scan.sup_norm)}
    return cols, extra


def _cmd_admissible(cfg: ExperimentConfig):
    report = check(cfg.operator, cfg.drift)
    cols = {
        "name": [v.name for v in report.verdicts],
        "admissible": [v.admissible for v in report.verdicts],
        "binding": [v.binding.replace(",", ";") for v in report.verdicts],
    }
    return cols, {"covering": list(report.covering)}


_BODIES = {
    "spectrum": _cmd_spectrum,
    "gramian": _cmd_gramian,
    "control": _cmd_control,
    "trace": _cmd_trace,
    "convolution": _cmd_convolution,
    "simulate": _cmd_simulate,
    "uniqueness": _cmd_uniqueness,
    "galerkin": _cmd_galerkin,
    "counterexample": _cmd_counterexample,
    "itotanaka": _cmd_itotanaka,
    "kolmogorov": _cmd_kolmogorov,
    "maxreg": _cmd_maxreg,
    "resolvent": _cmd_resolvent,
    "admissible": _cmd_admissible,
}


# ---------------------------------------------------------------------------
# orchestration


def run(cfg: ExperimentConfig, command: str, out_dir: str, threads: int = 1) -> int:
    """Execute one subcommand and write its artifacts.

    Returns the process exit code.  Module errors propagate to the caller
    (``main`` maps them to exit codes).
    """
    if command not in _BODIES:
        raise ConfigInvalid("<cli>", f"unknown command {command!r}")
    report = check(cfg.operator, cfg.drift)
    if cfg.statement:
        try:
            verdict = report.verdict(cfg.statement)
        except KeyError:
            raise ConfigInvalid(
                f"<config {cfg.name!r}>",
                f"unknown statement {cfg.statement!r}",
            ) from None
        if command != "admissible" and not verdict.admissible:
            print(
                f"statement {cfg.statement!r} does not cover this "
                f"configuration: {verdict.binding}",
                file=sys.stderr,
            )
            return 3
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg_hash = config_hash(cfg)
    t0 = time.perf_counter()
    cols, extra = _BODIES[command](cfg)
    wall = time.perf_counter() - t0
    outputs = [str(write_csv(out / f"{command}.csv", cols, cfg_hash))]
    if command == "admissible":
        blob = report.as_dict()
        blob["config_hash"] = cfg_hash
        path = out / "admissibility.json"
        write_manifest(path, blob)
        outputs.append(str(path))
    manifest = manifest_dict(
        cfg, cfg_hash, report.as_dict(), command, outputs, wall, threads, extra
    )
    outputs.append(str(write_manifest(out / f"{command}-manifest.json", manifest)))
    for line in outputs:
        print(line)
    if command == "admissible":
        covered = (
            report.verdict(cfg.statement).admissible
            if cfg.statement
            else report.admissible
        )
        return 0 if covered else 3
    return 0


def _default_threads() -> int:
    raw = os.environ.get("SPECGAL_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specgal",
        description="spectral toolkit experiments: one subcommand per instrument",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=_HELP[name])
        p.add_argument("--preset", choices=preset_names(), help="built-in config")
        p.add_argument("--config", help="path to a JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default="specgal-out",
                       help="output directory (default: specgal-out)")
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help="worker threads to record (kernels are sequential)")
    return parser


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.preset and args.config:
        raise ConfigInvalid("<cli>", "pass either --preset or --config, not both")
    if args.preset:
        return preset(args.preset, seed=args.seed)
    if args.config:
        cfg = load_config(args.config)
        return cfg if args.seed is None else replace(cfg, seed=args.seed)
    raise ConfigInvalid("<cli>", "one of --preset or --config is required")


def main(argv: list[str] | None = None) -> int:
    """Entry point: parse, dispatch, map errors to exit codes."""
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.threads < 1:
            raise ConfigInvalid("<cli>", f"--threads must be >= 1, got {args.threads}")
        return run(cfg, args.command, args.out, threads=args.threads)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (DivergentGammaIntegral, OutOfRange, RangeViolation) as exc:
        print(f"outside coverage: {exc}", file=sys.stderr)
        return 3
    except SpecgalError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
