"""Acceptance gate: one test per numbered criterion, one pass/fail line each.

Criteria 3 and 4 end in deliberate failures.  Their attainable
sub-properties are asserted first (steering accuracy, Gramian optimality,
the heat-side exponent, the n-independence of the damped smoothing norm);
the test then fails with measured numbers showing that the pinned small-t
decay rates are out of reach: a 2x2 damped block driven through one noise
channel fills its position direction only at cubic order, so the smoothing
norm and every steering-control energy carry a t^(-3/2) floor from the
lowest block.  The tolerances are kept as pinned; loosening them to force
green would hide a real gap.
"""

import time

import numpy as np
import numpy.testing as npt
import pytest

from specgal.admissibility import check
from specgal.control import (
    gamma_integral,
    gamma_norm,
    gramian,
    minimal_energy,
    synthesize_control,
    verify_steering,
)
from specgal.drift import (
    Drift,
    DriftSpec,
    counterexample_operator,
    per_mode_holder_norms,
)
from specgal.errors import DivergentGammaIntegral
from specgal.kolmogorov import (
    OUKernel,
    constants_ledger,
    drift_field_data,
    ou_apply,
    ou_gradient,
    solve_backward,
)
from specgal.noise import NoiseSpec, sample_convolution, weighted_trace_test
from specgal.regularity import maxreg_ratio, resolvent_line_scan
from specgal.simulate import (
    SimGrid,
    counterexample_residual,
    counterexample_trajectory,
    ito_tanaka_residual,
    pair_paths,
    uniqueness_experiment,
)
from specgal.spectral import OperatorSpec, build_spectrum, fit_asymptotics


def _unit(rng, shape):
    h = rng.normal(size=shape)
    return h / np.linalg.norm(h)


def _holder_norm(f, theta, lo=-8.0, hi=8.0, n=1500):
    u = np.linspace(lo, hi, n)
    v = f(u[:, None])[:, 0]
    sup = float(np.max(np.abs(v)))
    du = np.abs(u[:, None] - u[None, :])
    dv = np.abs(v[:, None] - v[None, :])
    mask = du > 0
    return sup + float(np.max(dv[mask] / du[mask] ** theta))


def _tanh_field(c, w=1.0):
    def f(pts):
        return c * np.tanh(pts / w)

    return f


def test_criterion_01_counterexample_reproduction():
    t0 = time.perf_counter()
    assert counterexample_residual((0.0,)) == 0.0
    exact = np.zeros(9)
    exact[8] = 1.0
    assert counterexample_residual(exact) < 1e-10
    perturbed = np.zeros(8)
    perturbed[7] = 1.0
    assert counterexample_residual(perturbed) > 0.1
    assert time.perf_counter() - t0 < 1.0


def test_criterion_02_spectral_identities():
    t0 = time.perf_counter()
    for alpha, rho in ((0.3, 1.0), (0.5, 1.0), (0.6, 4.0)):
        op = OperatorSpec(family="damped_wave", m=1, alpha=alpha, rho=rho)
        sp = build_spectrum(op, 500)
        lp, lm = sp.eig[:, 0], sp.eig[:, 1]
        damping = rho * sp.mu**alpha
        assert float(np.max(np.abs(lp + lm + damping) / damping)) < 1e-10
        assert float(np.max(np.abs(lp * lm - sp.mu) / sp.mu)) < 1e-10
    for alpha, rho, pair in ((0.6, 4.0, (0.4, 0.6)), (0.3, 1.0, (0.5, 0.5))):
        op = OperatorSpec(family="damped_wave", m=1, alpha=alpha, rho=rho)
        rep = fit_asymptotics(build_spectrum(op, 500))
        for name, pred in zip(("lam_plus", "lam_minus"), pair):
            assert abs(rep.slopes[name] - pred) <= 0.03 * pred, (name, alpha)
    assert time.perf_counter() - t0 < 5.0


def test_criterion_03_control_bounds():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260816)
    configs = ((0.55, 0.05, -(0.5 + 0.1 / 0.45)), (0.3, 0.1, -0.7))
    for alpha, g, _ in configs:
        op = OperatorSpec(family="damped_wave", m=1, alpha=alpha, rho=1.0,
                          gamma=g, length=1.0)
        sp = build_spectrum(op, 12)
        gset = gramian(sp, g, 0.5)
        for _ in range(100):
            h = _unit(rng, (12, 2))
            signal = synthesize_control(sp, h, 0.5, gamma=g)
            assert verify_steering(signal) <= 1e-6
            assert minimal_energy(gset, h) <= signal.energy * (1.0 + 1e-9)
    lines = []
    for alpha, g, target in configs:
        op = OperatorSpec(family="damped_wave", m=1, alpha=alpha, rho=1.0,
                          gamma=g, length=1.0)
        sp = build_spectrum(op, 100)
        h = _unit(rng, (100, 2))
        ts = np.geomspace(0.05, 1.0, 8)
        es = [synthesize_control(sp, h, float(t), gamma=g).energy for t in ts]
        slope = float(np.polyfit(np.log(ts), np.log(es), 1)[0])
        lines.append(
            f"alpha={alpha}, gamma={g}: fitted exponent {slope:.3f}, "
            f"pinned {target:.4f}, deviation "
            f"{abs(slope - target) / abs(target):.0%} (tolerance 7%)"
        )
    assert time.perf_counter() - t0 < 60.0
    pytest.fail(
        "steering (residuals <= 1e-6) and Gramian optimality (minimal <= "
        "explicit on 200 cases) hold, but the energy-decay exponents do "
        "not: " + "; ".join(lines) + ".  The energy carries a "
        "mu_1^(gamma-1/2) t^(-3/2) floor contributed on the lowest block "
        "by the profile-derivative component of the control (its squared "
        "time integral grows like t^-3 once the profile is normalized to "
        "unit mass), the minimal Gramian energy shows the same floor, and "
        "the fitted exponent drifts with the truncation, so no truncation "
        "n reaches the pinned rates."
    )


def test_criterion_04_gamma_uniformity():
    op = OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.4, bc="periodic")
    sp = build_spectrum(op, 80)
    ts = np.geomspace(0.01, 0.5, 12)
    gs = [gamma_norm(gramian(sp, 0.4, float(t))).value for t in ts]
    slope = float(np.polyfit(np.log(ts), np.log(gs), 1)[0])
    assert abs(slope - (-0.7)) <= 0.05 * 0.7
    op = OperatorSpec(family="damped_wave", m=1, alpha=7 / 12, rho=1.0,
                      gamma=0.0, length=1.0)
    profiles = {}
    for n in (100, 200):
        spn = build_spectrum(op, n)
        profiles[n] = np.array(
            [gamma_norm(gramian(spn, 0.0, float(t))).value for t in ts]
        )
    npt.assert_array_equal(profiles[100], profiles[200])
    sp100 = build_spectrum(op, 100)
    with pytest.raises(DivergentGammaIntegral) as err:
        gamma_integral(sp100, 0.0, 1.0, 0.75)
    pytest.fail(
        "the heat exponent leg passes (fitted "
        f"{slope:.4f} vs -0.7 within 5%) and the damped smoothing norm is "
        "exactly n-independent (profiles at n=100 and n=200 are "
        "bit-identical), but only because every truncation shares the "
        "same lowest-block behavior Gamma_t ~ sqrt(12) mu_1^(gamma-1/2) "
        "t^(-3/2); the weighted integral the <1% comparison needs does "
        f"not exist: {err.value}"
    )


def test_criterion_05_trace_dichotomy():
    matrix = [
        (dict(family="heat", m=1, beta=1.0, gamma=0.0), True),
        (dict(family="heat", m=3, beta=1.0, gamma=0.0), False),
        (dict(family="heat", m=2, beta=1.0, gamma=0.8), True),
        (dict(family="heat", m=2, beta=0.8, gamma=0.0), False),
        (dict(family="damped_wave", m=1, alpha=0.6, gamma=0.3), True),
        (dict(family="damped_wave", m=1, alpha=0.2, gamma=0.0), False),
        (dict(family="damped_wave", m=2, alpha=0.75, gamma=0.6), True),
        (dict(family="damped_wave", m=3, alpha=0.75, gamma=0.0), False),
        (dict(family="damped_beam", m=1, alpha=0.5, gamma=0.15), True),
        (dict(family="damped_beam", m=3, alpha=0.3, gamma=0.05), False),
        (dict(family="damped_beam", m=2, alpha=0.6, gamma=0.35), True),
        (dict(family="damped_beam", m=1, alpha=0.15, gamma=0.02), False),
    ]
    reports = {}
    for kwargs, expected in matrix:
        sp = build_spectrum(OperatorSpec(**kwargs), 2000)
        rep = weighted_trace_test(sp, NoiseSpec())
        assert rep.convergent == expected, kwargs
        assert rep.analytic_convergent == expected, kwargs
        reports[(kwargs["family"], kwargs["m"], kwargs["gamma"])] = rep
    stable = reports[("heat", 1, 0.0)]
    assert any(r.convergent and r.tail_frac < 0.01 for r in stable.per_eta)
    divergent = reports[("heat", 3, 0.0)]
    assert any(r.growth_ratio >= 1.0 for r in divergent.per_eta)


def test_criterion_06_convolution_exactness():
    cases = (
        (OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.3, bc="periodic"), 8),
        (OperatorSpec(family="damped_wave", m=1, alpha=0.55, rho=1.0,
                      gamma=0.1, length=1.0), 6),
    )
    samples = 100_000
    for op, n in cases:
        sp = build_spectrum(op, n)
        paths = sample_convolution(sp, 1.0, 4, NoiseSpec(seed=20260816),
                                   samples=samples)
        terminal = paths[:, -1]
        Q = gramian(sp, op.gamma, 1.0).Q
        emp = np.einsum("sni,snj->nij", terminal, terminal) / (samples - 1)
        qd = np.einsum("nii->ni", Q)
        se = np.sqrt((qd[:, :, None] * qd[:, None, :] + Q**2) / samples)
        z = (emp - Q) / se
        assert float(np.max(np.abs(z))) < 3.0, op.family


def test_criterion_07_kolmogorov_suite():
    heat1 = build_spectrum(
        OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0, bc="periodic"), 1
    )
    damped1 = build_spectrum(
        OperatorSpec(family="damped_wave", m=1, alpha=0.5, rho=1.0, gamma=0.0,
                     length=np.pi), 1
    )
    rng = np.random.default_rng(5)
    kern = OUKernel(damped1, 0.0, 0.8, nodes_per_dim=8)
    x = rng.normal(size=(6, 2))
    quad = ou_apply(kern, lambda p: np.sum(p**2, axis=-1), x, require_degree=2)
    want = np.sum((x @ kern.mean_map.T) ** 2, axis=-1) + np.trace(kern.cov)
    npt.assert_allclose(quad, want, rtol=1e-10)
    a = np.array([0.7, -0.4])
    grad = ou_gradient(kern, lambda p: p @ a, x)
    npt.assert_allclose(grad.gradient, np.broadcast_to(kern.mean_map.T @ a, (6, 2)),
                        atol=1e-10)
    theta = 0.75
    n_fn, m_fn = _tanh_field(0.3), _tanh_field(0.4)
    n_norm, m_norm = _holder_norm(n_fn, theta), _holder_norm(m_fn, theta)
    field = solve_backward(heat1, 0.0, n_fn, m_fn, T=1.0, steps=32, theta=theta,
                           n_holder=n_norm, nodes_per_dim=12, tolerance=1e-12)
    assert field.contraction_factor < 1.0
    d = np.array(field.iterate_distances)
    live = d[:-1] > 1e-12
    assert int(np.count_nonzero(live)) >= 5
    ratios = d[1:][live] / d[:-1][live]
    assert np.all(ratios <= field.contraction_factor)
    assert field.residual < 1e-7
    led = constants_ledger(heat1, 0.0, 1.0, theta, b_norm=n_norm)
    assert float(field.sup_c2_profile.max()) <= led.M_T * m_norm * 1.05
    ms = [constants_ledger(heat1, 0.0, float(t), theta, b_norm=1.0).M_T
          for t in np.linspace(0.05, 1.0, 6)]
    assert np.all(np.diff(ms) > 0)
    assert ms[0] < 0.25 * ms[-1]


def test_criterion_08_pathwise_identity_order():
    spectrum = build_spectrum(
        OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0, bc="periodic"), 1
    )
    x0 = np.zeros((1, 1))
    rep0 = ito_tanaka_residual(spectrum, None, NoiseSpec(seed=7),
                               SimGrid(T=1.0, steps=64), None, x0, samples=4)
    assert rep0.max < 1e-10
    drift = Drift(DriftSpec(kind="structure", form="tanh", scale=0.4, theta=0.75),
                  spectrum)
    f = drift_field_data(drift, spectrum)
    nh = float(per_mode_holder_norms(drift, samples=500, seed=20260816).max())
    field = solve_backward(spectrum, 0.0, f, f, 1.0, steps=512, theta=0.75,
                           n_holder=nh, nodes_per_dim=14, tolerance=1e-9)
    noise = NoiseSpec(gamma=0.0, seed=20260816)
    ladder = (64, 128, 256, 512)
    means = []
    for steps in ladder:
        rep = ito_tanaka_residual(spectrum, drift, noise,
                                  SimGrid(T=1.0, steps=steps), field, x0,
                                  samples=256)
        means.append(rep.mean)
    order = -float(np.polyfit(np.log(ladder), np.log(means), 1)[0])
    assert 0.35 <= order <= 0.65, (order, means)


def test_criterion_09_uniqueness_dichotomy():
    t0 = time.perf_counter()
    op = OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0, bc="periodic")
    sp = build_spectrum(op, 64)
    drift = Drift(
        DriftSpec(kind="b_r", theta=0.75, r=1.0, g=(1.0, 0.5), h=(0.8, 0.0, 0.3)),
        sp,
    )
    rep = uniqueness_experiment(
        sp, drift, NoiseSpec(seed=20260816), 1.0, (32, 64, 128, 256),
        np.zeros((64, 1)), samples=256,
    )
    assert rep.monotone()
    assert rep.order >= 0.5
    spectrum = build_spectrum(counterexample_operator(), 8)
    cdrift = Drift(DriftSpec(kind="counterexample", theta=0.75), spectrum)
    grid = SimGrid(T=1.0, steps=256, scheme="picard", picard_tolerance=1e-3)
    init = counterexample_trajectory(spectrum, grid.times)
    pair = pair_paths(
        spectrum, cdrift, None, grid, np.zeros((8, 2)), samples=1,
        schemes=("exponential_euler", "picard"), picard_init=init,
    )
    npt.assert_array_equal(pair.path1, 0.0)
    npt.assert_allclose(pair.path2[0], init, atol=3e-3)
    d = float(pair.d_metric(spectrum)[0])
    assert d >= 0.9 * (1.0 / 17.0) * (np.pi / 2.0)
    assert time.perf_counter() - t0 < 600.0


def test_criterion_10_maximal_regularity():
    op = OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0, bc="periodic")
    rng = np.random.default_rng(11)
    J, T, Q = 512, 1.0, 8
    times = np.linspace(0.0, T, J + 1)
    omegas = 2.0 * np.pi * np.arange(1, Q + 1) / T
    cos = np.cos(omegas[:, None] * times[None, :])
    sin = np.sin(omegas[:, None] * times[None, :])
    maxima = {}
    for n in (16, 256):
        sp = build_spectrum(op, n)
        ratios = []
        for _ in range(100):
            a = rng.normal(size=(Q, n))
            b = rng.normal(size=(Q, n))
            f = (np.einsum("qt,qn->tn", cos, a)
                 + np.einsum("qt,qn->tn", sin, b))[:, :, None]
            rep = maxreg_ratio(sp, f, T)
            ratios.append(rep.ratio)
            assert rep.within_bound
        maxima[n] = max(ratios)
    spread = maxima[256] / maxima[16]
    assert 0.5 < spread < 2.0
    weak = build_spectrum(
        OperatorSpec(family="damped_wave", m=1, alpha=0.3, rho=1.0, gamma=0.0,
                     length=1.0), 64
    )
    scan = resolvent_line_scan(weak, zeta=0.0)
    slope = float(np.polyfit(np.log(scan.witness_mu),
                             np.log(scan.witness_norms), 1)[0])
    assert abs(slope - 0.2) <= 0.05
    strong = build_spectrum(
        OperatorSpec(family="damped_wave", m=1, alpha=0.6, rho=1.0, gamma=0.0,
                     length=1.0), 64
    )
    scan = resolvent_line_scan(strong, zeta=0.0)
    top = slice(32, 64)
    slope = float(np.polyfit(np.log(scan.witness_mu[top]),
                             np.log(scan.witness_norms[top]), 1)[0])
    assert abs(slope) <= 0.05


def test_criterion_11_admissibility_table():
    def br(theta):
        return DriftSpec(kind="b_r", theta=theta, r=1.0, g=(1.0,), h=(1.0,))

    def tanh(theta):
        return DriftSpec(kind="structure", theta=theta, form="tanh", scale=0.5)

    rep = check(
        OperatorSpec(family="damped_wave", m=1, alpha=7 / 12, gamma=0.0),
        tanh(0.75),
    )
    assert rep.admissible
    assert rep.covering == ("damped_range", "damped_wave_1d")
    rep = check(counterexample_operator(),
                DriftSpec(kind="counterexample", theta=0.75))
    assert rep.admissible
    assert "damped_wave_1d" in rep.covering
    rep = check(OperatorSpec(family="heat", m=3, beta=1.0, gamma=0.6), br(0.8))
    assert rep.admissible
    assert rep.covering == ("heat",)
    rep = check(OperatorSpec(family="heat", m=3, beta=1.0, gamma=0.7), br(0.8))
    assert not rep.admissible
    assert rep.verdict("heat").binding == (
        "gamma < theta/(2-theta): 0.7 >= 0.6666666666666667"
    )
    rep = check(
        OperatorSpec(family="damped_wave", m=1, alpha=0.5, gamma=0.0), br(0.9)
    )
    assert not rep.admissible
    assert rep.verdict("damped_wave_1d").binding == (
        "gamma > 1/4 - alpha/2: 0.0 <= 0.0"
    )
    rep = check(
        OperatorSpec(family="damped_beam", m=1, alpha=0.5, gamma=0.2),
        DriftSpec(kind="zero", theta=0.95),
    )
    assert rep.verdict("damped_beam").admissible
    assert rep.verdict("noise_hilbert_schmidt").admissible
    rep = check(
        OperatorSpec(family="damped_beam", m=3, alpha=0.6, gamma=0.09), br(0.99)
    )
    assert rep.verdict("damped_beam").admissible
    assert rep.verdict("drift_series").admissible
    assert not rep.verdict("noise_hilbert_schmidt").admissible
    rep = check(OperatorSpec(family="heat", m=1, beta=0.75, gamma=0.1), tanh(0.6))
    assert rep.covering == ("structure_condition",)
    assert rep.verdict("heat").binding == "beta == 1: got beta = 0.75"
