import numpy as np
import numpy.testing as npt
import pytest
import scipy.linalg

from specgal import OperatorSpec, build_spectrum
from specgal.control import (
    ControlSignal,
    default_profile_degree,
    gamma_integral,
    gamma_norm,
    gramian,
    minimal_energy,
    synthesize_control,
    verify_steering,
    worst_case_energy,
)
from specgal.errors import (
    DegreeTooSmall,
    DivergentGammaIntegral,
    GridTooCoarse,
    RangeViolation,
    SingularGramian,
)


def _trapezoid_gramian(A, g, t, steps=40000):
    # independent oracle: trapezoid of v(s) v(s)^T with v = expm(sA) g
    ss = np.linspace(0.0, t, steps + 1)
    vs = np.array([scipy.linalg.expm(s * A) @ g for s in ss])
    outer = vs[:, :, None] * vs[:, None, :]
    return np.trapezoid(outer, ss, axis=0)


def test_gramian_matches_trapezoid_oracle(wave_spectrum):
    gset = gramian(wave_spectrum, gamma=0.25, t=0.8)
    g_phys = wave_spectrum.forcing_phys(0.25)
    for k in (0, 3, 7):
        oracle = _trapezoid_gramian(wave_spectrum.A_phys[k], g_phys[k], 0.8)
        # oracle carries absolute trapezoid error, visible on tiny entries
        npt.assert_allclose(gset.Q[k], oracle, rtol=3e-7, atol=1e-8 * np.abs(oracle).max())


def test_heat_gramian_closed_form(heat_spectrum):
    # q(t) = mu^-gamma (1 - e^(-2 t mu^beta)) / (2 mu^beta); at mu=4, gamma=0,
    # t=0.5 this is (1 - e^-4)/8 = 0.1227101396697547 (trapezoid-confirmed)
    gset = gramian(heat_spectrum, gamma=0.0, t=0.5)
    mu = heat_spectrum.mu
    npt.assert_allclose(gset.Q[:, 0, 0], (1 - np.exp(-2 * 0.5 * mu)) / (2 * mu), rtol=1e-12)
    k4 = int(np.argmin(np.abs(mu - 4.0)))
    npt.assert_allclose(gset.Q[k4, 0, 0], 0.12271054513890823, rtol=1e-12)
    oracle = _trapezoid_gramian(np.array([[-4.0]]), np.array([1.0]), 0.5)
    npt.assert_allclose(gset.Q[k4, 0, 0], oracle[0, 0], rtol=1e-9)


def test_gramian_two_time_recursion(wave_spectrum):
    # Q(2t) = e^(tA) Q(t) e^(tA)^T + Q(t)
    t = 0.3
    q1 = gramian(wave_spectrum, 0.0, t)
    q2 = gramian(wave_spectrum, 0.0, 2 * t)
    E = wave_spectrum.expm_phys(t)
    rebuilt = np.einsum("nij,njk,nlk->nil", E, q1.Q, E) + q1.Q
    npt.assert_allclose(q2.Q, rebuilt, rtol=1e-9, atol=1e-14)


def test_singular_gramian_raises():
    # mu^-gamma underflows to zero on the top blocks
    spec = OperatorSpec(family="heat", m=1, beta=1.0, gamma=120.0, bc="periodic")
    spectrum = build_spectrum(spec, 60)
    with pytest.raises(SingularGramian):
        gramian(spectrum, gamma=120.0, t=1e-12)


def test_gamma_norm_monotone_in_truncation(wave_spectrum):
    vals = []
    for n in (2, 4, 8, 12):
        gset = gramian(wave_spectrum.truncate(n), 0.0, 0.5)
        vals.append(gamma_norm(gset).value)
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_heat_gamma_exponent():
    # Gamma_t ~ t^-(1/2 + gamma/(2 beta)) once the lattice covers the argmax
    spec = OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.4, bc="periodic")
    spectrum = build_spectrum(spec, 80)
    ts = np.geomspace(0.01, 0.5, 12)
    gs = [gamma_norm(gramian(spectrum, 0.4, t)).value for t in ts]
    slope = np.polyfit(np.log(ts), np.log(gs), 1)[0]
    assert abs(slope - (-0.7)) < 0.03


def test_gamma_integral_converges_and_diverges():
    spec = OperatorSpec(family="heat", m=1, beta=1.0, gamma=0.0, bc="periodic")
    spectrum = build_spectrum(spec, 60)
    rep = gamma_integral(spectrum, 0.0, 1.0, theta=0.75)
    # Gamma^2 ~ s^-1 at the endpoint => exponent ~ (2-theta)/2 = 0.625
    assert rep.value > 0
    assert abs(rep.endpoint_exponent - 0.625) < 0.05
    # gamma=1.2, theta=0.5: Gamma_s^1.5 ~ s^-1.65 once the lattice reaches the
    # small-s argmax blocks (mu* ~ 1/s), so the endpoint fit must see mu ~ 1e3
    bad = OperatorSpec(family="heat", m=1, beta=1.0, gamma=1.2, bc="periodic")
    with pytest.raises(DivergentGammaIntegral):
        gamma_integral(build_spectrum(bad, 100), 1.2, 1.0, theta=0.5, t_min_factor=1e-3)


# ---------------------------------------------------------------------------
# steering


def test_profile_degree_defaults():
    # alpha=7/12, gamma=0: p = 1/5, bound -0.3 -> m_min 1 -> mbar 2
    assert default_profile_degree(7 / 12, 0.0) == 2
    # alpha=0.75, gamma=0.5: p = 3, bound 2.5 -> m_min 3 -> mbar 4
    assert default_profile_degree(0.75, 0.5) == 4
    # alpha <= 1/2 branch: bound 4*0.3-... gamma=0.3: 2m > 0.2 -> m_min 1 -> 2
    assert default_profile_degree(0.3, 0.3) == 2


def test_steering_reaches_zero(rng):
    for alpha, rho in [(0.5, 1.0), (7 / 12, 1.0), (0.75, 2.0)]:
        spec = OperatorSpec(family="damped_wave", m=1, alpha=alpha, rho=rho, gamma=0.1)
        spectrum = build_spectrum(spec, 24)
        h = rng.standard_normal((24, 2))
        sig = synthesize_control(spectrum, h, t=0.7)
        res = verify_steering(sig)
        assert res <= 1e-8 * np.linalg.norm(h)


def test_profile_properties():
    spec = OperatorSpec(family="damped_wave", m=1, alpha=0.6, rho=1.0)
    spectrum = build_spectrum(spec, 4)
    sig = synthesize_control(spectrum, np.zeros((4, 2)), t=0.5, mbar=3)
    # bump integrates to one on the stored rule
    t, m = sig.t, sig.mbar
    cbar = (m + 1) * (m + 2) / t ** (m + 2)
    phi = cbar * sig.nodes**m * (t - sig.nodes)
    npt.assert_allclose(np.dot(sig.weights, phi), 1.0, rtol=1e-12)


def test_minimal_energy_bounds_explicit(rng):
    spec = OperatorSpec(family="damped_wave", m=1, alpha=7 / 12, rho=1.0, gamma=0.1)
    spectrum = build_spectrum(spec, 16)
    t = 0.6
    gset = gramian(spectrum, 0.1, t)
    for _ in range(20):
        h = rng.standard_normal((16, 2))
        sig = synthesize_control(spectrum, h, t=t)
        assert minimal_energy(gset, h) <= sig.energy * (1 + 1e-9)


def test_minimal_energy_heat_closed_form(heat_spectrum):
    # e^(-t mu) |h| / sqrt(q(t)) per mode
    t = 0.4
    gset = gramian(heat_spectrum, 0.0, t)
    h = np.zeros((len(heat_spectrum), 1))
    h[2, 0] = 3.0
    mu = heat_spectrum.mu[2]
    want = np.exp(-t * mu) * 3.0 / np.sqrt((1 - np.exp(-2 * t * mu)) / (2 * mu))
    npt.assert_allclose(minimal_energy(gset, h), want, rtol=1e-12)


def test_degree_and_range_errors(heat_spectrum):
    spec = OperatorSpec(family="damped_wave", m=1, alpha=0.75, rho=2.0, gamma=0.5)
    spectrum = build_spectrum(spec, 4)
    with pytest.raises(DegreeTooSmall):
        synthesize_control(spectrum, np.zeros((4, 2)), t=0.5, mbar=1)
    with pytest.raises(RangeViolation):
        synthesize_control(heat_spectrum, np.zeros((len(heat_spectrum), 1)), t=0.5)


def test_verify_steering_refinement_guard(rng):
    spec = OperatorSpec(family="damped_wave", m=1, alpha=0.5, rho=1.0)
    spectrum = build_spectrum(spec, 40)
    h = rng.standard_normal((40, 2))
    coarse = synthesize_control(spectrum, h, t=1.0, n_panels=1, n_nodes=3)
    with pytest.raises(GridTooCoarse):
        verify_steering(coarse, tol=1e-10)


def test_worst_case_energy_grows_as_t_shrinks():
    spec = OperatorSpec(family="damped_wave", m=1, alpha=0.5, rho=1.0, gamma=0.1)
    spectrum = build_spectrum(spec, 60)
    es = [worst_case_energy(spectrum, t) for t in (0.1, 0.3, 0.9)]
    assert es[0] > es[1] > es[2]
