import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.special import gammaln

from qshhg import fockspace as fs

couplings = st.builds(
    fs.sideband_coupling,
    st.one_of(st.just(0j), st.floats(1e-4, 0.3).map(complex)),
    st.floats(0.0, 3.0),
    st.floats(0.0, 2 * math.pi),
)


def test_squeezed_vacuum_limit():
    r = 1.3
    c = fs.sideband_coupling(0.0, r)
    P = fs.joint_distribution(c, 0, 40)[0]
    j = np.arange(21)
    expected = np.exp(gammaln(2 * j + 1) - 2 * gammaln(j + 1) - 2 * j * math.log(2)) * math.tanh(r) ** (2 * j) / math.cosh(r)
    np.testing.assert_allclose(P[::2], expected, rtol=1e-12)
    np.testing.assert_array_equal(P[1::2], 0.0)


@settings(max_examples=40, deadline=None)
@given(couplings)
def test_checkerboard(c):
    P = fs.joint_distribution(c, 30, 60)
    m, n = np.meshgrid(np.arange(31), np.arange(61), indexing="ij")
    assert np.all(P[((n - m) % 2 == 1) | (n < m)] == 0.0)


def test_amplitude_phase_and_magnitude_small_case():
    c = fs.sideband_coupling(0.2 * np.exp(0.3j), 0.7, 0.9)
    m, n = 1, 5
    j = 2
    direct = (c.norm / math.sqrt(math.cosh(c.r)) * c.zeta**m * (-c.beta_n) ** j
              * math.sqrt(math.factorial(n) / math.factorial(m)) / math.factorial(j))
    assert fs.joint_amplitude(c, m, n) == pytest.approx(direct, rel=1e-12)


def test_amplitudes_stay_finite_at_huge_photon_numbers():
    c = fs.sideband_coupling(math.sqrt(6.7e-10), 13.6)
    amp = fs.joint_amplitude(c, np.array([0, 10, 50]), np.array([10**6, 10**6, 10**6 + 50]))
    assert np.all(np.isfinite(amp)) and np.all(np.abs(amp) > 0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.05), st.floats(0.1, 2.0))
def test_exact_marginal_matches_joint_sum(z2, r):
    c = fs.sideband_coupling(math.sqrt(z2), r)
    P = fs.joint_distribution(c, 6, 3000)
    for m in range(7):
        assert fs.marginal_probability(c, m) == pytest.approx(P[m].sum(), rel=1e-9, abs=1e-300)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-8, 1e-2), st.floats(0.5, 30.0))
def test_closed_form_marginal_sums_to_known_value(z2, r):
    c = fs.sideband_coupling(math.sqrt(z2), r)
    n = c.mean_photons
    assume(n < 1e4)  # keeps the slowly decaying series summable here
    z = 2 * n * math.tanh(r) ** 2 / (1 + 2 * n)
    m = np.arange(int(60 / -math.log(z)) + 200)
    total = fs.marginal_probability(c, m, "analytic").sum()
    assert total == pytest.approx(1 / math.sqrt(1 + 2 * z2), rel=1e-8)


@pytest.mark.parametrize("z2", [1e-4, 1e-2])
def test_exact_state_is_normalized_to_order_zeta_squared(z2):
    c = fs.sideband_coupling(math.sqrt(z2), 1.0)
    total = sum(fs.marginal_probability(c, m) for m in range(200))
    assert abs(total - 1) <= 3 * z2


def test_expensive_work_is_refused():
    c = fs.sideband_coupling(math.sqrt(6.7e-10), 13.6)
    with pytest.raises(fs.RefusedStage):
        fs.marginal_probability(c, 3)
    with pytest.raises(fs.RefusedStage):
        fs.project_on_N(c, 3)
    assert fs.marginal_probability(c, 3, "analytic") > 0


@settings(max_examples=30, deadline=None)
@given(couplings, st.integers(0, 60))
def test_projection_on_q_keeps_parity(c, l):
    if c.zeta_sq == 0 and l % 2:
        with pytest.raises(ValueError):
            fs.project_on_q(c, l)
        return
    state = fs.project_on_q(c, l)
    assert state.parities() == ({l % 2} if c.zeta_sq else {0})
    assert state.probabilities.sum() == pytest.approx(1, rel=1e-12)


def test_projection_on_q_approaches_cat_state():
    c = fs.sideband_coupling(math.sqrt(5.4e-4), 10.0)
    for l in (200, 201, 4000):
        exact = fs.project_on_q(c, l).amplitudes
        cat = fs.project_on_q(c, l, "analytic").amplitudes
        k = min(exact.size, cat.size)
        assert abs(np.vdot(exact[:k], cat[:k])) ** 2 > 0.9999


def test_projection_on_N_support_and_parity():
    c = fs.sideband_coupling(math.sqrt(5.4e-4), 3.0, 0.4)
    for m in (0, 1, 4, 7):
        state = fs.project_on_N(c, m)
        assert state.parities() == {m % 2}
        assert state.tail < 1e-10


def test_photon_added_state_matches_projection_on_N():
    c = fs.sideband_coupling(math.sqrt(1e-3), 1.0, 0.6)
    x = p = np.linspace(-2.5, 2.5, 41)
    for m in (0, 1, 3):
        direct = fs.wigner(fs.project_on_N(c, m), x, p).W
        squeezed = fs.wigner(fs.photon_added_state(c, m), x, p).W
        np.testing.assert_allclose(squeezed, direct, atol=1e-7)


@pytest.mark.parametrize("n", [0, 1, 2, 7, 39, 40, 41, 100])
def test_fock_wigner_at_origin(n):
    origin = np.array([0.0])
    assert fs.wigner(fs.SingleModeState.fock(n), origin, origin).W[0, 0] == pytest.approx(
        (-1) ** n * 2 / math.pi, abs=1e-9)


@pytest.mark.parametrize("n", [3, 60])
def test_fock_wigner_normalized_and_bounded(n):
    x, p = fs.default_wigner_grid(extent=max(5.0, math.sqrt(n) + 3), points=301)
    field = fs.wigner(fs.SingleModeState.fock(n), x, p)
    assert field.normalization == pytest.approx(1, abs=1e-3)
    assert np.max(np.abs(field.W)) <= 2 / math.pi + 1e-9


def test_coherent_state_wigner_is_displaced_gaussian():
    alpha = 0.8 - 0.5j
    n = np.arange(40)
    c = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha + 0j) - 0.5 * gammaln(n + 1))
    x = p = np.linspace(-2, 2, 33)
    W = fs.wigner(fs.SingleModeState.from_amplitudes(c), x, p).W
    X, P = np.meshgrid(x, p)
    expected = 2 / math.pi * np.exp(-2 * np.abs(X + 1j * P - alpha) ** 2)
    np.testing.assert_allclose(W, expected, atol=1e-10)


def test_laguerre_and_overlap_paths_agree():
    rng = np.random.default_rng(3)
    amps = rng.normal(size=30) + 1j * rng.normal(size=30)
    state = fs.SingleModeState.from_amplitudes(amps)
    x = p = np.linspace(-3, 3, 25)
    via_rho = fs.wigner_from_density(fs.density_matrix(state), x, p).W
    via_psi = fs._wigner_pure_grid(state.amplitudes, x, p)
    np.testing.assert_allclose(via_rho, via_psi, atol=1e-8)


def test_mixed_wigner_weights():
    x = p = np.linspace(-2, 2, 21)
    vac, one = fs.SingleModeState.fock(0), fs.SingleModeState.fock(1)
    mix = fs.mixed_wigner([3, 1], [vac, one], x, p).W
    np.testing.assert_allclose(mix, 0.75 * fs.wigner(vac, x, p).W + 0.25 * fs.wigner(one, x, p).W, atol=1e-14)
    with pytest.raises(ValueError):
        fs.mixed_wigner([1.0], [vac, one], x, p)


def test_state_validation():
    with pytest.raises(ValueError):
        fs.SingleModeState.from_amplitudes(np.zeros(3))
    with pytest.raises(ValueError):
        fs.sideband_coupling(0.1, -1.0)
    s = fs.SingleModeState.from_amplitudes([3.0, 4.0j])
    np.testing.assert_allclose(s.probabilities, [0.36, 0.64])
