import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gammaln

from qshhg import fockspace as fs
from qshhg.observables import (
    G2State,
    coupling_for_alpha,
    fringe_curve,
    photon_statistics,
    projN_statistics_analytic,
    projq_statistics_analytic,
    resolution_averaged_wigner,
    sideband_statistics,
)
from qshhg.sfa import ConfigurationError


def squeezed_vacuum(r, size=400):
    j = np.arange(size // 2)
    logc = -0.5 * math.log(math.cosh(r)) + 0.5 * gammaln(2 * j + 1) - gammaln(j + 1) + j * math.log(0.5 * math.tanh(r))
    amps = np.zeros(size, dtype=complex)
    amps[::2] = np.exp(logc) * (-1.0) ** j
    return fs.SingleModeState.from_amplitudes(amps)


def test_vacuum_statistics():
    rep = photon_statistics(fs.SingleModeState.fock(0))
    assert rep.g2_state is G2State.UNDEFINED and math.isnan(rep.g2)
    assert rep.dx1_sq == rep.dx2_sq == 0.25
    assert rep.to_dict()["g2"] == "undefined"


@pytest.mark.parametrize("n", [1, 2, 5, 30])
def test_fock_statistics(n):
    rep = photon_statistics(fs.SingleModeState.fock(n))
    assert rep.mean_photons == n
    assert rep.g2 == pytest.approx(1 - 1 / n, abs=1e-15)
    assert rep.dx1_sq == pytest.approx((2 * n + 1) / 4) and rep.dx2_sq == pytest.approx((2 * n + 1) / 4)


def test_coherent_state_statistics():
    alpha = 1.7 * np.exp(0.4j)
    n = np.arange(80)
    amps = np.exp(-abs(alpha) ** 2 / 2 + n * np.log(alpha) - 0.5 * gammaln(n + 1))
    rep = photon_statistics(fs.SingleModeState.from_amplitudes(amps))
    assert rep.mean_photons == pytest.approx(abs(alpha) ** 2, rel=1e-12)
    assert rep.g2 == pytest.approx(1, rel=1e-12)
    assert rep.dx1_sq == pytest.approx(0.25, rel=1e-10) and rep.dx2_sq == pytest.approx(0.25, rel=1e-10)


def test_squeezed_vacuum_statistics():
    r = 0.8
    rep = photon_statistics(squeezed_vacuum(r))
    assert rep.mean_photons == pytest.approx(math.sinh(r) ** 2, rel=1e-10)
    assert rep.g2 == pytest.approx(3 + 1 / math.sinh(r) ** 2, rel=1e-10)
    assert rep.dx1_sq == pytest.approx(math.exp(-2 * r) / 4, rel=1e-10)
    assert rep.dx2_sq == pytest.approx(math.exp(2 * r) / 4, rel=1e-10)
    assert rep.uncertainty_product == pytest.approx(1 / 16, rel=1e-10)


def test_cat_limits():
    c = fs.sideband_coupling(0.0, 5.0)
    even = projq_statistics_analytic(c, 0)
    assert even.g2_state is G2State.INFINITE and even.to_dict()["g2"] == "infinite"
    assert (even.dx1_sq, even.dx2_sq) == (0.25, 0.25)
    odd = projq_statistics_analytic(fs.sideband_coupling(0.01, 5.0), 1)
    assert (odd.mean_photons, odd.g2, odd.dx1_sq, odd.dx2_sq) == (1.0, 0.0, 0.75, 0.75)
    with pytest.raises(ValueError):
        projq_statistics_analytic(c, -1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 8.0), st.integers(2, 400), st.floats(0.0, 2 * math.pi))
def test_coupling_for_alpha_round_trip(alpha, l, theta):
    c = coupling_for_alpha(alpha, l, 10.0, theta)
    assert abs(fs.projq_alpha(c, l)) == pytest.approx(alpha, rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-5, 1e-2), st.floats(0.3, 6.0), st.floats(0.0, 2 * math.pi), st.integers(0, 12))
def test_numeric_states_respect_uncertainty_bound(z2, r, theta, k):
    c = fs.sideband_coupling(math.sqrt(z2), r, theta)
    for state in (fs.project_on_q(c, 2 * k + 2), fs.project_on_N(c, k)):
        rep = photon_statistics(state)
        assert rep.uncertainty_product >= 1 / 16 * (1 - 1e-9)


@pytest.mark.parametrize("m", [0, 1, 2, 6])
def test_photon_added_g2_independent_of_squeezing(m):
    expected = 1 + 2 / (2 * m + 1)
    for r in (3.0, 5.0, 7.0):
        c = fs.sideband_coupling(math.sqrt(6.7e-10), r)
        assert projN_statistics_analytic(c, m).g2 == expected
        assert photon_statistics(fs.project_on_N(c, m)).g2 == pytest.approx(expected, rel=0.02)


def test_photon_added_quadratures_numeric_against_large_r_form():
    c = fs.sideband_coupling(math.sqrt(5.4e-4), 6.0, 0.0)
    for m in (0, 1, 3, 8):
        num = photon_statistics(fs.project_on_N(c, m))
        ana = projN_statistics_analytic(c, m)
        assert num.dx1_sq == pytest.approx(ana.dx1_sq, rel=0.02)
        assert num.dx2_sq == pytest.approx(ana.dx2_sq, rel=0.02)
        assert num.mean_photons == pytest.approx(ana.mean_photons, rel=0.02)


def test_simplified_form_only_at_zero_phase():
    c = fs.sideband_coupling(math.sqrt(6.7e-10), 13.6, 0.0)
    general = projN_statistics_analytic(c, 3)
    simple = projN_statistics_analytic(c, 3, simplified=True)
    assert simple.g2 == general.g2
    assert simple.dx2_sq == pytest.approx(general.dx2_sq, rel=0.01)
    with pytest.raises(ValueError):
        projN_statistics_analytic(fs.sideband_coupling(0.1, 2.0, 1.0), 3, simplified=True)


def test_resolution_average_of_one_projection_is_reference():
    c = coupling_for_alpha(2.0, 40, 10.0)
    res = resolution_averaged_wigner(c, 40, 0)
    assert res.ratio == 1 and res.members == (40,)
    assert res.W.shape == (res.p.size, res.x.size)


def test_fringe_curve_matches_single_averages():
    c = coupling_for_alpha(3.0, 60, 10.0)
    x = p = np.linspace(-3, 3, 61)
    curve = fringe_curve(c, 60, [1, 4], "all", x, p)
    singles = [resolution_averaged_wigner(c, 60, d, "all", x, p).ratio for d in (1, 4)]
    np.testing.assert_allclose(curve, singles, rtol=1e-12)
    even = fringe_curve(c, 60, [4], "even-only", x, p)
    assert even[0] > curve[1]


def test_fringe_inputs_validated():
    c = coupling_for_alpha(2.0, 40, 10.0)
    with pytest.raises(ConfigurationError):
        fringe_curve(c, 40, [1], x=np.linspace(-1, 1, 11), p=np.linspace(-1, 1, 11))
    with pytest.raises(ValueError):
        fringe_curve(c, 40, [1], parity="odd")
    with pytest.raises(ValueError):
        coupling_for_alpha(1.0, 1, 10.0)


def test_unconditional_sideband_statistics():
    c = fs.sideband_coupling(math.sqrt(1e-3), 2.0, 0.7)
    rep = sideband_statistics(c)
    m = np.arange(61)
    pm = fs.marginal_probability(c, m)
    assert rep.mean_photons == pytest.approx(np.sum(m * pm) / pm.sum(), rel=1e-8)
    assert rep.g2 == pytest.approx(3.0, rel=0.05)
    assert rep.dx1_sq + rep.dx2_sq == pytest.approx(0.5 * (1 + 2 * rep.mean_photons), rel=1e-12)
    assert rep.uncertainty_product >= 1 / 16
    with pytest.raises(ConfigurationError):
        sideband_statistics(fs.sideband_coupling(0.3, 3.0), m_max=4, n_max=40)
