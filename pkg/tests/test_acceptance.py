"""The ten acceptance criteria at their stated tolerances.

Each test records one summary line (printed at the end of the session by
conftest) and then asserts every sub-check of its criterion.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.special import logsumexp

from qshhg import emission, macroscopic, units
from qshhg.fockspace import (
    SingleModeState,
    joint_distribution,
    marginal_probability,
    photon_added_state,
    project_on_N,
    project_on_q,
    projq_alpha,
    sideband_coupling,
    wigner,
    default_wigner_grid,
)
from qshhg.observables import (
    coupling_for_alpha,
    fringe_curve,
    photon_statistics,
    projN_statistics_analytic,
    projq_statistics_analytic,
)
from qshhg.runner.config import ScenarioConfig
from qshhg.runner.figures import figure_config
from qshhg.runner.pipeline import (
    build_geometry,
    build_grids,
    build_medium,
    build_pulse,
    convergence_check,
    run_scenario,
)

from .conftest import ACCEPTANCE

SUPPLEMENT_ZETA_SQ = 5.4e-4
FIG5_R, FIG5_ZETA_SQ = 13.6, 6.7e-10
FIG1B_HHG_PLATEAU = 1e3  # photons per mode, read off the ZnO HHG plateau


def record(num, checks):
    """checks: list of (label, ok, detail)."""
    ok = all(c[1] for c in checks)
    detail = "; ".join(f"{lab}: {'ok' if good else 'FAIL'} ({det})" for lab, good, det in checks)
    ACCEPTANCE[num] = (ok, detail)
    failed = [f"{lab} ({det})" for lab, good, det in checks if not good]
    assert not failed, "failed sub-checks: " + "; ".join(failed)


def _max_rel(a, b):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a / b - 1)))


# -- 1 ----------------------------------------------------------------------

def test_criterion_01_marginal_cross_check():
    t0 = time.perf_counter()
    c = sideband_coupling(math.sqrt(SUPPLEMENT_ZETA_SQ), 5.0)
    m = np.arange(0, 600)
    exact = marginal_probability(c, m, "exact")
    analytic = marginal_probability(c, m, "analytic")
    elapsed = time.perf_counter() - t0
    sel = exact > 1e-12
    dev = np.abs(analytic[sel] / exact[sel] - 1)
    worst = int(m[sel][np.argmax(dev)])
    # the closed form's own series, summed far past its e^-37 tail
    m_all = np.arange(0, 4000)
    total = float(np.exp(logsumexp(np.log(marginal_probability(c, m_all, "analytic")))))
    target = 1 / math.sqrt(1 + 2 * c.zeta_sq)
    record(1, [
        ("exact vs closed form <= 5%", dev.max() <= 0.05,
         f"max rel dev {dev.max():.3g} at m={worst}, {sel.sum()} points with P>1e-12"),
        ("sum P within 1e-6", abs(total - target) <= 1e-6,
         f"closed-form sum {total:.9f} vs {target:.9f}; exact sum {exact.sum():.6f}"),
        ("runtime < 60 s", elapsed < 60, f"{elapsed:.2f} s"),
    ])


# -- 2 ----------------------------------------------------------------------

def test_criterion_02_checkerboard_parity():
    t0 = time.perf_counter()
    c = sideband_coupling(math.sqrt(FIG5_ZETA_SQ), FIG5_R)
    P = joint_distribution(c, 200, 200)
    m, n = np.meshgrid(np.arange(201), np.arange(201), indexing="ij")
    forbidden = ((n - m) % 2 == 1) | (n < m)
    allowed_low = ~forbidden & (m <= 4)
    elapsed = time.perf_counter() - t0
    record(2, [
        ("forbidden entries are exactly zero", bool(np.all(P[forbidden] == 0.0)),
         f"{forbidden.sum()} entries, max {P[forbidden].max():.1e}"),
        ("allowed low-m entries populated", bool(np.all(P[allowed_low] > 0)), f"{allowed_low.sum()} entries"),
        ("runtime seconds", elapsed < 10, f"{elapsed:.2f} s"),
    ])


# -- 3 ----------------------------------------------------------------------

def test_criterion_03_projection_on_q_statistics():
    t0 = time.perf_counter()
    c = sideband_coupling(math.sqrt(SUPPLEMENT_ZETA_SQ), 10.0)
    ls = [2, 3, 10, 11, 100, 101, 500, 501, 1000, 1001, 2000, 2001, 5000, 5001, 10000, 10001]
    big, small = [], []
    for l in ls:
        num = photon_statistics(project_on_q(c, l))
        ana = projq_statistics_analytic(c, l)
        dev = max(abs(num.g2 / ana.g2 - 1), abs(num.dx1_sq / ana.dx1_sq - 1), abs(num.dx2_sq / ana.dx2_sq - 1))
        (big if abs(projq_alpha(c, l)) >= 1 else small).append(dev)
    even0 = photon_statistics(project_on_q(c, 2))
    odd0 = photon_statistics(project_on_q(c, 3))
    far = photon_statistics(project_on_q(c, 100000))
    far_a = projq_statistics_analytic(c, 100000)
    elapsed = time.perf_counter() - t0
    record(3, [
        ("|alpha|>=1 within 5%", max(big) <= 0.05, f"max dev {max(big):.2g} over {len(big)} l"),
        ("|alpha|<1 within 15%", max(small) <= 0.15, f"max dev {max(small):.2g} over {len(small)} l"),
        ("even alpha->0 gives 1/4", max(abs(even0.dx1_sq / 0.25 - 1), abs(even0.dx2_sq / 0.25 - 1)) <= 0.01,
         f"{even0.dx1_sq:.5f}, {even0.dx2_sq:.5f}"),
        ("odd alpha->0 gives 3/4", max(abs(odd0.dx1_sq / 0.75 - 1), abs(odd0.dx2_sq / 0.75 - 1)) <= 0.01,
         f"{odd0.dx1_sq:.5f}, {odd0.dx2_sq:.5f}"),
        ("g2 -> 1 for large alpha", max(abs(far.g2 - 1), abs(far_a.g2 - 1)) <= 0.01,
         f"|alpha|={abs(projq_alpha(c, 100000)):.1f}: numeric {far.g2:.6f}, analytic {far_a.g2:.6f}"),
        ("runtime < 60 s", elapsed < 60, f"{elapsed:.2f} s"),
    ])


# -- 4 ----------------------------------------------------------------------

def test_criterion_04_photon_added_squeezed_vacuum():
    t0 = time.perf_counter()
    fig5 = sideband_coupling(math.sqrt(FIG5_ZETA_SQ), FIG5_R)
    g2_0 = projN_statistics_analytic(fig5, 0).g2
    g2_1 = projN_statistics_analytic(fig5, 1).g2
    exact_values = g2_0 == 3.0 and abs(g2_1 - 5 / 3) <= 1e-15
    r5 = sideband_coupling(math.sqrt(FIG5_ZETA_SQ), 5.0)
    devs = []
    for m in range(0, 21):
        num = photon_statistics(project_on_N(r5, m))
        devs.append(abs(num.g2 / projN_statistics_analytic(r5, m).g2 - 1))
    m0 = projN_statistics_analytic(fig5, 0)
    prod_dev = abs(m0.uncertainty_product * 16 - 1)
    perp = sideband_coupling(math.sqrt(FIG5_ZETA_SQ), FIG5_R, math.pi / 2)
    lowest = min(min(s.dx1_sq, s.dx2_sq) for s in (projN_statistics_analytic(perp, m) for m in range(101)))
    elapsed = time.perf_counter() - t0
    record(4, [
        ("analytic g2 = 3, 5/3", exact_values, f"{g2_0!r}, {g2_1!r}"),
        ("numeric g2 at r=5 within 2%", max(devs) <= 0.02, f"max dev {max(devs):.2g}, m=0..20"),
        ("m=0 product = 1/16 within 1e-3", prod_dev <= 1e-3, f"16*product - 1 = {prod_dev:.2g}"),
        ("theta=pi/2 unsqueezed", lowest >= 0.25, f"smallest variance {lowest:.4g}, m=0..100"),
        ("runtime < 60 s", elapsed < 60, f"{elapsed:.2f} s"),
    ])


# -- 5 ----------------------------------------------------------------------

def test_criterion_05_wigner_properties(tmp_path):
    t0 = time.perf_counter()
    x, p = default_wigner_grid()
    origin = np.array([0.0])
    w_vac = wigner(SingleModeState.fock(0), origin, origin).W[0, 0]
    w_one = wigner(SingleModeState.fock(1), origin, origin).W[0, 0]
    c = sideband_coupling(math.sqrt(SUPPLEMENT_ZETA_SQ), 10.0)
    states = {
        "vacuum": SingleModeState.fock(0),
        "fock 1": SingleModeState.fock(1),
        "cat l=200": project_on_q(coupling_for_alpha(6.7, 200, FIG5_R), 200),
        "photon-added m=1, r=0.5": photon_added_state(sideband_coupling(0.1, 0.5), 1),
        "proj-q l=3": project_on_q(c, 3),
    }
    norms = {k: wigner(s, x, p).normalization for k, s in states.items()}
    worst = max(norms, key=lambda k: abs(norms[k] - 1))
    added = wigner(states["photon-added m=1, r=0.5"], x, p).W
    # the S5 scenario: photon-added states at the Fig. 5 working point, squeezed-frame axes
    run_scenario(figure_config("s5"), tmp_path)
    summary = json.loads((tmp_path / "wigner_summary.json").read_text())
    s5_min = summary["photon-added:1"]["min"]
    s5_norm = summary["photon-added:1"]["normalization"]
    elapsed = time.perf_counter() - t0
    record(5, [
        ("vacuum W(0,0) = 2/pi", abs(w_vac - 2 / math.pi) <= 1e-6, f"{w_vac:.9f}"),
        ("|1> W(0,0) = -2/pi", abs(w_one + 2 / math.pi) <= 1e-6, f"{w_one:.9f}"),
        ("integral = 1 within 1%", abs(norms[worst] - 1) <= 0.01, f"worst {worst}: {norms[worst]:.5f}"),
        ("photon-added m=1 negative", added.min() < 0 and s5_min < 0,
         f"min W {added.min():.4f} (r=0.5), {s5_min:.4f} (r=13.6, norm {s5_norm:.4f})"),
        ("runtime < 60 s", elapsed < 60, f"{elapsed:.2f} s"),
    ])


# -- 6 ----------------------------------------------------------------------

def test_criterion_06_fringe_washout():
    t0 = time.perf_counter()
    c = coupling_for_alpha(6.7, 200, FIG5_R)
    dls = [0, 1, 2, 4, 10, 20, 50, 100]
    every = fringe_curve(c, 200, dls, "all")
    even = fringe_curve(c, 200, dls, "even-only")
    elapsed = time.perf_counter() - t0
    above = all(e > a for d, e, a in zip(dls, even, every) if d > 0)
    record(6, [
        ("all-parity delta_l=1 < 0.1", every[1] < 0.1, f"{every[1]:.4f}"),
        ("even-only delta_l=100 > 0.5", even[-1] > 0.5, f"{even[-1]:.4f}"),
        ("even-only above all-parity", above,
         "all " + ", ".join(f"{v:.3f}" for v in every) + " / even " + ", ".join(f"{v:.3f}" for v in even)),
        ("runtime < 300 s", elapsed < 300, f"{elapsed:.1f} s"),
    ])


# -- 7 ----------------------------------------------------------------------

def test_criterion_07_macroscopic_constants():
    cfg = ScenarioConfig()
    factor = build_geometry(cfg).coherence_factor
    bsv = macroscopic.bsv_parameters(10e-9, 1.6e-6, 50e-9, 100e-6)
    record(7, [
        ("(N0 wk li)^2/2c = 1.07e23 +-0.5%", abs(factor / 1.07e23 - 1) <= 0.005, f"{factor:.4e} s/m^3"),
        ("BSV r in [13.3, 13.7]", 13.3 <= bsv.r <= 13.7, f"r = {bsv.r:.4f}, sinh^2 r = {bsv.photons:.3e}"),
        ("mode density 2e12 +-10%", abs(bsv.mode_density / 2e12 - 1) <= 0.1, f"{bsv.mode_density:.4e} m^-3"),
    ])


# -- 8 ----------------------------------------------------------------------

def test_criterion_08_scaling_law():
    I = 1e18
    w_solid = 2 * math.pi * units.c / 3.2e-6
    gas = macroscopic.susceptibility_ratio_scaling(I, 4 * w_solid, 1.0 * units.m_e)
    solid = macroscopic.susceptibility_ratio_scaling(I, w_solid, 0.25 * units.m_e)
    bi = macroscopic.susceptibility_ratio_scaling(I, 2 * math.pi * units.c / 10e-6, 0.002 * units.m_e)
    zno = macroscopic.susceptibility_ratio_scaling(I, w_solid, 0.25 * units.m_e)
    record(8, [
        ("gas->solid = 4^7", solid / gas == 4**7, f"{solid / gas!r}"),
        ("ZnO->Bi in [4e6, 6e6]", 4e6 <= bi / zno <= 6e6, f"{bi / zno:.4e}"),
    ])


# -- 9 ----------------------------------------------------------------------

def _plateau_orders(cfg):
    """Orders between the gap (or binding energy) and the classical cutoff E0 + 3.17 Up."""
    medium, pulse = build_medium(cfg), build_pulse(cfg)
    up = (units.e * pulse.peak_field) ** 2 / (4 * medium.mass * pulse.omega0**2)
    photon = units.hbar * pulse.omega0
    return medium.energy_offset / photon, (medium.energy_offset + 3.17 * up) / photon


def _sideband_ratio(res, lo, hi):
    """Geometric mean over even plateau orders of QSHHG_N / sqrt(HHG_{N-1} HHG_{N+1})."""
    orders = list(res.hhg.orders)
    hhg = dict(zip(orders, res.hhg.photons))
    qs = dict(zip(orders, res.qshhg_average))
    even = [int(N) for N in orders if N % 2 == 0 and lo <= N <= hi and N + 1 in hhg]
    logs = [math.log10(qs[N] / math.sqrt(hhg[N - 1] * hhg[N + 1])) for N in even]
    return 10 ** (sum(logs) / len(logs)), even


@pytest.mark.slow
def test_criterion_09_spectrum_order_of_magnitude(zno_bands, hydrogen_bands):
    zno_bands, zno_seconds = zno_bands
    hydrogen_bands, h_seconds = hydrogen_bands
    zcfg, hcfg = figure_config("fig1b"), figure_config("fig1d")
    zlo, zhi = _plateau_orders(zcfg)
    hlo, hhi = _plateau_orders(hcfg)
    orders = list(zno_bands.hhg.orders)
    plateau = {N: n for N, n in zip(orders, zno_bands.hhg.photons) if N % 2 and zlo <= N <= zhi}
    decades = {N: math.log10(n / FIG1B_HHG_PLATEAU) for N, n in plateau.items()}
    zratio, zeven = _sideband_ratio(zno_bands, zlo, zhi)
    hratio, heven = _sideband_ratio(hydrogen_bands, hlo, hhi)
    i8 = list(zno_bands.hhg.orders).index(8)
    n8 = np.array([rep.photons[i8] for rep in zno_bands.scan])
    span = math.log10(n8.max() / n8.min())
    record(9, [
        ("ZnO HHG plateau within 1.5 decades of 1e3", all(abs(d) <= 1.5 for d in decades.values()),
         "orders " + ", ".join(f"{N}: {plateau[N]:.3g}" for N in plateau)),
        ("ZnO QSHHG/HHG in [1e-3, 10^-0.5]", 1e-3 <= zratio <= 10**-0.5, f"{zratio:.3g} over N={zeven}"),
        ("H ratio smaller by [1e2, 1e4]", 1e2 <= zratio / hratio <= 1e4,
         f"H {hratio:.3g} over N={heven}, factor {zratio / hratio:.3g}"),
        ("theta modulation of n_8 >= 2 decades", span >= 2, f"{span:.2f} decades ({n8.min():.3g}..{n8.max():.3g})"),
        ("runtime < 600 s", max(zno_seconds, h_seconds) < 600,
         f"ZnO {zno_seconds:.1f} s, H {h_seconds:.1f} s"),
    ])


# -- 10 ---------------------------------------------------------------------

_SMALL = dict(tau_cycles=2.0, samples_per_cycle=128, n_par=41, n_perp=9, harmonic_max=20, samples_per_order=8)


def _band_photons_at_volume(cfg, volume):
    medium, pulse = build_medium(cfg), build_pulse(cfg)
    geometry = macroscopic.PropagationGeometry(cfg.density_per_m3, cfg.harmonic_beam_radius_um * 1e-6,
                                               cfg.interaction_length_nm * 1e-9, volume)
    bsv = macroscopic.bsv_parameters(cfg.bsv_energy_nJ * 1e-9, cfg.bsv_wavelength_um * 1e-6,
                                     cfg.bsv_bandwidth_nm * 1e-9, cfg.bsv_beam_radius_um * 1e-6)
    grid = build_grids(cfg, pulse, medium)
    omegas = emission.harmonic_grid(pulse.omega0, cfg.harmonic_max, cfg.samples_per_order)
    spec = emission.compute_spectra(medium, pulse, grid, omegas, volume=volume)
    hhg = macroscopic.hhg_band_photons(spec, geometry, pulse.omega0).photons
    qs = macroscopic.qshhg_band_photons(spec, None, bsv, geometry, 0.7).photons
    return hhg, qs


@pytest.mark.slow
def test_criterion_10_numerical_hygiene(tmp_path):
    small = ScenarioConfig(**_SMALL)
    h1, q1 = _band_photons_at_volume(small, 1.0)
    h2, q2 = _band_photons_at_volume(small, 3.7e-12)
    v_dev = max(_max_rel(h1, h2), _max_rel(q1, q2))

    conv = convergence_check(figure_config("fig1b"))

    cfg = ScenarioConfig(**_SMALL, outputs=("spectra", "proj-N"), zeta_source="spectra", sideband_orders=(8,),
                         m_values=(0, 1, 2))
    a = run_scenario(cfg, tmp_path / "one", threads=1)
    b = run_scenario(cfg, tmp_path / "four", threads=4)
    same = [o["sha256"] for o in a.outputs] == [o["sha256"] for o in b.outputs]
    record(10, [
        ("V-invariance < 1e-10", v_dev < 1e-10, f"max rel dev {v_dev:.2g}"),
        ("grid doubling < 10%", conv["passed"],
         f"HHG {conv['hhg_max_relative_change']:.3g}, QSHHG {conv['qshhg_max_relative_change']:.3g}"),
        ("bit-identical across threads", same, f"{len(a.outputs)} files compared"),
    ])
