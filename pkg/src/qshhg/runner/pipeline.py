"""Run a scenario: sfa -> emission -> macroscopic -> fockspace -> observables, then write files."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import emission, fockspace, macroscopic, observables, sfa, units
from .config import ScenarioConfig, config_hash, serialize_config

SCHEMA_VERSION = 1
CONVERGENCE_TOLERANCE = 0.10


@dataclass
class RunManifest:
    config_hash: str
    out_dir: str
    grids: dict = field(default_factory=dict)
    stage_seconds: dict = field(default_factory=dict)
    convergence: dict | None = None
    outputs: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config_hash": self.config_hash,
            "grids": self.grids,
            "stage_seconds": self.stage_seconds,
            "convergence": self.convergence,
            "outputs": self.outputs,
            "notes": self.notes,
        }

    def file(self, name: str) -> Path:
        return Path(self.out_dir) / name


def build_medium(cfg: ScenarioConfig):
    if cfg.medium == "solid":
        return emission.to_solid(cfg.gap_eV * units.eV, cfg.effective_mass_me * units.m_e,
                                 cfg.dipole_d0_si, cfg.density_per_m3)
    return sfa.Atom(cfg.binding_energy_eV * units.eV, cfg.dipole_d0_si, cfg.density_per_m3)


def build_pulse(cfg: ScenarioConfig) -> sfa.LaserPulse:
    return sfa.LaserPulse(cfg.wavelength_um * 1e-6, cfg.peak_field_V_per_m, cfg.tau_cycles, cfg.cep_rad, cfg.envelope)


def build_geometry(cfg: ScenarioConfig) -> macroscopic.PropagationGeometry:
    return macroscopic.PropagationGeometry(cfg.density_per_m3, cfg.harmonic_beam_radius_um * 1e-6,
                                           cfg.interaction_length_nm * 1e-9)


def build_bsv(cfg: ScenarioConfig) -> macroscopic.BsvBeam:
    return macroscopic.bsv_parameters(cfg.bsv_energy_nJ * 1e-9, cfg.bsv_wavelength_um * 1e-6,
                                      cfg.bsv_bandwidth_nm * 1e-9, cfg.bsv_beam_radius_um * 1e-6, cfg.theta_rad)


def build_grids(cfg: ScenarioConfig, pulse, medium) -> sfa.SfaGrids:
    return sfa.make_grids(
        pulse, medium,
        samples_per_cycle=cfg.samples_per_cycle,
        harmonic_max=cfg.harmonic_max + cfg.perturbation_harmonic + 0.5,
        n_par=cfg.n_par, n_perp=cfg.n_perp,
        sigma_method="exact" if cfg.exact_sigma else "high-frequency",
    )


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


class _Writer:
    def __init__(self, out_dir: Path, manifest: RunManifest):
        self.out = out_dir
        self.manifest = manifest

    def _record(self, path: Path):
        data = path.read_bytes()
        self.manifest.outputs.append(
            {"file": path.name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        )

    def csv(self, name, header, rows):
        path = self.out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self._record(path)

    def json(self, name, obj):
        path = self.out / name
        path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_fmt) + "\n")
        self._record(path)


@dataclass
class SpectraResult:
    spectra: emission.SpectralCoefficients
    hhg: macroscopic.BandPhotonReport
    scan: list  # BandPhotonReport per theta sample
    thetas: np.ndarray
    at_theta: macroscopic.BandPhotonReport
    extra: list
    grid: sfa.SfaGrids

    @property
    def qshhg_average(self) -> np.ndarray:
        return np.mean([r.photons for r in self.scan], axis=0)


def compute_band_photons(cfg: ScenarioConfig, threads: int = 1, grid: sfa.SfaGrids | None = None) -> SpectraResult:
    medium, pulse = build_medium(cfg), build_pulse(cfg)
    geometry, bsv = build_geometry(cfg), build_bsv(cfg)
    grid = grid or build_grids(cfg, pulse, medium)
    omegas = emission.harmonic_grid(pulse.omega0, cfg.harmonic_max, cfg.samples_per_order)
    spec = emission.compute_spectra(medium, pulse, grid, omegas, cfg.perturbation_harmonic * pulse.omega0,
                                    threads=threads)
    hhg = macroscopic.hhg_band_photons(spec, geometry, pulse.omega0)

    def at(theta):
        return macroscopic.qshhg_band_photons(spec, None, bsv, geometry, theta)

    scan = macroscopic.theta_scan(lambda th: 0.0, cfg.theta_samples).thetas
    return SpectraResult(
        spectra=spec, hhg=hhg, scan=[at(th) for th in scan], thetas=scan, at_theta=at(cfg.theta_rad),
        extra=[at(th) for th in cfg.theta_values_rad], grid=grid,
    )


def _grid_record(grid: sfa.SfaGrids, omegas) -> dict:
    return {
        "time_points": int(grid.times.size),
        "dt_s": grid.dt,
        "steps_per_period": grid.steps_per_period,
        "p_par_points": int(grid.p_par.size),
        "p_perp_points": int(grid.p_perp.size),
        "p_par_max_au": float(grid.p_par_au[-1]),
        "p_perp_max_au": float(grid.p_perp_au[-1]),
        "omega_points": int(np.size(omegas)),
        "sigma_method": grid.sigma_method,
    }


def _write_spectra(w: _Writer, res: SpectraResult):
    sp = res.spectra
    w.csv("spectra.csv", ["order", "omega_rad_per_s", "re_H", "im_H", "re_F", "im_F", "re_G", "im_G"],
          zip(sp.orders, sp.omega, sp.H.real, sp.H.imag, sp.F.real, sp.F.imag, sp.G.real, sp.G.imag))
    qdens = np.mean([r.density for r in res.scan], axis=0)
    w.csv("spectrum_density.csv", ["order", "omega_rad_per_s", "hhg_dn_domega", "qshhg_dn_domega_theta_avg"],
          zip(sp.orders, sp.omega, res.hhg.density, qdens))
    header = ["N", "n_photons", "re_zeta", "im_zeta", "theta"]
    w.csv("hhg_bands.csv", header, ([r[k] for k in header] for r in res.hhg.rows()))
    w.csv("qshhg_bands.csv", header, ([r[k] for k in header] for r in res.at_theta.rows()))
    w.csv("qshhg_theta_scan.csv", header, ([r[k] for k in header] for rep in res.scan for r in rep.rows()))
    if res.extra:
        w.csv("qshhg_theta_values.csv", header, ([r[k] for k in header] for rep in res.extra for r in rep.rows()))
    vals = np.array([r.photons for r in res.scan])
    w.csv("qshhg_bands_theta_avg.csv", ["N", "n_photons", "n_min", "n_max"],
          zip(res.hhg.orders, vals.mean(0), vals.min(0), vals.max(0)))


def _couplings(cfg: ScenarioConfig, spectra: SpectraResult | None):
    rs = cfg.squeeze_r_values or (build_bsv(cfg).r,)
    thetas = cfg.theta_values_rad or (cfg.theta_rad,)
    out = []
    if cfg.zeta_source == "spectra":
        orders = list(spectra.at_theta.orders)
        for th in thetas:
            rep = spectra.at_theta if th == cfg.theta_rad else macroscopic.qshhg_band_photons(
                spectra.spectra, None, build_bsv(cfg), build_geometry(cfg), th)
            for N in cfg.sideband_orders:
                z = rep.zeta[orders.index(N)]
                for r in rs:
                    out.append((N, fockspace.sideband_coupling(z, r, th)))
    else:
        for th in thetas:
            for z2 in cfg.zeta_sq_values:
                for r in rs:
                    out.append((-1, fockspace.sideband_coupling(math.sqrt(z2), r, th)))
    return out


def _exact_allowed(cfg, coupling, notes, what):
    if coupling.r <= fockspace.MAX_R_EXACT or cfg.allow_expensive:
        return True
    notes.append(f"{what}: exact evaluation skipped at r = {coupling.r:.4g} (> {fockspace.MAX_R_EXACT:g}); "
                 "pass --allow-expensive to force it")
    return False


def _stat_row(head, rep: observables.StatisticsReport):
    d = rep.to_dict()
    return head + [d["source"], d["mean_photons"], d["g2"], d["dx1_sq"], d["dx2_sq"]]


STAT_HEADER = ["source", "mean_photons", "g2", "dx1_sq", "dx2_sq"]


def _wigner_axes(cfg, state):
    axis = np.linspace(-cfg.wigner_extent, cfg.wigner_extent, cfg.wigner_points)
    if cfg.wigner_squeezed_frame and isinstance(state, fockspace.SqueezedFockState):
        return axis * math.exp(-state.r), axis * math.exp(state.r)
    return axis, axis.copy()


def _wigner_field(cfg, spec: str, coupling) -> fockspace.WignerField:
    kind, _, num = spec.partition(":")
    nums = [int(x) for x in num.split(":")] if num else []
    if kind in ("proj-q-avg", "proj-q-even"):
        l, dl = nums
        members = [k for k in range(l, l + dl + 1) if kind == "proj-q-avg" or k % 2 == l % 2]
        x, p = _wigner_axes(cfg, None)
        return fockspace.mixed_wigner(np.ones(len(members)), [fockspace.project_on_q(coupling, k) for k in members], x, p)
    if kind == "vacuum":
        state = fockspace.SingleModeState.fock(0)
    elif kind == "fock":
        state = fockspace.SingleModeState.fock(nums[0])
    elif kind == "proj-q":
        state = fockspace.project_on_q(coupling, nums[0])
    else:
        state = fockspace.photon_added_state(coupling, nums[0])
    x, p = _wigner_axes(cfg, state)
    return fockspace.wigner(state, x, p)


def run_scenario(cfg: ScenarioConfig, out_dir, threads: int = 1) -> RunManifest:
    """Execute every requested output of ``cfg`` and write data files plus manifest.json into ``out_dir``."""
    if cfg.requires_expensive and not cfg.allow_expensive:
        raise fockspace.RefusedStage(
            "this scenario runs exact Fock-space sums at large squeezing; pass --allow-expensive to run it"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config_hash=config_hash(cfg), out_dir=str(out))
    w = _Writer(out, manifest)
    (out / "config.cfg").write_text(serialize_config(cfg))
    w._record(out / "config.cfg")
    outputs = set(cfg.outputs)

    def stage(name):
        return _Stage(manifest, name)

    spectra = None
    if "spectra" in outputs:
        with stage("spectra"):
            spectra = compute_band_photons(cfg, threads)
            manifest.grids = _grid_record(spectra.grid, spectra.spectra.omega)
            _write_spectra(w, spectra)

    fock_outputs = outputs & {"joint-distribution", "marginal", "proj-q", "proj-N", "wigner"}
    couplings = _couplings(cfg, spectra) if fock_outputs else []

    def head(N, c):
        return [N, c.r, c.theta, c.zeta_sq]

    if "joint-distribution" in outputs:
        with stage("joint-distribution"):
            rows = []
            for N, c in couplings:
                P = fockspace.joint_distribution(c, cfg.joint_m_max, cfg.joint_n_max)
                for m in range(P.shape[0]):
                    for n in range(P.shape[1]):
                        rows.append(head(N, c) + [m, n, P[m, n]])
            w.csv("joint.csv", ["N", "r", "theta", "zeta_sq", "m", "n", "probability"], rows)

    if "marginal" in outputs:
        with stage("marginal"):
            rows = []
            m = np.arange(cfg.marginal_m_max + 1)
            for N, c in couplings:
                pa = fockspace.marginal_probability(c, m, "analytic")
                if _exact_allowed(cfg, c, manifest.notes, "marginal"):
                    pe = fockspace.marginal_probability(c, m, "exact", allow_expensive=True)
                else:
                    pe = [""] * m.size
                rows += [head(N, c) + [k, a, e] for k, a, e in zip(m, pa, pe)]
            w.csv("marginal.csv", ["N", "r", "theta", "zeta_sq", "m", "p_analytic", "p_exact"], rows)

    if "proj-q" in outputs:
        with stage("proj-q"):
            rows = []
            for N, c in couplings:
                for l in cfg.l_values:
                    alpha = fockspace.projq_alpha(c, l) if c.beta_n != 0 else 0j
                    h = head(N, c) + [l, alpha.real, alpha.imag]
                    rows.append(_stat_row(h, observables.projq_statistics_analytic(c, l)))
                    if l <= cfg.numeric_max_photons:
                        state = fockspace.project_on_q(c, l)
                        rows.append(_stat_row(h, observables.photon_statistics(state)))
            w.csv("projq.csv", ["N", "r", "theta", "zeta_sq", "l", "re_alpha", "im_alpha"] + STAT_HEADER, rows)

    if "proj-N" in outputs:
        with stage("proj-N"):
            rows = []
            for N, c in couplings:
                numeric = _exact_allowed(cfg, c, manifest.notes, "proj-N")
                for m in cfg.m_values:
                    h = head(N, c) + [m]
                    rows.append(_stat_row(h, observables.projN_statistics_analytic(c, m)))
                    if numeric and m <= cfg.numeric_max_photons:
                        state = fockspace.project_on_N(c, m, allow_expensive=True)
                        rows.append(_stat_row(h, observables.photon_statistics(state)))
            w.csv("projN.csv", ["N", "r", "theta", "zeta_sq", "m"] + STAT_HEADER, rows)

    if "wigner" in outputs:
        with stage("wigner"):
            rows, summary = [], {}
            c = couplings[0][1]
            for spec in cfg.wigner_states:
                fld = _wigner_field(cfg, spec, c)
                x, p = fld.x, fld.p
                summary[spec] = {"normalization": fld.normalization, "coarse_grid": fld.coarse,
                                 "min": float(fld.W.min()), "max": float(fld.W.max())}
                for i, pv in enumerate(p):
                    for j, xv in enumerate(x):
                        rows.append([spec, xv, pv, fld.W[i, j]])
            w.csv("wigner.csv", ["state", "x", "p", "W"], rows)
            w.json("wigner_summary.json", summary)

    if "fringe" in outputs:
        with stage("fringe"):
            r = (cfg.squeeze_r_values or (build_bsv(cfg).r,))[0]
            c = observables.coupling_for_alpha(cfg.fringe_alpha, cfg.fringe_l, r, cfg.theta_rad)
            rows = []
            for parity in ("all", "even-only"):
                ratios = observables.fringe_curve(c, cfg.fringe_l, cfg.fringe_delta_l, parity)
                rows += [[d, ratio, parity] for d, ratio in zip(cfg.fringe_delta_l, ratios)]
            w.csv("fringe.csv", ["delta_l", "ratio", "parity"], rows)

    if "scaling" in outputs:
        with stage("scaling"):
            intensity = units.c * units.epsilon_0 * cfg.peak_field_V_per_m**2
            ref_omega = 2 * math.pi * units.c / (cfg.scaling_reference_wavelength_um * 1e-6)
            if intensity > 0:
                rc = macroscopic.susceptibility_ratio_scaling(intensity, cfg.omega0, cfg.effective_mass_me)
                rr = macroscopic.susceptibility_ratio_scaling(intensity, ref_omega, cfg.scaling_reference_mass_me)
            else:
                rc = rr = 0.0
            ratio = rc / rr if rr else 0.0
            w.json("scaling.json", {"intensity_W_per_m2": intensity, "R": rc, "R_reference": rr,
                                    "ratio_to_reference": ratio})

    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return manifest


class _Stage:
    def __init__(self, manifest, name):
        self.manifest, self.name = manifest, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.manifest.stage_seconds[self.name] = round(time.perf_counter() - self.t0, 3)
        return False


def _plateau_change(coarse, fine, floor=1e-3):
    """Largest relative change of band photons among bands above floor * max."""
    coarse, fine = np.asarray(coarse), np.asarray(fine)
    if not np.any(coarse > 0):
        return 0.0
    sel = coarse > floor * coarse.max()
    return float(np.max(np.abs(fine[sel] / coarse[sel] - 1)))


def convergence_check(cfg: ScenarioConfig, threads: int = 1, tolerance: float = CONVERGENCE_TOLERANCE) -> dict:
    """Halve every time and momentum step and compare band photon numbers.

    Bands below 1e-3 of the strongest band in each spectrum are left out.
    """
    medium, pulse = build_medium(cfg), build_pulse(cfg)
    grid = build_grids(cfg, pulse, medium)
    base = compute_band_photons(cfg, threads, grid)
    fine = compute_band_photons(cfg, threads, grid.refined(2, 2))
    hhg = _plateau_change(base.hhg.photons, fine.hhg.photons)
    qs = _plateau_change(base.qshhg_average, fine.qshhg_average)
    result = {
        "hhg_max_relative_change": hhg,
        "qshhg_max_relative_change": qs,
        "tolerance": tolerance,
        "passed": bool(max(hhg, qs) < tolerance),
        "base_grid": _grid_record(grid, base.spectra.omega),
        "fine_grid": _grid_record(fine.grid, fine.spectra.omega),
    }
    return result
