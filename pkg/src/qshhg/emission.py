"""Single-emitter HHG and QSHHG spectral coefficients for atoms and solids."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .sfa import (
    ConfigurationError,
    LaserPulse,
    MediumModel,
    MomentumMoments,
    SfaGrids,
    Solid,
    _displacement_au,
    _trapezoid_weights,
    momentum_moments,
    trajectory,
)

OMEGA_CHUNK = 128


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """H, F and G on one frequency grid (rad/s), for convention volume ``volume`` (m^3)."""

    omega: np.ndarray
    H: np.ndarray
    F: np.ndarray
    G: np.ndarray
    omega_q: float
    omega0: float
    volume: float = 1.0

    @property
    def orders(self) -> np.ndarray:
        return self.omega / self.omega0


def to_solid(gap: float, effective_mass: float, d0: float, density: float) -> Solid:
    """Effective-mass two-band solid (gap in J, mass in kg, d0 in m (kg m/s)^-3/2)."""
    for name, val in (("gap", gap), ("effective mass", effective_mass), ("d0", d0), ("density", density)):
        if not val > 0:
            raise ValueError(f"{name} must be positive, got {val}")
    return Solid(gap=gap, effective_mass=effective_mass, d0=d0, density=density)


def harmonic_grid(omega0: float, n_max: int = 40, samples_per_order: int = 32) -> np.ndarray:
    """Frequencies spanning orders 1/2 .. n_max + 1/2 with band edges on grid points."""
    orders = np.linspace(0.5, n_max + 0.5, n_max * samples_per_order + 1)
    return orders * omega0


def mode_coupling(omega, volume: float = 1.0):
    """|e| E_v / hbar with E_v = sqrt(hbar w / 2 eps0 V), in 1/(m s)."""
    ev = np.sqrt(units.hbar * np.asarray(omega, dtype=float) / (2 * units.epsilon_0 * volume))
    return units.e * ev / units.hbar


def fourier_transform(series, times, omegas) -> np.ndarray:
    """Trapezoid-weighted int dt e^{i w t} f(t) at exactly the requested w.

    ``times`` and ``omegas`` share a unit system; the result carries f times time.
    """
    series = np.asarray(series)
    times = np.asarray(times, dtype=float)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    wf = _trapezoid_weights(times) * series
    out = np.empty(omegas.size, dtype=complex)
    for i in range(0, omegas.size, OMEGA_CHUNK):
        w = omegas[i : i + OMEGA_CHUNK]
        out[i : i + OMEGA_CHUNK] = np.exp(1j * np.outer(w, times)) @ wf
    return out


def fourier_transform_fft(series, times, pad: int = 1):
    """FFT version of ``fourier_transform`` on its natural lattice w_j = 2 pi j/(N dt).

    Returns (omegas, values) for j = 0 .. N/2 with N = pad * len(times).
    """
    series = np.asarray(series)
    times = np.asarray(times, dtype=float)
    dt = times[1] - times[0]
    n = pad * times.size
    wf = _trapezoid_weights(times) * series
    vals = np.fft.ifft(wf, n=n) * n
    j = np.arange(n // 2 + 1)
    omegas = 2 * math.pi * j / (n * dt)
    return omegas, np.exp(1j * omegas * times[0]) * vals[: j.size]


def imaginary_dipole_density(medium: MediumModel, pulse: LaserPulse, p, grid: SfaGrids) -> np.ndarray:
    """x_p(t) = d*(p_t) b_p(t) - c.c. in m (kg m/s)^-3, purely imaginary."""
    tr = trajectory(medium, pulse, p, grid)
    z = np.conj(tr.dipole) * tr.amplitude
    return (z - np.conj(z)) * units.LENGTH * units.MOMENTUM**-3


def _check_nyquist(grid: SfaGrids, omegas):
    if np.max(np.abs(omegas)) >= grid.nyquist:
        raise ConfigurationError(
            f"frequency {np.max(np.abs(omegas)):.3e} rad/s exceeds the time-grid Nyquist {grid.nyquist:.3e}"
        )


def _dipole_series_au(mom: MomentumMoments, omega_au: float, method: str):
    """The bracket of H_k(t): x(t) + int d^3p sigma_k (Gamma + c.c.), a.u. length."""
    m, A = mom.mass, mom.potential
    dt = mom.times[1] - mom.times[0]
    s1 = _displacement_au(omega_au, np.ones_like(A), dt, method)
    s2 = _displacement_au(omega_au, A / m, dt, method)
    return mom["dipole"] + 2 * (s1 * mom["re1"] / m + s2 * mom["re0"])


def _hhg(mom: MomentumMoments, omegas, volume, method):
    t = mom.times
    w_au = omegas * units.TIME
    if method == "high-frequency":
        # the bracket is x(t) - J(t)/w^2 with J = int v (Gamma + c.c.)
        m, A = mom.mass, mom.potential
        J = 2 * (mom["re1"] + A * mom["re0"]) / m
        tx = fourier_transform(mom["dipole"], t, w_au)
        tj = fourier_transform(J, t, w_au)
        bracket = tx - tj / w_au**2
    else:
        bracket = np.array(
            [fourier_transform(_dipole_series_au(mom, w, method), t, [w])[0] for w in w_au]
        )
    return -mode_coupling(omegas, volume) * bracket * units.LENGTH * units.TIME


def _qshhg(mom: MomentumMoments, omegas, omega_q, volume, method):
    t = mom.times
    m, A = mom.mass, mom.potential
    dt = t[1] - t[0]
    wq = omega_q * units.TIME
    w_au = omegas * units.TIME
    pref = mode_coupling(omegas, volume) * mode_coupling(omega_q, volume)
    pref = pref * units.LENGTH**2 * units.TIME * units.TIME
    xp0, xp1 = 1j * mom["xp0"], 1j * mom["xp1"]
    im0, im1, im2 = mom["im0"], mom["im1"], mom["im2"]
    if method == "high-frequency":
        # sigma_q and sigma_k are both -v/w^2; conjugation changes nothing
        Y = (xp1 + A * xp0) / m
        Z = (im2 + 2 * A * im1 + A**2 * im0) / m**2
        F = -fourier_transform(Y, t, w_au + wq) / wq**2 + 1j * fourier_transform(Z, t, w_au + wq) / (
            wq**2 * w_au**2
        )
        G = -fourier_transform(Y, t, w_au - wq) / wq**2 + 1j * fourier_transform(Z, t, w_au - wq) / (
            wq**2 * w_au**2
        )
        return pref * F, pref * G
    q1 = _displacement_au(wq, np.ones_like(A), dt, method)
    q2 = _displacement_au(wq, A / m, dt, method)
    F = np.empty(w_au.size, dtype=complex)
    G = np.empty(w_au.size, dtype=complex)
    for i, w in enumerate(w_au):
        k1 = _displacement_au(w, np.ones_like(A), dt, method)
        k2 = _displacement_au(w, A / m, dt, method)

        def series(a1, a2):
            lin = a1 * xp1 / m + a2 * xp0
            quad = a1 * k1 * im2 / m**2 + (a1 * k2 + a2 * k1) * im1 / m + a2 * k2 * im0
            return lin + 1j * quad

        F[i] = fourier_transform(series(q1, q2), t, [w + wq])[0]
        G[i] = fourier_transform(series(np.conj(q1), np.conj(q2)), t, [w - wq])[0]
    return pref * F, pref * G


def hhg_spectral_coefficient(
    medium: MediumModel,
    pulse: LaserPulse,
    grid: SfaGrids,
    omegas,
    *,
    volume: float = 1.0,
    moments: MomentumMoments | None = None,
    threads: int = 1,
) -> np.ndarray:
    """H-tilde(w) = -int dt e^{iwt} H_k(t), dimensionless."""
    omegas = np.asarray(omegas, dtype=float)
    _check_nyquist(grid, omegas)
    mom = moments or momentum_moments(medium, pulse, grid, threads)
    return _hhg(mom, omegas, volume, grid.sigma_method)


def qshhg_spectral_coefficients(
    medium: MediumModel,
    pulse: LaserPulse,
    grid: SfaGrids,
    omega_q: float,
    omegas,
    *,
    volume: float = 1.0,
    moments: MomentumMoments | None = None,
    threads: int = 1,
):
    """(F-tilde, G-tilde) at the sum and difference frequencies w +- omega_q."""
    if not omega_q > 0:
        raise ValueError("perturbation frequency must be positive")
    omegas = np.asarray(omegas, dtype=float)
    _check_nyquist(grid, omegas + omega_q)
    mom = moments or momentum_moments(medium, pulse, grid, threads)
    return _qshhg(mom, omegas, omega_q, volume, grid.sigma_method)


def compute_spectra(
    medium: MediumModel,
    pulse: LaserPulse,
    grid: SfaGrids,
    omegas,
    omega_q: float | None = None,
    *,
    volume: float = 1.0,
    threads: int = 1,
    moments: MomentumMoments | None = None,
) -> SpectralCoefficients:
    """H, F and G from a single pass over the momentum grid (omega_q defaults to 2 omega0)."""
    omega_q = 2 * pulse.omega0 if omega_q is None else omega_q
    mom = moments or momentum_moments(medium, pulse, grid, threads)
    H = hhg_spectral_coefficient(medium, pulse, grid, omegas, volume=volume, moments=mom)
    F, G = qshhg_spectral_coefficients(medium, pulse, grid, omega_q, omegas, volume=volume, moments=mom)
    return SpectralCoefficients(
        omega=np.asarray(omegas, dtype=float),
        H=H,
        F=F,
        G=G,
        omega_q=omega_q,
        omega0=pulse.omega0,
        volume=volume,
    )
