"""Phase-matched photon numbers per harmonic band, the BSV beam and the susceptibility law."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid

from . import units
from .emission import SpectralCoefficients
from .sfa import ConfigurationError


@dataclass(frozen=True)
class PropagationGeometry:
    """Emitter density (1/m^3), harmonic beam radius (m) and interaction length (m).

    The interaction length is assumed shorter than the phase-mismatch length,
    so the propagation integral reduces to ``length``.
    """

    density: float
    beam_radius: float
    length: float
    volume: float = 1.0

    def __post_init__(self):
        for name in ("density", "beam_radius", "length", "volume"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def coherence_factor(self) -> float:
        """(N0 w_k l_i)^2 / 2c in s/m^3."""
        return (self.density * self.beam_radius * self.length) ** 2 / (2 * units.c)

    def hhg_factor(self, volume: float | None = None) -> float:
        """c_k^2 in s for convention volume ``volume``."""
        return self.coherence_factor * (self.volume if volume is None else volume)


@dataclass(frozen=True)
class BsvBeam:
    r: float
    theta: float
    wavelength: float
    bandwidth: float
    beam_radius: float

    def __post_init__(self):
        if not self.r >= 0:
            raise ValueError("squeeze amplitude must be nonnegative")

    @property
    def mode_density(self) -> float:
        """(dq)^3/(2 pi)^3 = bandwidth / (w_q lambda_q)^2, in 1/m^3."""
        return self.bandwidth / (self.beam_radius * self.wavelength) ** 2

    @property
    def omega(self) -> float:
        return 2 * math.pi * units.c / self.wavelength

    @property
    def photons(self) -> float:
        return math.sinh(self.r) ** 2

    def with_theta(self, theta: float) -> "BsvBeam":
        return BsvBeam(self.r, theta, self.wavelength, self.bandwidth, self.beam_radius)


def bsv_parameters(
    energy: float, wavelength: float, bandwidth: float, beam_radius: float, theta: float = 0.0
) -> BsvBeam:
    """Squeezed-vacuum beam carrying ``energy`` joules: sinh^2 r = energy / (hbar w_q)."""
    for name, val in (("wavelength", wavelength), ("bandwidth", bandwidth), ("beam radius", beam_radius)):
        if not val > 0:
            raise ValueError(f"{name} must be positive")
    if energy < 0:
        raise ValueError("energy must be nonnegative")
    photon = units.hbar * 2 * math.pi * units.c / wavelength
    r = math.asinh(math.sqrt(energy / photon))
    return BsvBeam(r, theta, wavelength, bandwidth, beam_radius)


@dataclass(frozen=True, eq=False)
class BandPhotonReport:
    """Photon counts per harmonic order; ``zeta`` and ``theta`` are set for sidebands."""

    orders: np.ndarray
    photons: np.ndarray
    omega: np.ndarray
    density: np.ndarray
    zeta: np.ndarray | None = None
    theta: float | None = None

    def rows(self):
        zeta = self.zeta if self.zeta is not None else np.zeros(self.orders.size)
        theta = 0.0 if self.theta is None else self.theta
        for N, n, z in zip(self.orders, self.photons, zeta):
            yield {"N": int(N), "n_photons": float(n), "re_zeta": float(np.real(z)),
                   "im_zeta": float(np.imag(z)), "theta": float(theta)}


def _bands(omega, omega0, orders):
    edges = omega / omega0
    out = []
    for N in orders:
        lo, hi = N - 0.5, N + 0.5
        if lo < edges[0] - 1e-9 or hi > edges[-1] + 1e-9:
            raise ConfigurationError(f"band of order {N} lies outside the frequency grid")
        sel = (edges >= lo - 1e-9) & (edges <= hi + 1e-9)
        out.append(sel)
    return out


def _default_orders(omega, omega0):
    lo = math.ceil(omega[0] / omega0 - 0.5 - 1e-9)
    hi = math.floor(omega[-1] / omega0 - 0.5 + 1e-9)
    return np.arange(max(lo, 1), hi + 1)


def hhg_band_photons(
    H, geometry: PropagationGeometry, omega0: float, *, omega=None, volume=None, orders=None
) -> BandPhotonReport:
    """<n>_N = int_band c_k^2 |H(w)|^2 dw.

    ``H`` is either a SpectralCoefficients bundle or an array on ``omega``.
    """
    if isinstance(H, SpectralCoefficients):
        omega, volume, H = H.omega, H.volume, H.H
    omega = np.asarray(omega, dtype=float)
    volume = geometry.volume if volume is None else volume
    dens = geometry.hhg_factor(volume) * np.abs(np.asarray(H)) ** 2
    orders = _default_orders(omega, omega0) if orders is None else np.asarray(orders)
    photons = np.array([trapezoid(dens[s], omega[s]) for s in _bands(omega, omega0, orders)])
    return BandPhotonReport(orders=orders, photons=photons, omega=omega, density=dens)


def sideband_factor(geometry: PropagationGeometry, bsv: BsvBeam, volume: float) -> float:
    """c_q^2 = (N0 w_k l_i)^2/2c V^2 (dq)^3/(2 pi)^3, in s."""
    return geometry.coherence_factor * volume**2 * bsv.mode_density


def qshhg_band_photons(
    F, G=None, bsv: BsvBeam = None, geometry: PropagationGeometry = None, theta: float | None = None,
    omega0: float = None, *, omega=None, volume=None, orders=None,
) -> BandPhotonReport:
    """Sideband photons <n>_N = cosh^2 r |zeta_N|^2.

    zeta_k = F - G tanh(r) e^{i theta}; zeta_N is the band-integrated
    amplitude c_q (int |zeta_k|^2 dw)^1/2 carrying the phase of the band's
    dominant sample.
    """
    if isinstance(F, SpectralCoefficients):
        spec = F
        omega, volume, F, G = spec.omega, spec.volume, spec.F, spec.G
        omega0 = spec.omega0 if omega0 is None else omega0
    omega = np.asarray(omega, dtype=float)
    volume = geometry.volume if volume is None else volume
    theta = bsv.theta if theta is None else theta
    zk = np.asarray(F) - np.asarray(G) * math.tanh(bsv.r) * np.exp(1j * theta)
    cq2 = sideband_factor(geometry, bsv, volume)
    orders = _default_orders(omega, omega0) if orders is None else np.asarray(orders)
    zeta = np.empty(orders.size, dtype=complex)
    for i, s in enumerate(_bands(omega, omega0, orders)):
        mag2 = cq2 * trapezoid(np.abs(zk[s]) ** 2, omega[s])
        peak = zk[s][np.argmax(np.abs(zk[s]))]
        phase = peak / abs(peak) if abs(peak) > 0 else 1.0
        zeta[i] = math.sqrt(mag2) * phase
    photons = math.cosh(bsv.r) ** 2 * np.abs(zeta) ** 2
    dens = math.cosh(bsv.r) ** 2 * cq2 * np.abs(zk) ** 2
    return BandPhotonReport(orders=orders, photons=photons, omega=omega, density=dens, zeta=zeta, theta=theta)


@dataclass(frozen=True, eq=False)
class ThetaScan:
    thetas: np.ndarray
    values: np.ndarray

    @property
    def average(self):
        return np.mean(self.values, axis=0)


def theta_scan(f: Callable[[float], object], samples: int = 16) -> ThetaScan:
    """Evaluate f on a uniform grid over [0, 2 pi) and keep every sample."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    thetas = 2 * math.pi * np.arange(samples) / samples
    values = np.array([f(th) for th in thetas])
    return ThetaScan(thetas=thetas, values=values)


def susceptibility_ratio_scaling(intensity: float, omega0: float, effective_mass: float) -> float:
    """I0 / (8 w0^5 m*^2): proportional to the QSHHG/HHG photon ratio."""
    for name, val in (("intensity", intensity), ("omega0", omega0), ("effective mass", effective_mass)):
        if not val > 0:
            raise ValueError(f"{name} must be positive")
    return intensity / (8 * omega0**5 * effective_mass**2)
