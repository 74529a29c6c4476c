"""Single-emitter strong-field kernels.

Classical pulse fields, transition dipoles, action phases, the recollision
filtered continuum amplitude, the ionization kernel and the photon-mode
displacement coefficient. All kernels run in atomic units; the public
functions take and return SI quantities.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import lfilter, oaconvolve

from . import units


class ConfigurationError(ValueError):
    """Raised when grids or parameters cannot support the requested computation."""


SUPPORT_THRESHOLD = 1e-8
BLOCK_SIZE = 96


@dataclass(frozen=True)
class LaserPulse:
    """Sine carrier under a Gaussian field envelope exp(-t^2/tau^2).

    ``envelope="flat"`` drops the envelope entirely; it exists for
    monochromatic checks and needs an explicit time window.
    """

    wavelength: float
    peak_field: float
    tau_cycles: float = 6.0
    cep: float = 0.0
    envelope: str = "gaussian"

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.peak_field >= 0:
            raise ValueError("peak field must be nonnegative")
        if not self.tau_cycles > 0:
            raise ValueError("tau must be positive")
        if self.envelope not in ("gaussian", "flat"):
            raise ValueError(f"unknown envelope {self.envelope!r}")

    @property
    def omega0(self) -> float:
        return 2 * math.pi * units.c / self.wavelength

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega0

    @property
    def tau(self) -> float:
        return self.tau_cycles * self.period

    @property
    def ponderomotive_energy(self) -> float:
        """Free-electron U_p in joules."""
        return (units.e * self.peak_field) ** 2 / (4 * units.m_e * self.omega0**2)

    def envelope_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.envelope == "flat":
            return np.ones_like(t)
        return np.exp(-((t / self.tau) ** 2))

    def field_at(self, t):
        t = np.asarray(t, dtype=float)
        return self.peak_field * self.envelope_at(t) * np.sin(self.omega0 * t + self.cep)


@dataclass(frozen=True)
class Atom:
    binding_energy: float
    d0: float
    density: float = 1.0
    mass: float = units.m_e

    def __post_init__(self):
        if not (self.binding_energy > 0 and self.mass > 0 and self.density > 0):
            raise ValueError("atom parameters must be positive")

    @property
    def energy_offset(self) -> float:
        return self.binding_energy

    def _au(self):
        return (
            self.binding_energy / units.ENERGY,
            self.mass / units.MASS,
            self.d0 / units.ATOM_DIPOLE_CONSTANT,
        )

    def _dipole_au(self, p_par, p_perp):
        e0, m, d0 = self._au()
        return d0 * p_par / ((p_par**2 + p_perp**2) / (2 * m) + e0) ** 3


@dataclass(frozen=True)
class Solid:
    """Two-band solid in the effective-mass picture.

    ``d0`` is the momentum-space dipole at the band minimum, in m (kg m/s)^-3/2.
    """

    gap: float
    effective_mass: float
    d0: float
    density: float = 1.0

    def __post_init__(self):
        if not (self.gap > 0 and self.effective_mass > 0 and self.density > 0):
            raise ValueError("solid parameters must be positive")

    @property
    def energy_offset(self) -> float:
        return self.gap

    @property
    def mass(self) -> float:
        return self.effective_mass

    def _au(self):
        return (
            self.gap / units.ENERGY,
            self.effective_mass / units.MASS,
            self.d0 / units.MOMENTUM_DIPOLE,
        )

    def _dipole_au(self, p_par, p_perp):
        eg, m, d0 = self._au()
        return d0 * eg / (eg + (p_par**2 + p_perp**2) / (2 * m))


MediumModel = Union[Atom, Solid]


def _readonly(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SfaGrids:
    """Uniform time grid, cylindrical momentum grid and the one-period filter.

    Times are in seconds and momenta in kg m/s; ``*_au`` twins are cached.
    """

    times: np.ndarray
    period: float
    p_par: np.ndarray
    p_perp: np.ndarray
    sigma_method: str = "high-frequency"
    t_au: np.ndarray = field(init=False, repr=False)
    p_par_au: np.ndarray = field(init=False, repr=False)
    p_perp_au: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.sigma_method not in ("high-frequency", "exact"):
            raise ValueError(f"unknown sigma method {self.sigma_method!r}")
        t = _readonly(self.times)
        if t.size < 3 or np.any(np.diff(t) <= 0):
            raise ConfigurationError("time grid must be increasing with at least 3 points")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "p_par", _readonly(self.p_par))
        object.__setattr__(self, "p_perp", _readonly(self.p_perp))
        object.__setattr__(self, "t_au", _readonly(t / units.TIME))
        object.__setattr__(self, "p_par_au", _readonly(self.p_par / units.MOMENTUM))
        object.__setattr__(self, "p_perp_au", _readonly(self.p_perp / units.MOMENTUM))
        steps = self.period / self.dt
        if abs(steps - round(steps)) > 1e-6:
            raise ConfigurationError("the optical period must be an integer number of time steps")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def steps_per_period(self) -> int:
        return int(round(self.period / self.dt))

    @property
    def nyquist(self) -> float:
        return math.pi / self.dt

    def filter_weights(self) -> np.ndarray:
        """e^{-xi} on the lags 0..T0, with the trapezoid half weight at lag 0."""
        lags = np.arange(self.steps_per_period + 1) * self.dt
        w = recollision_filter(lags, self.period)
        w[0] *= 0.5
        return w

    def momentum_weights(self) -> np.ndarray:
        """Trapezoid weights of d^3p = 2 pi p_perp dp_par dp_perp, in a.u., flattened."""
        wpar = _trapezoid_weights(self.p_par_au)
        wperp = _trapezoid_weights(self.p_perp_au) * 2 * math.pi * self.p_perp_au
        return np.outer(wpar, wperp).ravel()

    def momentum_points(self):
        """Flattened (p_par, p_perp) pairs in a.u., matching ``momentum_weights``."""
        par, perp = np.meshgrid(self.p_par_au, self.p_perp_au, indexing="ij")
        return par.ravel(), perp.ravel()

    def refined(self, time_factor: int = 2, momentum_factor: int = 2) -> "SfaGrids":
        """Same extents with every step divided by the given factors."""
        nt = (self.times.size - 1) * time_factor + 1
        npar = (self.p_par.size - 1) * momentum_factor + 1
        nperp = (self.p_perp.size - 1) * momentum_factor + 1
        return SfaGrids(
            times=np.linspace(self.times[0], self.times[-1], nt),
            period=self.period,
            p_par=np.linspace(self.p_par[0], self.p_par[-1], npar),
            p_perp=np.linspace(self.p_perp[0], self.p_perp[-1], nperp),
            sigma_method=self.sigma_method,
        )


def _trapezoid_weights(x):
    x = np.asarray(x, dtype=float)
    if x.size == 1:
        return np.ones(1)
    w = np.zeros_like(x)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def recollision_filter(lag, period):
    """e^{-xi(lag)}: open for half a period, then a steep ramp, zero after one period."""
    lag = np.asarray(lag, dtype=float)
    xi = np.where(lag <= period / 2, 0.0, 10 * lag / period)
    return np.where(lag > period * (1 + 1e-12), 0.0, np.exp(-xi))


def make_grids(
    pulse: LaserPulse,
    medium: MediumModel,
    *,
    samples_per_cycle: int = 256,
    harmonic_max: float = 40,
    n_par: int = 201,
    n_perp: int = 41,
    p_par_max: float | None = None,
    p_perp_max: float | None = None,
    span_cycles: tuple[float, float] | None = None,
    sigma_method: str = "high-frequency",
) -> SfaGrids:
    """Build default grids for a pulse and medium.

    The time window covers the envelope down to 1e-8 of peak, rounded out to
    whole cycles. Momentum extents follow the classical cutoff estimate.
    """
    if samples_per_cycle < 4 * harmonic_max:
        raise ConfigurationError(
            f"{samples_per_cycle} samples per cycle cannot resolve harmonic {harmonic_max}"
        )
    T0 = pulse.period
    if span_cycles is None:
        if pulse.envelope == "flat":
            raise ConfigurationError("a flat envelope needs an explicit span")
        half = pulse.tau * math.sqrt(math.log(1 / SUPPORT_THRESHOLD))
        k = math.ceil(half / T0)
        start, stop = -k, k
    else:
        start, stop = span_cycles
    n_cycles = stop - start
    if abs(n_cycles * samples_per_cycle - round(n_cycles * samples_per_cycle)) > 1e-9:
        raise ConfigurationError("span must hold an integer number of time steps")
    nt = int(round(n_cycles * samples_per_cycle)) + 1
    times = np.linspace(start * T0, stop * T0, nt)
    if pulse.envelope == "gaussian":
        edge = pulse.envelope_at(times[[0, -1]])
        if np.any(edge > SUPPORT_THRESHOLD):
            raise ConfigurationError("time grid too short: envelope has not decayed below 1e-8")

    mass = medium.mass
    a_max = units.e * pulse.peak_field / pulse.omega0
    e_cut = 3.17 * (units.e * pulse.peak_field) ** 2 / (4 * mass * pulse.omega0**2)
    if p_par_max is None:
        p_par_max = 1.5 * (a_max + math.sqrt(2 * mass * e_cut))
        # keep a finite box for vanishing drive
        p_par_max = max(p_par_max, math.sqrt(2 * mass * medium.energy_offset))
    if p_perp_max is None:
        p_perp_max = math.sqrt(32 * math.pi * mass * units.hbar / T0)
    return SfaGrids(
        times=times,
        period=T0,
        p_par=np.linspace(-p_par_max, p_par_max, n_par),
        p_perp=np.linspace(0.0, p_perp_max, n_perp),
        sigma_method=sigma_method,
    )


def pulse_fields(pulse: LaserPulse, grid: SfaGrids):
    """Field F(t) in V/m and vector potential A(t) in V s/m with -dA/dt = F.

    A is the cumulative trapezoid of -F from the start of the grid.
    """
    if pulse.envelope == "gaussian":
        edge = pulse.envelope_at(grid.times[[0, -1]])
        if np.any(edge > SUPPORT_THRESHOLD):
            raise ConfigurationError("time grid too short: envelope has not decayed below 1e-8")
    F = pulse.field_at(grid.times)
    A = -cumulative_trapezoid(F, grid.times, initial=0.0)
    return F, A


def _fields_au(pulse, grid):
    F, A = pulse_fields(pulse, grid)
    return F / units.FIELD, A / (units.FIELD * units.TIME)


def transition_dipole(medium: MediumModel, p) -> np.ndarray:
    """Ground-to-continuum dipole d(p) in m (kg m/s)^-3/2 for momenta of shape (..., 3)."""
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 3:
        raise ValueError("momentum must have a trailing axis of length 3")
    if not np.all(np.isfinite(p)):
        raise ValueError("momentum must be finite")
    pa = p / units.MOMENTUM
    p2 = np.sum(pa**2, axis=-1)
    if isinstance(medium, Atom):
        e0, m, d0 = medium._au()
        d = d0 * pa / (p2[..., None] / (2 * m) + e0) ** 3
    else:
        eg, m, d0 = medium._au()
        mag = d0 * eg / (eg + p2 / (2 * m))
        d = np.zeros_like(pa)
        d[..., 0] = mag
    return (d * units.MOMENTUM_DIPOLE).astype(complex)


def _energy_au(medium, p_par, p_perp):
    e0, m, _ = medium._au()
    return e0 + (p_par**2 + p_perp**2) / (2 * m)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """All series for one canonical momentum, in atomic units.

    ``velocity`` is the polarization component of p_t / m.
    """

    p_par: float
    p_perp: float
    times: np.ndarray
    field: np.ndarray
    potential: np.ndarray
    kinetic_momentum: np.ndarray
    velocity: np.ndarray
    action: np.ndarray
    rabi: np.ndarray
    amplitude: np.ndarray
    kernel: np.ndarray
    dipole: np.ndarray


def _batch_series(medium, F, A, dt, window, p_par, p_perp):
    """Continuum amplitudes for a block of momenta, shape (B, Nt), all a.u."""
    pt = p_par[:, None] + A[None, :]
    perp = p_perp[:, None]
    S = cumulative_trapezoid(_energy_au(medium, pt, perp), dx=dt, axis=1, initial=0.0)
    d = medium._dipole_au(pt, perp)
    rabi = d * F[None, :]
    rot = np.exp(1j * S)
    conv = oaconvolve(rabi * rot.conj(), window[None, :], axes=1)[:, : F.size]
    b = rot * conv * dt
    return pt, S, d, rabi, b


def _momentum_au(p):
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size == 1:
        return float(p[0]) / units.MOMENTUM, 0.0
    if p.size != 3:
        raise ValueError("momentum must be a scalar or a 3-vector")
    return p[0] / units.MOMENTUM, math.hypot(p[1], p[2]) / units.MOMENTUM


def trajectory(medium: MediumModel, pulse: LaserPulse, p, grid: SfaGrids) -> Trajectory:
    """Evaluate every single-momentum series; ``p`` is SI, x along polarization."""
    ppar, pperp = _momentum_au(p)
    F, A = _fields_au(pulse, grid)
    dt = grid.dt / units.TIME
    pt, S, d, rabi, b = _batch_series(
        medium, F, A, dt, grid.filter_weights(), np.array([ppar]), np.array([pperp])
    )
    _, m, _ = medium._au()
    return Trajectory(
        p_par=ppar,
        p_perp=pperp,
        times=grid.t_au,
        field=F,
        potential=A,
        kinetic_momentum=pt[0],
        velocity=pt[0] / m,
        action=S[0],
        rabi=rabi[0],
        amplitude=b[0],
        kernel=np.conj(rabi[0]) * b[0],
        dipole=d[0],
    )


def action_phase(medium: MediumModel, pulse: LaserPulse, p, grid: SfaGrids) -> np.ndarray:
    """S(t) = (1/hbar) int_{t0}^t (p_tau^2/2m + E0) dtau, dimensionless."""
    return trajectory(medium, pulse, p, grid).action


def continuum_amplitude(medium: MediumModel, pulse: LaserPulse, p, grid: SfaGrids) -> np.ndarray:
    """Filtered continuum amplitude b_p(t) in (kg m/s)^-3/2."""
    return trajectory(medium, pulse, p, grid).amplitude * units.MOMENTUM**-1.5


def ionization_kernel(medium: MediumModel, pulse: LaserPulse, p, grid: SfaGrids) -> np.ndarray:
    """Gamma_p(t) = Omega*(t) b_p(t) in (kg m/s)^-3 s^-1."""
    return trajectory(medium, pulse, p, grid).kernel * units.MOMENTUM**-3 / units.TIME


def _displacement_au(omega, velocity, dt, method):
    """sigma-bar in a.u. for one frequency (a.u.) and a velocity series."""
    if not omega > 0:
        raise ValueError("mode frequency must be positive")
    if method == "high-frequency":
        return -np.asarray(velocity, dtype=complex) / omega**2
    if method != "exact":
        raise ValueError(f"unknown sigma method {method!r}")
    # exact step of sigma' = -i w sigma - (i/w) v with v linear over the step
    rot = np.exp(-1j * omega * dt)
    v = np.asarray(velocity, dtype=float)
    drive = -(v[:-1] + v[1:]) / 2 * (1 - rot) / omega**2
    out = np.zeros(v.size, dtype=complex)
    out[1:] = lfilter([1.0], [1.0, -rot], drive)
    return out


def mode_displacement(omega: float, traj: Trajectory, grid: SfaGrids, method: str | None = None):
    """Photon-mode displacement sigma-bar(t) for mode frequency omega (rad/s), in m s.

    ``exact`` integrates -(i/w) int v e^{-iw(t-t')} dt' from the grid start;
    ``high-frequency`` keeps the leading term of its asymptotic expansion, -v/w^2.
    """
    if not omega > 0:
        raise ValueError("mode frequency must be positive")
    method = method or grid.sigma_method
    s = _displacement_au(omega * units.TIME, traj.velocity, grid.dt / units.TIME, method)
    return s * units.LENGTH * units.TIME


# -- momentum reductions ----------------------------------------------------

MOMENT_KEYS = ("dipole", "xp0", "xp1", "re0", "re1", "im0", "im1", "im2")


def _block_moments(medium, F, A, dt, window, p_par, p_perp, weights):
    pt, S, d, rabi, b = _batch_series(medium, F, A, dt, window, p_par, p_perp)
    db = d * b
    gam = np.conj(rabi) * b
    w0 = weights[:, None]
    w1 = (weights * p_par)[:, None]
    w2 = (weights * p_par**2)[:, None]
    return np.stack(
        [
            np.sum(w0 * 2 * db.real, axis=0),
            np.sum(w0 * 2 * db.imag, axis=0),
            np.sum(w1 * 2 * db.imag, axis=0),
            np.sum(w0 * gam.real, axis=0),
            np.sum(w1 * gam.real, axis=0),
            np.sum(w0 * gam.imag, axis=0),
            np.sum(w1 * gam.imag, axis=0),
            np.sum(w2 * gam.imag, axis=0),
        ]
    )


def pairwise_sum(parts):
    """Sum a sequence of arrays along a fixed balanced tree (order independent of workers)."""
    parts = list(parts)
    if not parts:
        raise ValueError("nothing to sum")
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass(frozen=True, eq=False)
class MomentumMoments:
    """Momentum-integrated series in atomic units.

    ``dipole`` is x(t) = int d^3p d* b + c.c.; ``xp_k`` the imaginary part of
    int p_par^k x_p with x_p = d* b - c.c.; ``re_k``/``im_k`` the real and
    imaginary parts of int p_par^k Gamma_p. The kernels use a real dipole law,
    so d* = d.
    """

    times: np.ndarray
    potential: np.ndarray
    mass: float
    series: dict

    def __getitem__(self, key):
        return self.series[key]

    @property
    def ionization(self) -> np.ndarray:
        """gamma(t) = int d^3p Gamma_p(t), a.u."""
        return self.series["re0"] + 1j * self.series["im0"]


def momentum_moments(
    medium: MediumModel, pulse: LaserPulse, grid: SfaGrids, threads: int = 1
) -> MomentumMoments:
    """Integrate the single-momentum series over the cylindrical grid.

    Momenta are cut into fixed blocks; per-block sums are combined by
    ``pairwise_sum`` so the result is bit-identical for any thread count.
    """
    F, A = _fields_au(pulse, grid)
    dt = grid.dt / units.TIME
    window = grid.filter_weights()
    par, perp = grid.momentum_points()
    wts = grid.momentum_weights()
    keep = wts != 0
    par, perp, wts = par[keep], perp[keep], wts[keep]
    blocks = [slice(i, i + BLOCK_SIZE) for i in range(0, par.size, BLOCK_SIZE)]

    def run(sl):
        return _block_moments(medium, F, A, dt, window, par[sl], perp[sl], wts[sl])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(sl) for sl in blocks]
    total = pairwise_sum(parts)
    _, m, _ = medium._au()
    return MomentumMoments(
        times=grid.t_au,
        potential=A,
        mass=m,
        series=dict(zip(MOMENT_KEYS, total)),
    )
