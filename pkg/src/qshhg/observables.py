"""Photon statistics, analytic projection statistics and fringe washout of cat states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .fockspace import (
    SidebandCoupling,
    SingleModeState,
    joint_amplitude,
    mixed_wigner,
    project_on_q,
    projq_alpha,
    sideband_coupling,
)
from .sfa import ConfigurationError

NORM_TOLERANCE = 1e-6
FRINGE_HALF_WIDTH = 1.5  # three vacuum quadrature widths


class G2State(Enum):
    FINITE = "finite"
    UNDEFINED = "undefined"  # no photons
    INFINITE = "infinite"


@dataclass(frozen=True)
class StatisticsReport:
    mean_photons: float
    g2: float
    dx1_sq: float
    dx2_sq: float
    source: str
    g2_state: G2State = G2State.FINITE

    @property
    def uncertainty_product(self) -> float:
        return self.dx1_sq * self.dx2_sq

    def to_dict(self) -> dict:
        g2 = self.g2 if self.g2_state is G2State.FINITE else self.g2_state.value
        return {"mean_photons": self.mean_photons, "g2": g2, "dx1_sq": self.dx1_sq,
                "dx2_sq": self.dx2_sq, "source": self.source}


def _g2(mean, second_factorial):
    if mean == 0:
        return math.nan, G2State.UNDEFINED
    return second_factorial / mean**2, G2State.FINITE


def photon_statistics(state: SingleModeState) -> StatisticsReport:
    """<n>, g2 = <a^dag^2 a^2>/<n>^2 and quadrature variances of X1 = (a + a^dag)/2, X2 = (a - a^dag)/2i."""
    c = state.amplitudes
    norm = float(np.sum(np.abs(c) ** 2))
    if abs(norm - 1) > NORM_TOLERANCE:
        raise ValueError(f"state is not normalized (norm {norm})")
    n = np.arange(c.size)
    prob = np.abs(c) ** 2
    mean = float(np.sum(n * prob))
    fact2 = float(np.sum(n * (n - 1) * prob))
    a1 = np.sum(np.conj(c[:-1]) * np.sqrt(n[1:]) * c[1:]) if c.size > 1 else 0j
    a2 = np.sum(np.conj(c[:-2]) * np.sqrt(n[1:-1] * n[2:]) * c[2:]) if c.size > 2 else 0j
    dx1 = 0.25 * (1 + 2 * mean + 2 * a2.real) - a1.real**2
    dx2 = 0.25 * (1 + 2 * mean - 2 * a2.real) - a1.imag**2
    g2, st = _g2(mean, fact2)
    return StatisticsReport(mean, g2, float(dx1), float(dx2), "numeric", st)


def sideband_statistics(coupling: SidebandCoupling, m_max: int = 60, n_max: int = 4000) -> StatisticsReport:
    """Unconditional sideband statistics from the two-mode state traced over the BSV mode.

    Built on an explicit (m, n) box, so it is meant for moderate r; raises
    ConfigurationError when the box cuts off more than 1e-10 of the weight.
    """
    m = np.arange(m_max + 1)[:, None]
    n = np.arange(n_max + 1)[None, :]
    psi = joint_amplitude(coupling, m, n)
    P = np.abs(psi) ** 2
    total = P.sum()
    edge = P[-2:, :].sum() + P[:, -2:].sum()
    if edge > 1e-10 * total:
        raise ConfigurationError(f"photon-number box too small (edge weight {edge / total:.1e})")
    pm = P.sum(axis=1) / total
    k = m[:, 0]
    mean = float(np.sum(k * pm))
    fact2 = float(np.sum(k * (k - 1) * pm))
    # <a> vanishes by parity; <a^2> pairs m with m - 2 at the same n
    a2 = np.sum(np.conj(psi[:-2]) * psi[2:] * np.sqrt(k[2:] * (k[2:] - 1))[:, None]) / total
    g2, st = _g2(mean, fact2)
    dx1 = 0.25 * (1 + 2 * mean + 2 * a2.real)
    dx2 = 0.25 * (1 + 2 * mean - 2 * a2.real)
    return StatisticsReport(mean, g2, float(dx1), float(dx2), "numeric", st)


def projq_statistics_analytic(coupling: SidebandCoupling, l: int) -> StatisticsReport:
    """Cat-state forms for the sideband after detecting l BSV photons."""
    if l < 0:
        raise ValueError("photon number must be nonnegative")
    even = l % 2 == 0
    alpha = projq_alpha(coupling, l) if l > 1 else 0j
    a = abs(alpha)
    if a == 0:
        if even:
            return StatisticsReport(0.0, math.inf, 0.25, 0.25, "analytic-projq", G2State.INFINITE)
        return StatisticsReport(1.0, 0.0, 0.75, 0.75, "analytic-projq")
    t = math.tanh(a)
    if even:
        g2, mean, spread = 1 / t**2, a * t, a * t
    else:
        g2, mean, spread = t**2, a / t, a / t
    dx1 = 0.25 * (1 + 2 * (spread - alpha.real))
    dx2 = 0.25 * (1 + 2 * (spread + alpha.real))
    return StatisticsReport(mean, g2, dx1, dx2, "analytic-projq")


def projN_statistics_analytic(coupling: SidebandCoupling, m: int, simplified: bool = False) -> StatisticsReport:
    """Large-r forms for the m-photon-added squeezed vacuum left in the BSV mode.

    ``simplified`` uses the theta = 0 closed form instead of the general one.
    """
    if m < 0:
        raise ValueError("photon number must be nonnegative")
    r, z2 = coupling.r, coupling.zeta_sq
    ch, sh = math.cosh(r), math.sinh(r)
    n = ch**2 * z2
    g2 = 1 + 2 / (2 * m + 1)
    mean = (2 * m + 1) * sh**2 / (1 + 2 * n)
    if simplified:
        if abs(math.sin(coupling.theta)) > 1e-12 or math.cos(coupling.theta) < 0:
            raise ValueError("the simplified form holds only at theta = 0")
        extra = z2 / 4 * (1 + 1 / (2 * (2 * m - 1)))
        dx = [(2 * m + 1) / 4 * (ch + s * sh) ** 2 / (1 + 2 * n) + extra for s in (-1, 1)]
    else:
        cos = math.cos(coupling.theta)
        lead = m * (m - 1) / (2 * (2 * m - 1))
        # 1 - (1 + z2)/tanh r nearly cancels at theta = 0; split off 1 - cos exactly
        coth_m1 = 2 / math.expm1(2 * r) if r > 0 else math.inf
        dx = []
        for s in (-1, 1):
            bracket = (1 + s * cos) + s * cos * (z2 + (1 + z2) * coth_m1) if lead else 0.0
            # cosh^2 + sinh^2 + 2 s cosh sinh cos(theta) without cancellation
            half = coupling.theta / 2
            A = math.exp(2 * s * r) * math.cos(half) ** 2 + math.exp(-2 * s * r) * math.sin(half) ** 2
            dx.append(lead * bracket + (2 * m + 1) / 4 * (A + z2 * (1 + n)) / (1 + 2 * n))
    return StatisticsReport(mean, g2, dx[0], dx[1], "analytic-projN")


def coupling_for_alpha(alpha: float, l: int, r: float, theta: float = 0.0) -> SidebandCoupling:
    """Real zeta giving |alpha_N| = alpha after detecting l photons, at squeezing r."""
    if l < 2:
        raise ValueError("alpha_N vanishes for l < 2")
    b = 0.5 * math.tanh(r)
    # alpha = l_eta z2 (1 + z2) / (2 b)
    k = 2 * alpha * b / (l - l % 2)
    z2 = 2 * k / (1 + math.sqrt(1 + 4 * k))
    return sideband_coupling(math.sqrt(z2), r, theta)


@dataclass(frozen=True, eq=False)
class FringeResult:
    x: np.ndarray
    p: np.ndarray
    W: np.ndarray
    modulation: float
    reference: float
    members: tuple

    @property
    def ratio(self) -> float:
        return self.modulation / self.reference


def _fringe_mask(x, p, alpha, half_width):
    if np.min(x) > -half_width or np.max(x) < half_width or np.min(p) > -half_width or np.max(p) < half_width:
        raise ConfigurationError("fringe window exceeds the Wigner grid")
    # lobes sit at +-i sqrt(alpha); measure along and across that axis
    u = 1j * np.exp(0.5j * np.angle(alpha)) if alpha != 0 else 1j
    X, P = np.meshgrid(x, p)
    rot = (X + 1j * P) * np.conj(u)
    return (np.abs(rot.real) <= half_width + 1e-12) & (np.abs(rot.imag) <= half_width + 1e-12)


def resolution_averaged_wigner(
    coupling: SidebandCoupling, l: int, delta_l: int, parity: str = "all", x=None, p=None,
    half_width: float = FRINGE_HALF_WIDTH,
) -> FringeResult:
    """Equal-weight mixture of project_on_q(l') for l' in l..l+delta_l and its fringe modulation.

    Modulation is max - min of W inside a square of half-width ``half_width``
    about the origin, aligned with the cat's lobe axis; ``reference`` is the
    same quantity for l alone.
    """
    if l < 0 or delta_l < 0:
        raise ValueError("l and delta_l must be nonnegative")
    if parity not in ("all", "even-only"):
        raise ValueError(f"unknown parity selection {parity!r}")
    x = np.linspace(-3, 3, 121) if x is None else np.asarray(x, dtype=float)
    p = np.linspace(-3, 3, 121) if p is None else np.asarray(p, dtype=float)
    members = [k for k in range(l, l + delta_l + 1) if parity == "all" or k % 2 == l % 2]
    mask = _fringe_mask(x, p, projq_alpha(coupling, l), half_width)
    states = [project_on_q(coupling, k) for k in members]
    field = mixed_wigner(np.ones(len(states)), states, x, p)
    ref = mixed_wigner([1.0], states[:1], x, p)
    mod = float(np.ptp(field.W[mask]))
    return FringeResult(x, p, field.W, mod, float(np.ptp(ref.W[mask])), tuple(members))


def fringe_curve(
    coupling: SidebandCoupling, l: int, delta_ls, parity: str = "all", x=None, p=None,
    half_width: float = FRINGE_HALF_WIDTH,
) -> np.ndarray:
    """Modulation ratios M(delta_l)/M(0) for several resolutions, sharing per-l' Wigner fields."""
    if parity not in ("all", "even-only"):
        raise ValueError(f"unknown parity selection {parity!r}")
    delta_ls = [int(d) for d in delta_ls]
    if l < 0 or any(d < 0 for d in delta_ls):
        raise ValueError("l and delta_l must be nonnegative")
    x = np.linspace(-3, 3, 121) if x is None else np.asarray(x, dtype=float)
    p = np.linspace(-3, 3, 121) if p is None else np.asarray(p, dtype=float)
    mask = _fringe_mask(x, p, projq_alpha(coupling, l), half_width)
    members = [k for k in range(l, l + max(delta_ls, default=0) + 1) if parity == "all" or k % 2 == l % 2]
    fields = {k: mixed_wigner([1.0], [project_on_q(coupling, k)], x, p).W for k in members}
    ref = float(np.ptp(fields[l][mask]))
    out = []
    for d in delta_ls:
        chosen = [k for k in members if k <= l + d]
        W = sum(fields[k] for k in chosen) / len(chosen)
        out.append(float(np.ptp(W[mask])) / ref)
    return np.array(out)
