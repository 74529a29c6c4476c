"""Reduced two-mode sideband/BSV state, its projections and Wigner functions.

Fock amplitudes are built in the log domain (log-gamma factorials, explicit
phases) so photon numbers far beyond 170 stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

MAX_R_EXACT = 12.0
TAIL_TOLERANCE = 1e-12
_CHUNK = 1 << 14


class RefusedStage(RuntimeError):
    """A computation was refused because its cost explodes; pass an override to force it."""


def _log_cosh(r):
    return r + math.log1p(math.exp(-2 * r)) - math.log(2)


@dataclass(frozen=True)
class SidebandCoupling:
    """zeta_N, squeeze amplitude r and squeeze phase theta; everything else is derived."""

    zeta: complex
    r: float
    theta: float = 0.0

    @property
    def zeta_sq(self) -> float:
        return abs(self.zeta) ** 2

    @property
    def beta(self) -> complex:
        return 0.5 * math.tanh(self.r) * complex(math.cos(self.theta), -math.sin(self.theta))

    @property
    def beta_n(self) -> complex:
        return self.beta / (1 + self.zeta_sq)

    @property
    def norm(self) -> float:
        return 1 / math.sqrt(1 + self.zeta_sq)

    @property
    def mean_photons(self) -> float:
        """<n>_N = cosh^2 r |zeta_N|^2."""
        return math.exp(2 * _log_cosh(self.r)) * self.zeta_sq

    @property
    def one_minus_two_beta(self) -> float:
        """1 - 2|beta_N| evaluated without cancellation."""
        one_minus_tanh = 2 / (math.exp(2 * self.r) + 1) if self.r < 350 else 0.0
        return (self.zeta_sq + one_minus_tanh) / (1 + self.zeta_sq)


def sideband_coupling(zeta: complex, r: float, theta: float = 0.0) -> SidebandCoupling:
    if not r >= 0:
        raise ValueError("squeeze amplitude must be nonnegative")
    return SidebandCoupling(complex(zeta), float(r), float(theta))


def _log_abs(z):
    z = complex(z)
    return math.log(abs(z)) if z != 0 else -math.inf


def _log_joint(c: SidebandCoupling, m, n):
    """log|amplitude| and phase for arrays of (m, n); -inf where forbidden."""
    m = np.asarray(m, dtype=np.int64)
    n = np.asarray(n, dtype=np.int64)
    m, n = np.broadcast_arrays(m, n)
    allowed = (n >= m) & ((n - m) % 2 == 0) & (m >= 0)
    j = np.where(allowed, (n - m) // 2, 0)
    lz, lb = _log_abs(c.zeta), _log_abs(c.beta_n)
    with np.errstate(invalid="ignore"):
        mz = np.where(m > 0, m * lz, 0.0)
        jb = np.where(j > 0, j * lb, 0.0)
    logmag = (
        math.log(c.norm) - 0.5 * _log_cosh(c.r) + mz + jb
        + 0.5 * gammaln(n + 1) - 0.5 * gammaln(m + 1) - gammaln(j + 1)
    )
    phase = m * np.angle(c.zeta) + j * (math.pi + np.angle(c.beta_n))
    logmag = np.where(allowed, logmag, -np.inf)
    return logmag, phase


def joint_amplitude(coupling: SidebandCoupling, m, n):
    """<m, n|psi> for m sideband and n BSV photons (scalar or broadcast arrays)."""
    logmag, phase = _log_joint(coupling, m, n)
    out = np.exp(logmag + 1j * phase)
    return complex(out) if out.ndim == 0 else out


def joint_distribution(coupling: SidebandCoupling, m_max: int, n_max: int) -> np.ndarray:
    """P(m, n) for m <= m_max, n <= n_max, indexed [m, n]."""
    m, n = np.meshgrid(np.arange(m_max + 1), np.arange(n_max + 1), indexing="ij")
    logmag, _ = _log_joint(coupling, m, n)
    return np.exp(2 * logmag)


def _guard(coupling, allow_expensive, what):
    if coupling.r > MAX_R_EXACT and not allow_expensive:
        raise RefusedStage(
            f"{what} at r = {coupling.r:g} > {MAX_R_EXACT:g} needs an enormous number of terms; "
            "use the analytic path or pass allow_expensive=True (--allow-expensive)"
        )


def _geometric_sum(log_term, log_ratio, start=0):
    """log of sum_j exp(log_term(j)) for j >= start, stopped by a geometric tail bound.

    ``log_ratio(j)`` is log(t_{j+1}/t_j) and must be nonincreasing in j once
    below zero. Returns (log_sum, last_j, log_tail_bound).
    """
    total = -math.inf
    j0 = start
    while True:
        j = np.arange(j0, j0 + _CHUNK)
        lt = log_term(j)
        total = np.logaddexp(total, logsumexp(lt))
        jl = j[-1]
        lr = float(log_ratio(jl))
        if lr < 0:
            tail = lt[-1] + lr - math.log(-math.expm1(lr))
            if tail < total + math.log(TAIL_TOLERANCE):
                return float(total), int(jl), float(tail)
        j0 += _CHUNK
        if j0 > 10**10:
            raise RuntimeError("series failed to converge")


def marginal_probability(coupling: SidebandCoupling, m, method: str = "exact", *, allow_expensive: bool = False):
    """P(m) of the sideband mode, summed exactly over the BSV mode or from the closed form."""
    if method == "analytic":
        m_arr = np.asarray(m, dtype=float)
        n = coupling.mean_photons
        t2 = math.tanh(coupling.r) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            lz = math.log(2 * n * t2) if n * t2 > 0 else -math.inf
            logp = (
                gammaln(2 * m_arr + 1) - 2 * gammaln(m_arr + 1) - m_arr * math.log(4)
                + np.where(m_arr > 0, m_arr * lz, 0.0) - (m_arr + 0.5) * math.log1p(2 * n)
            )
        out = np.exp(logp)
        return float(out) if out.ndim == 0 else out
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    _guard(coupling, allow_expensive, "exact marginal")
    ms = np.atleast_1d(np.asarray(m, dtype=np.int64))
    out = np.array([_marginal_exact(coupling, int(mm)) for mm in ms])
    return float(out[0]) if np.ndim(m) == 0 else out


def _marginal_exact(c: SidebandCoupling, m: int) -> float:
    lb2 = 2 * _log_abs(c.beta_n)
    if c.zeta_sq == 0 and m > 0:
        return 0.0
    lz2 = 2 * _log_abs(c.zeta) if m > 0 else 0.0
    pref = 2 * math.log(c.norm) - _log_cosh(c.r) + m * lz2 - gammaln(m + 1)
    if lb2 == -math.inf:
        return math.exp(pref + gammaln(m + 1))

    def term(j):
        return j * lb2 + gammaln(m + 2 * j + 1) - 2 * gammaln(j + 1)

    def ratio(j):
        return lb2 + math.log((m + 2 * j + 2) * (m + 2 * j + 1)) - 2 * math.log(j + 1)

    total, _, _ = _geometric_sum(term, ratio)
    return math.exp(pref + total)


@dataclass(frozen=True, eq=False)
class SingleModeState:
    """Fock amplitudes c_0..c_K held as log-magnitudes and phases.

    ``tail`` bounds the probability discarded by truncation.
    """

    log_magnitude: np.ndarray
    phase: np.ndarray
    tail: float = 0.0

    def __post_init__(self):
        lm = np.array(self.log_magnitude, dtype=float)
        ph = np.array(self.phase, dtype=float)
        if lm.shape != ph.shape or lm.ndim != 1:
            raise ValueError("log-magnitudes and phases must be matching 1-d arrays")
        finite = lm[np.isfinite(lm)]
        if finite.size == 0:
            raise ValueError("state has no population")
        lm = lm - 0.5 * logsumexp(2 * finite)
        lm.setflags(write=False)
        ph.setflags(write=False)
        object.__setattr__(self, "log_magnitude", lm)
        object.__setattr__(self, "phase", ph)

    @classmethod
    def from_amplitudes(cls, amplitudes, tail: float = 0.0) -> "SingleModeState":
        a = np.asarray(amplitudes, dtype=complex)
        with np.errstate(divide="ignore"):
            return cls(np.log(np.abs(a)), np.angle(a), tail)

    @classmethod
    def fock(cls, n: int) -> "SingleModeState":
        lm = np.full(n + 1, -np.inf)
        lm[n] = 0.0
        return cls(lm, np.zeros(n + 1))

    @property
    def dim(self) -> int:
        return self.log_magnitude.size

    @property
    def amplitudes(self) -> np.ndarray:
        return np.exp(self.log_magnitude + 1j * self.phase)

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(2 * self.log_magnitude)

    def parities(self) -> set:
        return {int(n % 2) for n in np.flatnonzero(np.isfinite(self.log_magnitude))}


def _state_on(indices, logmag, phase, tail=0.0) -> SingleModeState:
    size = int(np.max(indices)) + 1
    lm = np.full(size, -np.inf)
    ph = np.zeros(size)
    lm[indices] = logmag
    ph[indices] = phase
    return SingleModeState(lm, ph, tail)


def _trim(logc, rel=-80.0):
    """Index past which |c|^2 falls below e^rel of the peak, plus the dropped mass."""
    peak = np.max(logc)
    keep = np.flatnonzero(2 * (logc - peak) > rel)
    last = keep[-1] + 1
    dropped = logc[last:]
    if dropped.size:
        tail = float(np.exp(logsumexp(2 * dropped) - logsumexp(2 * logc)))
    else:
        tail = 0.0
    return last, tail


def project_on_q(coupling: SidebandCoupling, l: int, method: str = "exact") -> SingleModeState:
    """Sideband state after detecting l photons in the BSV mode.

    exact: the finite sum over m = 0 .. l_eta/2 read off the joint amplitude;
    analytic: the cat-state limit with alpha_N = l_eta zeta^2/(2 beta_N).
    Only Fock parities l mod 2 are populated.
    """
    if l < 0:
        raise ValueError("photon number must be nonnegative")
    eta = l % 2
    half = (l - eta) // 2
    if coupling.zeta == 0:
        if eta:
            raise ValueError("an odd BSV count has zero probability when zeta = 0")
        return SingleModeState.fock(0)
    if coupling.beta_n == 0:
        return SingleModeState.fock(l)
    if method == "exact":
        k = np.arange(half + 1)
        fock = 2 * k + eta
        logc = 0.5 * gammaln(l + 1) - 0.5 * gammaln(fock + 1) - gammaln(half - k + 1)
        logc = logc + fock * _log_abs(coupling.zeta) + (half - k) * _log_abs(coupling.beta_n)
        phase = fock * np.angle(coupling.zeta) + (half - k) * (math.pi + np.angle(coupling.beta_n))
        last, tail = _trim(logc)
        return _state_on(fock[:last], logc[:last], phase[:last], tail)
    if method != "analytic":
        raise ValueError(f"unknown method {method!r}")
    if half == 0 and eta == 1:
        return SingleModeState.fock(1)
    alpha = projq_alpha(coupling, l)
    a = abs(alpha)
    kmax = int(a / 2 + 12 * math.sqrt(a / 2 + 1) + 40)
    k = np.arange(kmax + 1)
    fock = 2 * k + eta
    with np.errstate(divide="ignore"):
        la = math.log(a) if a > 0 else -math.inf
    logc = np.where(fock > 0, 0.5 * fock * la, 0.0) - 0.5 * gammaln(fock + 1)
    phase = k * math.pi + 0.5 * fock * np.angle(alpha)
    last, tail = _trim(logc)
    return _state_on(fock[:last], logc[:last], phase[:last], tail)


def projq_alpha(coupling: SidebandCoupling, l: int) -> complex:
    """alpha_N = l_eta zeta^2 / (2 beta_N), the cat amplitude squared."""
    if coupling.beta_n == 0:
        raise ValueError("alpha_N needs r > 0")
    l_eta = l - l % 2
    return l_eta * coupling.zeta**2 / (2 * coupling.beta_n)


def project_on_N(coupling: SidebandCoupling, m: int, *, allow_expensive: bool = False) -> SingleModeState:
    """BSV state after detecting m sideband photons: an m-photon-added squeezed vacuum."""
    if m < 0:
        raise ValueError("photon number must be nonnegative")
    _guard(coupling, allow_expensive, "photon-added state materialization")
    lb = _log_abs(coupling.beta_n)
    if lb == -math.inf:
        return SingleModeState.fock(m)

    def term(j):
        return 2 * (0.5 * gammaln(2 * j + m + 1) - gammaln(j + 1) + j * lb)

    def ratio(j):
        return 2 * lb + math.log((2 * j + m + 2) * (2 * j + m + 1)) - 2 * math.log(j + 1)

    total, last, tail = _geometric_sum(term, ratio)
    j = np.arange(last + 1)
    logc = 0.5 * gammaln(2 * j + m + 1) - gammaln(j + 1) + j * lb
    phase = j * (math.pi + np.angle(coupling.beta_n))
    keep, dropped = _trim(logc, rel=math.log(TAIL_TOLERANCE))
    return _state_on(2 * j[:keep] + m, logc[:keep], phase[:keep], dropped + float(math.exp(tail - total)))


@dataclass(frozen=True, eq=False)
class SqueezedFockState:
    """S(xi) |core> with S(xi) = exp((xi* a^2 - xi a^dag^2)/2), xi = r e^{i phi}.

    Keeps large squeezing out of the Fock basis: the Wigner function is the
    core's, evaluated at linearly transformed phase-space points.
    """

    core: SingleModeState
    r: float
    phi: float


def photon_added_state(coupling: SidebandCoupling, m: int) -> SqueezedFockState:
    """Exact project_on_N(m) for any r, written as a squeezed finite Fock state.

    a^dag^m exp(-beta_N a^dag^2)|0> = S(xi) (a^dag - e^{-i phi} tanh(r_e) a)^m |0>
    up to normalization, with tanh r_e = 2|beta_N| and phi = arg beta_N.
    """
    if m < 0:
        raise ValueError("photon number must be nonnegative")
    gap = coupling.one_minus_two_beta
    r_eff = 0.5 * math.log((2 - gap) / gap)
    phi = float(np.angle(coupling.beta_n)) if coupling.beta_n != 0 else 0.0
    t = math.tanh(r_eff) * complex(math.cos(phi), -math.sin(phi))
    vec = np.zeros(m + 1, dtype=complex)
    vec[0] = 1.0
    for _ in range(m):
        new = np.zeros_like(vec)
        k = np.arange(m)
        new[1:] += np.sqrt(k + 1) * vec[:-1]
        new[:-1] -= t * np.sqrt(k + 1) * vec[1:]
        vec = new / np.linalg.norm(new)
    return SqueezedFockState(SingleModeState.from_amplitudes(vec), r_eff, phi)


@dataclass(frozen=True, eq=False)
class WignerField:
    x: np.ndarray
    p: np.ndarray
    W: np.ndarray  # indexed [p, x]

    @property
    def normalization(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.W, self.x, axis=1), self.p))

    @property
    def coarse(self) -> bool:
        """True when the grid fails to integrate W to 1 within 1%."""
        return abs(self.normalization - 1) > 0.01


def _wigner_density(rho, gamma):
    """(2/pi) Tr[rho D(g) Parity D(g)^dag] through the Laguerre recursion in the Fock index."""
    M = rho.shape[0]
    A = gamma
    w = [np.exp(-2 * np.abs(A) ** 2) / math.pi]
    W = np.real(rho[0, 0]) * np.real(w[0])
    for n in range(1, M):
        w.append(2 * A * w[n - 1] / math.sqrt(n))
        W = W + 2 * np.real(rho[0, n] * w[n])
    for m in range(1, M):
        temp = w[m]
        w[m] = (2 * np.conj(A) * temp - math.sqrt(m) * w[m - 1]) / math.sqrt(m)
        W = W + np.real(rho[m, m] * w[m])
        for n in range(m + 1, M):
            temp2 = (2 * A * w[n - 1] - math.sqrt(m) * temp) / math.sqrt(n)
            temp = w[n]
            w[n] = temp2
            W = W + 2 * np.real(rho[m, n] * w[n])
    return 2 * W


def density_matrix(state: SingleModeState) -> np.ndarray:
    c = state.amplitudes
    return np.outer(c, np.conj(c))


LAGUERRE_MAX_DIM = 40


def _hermite_functions(amplitudes, u):
    """sum_n c_n h_n(u) with orthonormal Hermite functions, by their stable three-term recursion."""
    h_prev = np.zeros_like(u)
    h = np.pi**-0.25 * np.exp(-0.5 * u**2)
    out = amplitudes[0] * h
    for n in range(1, amplitudes.size):
        h_prev, h = h, math.sqrt(2 / n) * u * h - math.sqrt((n - 1) / n) * h_prev
        if amplitudes[n] != 0:
            out = out + amplitudes[n] * h
    return out


def _wigner_pure_grid(amplitudes, x, p):
    """(2/pi) int dy psi*(x+y) psi(x-y) e^{4ipy} for the quadrature x = (a + a^dag)/2."""
    K = amplitudes.size
    reach = math.sqrt(K + 0.5) + 3.0
    dy = min(0.02, math.pi / (8 * (np.max(np.abs(p)) + 2 * math.sqrt(K + 1) + 1)))
    y = np.arange(-reach, reach + dy / 2, dy)
    wy = np.full(y.size, dy)
    wy[[0, -1]] *= 0.5
    phase = np.exp(4j * np.outer(y, p))
    W = np.empty((p.size, x.size))
    scale = 2**0.25
    for i, xi in enumerate(x):
        plus = scale * _hermite_functions(amplitudes, math.sqrt(2) * (xi + y))
        minus = scale * _hermite_functions(amplitudes, math.sqrt(2) * (xi - y))
        W[:, i] = (2 / math.pi) * np.real((np.conj(plus) * minus * wy) @ phase)
    return W


def wigner_from_density(rho, x, p) -> WignerField:
    """Wigner function of a density matrix; mixtures are split into eigenvectors."""
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    rho = np.asarray(rho)
    if rho.shape[0] <= LAGUERRE_MAX_DIM:
        X, P = np.meshgrid(x, p)
        return WignerField(x=x, p=p, W=_wigner_density(rho, X + 1j * P))
    vals, vecs = np.linalg.eigh(rho)
    W = np.zeros((p.size, x.size))
    for lam, v in zip(vals, vecs.T):
        if lam > 1e-14:
            W += lam * _wigner_pure_grid(v, x, p)
    return WignerField(x=x, p=p, W=W)


def wigner(state, x, p) -> WignerField:
    """W(x, p) with gamma = x + i p; vacuum is a Gaussian of variance 1/4, W(0,0) = 2/pi.

    Small Fock supports use the Laguerre recursion, larger ones a
    position-space overlap integral that stays stable for thousands of photons.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if isinstance(state, SqueezedFockState):
        if state.core.dim > LAGUERRE_MAX_DIM:
            raise ValueError(f"squeezed core with more than {LAGUERRE_MAX_DIM - 1} photons is not supported")
        X, P = np.meshgrid(x, p)
        g = X + 1j * P
        src = math.cosh(state.r) * g + complex(math.cos(state.phi), math.sin(state.phi)) * math.sinh(state.r) * np.conj(g)
        W = _wigner_density(density_matrix(state.core), src)
        return WignerField(x=x, p=p, W=W)
    if state.dim <= LAGUERRE_MAX_DIM:
        return wigner_from_density(density_matrix(state), x, p)
    return WignerField(x=x, p=p, W=_wigner_pure_grid(state.amplitudes, x, p))


def mixed_wigner(weights, states, x, p) -> WignerField:
    """Wigner function of sum_i w_i |psi_i><psi_i| (weights renormalized)."""
    weights = np.asarray(weights, dtype=float)
    if weights.size != len(states) or weights.size == 0 or np.any(weights < 0):
        raise ValueError("need one nonnegative weight per state")
    weights = weights / weights.sum()
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    W = sum(w * wigner(s, x, p).W for w, s in zip(weights, states) if w > 0)
    return WignerField(x=x, p=p, W=W)


def default_wigner_grid(extent: float = 5.0, points: int = 201):
    axis = np.linspace(-extent, extent, points)
    return axis, axis.copy()
