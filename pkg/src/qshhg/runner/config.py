"""Flat ``key = value`` scenario files with unit-suffixed keys.

Lists are comma separated, ``#`` starts a comment. Every key is optional;
defaults describe the ZnO working point.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

# state kind -> number of ':'-separated integers it takes
WIGNER_KINDS = {"vacuum": 0, "fock": 1, "proj-q": 1, "photon-added": 1, "proj-q-avg": 2, "proj-q-even": 2}
OUTPUTS = ("spectra", "joint-distribution", "marginal", "proj-q", "proj-N", "wigner", "fringe", "scaling")


class ConfigValidationError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


def _list(kind):
    return {"kind": "list", "item": kind}


@dataclass(frozen=True)
class ScenarioConfig:
    # medium
    medium: str = "solid"
    gap_eV: float = 3.4
    effective_mass_me: float = 0.25
    binding_energy_eV: float = 13.6
    dipole_d0_si: float = 7e25
    density_per_m3: float = 4e28
    # driving pulse
    wavelength_um: float = 3.2
    peak_field_V_per_m: float = 1.3e9
    tau_cycles: float = 6.0
    cep_rad: float = 0.0
    envelope: str = "gaussian"
    # squeezed vacuum
    bsv_energy_nJ: float = 10.0
    bsv_wavelength_um: float = 1.6
    bsv_bandwidth_nm: float = 50.0
    bsv_beam_radius_um: float = 100.0
    perturbation_harmonic: float = 2.0
    theta_rad: float = 0.0
    theta_samples: int = 16
    theta_values_rad: tuple = field(default=(), metadata=_list(float))
    # phase matching
    harmonic_beam_radius_um: float = 40.0
    interaction_length_nm: float = 5.0
    # numerical grids
    samples_per_cycle: int = 256
    n_par: int = 201
    n_perp: int = 41
    harmonic_max: int = 20
    samples_per_order: int = 32
    exact_sigma: bool = False
    # what to compute
    outputs: tuple = field(default=("spectra",), metadata=_list(str))
    squeeze_r_values: tuple = field(default=(), metadata=_list(float))
    zeta_source: str = "config"
    zeta_sq_values: tuple = field(default=(6.7e-10,), metadata=_list(float))
    sideband_orders: tuple = field(default=(8,), metadata=_list(int))
    joint_m_max: int = 40
    joint_n_max: int = 200
    marginal_m_max: int = 200
    l_values: tuple = field(default=(0, 1, 2, 3, 10, 11, 100, 101), metadata=_list(int))
    m_values: tuple = field(default=(0, 1, 2, 5, 10), metadata=_list(int))
    numeric_max_photons: int = 100000
    wigner_states: tuple = field(default=("vacuum",), metadata=_list(str))
    wigner_extent: float = 3.0
    wigner_points: int = 121
    wigner_squeezed_frame: bool = False
    fringe_l: int = 200
    fringe_alpha: float = 6.7
    fringe_delta_l: tuple = field(default=(0, 1, 2, 4, 10, 20, 50, 100), metadata=_list(int))
    scaling_reference_wavelength_um: float = 3.2
    scaling_reference_mass_me: float = 0.25
    # overrides
    allow_expensive: bool = False
    requires_expensive: bool = False

    def __post_init__(self):
        validate(self)

    @property
    def omega0(self) -> float:
        return 2 * math.pi * 299792458.0 / (self.wavelength_um * 1e-6)


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}


def _positive(cfg, *names):
    for n in names:
        if not getattr(cfg, n) > 0:
            raise ConfigValidationError(n, f"must be positive, got {getattr(cfg, n)}")


def validate(cfg: ScenarioConfig) -> None:
    if cfg.medium not in ("solid", "atom"):
        raise ConfigValidationError("medium", f"expected solid or atom, got {cfg.medium!r}")
    if cfg.envelope not in ("gaussian", "flat"):
        raise ConfigValidationError("envelope", f"expected gaussian or flat, got {cfg.envelope!r}")
    if cfg.zeta_source not in ("config", "spectra"):
        raise ConfigValidationError("zeta_source", f"expected config or spectra, got {cfg.zeta_source!r}")
    _positive(cfg, "gap_eV", "effective_mass_me", "binding_energy_eV", "dipole_d0_si", "density_per_m3",
              "wavelength_um", "tau_cycles", "bsv_wavelength_um", "bsv_bandwidth_nm", "bsv_beam_radius_um",
              "perturbation_harmonic", "harmonic_beam_radius_um", "interaction_length_nm", "samples_per_cycle",
              "n_par", "n_perp", "harmonic_max", "samples_per_order", "wigner_extent", "wigner_points",
              "fringe_alpha", "scaling_reference_wavelength_um", "scaling_reference_mass_me", "theta_samples",
              "numeric_max_photons")
    for n in ("peak_field_V_per_m", "bsv_energy_nJ", "joint_m_max", "joint_n_max", "marginal_m_max", "fringe_l"):
        if getattr(cfg, n) < 0:
            raise ConfigValidationError(n, "must be nonnegative")
    if cfg.theta_samples < 2:
        raise ConfigValidationError("theta_samples", "need at least 2 samples")
    for o in cfg.outputs:
        if o not in OUTPUTS:
            raise ConfigValidationError("outputs", f"unknown output {o!r}; valid: {', '.join(OUTPUTS)}")
    for n in ("squeeze_r_values", "zeta_sq_values"):
        if any(v < 0 for v in getattr(cfg, n)):
            raise ConfigValidationError(n, "entries must be nonnegative")
    for n in ("l_values", "m_values", "fringe_delta_l", "sideband_orders"):
        if any(v < 0 for v in getattr(cfg, n)):
            raise ConfigValidationError(n, "entries must be nonnegative")
    if cfg.zeta_source == "spectra" and "spectra" not in cfg.outputs:
        raise ConfigValidationError("zeta_source", "spectra as zeta source requires the spectra output")
    for s in cfg.wigner_states:
        kind, _, num = s.partition(":")
        parts = num.split(":") if num else []
        if kind not in WIGNER_KINDS:
            raise ConfigValidationError("wigner_states", f"unknown state {s!r}; valid kinds: {', '.join(WIGNER_KINDS)}")
        want = WIGNER_KINDS[kind]
        if len(parts) != want or not all(x.isdigit() for x in parts):
            raise ConfigValidationError("wigner_states", f"state {s!r} needs {want} photon-number field(s)")


def _convert(name, raw: str):
    f = _FIELDS[name]
    kind = f.metadata.get("item") if f.metadata.get("kind") == "list" else f.type
    if f.metadata.get("kind") == "list":
        items = [x.strip() for x in raw.split(",") if x.strip()]
        return tuple(_scalar(name, kind, x) for x in items)
    return _scalar(name, kind, raw)


def _scalar(name, kind, raw):
    kind = {"float": float, "int": int, "str": str, "bool": bool}.get(kind, kind)
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigValidationError(name, f"cannot read {raw!r} as {kind.__name__}") from None


def parse_config(text: str) -> ScenarioConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigValidationError(key or f"line {lineno}", "expected key = value")
        if key not in _FIELDS:
            raise ConfigValidationError(key, "unknown key")
        if key in values:
            raise ConfigValidationError(key, "given twice")
        values[key] = _convert(key, raw.strip())
    return ScenarioConfig(**values)


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def _format(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_format(x) for x in v)
    return str(v)


def serialize_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{f.name} = {_format(getattr(cfg, f.name))}\n" for f in fields(cfg))


def config_hash(cfg: ScenarioConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode()).hexdigest()


def with_overrides(cfg: ScenarioConfig, **changes) -> ScenarioConfig:
    return replace(cfg, **changes)
