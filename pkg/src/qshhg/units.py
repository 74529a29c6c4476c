"""Atomic-unit conversions used at the boundary of the strong-field kernels.

Kernels run in Hartree atomic units (hbar = e = m_e = 1). Everything that
enters or leaves the public API is SI.
"""

from scipy.constants import c, e, epsilon_0, hbar, m_e, eV
from scipy.constants import physical_constants as _pc

TIME = _pc["atomic unit of time"][0]
LENGTH = _pc["atomic unit of length"][0]
ENERGY = _pc["atomic unit of energy"][0]
FIELD = _pc["atomic unit of electric field"][0]
MOMENTUM = _pc["atomic unit of momentum"][0]
MASS = m_e

# d(p) for the atom law d0 p / (p^2/2m + E0)^3 carries kg^1/2 m^9/2 s^-7/2
ATOM_DIPOLE_CONSTANT = MASS**0.5 * LENGTH**4.5 * TIME**-3.5
# momentum-space transition dipole <p|x|0>: m (kg m/s)^-3/2
MOMENTUM_DIPOLE = LENGTH * MOMENTUM**-1.5

__all__ = [
    "c", "e", "epsilon_0", "hbar", "m_e", "eV",
    "TIME", "LENGTH", "ENERGY", "FIELD", "MOMENTUM", "MASS",
    "ATOM_DIPOLE_CONSTANT", "MOMENTUM_DIPOLE",
]
