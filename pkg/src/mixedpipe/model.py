"""Mixed pressurized / free-surface pipe flow model.

State per cell is the equivalent wet area ``A``, the discharge ``Q`` and the
regime flag ``E`` (0 free surface, 1 pressurized). The physical wet area is
``A`` for a free-surface cell and the full section ``S`` otherwise.

Function arguments follow the cell: ``R`` is the local pipe radius and
``cos_theta`` the cosine of the axis inclination.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError
from .geometry import PI, _i1_k, _perimeter_k, _section_k

FREE_SURFACE = 0
PRESSURIZED = 1

# cells with A below DRY_FRACTION * S are dry: zero velocity, zero friction
DRY_FRACTION = 1e-10


@dataclass(frozen=True)
class PhysicalConstants:
    c: float
    Ks: float = 100.0
    g: float = 9.81
    rho0: float = 1000.0

    def __post_init__(self):
        if not (self.g > 0 and self.c > 0 and self.Ks > 0):
            raise DomainError("g, c and Ks must be positive")


@dataclass(frozen=True)
class CellState:
    A: float
    Q: float
    E: int = FREE_SURFACE

    @property
    def u(self):
        return self.Q / self.A if self.A > 0 else 0.0


@dataclass(frozen=True)
class WVector:
    """Dynamic slope ``Z + int K u|u| dx``, full section and cos(theta)."""

    dynamic_slope: float
    section: float
    cos_theta: float

    def as_array(self):
        return np.array([self.dynamic_slope, self.section, self.cos_theta])


# ---------------------------------------------------------------------------
# kernels


@njit(cache=True)
def _celerity_k(A, E, R, cos_theta, g, c):
    if A <= 0.0:
        return 0.0
    S = PI * R * R
    if E == 1:
        return np.sqrt(g * _i1_k(R, S) * cos_theta / A + c * c)
    return np.sqrt(g * _i1_k(R, min(A, S)) * cos_theta / A)


@njit(cache=True)
def _friction_k(A, E, R, Ks):
    S = PI * R * R
    if A <= DRY_FRACTION * S:
        return 0.0
    St = S if E == 1 else min(A, S)
    rh = St / _perimeter_k(R, St)
    return 1.0 / (Ks * Ks * rh ** (4.0 / 3.0))


@njit(cache=True)
def _b_vector_k(A, E, R, cos_theta, g, c):
    S = PI * R * R
    St = S if E == 1 else min(A, S)
    level, i1, gam = _section_k(R, St)
    b2 = -gam * cos_theta / A
    if E == 1:
        b2 -= c * c / g * (A - S) / (A * S)
    zbar = level - i1 / St if St > 0.0 else -R
    return 1.0, b2, zbar


# ---------------------------------------------------------------------------
# public API


def _positive(A):
    if not A > 0.0:
        raise DomainError("equivalent wet area must be positive")


def physical_wet_area(A, E, S):
    return S if E == PRESSURIZED else A


def is_dry(A, S):
    return A <= DRY_FRACTION * S


def pressure(A, E, R, cos_theta, const):
    """Mean pressure term: acoustic part plus hydrostatic integral."""
    S = PI * R * R
    St = physical_wet_area(A, E, S)
    return const.c ** 2 * (A - St) + const.g * _i1_k(R, min(St, S)) * cos_theta


def celerity_b(A, E, R, cos_theta, const):
    """Half-width scale of the Gibbs equilibrium."""
    _positive(A)
    return _celerity_k(A, E, R, cos_theta, const.g, const.c)


def friction_coefficient(A, E, R, const):
    """Manning-Strickler coefficient ``1 / (Ks^2 Rh^(4/3))``; zero on dry cells."""
    return _friction_k(A, E, R, const.Ks)


def B_vector(A, E, R, cos_theta, const):
    """Source coefficients paired with ``(Z + friction primitive, S, cos)``."""
    _positive(A)
    return np.array(_b_vector_k(A, E, R, cos_theta, const.g, const.c))


def kinetic_offset(E, R, const):
    """``c^2 S`` carried by a pressurized Gibbs state on top of the pressure:
    ``A b^2 = p + E c^2 S``."""
    return const.c ** 2 * PI * R * R if E == PRESSURIZED else 0.0


def mean_level(A, E, R):
    """Centroid altitude over the axis of the physical wet area."""
    S = PI * R * R
    St = physical_wet_area(A, E, S)
    _positive(St)
    level, i1, _ = _section_k(R, min(St, S))
    return level - i1 / St


def steady_state_residual(A, E, R, Z, cos_theta, const):
    """Rest-state invariant; spatially constant for still water."""
    _positive(A)
    S = PI * R * R
    St = physical_wet_area(A, E, S)
    level = _section_k(R, min(St, S))[0]
    return const.c ** 2 * np.log(A / St) + const.g * level * cos_theta + const.g * Z


def entropy(A, Q, E, R, Z, cos_theta, const):
    _positive(A)
    S = PI * R * R
    St = physical_wet_area(A, E, S)
    return (Q * Q / (2.0 * A) + const.c ** 2 * A * np.log(A / St) + const.c ** 2 * S
            + const.g * A * mean_level(A, E, R) * cos_theta + const.g * A * Z)


def piezometric_head(A, E, R, Z, const):
    """Invert altitude plus pressure head.

    Free surface: water depth above the invert. Pressurized: the pipe
    height ``2R`` plus the acoustic overpressure ``c^2 (A - S) / (g S)``.
    """
    S = PI * R * R
    invert = Z - R
    if E == PRESSURIZED:
        return invert + 2.0 * R + const.c ** 2 * (A - S) / (const.g * S)
    return invert + R + _section_k(R, min(max(A, 0.0), S))[0]


def physical_flux(A, Q, E, R, cos_theta, const):
    """Conservative flux ``(Q, Q^2/A + p)``."""
    _positive(A)
    return np.array([Q, Q * Q / A + pressure(A, E, R, cos_theta, const)])


def characteristic_speeds(A, Q, E, R, cos_theta, const):
    """Diagnostic speeds ``u -/+ b``."""
    b = celerity_b(A, E, R, cos_theta, const)
    u = Q / A
    return u - b, u + b
