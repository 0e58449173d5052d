"""Circular pipe geometry.

All wetted quantities are closed forms in the wetted half-angle ``alpha``
(0 for an empty section, pi for a full one), measured from the pipe invert.
With the level ``H`` counted from the pipe axis, ``H = -R cos(alpha)`` and

    wet area       A  = R^2 (alpha - sin(alpha) cos(alpha))
    perimeter      Pm = 2 R alpha
    pressure int.  I1 = H A + 2/3 (R^2 - H^2)^(3/2)
    I2 factor      gamma = R (sin(alpha) - alpha cos(alpha)) / pi

Near an empty section these differences cancel catastrophically, so the
kernels switch to Taylor series below ``_SERIES_CUTOFF``.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError, DomainError

PI = np.pi
_SERIES_CUTOFF = 0.1
_RANGE_TOL = 1e-12


# ---------------------------------------------------------------------------
# scalar kernels (no argument checks; used by the solver hot loop)


@njit(cache=True)
def _fa(a):
    if a < _SERIES_CUTOFF:
        a2 = a * a
        return a * a2 * (2.0 / 3.0 + a2 * (-2.0 / 15.0 + a2 * (4.0 / 315.0 + a2 * (
            -2.0 / 2835.0 + a2 * (4.0 / 155925.0 - a2 * 4.0 / 6081075.0)))))
    return a - np.sin(a) * np.cos(a)


@njit(cache=True)
def _fi(a):
    if a < _SERIES_CUTOFF:
        a2 = a * a
        return a2 * a2 * a * (2.0 / 15.0 + a2 * (-11.0 / 315.0 + a2 * (17.0 / 3780.0 + a2 * (
            -461.0 / 1247400.0 + a2 * (8303.0 / 389188800.0 - a2 * 24911.0 / 27243216000.0)))))
    s = np.sin(a)
    c = np.cos(a)
    return 2.0 / 3.0 * s * s * s - c * (a - s * c)


@njit(cache=True)
def _fg(a):
    if a < _SERIES_CUTOFF:
        a2 = a * a
        return a * a2 * (1.0 / 3.0 + a2 * (-1.0 / 30.0 + a2 * (1.0 / 840.0 + a2 * (
            -1.0 / 45360.0 + a2 * (1.0 / 3991680.0 - a2 / 518918400.0)))))
    return np.sin(a) - a * np.cos(a)


@njit(cache=True)
def _half_angle_small(target):
    # solve _fa(beta) = target for beta in [0, pi/2]; _fa is convex there
    if target <= 0.0:
        return 0.0
    lo = 0.0
    hi = 0.5 * PI
    beta = min((1.5 * target) ** (1.0 / 3.0), hi)
    for _ in range(100):
        f = _fa(beta) - target
        if f > 0.0:
            hi = beta
        elif f < 0.0:
            lo = beta
        else:
            return beta
        d = 2.0 * np.sin(beta) ** 2
        new = beta - f / d if d > 0.0 else 0.5 * (lo + hi)
        if not (lo <= new <= hi):
            new = 0.5 * (lo + hi)
        if abs(new - beta) <= 4e-16 * new:
            return new
        beta = new
    return beta


@njit(cache=True)
def _half_angle(R, A):
    """Wetted half-angle for wet area A, A clamped to [0, pi R^2]."""
    if A >= PI * R * R:
        return PI
    a = A / (R * R)
    if a <= 0.0:
        return 0.0
    if a >= PI:
        return PI
    if a <= 0.5 * PI:
        return _half_angle_small(a)
    return PI - _half_angle_small(PI - a)


@njit(cache=True)
def _half_angle_from_level(R, H):
    r = -H / R
    if r >= 1.0:
        return 0.0
    if r <= -1.0:
        return PI
    return np.arccos(r)


@njit(cache=True)
def _area_k(R, H):
    a = _half_angle_from_level(R, H)
    if a >= PI:
        return PI * R * R
    return R * R * _fa(a)


@njit(cache=True)
def _level_k(R, A):
    return -R * np.cos(_half_angle(R, A))


@njit(cache=True)
def _i1_k(R, A):
    return R * R * R * _fi(_half_angle(R, A))


@njit(cache=True)
def _gamma_k(R, A):
    return R * _fg(_half_angle(R, A)) / PI


@njit(cache=True)
def _perimeter_k(R, A):
    return 2.0 * R * _half_angle(R, A)


@njit(cache=True)
def _section_k(R, A):
    """(level, I1, gamma) for wet area A in one half-angle solve."""
    a = _half_angle(R, A)
    return -R * np.cos(a), R * R * R * _fi(a), R * _fg(a) / PI


# ---------------------------------------------------------------------------
# public, checked API (scalars or arrays)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_radius(R):
    R = np.asarray(R, dtype=float)
    if np.any(~(R > 0.0)):
        raise DomainError("pipe radius must be positive")
    return R


def _check_area(R, A, allow_empty=True):
    R = _check_radius(R)
    A = np.asarray(A, dtype=float)
    full = PI * R * R
    if np.any(A < -_RANGE_TOL * full) or np.any(A > full * (1.0 + _RANGE_TOL)):
        raise DomainError("wet area outside [0, pi R^2]")
    if not allow_empty and np.any(A <= 0.0):
        raise DomainError("quantity undefined for an empty section")
    return R, np.clip(A, 0.0, full)


_v_area = np.vectorize(_area_k, otypes=[float])
_v_level = np.vectorize(_level_k, otypes=[float])
_v_i1 = np.vectorize(_i1_k, otypes=[float])
_v_gamma = np.vectorize(_gamma_k, otypes=[float])
_v_perimeter = np.vectorize(_perimeter_k, otypes=[float])


def width(R, z):
    """Section width ``2 sqrt(R^2 - z^2)`` at height ``z`` above the axis."""
    R = _check_radius(R)
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > R * (1.0 + _RANGE_TOL)):
        raise DomainError("|z| exceeds the pipe radius")
    return _out(2.0 * np.sqrt(np.maximum(R * R - z * z, 0.0)))


def wet_area_from_level(R, H):
    R = _check_radius(R)
    H = np.asarray(H, dtype=float)
    if np.any(np.abs(H) > R * (1.0 + _RANGE_TOL)):
        raise DomainError("level outside [-R, R]")
    return _out(_v_area(R, H))


def level_from_wet_area(R, A):
    """Free-surface level over the axis for wet area ``A`` (inverse of
    :func:`wet_area_from_level`)."""
    R, A = _check_area(R, A)
    return _out(_v_level(R, A))


def I1(R, S_tilde):
    """Hydrostatic pressure integral of the wetted part of the section."""
    R, S_tilde = _check_area(R, S_tilde)
    return _out(_v_i1(R, S_tilde))


def gamma(R, S_tilde):
    """Factor such that the pressure source integral reads ``gamma * S'``
    for a circular pipe whose radius varies along the axis."""
    R, S_tilde = _check_area(R, S_tilde, allow_empty=False)
    return _out(_v_gamma(R, S_tilde))


def wet_perimeter(R, S_tilde):
    R, S_tilde = _check_area(R, S_tilde, allow_empty=False)
    return _out(_v_perimeter(R, S_tilde))


def hydraulic_radius(R, S_tilde):
    R, S_tilde = _check_area(R, S_tilde, allow_empty=False)
    return _out(S_tilde / _v_perimeter(R, S_tilde))


@dataclass(frozen=True)
class WetProperties:
    level: float
    wet_area: float
    I1: float
    wet_perimeter: float
    hydraulic_radius: float


def wet_properties(R, S_tilde):
    R, S_tilde = _check_area(float(R), float(S_tilde))
    R, S_tilde = float(R), float(S_tilde)
    perim = _perimeter_k(R, S_tilde)
    return WetProperties(
        level=_level_k(R, S_tilde),
        wet_area=S_tilde,
        I1=_i1_k(R, S_tilde),
        wet_perimeter=perim,
        hydraulic_radius=S_tilde / perim if perim > 0.0 else 0.0,
    )


# ---------------------------------------------------------------------------
# mesh


@dataclass(frozen=True, eq=False)
class PipeGeometry:
    """Pipe sampled at the cell centres of a uniform mesh.

    ``x_faces`` holds the n_cells + 1 interface positions; every other array
    is cell-centred.
    """

    x: np.ndarray
    x_faces: np.ndarray
    dx: float
    Z: np.ndarray
    R: np.ndarray
    S: np.ndarray
    cos_theta: np.ndarray
    dS_dx: np.ndarray
    dcos_dx: np.ndarray

    @property
    def n_cells(self):
        return self.x.size

    @property
    def length(self):
        return float(self.x_faces[-1] - self.x_faces[0])

    @property
    def invert(self):
        """Altitude of the pipe bottom."""
        return self.Z - self.R

    def cell_index(self, x):
        i = int(np.floor((x - self.x_faces[0]) / self.dx))
        return min(max(i, 0), self.n_cells - 1)


def build_geometry(profile, n_cells):
    """Interpolate an ``(x, Z, R)`` table linearly onto ``n_cells`` cells."""
    profile = np.asarray(profile, dtype=float)
    if profile.ndim != 2 or profile.shape[1] != 3:
        raise ConfigurationError("geometry profile must be a table of (x, Z, R) rows")
    if profile.shape[0] < 2:
        raise ConfigurationError("geometry profile needs at least 2 samples")
    if n_cells < 2:
        raise ConfigurationError("n_cells must be at least 2")
    xs, zs, rs = profile.T
    if np.any(np.diff(xs) <= 0.0):
        raise ConfigurationError("geometry x samples must be strictly increasing")
    if np.any(rs <= 0.0):
        raise ConfigurationError("pipe radius must be positive")

    faces = np.linspace(xs[0], xs[-1], n_cells + 1)
    dx = (xs[-1] - xs[0]) / n_cells
    x = 0.5 * (faces[:-1] + faces[1:])
    Z = np.interp(x, xs, zs)
    R = np.interp(x, xs, rs)
    S = PI * R * R
    slope = np.gradient(Z, dx)
    cos_theta = 1.0 / np.sqrt(1.0 + slope * slope)
    return PipeGeometry(
        x=x,
        x_faces=faces,
        dx=dx,
        Z=Z,
        R=R,
        S=S,
        cos_theta=cos_theta,
        dS_dx=np.gradient(S, dx),
        dcos_dx=np.gradient(cos_theta, dx),
    )
