"""Independent reference evaluations used by the tests.

Everything here integrates the defining formulas numerically (scipy quad)
and never calls the closed forms of the package.
"""

import numpy as np
from scipy.integrate import quad

G = 9.81


def _q(f, a, b, **kw):
    return quad(f, a, b, epsabs=0.0, epsrel=1e-13, limit=200, **kw)[0]


def area(R, H):
    """Integral of the width 2 sqrt(R^2 - z^2) from the invert to H."""
    if H <= -R:
        return 0.0
    if H >= R:
        return _q(lambda z: 2.0, -R, R, weight="alg", wvar=(0.5, 0.5))
    return _q(lambda z: 2.0 * np.sqrt(R - z), -R, H, weight="alg", wvar=(0.5, 0.0))


def i1(R, H):
    """Integral of (H - z) times the width from the invert to H."""
    if H <= -R:
        return 0.0
    if H >= R:
        return _q(lambda z: 2.0 * (R - z), -R, R, weight="alg", wvar=(0.5, 0.5))
    return _q(lambda z: 2.0 * (H - z) * np.sqrt(R - z), -R, H, weight="alg", wvar=(0.5, 0.0))


def gamma(R, H):
    """Integral of (H - z) d(width)/dR over the wetted part, divided by 2 pi R;
    d(width)/dR = 2R / sqrt(R^2 - z^2) is singular at both rims."""
    if H >= R:
        val = _q(lambda z: 2.0 * R * (R - z), -R, R, weight="alg", wvar=(-0.5, -0.5))
    else:
        val = _q(lambda z: 2.0 * R * (H - z) / np.sqrt(R - z), -R, H,
                 weight="alg", wvar=(-0.5, 0.0))
    return val / (2.0 * np.pi * R)


def perimeter(R, H):
    """Arc length below H: twice the integral of R / sqrt(R^2 - z^2)."""
    if H >= R:
        return 2.0 * _q(lambda z: R, -R, R, weight="alg", wvar=(-0.5, -0.5))
    return 2.0 * _q(lambda z: R / np.sqrt(R - z), -R, H, weight="alg", wvar=(-0.5, 0.0))


def perimeter_polygon(R, H, n=200000):
    """Polygonal approximation of the wetted arc."""
    # refine near the invert where the arc is flat in z
    z = -R + (H + R) * (1.0 - np.cos(np.linspace(0.0, np.pi / 2, n)))
    y = np.sqrt(np.maximum(R * R - z * z, 0.0))
    return 2.0 * float(np.sum(np.hypot(np.diff(z), np.diff(y))))


def level_for_area(R, A):
    """Level H with area(R, H) = A, by bisection on the oracle area."""
    lo, hi = -R, R
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if area(R, mid) < A:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * R:
            break
    return 0.5 * (lo + hi)


def entropy(A, Q, E, R, Z, cos_theta, c, g=G):
    """Entropy density evaluated from oracle geometry."""
    S = np.pi * R * R
    St = S if E == 1 else A
    H = R if E == 1 else level_for_area(R, A)
    zbar = H - i1(R, H) / St
    return (Q * Q / (2 * A) + c * c * A * np.log(A / St) + c * c * S
            + g * A * zbar * cos_theta + g * A * Z)


def moment(A, u, b, k):
    """k-th velocity moment of the uniform Gibbs density by quadrature."""
    h = A / (2.0 * np.sqrt(3.0) * b)
    return _q(lambda x: h * x ** k, u - np.sqrt(3.0) * b, u + np.sqrt(3.0) * b)
