"""
Real-order cylinder functions J, Y, I, K with first derivatives, and Gamma.

The scalar entry points (:func:`bessel_j` and friends) validate their domain
and return a :class:`CylinderEval`. The vectorised helpers at the bottom are
what the solvers use on hot-ish paths; they skip validation and work with
exponentially scaled functions so that ratios survive large arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError


@dataclass(frozen=True)
class CylinderEval:
    order: float
    argument: float
    value: float
    derivative: float


def _check(nu, x):
    if not (np.isfinite(nu) and nu >= 0.0):
        raise DomainError(f"order must be finite and >= 0, got {nu!r}")
    if not (np.isfinite(x) and x > 0.0):
        raise DomainError(f"argument must be finite and > 0, got {x!r}")


def bessel_j(nu: float, x: float) -> CylinderEval:
    """Bessel function of the first kind J_nu(x) and J'_nu(x)."""
    _check(nu, x)
    return CylinderEval(nu, x, float(special.jv(nu, x)), float(special.jvp(nu, x)))


def bessel_y(nu: float, x: float) -> CylinderEval:
    """Bessel function of the second kind (Neumann function) Y_nu(x) and Y'_nu(x)."""
    _check(nu, x)
    return CylinderEval(nu, x, float(special.yv(nu, x)), float(special.yvp(nu, x)))


def bessel_i(nu: float, x: float) -> CylinderEval:
    """Modified Bessel function I_nu(x) and I'_nu(x)."""
    _check(nu, x)
    return CylinderEval(nu, x, float(special.iv(nu, x)), float(special.ivp(nu, x)))


def bessel_k(nu: float, x: float) -> CylinderEval:
    """Modified Bessel function K_nu(x) and K'_nu(x).

    K_nu(x) is proportional to H^(1)_nu(ix), so it stands in for the decaying
    exterior solution at negative energy.
    """
    _check(nu, x)
    return CylinderEval(nu, x, float(special.kv(nu, x)), float(special.kvp(nu, x)))


def gamma(z: float) -> float:
    if not (np.isfinite(z) and z > 0.0):
        raise DomainError(f"gamma is only provided for z > 0, got {z!r}")
    return math.gamma(z)


# -- vectorised helpers ------------------------------------------------------


def j_y_pair(nu, z):
    """Return (J, z J', Y, z Y') at order ``nu`` for arrays ``z > 0``."""
    z = np.asarray(z, dtype=float)
    J = special.jv(nu, z)
    Y = special.yv(nu, z)
    return J, z * special.jvp(nu, z), Y, z * special.yvp(nu, z)


def k_log_derivative(nu, x):
    """x K'_nu(x) / K_nu(x), stable for large x (uses scaled K)."""
    x = np.asarray(x, dtype=float)
    # K'_nu = -K_{nu-1} - (nu/x) K_nu, and K_{-a} = K_a.
    return -nu - x * special.kve(abs(nu - 1.0), x) / special.kve(nu, x)


def i_log_derivative(nu, x):
    """x I'_nu(x) / I_nu(x), stable for large x (uses scaled I)."""
    x = np.asarray(x, dtype=float)
    # I'_nu = I_{nu+1} + (nu/x) I_nu
    return nu + x * special.ive(nu + 1.0, x) / special.ive(nu, x)


def j_log_derivative(nu, x):
    """x J'_nu(x) / J_nu(x)."""
    x = np.asarray(x, dtype=float)
    return x * special.jvp(nu, x) / special.jv(nu, x)
