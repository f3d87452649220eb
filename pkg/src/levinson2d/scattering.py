"""
Phase shifts from the interior log-derivative.

Outside the matching radius r0 the positive-energy solution is

    R = sqrt(r) [cos(eta) J_nu(kr) - sin(eta) Y_nu(kr)],

so matching R'/R at r0 gives tan(eta). The absolute branch is fixed by
switching the potential on along lambda in [0, coupling] with eta = 0 for the
free problem.

Branch tracking works on the interior Prüfer angle theta (see ``radial``),
which is smooth in lambda. The map theta -> eta is monotone and shifts by pi
when theta does, so eta is recovered exactly from the tracked theta even when
the corresponding jump of eta in lambda is far too narrow to resolve (at
small k it shrinks like k^(2 nu)).

For inverse-square tails the reduced shift delta_nu is computed against the
order-nu Bessel functions and reported as eta_m = delta_nu + (m - nu) pi / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from . import radial, specfun
from .errors import ConvergenceError, DomainError, PoleError, UnwrapError
from .potential import PotentialModel, effective_order
from .radial import ExpansionCoefficients, StepControl

CRITICAL_TOL = 1e-6
NEAR_CRITICAL_TOL = 1e-3
SNAP_TOL = 0.05 * math.pi
EULER_GAMMA = 0.5772156649015329

UNWRAP_STEP = math.pi / 4
ETA_RESOLUTION = 1e-7  # smallest lambda interval refined to resolve eta itself
MAX_LAMBDA_POINTS = 4097


# -- matching ----------------------------------------------------------------


def exterior_log_derivative(nu: float, E: float, r0: float) -> float:
    """R'/R at r0+ of the decaying exterior solution sqrt(r) K_nu(kappa r).

    At E = 0 the decaying branch is r^(-nu + 1/2); for nu = 0 the value
    1/(2 r0) is the limit of the K_0 expression.
    """
    if E > 0:
        raise DomainError("exterior log-derivative is defined for E <= 0")
    if r0 <= 0 or nu < 0:
        raise DomainError("need r0 > 0 and nu >= 0")
    if E == 0:
        return (-nu + 0.5) / r0
    x = math.sqrt(-E) * r0
    return (float(specfun.k_log_derivative(nu, x)) + 0.5) / r0


def tan_phase(A: float, k: float, r0: float, nu: float) -> float:
    """tan(eta) from the matching condition; signed infinity at its pole.

    ``A = inf`` (interior solution vanishing at r0) gives J/Y.
    """
    if not k > 0:
        raise DomainError("tan_phase needs k > 0")
    J, zJ, Y, zY = (float(v) for v in specfun.j_y_pair(nu, k * r0))
    if math.isinf(A):
        num, den = J, Y
    else:
        a = A * r0 - 0.5
        num = J * a - zJ
        den = Y * a - zY
    if den == 0.0:
        return math.copysign(math.inf, num if num != 0.0 else 1.0)
    return num / den


def _eta_from_theta(theta, theta_free, nu, z):
    """Reduced phase shift from the lifted interior angle (vectorised)."""
    theta = np.asarray(theta, dtype=float)
    J, zJ, Y, zY = specfun.j_y_pair(nu, z)
    s, c = np.sin(theta), np.cos(theta)
    a = s * zY - Y * c
    b = J * c - zJ * s
    with np.errstate(divide="ignore", invalid="ignore"):
        eta_p = np.where(a == 0.0, 0.5 * np.pi, np.arctan(-b / a))
    theta_y = np.arctan2(Y, zY)
    n = np.floor((theta - theta_y) / np.pi) - np.floor((theta_free - theta_y) / np.pi)
    return eta_p + np.pi * n


def tail_offset(m: int, nu: float) -> float:
    """(m - nu) pi / 2, the shift between eta_m and the reduced delta_nu."""
    return (m - nu) * math.pi / 2.0


# -- lambda continuation -----------------------------------------------------


@dataclass(frozen=True)
class LambdaTrace:
    """The lambda grid used for one momentum, with the angle and phase at each node."""

    k: float
    lambdas: Tuple[float, ...]
    thetas: Tuple[float, ...]
    phases: Tuple[float, ...]

    @property
    def steps(self) -> int:
        return len(self.lambdas) - 1


def _unwrap_mod_pi(values, start):
    """Lift angles known mod pi so that consecutive entries differ by < pi/2."""
    out = np.empty_like(values)
    prev = start
    for i, v in enumerate(values):
        prev = v + np.pi * np.round((prev - v) / np.pi)
        out[i] = prev
    return out


def _continue(p, m, k, lambda_steps, control):
    nu = effective_order(m, p)
    lam_end = p.coupling
    E = k * k
    lams = np.linspace(0.0, lam_end, max(int(lambda_steps), 1) + 1)
    res = radial.shoot(p, nu, np.full(lams.shape, E), lams, control)
    thetas = res.theta
    r_m = res.radius
    z = k * r_m

    def eta_of(th):
        return _eta_from_theta(th, thetas[0], nu, z)

    etas = eta_of(thetas)
    while True:
        d_th = np.abs(np.diff(np.mod(thetas, np.pi)))
        d_th = np.minimum(d_th, np.pi - d_th)
        bad = d_th > UNWRAP_STEP
        wide = np.diff(lams) > ETA_RESOLUTION * max(lam_end, 1e-300)
        bad |= (np.abs(np.diff(etas)) > UNWRAP_STEP) & wide
        if lam_end == 0.0 or not np.any(bad):
            break
        if lams.size + int(bad.sum()) > MAX_LAMBDA_POINTS:
            raise UnwrapError(
                f"lambda refinement exceeded {MAX_LAMBDA_POINTS} points (m={m}, k={k})"
            )
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (lams[idx] + lams[idx + 1])
        new = radial.shoot(p, nu, np.full(mids.shape, E), mids, control)
        lams = np.insert(lams, idx + 1, mids)
        thetas = np.insert(thetas, idx + 1, new.theta)
        etas = np.insert(etas, idx + 1, eta_of(new.theta))

    # branch-by-branch unwrap of theta must reproduce the node-count lift
    unwrapped = _unwrap_mod_pi(np.mod(thetas, np.pi), thetas[0])
    if np.any(np.abs(unwrapped - thetas) > 1e-6):
        raise UnwrapError(f"lambda continuation disagrees with node count (m={m}, k={k})")
    # the free problem has zero reduced phase by definition
    etas = np.where(lams == 0.0, 0.0, etas)
    offset = tail_offset(m, nu)
    return LambdaTrace(
        k=float(k),
        lambdas=tuple(float(v) for v in lams),
        thetas=tuple(float(v) for v in thetas),
        phases=tuple(float(v + offset) for v in etas),
    )


def phase_with_trace(
    p: PotentialModel,
    m: int,
    k: float,
    lambda_steps: int = 16,
    control: Optional[StepControl] = None,
) -> Tuple[float, LambdaTrace]:
    if not k > 0:
        raise DomainError("phase shift needs k > 0")
    trace = _continue(p, m, k, lambda_steps, control)
    return trace.phases[-1], trace


def phase_by_lambda_continuation(
    p: PotentialModel,
    m: int,
    k: float,
    lambda_steps: int = 16,
    control: Optional[StepControl] = None,
) -> float:
    """Absolute phase shift eta_m(k) at the model's coupling, anchored at eta(lambda=0) = 0."""
    return phase_with_trace(p, m, k, lambda_steps, control)[0]


@dataclass(frozen=True)
class PhaseCurve:
    m: int
    nu: float
    momenta: np.ndarray
    phases: np.ndarray
    lambda_trace: Tuple[LambdaTrace, ...] = field(repr=False)

    def to_csv(self) -> str:
        lines = ["k,eta_rad,eta_over_pi,lambda_steps"]
        for k, eta, tr in zip(self.momenta, self.phases, self.lambda_trace):
            lines.append(f"{k:.17g},{eta:.17g},{eta / math.pi:.17g},{tr.steps}")
        return "\n".join(lines) + "\n"


def phase_curve(
    p: PotentialModel,
    m: int,
    momenta: Sequence[float],
    lambda_steps: int = 16,
    control: Optional[StepControl] = None,
) -> PhaseCurve:
    ks = np.asarray(momenta, dtype=float)
    if ks.ndim != 1 or ks.size == 0 or np.any(ks <= 0) or np.any(np.diff(ks) <= 0):
        raise DomainError("momenta must be a non-empty ascending grid of k > 0")
    traces = tuple(_continue(p, m, float(k), lambda_steps, control) for k in ks)
    return PhaseCurve(
        m=m,
        nu=effective_order(m, p),
        momenta=ks,
        phases=np.array([t.phases[-1] for t in traces]),
        lambda_trace=traces,
    )


# -- small-k asymptotics -----------------------------------------------------


def _asym_parts(A0, c2, L, r0, nu, exact_log=False, form="auto"):
    """Numerator y and denominator x of the small-k tan(delta), tan = y / x.

    Both are rescaled by the same positive factor so that neither underflows
    as L = log(k r0) -> -inf, in particular at exact criticality where the
    leading term of the denominator vanishes.
    """
    L = np.asarray(L, dtype=float)
    if form not in ("auto", "real"):
        raise DomainError(f"unknown asymptotic form {form!r}")
    z2 = np.exp(2.0 * L)
    k2 = z2 / (r0 * r0)
    lg = L - math.log(2.0) + EULER_GAMMA if exact_log else L
    pole = not np.isfinite(A0)
    d0 = 0.0 if pole else A0 - (-nu + 0.5) / r0

    def lead(scale):
        # d0 * scale, with 0 * inf read as 0
        with np.errstate(over="ignore", invalid="ignore"):
            return np.where(d0 == 0.0, 0.0, d0 * scale)

    with np.errstate(over="ignore"):
        if nu == 0.0:
            y = np.pi / (2.0 * lg) * (A0 - c2 * k2 - (1.0 - z2) / (2.0 * r0))
            x = d0 - c2 * k2 - 1.0 / (r0 * lg)
            if pole:
                y, x = np.pi / (2.0 * lg), np.ones_like(L)
            return y, x
        if nu == 1.0:
            if form == "real":
                raise DomainError("the real-order small-k form is singular at nu = 1")
            pref = np.full_like(L, -np.pi / 4.0)
            num = A0 - 1.5 / r0
            x = lead(np.exp(-2.0 * L)) - c2 / r0**2 + lg / r0
        elif nu > 1.0:
            log_pref = (
                (2.0 * nu - 2.0) * L - 2.0 * nu * math.log(2.0)
                - math.lgamma(nu + 1.0) - math.lgamma(nu)
            )
            pref = -np.pi * np.exp(log_pref)
            num = A0 - (nu + 0.5) / r0
            xfac = 1.0 / ((nu - 1.0) * (2.0 * nu - 1.0))
            x = lead(np.exp(-2.0 * L)) - c2 / r0**2 + (-nu + 0.5) * xfac / r0
        else:
            g2 = math.gamma(nu) ** 2
            log_s = 2.0 * nu * (L - math.log(2.0))
            pref = np.full_like(L, -np.pi / (nu * g2))
            num = A0 - (nu + 0.5) / r0
            x = (
                lead(np.exp(-log_s))
                - c2 / r0**2 * np.exp(2.0 * L - log_s)
                + 2.0 * np.pi / math.tan(nu * np.pi) / (r0 * g2)
            )
    if pole:
        # A0 infinite: the ratio of the A-dependent factors is 1
        full = pref * np.exp(2.0 * L) if nu >= 1.0 else pref * np.exp(log_s)
        return full, np.ones_like(L)
    return pref * num, x


def _asym_tan_log(A0, c2, L, r0, nu, exact_log=False, form="auto"):
    """tan(delta) at small z = k r0 given L = log(z) (vectorised in L)."""
    y, x = _asym_parts(A0, c2, L, r0, nu, exact_log, form)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = y / x
    return np.where(x == 0.0, np.copysign(np.inf, y), t)


def asymptotic_tan_phase(
    coeffs: ExpansionCoefficients,
    k,
    r0: float,
    nu: float,
    exact_log: bool = False,
    form: str = "auto",
):
    """Small-k closed form of tan(eta) (of tan(delta_nu) for inverse-square tails).

    Uses A(E) = A0 - c2 k^2 and keeps the next-leading terms in the
    denominator. ``exact_log`` replaces log(k r0) by log(k r0 / 2) + gamma,
    which removes the O(1/log^2) error of the S-wave form. ``form="real"``
    forces the real-order expressions, which do not exist at nu = 1.
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr <= 0):
        raise DomainError("asymptotic_tan_phase needs k > 0")
    if nu < 0:
        raise DomainError("nu must be >= 0")
    if form == "real" and nu == 1.0:
        raise DomainError("the real-order small-k form is singular at nu = 1")
    out = _asym_tan_log(coeffs.A0, coeffs.c2, np.log(k_arr * r0), r0, nu, exact_log, form)
    return float(out) if np.ndim(out) == 0 else out


# -- zero-momentum limit -----------------------------------------------------


@dataclass(frozen=True)
class ZeroMomentumLimit:
    m: int
    nu: float
    eta0: float  # snapped when allowed, otherwise equal to raw
    raw: float
    snapped: bool
    residual: float  # distance of the reduced raw value from the nearest multiple of pi
    A0_r: float  # A(0) * r, dimensionless
    critical: bool
    near_critical: bool
    k_min: float
    tail_jump: float  # change of the reduced phase between k_min and 0


def _scan_depth(nu):
    # S-wave and P-wave approaches are logarithmic
    return 1e7 if nu in (0.0, 1.0) else 700.0


def _angle_change(A0, c2, La, Lb, r0, nu, depth=0):
    """Change of the lifted arctan of the small-k form from L = La to L = Lb.

    The interval is assumed to contain at most one sign change of each of
    numerator and denominator; it is bisected when both change.
    """
    (ya, yb), (xa, xb) = _asym_parts(A0, c2, np.array([La, Lb]), r0, nu, exact_log=True)
    ta, tb = math.atan2(ya, xa), math.atan2(yb, xb)
    fa = math.atan(math.tan(ta)) if xa != 0 else math.copysign(math.pi / 2, ya)
    fb = math.atan(math.tan(tb)) if xb != 0 else math.copysign(math.pi / 2, yb)
    x_flip = (xa > 0) != (xb > 0)
    y_flip = (ya > 0) != (yb > 0)
    if x_flip and y_flip and depth < 200:
        Lm = 0.5 * (La + Lb)
        if Lm in (La, Lb):
            return fb - fa
        return _angle_change(A0, c2, La, Lm, r0, nu, depth + 1) + _angle_change(
            A0, c2, Lm, Lb, r0, nu, depth + 1
        )
    if x_flip and not y_flip:
        # through the pole of tan: + -> - moves the angle up by pi
        return fb - fa + (math.pi if ya * xa > 0 else -math.pi)
    return fb - fa


def _continued_angle(A0, c2, L_start, r0, nu):
    """Lifted arctan of the small-k form from log(k r0) = L_start down to k -> 0."""
    depth = _scan_depth(nu)
    a0 = abs(L_start)
    if nu in (0.0, 1.0):
        L = -np.geomspace(a0, depth, 4001)
    else:
        L = -np.linspace(a0, depth, 4001)
    y, x = _asym_parts(A0, c2, L, r0, nu, exact_log=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        ang = np.where(x == 0.0, np.copysign(np.pi / 2, y), np.arctan(y / x))
    total = float(np.sum(np.diff(ang)))
    special = np.nonzero(((x[:-1] > 0) != (x[1:] > 0)))[0]
    for i in special:
        total += _angle_change(A0, c2, L[i], L[i + 1], r0, nu) - (ang[i + 1] - ang[i])
    return float(ang[0]), float(ang[0]) + total


def zero_momentum_limit(
    p: PotentialModel,
    m: int,
    lambda_steps: int = 16,
    control: Optional[StepControl] = None,
    snap_tol: float = SNAP_TOL,
) -> ZeroMomentumLimit:
    """eta_m(k -> 0) with the absolute branch from lambda continuation.

    The phase is computed at k r0 = 1e-1 ... 1e-4 (1e-5 for nu = 0, further
    down if the closed form does not yet agree with it) and then carried to
    k = 0 along the small-k closed form, tracking every pole of tan(eta) it
    passes. This captures jumps that occur at exponentially small k, as for
    weakly bound S-wave states.
    """
    nu = effective_order(m, p)
    r_m = radial.matching_radius(p)
    crit_value = -nu + 0.5
    try:
        coeffs = radial.expansion_at_zero(p, nu, control=control)
        A0, c2 = coeffs.A0, coeffs.c2
    except PoleError:
        A0, c2 = math.inf, 0.0
    dev = abs(A0 * r_m - crit_value) if math.isfinite(A0) else math.inf
    critical = dev <= CRITICAL_TOL
    near = (not critical) and dev <= NEAR_CRITICAL_TOL
    if critical:
        A0 = crit_value / r_m

    offset = tail_offset(m, nu)
    zs = [1e-1, 1e-2, 1e-3, 1e-4] + ([1e-5] if nu == 0.0 else [])
    extra = [1e-6, 1e-7, 1e-8]
    delta = None
    z = zs[0]
    for z in zs + extra:
        k = z / r_m
        delta = phase_by_lambda_continuation(p, m, k, lambda_steps, control) - offset
        if z in zs[:-1]:
            continue
        t_asym = float(_asym_tan_log(A0, c2, math.log(z), r_m, nu, exact_log=True))
        mismatch = (delta - math.atan(t_asym) + math.pi / 2) % math.pi - math.pi / 2
        if abs(mismatch) <= 1e-3:
            break
    start, end = _continued_angle(A0, c2, math.log(z), r_m, nu)
    jump = end - start
    reduced = delta + jump
    n = round(reduced / math.pi)
    residual = abs(reduced - n * math.pi)
    fractional = critical and 0.0 < nu < 1.0
    snapped = (not fractional) and residual <= snap_tol
    eta_reduced = n * math.pi if snapped else reduced
    return ZeroMomentumLimit(
        m=m,
        nu=nu,
        eta0=eta_reduced + offset,
        raw=reduced + offset,
        snapped=snapped,
        residual=residual,
        A0_r=A0 * r_m,
        critical=critical,
        near_critical=near,
        k_min=z / r_m,
        tail_jump=jump,
    )


def zero_momentum_phase(
    p: PotentialModel,
    m: int,
    lambda_steps: int = 16,
    control: Optional[StepControl] = None,
    snap_tol: float = SNAP_TOL,
) -> float:
    """eta_m(0); a multiple of pi (plus (m - nu) pi / 2 for inverse-square tails).

    Raises ConvergenceError when the limit is not within ``snap_tol`` of a
    multiple of pi, except at fractional-order criticality where the raw
    value is returned.
    """
    lim = zero_momentum_limit(p, m, lambda_steps, control, snap_tol)
    if not lim.snapped and not (lim.critical and 0.0 < lim.nu < 1.0):
        raise ConvergenceError(
            f"zero-momentum phase for m={m} is {lim.raw / math.pi:.6f} pi, "
            f"{lim.residual:.3g} rad from a multiple of pi"
            + (" (near-critical channel)" if lim.near_critical else "")
        )
    return lim.eta0
