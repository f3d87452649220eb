"""
Interior radial solution and its logarithmic derivative at the matching radius.

Radial equation (units 2*mu/hbar^2 = 1):

    R'' + [E - lam*V(r) - (m^2 - 1/4)/r^2] R = 0.

The solution regular at the origin is shot outwards from r_start = 1e-6*r0
with R ~ r^(nu+1/2). For an inverse-square tail b/r^2 the b term is folded
into the channel order nu = sqrt(m^2 + b), so the integrator always sees

    R'' + [E - lam*U(r) - (nu^2 - 1/4)/r^2] R = 0,   U = V - (b/r^2 if n == 2),

and U vanishes outside r0. For tails with n > 2 the matching radius is pushed
out until |b| r^(2-n) <= TAIL_EPS, so the neglected remainder is negligible
against the centrifugal term.

Solutions are tracked through the lifted Prüfer angle theta of the vector
(w, r dw/dr) with w = R/sqrt(r): theta = pi*(nodes) + angle in (0, pi). It is
continuous in E and lambda, increases through every node and is what the
step-halving error control and Richardson extrapolation act on.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels
from .errors import ConvergenceError, DomainError, PoleError
from .potential import PotentialModel

R_START_FRACTION = 1e-6
POLE_THRESHOLD = 1e-12
TAIL_EPS = 1e-4
MAX_MATCH_FACTOR = 1e4
_NUDGE = 1e-9


@dataclass(frozen=True)
class StepControl:
    """Integrator controls.

    phase_step
        Largest phase advance per RK4 step (in the log-radius variable) on the
        coarsest grid.
    tol
        Accepted Richardson error estimate on the Prüfer angle (radians).
    max_steps
        Step budget for the finest grid; exceeding it raises ConvergenceError.
    """

    phase_step: float = 0.02
    tol: float = 1e-10
    max_steps: int = 4_000_000

    def __post_init__(self):
        if not self.phase_step > 0 or not self.tol > 0 or not self.max_steps > 0:
            raise DomainError("step control values must be positive")

    @classmethod
    def from_env(cls, base: Optional["StepControl"] = None) -> "StepControl":
        """Apply LEVINSON2D_PHASE_STEP / LEVINSON2D_TOL / LEVINSON2D_MAX_STEPS overrides."""
        base = base or cls()
        overrides = {}
        for key, name, conv in (
            ("phase_step", "LEVINSON2D_PHASE_STEP", float),
            ("tol", "LEVINSON2D_TOL", float),
            ("max_steps", "LEVINSON2D_MAX_STEPS", int),
        ):
            if os.environ.get(name):
                overrides[key] = conv(os.environ[name])
        return replace(base, **overrides)


DEFAULT_CONTROL = StepControl()


@dataclass(frozen=True)
class LogDerivativeSample:
    channel_order: float
    energy: float
    coupling: float
    A: float
    nodes: int
    at_pole: bool
    radius: float
    theta: float


@dataclass(frozen=True)
class ExpansionCoefficients:
    A0: float
    c2: float
    radius: float


class ShootResult(NamedTuple):
    theta: np.ndarray  # lifted Prüfer angle at the matching radius
    c2: np.ndarray  # int_0^r R^2 dr / R(r)^2
    pole_ratio: np.ndarray  # |R(r)| / max|R|
    radius: float

    @property
    def nodes(self):
        return np.floor(self.theta / np.pi).astype(np.int64)

    @property
    def A(self):
        phi = self.theta - np.pi * np.floor(self.theta / np.pi)
        with np.errstate(divide="ignore"):
            return (np.cos(phi) / np.sin(phi) + 0.5) / self.radius

    @property
    def at_pole(self):
        return self.pole_ratio < POLE_THRESHOLD


# -- geometry of the problem -------------------------------------------------


def matching_radius(p: PotentialModel) -> float:
    """Radius beyond which the potential is treated as absent (or as exactly b/r^2)."""
    tail = p.tail
    if tail is None or tail[1] == 2.0:
        return p.r0
    b, n = tail
    r_eps = (abs(b) / TAIL_EPS) ** (1.0 / (n - 2.0))
    return float(min(max(p.r0, r_eps), MAX_MATCH_FACTOR * p.r0))


def residual_tail_strength(p: PotentialModel) -> float:
    """|b| r^(2-n) at the matching radius; 0 for cutoff and inverse-square models."""
    tail = p.tail
    if tail is None or tail[1] == 2.0:
        return 0.0
    b, n = tail
    return abs(b) * matching_radius(p) ** (2.0 - n)


def _r2u(p: PotentialModel, r):
    """r^2 U(r) at unit coupling; U excludes an inverse-square tail."""
    r = np.asarray(r, dtype=float)
    tail = p.tail
    if tail is not None and tail[1] == 2.0:
        return np.where(r < p.r0, r * r * p.core.values(r) - tail[0], 0.0)
    return r * r * p.values(r)


def _origin_r2u(p: PotentialModel) -> float:
    tail = p.tail
    if tail is not None and tail[1] == 2.0:
        return -tail[0]
    return 0.0


class _Grid(NamedTuple):
    h: np.ndarray
    Pa: np.ndarray
    Pm: np.ndarray
    Pb: np.ndarray
    Qa: np.ndarray
    Qm: np.ndarray
    Qb: np.ndarray
    radius: float
    r_start: float


def _breakpoints(p: PotentialModel, r_end: float):
    r0 = p.r0
    r_start = R_START_FRACTION * r0
    pts = {r_start, r_end, r0}
    pts.update(r0 * 10.0 ** (-j) for j in range(1, 6))
    j = 1
    while r0 * 10.0**j < r_end:
        pts.add(r0 * 10.0**j)
        j += 1
    pts.update(b for b in p.breakpoints())
    return np.array(sorted(r for r in pts if r_start <= r <= r_end))


def _segment_counts(p, nu, e_abs, lam_abs, control, r_end):
    edges = _breakpoints(p, r_end)
    counts = []
    for ra, rb in zip(edges[:-1], edges[1:]):
        rs = np.exp(np.linspace(math.log(ra), math.log(rb), 17))
        rs[0] *= 1 + _NUDGE
        rs[-1] *= 1 - _NUDGE
        pmax = float(np.max(np.abs(_r2u(p, rs))))
        omega = math.sqrt(nu * nu + lam_abs * pmax + e_abs * rb * rb)
        n = math.ceil(math.log(rb / ra) * max(omega, 1.0) / control.phase_step)
        counts.append(max(n, 2))
    return edges, np.array(counts, dtype=np.int64)


def _grid(p, edges, counts, level) -> _Grid:
    xs = []
    for ra, rb, n in zip(edges[:-1], edges[1:], counts):
        x = np.linspace(math.log(ra), math.log(rb), int(n) * 2**level + 1)
        xs.append(np.column_stack([x[:-1], x[1:]]))
    seg = np.concatenate(xs)
    xa, xb = seg[:, 0], seg[:, 1]
    h = xb - xa
    xm = 0.5 * (xa + xb)
    xa_n = xa + _NUDGE * h
    xb_n = xb - _NUDGE * h
    return _Grid(
        h=np.ascontiguousarray(h),
        Pa=np.ascontiguousarray(_r2u(p, np.exp(xa_n))),
        Pm=np.ascontiguousarray(_r2u(p, np.exp(xm))),
        Pb=np.ascontiguousarray(_r2u(p, np.exp(xb_n))),
        Qa=np.exp(2 * xa),
        Qm=np.exp(2 * xm),
        Qb=np.exp(2 * xb),
        radius=float(edges[-1]),
        r_start=float(edges[0]),
    )


def _lifted_angle(w, v, nodes):
    return np.pi * nodes + np.mod(np.arctan2(w, v), np.pi)


def shoot(
    p: PotentialModel,
    nu: float,
    energies,
    lams,
    control: Optional[StepControl] = None,
) -> ShootResult:
    """Integrate the regular solution for a batch of (E, lambda) pairs.

    Halves the step until the Richardson error estimate of the lifted angle is
    below ``control.tol`` for every member of the batch.
    """
    control = control or DEFAULT_CONTROL
    if nu < 0:
        raise DomainError("channel order must be >= 0")
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    lam = np.broadcast_to(np.asarray(lams, dtype=float), E.shape).copy()
    r_end = matching_radius(p)
    s0 = _origin_r2u(p)
    nu0 = np.sqrt(np.maximum(nu * nu + lam * s0, 0.0))
    w0 = np.ones_like(E)
    v0 = nu0.copy()

    edges, counts = _segment_counts(
        p, nu, float(np.max(np.abs(E))), float(np.max(np.abs(lam))), control, r_end
    )
    base = int(counts.sum())

    def run(level):
        if base * 2**level > control.max_steps:
            raise ConvergenceError(
                f"step budget {control.max_steps} exhausted before reaching tol={control.tol} "
                f"(nu={nu}, E in [{E.min()}, {E.max()}])"
            )
        g = _grid(p, edges, counts, level)
        w, v, nodes, pole, norm = _kernels.integrate(
            g.h, g.Pa, g.Pm, g.Pb, g.Qa, g.Qm, g.Qb, nu * nu, E, lam, w0, v0
        )
        return _lifted_angle(w, v, nodes), norm, pole

    level = 0
    th_c, c2_c, _ = run(level)
    while True:
        level += 1
        th_f, c2_f, pole_f = run(level)
        err = np.abs(th_f - th_c) / 15.0
        if np.all(err <= control.tol):
            break
        th_c, c2_c = th_f, c2_f
    theta = th_f + (th_f - th_c) / 15.0
    with np.errstate(invalid="ignore"):
        c2 = np.where(np.isfinite(c2_f) & np.isfinite(c2_c), c2_f + (c2_f - c2_c) / 15.0, c2_f)
    return ShootResult(theta=theta, c2=c2, pole_ratio=pole_f, radius=r_end)


def integrate_interior(
    p: PotentialModel,
    nu: float,
    E: float,
    lam: Optional[float] = None,
    control: Optional[StepControl] = None,
) -> LogDerivativeSample:
    """Log-derivative R'/R at the matching radius (r0 for cutoff models)."""
    lam = p.coupling if lam is None else lam
    res = shoot(p, nu, [E], [lam], control)
    return LogDerivativeSample(
        channel_order=float(nu),
        energy=float(E),
        coupling=float(lam),
        A=float(res.A[0]),
        nodes=int(res.nodes[0]),
        at_pole=bool(res.at_pole[0]),
        radius=res.radius,
        theta=float(res.theta[0]),
    )


def expansion_at_zero(
    p: PotentialModel,
    nu: float,
    lam: Optional[float] = None,
    control: Optional[StepControl] = None,
) -> ExpansionCoefficients:
    """A(E) = A0 - c2 * E + ... about E = 0, with c2 = int R^2 dr / R(r0)^2 > 0."""
    lam = p.coupling if lam is None else lam
    res = shoot(p, nu, [0.0], [lam], control)
    if res.at_pole[0]:
        raise PoleError(f"A(0) is at a pole for nu={nu}, lambda={lam}")
    return ExpansionCoefficients(A0=float(res.A[0]), c2=float(res.c2[0]), radius=res.radius)


def exterior_zero_energy_node(t: float, nu: float) -> float:
    """log(r_node / r) for the zero-energy exterior solution, or inf if none.

    ``t`` is r w'/w at the matching radius; the exterior continuation is
    alpha r^nu + beta r^-nu (alpha + beta log r for nu = 0) in w = R/sqrt(r).
    """
    if nu == 0.0:
        return -1.0 / t if t < 0 else math.inf
    if t < -nu:
        return math.log((t - nu) / (t + nu)) / (2.0 * nu)
    return math.inf


def zero_energy_nodes(
    p: PotentialModel,
    nu: float,
    lam: Optional[float] = None,
    r_max: float = math.inf,
    control: Optional[StepControl] = None,
) -> int:
    """Nodes on (0, r_max) of the E = 0 regular solution, exterior continued analytically."""
    lam = p.coupling if lam is None else lam
    res = shoot(p, nu, [0.0], [lam], control)
    r_m = res.radius
    if r_max < p.r0:
        raise DomainError("r_max must be >= r0")
    nodes = int(res.nodes[0])
    if r_max <= r_m:
        return nodes
    phi = res.theta[0] - np.pi * nodes
    t = math.cos(phi) / math.sin(phi) if math.sin(phi) != 0.0 else math.inf
    log_ratio = exterior_zero_energy_node(t, nu)
    if log_ratio < math.log(r_max / r_m):
        nodes += 1
    return nodes


def radial_solution(
    p: PotentialModel,
    nu: float,
    E: float,
    lam: Optional[float] = None,
    control: Optional[StepControl] = None,
):
    """(r, R) on the coarsest integration grid, unnormalised; for diagnostics."""
    control = control or DEFAULT_CONTROL
    lam = p.coupling if lam is None else lam
    r_end = matching_radius(p)
    edges, counts = _segment_counts(p, nu, abs(E), abs(lam), control, r_end)
    g = _grid(p, edges, counts, 0)
    nu0 = math.sqrt(max(nu * nu + lam * _origin_r2u(p), 0.0))
    x = np.concatenate([[math.log(g.r_start)], math.log(g.r_start) + np.cumsum(g.h)])
    w = np.empty(x.size)
    w[0] = 1.0
    log_scale = 0.0
    scales = np.zeros(x.size)
    wc, vc = 1.0, nu0
    for i in range(g.h.size):
        out = _kernels.integrate_numpy(
            g.h[i : i + 1], g.Pa[i : i + 1], g.Pm[i : i + 1], g.Pb[i : i + 1],
            g.Qa[i : i + 1], g.Qm[i : i + 1], g.Qb[i : i + 1],
            nu * nu, np.array([E]), np.array([lam]), np.array([wc]), np.array([vc]),
        )
        wc, vc = float(out[0][0]), float(out[1][0])
        big = max(abs(wc), abs(vc))
        if big > 1e100:
            wc, vc = wc / big, vc / big
            log_scale += math.log(big)
        w[i + 1] = wc
        scales[i + 1] = log_scale
    r = np.exp(x)
    # undo rescaling relative to the final scale
    R = np.sqrt(r) * w * np.exp(scales - log_scale)
    return r, R
