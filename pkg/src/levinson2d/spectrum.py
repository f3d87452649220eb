"""
Bound states, threshold classification and the Levinson verdict for one channel.

Bound states are the roots of

    F(E) = A_interior(E) - A_exterior(E),   E < 0,

where A_exterior is the log-derivative of sqrt(r) K_nu(kappa r). The interior
side decreases with E and the exterior side increases, so F is strictly
decreasing between the poles of A_interior. Poles are read off from the
interior node count, which makes the bracketing exhaustive.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import radial, scattering, specfun
from .errors import ConvergenceError
from .potential import PotentialModel, effective_order, regime
from .radial import StepControl
from .scattering import CRITICAL_TOL, NEAR_CRITICAL_TOL, SNAP_TOL

__all__ = [
    "BoundSpectrum",
    "LevinsonReport",
    "THRESHOLD_CLASSES",
    "classify_threshold",
    "count_via_nodes",
    "effective_order",
    "find_bound_states",
    "threshold_index",
    "levinson_verdict",
]

THRESHOLD_CLASSES = (
    "none",
    "half_bound_s",
    "half_bound_p",
    "half_bound_fractional",
    "zero_energy_bound",
)

POINTS_PER_DECADE = 12
DECADES = 16
ROOT_RTOL = 1e-12
TINY_ENERGY = 1e-300


@dataclass(frozen=True)
class BoundSpectrum:
    """Negative-energy levels of one channel.

    ``count`` includes brackets that certainly hold one level but whose energy
    is too close to zero to represent (``unresolved``), and a zero-energy
    level at criticality when nu > 1 (listed in ``levels`` as 0.0).
    """

    m: int
    nu: float
    levels: Tuple[float, ...]
    level_nodes: Tuple[int, ...]
    unresolved: Tuple[Tuple[float, float], ...]
    threshold_class: str
    A0_r: float

    @property
    def count(self) -> int:
        return len(self.levels) + len(self.unresolved)


# -- threshold ---------------------------------------------------------------


def _threshold_class(nu: float) -> str:
    if nu == 0.0:
        return "half_bound_s"
    if nu == 1.0:
        return "half_bound_p"
    if nu < 1.0:
        return "half_bound_fractional"
    return "zero_energy_bound"


def _zero_energy_state(p, nu, control):
    res = radial.shoot(p, nu, [0.0], [p.coupling], control)
    r_m = res.radius
    if res.at_pole[0]:
        return res, math.inf, False
    A0_r = float(res.A[0]) * r_m
    critical = abs(A0_r - (-nu + 0.5)) <= CRITICAL_TOL
    return res, A0_r, critical


def classify_threshold(p: PotentialModel, m: int, control: Optional[StepControl] = None) -> str:
    """Threshold class at E = 0: ``none`` unless A(0) r0 = -nu + 1/2 within CRITICAL_TOL."""
    nu = effective_order(m, p)
    _, _, critical = _zero_energy_state(p, nu, control)
    return _threshold_class(nu) if critical else "none"


# -- bound states ------------------------------------------------------------


def _energy_floor(p: PotentialModel, r_m: float) -> float:
    vmax = abs(p.coupling) * p.max_abs(r_m)
    return 1.5 * max(vmax, 1.0 / p.r0**2)


class _Mismatch:
    """F(E) evaluations with interior node counts; F is shifted to vanish at E = 0 when critical."""

    def __init__(self, p, nu, control, shift):
        self.p, self.nu, self.control, self.shift = p, nu, control, shift
        self.r_m = radial.matching_radius(p)

    def __call__(self, energies):
        E = np.asarray(energies, dtype=float)
        res = radial.shoot(self.p, self.nu, E, np.full(E.shape, self.p.coupling), self.control)
        kappa_r = np.sqrt(-E) * self.r_m
        ext = (specfun.k_log_derivative(self.nu, kappa_r) + 0.5) / self.r_m
        return res.A - ext - self.shift, res.nodes

    def one(self, E):
        F, nodes = self([E])
        return float(F[0]), int(nodes[0])


def _midpoint(a, b):
    # geometric between energies of very different magnitude (both negative)
    if b < 0 and a / b > 4.0:
        return -math.sqrt(a * b)
    return 0.5 * (a + b)


def _bisect(F, a, b, Fa, Fb):
    """Root of a decreasing F on [a, b] (a < b < 0) with Fa > 0 > Fb."""
    for _ in range(4000):
        if b - a <= ROOT_RTOL * abs(b):
            break
        c = _midpoint(a, b)
        if c <= a or c >= b:
            break
        Fc, _ = F.one(c)
        if Fc > 0:
            a = c
        elif Fc < 0:
            b = c
        else:
            return c
    return 0.5 * (a + b)


def _roots_in(F, a, b, Fa, Fb, na, nb):
    """(E, nodes) of every root of F in [a, b]; the interior node count goes na -> nb."""
    poles = nb - na
    if poles == 0:
        if Fa > 0 > Fb:
            return [(_bisect(F, a, b, Fa, Fb), na)]
        return []
    expected = (poles - 1) + (Fa > 0) + (Fb < 0)
    if expected == 0:
        return []
    c = _midpoint(a, b)
    if c <= a or c >= b or b - a <= 1e-14 * abs(b):
        # root and pole closer than the energy resolution; the signs still fix the count
        if poles == 1:
            return [(c, na)] * int(Fa > 0) + [(c, nb)] * int(Fb < 0)
        raise ConvergenceError(f"could not separate bound-state roots near E={a:.6g}")
    Fc, nc = F.one(c)
    return _roots_in(F, a, c, Fa, Fc, na, nc) + _roots_in(F, c, b, Fc, Fb, nc, nb)


def find_bound_states(
    p: PotentialModel, m: int, control: Optional[StepControl] = None
) -> BoundSpectrum:
    """Scan F(E) on a geometric grid from -E_floor towards 0 and bisect each bracket."""
    nu = effective_order(m, p)
    r_m = radial.matching_radius(p)
    zero, A0_r, critical = _zero_energy_state(p, nu, control)
    crit_value = -nu + 0.5
    shift = (A0_r - crit_value) / r_m if critical else 0.0
    F = _Mismatch(p, nu, control, shift)

    floor = _energy_floor(p, r_m)
    for _ in range(60):
        F_floor, n_floor = F.one(-floor)
        if F_floor > 0 and n_floor == 0:
            break
        floor *= 4.0
    else:
        raise ConvergenceError("could not find an energy floor below all levels")

    t = np.linspace(0.0, DECADES, DECADES * POINTS_PER_DECADE + 1)
    grid = -floor * 10.0 ** (-t)
    Fg, ng = F(grid)
    if zero.at_pole[0]:
        F0 = -math.inf
    else:
        F0 = 0.0 if critical else (A0_r - crit_value) / r_m
    n0 = int(zero.nodes[0])

    found: List[Tuple[float, int]] = []
    unresolved: List[Tuple[float, float]] = []
    for i in range(grid.size - 1):
        found += _roots_in(F, grid[i], grid[i + 1], Fg[i], Fg[i + 1], ng[i], ng[i + 1])

    # last bracket up to E = 0
    a, Fa, na = grid[-1], Fg[-1], ng[-1]
    if n0 == na:
        if Fa > 0 > F0:
            F_tiny, n_tiny = F.one(-TINY_ENERGY)
            if F_tiny > 0:
                unresolved.append((-TINY_ENERGY, 0.0))
            else:
                found.append((_bisect(F, a, -TINY_ENERGY, Fa, F_tiny), na))
    else:
        b = -TINY_ENERGY
        Fb, nb = F.one(b)
        found += _roots_in(F, a, b, Fa, Fb, na, nb)
        if nb == n0 and Fb > 0 > F0:
            unresolved.append((b, 0.0))
        elif nb != n0:
            raise ConvergenceError("interior node count changes between -1e-300 and 0")

    found.sort()
    levels = [E for E, _ in found]
    nodes = [n for _, n in found]
    if critical and nu > 1.0:
        levels.append(0.0)
        nodes.append(n0)
    return BoundSpectrum(
        m=m,
        nu=nu,
        levels=tuple(float(E) for E in levels),
        level_nodes=tuple(int(n) for n in nodes),
        unresolved=tuple(unresolved),
        threshold_class=_threshold_class(nu) if critical else "none",
        A0_r=A0_r,
    )


def threshold_index(p: PotentialModel, m: int, control: Optional[StepControl] = None) -> float:
    """Continuous index q of the zero-energy solution; criticality is q integer.

    q = (theta - phi*) / pi with theta the lifted Prüfer angle at the matching
    radius and phi* the angle of the critical log-derivative (r R'/R = -nu + 1/2).
    Away from criticality the zero-energy node count on (0, inf) is floor(q) + 1.
    """
    nu = effective_order(m, p)
    res = radial.shoot(p, nu, [0.0], [p.coupling], control)
    phi_star = math.atan2(1.0, -nu)
    return (float(res.theta[0]) - phi_star) / math.pi


def count_via_nodes(p: PotentialModel, m: int, control: Optional[StepControl] = None) -> int:
    """Number of nodes of the zero-energy solution on (0, inf).

    At criticality the exterior continuation is exactly r^(-nu + 1/2) with
    no node; the zero-energy state itself is counted when nu > 1.
    """
    nu = effective_order(m, p)
    zero, _, critical = _zero_energy_state(p, nu, control)
    if critical:
        return int(zero.nodes[0]) + (1 if nu > 1.0 else 0)
    return radial.zero_energy_nodes(p, nu, r_max=math.inf, control=control)


# -- Levinson ----------------------------------------------------------------


@dataclass(frozen=True)
class LevinsonReport:
    m: int
    nu: float
    n_m: int
    eta0_rad: float
    expected_rad: float
    residual_rad: float
    regime: str
    critical: str
    verdict: str
    near_critical: bool = False
    eta0_raw_rad: float = 0.0
    notes: Tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["notes"] = list(self.notes)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def levinson_verdict(
    p: PotentialModel,
    m: int,
    tol: float = SNAP_TOL,
    control: Optional[StepControl] = None,
    lambda_steps: int = 16,
) -> LevinsonReport:
    """Compare eta_m(0) with the bound-state count.

    expected = n pi, (n + 1) pi for a P-wave half bound state, plus
    (m - nu) pi / 2 for an inverse-square tail. At fractional-order
    criticality the expected value carries the nu pi increment and the
    verdict is ``informational``.
    """
    nu = effective_order(m, p)
    reg = regime(p)
    spec = find_bound_states(p, m, control)
    lim = scattering.zero_momentum_limit(p, m, lambda_steps, control)
    n = spec.count
    cls = spec.threshold_class
    offset = scattering.tail_offset(m, nu)
    notes: List[str] = []

    if cls == "half_bound_p":
        expected = (n + 1) * math.pi + offset
        if reg == "tail_n_eq_2":
            notes.append("nu = 1 from an inverse-square tail treated like the cutoff P-wave case")
    elif cls == "half_bound_fractional":
        expected = n * math.pi + nu * math.pi + offset
        notes.append("0 < nu < 1 at criticality: no integer theorem, nu*pi increment shown")
    else:
        expected = n * math.pi + offset
    residual = abs(lim.eta0 - expected)
    if cls == "half_bound_fractional":
        verdict = "informational"
    else:
        verdict = "pass" if residual <= tol else "fail"

    if reg == "tail_n_gt_2":
        b, n_exp = p.tail
        if n_exp <= 3.0:
            notes.append(f"tail exponent n = {n_exp:g} lies in 2 < n <= 3")
        notes.append(
            f"tail neglected beyond r = {radial.matching_radius(p):.6g} "
            f"(|b| r^(2-n) = {radial.residual_tail_strength(p):.3g})"
        )
    if lim.near_critical:
        notes.append("near-critical channel: zero-momentum limit converges slowly")
    if not lim.snapped and cls != "half_bound_fractional":
        notes.append("zero-momentum phase not within snap tolerance of a multiple of pi")
    if spec.unresolved:
        notes.append(f"{len(spec.unresolved)} level(s) too close to E = 0 to resolve numerically")

    return LevinsonReport(
        m=m,
        nu=nu,
        n_m=n,
        eta0_rad=float(lim.eta0),
        expected_rad=expected,
        residual_rad=residual,
        regime=reg,
        critical=cls,
        verdict=verdict,
        near_critical=lim.near_critical,
        eta0_raw_rad=float(lim.raw),
        notes=tuple(notes),
    )
