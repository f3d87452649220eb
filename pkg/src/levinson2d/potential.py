"""
Cylindrically symmetric potentials V(r) and the lambda-scaled family lambda*V(r).

Units: 2*mu/hbar^2 = 1, so energies and potentials share the unit 1/length^2.
Attractive wells carry negative V inside; a square well's ``depth`` is the
positive magnitude.

Two kinds of model exist:

* cutoff shapes (``SquareWell``, ``TruncatedGaussian``, ``StepStack``) vanish
  identically for r >= r0;
* ``TailPotential`` wraps a cutoff core and continues it with b * r**-n for
  r >= r0. n == 2 is the inverse-square case that shifts the channel order;
  n > 2 is a short-range tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError, UnsupportedChannelError


@dataclass(frozen=True)
class PotentialModel:
    """Base class. ``coupling`` is the physical lambda of the model (default 1)."""

    r0: float
    coupling: float = 1.0

    shape = "abstract"

    def __post_init__(self):
        if not (np.isfinite(self.r0) and self.r0 > 0):
            raise DomainError(f"cutoff radius must be > 0, got {self.r0!r}")
        if not (np.isfinite(self.coupling) and 0.0 <= self.coupling <= 1.0):
            raise DomainError(f"coupling must lie in [0, 1], got {self.coupling!r}")

    def values(self, r):
        """V(r) at unit coupling; vectorised, r > 0."""
        raise NotImplementedError

    def breakpoints(self) -> Tuple[float, ...]:
        """Radii in (0, r0] where V may jump."""
        return (self.r0,)

    def with_coupling(self, coupling: float) -> "PotentialModel":
        return replace(self, coupling=coupling)

    @property
    def tail(self) -> Optional[Tuple[float, float]]:
        return None

    def max_abs(self, r_max: Optional[float] = None, samples: int = 4097) -> float:
        """Estimate of max |V| on (0, r_max] at unit coupling."""
        r_max = self.r0 if r_max is None else r_max
        r = np.concatenate(
            [np.linspace(r_max * 1e-6, r_max, samples), np.asarray(self.breakpoints())]
        )
        # both sides of each jump
        r = np.concatenate([r, np.asarray(self.breakpoints()) * (1 - 1e-12)])
        return float(np.max(np.abs(self.values(r[r > 0]))))


@dataclass(frozen=True)
class SquareWell(PotentialModel):
    depth: float = 1.0

    shape = "square_well"

    def __post_init__(self):
        super().__post_init__()
        if not (np.isfinite(self.depth) and self.depth > 0):
            raise DomainError(f"square well depth must be > 0, got {self.depth!r}")

    @classmethod
    def from_x0(cls, x0: float, r0: float = 1.0, coupling: float = 1.0) -> "SquareWell":
        """Build from the dimensionless depth x0 = sqrt(depth) * r0."""
        return cls(r0=r0, coupling=coupling, depth=(x0 / r0) ** 2)

    @property
    def x0(self) -> float:
        return math.sqrt(self.depth) * self.r0

    def values(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.r0, -self.depth, 0.0)


@dataclass(frozen=True)
class TruncatedGaussian(PotentialModel):
    """V(r) = amplitude * exp(-(r/width)**2) for r < r0; negative amplitude attracts."""

    amplitude: float = -1.0
    width: float = 1.0

    shape = "truncated_gaussian"

    def __post_init__(self):
        super().__post_init__()
        if not (np.isfinite(self.width) and self.width > 0):
            raise DomainError(f"gaussian width must be > 0, got {self.width!r}")

    def values(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.r0, self.amplitude * np.exp(-((r / self.width) ** 2)), 0.0)


@dataclass(frozen=True)
class StepStack(PotentialModel):
    """Piecewise-constant shells; shell i holds ``values[i]`` on [radii[i-1], radii[i])."""

    radii: Tuple[float, ...] = ()
    levels: Tuple[float, ...] = ()

    shape = "step_stack"

    def __post_init__(self):
        super().__post_init__()
        radii = np.asarray(self.radii, dtype=float)
        if len(self.radii) == 0 or len(self.radii) != len(self.levels):
            raise DomainError("step_stack needs matching, non-empty radii and values")
        if np.any(np.diff(radii) <= 0) or radii[0] <= 0:
            raise DomainError("step_stack radii must be positive and strictly ascending")
        if not math.isclose(radii[-1], self.r0, rel_tol=0, abs_tol=0):
            raise DomainError("the outermost step radius must equal r0")

    @classmethod
    def from_shells(cls, shells, coupling: float = 1.0) -> "StepStack":
        shells = [(float(r), float(v)) for r, v in shells]
        return cls(
            r0=shells[-1][0],
            coupling=coupling,
            radii=tuple(r for r, _ in shells),
            levels=tuple(v for _, v in shells),
        )

    def values(self, r):
        r = np.asarray(r, dtype=float)
        idx = np.searchsorted(np.asarray(self.radii), r, side="right")
        table = np.append(np.asarray(self.levels, dtype=float), 0.0)
        return table[np.minimum(idx, len(self.levels))]

    def breakpoints(self):
        return tuple(self.radii)


@dataclass(frozen=True)
class TailPotential(PotentialModel):
    """A cutoff ``core`` inside r0, continued by b * r**-n outside."""

    core: PotentialModel = field(default=None)
    b: float = 0.0
    n: float = 2.0

    def __post_init__(self):
        super().__post_init__()
        if self.core is None or self.core.tail is not None:
            raise DomainError("a tail potential needs a cutoff core shape")
        if not math.isclose(self.core.r0, self.r0):
            raise DomainError("tail must attach at the core's cutoff radius")
        if not (np.isfinite(self.b) and self.b != 0.0):
            raise DomainError("tail coefficient b must be finite and nonzero")
        if not (np.isfinite(self.n) and self.n >= 2.0):
            raise DomainError(f"tail exponent must be 2 or > 2, got {self.n!r}")

    @property
    def shape(self):
        return "core_plus_inverse_square" if self.n == 2.0 else "inverse_power_tail"

    @property
    def tail(self):
        return (self.b, self.n)

    def values(self, r):
        r = np.asarray(r, dtype=float)
        inside = r < self.r0
        safe = np.where(inside, self.r0, r)
        return np.where(inside, self.core.values(r), self.b * safe ** (-self.n))

    def breakpoints(self):
        return self.core.breakpoints()


# -- constructors under the names used in configuration files ---------------


def square_well(depth: float, r0: float = 1.0, coupling: float = 1.0) -> SquareWell:
    return SquareWell(r0=r0, coupling=coupling, depth=depth)


def truncated_gaussian(amplitude: float, width: float, r0: float, coupling: float = 1.0):
    return TruncatedGaussian(r0=r0, coupling=coupling, amplitude=amplitude, width=width)


def step_stack(shells, coupling: float = 1.0) -> StepStack:
    return StepStack.from_shells(shells, coupling=coupling)


def core_plus_inverse_square(core: PotentialModel, b: float) -> TailPotential:
    return TailPotential(r0=core.r0, coupling=core.coupling, core=core.with_coupling(1.0), b=b, n=2.0)


def inverse_power_tail(core: PotentialModel, b: float, n: float) -> TailPotential:
    if not n > 2.0:
        raise DomainError(f"inverse_power_tail needs n > 2, got {n!r}")
    return TailPotential(r0=core.r0, coupling=core.coupling, core=core.with_coupling(1.0), b=b, n=float(n))


# -- operations --------------------------------------------------------------


def eval(p: PotentialModel, r, lam: Optional[float] = None):  # noqa: A001 - operation name
    """lambda * V(r); ``lam`` defaults to the model's coupling."""
    lam = p.coupling if lam is None else lam
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)):
        raise DomainError("potential is evaluated only at r > 0")
    out = lam * p.values(r_arr)
    return float(out) if np.ndim(out) == 0 else out


def tail_descriptor(p: PotentialModel) -> Optional[Tuple[float, float]]:
    return p.tail


def effective_order(m: int, p: PotentialModel) -> float:
    """Channel order: sqrt(m^2 + b) for an inverse-square tail, m otherwise."""
    if m < 0 or int(m) != m:
        raise DomainError(f"channel m must be a non-negative integer, got {m!r}")
    tail = p.tail
    if tail is None or tail[1] != 2.0:
        return float(m)
    nu2 = m * m + tail[0]
    if nu2 <= 0.0:
        raise UnsupportedChannelError(
            f"channel m={m} with inverse-square tail b={tail[0]} has nu^2 = m^2 + b = {nu2} <= 0; "
            "such channels carry infinitely many bound states (or nu = 0) and are not supported"
        )
    return math.sqrt(nu2)


def regime(p: PotentialModel) -> str:
    tail = p.tail
    if tail is None:
        return "cutoff"
    return "tail_n_eq_2" if tail[1] == 2.0 else "tail_n_gt_2"
