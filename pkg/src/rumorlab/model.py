"""Core state spaces and transition structure of the k-spreading rumor model.

A population of N individuals splits into ignorants (X), partially aware
individuals who have heard the rumor exactly i < k times (Y_i, i = 1..k-1),
active spreaders (Y), and stiflers (Z). A spreader contacting an ignorant or
an i-aware individual advances that individual one awareness level (reaching
level k turns them into a spreader); a spreader contacting anyone who already
knows the rumor (aware, spreader, or stifler) becomes a stifler itself.

The k+1 transition increments, in the fixed index order used everywhere in
this package (simulator, drift, diffusion), act on (X, Y_1..Y_{k-1}, Y):

    index 0:        X -> X-1, Y_1 += 1        rate X*Y
    index 1..k-1:   Y_i -> Y_i - 1, Y_{i+1} += 1   rate Y_i*Y  (Y_k meaning Y)
    index k:        Y -> Y-1, Z += 1          rate (N-1-X-sum(Y_i))*Y

For k = 1 there are no partial classes and index 0 converts an ignorant
directly into a spreader. Z is redundant given N (conservation), so the
density-scale objects below live on the k+1 coordinates (x, y_1..y_{k-1}, y).

Counts are exact Python integers; conservation X + sum(Y_i) + Y + Z = N is
enforced, never approximated. Densities are floats. All types are immutable
and all functions pure, so values can be shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "InvalidStateError",
    "InvalidTransitionError",
    "ModelParams",
    "PopulationState",
    "InitialConfiguration",
    "DensityState",
    "increments",
    "transition_rates",
    "time_changed_rates",
    "apply_increment",
    "beta",
    "drift",
    "jacobian",
    "diffusion",
]


class InvalidStateError(ValueError):
    """A population state violates conservation or nonnegativity."""


class InvalidTransitionError(ValueError):
    """An increment was applied to a state whose source class is empty."""


@dataclass(frozen=True)
class ModelParams:
    """Model size: k hearings to convert, population of n individuals."""

    k: int
    n: int

    def __post_init__(self) -> None:
        if not (isinstance(self.k, int) and self.k >= 1):
            raise ValueError(f"k must be an integer >= 1, got {self.k!r}")
        if not (isinstance(self.n, int) and self.n >= 2):
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")


@dataclass(frozen=True)
class PopulationState:
    """Exact integer counts (X, Y_1..Y_{k-1}, Y, Z); aware has length k-1."""

    ignorants: int
    aware: tuple[int, ...]
    spreaders: int
    stiflers: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "aware", tuple(self.aware))

    @property
    def total(self) -> int:
        return self.ignorants + sum(self.aware) + self.spreaders + self.stiflers

    def counts(self) -> tuple[int, ...]:
        """All class counts in order (X, Y_1..Y_{k-1}, Y, Z)."""
        return (self.ignorants, *self.aware, self.spreaders, self.stiflers)

    def validate(self, params: ModelParams) -> None:
        if len(self.aware) != params.k - 1:
            raise InvalidStateError(
                f"aware list has length {len(self.aware)}, expected k-1={params.k - 1}"
            )
        if any(c < 0 for c in self.counts()):
            raise InvalidStateError(f"negative class count in {self.counts()}")
        if self.total != params.n:
            raise InvalidStateError(
                f"conservation violated: counts sum to {self.total}, n={params.n}"
            )


@dataclass(frozen=True)
class InitialConfiguration:
    """Limiting initial fractions (x0, y_{1,0}..y_{k-1,0}, y0); z0 is derived.

    The standard configuration is x0 = 1 with everything else 0 (finite-N
    seed: one spreader, the rest ignorants). The convention y_{0,0} := x0 is
    used by `rho` in the asymptotics module.
    """

    x0: float
    yi0: tuple[float, ...]
    y0: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "yi0", tuple(float(v) for v in self.yi0))
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "y0", float(self.y0))
        if not 0.0 < self.x0 <= 1.0:
            raise ValueError(f"x0 must lie in (0, 1], got {self.x0}")
        if any(not 0.0 <= v <= 1.0 for v in self.yi0) or not 0.0 <= self.y0 <= 1.0:
            raise ValueError("all initial fractions must lie in [0, 1]")
        # allow float round-off at the simplex boundary
        if self.x0 + sum(self.yi0) + self.y0 > 1.0 + 1e-12:
            raise ValueError("initial fractions exceed 1")

    @property
    def k(self) -> int:
        return len(self.yi0) + 1

    @property
    def z0(self) -> float:
        return max(0.0, 1.0 - (self.x0 + sum(self.yi0) + self.y0))

    @property
    def is_standard(self) -> bool:
        return self.x0 == 1.0

    @classmethod
    def standard(cls, k: int) -> "InitialConfiguration":
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        return cls(x0=1.0, yi0=(0.0,) * (k - 1), y0=0.0)


@dataclass(frozen=True)
class DensityState:
    """Density-scale point (x, y_1..y_{k-1}, y). y may be negative past absorption."""

    x: float
    yi: tuple[float, ...]
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "yi", tuple(float(v) for v in self.yi))

    @property
    def k(self) -> int:
        return len(self.yi) + 1

    def as_array(self) -> np.ndarray:
        return np.array([self.x, *self.yi, self.y], dtype=float)

    @classmethod
    def from_array(cls, v: Sequence[float]) -> "DensityState":
        v = list(v)
        return cls(x=float(v[0]), yi=tuple(v[1:-1]), y=float(v[-1]))


def increments(k: int) -> np.ndarray:
    """(k+1) x (k+1) integer matrix; row i is increment i on (x, y_1.., y)."""
    ell = np.zeros((k + 1, k + 1), dtype=int)
    for i in range(k + 1):
        ell[i, i] = -1
        if i + 1 <= k:
            ell[i, i + 1] = 1
    return ell


def transition_rates(state: PopulationState, params: ModelParams) -> list[int]:
    """Rates [X*Y, Y_1*Y, ..., Y_{k-1}*Y, (N-1-X-sum Y_i)*Y] in increment order.

    Exact integers. Total rate is zero iff there are no spreaders.
    """
    state.validate(params)
    y = state.spreaders
    others = params.n - 1 - state.ignorants - sum(state.aware)
    return [state.ignorants * y, *(a * y for a in state.aware), others * y]


def time_changed_rates(state: PopulationState, params: ModelParams) -> list[int]:
    """Rates of the chain run at 1/Y speed: [X, Y_1, ..., Y_{k-1}, N-1-X-sum Y_i].

    Same jump chain and same final state as the original chain; the common
    factor Y is removed, and the entries always total N-1.
    """
    state.validate(params)
    others = params.n - 1 - state.ignorants - sum(state.aware)
    return [state.ignorants, *state.aware, others]


def apply_increment(state: PopulationState, index: int) -> PopulationState:
    """Apply increment `index` (0..k); raises if the source class is empty."""
    k = len(state.aware) + 1
    if not 0 <= index <= k:
        raise InvalidTransitionError(f"increment index {index} out of range 0..{k}")
    x, aware, y, z = state.ignorants, list(state.aware), state.spreaders, state.stiflers
    if index == 0:
        if x == 0:
            raise InvalidTransitionError("no ignorants left to contact")
        x -= 1
        if k == 1:
            y += 1
        else:
            aware[0] += 1
    elif index < k:
        if aware[index - 1] == 0:
            raise InvalidTransitionError(f"aware class {index} is empty")
        aware[index - 1] -= 1
        if index == k - 1:
            y += 1
        else:
            aware[index] += 1
    else:
        if y == 0:
            raise InvalidTransitionError("no spreaders left to stifle")
        y -= 1
        z += 1
    return PopulationState(ignorants=x, aware=tuple(aware), spreaders=y, stiflers=z)


def beta(d: DensityState, params: ModelParams | None = None) -> np.ndarray:
    """Density-scale rate vector [x, y_1, ..., y_{k-1}, 1 - x - sum(y_i)].

    params is accepted for symmetry with the count-level functions but k is
    read off the state itself (same below for drift and diffusion).
    """
    return np.array([d.x, *d.yi, 1.0 - d.x - sum(d.yi)], dtype=float)


def drift(d: DensityState, params: ModelParams | None = None) -> np.ndarray:
    """Limit drift F(d) = sum_i increment_i * beta_i(d), in closed form.

    Components: F_x = -x; F_{y_i} = y_{i-1} - y_i (y_0 meaning x); the last
    component is beta_{k-1} - beta_k = x + sum(y_i) + y_{k-1} - 1 for k >= 2
    and 2x - 1 for k = 1.
    """
    k = d.k
    out = np.empty(k + 1)
    out[0] = -d.x
    prev = d.x
    for i, yi in enumerate(d.yi):
        out[1 + i] = prev - yi
        prev = yi
    # prev is now y_{k-1} (or x when k == 1)
    out[k] = prev - (1.0 - d.x - sum(d.yi))
    return out


def jacobian(k: int | ModelParams) -> np.ndarray:
    """Constant matrix of partial derivatives of the drift; takes k or params."""
    if isinstance(k, ModelParams):
        k = k.k
    jac = np.zeros((k + 1, k + 1))
    jac[0, 0] = -1.0
    for i in range(1, k):
        jac[i, i - 1] = 1.0
        jac[i, i] = -1.0
    jac[k, : k] = 1.0
    jac[k, k - 1] = 2.0
    return jac


def diffusion(d: DensityState, params: ModelParams | None = None) -> np.ndarray:
    """Local covariance G(d) = sum_i increment_i increment_i^T beta_i(d).

    Tridiagonal: G[i,i] = beta_{i-1} + beta_i (with beta_{-1} = 0) and
    G[i,i+1] = G[i+1,i] = -beta_i. Symmetric positive semidefinite on the
    simplex.
    """
    k = d.k
    b = beta(d, params)
    g = np.zeros((k + 1, k + 1))
    for i in range(k + 1):
        g[i, i] = b[i] + (b[i - 1] if i > 0 else 0.0)
        if i + 1 <= k:
            g[i, i + 1] = -b[i]
            g[i + 1, i] = -b[i]
    return g
