"""Fluid limit of the rumor model.

The scaled process converges to the solution of the linear system

    x' = -x,   y_1' = x - y_1,   y_i' = y_{i-1} - y_i,
    y' = y_{k-1} - (1 - x - sum y_i)

which integrates in closed form: x(t) = x0 e^{-t}, the aware classes are
Poisson-weighted shifts of the initial data, and y(t) = f(x(t)) with f from
the asymptotics module. The closed form is authoritative; a fixed-step RK4
integrator is provided purely as an independent cross-check oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import asymptotics
from .model import DensityState, InitialConfiguration, drift

__all__ = [
    "closed_form",
    "sample_closed_form",
    "integrate_numeric",
    "tau_infinity",
    "fluid_trajectory",
    "FluidTrajectory",
    "SampledTrajectory",
    "csv_lines",
]

_T_TOL = 1e-12


def closed_form(t: float, init: InitialConfiguration) -> DensityState:
    """Exact fluid state at time t >= 0.

    x(t) = x0 e^{-t}; y_i(t) = e^{-t} sum_{r<=i} y_{i-r,0} t^r/r! (with
    y_{0,0} := x0); y(t) = f(x(t)), which may go negative past absorption.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    x = init.x0 * math.exp(-t)
    y0s = (init.x0, *init.yi0)
    yi = []
    for i in range(1, init.k):
        term = 1.0  # t^r / r!
        acc = 0.0
        for r in range(i + 1):
            acc += y0s[i - r] * term
            term = term * t / (r + 1)
        yi.append((x / init.x0) * acc)
    return DensityState(x=x, yi=tuple(yi), y=asymptotics.f_eval(x, init))


def sample_closed_form(times: np.ndarray, init: InitialConfiguration) -> np.ndarray:
    """Closed-form states at an array of times; shape (len(times), k+1)."""
    return np.array([closed_form(float(t), init).as_array() for t in np.asarray(times)])


def tau_infinity(init: InitialConfiguration) -> float:
    """First t > 0 with y(t) <= 0: the fluid absorption time.

    Located by bracketing the sign change of y(t) = f(x0 e^{-t}) on a grid
    matching the x-space scan (steps of ln2/8 starting just above 0) and
    bisecting to 1e-12. Equals ln(x0 / x_inf). Returns 0 in the degenerate
    case where y is negative immediately (no spreading in the limit).
    """
    step = math.log(2.0) / 8.0
    t_prev = 1e-9
    if _y_sign(t_prev, init) < 0:
        return 0.0
    t_max = init.y0 + asymptotics.rho(0, init) + 10.0
    t = t_prev + step
    while True:
        if _y_sign(t, init) < 0:
            break
        if t > t_max:
            raise RuntimeError("no absorption found; malformed configuration")
        t_prev = t
        t += step
    lo, hi = t_prev, t
    while hi - lo > _T_TOL:
        mid = 0.5 * (lo + hi)
        if _y_sign(mid, init) < 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _y_sign(t: float, init: InitialConfiguration) -> float:
    return asymptotics.sign_f(init.x0 * math.exp(-t), init)


@dataclass(frozen=True)
class FluidTrajectory:
    """Callable closed-form trajectory with its absorption time."""

    init: InitialConfiguration
    tau_inf: float

    def at(self, t: float) -> DensityState:
        return closed_form(t, self.init)


def fluid_trajectory(init: InitialConfiguration) -> FluidTrajectory:
    return FluidTrajectory(init=init, tau_inf=tau_infinity(init))


@dataclass(frozen=True)
class SampledTrajectory:
    """Fixed-grid numerical solution; states has shape (len(times), k+1)."""

    times: np.ndarray
    states: np.ndarray


def integrate_numeric(init: InitialConfiguration, t_end: float, step: float) -> SampledTrajectory:
    """Classic RK4 on the limit system; global error O(step^4).

    The right-hand side is exactly the model drift, so agreement with
    closed_form validates both.
    """
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    k = init.k

    def rhs(v: np.ndarray) -> np.ndarray:
        return drift(DensityState(x=v[0], yi=tuple(v[1:k]), y=v[k]))

    n_steps = max(1, math.ceil(t_end / step)) if t_end > 0 else 0
    times = [0.0]
    v = np.array([init.x0, *init.yi0, init.y0], dtype=float)
    states = [v.copy()]
    for i in range(n_steps):
        t0 = i * step
        h = min(step, t_end - t0)
        if h <= 0:  # float round-off can add a phantom final step
            break
        k1 = rhs(v)
        k2 = rhs(v + 0.5 * h * k1)
        k3 = rhs(v + 0.5 * h * k2)
        k4 = rhs(v + h * k3)
        v = v + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        times.append(min(t0 + h, t_end))
        states.append(v.copy())
    return SampledTrajectory(times=np.array(times), states=np.array(states))


def csv_lines(times: np.ndarray, states: np.ndarray, k: int) -> Iterator[str]:
    """Trajectory as CSV rows: t, x, y_1..y_{k-1}, y."""
    header = ["t", "x"] + [f"y_{i}" for i in range(1, k)] + ["y"]
    yield ",".join(header)
    for t, row in zip(times, states):
        yield ",".join([f"{t:.10g}"] + [f"{v:.10g}" for v in row])
