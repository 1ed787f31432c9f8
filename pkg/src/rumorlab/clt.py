"""Gaussian fluctuation theory at absorption, for arbitrary k.

The sqrt(N)-scaled deviation of the process from its fluid limit converges
to a Gaussian whose terminal covariance is assembled from four ingredients:

    Phi(t, s)   propagator of the linearized flow, exp(J (t-s)) since the
                drift Jacobian J is constant for this model;
    Lambda_inf  int_0^{tau_inf} Phi(tau,s) G(r(s)) Phi(tau,s)^T ds, the
                fluctuation covariance accumulated along the fluid path r;
    delta_inf   the y-component of the drift at absorption, which must be
                strictly negative for the stopping surface {y = 0} to be
                crossed transversally;
    B           the k x (k+1) projection eliminating the y coordinate:
                identity on the first k coordinates plus the correction
                column B[i, k] = -F_i(r(tau_inf)) / delta_inf, accounting
                for the random absorption time.

The covariance of the final (x, y_1..y_{k-1}) fluctuations is then
Sigma = B Lambda_inf B^T. The pipeline is fully numeric and k-generic;
closed forms known for small k live in the test suite as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec
from scipy.linalg import expm

from . import asymptotics, fluid
from .model import DensityState, InitialConfiguration, diffusion, drift, jacobian

__all__ = [
    "DegeneracyError",
    "QuadratureError",
    "CltResult",
    "fundamental_matrix",
    "fundamental_matrix_ode",
    "lambda_infinity",
    "delta_infinity",
    "projection_b",
    "sigma",
    "clt_pipeline",
]

_QUAD_TOL = 1e-10


class DegeneracyError(RuntimeError):
    """delta_inf >= 0: the fluid path does not cross {y=0} transversally."""


class QuadratureError(RuntimeError):
    """The covariance integral did not reach the requested tolerance."""


def fundamental_matrix(init: InitialConfiguration, t: float, s: float) -> np.ndarray:
    """Phi(t, s) = exp(J (t-s)) for 0 <= s <= t (scaling-and-squaring expm)."""
    if s > t:
        raise ValueError(f"need s <= t, got s={s} > t={t}")
    return expm(jacobian(init.k) * (t - s))


def fundamental_matrix_ode(
    init: InitialConfiguration, t: float, s: float, steps: int = 4000
) -> np.ndarray:
    """Phi(t, s) by RK4 integration of dPhi/dt = J Phi, Phi(s, s) = I.

    Independent cross-check of the matrix exponential; O(steps^-4) error.
    """
    if s > t:
        raise ValueError(f"need s <= t, got s={s} > t={t}")
    jac = jacobian(init.k)
    phi = np.eye(init.k + 1)
    h = (t - s) / steps
    if h == 0.0:
        return phi
    for _ in range(steps):
        k1 = jac @ phi
        k2 = jac @ (phi + 0.5 * h * k1)
        k3 = jac @ (phi + 0.5 * h * k2)
        k4 = jac @ (phi + h * k3)
        phi = phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return phi


def _final_point(init: InitialConfiguration) -> tuple[float, tuple[float, ...], float]:
    x_inf = asymptotics.x_infinity(init)
    y_inf, _ = asymptotics.y_infinity(init, x_inf)
    tau = asymptotics.tau_from_x(init, x_inf)
    return x_inf, y_inf, tau


def lambda_infinity(init: InitialConfiguration) -> np.ndarray:
    """Terminal covariance of the linearized fluctuations (before projection).

    Adaptive quadrature of Phi G Phi^T over [0, tau_inf]; raises
    QuadratureError if the estimated error exceeds 1e-10 per entry.
    """
    _, _, tau = _final_point(init)
    return _lambda_from_tau(init, tau)


def _lambda_from_tau(init: InitialConfiguration, tau: float) -> np.ndarray:
    jac = jacobian(init.k)

    def integrand(s: float) -> np.ndarray:
        phi = expm(jac * (tau - s))
        g = diffusion(fluid.closed_form(s, init))
        return phi @ g @ phi.T

    val, err = quad_vec(integrand, 0.0, tau, epsabs=1e-12, epsrel=1e-12, norm="max")
    if err > _QUAD_TOL:
        raise QuadratureError(
            f"covariance quadrature error estimate {err:.3e} exceeds {_QUAD_TOL:.0e}"
        )
    return 0.5 * (val + val.T)


def delta_infinity(init: InitialConfiguration) -> float:
    """Drift of the y coordinate at the absorption point; must be < 0."""
    x_inf, y_inf, _ = _final_point(init)
    d = drift(DensityState(x=x_inf, yi=y_inf, y=0.0))[init.k]
    if d >= 0:
        raise DegeneracyError(
            f"delta_inf = {d:.6g} >= 0: absorption is not transversal, "
            "no Gaussian limit for this configuration"
        )
    return float(d)


def projection_b(init: InitialConfiguration) -> np.ndarray:
    """k x (k+1) projection: identity block plus the time-randomization column.

    B[i, k] = -F_i(r(tau_inf)) / delta_inf compensates the first-order effect
    of the random absorption time on the unabsorbed coordinates.
    """
    x_inf, y_inf, _ = _final_point(init)
    return _b_from_point(init, x_inf, y_inf)


def _b_from_point(
    init: InitialConfiguration, x_inf: float, y_inf: tuple[float, ...]
) -> np.ndarray:
    k = init.k
    f = drift(DensityState(x=x_inf, yi=y_inf, y=0.0))
    delta = f[k]
    if delta >= 0:
        raise DegeneracyError(f"delta_inf = {delta:.6g} >= 0")
    b = np.zeros((k, k + 1))
    b[:, :k] = np.eye(k)
    b[:, k] = -f[:k] / delta
    return b


def sigma(init: InitialConfiguration) -> np.ndarray:
    """Covariance of the sqrt(N)-scaled final (x, y_1..y_{k-1}) fluctuations."""
    return clt_pipeline(init).sigma


@dataclass(frozen=True)
class CltResult:
    """Everything the fluctuation theory produces for one configuration."""

    k: int
    x_inf: float
    y_inf: tuple[float, ...]
    tau_inf: float
    delta_inf: float
    lambda_inf: np.ndarray
    b_matrix: np.ndarray
    sigma: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "tau_inf": self.tau_inf,
            "x_inf": self.x_inf,
            "y_inf": list(self.y_inf),
            "delta_inf": self.delta_inf,
            "lambda": self.lambda_inf.tolist(),
            "b": self.b_matrix.tolist(),
            "sigma": self.sigma.tolist(),
        }


def clt_pipeline(init: InitialConfiguration) -> CltResult:
    """Compute Lambda_inf, delta_inf, B, and Sigma = B Lambda_inf B^T in one pass."""
    x_inf, y_inf, tau = _final_point(init)
    lam = _lambda_from_tau(init, tau)
    b = _b_from_point(init, x_inf, y_inf)
    delta = float(drift(DensityState(x=x_inf, yi=y_inf, y=0.0))[init.k])
    sig = b @ lam @ b.T
    return CltResult(
        k=init.k,
        x_inf=x_inf,
        y_inf=y_inf,
        tau_inf=tau,
        delta_inf=delta,
        lambda_inf=lam,
        b_matrix=b,
        sigma=0.5 * (sig + sig.T),
    )
