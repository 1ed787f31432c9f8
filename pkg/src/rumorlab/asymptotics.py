"""Final-size function f and the limiting proportions of the rumor model.

Everything here is driven by the transcendental function

    f(x) = y0 + rho(0) - (x/x0) * sum_{r<k} (rho(r)/r!) ln(x0/x)^r - ln(x0/x)

on (0, x0], whose largest sign change locates x_inf, the limiting fraction
of ignorants at absorption. rho packs the initial configuration into k
moments (with the convention y_{0,0} := x0). f(x0) = y0 exactly, and
f -> -inf as x -> 0+, so a negativity set always exists.

Numerical subtlety, worth stating once: near x0 the function can have a
zero of order k (standard configuration), where the direct formula for f
evaluates as a difference of O(k) quantities and its true size ln(x0/x)^k/k!
sinks below double-precision noise. Sign queries in that region are answered
from the power series psi(t) = sum a_n t^n (t = ln(x0/x), sign psi = sign f),
whose leading nonzero term dominates at small t. Everything downstream
(x_inf scan, zero classification, absorption time) uses that hybrid sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import InitialConfiguration

__all__ = [
    "rho",
    "f_eval",
    "f_standard",
    "gamma_lower",
    "poisson_tail",
    "poisson_partial_mean",
    "series_coefficients",
    "x_infinity",
    "y_infinity",
    "tau_from_x",
    "classify_zeros",
    "asymptotic_summary",
    "ZeroClassification",
    "AsymptoticSummary",
]

# geometric scan ratio (eighth-octave steps) and bisection tolerance in x
_SCAN_RATIO = 2.0 ** (1.0 / 8.0)
_X_TOL = 1e-12
# first scan point sits just below x0 to skip the boundary zero f(x0)=y0=0
_EDGE = 1.0 - 1e-9


def rho(r: int, init: InitialConfiguration) -> float:
    """Initial-configuration moment sum_{j=0}^{k-r-1} (k-j-r+1) y_{j,0}.

    Uses y_{0,0} := x0. Defined for 0 <= r <= k-1.
    """
    k = init.k
    if not 0 <= r <= k - 1:
        raise ValueError(f"r must lie in [0, {k - 1}], got {r}")
    y = (init.x0, *init.yi0)
    return sum((k - j - r + 1) * y[j] for j in range(k - r))


def _log_poly(L: np.ndarray, init: InitialConfiguration) -> np.ndarray:
    """sum_{r<k} (rho(r)/r!) L^r, accumulated by running product."""
    acc = np.zeros_like(L)
    term = np.ones_like(L)
    for r in range(init.k):
        acc += rho(r, init) * term
        term = term * L / (r + 1)
    return acc


def f_eval(x, init: InitialConfiguration):
    """f at x in (0, x0]; accepts scalars or arrays (vectorized).

    Raises ValueError outside the domain. f(x0) = y0 and f(x) -> -inf as
    x -> 0+.
    """
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0.0) or np.any(xa > init.x0):
        raise ValueError(f"x must lie in (0, {init.x0}]")
    L = np.log(init.x0 / xa)
    r0 = rho(0, init)
    out = init.y0 + r0 - (xa / init.x0) * _log_poly(L, init) - L
    return float(out) if np.isscalar(x) else out


def series_coefficients(init: InitialConfiguration, n_max: int) -> list[float]:
    """Coefficients a_0..a_{n_max} of psi(t) = sum a_n t^n with sign psi(t) = sign f(x0 e^{-t}).

    a_n = (y0 + rho(0) - rho(n) - n)/n! for n <= k-1 and (y0 + rho(0) - n)/n!
    for n >= k; eventually all negative, so the sign-change count is finite.
    Requires n_max >= k+2 (below that the tail structure is not visible).
    """
    k = init.k
    if n_max < k + 2:
        raise ValueError(f"n_max must be >= k+2 = {k + 2}, got {n_max}")
    r0 = rho(0, init)
    out = []
    fact = 1.0
    for n in range(n_max + 1):
        if n > 0:
            fact *= n
        head = rho(n, init) if n <= k - 1 else 0.0
        out.append((init.y0 + r0 - head - n) / fact)
    return out


def _psi(t: np.ndarray, init: InitialConfiguration) -> np.ndarray:
    # power-series evaluation; converges fast for the t <= ~30 this is used at
    a = series_coefficients(init, init.k + 140)
    out = np.zeros_like(t)
    tp = np.ones_like(t)
    for an in a:
        out += an * tp
        tp = tp * t
    return out


def sign_f(x, init: InitialConfiguration):
    """Sign of f, robust where the direct evaluation drowns in round-off.

    Where |f_eval| falls below a noise floor proportional to the size of the
    summed terms, the sign is recomputed from the psi power series, which is
    exact to leading order near x0. Returns -1/0/+1 per point.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    v = f_eval(xa, init)
    L = np.log(init.x0 / xa)
    noise = 64.0 * np.finfo(float).eps * (abs(init.y0) + rho(0, init) + np.abs(L) + 1.0)
    s = np.sign(v)
    mask = (np.abs(v) < noise) & (L < 30.0)
    if np.any(mask):
        s[mask] = np.sign(_psi(L[mask], init))
    return s[0] if np.isscalar(x) else s


def gamma_lower(k: int, t: float) -> float:
    """Lower incomplete gamma integral of u^{k-1} e^{-u} du over [0, t], integer k >= 1.

    Two stable branches: for t < k the all-positive power series
    t^k e^{-t} sum_n t^n / (k (k+1) ... (k+n)); for t >= k the closed form
    (k-1)! (1 - e^{-t} sum_{r<k} t^r/r!), where the subtracted CDF term is
    at most ~1/2 so no cancellation occurs. (The closed form loses digits
    for all t somewhat below k, not just near 0.)
    """
    if k < 1 or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k}")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    k = int(k)
    if t == 0.0:
        return 0.0
    if t < k:
        term = math.exp(k * math.log(t) - t) / k
        total = term
        n = 1
        while True:
            term *= t / (k + n)
            total += term
            if term <= total * 1e-17:
                return total
            n += 1
    cdf_term = 1.0  # r = 0
    term = 1.0
    for r in range(1, k):
        term *= t / r
        cdf_term += term
    return math.factorial(k - 1) * (1.0 - math.exp(-t) * cdf_term)


def poisson_tail(k: int, t: float) -> float:
    """P(R >= k) for R ~ Poisson(t), via gamma_lower(k, t)/(k-1)!."""
    return gamma_lower(k, t) / math.factorial(k - 1)


def poisson_partial_mean(k: int, t: float) -> float:
    """E[R; R > k] for R ~ Poisson(t), equal to t * P(R >= k)."""
    return t * poisson_tail(k, t)


def f_standard(x, k: int):
    """f specialized to the standard configuration, in incomplete-gamma form:

        f(x) = [(1 + k + ln x) gamma(k, -ln x) - x (-ln x)^k] / (k-1)!

    Agrees with f_eval on the standard configuration to round-off. Domain
    (0, 1]; accepts scalars or arrays.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0.0) or np.any(xa > 1.0):
        raise ValueError("x must lie in (0, 1]")
    L = -np.log(xa)
    g = np.array([gamma_lower(k, t) for t in L])
    out = ((1.0 + k + np.log(xa)) * g - xa * L**k) / math.factorial(k - 1)
    return float(out[0]) if np.isscalar(x) else out


def _scan_floor(init: InitialConfiguration) -> float:
    # f ~ y0 + rho(0) - ln(x0/x) for tiny x, so this is deep inside the
    # negative region regardless of k
    return min(1e-15, init.x0 * math.exp(-(init.y0 + rho(0, init) + 10.0)))


def _bisect_negative_edge(lo: float, hi: float, init: InitialConfiguration) -> float:
    """Shrink [lo, hi] with sign(lo) < 0 <= sign(hi) down to width _X_TOL."""
    while hi - lo > _X_TOL:
        mid = 0.5 * (lo + hi)
        if sign_f(mid, init) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def x_infinity(init: InitialConfiguration) -> float:
    """sup{x in (0, x0] : f(x) < 0}: the limiting ignorant fraction.

    Geometric downward scan from x0*(1 - 1e-9) in eighth-octave steps,
    then bisection to 1e-12. If f is already negative at the first scan
    point the supremum is x0 itself (degenerate boundary case, e.g. the
    y0 = 0, x0 <= k/(k+1) family); callers needing the flag should use
    asymptotic_summary.
    """
    x_inf, _ = _x_infinity_flagged(init)
    return x_inf


def _x_infinity_flagged(init: InitialConfiguration) -> tuple[float, bool]:
    floor = _scan_floor(init)
    prev = init.x0 * _EDGE
    if sign_f(prev, init) < 0:
        return init.x0, True
    x = prev / _SCAN_RATIO
    while True:
        if sign_f(x, init) < 0:
            return _bisect_negative_edge(x, prev, init), False
        if x <= floor:
            raise RuntimeError(
                "no sign change found above the scan floor; f should always "
                "turn negative, so this indicates a malformed configuration"
            )
        prev = x
        x /= _SCAN_RATIO


def y_infinity(init: InitialConfiguration, x_inf: float) -> tuple[tuple[float, ...], float]:
    """Limiting aware-class fractions and the stifler fraction at absorption.

    y_{i,inf} = (x_inf/x0) sum_{r=0}^{i} y_{i-r,0} ln(x0/x_inf)^r / r! for
    i = 1..k-1 (y_{0,0} := x0), and z_inf = 1 - x_inf - sum y_{i,inf}.
    """
    L = math.log(init.x0 / x_inf)
    y = (init.x0, *init.yi0)
    out = []
    for i in range(1, init.k):
        term = 1.0  # L^r / r!
        acc = 0.0
        for r in range(i + 1):
            acc += y[i - r] * term
            term = term * L / (r + 1)
        out.append((x_inf / init.x0) * acc)
    z_inf = 1.0 - x_inf - sum(out)
    return tuple(out), z_inf


def tau_from_x(init: InitialConfiguration, x_inf: float) -> float:
    """Absorption time of the fluid limit, ln(x0/x_inf)."""
    return math.log(init.x0 / x_inf)


@dataclass(frozen=True)
class ZeroClassification:
    """Zero structure of f on (0, x0].

    sign_changes is the count C of sign changes in the psi coefficients;
    the number of zeros of f on the open interval (0, x0) lies in
    possible_interior_counts = {C, C-2, ...}. x0 itself is a zero exactly
    when y0 = 0 (boundary_zero). For the two analyzed families,
    theorem_counts lists the admissible totals on (0, x0]:

      family_case = "standard"              -> (2,)    zeros {x_inf, x0}
      "unique-zero-at-x0"     (y0 = 0, x0 <= k/(k+1), no aware mass)
                                            -> (1,)
      "one-or-three-with-x0"  (y0 = 0, x0 > k/(k+1))  -> (1, 3)
      "unique-interior-zero"  (y0 > 0, y0 + (k+1)x0 <= k) -> (1,)
      "one-or-three-interior" (y0 > 0, y0 + (k+1)x0 > k)  -> (1, 3)

    Outside those families family_case is None and only the sign-change
    bound applies. zeros holds the empirically located zeros (ascending,
    boundary included), found by a dense log-spaced sign scan at the stated
    resolution plus bisection; with ambiguous theorem_counts the empirical
    count is a scan result, not a theorem.
    """

    sign_changes: int
    possible_interior_counts: tuple[int, ...]
    family_case: str | None
    theorem_counts: tuple[int, ...] | None
    zeros: tuple[float, ...]
    boundary_zero: bool
    scan_points: int


def _family_case(init: InitialConfiguration) -> tuple[str | None, tuple[int, ...] | None]:
    k = init.k
    if init.is_standard and init.y0 == 0.0:
        return "standard", (2,)
    if init.x0 < 1.0 and all(v == 0.0 for v in init.yi0):
        if init.y0 == 0.0:
            if init.x0 <= k / (k + 1):
                return "unique-zero-at-x0", (1,)
            return "one-or-three-with-x0", (1, 3)
        if init.y0 + (k + 1) * init.x0 <= k:
            return "unique-interior-zero", (1,)
        return "one-or-three-interior", (1, 3)
    return None, None


def classify_zeros(
    init: InitialConfiguration,
    scan_points: int = 200_000,
    x_min_factor: float = 1e-8,
) -> ZeroClassification:
    """Count sign changes of the psi coefficients and locate zeros of f."""
    # C: scan coefficients until they are permanently negative
    # (a_n < 0 for every n > y0 + rho(0))
    n_max = init.k + int(math.ceil(init.y0 + rho(0, init))) + 3
    coeffs = series_coefficients(init, n_max)
    signs = [s for s in (np.sign(c) for c in coeffs) if s != 0]
    c_count = sum(1 for a, b in zip(signs, signs[1:]) if a != b)
    possible = tuple(range(c_count, -1, -2))[::-1] if c_count >= 0 else ()

    xs = np.geomspace(init.x0 * _EDGE, init.x0 * x_min_factor, scan_points)
    s = sign_f(xs, init)
    zeros: list[float] = []
    for i in range(len(xs) - 1):
        if s[i] == 0.0:
            zeros.append(float(xs[i]))
        elif s[i + 1] != 0.0 and s[i] != s[i + 1]:
            # xs decreases: bracket is [xs[i+1], xs[i]]
            lo, hi = float(xs[i + 1]), float(xs[i])
            s_lo = s[i + 1]
            while hi - lo > _X_TOL:
                mid = 0.5 * (lo + hi)
                sm = sign_f(mid, init)
                if sm == s_lo or sm == 0.0:
                    lo = mid
                else:
                    hi = mid
            zeros.append(0.5 * (lo + hi))
    boundary = init.y0 == 0.0
    if boundary:
        zeros.append(init.x0)
    family, theorem_counts = _family_case(init)
    return ZeroClassification(
        sign_changes=c_count,
        possible_interior_counts=possible,
        family_case=family,
        theorem_counts=theorem_counts,
        zeros=tuple(sorted(zeros)),
        boundary_zero=boundary,
        scan_points=scan_points,
    )


@dataclass(frozen=True)
class AsymptoticSummary:
    """Limiting proportions at absorption plus the zero structure of f.

    degenerate marks the boundary case where f < 0 immediately below x0, so
    sup{f < 0} = x0 and no rumor spreads in the limit (tau_inf = 0);
    otherwise f(x_inf) = 0 to root tolerance.
    """

    k: int
    x_inf: float
    y_inf: tuple[float, ...]
    z_inf: float
    tau_inf: float
    degenerate: bool
    zero_count_bound: tuple[int, ...]
    zeros: tuple[float, ...]


def asymptotic_summary(
    init: InitialConfiguration, scan_points: int = 50_000
) -> AsymptoticSummary:
    """One-call bundle: x_inf, y_{i,inf}, z_inf, tau_inf, zero classification."""
    x_inf, degenerate = _x_infinity_flagged(init)
    y_inf, z_inf = y_infinity(init, x_inf)
    cls = classify_zeros(init, scan_points=scan_points)
    bound = cls.theorem_counts if cls.theorem_counts is not None else cls.possible_interior_counts
    return AsymptoticSummary(
        k=init.k,
        x_inf=x_inf,
        y_inf=y_inf,
        z_inf=z_inf,
        tau_inf=tau_from_x(init, x_inf),
        degenerate=degenerate,
        zero_count_bound=bound,
        zeros=cls.zeros,
    )
