"""Monte Carlo validation: replicated simulations against the limit theory.

run_lln checks the strong law (final class proportions against x_inf,
y_{i,inf}, z_inf); run_clt checks the fluctuation covariance against the
numeric Sigma via bootstrap confidence intervals. Both are stochastic tests
with thresholds (|z| <= 4, 99.9% CI) chosen so a full validation run has
well under 1% false-failure probability; on a failure, rerun with a fresh
base seed before suspecting the code.

Reports are reproducible bit for bit from (config, base_seed): replicas are
seeded per index and aggregation is order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import asymptotics
from . import clt as clt_engine
from .model import InitialConfiguration, ModelParams, PopulationState
from .simulate import replicate

__all__ = [
    "ExperimentConfig",
    "LlnReport",
    "CltReport",
    "SweepRow",
    "initial_counts",
    "run_lln",
    "run_clt",
    "sweep_k",
]


def initial_counts(init: InitialConfiguration, n: int) -> PopulationState:
    """Integer seed state for population size n from limiting fractions.

    Floor each class, send the rounding remainder to stiflers, then force at
    least one spreader (taking it from the ignorants): the model needs a
    spreading seed, and the O(1/n) perturbation vanishes in the limit.
    """
    x = math.floor(init.x0 * n)
    aware = [math.floor(v * n) for v in init.yi0]
    y = math.floor(init.y0 * n)
    z = n - x - sum(aware) - y
    if y == 0:
        if x == 0:
            raise ValueError("cannot seed a spreader: no ignorants to convert")
        x -= 1
        y = 1
    return PopulationState(ignorants=x, aware=tuple(aware), spreaders=y, stiflers=z)


@dataclass(frozen=True)
class ExperimentConfig:
    """A replicated-simulation experiment; init defaults to standard for k."""

    k: int
    n: int
    n_replicas: int
    base_seed: int
    mode: str = "embedded"
    init: InitialConfiguration | None = None

    def __post_init__(self) -> None:
        if self.n_replicas < 2:
            raise ValueError(f"n_replicas must be >= 2, got {self.n_replicas}")
        if self.mode not in ("exact", "embedded"):
            raise ValueError(f"mode must be 'exact' or 'embedded', got {self.mode!r}")
        if self.init is None:
            object.__setattr__(self, "init", InitialConfiguration.standard(self.k))
        elif self.init.k != self.k:
            raise ValueError(f"init encodes k={self.init.k}, config says k={self.k}")
        ModelParams(self.k, self.n)  # validates k, n

    @property
    def params(self) -> ModelParams:
        return ModelParams(k=self.k, n=self.n)

    @property
    def init_counts(self) -> PopulationState:
        return initial_counts(self.init, self.n)

    def to_kv_file(self, path: str | Path) -> None:
        lines = [
            f"k = {self.k}",
            f"n = {self.n}",
            f"n_replicas = {self.n_replicas}",
            f"base_seed = {self.base_seed}",
            f"mode = {self.mode}",
            f"x0 = {self.init.x0!r}",
            f"yi0 = {','.join(repr(v) for v in self.init.yi0)}",
            f"y0 = {self.init.y0!r}",
        ]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_kv_file(cls, path: str | Path) -> "ExperimentConfig":
        kv: dict[str, str] = {}
        for raw in Path(path).read_text().splitlines():
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed config line: {raw!r}")
            kv[key.strip()] = value.strip()
        yi0 = tuple(float(v) for v in kv.get("yi0", "").split(",") if v != "")
        init = InitialConfiguration(
            x0=float(kv.get("x0", "1.0")), yi0=yi0, y0=float(kv.get("y0", "0.0"))
        )
        return cls(
            k=int(kv["k"]),
            n=int(kv["n"]),
            n_replicas=int(kv["n_replicas"]),
            base_seed=int(kv["base_seed"]),
            mode=kv.get("mode", "embedded"),
            init=init,
        )


def _final_fractions(config: ExperimentConfig, workers: int | None) -> np.ndarray:
    outcomes = replicate(
        config.params,
        config.init_counts,
        config.n_replicas,
        config.base_seed,
        mode=config.mode,
        workers=workers,
    )
    counts = np.array([o.final_state.counts() for o in outcomes], dtype=float)
    return counts / config.n


def _class_names(k: int) -> tuple[str, ...]:
    return ("x", *(f"y_{i}" for i in range(1, k)), "y", "z")


@dataclass(frozen=True)
class LlnReport:
    """Per-class comparison of mean final proportions with the limit values."""

    k: int
    n: int
    n_replicas: int
    mode: str
    base_seed: int
    class_names: tuple[str, ...]
    means: tuple[float, ...]
    theory: tuple[float, ...]
    std_errors: tuple[float, ...]
    z_scores: tuple[float, ...]
    passes: tuple[bool, ...]
    all_pass: bool

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "n_replicas": self.n_replicas,
            "mode": self.mode,
            "base_seed": self.base_seed,
            "classes": [
                {
                    "name": nm,
                    "mean": m,
                    "theory": th,
                    "std_error": se,
                    "z": z,
                    "pass": bool(p),
                }
                for nm, m, th, se, z, p in zip(
                    self.class_names,
                    self.means,
                    self.theory,
                    self.std_errors,
                    self.z_scores,
                    self.passes,
                )
            ],
            "all_pass": bool(self.all_pass),
        }

    def csv_lines(self) -> list[str]:
        out = ["class,mean,theory,std_error,z,pass"]
        for nm, m, th, se, z, p in zip(
            self.class_names, self.means, self.theory, self.std_errors, self.z_scores, self.passes
        ):
            out.append(f"{nm},{m:.10g},{th:.10g},{se:.10g},{z:.6g},{int(p)}")
        return out


def run_lln(config: ExperimentConfig, workers: int | None = None) -> LlnReport:
    """Strong-law check: each class mean within 4 standard errors of theory.

    Classes with zero variance (the spreader count is always exactly 0 at
    absorption) get z = 0 on an exact match and z = inf otherwise.
    """
    fractions = _final_fractions(config, workers)
    x_inf = asymptotics.x_infinity(config.init)
    y_inf, z_inf = asymptotics.y_infinity(config.init, x_inf)
    theory = np.array([x_inf, *y_inf, 0.0, z_inf])
    means = fractions.mean(axis=0)
    se = fractions.std(axis=0, ddof=1) / math.sqrt(config.n_replicas)
    z = np.empty_like(means)
    for j in range(len(means)):
        if se[j] > 0:
            z[j] = (means[j] - theory[j]) / se[j]
        else:
            z[j] = 0.0 if means[j] == theory[j] else math.inf
    passes = tuple(bool(abs(v) <= 4.0) for v in z)
    return LlnReport(
        k=config.k,
        n=config.n,
        n_replicas=config.n_replicas,
        mode=config.mode,
        base_seed=config.base_seed,
        class_names=_class_names(config.k),
        means=tuple(means),
        theory=tuple(theory),
        std_errors=tuple(se),
        z_scores=tuple(z),
        passes=passes,
        all_pass=all(passes),
    )


@dataclass(frozen=True)
class CltReport:
    """Sample covariance of sqrt(n)-scaled fluctuations vs the theory Sigma.

    ci_lo/ci_hi are entrywise bootstrap percentile bounds; an entry passes
    when the theoretical value lies inside its interval. mean_fluct and
    mean_fluct_se allow the centering self-check (the mean fluctuation
    should vanish at the standard-error scale).
    """

    k: int
    n: int
    n_replicas: int
    mode: str
    base_seed: int
    n_bootstrap: int
    ci_level: float
    sample_cov: np.ndarray
    theory_sigma: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    passes: np.ndarray
    all_pass: bool
    mean_fluct: np.ndarray
    mean_fluct_se: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "n_replicas": self.n_replicas,
            "mode": self.mode,
            "base_seed": self.base_seed,
            "n_bootstrap": self.n_bootstrap,
            "ci_level": self.ci_level,
            "sample_cov": self.sample_cov.tolist(),
            "theory_sigma": self.theory_sigma.tolist(),
            "ci_lo": self.ci_lo.tolist(),
            "ci_hi": self.ci_hi.tolist(),
            "passes": self.passes.astype(bool).tolist(),
            "all_pass": bool(self.all_pass),
            "mean_fluct": self.mean_fluct.tolist(),
            "mean_fluct_se": self.mean_fluct_se.tolist(),
        }

    def csv_lines(self) -> list[str]:
        out = ["i,j,sample,theory,ci_lo,ci_hi,pass"]
        k = self.sample_cov.shape[0]
        for i in range(k):
            for j in range(k):
                out.append(
                    f"{i},{j},{self.sample_cov[i, j]:.10g},{self.theory_sigma[i, j]:.10g},"
                    f"{self.ci_lo[i, j]:.10g},{self.ci_hi[i, j]:.10g},{int(self.passes[i, j])}"
                )
        return out


def run_clt(
    config: ExperimentConfig,
    n_bootstrap: int = 1000,
    ci_level: float = 0.999,
    theory_sigma: np.ndarray | None = None,
    workers: int | None = None,
) -> CltReport:
    """Fluctuation-covariance check against the numeric CLT pipeline."""
    if config.n_replicas < 100:
        raise ValueError("need at least 100 replicas for a covariance estimate")
    fractions = _final_fractions(config, workers)
    x_inf = asymptotics.x_infinity(config.init)
    y_inf, _ = asymptotics.y_infinity(config.init, x_inf)
    center = np.array([x_inf, *y_inf])
    fluct = math.sqrt(config.n) * (fractions[:, : config.k] - center)

    sample_cov = np.atleast_2d(np.cov(fluct, rowvar=False, ddof=1))
    if theory_sigma is None:
        theory_sigma = clt_engine.sigma(config.init)
    theory_sigma = np.atleast_2d(np.asarray(theory_sigma, dtype=float))

    rng = np.random.default_rng((config.base_seed, 0xB007))
    boot = np.empty((n_bootstrap, config.k, config.k))
    for b in range(n_bootstrap):
        idx = rng.integers(0, config.n_replicas, config.n_replicas)
        boot[b] = np.atleast_2d(np.cov(fluct[idx], rowvar=False, ddof=1))
    alpha = 100.0 * (1.0 - ci_level) / 2.0
    ci_lo = np.percentile(boot, alpha, axis=0)
    ci_hi = np.percentile(boot, 100.0 - alpha, axis=0)
    passes = (ci_lo <= theory_sigma) & (theory_sigma <= ci_hi)

    return CltReport(
        k=config.k,
        n=config.n,
        n_replicas=config.n_replicas,
        mode=config.mode,
        base_seed=config.base_seed,
        n_bootstrap=n_bootstrap,
        ci_level=ci_level,
        sample_cov=sample_cov,
        theory_sigma=theory_sigma,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        passes=passes,
        all_pass=bool(passes.all()),
        mean_fluct=fluct.mean(axis=0),
        mean_fluct_se=fluct.std(axis=0, ddof=1) / math.sqrt(config.n_replicas),
    )


@dataclass(frozen=True)
class SweepRow:
    k: int
    x_inf: float
    y_inf: tuple[float, ...]
    z_inf: float


def sweep_k(k_min: int, k_max: int) -> list[SweepRow]:
    """Limiting proportions for the standard configuration, k = k_min..k_max."""
    if not 1 <= k_min <= k_max:
        raise ValueError(f"need 1 <= k_min <= k_max, got {k_min}, {k_max}")
    rows = []
    for k in range(k_min, k_max + 1):
        init = InitialConfiguration.standard(k)
        x_inf = asymptotics.x_infinity(init)
        y_inf, z_inf = asymptotics.y_infinity(init, x_inf)
        rows.append(SweepRow(k=k, x_inf=x_inf, y_inf=y_inf, z_inf=z_inf))
    return rows
