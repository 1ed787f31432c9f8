"""Exact stochastic simulation of the finite-N rumor chain to absorption.

Two modes with identically distributed final states:

  * exact: Gillespie. Exponential holding times at total rate (N-1)*Y plus a
    categorical draw for the next event. Produces absorption_time and can
    record the full trajectory.
  * embedded: the jump chain only. The time change that divides all rates by
    the spreader count Y leaves the jump probabilities and the absorbed state
    untouched, so final-size studies run here (about twice as fast, no
    exponentials).

The categorical weights [X, Y_1..Y_{k-1}, N-1-X-sum(Y_i)] always total N-1,
so each jump consumes exactly one uniform scaled by N-1; uniforms (and
standard exponentials in exact mode) are drawn in blocks of 8192, which cuts
RNG overhead to roughly 250 ns per jump in the pure-Python loop.

Trajectory recording is off by default; memory is O(jump_count) when on,
and jump_count is hard-bounded by k*N + N (each individual climbs at most k
awareness levels and each spreader stifles exactly once).
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Union

import numpy as np

from .model import ModelParams, PopulationState

__all__ = [
    "Seed",
    "FinalOutcome",
    "Trajectory",
    "simulate_exact",
    "simulate_embedded",
    "replicate",
    "default_workers",
]

# int or int-tuple seeds feed default_rng; a Generator is used as-is (shared
# stream), which bulk callers use to avoid per-replica construction cost
Seed = Union[int, tuple, np.random.Generator]

_BLOCK = 8192


@dataclass(frozen=True)
class Trajectory:
    """Event times and visited states (rows of X, Y_1..Y_{k-1}, Y, Z)."""

    times: tuple[float, ...]
    states: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class FinalOutcome:
    """Absorbed state (spreaders = 0) plus run metadata.

    absorption_time is None for embedded runs; trajectory is None unless
    recording was requested.
    """

    final_state: PopulationState
    jump_count: int
    absorption_time: float | None = None
    trajectory: Trajectory | None = None


def _as_generator(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _run(
    params: ModelParams,
    init: PopulationState,
    rng: np.random.Generator,
    exact: bool,
    record: bool,
) -> FinalOutcome:
    init.validate(params)
    k, n = params.k, params.n
    x = init.ignorants
    aw = list(init.aware)
    y = init.spreaders
    z = init.stiflers
    nm1 = n - 1
    max_jumps = k * n + n

    jumps = 0
    t = 0.0
    times = [0.0] if record else None
    path = [(x, *aw, y, z)] if record else None

    # a run can never need more than max_jumps draws, so small populations
    # get right-sized blocks instead of the full buffer
    block = min(_BLOCK, max_jumps)
    us = rng.random(block)
    ui = 0
    if exact:
        es = rng.standard_exponential(block)
        ei = 0

    while y > 0:
        jumps += 1
        if jumps > max_jumps:
            raise RuntimeError(
                f"jump count exceeded the hard bound {max_jumps}; "
                "transition bookkeeping is broken"
            )
        if exact:
            if ei == block:
                es = rng.standard_exponential(block)
                ei = 0
            t += es[ei] / (nm1 * y)
            ei += 1
        if ui == block:
            us = rng.random(block)
            ui = 0
        u = us[ui] * nm1
        ui += 1

        if u < x:
            x -= 1
            if k == 1:
                y += 1
            else:
                aw[0] += 1
        else:
            acc = x
            hit = -1
            for i in range(k - 1):
                acc += aw[i]
                if u < acc:
                    hit = i
                    break
            if hit >= 0:
                aw[hit] -= 1
                if hit == k - 2:
                    y += 1
                else:
                    aw[hit + 1] += 1
            else:
                y -= 1
                z += 1
        if record:
            times.append(t)
            path.append((x, *aw, y, z))

    final = PopulationState(ignorants=x, aware=tuple(aw), spreaders=y, stiflers=z)
    return FinalOutcome(
        final_state=final,
        jump_count=jumps,
        absorption_time=t if exact else None,
        trajectory=Trajectory(tuple(times), tuple(path)) if record else None,
    )


def simulate_exact(
    params: ModelParams, init: PopulationState, seed: Seed, record: bool = False
) -> FinalOutcome:
    """Continuous-time run to absorption; deterministic given the seed.

    A start with zero spreaders returns immediately with absorption_time 0.
    """
    return _run(params, init, _as_generator(seed), exact=True, record=record)


def simulate_embedded(params: ModelParams, init: PopulationState, seed: Seed) -> FinalOutcome:
    """Jump-chain run to absorption; final state distributed as in exact mode."""
    return _run(params, init, _as_generator(seed), exact=False, record=False)


def _one(
    params: ModelParams, init: PopulationState, base_seed: int, index: int, mode: str
) -> FinalOutcome:
    rng = np.random.default_rng((base_seed, index))
    return _run(params, init, rng, exact=(mode == "exact"), record=False)


def _chunk(
    params: ModelParams, init: PopulationState, base_seed: int, mode: str, lo: int, hi: int
) -> list[FinalOutcome]:
    return [_one(params, init, base_seed, i, mode) for i in range(lo, hi)]


def default_workers() -> int:
    """Worker count for replicate: the RUMORLAB_THREADS cap, default serial."""
    env = os.environ.get("RUMORLAB_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def replicate(
    params: ModelParams,
    init: PopulationState,
    n_replicas: int,
    base_seed: int,
    mode: str = "embedded",
    workers: int | None = None,
) -> list[FinalOutcome]:
    """n_replicas independent runs, replica i seeded by (base_seed, i).

    The per-index seeding makes the result list identical whether replicas
    run serially or fan out across processes (workers > 1); outcomes are
    placed by index, never by completion order.
    """
    if n_replicas < 1:
        raise ValueError(f"n_replicas must be >= 1, got {n_replicas}")
    if mode not in ("exact", "embedded"):
        raise ValueError(f"mode must be 'exact' or 'embedded', got {mode!r}")
    if workers is None:
        workers = default_workers()
    if workers <= 1 or n_replicas < 2 * workers:
        return _chunk(params, init, base_seed, mode, 0, n_replicas)

    # a few chunks per worker for load balance; order restored by index
    n_chunks = min(n_replicas, workers * 4)
    bounds = np.linspace(0, n_replicas, n_chunks + 1, dtype=int)
    out: list[FinalOutcome | None] = [None] * n_replicas
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            (lo, pool.submit(_chunk, params, init, base_seed, mode, int(lo), int(hi)))
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for lo, fut in futures:
            chunk = fut.result()
            out[lo : lo + len(chunk)] = chunk
    return out  # type: ignore[return-value]
