"""The full branching process with immigration and its observables.

At each time k, J_k immigrants found an independent cohort; Y_m totals
all cohorts alive at time m.  The engine steps every cohort's hybrid
exact/fluid kernel jointly, one vectorized draw per generation across the
exact-regime cohorts, and records each cohort's log-size trajectory in a
matrix row.  Accumulation into Y is a logaddexp fold over rows in
ascending birth order, which makes the truncated variant (cohorts with
log J_k above a cutoff excluded) provably <= the full process pointwise,
seed by seed: the truncated run consumes the random stream identically
and merely drops rows from the fold.

Immigrant draws and offspring draws come from separate counter-based
substreams of the run seed, so the immigrant sequence is reproducible on
its own (the coupling point for the conditional-mean proxy Z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import streams
from .gw import FluidConfig, fluid_descent_steps, fluid_fill
from .immigration import ImmigrationLaw
from .lognum import LogMagnitude, as_log_array
from .offspring import OffspringFamily
from .paths import CadlagPath

__all__ = [
    "GwiRun",
    "CoupledPaths",
    "simulate_y_path",
    "truncated_y_path",
    "conditional_mean_path",
    "immigrant_log_draws",
    "normalized_observable",
    "run_coupled",
]

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class GwiRun:
    """Scaling parameters and laws for one process realization."""

    n: int
    horizon: float
    family: OffspringFamily
    law: ImmigrationLaw
    config: FluidConfig = field(default_factory=FluidConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("time scale n must be >= 1")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")

    @property
    def num_steps(self) -> int:
        """[n*T]: index of the last simulated generation."""
        return int(math.floor(self.n * self.horizon + 1e-9))

    def to_config(self) -> dict:
        return {
            "n": self.n,
            "horizon": self.horizon,
            "offspring": self.family.to_config(),
            "immigration": self.law.to_config(),
            "fluid": self.config.to_config(),
            "seed": self.seed,
        }

    @staticmethod
    def from_config(cfg: dict) -> "GwiRun":
        return GwiRun(
            n=int(cfg["n"]),
            horizon=float(cfg["horizon"]),
            family=OffspringFamily.from_config(cfg["offspring"]),
            law=ImmigrationLaw.from_config(cfg["immigration"]),
            config=FluidConfig.from_config(cfg.get("fluid", {})),
            seed=int(cfg.get("seed", 0)),
        )


@dataclass(frozen=True)
class CoupledPaths:
    """Raw log-domain outputs of one engine pass."""

    immigrant_log_j: np.ndarray        # (L,) log J_k
    y_log: np.ndarray                  # (L,) log Y_m
    truncated_log: np.ndarray | None   # (L,) log of the truncated sum, if requested


def _cohort_matrix(run: GwiRun, immigrant_log_j: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Immigrant log draws and the (L, L) matrix A[k, m] = log cohort_k(m-k).

    `immigrant_log_j` overrides the immigration draws (deterministic test
    hook); the offspring stream is consumed identically either way.
    """
    size = run.num_steps + 1
    if immigrant_log_j is None:
        imm_rng = streams.substream(run.seed, streams.IMMIGRATION)
        jlog = run.law.sample_log_j_array(imm_rng, size)
    else:
        jlog = np.asarray(immigrant_log_j, dtype=np.float64)
        if jlog.shape != (size,):
            raise ValueError(f"immigrant log sequence must have length {size}")

    off_rng = streams.substream(run.seed, streams.OFFSPRING)
    log_m = math.log(run.config.exactness_threshold)
    log_mu = math.log(run.family.mean)
    refine = run.config.refine_on_descent

    matrix = np.full((size, size), _NEG_INF)
    counts = np.zeros(size, dtype=np.int64)          # exact-regime cohort sizes
    in_exact = np.zeros(size, dtype=bool)
    reentries: dict[int, list[tuple[int, int]]] = {}  # time -> [(cohort, count)]

    def start_fluid(k: int, t0: int, log_value: float) -> None:
        """Fill row k from column t0+1 on; schedule exact re-entry on descent."""
        remaining = size - 1 - t0
        if remaining <= 0:
            return
        if log_mu >= 0 or not refine:
            matrix[k, t0 + 1 :] = fluid_fill(log_value, log_mu, remaining)
            return
        j = fluid_descent_steps(log_value, log_mu, log_m)
        if j >= remaining + 1:
            matrix[k, t0 + 1 :] = fluid_fill(log_value, log_mu, remaining)
            return
        if j > 1:
            matrix[k, t0 + 1 : t0 + j] = fluid_fill(log_value, log_mu, j - 1)
        count = int(round(math.exp(log_value + j * log_mu)))
        matrix[k, t0 + j] = math.log(count) if count > 0 else _NEG_INF
        if count > 0:
            reentries.setdefault(t0 + j, []).append((k, count))

    for m in range(size):
        # cohort m is born with J_m individuals at age 0
        jl = jlog[m]
        matrix[m, m] = jl
        if jl <= log_m:
            counts[m] = int(round(math.exp(jl)))  # J is integer by construction
            in_exact[m] = True
        else:
            start_fluid(m, m, jl)

        # fluid cohorts that descended to the threshold re-enter exactly now
        for k, count in reentries.pop(m, ()):  # noqa: B020 - deterministic order
            counts[k] = count
            in_exact[k] = True

        if m == size - 1:
            break

        idx = np.nonzero(in_exact)[0]  # ascending cohort index: deterministic draw order
        if idx.size:
            nxt = run.family.sample_generations(counts[idx], off_rng)
            with np.errstate(divide="ignore"):
                matrix[idx, m + 1] = np.where(nxt > 0, np.log(np.maximum(nxt, 1)), _NEG_INF)
            counts[idx] = nxt
            dead = idx[nxt == 0]
            in_exact[dead] = False
            big = idx[nxt > run.config.exactness_threshold]
            for k in big:
                in_exact[k] = False
                start_fluid(int(k), m + 1, float(matrix[k, m + 1]))

    return jlog, matrix


def _fold_rows(matrix: np.ndarray, include: np.ndarray | None = None) -> np.ndarray:
    """logaddexp fold of cohort rows in ascending birth order."""
    size = matrix.shape[0]
    out = np.full(size, _NEG_INF)
    for k in range(size):
        if include is not None and not include[k]:
            continue
        np.logaddexp(out[k:], matrix[k, k:], out=out[k:])
    return out


def run_coupled(
    run: GwiRun,
    gamma: float | None = None,
    c_n: float | None = None,
    immigrant_log_j: np.ndarray | None = None,
) -> CoupledPaths:
    """One engine pass; optionally also the truncated accumulation.

    When `gamma` is given, cohorts with log J_k > gamma * c_n are excluded
    from the truncated fold (they are still simulated, so the stream
    consumption — and hence every cohort realization — matches the full run).
    """
    jlog, matrix = _cohort_matrix(run, immigrant_log_j)
    y_log = _fold_rows(matrix)
    truncated = None
    if gamma is not None:
        if not (0 < gamma < 1):
            raise ValueError("gamma must lie in (0, 1)")
        if c_n is None or c_n <= 0:
            raise ValueError("c_n must be positive")
        truncated = _fold_rows(matrix, include=jlog <= gamma * c_n)
    return CoupledPaths(immigrant_log_j=jlog, y_log=y_log, truncated_log=truncated)


def simulate_y_path(run: GwiRun, immigrant_log_j: np.ndarray | None = None) -> list[LogMagnitude]:
    """Y_0..Y_[nT] in log domain; identical seeds reproduce identical output."""
    bundle = run_coupled(run, immigrant_log_j=immigrant_log_j)
    return [LogMagnitude(float(v)) for v in bundle.y_log]


def truncated_y_path(run: GwiRun, gamma: float, c_n: float) -> list[LogMagnitude]:
    """The immigration process keeping only cohorts with log J_k <= gamma*c_n."""
    bundle = run_coupled(run, gamma=gamma, c_n=c_n)
    assert bundle.truncated_log is not None
    return [LogMagnitude(float(v)) for v in bundle.truncated_log]


def immigrant_log_draws(run: GwiRun) -> np.ndarray:
    """The run's immigrant log J sequence (the coupling point for Z)."""
    imm_rng = streams.substream(run.seed, streams.IMMIGRATION)
    return run.law.sample_log_j_array(imm_rng, run.num_steps + 1)


def conditional_mean_path(
    run: GwiRun, immigrant_logs: Sequence[LogMagnitude] | np.ndarray
) -> list[LogMagnitude]:
    """Z_m = sum_{k<=m} mu^{m-k} J_k from the coupled immigrant draws."""
    jlog = as_log_array(immigrant_logs)
    log_mu = math.log(run.family.mean)
    out = np.empty(jlog.shape[0])
    acc = _NEG_INF
    for m, jl in enumerate(jlog):
        acc = np.logaddexp(acc + log_mu, jl) if m else jl
        out[m] = acc
    return [LogMagnitude(float(v)) for v in out]


def normalized_observable(
    values: Sequence[LogMagnitude] | np.ndarray,
    norm: float,
    n: int,
    supercritical_correction: float | None = None,
) -> CadlagPath:
    """Step path t -> log⁺(values[floor(n t)] * mu^{-floor(n t)}) / norm.

    The correction factor (pass mu > 1) removes the deterministic mean
    growth so supercritical observables have a nondegenerate limit.
    """
    if norm <= 0:
        raise ValueError("norm must be positive")
    lv = as_log_array(values)
    if supercritical_correction is not None:
        if supercritical_correction <= 0:
            raise ValueError("correction mean must be positive")
        lv = lv - np.arange(lv.shape[0]) * math.log(supercritical_correction)
    obs = np.maximum(lv, 0.0) / norm
    times = np.arange(lv.shape[0]) / n
    return CadlagPath.step(times, obs)
