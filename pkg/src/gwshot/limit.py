"""Extremal shot noise limit processes driven by truncated Poisson measures.

Atoms (t_k, j_k) fall on [0,T] x (delta, inf) with intensity
LEB x mu_{a,b}, mu_{a,b}((x, inf]) = a x^{-b}.  The process value is

    v(t) = max( floor(t),  max over atoms with t_k <= t of j_k + (t - t_k)*s )

with floor(t) = t*s for s > 0 and 0 otherwise (the empty sup is zero, and
for s > 0 the accumulation of small atoms at (0,0) forces the true sup to
at least t*s).  Atoms below the truncation level delta contribute at most
delta on top of the floor, so truncated evaluation is exact to within an
additive delta.

Marginal distributions have closed forms; finite-dimensional ones are
void probabilities of the measure over a union of wedges, computed by
adaptive quadrature on the piecewise-affine lower envelope so that this
oracle stays independent of both the sampler and the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .paths import CadlagPath

__all__ = [
    "PrmParams",
    "AtomSet",
    "ShotNoiseSpec",
    "sample_atoms",
    "sample_atoms_band",
    "shot_noise_value",
    "shot_noise_path",
    "sample_shot_noise_marginal",
    "marginal_cdf_negslope",
    "marginal_cdf_extremal",
    "marginal_cdf_posslope",
    "fdd_cdf",
]

_SLOPE_EPS = 1e-8  # below this rate the negative/positive-slope CDFs use the s->0 limit


@dataclass(frozen=True)
class PrmParams:
    """Intensity parameters (a, b), horizon T, and truncation level delta."""

    a: float
    b: float
    horizon: float
    delta: float = 1e-3

    def __post_init__(self) -> None:
        if self.a <= 0 or self.b <= 0:
            raise ValueError("a and b must be positive")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if not self.delta > 0:
            raise ValueError("truncation level delta must be positive (delta = 0 has infinite intensity)")

    @property
    def expected_atoms(self) -> float:
        return self.horizon * self.a * self.delta ** (-self.b)

    def to_config(self) -> dict:
        return {"a": self.a, "b": self.b, "horizon": self.horizon, "delta": self.delta}

    @staticmethod
    def from_config(cfg: dict) -> "PrmParams":
        return PrmParams(
            a=float(cfg["a"]),
            b=float(cfg["b"]),
            horizon=float(cfg["horizon"]),
            delta=float(cfg.get("delta", 1e-3)),
        )


@dataclass(frozen=True)
class AtomSet:
    """Finite realization of the measure above the truncation level."""

    times: np.ndarray
    marks: np.ndarray
    params: PrmParams

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=np.float64)
        j = np.asarray(self.marks, dtype=np.float64)
        if t.shape != j.shape or t.ndim != 1:
            raise ValueError("times and marks must be 1-d arrays of equal length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "marks", j)

    def __len__(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class ShotNoiseSpec:
    """Atoms plus the common response slope s = log mu."""

    slope: float
    atoms: AtomSet


def _pareto_band_marks(
    a: float, b: float, lo: float, hi: float, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Marks conditioned to (lo, hi] under mu_{a,b}; hi may be inf."""
    u = 1.0 - rng.random(count)  # in (0, 1]
    hi_pow = 0.0 if math.isinf(hi) else hi ** (-b)
    return (u * (lo ** (-b) - hi_pow) + hi_pow) ** (-1.0 / b)


def sample_atoms_band(
    a: float, b: float, horizon: float, lo: float, hi: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Times and marks of the atoms with marks in (lo, hi] on [0, horizon]."""
    hi_pow = 0.0 if math.isinf(hi) else hi ** (-b)
    intensity = horizon * a * (lo ** (-b) - hi_pow)
    count = int(rng.poisson(intensity))
    times = rng.uniform(0.0, horizon, count)
    marks = _pareto_band_marks(a, b, lo, hi, count, rng)
    return times, marks


def sample_atoms(params: PrmParams, rng: np.random.Generator) -> AtomSet:
    """All atoms above the truncation level: count ~ Poisson(T a delta^{-b})."""
    times, marks = sample_atoms_band(
        params.a, params.b, params.horizon, params.delta, math.inf, rng
    )
    return AtomSet(times=times, marks=marks, params=params)


def _floor_value(slope: float, t: float | np.ndarray):
    return slope * np.asarray(t, dtype=np.float64) if slope > 0 else np.zeros_like(np.asarray(t, dtype=np.float64))


def shot_noise_value(spec: ShotNoiseSpec, t: float) -> float:
    """Process value at one time; exact to within +-delta of the untruncated sup."""
    params = spec.atoms.params
    if t < 0 or t > params.horizon + 1e-12:
        raise ValueError("evaluation time outside [0, horizon]")
    floor = spec.slope * t if spec.slope > 0 else 0.0
    mask = spec.atoms.times <= t
    if not mask.any():
        return float(floor)
    vals = spec.atoms.marks[mask] + (t - spec.atoms.times[mask]) * spec.slope
    return float(max(floor, vals.max()))


def shot_noise_path(spec: ShotNoiseSpec, grid: np.ndarray | None = None) -> CadlagPath:
    """Exact piecewise-affine path on [0, horizon].

    Between events the running max of affine responses with common slope s
    is itself affine with slope s, clamped at the floor; breakpoints sit at
    record atom times and at clamp crossings.  Grid times, when given, are
    inserted as extra breakpoints (the function is unchanged).
    """
    s = spec.slope
    end = spec.atoms.params.horizon
    order = np.argsort(spec.atoms.times, kind="stable")
    times = spec.atoms.times[order]
    marks = spec.atoms.marks[order]

    bps: list[float] = [0.0]
    vals: list[float] = [0.0]
    slopes: list[float] = [s if s > 0 else 0.0]

    def push(t: float, v: float, k: float) -> None:
        if t >= bps[-1] and t <= end:
            if t == bps[-1]:
                vals[-1], slopes[-1] = v, k
            else:
                bps.append(t)
                vals.append(v)
                slopes.append(k)

    if s > 0:
        # v(t) = s t + max(0, C): slope s throughout, jumps at positive records
        c_eff = 0.0
        for t_k, j_k in zip(times, marks):
            if t_k > end:
                break
            c = j_k - s * t_k
            if c > c_eff:
                push(float(t_k), float(s * t_k + c), s)
                c_eff = c
    else:
        # v(t) = max(0, s t + C): affine decay (or flat for s = 0) then clamp
        c = -math.inf
        prev = 0.0
        for idx in range(len(times) + 1):
            seg_end = float(times[idx]) if idx < len(times) else end
            if seg_end > prev and c > -math.inf:
                # emit the clamp crossing inside (prev, seg_end), if any
                if s < 0 and vals[-1] > 0.0:
                    t_x = -c / s
                    if prev < t_x < seg_end:
                        push(t_x, 0.0, 0.0)
            if idx == len(times):
                break
            t_k, j_k = float(times[idx]), float(marks[idx])
            if t_k > end:
                break
            c_new = j_k - s * t_k
            if c_new > c:
                c = c_new
                push(t_k, max(0.0, s * t_k + c), s if s < 0 else 0.0)
                if s < 0 and s * t_k + c <= 0.0:
                    # record already below the clamp (cannot happen for fresh atoms)
                    push(t_k, 0.0, 0.0)
            prev = max(prev, t_k)

    path = CadlagPath(np.array(bps), np.array(vals), np.array(slopes), end)
    if grid is not None and len(grid):
        path = _insert_breakpoints(path, np.asarray(grid, dtype=np.float64))
    return path


def _insert_breakpoints(path: CadlagPath, times: np.ndarray) -> CadlagPath:
    times = times[(times >= 0) & (times <= path.end_time)]
    merged = np.unique(np.concatenate([path.breakpoints, times]))
    idx = np.clip(np.searchsorted(path.breakpoints, merged, side="right") - 1, 0, None)
    vals = path.values[idx] + path.slopes[idx] * (merged - path.breakpoints[idx])
    return CadlagPath(merged, vals, path.slopes[idx], path.end_time)


def sample_shot_noise_marginal(
    a: float,
    b: float,
    slope: float,
    u: float,
    count: int,
    delta: float,
    rng: np.random.Generator,
    max_chunk_atoms: int = 4_000_000,
) -> np.ndarray:
    """`count` independent draws of the process value at time u.

    Equivalent in law to `shot_noise_value(sample_atoms(...), u)` repeated,
    but batched: atoms of many replicates are drawn flat and reduced
    segment-wise.
    """
    params = PrmParams(a=a, b=b, horizon=u, delta=delta)
    lam = params.expected_atoms
    floor = slope * u if slope > 0 else 0.0
    out = np.empty(count)
    chunk = max(1, int(max_chunk_atoms / max(lam, 1.0)))
    done = 0
    while done < count:
        m = min(chunk, count - done)
        nat = rng.poisson(lam, size=m)
        total = int(nat.sum())
        t = rng.uniform(0.0, u, total)
        j = _pareto_band_marks(a, b, delta, math.inf, total, rng)
        contrib = j + (u - t) * slope
        starts = np.zeros(m, dtype=np.int64)
        np.cumsum(nat[:-1], out=starts[1:])
        if total:
            seg = np.maximum.reduceat(contrib, np.minimum(starts, total - 1))
            seg = np.where(nat > 0, seg, -np.inf)
        else:
            seg = np.full(m, -np.inf)
        out[done : done + m] = np.maximum(seg, floor)
        done += m
    return out


# ----------------------------------------------------------------------
# Closed-form marginal distributions
# ----------------------------------------------------------------------


def marginal_cdf_negslope(r: float, s: float, u: float, x: float) -> float:
    """P{sup over t_k <= u of (j_k - (u - t_k) s) <= x} = (x/(x+su))^{r/s}.

    r is the mark-intensity constant, s > 0 the decay rate (process slope
    -s).  Near s = 0 the closed form degenerates to 0/0 and the extremal
    limit e^{-r u / x} is used instead.
    """
    if r <= 0 or s <= 0:
        raise ValueError("r and s must be positive")
    if x < 0 or u < 0:
        raise ValueError("x and u must be nonnegative")
    if u == 0:
        return 1.0
    if x == 0:
        return 0.0
    if s < _SLOPE_EPS:
        return marginal_cdf_extremal(r, 1.0, u, x)
    return (x / (x + s * u)) ** (r / s)


def marginal_cdf_extremal(a: float, b: float, u: float, x: float) -> float:
    """P{max mark on [0, u] <= x} = exp(-u a x^{-b}) for the slope-0 process."""
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if u < 0:
        raise ValueError("u must be nonnegative")
    if x <= 0:
        raise ValueError("x must be positive")
    return math.exp(-u * a * x ** (-b))


def marginal_cdf_posslope(r: float, s: float, u: float, x: float) -> float:
    """P{sup over t_k <= u of (j_k + (u - t_k) s) <= x} for growth rate s > 0.

    The value sits above the floor u*s almost surely, so the CDF vanishes
    for x <= u*s and equals ((x - us)/x)^{r/s} beyond it.
    """
    if r <= 0 or s <= 0:
        raise ValueError("r and s must be positive")
    if x < 0 or u < 0:
        raise ValueError("x and u must be nonnegative")
    if u == 0:
        return 1.0
    if s < _SLOPE_EPS:
        return marginal_cdf_extremal(r, 1.0, u, x) if x > 0 else 0.0
    if x <= u * s:
        return 0.0
    return ((x - u * s) / x) ** (r / s)


# ----------------------------------------------------------------------
# Finite-dimensional distributions
# ----------------------------------------------------------------------


def fdd_cdf(
    a: float,
    b: float,
    slope: float,
    times: np.ndarray,
    thresholds: np.ndarray,
) -> float:
    """P{process(u_i) <= x_i for all i} = exp(-Lambda(union of wedges)).

    The exceedance region is A = union_i {(t, y): t <= u_i, y > h_i(t)}
    with h_i(t) = x_i - s (u_i - t).  All boundary lines share slope s, so
    between consecutive u_i the lower envelope is the active line with the
    smallest intercept; Lambda integrates a * envelope^{-b} piecewise with
    adaptive quadrature (absolute tolerance 1e-10).
    """
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    u = np.asarray(times, dtype=np.float64)
    x = np.asarray(thresholds, dtype=np.float64)
    if u.ndim != 1 or u.size == 0 or u.shape != x.shape:
        raise ValueError("times and thresholds must be 1-d arrays of equal positive length")
    if np.any(u < 0) or (u.size > 1 and not np.all(np.diff(u) > 0)):
        raise ValueError("times must be nonnegative and strictly increasing")
    required = np.maximum(slope * u, 0.0)
    if np.any(x <= required):
        raise ValueError(
            "thresholds make the exceedance measure infinite "
            "(need x_i > s*u_i for s > 0, x_i > 0 otherwise)"
        )
    if u[-1] == 0.0:
        return 1.0

    # suffix minima of the intercepts c_i = x_i - s u_i give the envelope
    intercepts = x - slope * u
    suffix_min = np.minimum.accumulate(intercepts[::-1])[::-1]
    edges = np.concatenate([[0.0], u])

    total = 0.0
    for i in range(u.size):
        lo, hi = edges[i], edges[i + 1]
        if hi <= lo:
            continue
        c = suffix_min[i]
        piece, _ = integrate.quad(
            lambda t, c=c: a * (c + slope * t) ** (-b), lo, hi, epsabs=1e-12, epsrel=1e-12
        )
        total += piece
    return math.exp(-total)
