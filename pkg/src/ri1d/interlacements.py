"""The one-dimensional random interlacement process at level alpha.

A Poisson cloud of conditioned-walk trajectories: the number hitting a finite
set A is Poisson(alpha * cap(A ∪ {0})), the vacant set law is the exponential
of that capacity, and the local time at a site x is compound Poisson --
Poisson(alpha*x/2) many geometric(1/(2x)) visit counts. The window sampler
realizes the process trajectory by trajectory inside a finite symmetric
window and is exact for all within-window functionals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .capacity import IntervalSet, capacity_hat
from .rngs import RngState


@dataclass(frozen=True)
class Level:
    """Process intensity alpha > 0."""

    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"level must be positive, got {self.alpha}")


def _alpha(level) -> float:
    """Accept a Level or a bare positive float."""
    a = level.alpha if isinstance(level, Level) else float(level)
    if not a > 0:
        raise ValueError(f"level must be positive, got {a}")
    return a


@dataclass(frozen=True)
class WindowSample:
    """One draw of the interlacement restricted to the window [-L, L].

    ``visits`` maps visited sites (never 0) to their visit counts;
    ``vacant_interval`` is (neg_edge, pos_edge), the extreme visited sites
    around the origin, with sentinels -L-1 / L+1 when a side is untouched.
    """

    half_width: int
    trajectory_count: int
    visits: dict[int, int] = field(default_factory=dict)
    vacant_interval: tuple[int, int] = (0, 0)


@dataclass(frozen=True)
class LocalTimeLaw:
    """Exact pmf of the local time at a site, truncated with known tail mass."""

    x: int
    alpha: float
    pmf: np.ndarray
    tail_mass: float
    truncation_warning: bool

    @property
    def s_max(self) -> int:
        return len(self.pmf) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.pmf)), self.pmf))

    def variance(self) -> float:
        s = np.arange(len(self.pmf))
        m = self.mean()
        return float(np.dot((s - m) ** 2, self.pmf))


def local_time_mean(x: int, level) -> float:
    """Closed-form mean of the local time: alpha * x^2."""
    return _alpha(level) * x * x


def local_time_variance(x: int, level) -> float:
    """Closed-form variance of the local time: alpha * (4x - 1) * x^2."""
    a = _alpha(level)
    return a * (4 * x - 1) * x * x


def vacant_prob_exact(A: IntervalSet, level) -> float:
    """P[A is vacant] = exp(-alpha * cap(A ∪ {0}))."""
    return math.exp(-_alpha(level) * capacity_hat(A))


def sample_trajectory_count(A: IntervalSet, level, rng: RngState) -> int:
    """Poisson draw of the number of trajectories hitting A."""
    mean = _alpha(level) * capacity_hat(A)
    return int(rng.generator().poisson(mean))


# -- window sampler -----------------------------------------------------------

def _simulate_window_batch(alpha: float, L: int, M: int,
                           gen: np.random.Generator, track_site: int | None = None):
    """Simulate M independent window draws, trajectory by trajectory.

    Returns (visit counts, trajectory counts per replicate, and, when
    track_site is given, the per-replicate number of trajectories that touch
    that site). Visit counts are indexed by site + L, so column L (site 0) is
    always zero. Each trajectory enters at -L or +L with probability 1/2 and
    evolves with the conditioned-walk kernel on its half-line; excursions past
    the window edge are collapsed into a single exact Bernoulli(L/(L+1))
    return event, which is unbiased for every within-window functional.
    """
    if L < 1:
        raise ValueError(f"half-width must be >= 1, got {L}")
    counts = np.zeros((M, 2 * L + 1), dtype=np.int64)
    n_traj = gen.poisson(alpha * L, M)
    total = int(n_traj.sum())
    rep = np.repeat(np.arange(M, dtype=np.int64), n_traj)
    sign = np.where(gen.random(total) < 0.5, 1, -1).astype(np.int64)
    pos = np.full(total, L, dtype=np.int64)
    hit_tracked = np.zeros(M, dtype=np.int64)
    touched = np.zeros(total, dtype=bool)
    np.add.at(counts, (rep, L + sign * L), 1)  # entrance counts as a visit
    if track_site is not None:
        touched |= sign * pos == track_site
        np.add.at(hit_tracked, rep[touched], 1)
    return_p = L / (L + 1)
    while pos.size:
        u = gen.random(pos.size)
        nxt = pos + np.where(u < (pos + 1) / (2 * pos), 1, -1)
        out = nxt == L + 1
        if out.any():
            back = gen.random(int(out.sum())) < return_p
            nxt[out] = np.where(back, L, -1)  # -1 marks a finished trajectory
        alive = nxt >= 1
        pos, rep, sign = nxt[alive], rep[alive], sign[alive]
        if track_site is not None:
            touched = touched[alive]
            newly = (sign * pos == track_site) & ~touched
            touched |= newly
            np.add.at(hit_tracked, rep[newly], 1)
        np.add.at(counts, (rep, L + sign * pos), 1)
    return counts, n_traj, (hit_tracked if track_site is not None else None)


def sample_window(level, L: int, rng: RngState) -> WindowSample:
    """One interlacement draw restricted to the window [-L, L]."""
    counts, n_traj, _ = _simulate_window_batch(_alpha(level), L, 1, rng.generator())
    row = counts[0]
    visits = {s - L: int(c) for s, c in enumerate(row) if c > 0}
    pos_sites = [s for s in visits if s > 0]
    neg_sites = [s for s in visits if s < 0]
    pos_edge = min(pos_sites) if pos_sites else L + 1
    neg_edge = max(neg_sites) if neg_sites else -L - 1
    return WindowSample(
        half_width=L,
        trajectory_count=int(n_traj[0]),
        visits=visits,
        vacant_interval=(neg_edge, pos_edge),
    )


# -- local times --------------------------------------------------------------

def sample_local_time(x: int, level, rng: RngState) -> int:
    """One draw of the local time at x: Poisson(alpha*x/2) geometric batches."""
    return int(sample_local_times(x, level, 1, rng.generator())[0])


def sample_local_times(x: int, level, M: int, gen: np.random.Generator,
                       chunk: int = 20000) -> np.ndarray:
    """Vectorized batch of M independent local-time draws at site x."""
    if x < 1:
        raise ValueError(f"site must be >= 1, got {x}")
    a = _alpha(level)
    lam = a * x / 2
    p = 1 / (2 * x)
    out = np.empty(M, dtype=np.int64)
    for lo in range(0, M, chunk):
        m = min(chunk, M - lo)
        n = gen.poisson(lam, m)
        total = int(n.sum())
        g = gen.geometric(p, total)
        rep = np.repeat(np.arange(m), n)
        out[lo:lo + m] = np.bincount(rep, weights=g, minlength=m).astype(np.int64)
    return out


def local_time_cf(x: int, level, t) -> complex:
    """Characteristic function exp(alpha x^2 (e^{it}-1) / (2x - (2x-1) e^{it}))."""
    if x < 1:
        raise ValueError(f"site must be >= 1, got {x}")
    a = _alpha(level)
    e = np.exp(1j * np.asarray(t, dtype=np.float64))
    val = np.exp(a * x * x * (e - 1) / (2 * x - (2 * x - 1) * e))
    return complex(val) if np.ndim(t) == 0 else val


def _default_s_max(x: int, alpha: float, tail: float = 1e-12) -> int:
    """Smallest truncation point with Chernoff tail bound below ``tail``.

    Uses the compound-Poisson mgf exp(lam*(M_V(theta)-1)) with geometric
    severity, minimized over a theta grid inside its domain.
    """
    lam = alpha * x / 2
    p = 1 / (2 * x)
    q = 1 - p
    theta = np.linspace(1e-8, -math.log(q) * 0.999, 256)
    et = np.exp(theta)
    log_mgf = lam * (p * et / (1 - q * et) - 1)
    s = max(8, int(math.ceil(lam / p)))  # start at the mean
    while s < 10**7:
        if np.min(log_mgf - theta * s) < math.log(tail):
            return s
        s = int(s * 1.3) + 8
    raise RuntimeError("could not locate a pmf truncation point")


def local_time_pmf(x: int, level, s_max: int | None = None) -> LocalTimeLaw:
    """Exact local-time pmf via the Panjer (compound Poisson) recursion.

    f(0) = exp(-lam); f(s) = (lam/s) * sum_{j=1..s} j g(j) f(s-j) with
    lam = alpha*x/2 and geometric severity g(j) = p(1-p)^{j-1}, p = 1/(2x).
    Truncated at s_max (default: Chernoff tail below 1e-12); the result keeps
    the truncated tail mass and raises a warning flag when it exceeds 1e-9.
    """
    if x < 1:
        raise ValueError(f"site must be >= 1, got {x}")
    a = _alpha(level)
    if s_max is None:
        s_max = _default_s_max(x, a)
    if s_max < 0:
        raise ValueError(f"truncation point must be >= 0, got {s_max}")
    lam = a * x / 2
    p = 1 / (2 * x)
    q = 1 - p
    j = np.arange(1, s_max + 1, dtype=np.float64)
    jg = j * p * q ** (j - 1)
    f = np.zeros(s_max + 1)
    f[0] = math.exp(-lam)
    for s in range(1, s_max + 1):
        f[s] = lam / s * float(np.dot(jg[:s], f[s - 1::-1]))
    tail = max(0.0, 1.0 - float(f.sum()))
    return LocalTimeLaw(x=x, alpha=a, pmf=f, tail_mass=tail,
                        truncation_warning=tail > 1e-9)


def standardize_local_time(sample, x: int, level):
    """CLT standardization (sample - alpha x^2) / (x sqrt(alpha (4x-1)))."""
    if x < 1:
        raise ValueError(f"site must be >= 1, got {x}")
    a = _alpha(level)
    return (np.asarray(sample, dtype=np.float64) - a * x * x) / (x * math.sqrt(a * (4 * x - 1)))
