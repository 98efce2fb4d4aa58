"""Simple random walk on the positive integers conditioned to never hit 0.

The conditioned walk steps from x to x+1 with probability (x+1)/(2x) and to
x-1 otherwise; 1/x along the stopped trajectory is a martingale, which yields
closed forms for hitting and escape probabilities. The module also provides
reflection-principle path counting for the walk avoiding the origin and a
brute-force enumeration oracle for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rngs import RngState

#: Exhaustive enumeration budget: 2**delta step sequences.
ENUMERATION_MAX_STEPS = 24

#: Safety cap on total steps in absorption simulations (guards against RNG
#: pathology; absorption is a.s. finite so this never triggers in practice).
ABSORPTION_STEP_CAP = 10**9


@dataclass(frozen=True)
class WalkPath:
    """A finite trajectory of the conditioned walk.

    ``positions`` holds the m+1 visited sites including the start; consecutive
    sites differ by exactly 1 and every site is >= 1.
    """

    positions: tuple[int, ...]

    def __post_init__(self):
        if len(self.positions) < 1:
            raise ValueError("path must contain at least the start position")
        if any(p < 1 for p in self.positions):
            raise ValueError("conditioned walk never visits nonpositive sites")
        for a, b in zip(self.positions, self.positions[1:]):
            if abs(b - a) != 1:
                raise ValueError("consecutive positions must differ by exactly 1")

    @property
    def start(self) -> int:
        return self.positions[0]

    @property
    def final(self) -> int:
        return self.positions[-1]

    @property
    def n_steps(self) -> int:
        return len(self.positions) - 1


def step_up_prob(x: int) -> float:
    """Probability that the conditioned walk steps from x to x+1: (x+1)/(2x)."""
    if x <= 0:
        raise ValueError(f"site must be >= 1, got {x}")
    return (x + 1) / (2 * x)


def step_down_prob(x: int) -> float:
    """Complement of :func:`step_up_prob`; exactly 1 - step_up_prob(x)."""
    return 1.0 - step_up_prob(x)


def sample_path(x0: int, m: int, rng: RngState) -> WalkPath:
    """Sample an m-step trajectory of the conditioned walk started at x0."""
    if x0 < 1:
        raise ValueError(f"start must be >= 1, got {x0}")
    if m < 0:
        raise ValueError(f"step count must be >= 0, got {m}")
    gen = rng.generator()
    pos = [x0]
    x = x0
    for u in gen.random(m):
        x = x + 1 if u < step_up_prob(x) else x - 1
        pos.append(x)
    return WalkPath(tuple(pos))


def path_prob(path: WalkPath) -> float:
    """Probability of a path under the conditioned walk: final/(2^m * start)."""
    return path.final / (2**path.n_steps * path.start)


def hit_before_prob(y: int, x: int, N: int) -> float:
    """P[hit x before N] for the conditioned walk from y, 1 < x < y < N."""
    if not (1 < x < y < N):
        raise ValueError(f"need 1 < x < y < N, got x={x}, y={y}, N={N}")
    return x * (N - y) / (y * (N - x))


def hit_prob(y: int, x: int) -> float:
    """P[ever hit x] for the conditioned walk from y >= x >= 1: x/y.

    x == y returns 1 by the usual convention (the hitting time of the current
    site is 0).
    """
    if x < 1 or y < x:
        raise ValueError(f"need 1 <= x <= y, got x={x}, y={y}")
    return x / y


def escape_prob(x: int) -> float:
    """Probability of never returning to x after time 0: 1/(2x)."""
    if x <= 0:
        raise ValueError(f"site must be >= 1, got {x}")
    return 1 / (2 * x)


def martingale_defect(x) -> float:
    """|p_up/(x+1) + p_down/(x-1) - 1/x| for the 1/x martingale, x >= 2.

    Zero in exact arithmetic; in floats it stays below 1e-14/x. Accepts a
    scalar or an integer array.
    """
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa <= 1):
        raise ValueError("martingale check requires x >= 2 (stopped at 1)")
    p_up = (xa + 1) / (2 * xa)
    p_down = 1.0 - p_up
    defect = np.abs(p_up / (xa + 1) + p_down / (xa - 1) - 1 / xa)
    return float(defect) if np.isscalar(x) or np.ndim(x) == 0 else defect


def count_paths(x: int, delta: int, k: int) -> int:
    """Number of length-delta nearest-neighbour paths x -> k avoiding 0.

    Reflection principle: C(delta, (delta+k-x)/2) - C(delta, (delta-x-k)/2),
    with either binomial read as 0 when its lower index is out of range.
    Returns 0 for parity mismatches and unreachable endpoints. Exact integer
    arithmetic for every delta (Python integers do not overflow, so no
    floating crossover is needed).
    """
    if x < 1 or k < 1 or delta < 0:
        raise ValueError(f"need x >= 1, k >= 1, delta >= 0, got x={x}, k={k}, delta={delta}")
    if (delta + k - x) % 2 != 0 or abs(k - x) > delta:
        return 0
    first = math.comb(delta, (delta + k - x) // 2)
    low = (delta - x - k) // 2
    second = math.comb(delta, low) if low >= 0 else 0
    return first - second


def enumerate_paths(x: int, delta: int, k: int) -> int:
    """Brute-force oracle for :func:`count_paths` (all 2**delta step sequences)."""
    if x < 1 or k < 1 or delta < 0:
        raise ValueError(f"need x >= 1, k >= 1, delta >= 0, got x={x}, k={k}, delta={delta}")
    if delta > ENUMERATION_MAX_STEPS:
        raise ValueError(f"enumeration budget is delta <= {ENUMERATION_MAX_STEPS}, got {delta}")
    if delta == 0:
        return int(x == k)
    total = 1 << delta
    shifts = np.arange(delta, dtype=np.int64)
    count = 0
    chunk = 1 << 20
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        steps = (((idx[:, None] >> shifts) & 1) * 2 - 1).astype(np.int16)
        positions = x + np.cumsum(steps, axis=1, dtype=np.int16)
        valid = (positions.min(axis=1) >= 1) & (positions[:, -1] == k)
        count += int(valid.sum())
    return count


def endpoint_leq_prob(x: int, delta: int, y: int) -> tuple[float, float]:
    """P[X_delta <= y] for the conditioned walk from x: (exact, asymptotic).

    The exact value sums k * N_k / (x * 2^delta) over endpoints k <= y with
    N_k from :func:`count_paths`; the sum is kept in exact integer arithmetic
    and divided once at the end, so no intermediate overflow or underflow is
    possible. The asymptotic companion is sqrt(2/pi) * y^3 / (3 delta^{3/2}),
    valid when y^2 = o(delta).
    """
    if x < 1 or y < 1 or delta < 1:
        raise ValueError(f"need x >= 1, y >= 1, delta >= 1, got x={x}, y={y}, delta={delta}")
    numerator = 0
    for k in range(1, min(y, x + delta) + 1):
        nk = count_paths(x, delta, k)
        if nk:
            numerator += k * nk
    exact = float(Fraction(numerator, x << delta))
    asym = math.sqrt(2 / math.pi) * y**3 / (3 * delta**1.5)
    return exact, asym


# -- Monte Carlo helpers (vectorized over replicates) -------------------------

def simulate_hit_before(y: int, x: int, N: int, M: int, rng: RngState,
                        step_cap: int = ABSORPTION_STEP_CAP) -> float:
    """Empirical P[hit x before N] from M conditioned chains run to absorption."""
    if not (1 < x < y < N):
        raise ValueError(f"need 1 < x < y < N, got x={x}, y={y}, N={N}")
    if M < 1:
        raise ValueError("need at least one replicate")
    gen = rng.generator()
    pos = np.full(M, y, dtype=np.int64)
    hits = 0
    steps = 0
    while pos.size:
        u = gen.random(pos.size)
        pos += np.where(u < (pos + 1) / (2 * pos), 1, -1)
        hit = pos == x
        lost = pos == N
        hits += int(hit.sum())
        pos = pos[~(hit | lost)]
        steps += 1
        if steps > step_cap:
            raise RuntimeError(
                f"absorption did not occur within {step_cap} steps "
                f"({pos.size} walkers still active); suspect RNG pathology")
    return hits / M


def estimate_hit_prob(y: int, x: int, M: int, rng: RngState, horizon: int = 2000) -> float:
    """Unbiased MC estimate of P[ever hit x] from y > x >= 1.

    Walkers not absorbed within the horizon contribute the exact residual
    x/X_horizon, justified by optional stopping of the 1/X martingale (the
    martingale identity itself is checked to 1e-14 elsewhere), so the
    truncation introduces no bias.
    """
    if not (1 <= x < y):
        raise ValueError(f"need 1 <= x < y, got x={x}, y={y}")
    gen = rng.generator()
    pos = np.full(M, y, dtype=np.int64)
    acc = 0.0
    for _ in range(horizon):
        u = gen.random(pos.size)
        pos += np.where(u < (pos + 1) / (2 * pos), 1, -1)
        hit = pos == x
        acc += float(hit.sum())
        pos = pos[~hit]
        if not pos.size:
            break
    if pos.size:
        acc += float(np.sum(x / pos))
    return acc / M


def estimate_escape_prob(x: int, M: int, rng: RngState, horizon: int = 2000) -> float:
    """Unbiased MC estimate of the no-return probability 1/(2x) from x.

    Same truncation correction as :func:`estimate_hit_prob`: a walker still
    alive at the horizon escapes with exact probability 1 - x/X_horizon.
    """
    if x < 1:
        raise ValueError(f"site must be >= 1, got {x}")
    gen = rng.generator()
    pos = np.full(M, x, dtype=np.int64)
    u = gen.random(M)
    pos += np.where(u < (pos + 1) / (2 * pos), 1, -1)
    returned = 0
    # walkers that stepped down return to x almost surely (positive walk below
    # x must cross it); resolve them immediately
    below = pos < x
    returned += int(below.sum())
    pos = pos[~below]
    escaped = 0.0
    for _ in range(horizon):
        if not pos.size:
            break
        u = gen.random(pos.size)
        pos += np.where(u < (pos + 1) / (2 * pos), 1, -1)
        hit = pos == x
        returned += int(hit.sum())
        pos = pos[~hit]
    if pos.size:
        escaped += float(np.sum(1.0 - x / pos))
    return escaped / M


def sample_paths_return_stats(x0: int, m: int, M: int, rng: RngState):
    """Batch of M independent m-step paths from x0, summarized.

    Returns (mean final position, unbiased estimate of the probability that
    the walk ever returns to x0 after leaving it). The return probability uses
    the same martingale-backed truncation correction as
    :func:`estimate_hit_prob` for walkers above x0 at the horizon.
    """
    gen = rng.generator()
    pos = np.full(M, x0, dtype=np.int64)
    left = np.zeros(M, dtype=bool)
    returned = np.zeros(M, dtype=bool)
    for _ in range(m):
        u = gen.random(M)
        pos += np.where(u < (pos + 1) / (2 * pos), 1, -1)
        returned |= left & (pos == x0)
        left |= pos != x0
    open_cases = left & ~returned & (pos > x0)
    frac = returned.mean() + float(np.sum(x0 / pos[open_cases])) / M
    # walkers below x0 at the horizon return a.s.
    frac += float(np.sum(left & ~returned & (pos < x0))) / M
    return float(pos.mean()), float(frac)
