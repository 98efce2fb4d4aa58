"""Replicated-experiment runner and statistical comparators.

Replicates are drawn in fixed-size chunks, each chunk on its own RNG stream,
and merged in chunk order, so results are bit-identical across worker counts
and scheduling. Comparators: empirical moments and pmf, total-variation
distance against exact pmfs, a Kolmogorov-Smirnov distance to the standard
normal (used as a distance with fixed thresholds, not a p-value), and
binomial sigma bands.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import ndtr

from .rngs import RngState

#: Replicates per RNG stream; fixed so the stream layout (and hence every
#: draw) is independent of the worker count.
CHUNK_SIZE = 65536


@dataclass(frozen=True)
class Experiment:
    """A named sampler: (generator, batch size) -> 1-d array of draws."""

    name: str
    sample: Callable[[np.random.Generator, int], np.ndarray]
    integer_valued: bool = True


@dataclass(frozen=True)
class EmpiricalSummary:
    """Moments and (for integer data) empirical pmf of a replicate batch."""

    count: int
    mean: float
    variance: float
    pmf: np.ndarray | None = None
    sample: np.ndarray | None = field(default=None, repr=False)

    def frequency(self, value: int) -> float:
        if self.pmf is None:
            raise ValueError("summary has no pmf (non-integer experiment)")
        return float(self.pmf[value]) if 0 <= value < len(self.pmf) else 0.0


@dataclass(frozen=True)
class Verdict:
    """One acceptance check: passes iff statistic <= threshold."""

    name: str
    statistic: float
    threshold: float
    context: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.statistic <= self.threshold)

    def line(self) -> str:
        state = "PASS" if self.passed else "FAIL"
        ctx = f" [{self.context}]" if self.context else ""
        return (f"{state} {self.name}: statistic {self.statistic:.6g} vs "
                f"threshold {self.threshold:.6g}{ctx}")


def default_workers() -> int:
    """Worker count from RI1D_WORKERS, defaulting to 1."""
    raw = os.environ.get("RI1D_WORKERS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_replicates(experiment: Experiment, M: int, seed: int,
                   workers: int | None = None,
                   keep_sample: bool = False) -> EmpiricalSummary:
    """Draw M replicates of the experiment, deterministically under seed.

    Work is split into CHUNK_SIZE pieces; chunk j always runs on stream j of
    the seed, and chunks are concatenated in index order, so the summary is
    identical for any worker count.
    """
    if M < 1:
        raise ValueError(f"need M >= 1, got {M}")
    if workers is None:
        workers = default_workers()
    sizes = [(j, min(CHUNK_SIZE, M - j * CHUNK_SIZE))
             for j in range((M + CHUNK_SIZE - 1) // CHUNK_SIZE)]

    def draw(job):
        j, m = job
        out = np.asarray(experiment.sample(RngState(seed, j).generator(), m))
        if out.shape != (m,):
            raise RuntimeError(
                f"experiment {experiment.name!r} returned shape {out.shape}, "
                f"expected ({m},)")
        return out

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(draw, sizes))
    else:
        chunks = [draw(job) for job in sizes]
    data = np.concatenate(chunks)
    pmf = None
    if experiment.integer_valued:
        values = data.astype(np.int64)
        if np.any(values < 0):
            raise RuntimeError(f"experiment {experiment.name!r} produced "
                               "negative integer values")
        pmf = np.bincount(values) / M
    return EmpiricalSummary(
        count=M,
        mean=float(data.mean()),
        variance=float(data.var(ddof=1)) if M > 1 else 0.0,
        pmf=pmf,
        sample=np.sort(data) if keep_sample else None,
    )


def _as_pmf(obj) -> np.ndarray:
    if isinstance(obj, EmpiricalSummary):
        if obj.pmf is None:
            raise ValueError("summary has no pmf")
        return obj.pmf
    if hasattr(obj, "pmf"):  # LocalTimeLaw
        return np.asarray(obj.pmf, dtype=np.float64)
    return np.asarray(obj, dtype=np.float64)


def tv_distance(emp, ref) -> float:
    """Total variation: half the L1 distance, with supports zero-padded."""
    p = _as_pmf(emp)
    q = _as_pmf(ref)
    size = max(len(p), len(q))
    p = np.pad(p, (0, size - len(p)))
    q = np.pad(q, (0, size - len(q)))
    # mass beyond the longer support (e.g. a truncated exact pmf) counts too
    slack = abs(float(p.sum()) - float(q.sum()))
    return 0.5 * (float(np.abs(p - q).sum()) + slack)


def ks_distance_to_normal(sample: np.ndarray) -> float:
    """Sup distance between the empirical CDF and the standard normal CDF."""
    z = np.sort(np.asarray(sample, dtype=np.float64))
    m = len(z)
    if m < 100:
        raise ValueError(f"need at least 100 points for KS, got {m}")
    phi = ndtr(z)
    upper = np.arange(1, m + 1) / m - phi
    lower = phi - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def binomial_band(p_hat: float, M: int, k_sigma: float) -> tuple[float, float]:
    """p_hat +/- k_sigma binomial standard errors, clipped to [0,1].

    At the degenerate frequencies 0 and 1 the sigma band collapses, so the
    rule-of-three width 3/M is used instead.
    """
    if not 0.0 <= p_hat <= 1.0 or M < 1:
        raise ValueError(f"need 0 <= p_hat <= 1 and M >= 1, got {p_hat}, {M}")
    if p_hat in (0.0, 1.0):
        half = 3.0 / M
    else:
        half = k_sigma * float(np.sqrt(p_hat * (1.0 - p_hat) / M))
    return max(0.0, p_hat - half), min(1.0, p_hat + half)
