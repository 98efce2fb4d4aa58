"""Survival kernels h_n(x,t) for the walk killed at {0,n} and the ring walk.

The ring of n sites with a forbidden origin is represented as the segment
{1..n-1} with killing at 0 and n (ring site -a is line site n-a). Three
backends compute h_n(x,t) = P_x[tau_{0,n} > t]: an exact normalized forward
recursion (dp_table), the odd-mode spectral sum evaluated in signed log
domain, and the first-mode asymptotic (4/pi) cos^t(pi/n) sin(pi x/n) valid
once t >= (4/pi^2) n^2 ln n. On top of the kernel sit the time-inhomogeneous
conditioned ring walk, exact vacant-set and local-time functionals, and the
exact propagation routines behind the asymptotic verification checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .config import in_cond_regime
from .core_walks import WalkPath
from .rngs import RngState

#: Budget guard for dp tables: n*(t+1) float64 entries.
DP_TABLE_MAX_ENTRIES = 10**9


# -- backends ------------------------------------------------------------------

def _check_domain(n: int, x: int, t: int) -> None:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0 <= x <= n:
        raise ValueError(f"need 0 <= x <= n, got x={x}, n={n}")
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")


def _spectral_log_terms(n: int, x, t: int):
    """Per-mode (log|term|, sign) of the killed-walk spectral sum.

    x may be a scalar or an array; returns arrays broadcast over modes along
    the last axis. Each term is (2/n) cos^t(theta_j) cot(theta_j/2)
    sin(x theta_j) with theta_j = pi(2j-1)/n, j = 1..floor(n/2); cos^t is
    carried as t*ln|cos| with explicit sign tracking so horizons up to 1e7
    cannot underflow.
    """
    j = np.arange(1, n // 2 + 1, dtype=np.float64)
    theta = np.pi * (2 * j - 1) / n
    c = np.cos(theta)
    with np.errstate(divide="ignore"):
        log_c = np.log(np.abs(c))
        # t == 0 must give log 1 even for the cos = 0 mode (0 * -inf trap)
        pow_part = t * log_c if t > 0 else np.zeros_like(log_c)
    cot_half = 1.0 / np.tan(theta / 2)  # positive: theta/2 in (0, pi/2)
    s = np.sin(np.multiply.outer(np.asarray(x, dtype=np.float64), theta))
    with np.errstate(divide="ignore"):
        log_abs = (pow_part + np.log(cot_half) + math.log(2.0 / n)
                   + np.log(np.abs(s)))
    sign = np.sign(s) * np.where(c < 0, (-1.0) ** t, 1.0)
    return log_abs, sign


def h_spectral_log(n: int, x, t: int):
    """(log|h|, sign) from the spectral sum; sign 0 encodes an exact zero."""
    log_abs, sign = _spectral_log_terms(n, x, t)
    return logsumexp(log_abs, b=sign, axis=-1, return_sign=True)


def h_spectral(n: int, x: int, t: int, clamp: bool = True) -> float:
    """Survival probability via the odd-mode spectral sum.

    Evaluated in signed log domain and clamped to [0,1] (pass clamp=False to
    see the raw pre-clamp value for diagnostics).
    """
    _check_domain(n, x, t)
    log_abs, sign = h_spectral_log(n, x, t)
    val = float(sign * np.exp(log_abs))
    return min(max(val, 0.0), 1.0) if clamp else val


def h_dp(n: int, x: int, t: int) -> float:
    """Survival probability via the exact forward recursion."""
    _check_domain(n, x, t)
    v, log_z = _survival_vector(n, t)
    return float(v[x] * math.exp(log_z))


def h_dp_log(n: int, x: int, t: int) -> float:
    """log h_n(x,t) via the recursion (-inf at the absorbing boundary)."""
    _check_domain(n, x, t)
    v, log_z = _survival_vector(n, t)
    with np.errstate(divide="ignore"):
        return float(np.log(v[x]) + log_z)


def _survival_vector(n: int, t: int):
    """Normalized survival vector at horizon t plus its log scale."""
    v = np.ones(n + 1)
    v[0] = v[n] = 0.0
    log_z = 0.0
    for _ in range(t):
        w = np.zeros_like(v)
        w[1:n] = 0.5 * (v[:n - 1] + v[2:])
        m = w.max()
        if m == 0.0:
            return w, -math.inf
        log_z += math.log(m)
        v = w / m
    return v, log_z


def h_asymptotic(n: int, x: int, t: int) -> tuple[float, bool]:
    """First-mode value (4/pi) cos^t(pi/n) sin(pi x/n) and a regime flag.

    The flag is False when t is below the (4/pi^2) n^2 ln n horizon, where
    the stated O(n^-2) accuracy is not guaranteed.
    """
    _check_domain(n, x, t)
    val = (4.0 / math.pi) * math.exp(t * math.log(math.cos(math.pi / n))) \
        * math.sin(math.pi * x / n)
    return val, in_cond_regime(t, n)


def h_over_t1_deviation(n: int, x: int, t: int) -> float:
    """|h_spectral/h_asymptotic - 1|, computed in log domain."""
    log_h, sign = h_spectral_log(n, x, t)
    t1, _ = h_asymptotic(n, x, t)
    if t1 <= 0 or sign <= 0:
        raise ValueError("first-mode comparison needs strictly positive h and T1")
    return abs(math.expm1(float(log_h) - math.log(t1)))


# -- kernel table and the conditioned ring walk --------------------------------

class SurvivalKernel:
    """Survival kernel for one ring size, queryable at every remaining time.

    The dp_table backend stores one normalized vector per remaining time
    (memory O(n*t), guarded by DP_TABLE_MAX_ENTRIES) so the conditioned walk
    can be stepped at any time without recomputation; spectral and asymptotic
    backends answer point queries. Immutable after construction.
    """

    def __init__(self, n: int, t_max: int = 0, backend: str = "dp_table"):
        if backend not in ("dp_table", "spectral", "asymptotic"):
            raise ValueError(f"unknown backend {backend!r}")
        _check_domain(n, 0, t_max)
        self.n = n
        self.t_max = t_max
        self.backend = backend
        if backend == "dp_table":
            if (t_max + 1) * (n + 1) > DP_TABLE_MAX_ENTRIES:
                raise ValueError(
                    f"dp table of {(t_max + 1) * (n + 1)} entries exceeds the "
                    f"{DP_TABLE_MAX_ENTRIES} budget; use the spectral backend")
            table = np.empty((t_max + 1, n + 1))
            log_z = np.zeros(t_max + 1)
            v = np.ones(n + 1)
            v[0] = v[n] = 0.0
            table[0] = v
            for s in range(1, t_max + 1):
                w = np.zeros(n + 1)
                w[1:n] = 0.5 * (v[:n - 1] + v[2:])
                m = w.max()
                if m == 0.0:
                    table[s:] = 0.0
                    log_z[s:] = -np.inf
                    break
                log_z[s] = log_z[s - 1] + math.log(m)
                v = w / m
                table[s] = v
            self._table = table
            self._log_z = log_z

    def h(self, x: int, t: int) -> float:
        _check_domain(self.n, x, t)
        if self.backend == "dp_table":
            if t > self.t_max:
                raise ValueError(f"horizon {t} exceeds table horizon {self.t_max}")
            return float(self._table[t, x] * math.exp(self._log_z[t]))
        if self.backend == "spectral":
            return h_spectral(self.n, x, t)
        val, ok = h_asymptotic(self.n, x, t)
        if not ok:
            warnings.warn(f"t={t} below the first-mode regime for n={self.n}",
                          stacklevel=2)
        return val

    def log_h(self, x: int, t: int) -> float:
        if self.backend == "dp_table":
            _check_domain(self.n, x, t)
            if t > self.t_max:
                raise ValueError(f"horizon {t} exceeds table horizon {self.t_max}")
            with np.errstate(divide="ignore"):
                return float(np.log(self._table[t, x]) + self._log_z[t])
        return math.log(self.h(x, t))

    def step_up_prob(self, x: int, s: int) -> float:
        """h(x+1, s-1) / (2 h(x, s)): the conditioned up-step probability."""
        if not (0 < x < self.n) or s < 1:
            raise ValueError(f"need 0 < x < n and s >= 1, got x={x}, s={s}")
        if self.backend == "dp_table":
            if s > self.t_max:
                raise ValueError(f"horizon {s} exceeds table horizon {self.t_max}")
            denom = self._table[s, x]
            if denom == 0.0:
                raise ValueError(f"h({x},{s}) = 0: conditioning is impossible")
            ratio = math.exp(self._log_z[s - 1] - self._log_z[s])
            return float(self._table[s - 1, x + 1] * ratio / (2.0 * denom))
        hx = self.h(x, s)
        if hx == 0.0:
            raise ValueError(f"h({x},{s}) = 0: conditioning is impossible")
        return self.h(x + 1, s - 1) / (2.0 * hx)

    def _step_up_table(self) -> np.ndarray:
        """Up-step probabilities P[s, x] for every remaining time (dp only)."""
        if self.backend != "dp_table":
            raise ValueError("step table requires the dp_table backend")
        n, t = self.n, self.t_max
        ratio = np.exp(self._log_z[:t] - self._log_z[1:])
        p = np.zeros((t + 1, n + 1))
        with np.errstate(divide="ignore", invalid="ignore"):
            p[1:, 1:n] = (self._table[:t, 2:] * ratio[:, None]
                          / (2.0 * self._table[1:, 1:n]))
        return np.nan_to_num(p, nan=0.0, posinf=0.0)


@dataclass(frozen=True)
class RingConfig:
    """Ring walk setup: n sites, horizon t_total, start x0, optional level."""

    n: int
    t_total: int
    x0: int
    alpha: float | None = None

    def __post_init__(self):
        if not 0 < self.x0 < self.n:
            raise ValueError(f"need 0 < x0 < n, got x0={self.x0}, n={self.n}")
        if self.t_total < 0:
            raise ValueError(f"need t_total >= 0, got {self.t_total}")


def ring_time_scale(n: int, alpha: float) -> int:
    """Horizon floor(alpha n^3 / (2 pi^2)) matching interlacement level alpha."""
    if n < 2 or not alpha > 0:
        raise ValueError(f"need n >= 2 and alpha > 0, got n={n}, alpha={alpha}")
    t = int(alpha * n**3 / (2 * math.pi**2))
    if t == 0:
        warnings.warn(f"degenerate horizon 0 for n={n}, alpha={alpha}", stacklevel=2)
    return t


def ring_step_up_prob(n: int, x: int, s: int, kernel: SurvivalKernel | None = None) -> float:
    """Up-step probability of the conditioned ring walk at remaining time s."""
    if kernel is None:
        kernel = SurvivalKernel(n, s)
    elif kernel.n != n:
        raise ValueError(f"kernel is for n={kernel.n}, not {n}")
    return kernel.step_up_prob(x, s)


def sample_ring_path(cfg: RingConfig, rng: RngState,
                     kernel: SurvivalKernel | None = None) -> WalkPath:
    """One trajectory of the conditioned ring walk, all t_total steps."""
    if kernel is None:
        kernel = SurvivalKernel(cfg.n, cfg.t_total)
    if kernel.n != cfg.n:
        raise ValueError(f"kernel is for n={kernel.n}, not {cfg.n}")
    if kernel.backend == "dp_table" and kernel.t_max < cfg.t_total:
        raise ValueError(f"kernel horizon {kernel.t_max} < t_total {cfg.t_total}")
    if cfg.t_total >= 1 and kernel.h(cfg.x0, cfg.t_total) == 0.0:
        raise ValueError("conditioning on survival is impossible from this start")
    gen = rng.generator()
    pos = [cfg.x0]
    x = cfg.x0
    for s in range(cfg.t_total, 0, -1):
        x = x + 1 if gen.random() < kernel.step_up_prob(x, s) else x - 1
        pos.append(x)
    return WalkPath(tuple(pos))


def _ring_paths_batch(kernel: SurvivalKernel, x0: int, t: int, M: int,
                      gen: np.random.Generator, visit_site: int | None = None,
                      stay_in: tuple[int, int] | None = None):
    """M conditioned ring paths, vectorized over replicates.

    Returns (visit counts at visit_site over times 1..t, indicator that the
    whole path stays strictly inside the open interval stay_in); either may
    be None when not requested. Uses a precomputed up-step table, so memory
    is O(n*t) and time O(M*t).
    """
    p_up = kernel._step_up_table()
    if t > kernel.t_max:
        raise ValueError(f"horizon {t} exceeds table horizon {kernel.t_max}")
    pos = np.full(M, x0, dtype=np.int64)
    visits = np.zeros(M, dtype=np.int64) if visit_site is not None else None
    inside = np.ones(M, dtype=bool) if stay_in is not None else None
    for s in range(t, 0, -1):
        u = gen.random(M)
        pos += np.where(u < p_up[s, pos], 1, -1)
        if visits is not None:
            visits += pos == visit_site
        if inside is not None:
            inside &= (pos > stay_in[0]) & (pos < stay_in[1])
    return visits, inside


def vacant_prob_ring_exact(n: int, t: int, x0: int, a: int, b: int) -> float:
    """Exact P[ring interval [-a, b] unvisited] under the t-horizon ring law.

    Avoiding {-a..b} on the ring means the segment walk from x0 stays inside
    (b, n-a), so the probability is the two-point kernel ratio
    h_{n-a-b}(x0-b, t) / h_n(x0, t).
    """
    if a < 0 or b < 0 or a + b < 1:
        raise ValueError(f"need a,b >= 0 with a+b >= 1, got a={a}, b={b}")
    if not b < x0 < n - a:
        raise ValueError(f"need b < x0 < n-a, got x0={x0}, a={a}, b={b}, n={n}")
    if t == 0:
        return 1.0
    log_num, s_num = h_spectral_log(n - a - b, x0 - b, t)
    log_den, s_den = h_spectral_log(n, x0, t)
    if s_num <= 0:
        return 0.0
    return math.exp(float(log_num) - float(log_den))


def ring_local_time_sample(n_half: int, alpha: float, x: int, rng: RngState) -> int:
    """Visits to x (times 1..t) of the ring-2n walk run for floor(4 a n^3/pi^2).

    The start site n_half is not counted at time 0.
    """
    counts = ring_local_time_batch(n_half, alpha, x, 1, rng.generator())
    return int(counts[0])


def ring_local_time_batch(n_half: int, alpha: float, x: int, M: int,
                          gen: np.random.Generator) -> np.ndarray:
    """Batch version of :func:`ring_local_time_sample`."""
    if n_half < 2 or not 0 < x < 2 * n_half:
        raise ValueError(f"need n_half >= 2 and 0 < x < 2*n_half, got "
                         f"n_half={n_half}, x={x}")
    t = int(4 * alpha * n_half**3 / math.pi**2)
    kernel = SurvivalKernel(2 * n_half, t)
    visits, _ = _ring_paths_batch(kernel, n_half, t, M, gen, visit_site=x)
    return visits


# -- exact propagation checks for the asymptotic formulas -----------------------

def _propagate_killed(length: int, start: int, steps: int,
                      extra_kill: tuple[int, ...] = ()):
    """Distribution of the simple walk killed at {0, length} + extra sites.

    Returns (weights summing to 1 over 0..length, log of the surviving mass)
    after ``steps`` steps from ``start``; renormalizes each step so horizons
    of ~1e5 steps stay well-scaled.
    """
    kill = np.zeros(length + 1, dtype=bool)
    kill[[0, length]] = True
    for k in extra_kill:
        kill[k] = True
    if kill[start]:
        raise ValueError(f"start {start} is a killed site")
    w = np.zeros(length + 1)
    w[start] = 1.0
    log_mass = 0.0
    for _ in range(steps):
        nxt = np.zeros_like(w)
        nxt[1:] += 0.5 * w[:-1]
        nxt[:-1] += 0.5 * w[1:]
        nxt[kill] = 0.0
        total = nxt.sum()
        if total == 0.0:
            return nxt, -math.inf
        log_mass += math.log(total)
        w = nxt / total
    return w, log_mass


def verify_pi4(n: int, delta: int, a: int) -> tuple[float, bool]:
    """E_a[sin(pi X_delta / n) | survival in (0,n)], computed exactly.

    In the first-mode regime the value is (1 + O(n^-2)) * pi/4 independently
    of a; the boolean flags whether delta reaches that regime.
    """
    if not 1 <= a <= n - 1:
        raise ValueError(f"need 1 <= a <= n-1, got a={a}, n={n}")
    w, _ = _propagate_killed(n, a, delta)
    val = float(np.dot(w, np.sin(np.pi * np.arange(n + 1) / n)))
    return val, in_cond_regime(delta, n)


def _reweighted_prob(n: int, x0: int, t: int, delta: int, w, log_mass: float) -> float:
    """P[constrained first leg] = sum_z w(z) h_n(z, t-delta) / h_n(x0, t).

    ``w`` is the normalized end-of-leg distribution with surviving log mass
    ``log_mass``; everything is combined in log domain.
    """
    sites = np.nonzero(w > 0)[0]
    if sites.size == 0:
        return 0.0
    log_h, sign = h_spectral_log(n, sites, t - delta)
    num, num_sign = logsumexp(np.log(w[sites]) + log_h, b=sign, return_sign=True)
    if num_sign <= 0:
        return 0.0
    log_den, _ = h_spectral_log(n, x0, t)
    return math.exp(log_mass + float(num) - float(log_den))


def no_hit_prob_exact(n_half: int, t: int, delta: int, x: int):
    """P[x unvisited during the first delta steps] for the conditioned ring walk.

    Ring of 2*n_half sites, start n_half, horizon t. Returns (exact value,
    asymptotic exp(-delta x pi^2 / (8 n^3)), regime flag); the flag requires
    both delta and t - delta to reach the first-mode regime for size 2n.
    """
    n2 = 2 * n_half
    if not 0 < x < n_half:
        raise ValueError(f"need 0 < x < n_half, got x={x}, n_half={n_half}")
    if not 0 <= delta <= t:
        raise ValueError(f"need 0 <= delta <= t, got delta={delta}, t={t}")
    asym = math.exp(-delta * x * math.pi**2 / (8 * n_half**3))
    ok = in_cond_regime(delta, n2) and in_cond_regime(t - delta, n2)
    if delta == 0:
        return 1.0, asym, ok
    w, log_mass = _propagate_killed(n2, n_half, delta, extra_kill=(x,))
    return _reweighted_prob(n2, n_half, t, delta, w, log_mass), asym, ok


def mid_tail_check(n_half: int, t: int, delta: int, x: int):
    """(exact, bound) for the mid-interval escape tail of the ring walk.

    Exact P[the walk from x stays below n_half for delta steps] under the
    t-horizon conditioned law on the ring of 2*n_half sites, against the
    bound (8/pi) cos(pi x / 2n) exp(-3 pi^2 delta / (8 n^2)).
    """
    n2 = 2 * n_half
    if not 1 < x < n_half:
        raise ValueError(f"need 1 < x < n_half, got x={x}, n_half={n_half}")
    if not 0 <= delta <= t:
        raise ValueError(f"need 0 <= delta <= t, got delta={delta}, t={t}")
    bound = (8 / math.pi) * math.cos(math.pi * x / (2 * n_half)) \
        * math.exp(-3 * math.pi**2 * delta / (8 * n_half**2))
    if delta == 0:
        return 1.0, bound
    w, log_mass = _propagate_killed(n2, x, delta, extra_kill=(n_half,))
    return _reweighted_prob(n2, x, t, delta, w, log_mass), bound


def endpoint_small_prob_ring(n: int, t: int, x: int, delta: int, y: int):
    """(exact, asymptotic) for P[X_delta <= y] under the t-horizon ring law.

    Exact by killed propagation reweighted with the remaining-time kernel;
    the asymptotic is sqrt(2/pi) y^3 / (3 delta^{3/2}), valid for
    y^2 = o(delta) and delta = o(n^2).
    """
    if not 0 < x < n:
        raise ValueError(f"need 0 < x < n, got x={x}, n={n}")
    if y < 0 or not 1 <= delta <= t:
        raise ValueError(f"need y >= 0 and 1 <= delta <= t, got y={y}, "
                         f"delta={delta}, t={t}")
    asym = math.sqrt(2 / math.pi) * y**3 / (3 * delta**1.5)
    if y == 0:
        return 0.0, asym
    w, log_mass = _propagate_killed(n, x, delta)
    w = w.copy()
    w[y + 1:] = 0.0  # keep only endpoints <= y
    total = w.sum()
    if total == 0.0:
        return 0.0, asym
    log_mass += math.log(total)
    w /= total
    return _reweighted_prob(n, x, t, delta, w, log_mass), asym
