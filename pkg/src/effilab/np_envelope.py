"""Monte Carlo solver for the implicit Neyman-Pearson threshold system.

For a location density f, sample size n and target probabilities
0 < u < v < 1, find (epsilon, c) such that the likelihood-ratio event

    sum_i [log f(X_i + delta) - log f(X_i)] >= log c,     delta = epsilon / a_n

has probability u when X ~ f and probability v when X ~ f(. + delta).

The two-equation system is reduced to one dimension by the quantile
trick: for any candidate epsilon, setting log c to the empirical
(1-u)-quantile of the simulated statistic under f satisfies the first
equation by construction (up to 1/reps discreteness), leaving a scalar
root-find in epsilon for the second.  Common random numbers — one
fixed matrix of draws reused for every candidate — make the map
epsilon -> v_hat deterministic and (up to tie noise) monotone, so
plain bisection applies and the returned solution is bit-for-bit
reproducible from the seed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._normal import norm_quantile
from ._streams import master_stream
from .densities import LocationDensity
from .errors import BracketError
from .functionals import DEFAULT_QUADRATURE, QuadratureSpec, fisher_information

__all__ = ["NPSolution", "llr_pair_sample", "solve_epsilon"]

_ROW_CHUNK = 1 << 16  # rows per evaluation block; keeps temporaries ~100 MB


@dataclass(frozen=True)
class NPSolution:
    """A solved threshold system plus its Monte Carlo diagnostics.

    u_hat matches the target u up to the 1/reps discreteness of the
    empirical quantile; v_hat is the achieved shifted-measure
    probability at the returned epsilon.  trace holds the bisection
    path as (epsilon, v_hat) pairs for monotonicity diagnostics.
    """

    epsilon: float
    log_c: float
    u_hat: float
    v_hat: float
    se_u: float
    se_v: float
    reps: int
    n: int
    a_n: float
    density: LocationDensity
    trace: tuple
    widened: bool


class _LLREngine:
    """Common-random-number evaluator of the paired LLR statistics.

    Draws the (reps, n) sample matrix V once; ``pair(delta)`` then
    returns per-replicate statistics

        A_r = sum_i [log f(V_ri + delta) - log f(V_ri)]   (law of the
              statistic under f)
        B_r = sum_i [log f(V_ri) - log f(V_ri - delta)]   (law under the
              shift -delta, realised through X = V - delta)

    Evaluation is chunked by replicate rows; per-row sums never cross
    chunk boundaries, so results do not depend on the chunk size.
    """

    def __init__(self, d: LocationDensity, n: int, reps: int,
                 stream: np.random.Generator):
        self.d = d
        self.n = n
        self.reps = reps
        self.v = d.sample(reps * n, stream).reshape(reps, n)
        self.base = np.empty(reps)
        for lo in range(0, reps, _ROW_CHUNK):
            hi = min(lo + _ROW_CHUNK, reps)
            self.base[lo:hi] = d.log_density(self.v[lo:hi]).sum(axis=1)

    def pair(self, delta: float) -> tuple[np.ndarray, np.ndarray]:
        if delta == 0.0:
            z = np.zeros(self.reps)
            return z, z.copy()
        a = np.empty(self.reps)
        b = np.empty(self.reps)
        for lo in range(0, self.reps, _ROW_CHUNK):
            hi = min(lo + _ROW_CHUNK, self.reps)
            block = self.v[lo:hi]
            a[lo:hi] = self.d.log_density(block + delta).sum(axis=1) - self.base[lo:hi]
            b[lo:hi] = self.base[lo:hi] - self.d.log_density(block - delta).sum(axis=1)
        return a, b


def llr_pair_sample(d: LocationDensity, n: int, delta: float, reps: int,
                    stream: np.random.Generator | int) -> tuple[np.ndarray, np.ndarray]:
    """Draw the paired LLR statistics (A, B) under common random numbers.

    Requires delta >= 0 and reps >= 10**4. For delta > 0, B
    stochastically dominates A (the shift is favourable to the event).
    """
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if reps < 10_000:
        raise ValueError(f"reps must be >= 10000, got {reps}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not isinstance(stream, np.random.Generator):
        stream = master_stream(int(stream))
    return _LLREngine(d, n, reps, stream).pair(delta)


def _left_quantile(values: np.ndarray, p: float) -> float:
    """ceil(len * p)-th order statistic — the left-continuous inverse."""
    k = math.ceil(len(values) * p)
    k = min(max(k, 1), len(values))
    return float(np.partition(values, k - 1)[k - 1])


def solve_epsilon(d: LocationDensity, n: int, u: float, v: float, reps: int,
                  stream: np.random.Generator | int,
                  tol_v: float = 0.0,
                  bracket_scale: float = 4.0,
                  quadrature: QuadratureSpec = DEFAULT_QUADRATURE) -> NPSolution:
    """Solve the (epsilon, c) system by CRN bisection on epsilon.

    The search bracket is [0, bracket_scale * (z_v - z_u)]; the default
    scale 4 is generous against the first-order value z_v - z_u.  If
    v_hat at the top of the bracket still falls short of v the bracket
    is widened once (with a warning); if that also fails, a
    BracketError reports the achieved v_hat range — the requested
    (u, v, n) combination is unattainable at this sample size, which is
    a property of the problem, not a solver fault.

    Bisection stops when |v_hat - v| <= max(tol_v, 2 * se_v) or when
    the bracket width drops below 1e-3 * (z_v - z_u).  With a fixed
    seed the returned solution is bit-for-bit deterministic.

    The degenerate case u == v has the zero-length bracket [0, 0] and
    is answered analytically with epsilon = 0 (no sampling, zero
    standard errors): with no shift the two probabilities coincide for
    any threshold.
    """
    if not (0.0 < u <= v < 1.0):
        raise ValueError(f"need 0 < u <= v < 1, got u={u}, v={v}")
    if reps < 10_000:
        raise ValueError(f"reps must be >= 10000, got {reps}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not isinstance(stream, np.random.Generator):
        stream = master_stream(int(stream))

    a_n = math.sqrt(n * fisher_information(d, quadrature))
    if u == v:
        return NPSolution(epsilon=0.0, log_c=0.0, u_hat=u, v_hat=v,
                          se_u=0.0, se_v=0.0, reps=reps, n=n, a_n=a_n,
                          density=d, trace=(), widened=False)
    width0 = float(norm_quantile(v) - norm_quantile(u))
    engine = _LLREngine(d, n, reps, stream)

    def evaluate(eps: float):
        a, b = engine.pair(eps / a_n)
        log_c = _left_quantile(a, 1.0 - u)
        u_hat = float(np.count_nonzero(a >= log_c)) / reps
        v_hat = float(np.count_nonzero(b >= log_c)) / reps
        return log_c, u_hat, v_hat

    lo, hi = 0.0, bracket_scale * width0
    trace: list[tuple[float, float]] = []
    widened = False

    log_c, u_hat, v_hat = evaluate(hi)
    trace.append((hi, v_hat))
    if v_hat < v:
        widened = True
        warnings.warn(
            f"envelope bracket [0, {hi:.4g}] reached only v_hat={v_hat:.6f} "
            f"< v={v}; widening once", RuntimeWarning, stacklevel=2)
        lo, hi = hi, 2.0 * hi
        log_c, u_hat, v_hat = evaluate(hi)
        trace.append((hi, v_hat))
        if v_hat < v:
            raise BracketError(
                f"target v={v} unattainable for n={n}, u={u}",
                achieved_low=u, achieved_high=v_hat)

    # Invariant: v_hat(lo) <= v <= v_hat(hi).  v_hat at epsilon -> 0+ tends
    # to u < v, so the left end never needs evaluating.
    best = (hi, log_c, u_hat, v_hat)
    while True:
        se_v = math.sqrt(max(best[3] * (1.0 - best[3]), 1e-300) / reps)
        if abs(best[3] - v) <= max(tol_v, 2.0 * se_v):
            break
        if hi - lo < 1e-3 * width0:
            break
        mid = 0.5 * (lo + hi)
        log_c, u_hat, v_hat = evaluate(mid)
        trace.append((mid, v_hat))
        if abs(v_hat - v) < abs(best[3] - v):
            best = (mid, log_c, u_hat, v_hat)
        if v_hat < v:
            lo = mid
        else:
            hi = mid

    eps, log_c, u_hat, v_hat = best
    return NPSolution(
        epsilon=eps,
        log_c=log_c,
        u_hat=u_hat,
        v_hat=v_hat,
        se_u=math.sqrt(u_hat * (1.0 - u_hat) / reps),
        se_v=math.sqrt(v_hat * (1.0 - v_hat) / reps),
        reps=reps,
        n=n,
        a_n=a_n,
        density=d,
        trace=tuple(trace),
        widened=widened,
    )
