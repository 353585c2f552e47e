"""Location density families with analytic score derivatives.

Each family is defined on a standard (alpha=0, beta=1) scale and
transported by ``x -> (x - alpha) / beta``.  The score derivatives

    psi_k = f^(k) / f,   k = 1, 2, 3,

are coded in closed form per family; they obey the recurrence
``psi_{k+1} = psi_k' + psi_1 * psi_k``, which the test-suite checks by
finite differences.  Higher derivatives (psi_4, psi_5) are deliberately
not provided.

``GUMBEL_MIN`` is the minimum-type Gumbel with standard density
``exp(x - e^x)``.  The naming is explicit because the skewness-type
functionals change sign between the min- and max- conventions.

Extension point: a new family needs the five callables collected in
``_FamilyOps`` (standard log-density, psi table, cdf, lower-tail
quantile, upper-tail survival quantile), registered in ``_OPS``.
Everything downstream — quadrature, sampling, simulation — is generic
over that table.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit

from ._normal import norm_cdf, norm_quantile

__all__ = ["Family", "LocationDensity", "gumbel_min", "normal", "logistic"]

# Largest exponent fed to np.exp; e^709.8 overflows double precision.
_EXP_CLIP = 705.0

_TINY = np.finfo(float).tiny


class Family(enum.Enum):
    GUMBEL_MIN = "gumbel_min"
    NORMAL = "normal"
    LOGISTIC = "logistic"


@dataclass(frozen=True)
class _FamilyOps:
    """Standard-scale callables defining one family."""

    log_pdf: Callable[[np.ndarray], np.ndarray]
    psi: dict[int, Callable[[np.ndarray], np.ndarray]]
    cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Callable[[np.ndarray], np.ndarray]          # u -> F^{-1}(u)
    survival_quantile: Callable[[np.ndarray], np.ndarray]  # s -> F^{-1}(1-s), tail-stable
    score_pair: Callable[[np.ndarray], tuple]              # z -> (psi1, psi1')


# --- Gumbel (minimum convention): f(x) = exp(x - e^x) ------------------

def _gumbel_log_pdf(x):
    return x - np.exp(np.minimum(x, _EXP_CLIP))


def _gumbel_cdf(x):
    # F(x) = 1 - exp(-e^x), computed as -expm1 for small-x accuracy.
    return -np.expm1(-np.exp(np.minimum(x, _EXP_CLIP)))


def _gumbel_psi1(x):
    return 1.0 - np.exp(x)


def _gumbel_psi2(x):
    w = np.exp(x)
    return 1.0 + w * (w - 3.0)


def _gumbel_psi3(x):
    w = np.exp(x)
    return 1.0 + w * (-7.0 + w * (6.0 - w))


def _gumbel_score_pair(x):
    w = np.exp(x)
    return 1.0 - w, -w


def _gumbel_quantile(u):
    return np.log(-np.log1p(-u))


def _gumbel_survival_quantile(s):
    return np.log(-np.log(s))


# --- Normal -------------------------------------------------------------

_LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)

_NORMAL_PSI = {
    1: lambda x: -x,
    2: lambda x: x * x - 1.0,
    3: lambda x: (3.0 - x * x) * x,
}


# --- Logistic: f(x) = e^{-x} / (1 + e^{-x})^2 ---------------------------

def _logistic_log_pdf(x):
    return -x - 2.0 * np.logaddexp(0.0, -x)


def _logistic_psi(x, k):
    p = expit(x)
    if k == 1:
        return 1.0 - 2.0 * p
    if k == 2:
        return 1.0 + p * (6.0 * p - 6.0)
    return 1.0 + p * (-14.0 + p * (36.0 - 24.0 * p))


def _logistic_score_pair(x):
    p = expit(x)
    return 1.0 - 2.0 * p, -2.0 * p * (1.0 - p)


def _logit(u):
    return np.log(u) - np.log1p(-u)


_OPS = {
    Family.GUMBEL_MIN: _FamilyOps(
        log_pdf=_gumbel_log_pdf,
        psi={1: _gumbel_psi1, 2: _gumbel_psi2, 3: _gumbel_psi3},
        cdf=_gumbel_cdf,
        quantile=_gumbel_quantile,
        survival_quantile=_gumbel_survival_quantile,
        score_pair=_gumbel_score_pair,
    ),
    Family.NORMAL: _FamilyOps(
        log_pdf=lambda x: -0.5 * x * x - _LOG_SQRT_2PI,
        psi=_NORMAL_PSI,
        cdf=norm_cdf,
        quantile=norm_quantile,
        survival_quantile=lambda s: -norm_quantile(s),
        score_pair=lambda x: (-x, np.full_like(x, -1.0)),
    ),
    Family.LOGISTIC: _FamilyOps(
        log_pdf=_logistic_log_pdf,
        psi={k: (lambda x, _k=k: _logistic_psi(x, _k)) for k in (1, 2, 3)},
        cdf=expit,
        quantile=_logit,
        survival_quantile=lambda s: -_logit(s),
        score_pair=_logistic_score_pair,
    ),
}


@dataclass(frozen=True)
class LocationDensity:
    """A location-scale member of one of the built-in families.

    Parameters
    ----------
    family : Family
    alpha : float
        Location offset of the base density (the estimated location
        parameter theta lives in the simulator, not here).
    beta : float
        Scale, strictly positive.
    """

    family: Family
    alpha: float = 0.0
    beta: float = 1.0

    def __post_init__(self):
        if not isinstance(self.family, Family):
            raise ValueError(f"unknown family: {self.family!r}")
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")
        if self.beta <= 0.0:
            raise ValueError(f"beta must be > 0, got {self.beta}")

    @property
    def _ops(self) -> _FamilyOps:
        return _OPS[self.family]

    def _z(self, x):
        return (np.asarray(x, dtype=float) - self.alpha) / self.beta

    def log_density(self, x):
        """log f(x); stable against overflow for |x| up to ~700·beta."""
        out = self._ops.log_pdf(self._z(x)) - np.log(self.beta)
        return out if np.ndim(out) else float(out)

    def psi(self, k: int, x):
        """Score derivative psi_k(x) = f^(k)(x) / f(x) for k in {1, 2, 3}.

        Scales as beta**(-k) times the standard-density value at
        (x - alpha) / beta.
        """
        if k not in (1, 2, 3):
            raise ValueError(f"psi order must be 1, 2 or 3, got {k}")
        out = self._ops.psi[k](self._z(x)) / self.beta**k
        return out if np.ndim(out) else float(out)

    def cdf(self, x):
        out = self._ops.cdf(self._z(x))
        return out if np.ndim(out) else float(out)

    def score_pair(self, x):
        """(psi_1(x), psi_1'(x)) with one transcendental evaluation.

        psi_1' = psi_2 - psi_1^2 is the derivative the Newton location
        solver needs alongside the score itself; computing the pair
        jointly halves the cost of the billion-element fit passes.
        """
        p1, dp1 = self._ops.score_pair(self._z(x))
        return p1 / self.beta, dp1 / self.beta**2

    def cdf_inverse(self, u):
        """Lower-tail quantile F^{-1}(u), u strictly inside (0, 1)."""
        u_arr = np.asarray(u, dtype=float)
        if np.any(u_arr <= 0.0) or np.any(u_arr >= 1.0):
            raise ValueError("u must lie strictly inside (0, 1)")
        out = self.alpha + self.beta * self._ops.quantile(u_arr)
        return out if np.ndim(out) else float(out)

    def survival_inverse(self, s):
        """F^{-1}(1 - s) evaluated in a form accurate for small s.

        The upper-half quadrature substitution integrates in the
        survival variable; going through ``cdf_inverse(1 - s)`` would
        lose the tail to rounding of 1 - s.
        """
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr <= 0.0) or np.any(s_arr >= 1.0):
            raise ValueError("s must lie strictly inside (0, 1)")
        out = self.alpha + self.beta * self._ops.survival_quantile(s_arr)
        return out if np.ndim(out) else float(out)

    def sample(self, n: int, stream: np.random.Generator) -> np.ndarray:
        """n i.i.d. draws by inverse-CDF transform.

        Consumes exactly one uniform per draw, so a replicate's
        position in a shared stream is a fixed word offset — the
        property the deterministic parallel simulator relies on.
        """
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        u = stream.random(n)
        # random() can return exactly 0.0 (probability 2^-53); nudge onto
        # the open interval rather than raising mid-simulation.
        np.maximum(u, _TINY, out=u)
        return self.alpha + self.beta * self._ops.quantile(u)


def gumbel_min(alpha: float = 0.0, beta: float = 1.0) -> LocationDensity:
    return LocationDensity(Family.GUMBEL_MIN, alpha, beta)


def normal(alpha: float = 0.0, beta: float = 1.0) -> LocationDensity:
    return LocationDensity(Family.NORMAL, alpha, beta)


def logistic(alpha: float = 0.0, beta: float = 1.0) -> LocationDensity:
    return LocationDensity(Family.LOGISTIC, alpha, beta)
