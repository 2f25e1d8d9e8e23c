"""Concentration intervals and the mean-field approximation error bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass

# Normal quantiles as used for the reported coverage tables (not 1.6449).
Z_CONSTANTS = {0.90: 1.64, 0.95: 1.96}


@dataclass(frozen=True)
class Interval:
    center: float
    half_width: float
    level: float
    method: str

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be non-negative")

    @property
    def lower(self) -> float:
        return max(0.0, self.center - self.half_width)

    @property
    def upper(self) -> float:
        return min(1.0, self.center + self.half_width)

    @property
    def clipped(self) -> bool:
        return self.center - self.half_width < 0.0 or self.center + self.half_width > 1.0

    def __contains__(self, x: float) -> bool:
        return abs(x - self.center) <= self.half_width


def _kl(p: float, eps: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    a = p + eps
    b = 1.0 - p - eps
    # log1p keeps precision for small eps, where the two terms nearly cancel
    left = a * math.log1p(eps / p) if a > 0 else 0.0
    right = b * math.log1p(-eps / (1.0 - p)) if b > 0 else 0.0
    return max(0.0, left + right)


def kl_plus(p: float, eps: float) -> float:
    """KL divergence of Bernoulli(p + eps) from Bernoulli(p); 0 <= eps <= 1 - p."""
    if not 0.0 <= eps <= 1.0 - p:
        raise ValueError(f"eps={eps} out of range for p={p}")
    return _kl(p, eps)


def kl_minus(p: float, eps: float) -> float:
    """h_-(eps) = h_+(-eps); 0 <= eps <= p."""
    if not 0.0 <= eps <= p:
        raise ValueError(f"eps={eps} out of range for p={p}")
    return _kl(p, -eps)


def chernov_multiplier(delta: float) -> float:
    return math.sqrt(2.0 * math.log(2.0 / delta))


def chernov_interval(mu: float, n: int, delta: float) -> Interval:
    """Interval holding rho_{t+1} with probability at least 1 - delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    hw = math.sqrt(mu * (1.0 - mu) / n * 2.0 * math.log(2.0 / delta))
    return Interval(mu, hw, 1.0 - delta, "chernov")


def clt_interval(mu: float, sigma2: float, level: float = 0.95) -> Interval:
    if level not in Z_CONSTANTS:
        raise ValueError(f"unsupported level {level}; use one of {sorted(Z_CONSTANTS)}")
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    return Interval(mu, Z_CONSTANTS[level] * math.sqrt(sigma2), level, "clt")


def default_eps(m: int, prob: float) -> float:
    """One standard deviation of a Binomial(m, prob) proportion."""
    return math.sqrt(prob * (1.0 - prob) / m)


def rg_error_bound(n: int, p_e: float, p: float, eps: float | None = None) -> float:
    """Bound on |p_rg - p_grid^nu| for the random graph."""
    if not 0.0 < p_e < 1.0:
        raise ValueError("p_e must lie in (0, 1)")
    if eps is None:
        eps = default_eps(n - 1, p_e)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return abs(p - 0.5) * 2.0 * math.exp(-(n - 1) * eps ** 2 / (p_e * (1 - p_e)) + math.log(n))


def sw_error_bound(n: int, gamma: int, p_w: float, p: float, eps: float | None = None) -> float:
    """Bound on |p_rg,Gamma - p_grid,Gamma^nu| for the small-world random part.

    Becomes uninformative (>= |p - 1/2|) as gamma approaches n - 1.
    """
    if not 0.0 < p_w < 1.0:
        raise ValueError("p_w must lie in (0, 1)")
    m = n - gamma
    if eps is None:
        eps = default_eps(m, p_w)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return abs(p - 0.5) * 2.0 * math.exp(-m * eps ** 2 / (p_w * (1 - p_w)) + math.log(m + 1))
