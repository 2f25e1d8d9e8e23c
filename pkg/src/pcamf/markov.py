"""Exact density chain n*rho_{t+1} ~ Binomial(n, mu(rho_t)) for small n."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .meanfield import MeanFieldMap

MAX_N = 2000


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, distribution: np.ndarray):
        super().__init__(f"{message} (last residual {residual:.3e})")
        self.residual = residual
        self.distribution = distribution


@dataclass(frozen=True)
class TransitionKernel:
    n: int
    P: np.ndarray

    def __post_init__(self):
        if self.P.shape != (self.n + 1, self.n + 1):
            raise ValueError("kernel must be (n+1) x (n+1)")
        if np.any(self.P < 0):
            raise ValueError("kernel has negative entries")
        drift = np.abs(self.P.sum(axis=1) - 1.0).max()
        if drift > 1e-12:
            raise ValueError(f"rows do not sum to one (max drift {drift:.2e})")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k," + ",".join(f"r{r}" for r in range(self.n + 1)) + "\n")
        for k, row in enumerate(self.P):
            buf.write(f"{k}," + ",".join(repr(float(x)) for x in row) + "\n")
        return buf.getvalue()


def build_kernel(n: int, mf: MeanFieldMap) -> TransitionKernel:
    """P[k, r] = C(n, r) m^r (1 - m)^(n - r) with m = mu(k / n).

    The activation probability and its complement come from the map as a
    pair, so mirror-symmetric maps give exactly mirror-symmetric kernels.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}]")
    k = np.arange(n + 1)
    m, mbar = mf.value_and_complement(k / n, (n - k) / n)
    r = np.arange(n + 1)
    logc = np.array([math.log(math.comb(n, j)) for j in r])
    with np.errstate(divide="ignore", invalid="ignore"):
        lm = np.log(m)[:, None]
        lmb = np.log(mbar)[:, None]
        u = np.where(r[None, :] > 0, r[None, :] * lm, 0.0)
        v = np.where((n - r)[None, :] > 0, (n - r)[None, :] * lmb, 0.0)
        P = np.exp(logc[None, :] + (u + v))
    return TransitionKernel(n, P)


def _check_distribution(pi, n):
    pi = np.asarray(pi, dtype=float)
    if pi.shape != (n + 1,) or np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-10:
        raise ValueError("pi0 must be a probability vector over {0, ..., n}")
    return pi


def evolve(kernel: TransitionKernel, pi0, T: int) -> np.ndarray:
    """Distributions pi_0 .. pi_T as a (T+1, n+1) array."""
    pi = _check_distribution(pi0, kernel.n)
    out = np.empty((T + 1, kernel.n + 1))
    out[0] = pi
    for t in range(T):
        pi = pi @ kernel.P
        s = pi.sum()
        assert abs(s - 1.0) < 1e-10, f"probability drift {s - 1.0:.2e} at t={t + 1}"
        pi = pi / s
        out[t + 1] = pi
    return out


def stationary(kernel: TransitionKernel, tol: float = 1e-12, max_iter: int = 1_000_000,
               pi0=None) -> np.ndarray:
    """Stationary distribution by power iteration.

    Stops once the total-variation change between successive iterates is
    below ``tol``.
    """
    n = kernel.n
    pi = np.full(n + 1, 1.0 / (n + 1)) if pi0 is None else _check_distribution(pi0, n)
    resid = math.inf
    for _ in range(max_iter):
        nxt = pi @ kernel.P
        nxt /= nxt.sum()
        resid = 0.5 * np.abs(nxt - pi).sum()
        pi = nxt
        if resid < tol:
            return pi
    raise ConvergenceError("power iteration did not converge", resid, pi)


def distribution_csv(pi) -> str:
    lines = ["k,pi"] + [f"{k},{float(x)!r}" for k, x in enumerate(pi)]
    return "\n".join(lines) + "\n"


def sample_chain(mf: MeanFieldMap, n: int, steps: int, seed: int, k0: int | None = None) -> np.ndarray:
    """Simulate active-node counts k_{t+1} ~ Binomial(n, mu(k_t / n))."""
    from .seeding import TAG_CHAIN, stream

    rng = stream(seed, TAG_CHAIN)
    table = np.asarray(mf(np.arange(n + 1) / n))
    k = np.empty(steps + 1, dtype=np.int64)
    k[0] = n // 2 if k0 is None else k0
    for t in range(steps):
        k[t + 1] = rng.binomial(n, table[k[t]])
    return k
