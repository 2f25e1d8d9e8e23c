"""Mean-field activation maps rho -> mu(rho) for the majority PCA.

Every map here is a mixture of binomial terms, each weighted by the majority
probability xi_k(r) (``p`` if r <= k/2, ``1 - p`` otherwise).  A map is therefore
``p * A(rho) + (1 - p) * B(rho)``, where ``A`` collects the binomial mass on
the "at most half active" side and ``B`` the rest.  The maps are evaluated by
building the (trials, successes, log-weight) triples once per parameter set
and summing the exponentiated terms in increasing order of magnitude.

Map kinds
---------
grid           p_grid(gamma): fixed neighbourhood of size gamma.
rg_full        p_rg: degree ~ Binomial(n-1, p_e) averaged out.
rg_nu          p_grid with gamma = nu = floor(p_e (n-1)).
grid_pe        the edge-probability-retaining variant over n-1 possible neighbours.
sw_full        small-world double sum, inner sum r <= k - gamma (or r <= k).
rg_gamma       random part of the small world, degrees gamma+1 .. n-1.
grid_gamma_nu  random part collapsed to nu = floor(p_w (n - gamma)) neighbours.
sw_composite   (gamma/n) p_grid (1-p_w)^(n-gamma) + ((n-gamma)/n) grid_gamma_nu.
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .graphs import ConfigurationError

KINDS = ("grid", "rg_full", "rg_nu", "grid_pe", "sw_full", "rg_gamma",
         "grid_gamma_nu", "sw_composite")
# Kinds whose binomial mass A + B is identically one.
FULL_MASS = frozenset({"grid", "rg_full", "rg_nu", "grid_pe"})

_CHUNK_ELEMENTS = 1 << 20


class DegenerateMapWarning(UserWarning):
    """A map collapsed to an empty sum (e.g. nu <= gamma in the small world)."""


def _floor_mul(prob: float, m: int) -> int:
    # floor(prob * m) with prob read as the decimal the user typed, so that
    # 0.57 * 100 gives 57 rather than 56.
    return math.floor(Fraction(repr(float(prob))) * m)


def nu_random(n: int, p_edge: float) -> int:
    """Expected-degree neighbourhood floor(p_e (n - 1))."""
    return _floor_mul(p_edge, n - 1)


def nu_smallworld(n: int, gamma: int, p_wire: float) -> int:
    """Expected shortcut neighbourhood floor(p_w (n - gamma))."""
    return _floor_mul(p_wire, n - gamma)


@lru_cache(maxsize=None)
def _log_comb(k: int, r: int) -> float:
    return math.log(math.comb(k, r))


def _log_comb_array(k, r) -> np.ndarray:
    return np.array([_log_comb(int(a), int(b)) for a, b in zip(k, r)], dtype=float)


def _log_binom_weights(m: int, q: float, ks) -> np.ndarray:
    # log of C(m, k) q^k (1-q)^(m-k) for 0 < q < 1
    ks = np.asarray(ks, dtype=np.int64)
    return (_log_comb_array(np.full_like(ks, m), ks)
            + ks * math.log(q) + (m - ks) * math.log1p(-q))


def binom_pmf(k: int, r: int, q: float) -> float:
    """C(k, r) q^r (1-q)^(k-r), switching to log space for k > 30."""
    if not 0 <= r <= k:
        raise ValueError(f"need 0 <= r <= k, got r={r}, k={k}")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    if k <= 30:
        return math.comb(k, r) * q ** r * (1.0 - q) ** (k - r)
    if q == 0.0 or q == 1.0:
        return float(r == (0 if q == 0.0 else k))
    return math.exp(_log_comb(k, r) + r * math.log(q) + (k - r) * math.log1p(-q))


def majority_weight(k: int, r: int, p: float) -> float:
    """xi_k(r): ``p`` when r <= k/2, else ``1 - p``."""
    return p if 2 * r <= k else 1.0 - p


@dataclass(frozen=True)
class _Terms:
    trials: np.ndarray
    succ: np.ndarray
    base: np.ndarray        # log prefactor + log C(trials, succ)
    on_p: np.ndarray        # True where xi = p

    @classmethod
    def concat(cls, parts):
        return cls(*(np.concatenate([getattr(t, f) for t in parts])
                     for f in ("trials", "succ", "base", "on_p")))

    def shifted(self, log_w: float) -> "_Terms":
        return dataclasses.replace(self, base=self.base + log_w)

    def weights(self, q: np.ndarray, qbar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out_a = np.empty(q.shape)
        out_b = np.empty(q.shape)
        step = max(1, _CHUNK_ELEMENTS // max(1, self.base.size))
        for lo in range(0, q.size, step):
            a, b = self._weights_chunk(q[lo:lo + step], qbar[lo:lo + step])
            out_a[lo:lo + step] = a
            out_b[lo:lo + step] = b
        return out_a, out_b

    def _weights_chunk(self, q, qbar):
        if self.base.size == 0:
            z = np.zeros(q.shape)
            return z, z.copy()
        with np.errstate(divide="ignore", invalid="ignore"):
            lq = np.log(q)[:, None]
            lqb = np.log(qbar)[:, None]
            s = self.succ[None, :]
            f = (self.trials - self.succ)[None, :]
            # 0 * log(0) is taken as 0; the two parts are added in a fixed,
            # commutative way so mirrored terms come out bit-identical.
            u = np.where(s > 0, s * lq, 0.0)
            v = np.where(f > 0, f * lqb, 0.0)
            terms = np.exp(self.base[None, :] + (u + v))
        a = np.sort(terms[:, self.on_p], axis=1).sum(axis=1)
        b = np.sort(terms[:, ~self.on_p], axis=1).sum(axis=1)
        return a, b


def _grid_terms(gamma: int, lo: int = 0, nu_rule: int | None = None) -> _Terms:
    r = np.arange(lo, gamma + 1, dtype=np.int64)
    k = np.full_like(r, gamma)
    rule = gamma if nu_rule is None else nu_rule
    return _Terms(k, r, _log_comb_array(k, r), 2 * r <= rule)


def _degree_mixture(m: int, prob: float, k_lo: int, trunc: int | None) -> _Terms:
    # sum over k = k_lo .. m of P(Bin(m, prob) = k) * sum_{r=0}^{k - trunc} ...
    ks, rs = [], []
    for k in range(k_lo, m + 1):
        top = k if trunc is None else k - trunc
        ks.extend([k] * (top + 1))
        rs.extend(range(top + 1))
    k = np.array(ks, dtype=np.int64)
    r = np.array(rs, dtype=np.int64)
    if k.size == 0:
        return _Terms(k, r, np.zeros(0), np.zeros(0, dtype=bool))
    uniq = np.arange(k_lo, m + 1)
    logp = dict(zip(uniq.tolist(), _log_binom_weights(m, prob, uniq)))
    base = np.array([logp[int(x)] for x in k]) + _log_comb_array(k, r)
    return _Terms(k, r, base, 2 * r <= k)


@lru_cache(maxsize=256)
def _structure(kind: str, n, gamma, p_e, p_w, inner) -> _Terms:
    if kind == "grid":
        return _grid_terms(gamma)
    if kind == "rg_nu":
        return _grid_terms(nu_random(n, p_e))
    if kind == "grid_pe":
        return _grid_terms(n - 1, nu_rule=nu_random(n, p_e))
    if kind == "rg_full":
        return _degree_mixture(n - 1, p_e, 0, None)
    if kind == "sw_full":
        return _degree_mixture(n - 1, p_w, gamma, gamma if inner == "literal" else None)
    if kind == "rg_gamma":
        return _degree_mixture(n - 1, p_w, gamma + 1, gamma)
    if kind == "grid_gamma_nu":
        nu = nu_smallworld(n, gamma, p_w)
        return _grid_terms(nu, lo=gamma + 1) if nu > gamma else _grid_terms(-1)
    if kind == "grid_sw":
        return _grid_terms(gamma).shifted((n - gamma) * math.log1p(-p_w))
    if kind == "sw_composite":
        fixed = _structure("grid_sw", n, gamma, None, p_w, None).shifted(math.log(gamma / n))
        rand = _structure("grid_gamma_nu", n, gamma, None, p_w, None)
        return _Terms.concat([fixed, rand.shifted(math.log((n - gamma) / n))])
    raise ValueError(f"unknown map kind {kind!r}")


@dataclass(frozen=True)
class MeanFieldMap:
    """A parameterised mean-field map; call it on a density (scalar or array).

    ``inner`` only matters for ``sw_full``: ``"literal"`` sums r = 0..k-gamma,
    ``"full"`` sums r = 0..k.
    """

    kind: str
    p: float
    n: int | None = None
    gamma: int | None = None
    p_e: float | None = None
    p_w: float | None = None
    inner: str = "literal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown map kind {self.kind!r}")
        if not 0.0 <= self.p <= 0.5:
            raise ConfigurationError("p must lie in [0, 0.5]")
        if self.kind == "grid":
            if self.gamma is None or self.gamma < 0:
                raise ConfigurationError("grid map needs gamma >= 0")
            return
        if self.n is None or self.n < 2:
            raise ConfigurationError(f"{self.kind} map needs n >= 2")
        if self.kind in ("rg_full", "rg_nu", "grid_pe"):
            if self.p_e is None or not 0.0 < self.p_e < 1.0:
                raise ConfigurationError("p_e must lie strictly in (0, 1)")
            if self.kind == "rg_nu" and self.nu < 1:
                raise ConfigurationError(
                    f"nu = floor(p_e (n-1)) = {self.nu}: graph too sparse for the approximation")
            return
        if self.gamma is None or self.gamma >= self.n:
            raise ConfigurationError("small-world maps need gamma < n")
        if self.p_w is None or not 0.0 < self.p_w < 1.0:
            raise ConfigurationError("p_w must lie strictly in (0, 1)")
        if self.inner not in ("literal", "full"):
            raise ConfigurationError("inner must be 'literal' or 'full'")
        if self.kind in ("grid_gamma_nu", "sw_composite") and self.nu <= self.gamma:
            warnings.warn(f"nu={self.nu} <= gamma={self.gamma}: shortcut term is an empty sum",
                          DegenerateMapWarning, stacklevel=3)

    # constructors -----------------------------------------------------------
    @classmethod
    def grid(cls, gamma: int, p: float) -> "MeanFieldMap":
        return cls("grid", p, gamma=gamma)

    @classmethod
    def random(cls, n: int, p_e: float, p: float, kind: str = "rg_nu") -> "MeanFieldMap":
        return cls(kind, p, n=n, p_e=p_e)

    @classmethod
    def smallworld(cls, n: int, gamma: int, p_w: float, p: float,
                   kind: str = "sw_composite", inner: str = "literal") -> "MeanFieldMap":
        return cls(kind, p, n=n, gamma=gamma, p_w=p_w, inner=inner)

    def with_p(self, p: float) -> "MeanFieldMap":
        return dataclasses.replace(self, p=p)

    # derived quantities -----------------------------------------------------
    @property
    def nu(self) -> int | None:
        if self.kind in ("rg_nu", "grid_pe", "rg_full"):
            return nu_random(self.n, self.p_e)
        if self.kind in ("grid_gamma_nu", "sw_composite", "sw_full", "rg_gamma"):
            return nu_smallworld(self.n, self.gamma, self.p_w)
        return None

    @property
    def degree(self) -> int | None:
        """Fixed neighbourhood size for grid-like maps (analytic derivative)."""
        if self.kind == "grid":
            return self.gamma
        if self.kind == "rg_nu":
            return self.nu
        return None

    @property
    def full_mass(self) -> bool:
        return self.kind in FULL_MASS

    def _terms(self) -> _Terms:
        return _structure(self.kind, self.n, self.gamma, self.p_e, self.p_w, self.inner)

    def weights(self, rho, rho_bar=None) -> tuple[np.ndarray, np.ndarray]:
        """Binomial mass ``(A, B)`` on the ``p`` and ``1 - p`` branches.

        ``rho_bar`` defaults to ``1 - rho``; pass it explicitly when the
        complement is known exactly (e.g. ``(n - k) / n``).
        """
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        rho_bar = 1.0 - rho if rho_bar is None else np.atleast_1d(np.asarray(rho_bar, dtype=float))
        if np.any((rho < 0) | (rho > 1)):
            raise ValueError("densities must lie in [0, 1]")
        if self.kind == "grid_pe":
            q = rho * self.p_e
            return self._terms().weights(q, 1.0 - q)
        return self._terms().weights(rho, rho_bar)

    def value_and_complement(self, rho, rho_bar=None):
        """Return ``(mu, 1 - mu)`` with the complement formed without cancellation."""
        a, b = self.weights(rho, rho_bar)
        mu = np.clip(self.p * a + (1.0 - self.p) * b, 0.0, 1.0)
        if self.full_mass:
            comp = np.clip((1.0 - self.p) * a + self.p * b, 0.0, 1.0)
        else:
            comp = 1.0 - mu
        return mu, comp

    def __call__(self, rho):
        a, b = self.weights(rho)
        # rounding can push a sum of probabilities a few ulps past 1
        out = np.clip(self.p * a + (1.0 - self.p) * b, 0.0, 1.0)
        return float(out[0]) if np.ndim(rho) == 0 else out

    def derivative(self, rho, h: float = 1e-6):
        """Slope of the map; analytic for fixed-degree maps, finite differences otherwise."""
        if self.degree is not None:
            if np.ndim(rho) == 0:
                return mf_derivative(self.degree, self.p, float(rho))
            return np.array([mf_derivative(self.degree, self.p, float(x)) for x in np.ravel(rho)])
        return _finite_difference(self, rho, h)

    def sigma2(self, rho, n: int | None = None):
        return sigma2_for(self, self.n if n is None else n, rho)


def _finite_difference(f, rho, h):
    x = np.atleast_1d(np.asarray(rho, dtype=float))
    lo = x - h < 0
    hi = x + h > 1
    mid = ~(lo | hi)
    d = np.empty_like(x)
    if mid.any():
        d[mid] = (f(x[mid] + h) - f(x[mid] - h)) / (2 * h)
    # second-order one-sided differences at the boundaries
    if lo.any():
        x0 = x[lo]
        d[lo] = (-3 * f(x0) + 4 * f(x0 + h) - f(x0 + 2 * h)) / (2 * h)
    if hi.any():
        x0 = x[hi]
        d[hi] = (3 * f(x0) - 4 * f(x0 - h) + f(x0 - 2 * h)) / (2 * h)
    return float(d[0]) if np.ndim(rho) == 0 else d


# Functional forms ------------------------------------------------------------

def p_grid(gamma: int, p: float, rho):
    return MeanFieldMap.grid(gamma, p)(rho)


def q_half(gamma: int, rho: float) -> float:
    """Partial binomial sum P(Bin(gamma, rho) <= gamma/2)."""
    return math.fsum(binom_pmf(gamma, r, rho) for r in range(gamma // 2 + 1))


def p_grid_q_form(gamma: int, p: float, rho: float) -> float:
    """p_grid written as p q + (1 - p)(1 - q) with q the partial binomial sum."""
    q = q_half(gamma, rho)
    return p * q + (1.0 - p) * (1.0 - q)


def p_rg(n: int, p_e: float, p: float, rho):
    return MeanFieldMap("rg_full", p, n=n, p_e=p_e)(rho)


def p_grid_nu(n: int, p_e: float, p: float, rho):
    return MeanFieldMap("rg_nu", p, n=n, p_e=p_e)(rho)


def p_grid_pe(n: int, p_e: float, p: float, rho):
    return MeanFieldMap("grid_pe", p, n=n, p_e=p_e)(rho)


def p_sw_full(n: int, gamma: int, p_w: float, p: float, rho, inner: str = "literal"):
    return MeanFieldMap("sw_full", p, n=n, gamma=gamma, p_w=p_w, inner=inner)(rho)


def p_rg_gamma(n: int, gamma: int, p_w: float, p: float, rho):
    return MeanFieldMap("rg_gamma", p, n=n, gamma=gamma, p_w=p_w)(rho)


def p_grid_gamma_nu(n: int, gamma: int, p_w: float, p: float, rho):
    return MeanFieldMap("grid_gamma_nu", p, n=n, gamma=gamma, p_w=p_w)(rho)


def p_grid_sw(n: int, gamma: int, p_w: float, p: float, rho):
    """p_grid(gamma) scaled by the probability that no shortcut is present."""
    return p_grid(gamma, p, rho) * (1.0 - p_w) ** (n - gamma)


def p_sw_composite(n: int, gamma: int, p_w: float, p: float, rho):
    return MeanFieldMap("sw_composite", p, n=n, gamma=gamma, p_w=p_w)(rho)


def sigma2_for(mf: MeanFieldMap, n: int, rho):
    """Variance of rho_{t+1} given rho_t for the map's topology.

    Binomial ``mu (1 - mu) / n`` for every kind except ``sw_composite``, where
    the grid and shortcut populations contribute separately.
    """
    if mf.kind == "sw_composite":
        g = mf.gamma
        a = p_grid_sw(mf.n, g, mf.p_w, mf.p, rho)
        b = p_grid_gamma_nu(mf.n, g, mf.p_w, mf.p, rho)
        return g / n ** 2 * a * (1 - a) + (n - g) / n ** 2 * b * (1 - b)
    mu = mf(rho)
    return mu * (1 - mu) / n


def mf_derivative(gamma: int, p: float, rho: float) -> float:
    """d p_grid / d rho.

    In the interior this is sum_r xi(r) C(gamma, r) (r - rho gamma)
    rho^(r-1) (1-rho)^(gamma-r-1); at rho in {0, 1} the same sum is taken
    term by term in the split form r rho^(r-1)(1-rho)^(gamma-r) -
    (gamma-r) rho^r (1-rho)^(gamma-r-1), which has finite limits.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    terms = []
    if 0.0 < rho < 1.0:
        for r in range(gamma + 1):
            terms.append(majority_weight(gamma, r, p) * math.comb(gamma, r) * (r - rho * gamma)
                         * rho ** (r - 1) * (1 - rho) ** (gamma - r - 1))
        return math.fsum(terms)
    for r in range(gamma + 1):
        up = r * rho ** (r - 1) * (1 - rho) ** (gamma - r) if r > 0 else 0.0
        down = (gamma - r) * rho ** r * (1 - rho) ** (gamma - r - 1) if r < gamma else 0.0
        terms.append(majority_weight(gamma, r, p) * math.comb(gamma, r) * (up - down))
    return math.fsum(terms)
