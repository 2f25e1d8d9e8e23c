"""One-dimensional dynamics of a mean-field map: orbits, fixed points, bifurcations."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .meanfield import MeanFieldMap

MARGINAL_BAND = 1e-6
DEFAULT_SWEEP = np.round(np.arange(1, 101) * 0.005, 10)


class NoBifurcationError(RuntimeError):
    """The slope at 1/2 never crosses 1 inside the search interval."""


@dataclass(frozen=True)
class FixedPoint:
    rho_star: float
    slope: float
    stability: str

    @property
    def attracting(self) -> bool:
        return self.stability == "attracting"


def classify(slope: float, band: float = MARGINAL_BAND) -> str:
    if abs(abs(slope) - 1.0) <= band:
        return "marginal"
    return "attracting" if abs(slope) < 1.0 else "repelling"


def iterate(mf: MeanFieldMap, rho0: float, steps: int) -> np.ndarray:
    """Orbit rho_0, mu(rho_0), ..., of length ``steps + 1``."""
    if not 0.0 <= rho0 <= 1.0:
        raise ValueError("rho0 must lie in [0, 1]")
    orbit = np.empty(steps + 1)
    orbit[0] = rho0
    for k in range(steps):
        orbit[k + 1] = mf(orbit[k])
    return orbit


def _bisect(g, a: float, b: float, ga: float, gb: float, tol: float) -> float:
    # Keeps halving past ``tol`` until the residual is also below ``tol``
    # (steep maps need a bracket narrower than tol) or floats run out.
    while True:
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        gm = g(m)
        if gm == 0.0:
            return m
        if (gm < 0) == (ga < 0):
            a, ga = m, gm
        else:
            b, gb = m, gm
        if b - a <= tol and min(abs(ga), abs(gb)) <= tol:
            break
    return a if abs(ga) <= abs(gb) else b


def find_fixed_points(mf: MeanFieldMap, resolution: float = 1e-4,
                      tol: float = 1e-10) -> list[FixedPoint]:
    """Fixed points located by a sign-change scan of mu(rho) - rho plus bisection.

    Tangential roots (touching zero without a sign change) are only found if
    they land exactly on a scan point.
    """
    m = int(round(1.0 / resolution))
    grid = np.linspace(0.0, 1.0, m + 1)
    gvals = mf(grid) - grid

    def g(x):
        return mf(x) - x

    roots = []
    for i in range(m + 1):
        if gvals[i] == 0.0:
            roots.append(float(grid[i]))
        elif i < m and gvals[i + 1] != 0.0 and (gvals[i] < 0) != (gvals[i + 1] < 0):
            roots.append(_bisect(g, float(grid[i]), float(grid[i + 1]),
                                 float(gvals[i]), float(gvals[i + 1]), tol))
    out = []
    for r in roots:
        slope = float(mf.derivative(r))
        out.append(FixedPoint(r, slope, classify(slope)))
    return out


def critical_point(mf: MeanFieldMap, lo: float = 1e-6, hi: float = 0.5,
                   tol: float = 1e-9) -> float:
    """Value of p where the slope at the symmetric fixed point 1/2 equals 1.

    ``mf`` fixes the family; its own ``p`` is ignored.
    """
    for p in (lo, hi):
        if abs(mf.with_p(p)(0.5) - 0.5) > 1e-12:
            raise ValueError(f"{mf.kind} map does not fix rho = 1/2 (needs an odd neighbourhood)")

    def h(p):
        return float(mf.with_p(p).derivative(0.5)) - 1.0

    h_lo, h_hi = h(lo), h(hi)
    if (h_lo > 0) == (h_hi > 0):
        raise NoBifurcationError(f"no bifurcation detected in p in [{lo}, {hi}]")
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        if (h(mid) > 0) == (h_lo > 0):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


@dataclass
class BifurcationDiagram:
    p_values: np.ndarray
    attractor_samples: np.ndarray            # shape (len(p), seeds * keep)
    fixed_points: list[list[FixedPoint]]
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("p,sample_index,rho\n")
        for p, row in zip(self.p_values, self.attractor_samples):
            for j, rho in enumerate(row):
                buf.write(f"{float(p)!r},{j},{float(rho)!r}\n")
        return buf.getvalue()

    def fixed_points_csv(self) -> str:
        buf = io.StringIO()
        buf.write("p,rho_star,slope,stability\n")
        for p, fps in zip(self.p_values, self.fixed_points):
            for fp in fps:
                buf.write(f"{float(p)!r},{fp.rho_star!r},{fp.slope!r},{fp.stability}\n")
        return buf.getvalue()


def bifurcation(mf: MeanFieldMap, p_values=None, transient: int = 1000, keep: int = 50,
                rho0: float = 0.3, fixed_points: bool = True) -> BifurcationDiagram:
    """Iterate the map family for every p from ``rho0`` and ``1 - rho0``.

    The first ``transient`` iterates are discarded and the next ``keep`` are
    retained per seed; all p columns are advanced together.
    """
    p = np.asarray(DEFAULT_SWEEP if p_values is None else p_values, dtype=float)
    if np.any((p <= 0) | (p > 0.5)):
        raise ValueError("p sweep must lie in (0, 0.5]")
    pp = np.concatenate([p, p])
    rho = np.concatenate([np.full(p.size, rho0), np.full(p.size, 1.0 - rho0)])
    tail = np.empty((keep, rho.size))
    for t in range(transient + keep):
        a, b = mf.weights(rho)
        rho = np.clip(pp * a + (1.0 - pp) * b, 0.0, 1.0)
        if t >= transient:
            tail[t - transient] = rho
    samples = np.concatenate([tail[:, :p.size].T, tail[:, p.size:].T], axis=1)
    fps = [find_fixed_points(mf.with_p(float(x))) for x in p] if fixed_points else []
    meta = {"kind": mf.kind, "n": mf.n, "gamma": mf.gamma, "p_e": mf.p_e, "p_w": mf.p_w,
            "transient": transient, "keep": keep, "rho0": rho0}
    return BifurcationDiagram(p, samples, fps, meta)
