"""Monte-Carlo verification of the mean field: snippets, coverage tables, traces.

Seeds are derived per cell and per run from the labels of the cell
(structure, n, T, p, edge/wiring probability, run index), never from a
running counter, so adding or removing cells leaves every other cell intact.
"""

from __future__ import annotations

import io
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bounds import clt_interval
from .dynamics import find_fixed_points, iterate
from .engine import DensitySeries, RuleParams, run, run_many
from .graphs import ConfigurationError, DisconnectedGraphWarning, TopologySpec
from .meanfield import MeanFieldMap, sigma2_for
from .seeding import derive_seed

STRUCTURES = ("torus", "random", "smallworld")
_LIST_FIELDS = ("structures", "n", "T", "p", "p_e", "p_w")


@dataclass(frozen=True)
class SweepConfig:
    structures: tuple[str, ...] = STRUCTURES
    n: tuple[int, ...] = (16, 25, 49, 100)
    T: tuple[int, ...] = (50, 100, 200, 500, 5000)
    p: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5)
    p_e: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 10))
    p_w: tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(1, 10))
    runs: int = 100
    seed: int = 2017
    delta: float = 0.4
    gamma: int = 4
    workers: int = 1

    def __post_init__(self):
        for name in _LIST_FIELDS:
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must not be empty")
        if any(s not in STRUCTURES for s in self.structures):
            raise ConfigurationError(f"structures must be drawn from {STRUCTURES}")
        if any(not 0.0 <= x <= 0.5 for x in self.p):
            raise ConfigurationError("p values must lie in [0, 0.5]")
        if any(not 0.0 < x < 1.0 for x in self.p_e + self.p_w):
            raise ConfigurationError("p_e and p_w must lie in (0, 1)")
        if self.runs < 1 or any(t < 1 for t in self.T) or self.delta <= 0:
            raise ConfigurationError("runs and T must be >= 1, delta > 0")

    @classmethod
    def from_text(cls, text: str, **overrides) -> "SweepConfig":
        """Parse ``key = value`` lines; lists are comma separated, ``#`` starts a comment."""
        types = {f.name: f.type for f in fields(cls)}
        values = {}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in types:
                raise ConfigurationError(f"bad config line: {raw!r}")
            values[key] = _parse_value(key, val)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    @classmethod
    def from_file(cls, path, **overrides) -> "SweepConfig":
        return cls.from_text(Path(path).read_text(), **overrides)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(f"{f.name} = {', '.join(map(str, v)) if isinstance(v, tuple) else v}")
        return "\n".join(out) + "\n"

    def cells(self):
        """All (structure, T, n, param, p) cells in deterministic order."""
        for s in self.structures:
            params = {"torus": (None,), "random": self.p_e, "smallworld": self.p_w}[s]
            for T in self.T:
                for n in self.n:
                    for prm in params:
                        for p in self.p:
                            yield (s, T, n, prm, p)


def _parse_value(key, val):
    items = [v.strip() for v in val.split(",") if v.strip()]
    if key == "structures":
        return tuple(items)
    if key in ("n", "T"):
        return tuple(int(v) for v in items)
    if key in _LIST_FIELDS:
        return tuple(float(v) for v in items)
    if key in ("runs", "seed", "gamma", "workers"):
        return int(items[0])
    return float(items[0])


@dataclass(frozen=True)
class CoverageRow:
    structure: str
    T: int
    n: int
    param: float | None
    p: float
    coverage90: float
    coverage95: float
    snippets: int
    disconnected: int = 0
    valid: bool = True
    reason: str = ""

    HEADER = "structure,T,n,param,p,coverage90,coverage95,snippets,disconnected,valid,reason"

    def csv_line(self) -> str:
        prm = "-" if self.param is None else repr(float(self.param))
        return (f"{self.structure},{self.T},{self.n},{prm},{float(self.p)!r},{float(self.coverage90)!r},"
                f"{float(self.coverage95)!r},{self.snippets},{self.disconnected},"
                f"{int(self.valid)},{self.reason}")


def rows_to_csv(rows) -> str:
    return CoverageRow.HEADER + "\n" + "".join(r.csv_line() + "\n" for r in rows)


def snippets(series, delta: float = 0.4) -> list[float]:
    """Means of the maximal segments with no step-to-step jump above ``delta``."""
    values = np.asarray(series.values if isinstance(series, DensitySeries) else series, float)
    if values.size == 0:
        raise ValueError("series is empty")
    if delta <= 0:
        raise ValueError("delta must be positive")
    cuts = np.flatnonzero(np.abs(np.diff(values)) > delta) + 1
    return [float(seg.mean()) for seg in np.split(values, cuts)]


def map_for(structure: str, n: int, param: float | None, p: float, gamma: int = 4) -> MeanFieldMap:
    """Mean-field map used to judge simulations on ``structure``."""
    if structure == "torus":
        return MeanFieldMap.grid(gamma, p)
    if structure == "random":
        return MeanFieldMap.random(n, param, p)
    return MeanFieldMap.smallworld(n, gamma, param, p)


def _spec(structure, n, param, gamma, seed) -> TopologySpec:
    if structure == "torus":
        return TopologySpec("torus", n, gamma=gamma)
    if structure == "random":
        return TopologySpec("random", n, p_edge=param, seed=seed)
    return TopologySpec("smallworld", n, gamma=gamma, p_wire=param, seed=seed)


def simulate_cell(structure, T, n, param, p, runs, base_seed, gamma=4):
    """Run ``runs`` seeded simulations of one cell; returns (series, disconnected)."""
    specs, seeds = [], []
    for i in range(runs):
        key = (base_seed, structure, n, T, p, param, i)
        specs.append(_spec(structure, n, param, gamma, derive_seed(*key, "graph")))
        seeds.append(derive_seed(*key, "run"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DisconnectedGraphWarning)
        graphs = [s.build() for s in specs]
    disconnected = sum(issubclass(w.category, DisconnectedGraphWarning) for w in caught)
    return run_many(graphs, RuleParams(p), T, seeds), disconnected


def nearest_attracting(fixed_points, rho: float):
    return min((fp for fp in fixed_points if fp.attracting), key=lambda fp: abs(fp.rho_star - rho))


def coverage_cell(structure, T, n, param, p, runs=100, base_seed=2017, delta=0.4, gamma=4):
    """Coverage of snippet means by CLT intervals around the nearest attracting branch.

    The initial configuration rho_0 is excluded from the snippet analysis:
    it is not produced by the dynamics and would otherwise form a spurious
    snippet whenever the first step jumps by more than ``delta``.
    """
    try:
        mf = map_for(structure, n, param, p, gamma)
        fps = find_fixed_points(mf)
    except (ConfigurationError, ValueError) as exc:
        return CoverageRow(structure, T, n, param, p, math.nan, math.nan, 0, 0, False, str(exc)), []
    if not any(fp.attracting for fp in fps):
        return CoverageRow(structure, T, n, param, p, math.nan, math.nan, 0, 0, False,
                           "no attracting fixed point"), []
    series, disconnected = simulate_cell(structure, T, n, param, p, runs, base_seed, gamma)
    hits = {0.90: 0, 0.95: 0}
    means = []
    for s in series:
        for m in snippets(s.values[1:], delta):
            means.append(m)
            fp = nearest_attracting(fps, m)
            var = float(sigma2_for(mf, n, fp.rho_star))
            for level in hits:
                hits[level] += m in clt_interval(fp.rho_star, var, level)
    total = len(means)
    return CoverageRow(structure, T, n, param, p, hits[0.90] / total, hits[0.95] / total,
                       total, disconnected), means


def _cell_job(args):
    cell, cfg = args
    row, _ = coverage_cell(*cell, runs=cfg.runs, base_seed=cfg.seed, delta=cfg.delta,
                           gamma=cfg.gamma)
    return row


def coverage_table(config: SweepConfig) -> list[CoverageRow]:
    """One CoverageRow per cell of the sweep, in deterministic cell order."""
    cells = list(config.cells())
    jobs = [(c, config) for c in cells]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_cell_job, jobs))
    return [_cell_job(j) for j in jobs]


def marginalize(rows, keep=("structure", "T", "n", "p")) -> list[dict]:
    """Snippet-weighted average coverage over every column not in ``keep``."""
    groups: dict[tuple, list[CoverageRow]] = {}
    for r in rows:
        if r.valid:
            groups.setdefault(tuple(getattr(r, k) for k in keep), []).append(r)
    out = []
    for key, grp in groups.items():
        tot = sum(r.snippets for r in grp)
        rec = dict(zip(keep, key))
        rec["coverage90"] = sum(r.coverage90 * r.snippets for r in grp) / tot
        rec["coverage95"] = sum(r.coverage95 * r.snippets for r in grp) / tot
        rec["snippets"] = tot
        out.append(rec)
    return out


def marginal_csv(records) -> str:
    if not records:
        return ""
    cols = list(records[0])
    lines = [",".join(cols)] + [",".join(repr(r[c]) if isinstance(r[c], float) else str(r[c])
                                         for c in cols) for r in records]
    return "\n".join(lines) + "\n"


@dataclass
class IntervalDiagram:
    branches: list[tuple[float, float, float, float]] = field(default_factory=list)
    means: list[tuple[float, float]] = field(default_factory=list)

    def branches_csv(self) -> str:
        return "p,branch_rho,hw90,hw95\n" + "".join(
            f"{float(p)!r},{float(b)!r},{float(h90)!r},{float(h95)!r}\n" for p, b, h90, h95 in self.branches)

    def means_csv(self) -> str:
        return "p,rho_hat\n" + "".join(f"{float(p)!r},{float(m)!r}\n" for p, m in self.means)


def bifurcation_with_intervals(structure: str, n: int, param=None, p_values=(0.1, 0.2, 0.3, 0.4, 0.5),
                               runs: int = 0, T: int = 500, base_seed: int = 2017,
                               delta: float = 0.4, gamma: int = 4) -> IntervalDiagram:
    """Attracting branches with 90/95% CLT half-widths, plus simulated snippet means."""
    out = IntervalDiagram()
    for p in p_values:
        mf = map_for(structure, n, param, p, gamma)
        for fp in find_fixed_points(mf):
            if not fp.attracting:
                continue
            var = float(sigma2_for(mf, n, fp.rho_star))
            out.branches.append((p, fp.rho_star, clt_interval(fp.rho_star, var, 0.90).half_width,
                                 clt_interval(fp.rho_star, var, 0.95).half_width))
        if runs:
            series, _ = simulate_cell(structure, T, n, param, p, runs, base_seed, gamma)
            for s in series:
                out.means.extend((p, m) for m in snippets(s.values[1:], delta))
    return out


def evolution_trace(spec: TopologySpec, rule: RuleParams, T: int, seed: int,
                    rho0: float | None = None) -> list[tuple[int, float, float]]:
    """Simulated densities next to the mean-field orbit started from the same rho_0."""
    series = run(spec.build(), rule, rho0=rho0, T=T, seed=seed)
    mf = map_for(spec.kind, spec.n, spec.param, rule.p, spec.gamma)
    orbit = iterate(mf, float(series.values[0]), T)
    return [(t, float(a), float(b)) for t, (a, b) in enumerate(zip(series.values, orbit))]


def trace_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("t,rho_sim,rho_mf\n")
    for t, a, b in rows:
        buf.write(f"{t},{float(a)!r},{float(b)!r}\n")
    return buf.getvalue()


def with_overrides(config: SweepConfig, **kw) -> SweepConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
