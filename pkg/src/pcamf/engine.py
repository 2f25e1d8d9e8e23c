"""Synchronous majority-rule PCA on an arbitrary graph."""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .graphs import Graph
from .seeding import TAG_INIT, TAG_STEPS, stream

# number of steps of uniforms drawn per refill; does not affect the stream
_BLOCK = 256


@dataclass(frozen=True)
class RuleParams:
    p: float
    rule: str = "majority"

    def __post_init__(self):
        if not 0.0 <= self.p <= 0.5:
            raise ValueError(f"p must lie in [0, 0.5], got {self.p}")
        if self.rule != "majority":
            raise ValueError("only the majority rule is implemented")


@dataclass
class PcaState:
    states: np.ndarray
    t: int = 0

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.int8)
        if np.any((self.states != 0) & (self.states != 1)):
            raise ValueError("states must be 0/1")

    @property
    def density(self) -> float:
        return float(self.states.mean())


@dataclass
class DensitySeries:
    values: np.ndarray
    n: int
    meta: dict = field(default_factory=dict)

    @property
    def counts(self) -> np.ndarray:
        return np.rint(self.values * self.n).astype(np.int64)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key}={self.meta[key]}\n")
        buf.write("t,rho\n")
        for t, rho in enumerate(self.values):
            buf.write(f"{t},{float(rho)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DensitySeries":
        meta, rows = {}, []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key] = val
            elif line and line != "t,rho":
                rows.append(float(line.split(",")[1]))
        n = int(meta.get("n", 0)) or None
        return cls(np.array(rows), n, meta)


def majority_prob(k: int, r: int, p: float) -> float:
    """Probability of becoming active with ``r`` of ``k`` neighbours active."""
    if not 0 <= r <= k:
        raise ValueError(f"need 0 <= r <= k, got r={r}, k={k}")
    return p if 2 * r <= k else 1.0 - p


def activation_probabilities(graph: Graph, states, p: float) -> np.ndarray:
    """Per-node probability of being active at the next step."""
    s = np.asarray(states)
    r = np.array([s[list(nb)].sum() if nb else 0 for nb in graph.adjacency])
    return np.where(2 * r > graph.degrees, 1.0 - p, p)


def step(graph: Graph, state: PcaState, rule: RuleParams, rng: np.random.Generator) -> PcaState:
    """One synchronous update: all nodes read the old state, then redraw."""
    if len(state.states) != graph.n:
        raise ValueError("state length does not match the graph")
    prob = activation_probabilities(graph, state.states, rule.p)
    new = (rng.random(graph.n) < prob).astype(np.int8)
    return PcaState(new, state.t + 1)


def initial_state(n: int, seed: int, rho0: float | None = None) -> np.ndarray:
    """Initial configuration.

    With ``rho0`` given, each node is active independently with that
    probability.  Otherwise the number of active nodes is uniform on
    {0, ..., n} and the active nodes are a uniform random subset.
    """
    rng = stream(seed, TAG_INIT)
    if rho0 is not None:
        if not 0.0 <= rho0 <= 1.0:
            raise ValueError("rho0 must lie in [0, 1]")
        return (rng.random(n) < rho0).astype(np.int8)
    k = int(rng.integers(0, n + 1))
    s = np.zeros(n, dtype=np.int8)
    s[rng.choice(n, size=k, replace=False)] = 1
    return s


def run_many(graphs, rule: RuleParams, T: int, seeds, rho0: float | None = None,
             initial=None) -> list[DensitySeries]:
    """Run independent PCAs side by side (one per graph/seed pair).

    The uniforms for step ``t`` (``t`` = 0, 1, ...) and node ``i`` sit at
    position ``t * n + i`` of the run's step stream, so batching runs
    together gives the same series as running them one at a time.
    All graphs must share the same node count.
    """
    graphs = list(graphs)
    seeds = [int(s) for s in seeds]
    if len(graphs) != len(seeds):
        raise ValueError("need one seed per graph")
    if T < 1:
        raise ValueError("T must be at least 1")
    n = graphs[0].n
    if any(g.n != n for g in graphs):
        raise ValueError("all graphs in a batch need the same n")
    R = len(graphs)
    adj = np.stack([g.adjacency_matrix(np.float32) for g in graphs])
    half_deg = np.stack([g.degrees for g in graphs]).astype(np.float32) / 2
    if initial is not None:
        s = np.atleast_2d(np.asarray(initial, dtype=np.float32)).repeat(R, axis=0) \
            if np.ndim(initial) == 1 else np.asarray(initial, dtype=np.float32)
    else:
        s = np.stack([initial_state(n, sd, rho0) for sd in seeds]).astype(np.float32)
    gens = [stream(sd, TAG_STEPS) for sd in seeds]
    counts = np.empty((R, T + 1), dtype=np.int64)
    counts[:, 0] = s.sum(axis=1)
    lo, hi = np.float64(rule.p), np.float64(1.0 - rule.p)
    t = 0
    while t < T:
        block = min(_BLOCK, T - t)
        u = np.stack([g.random((block, n)) for g in gens])
        for b in range(block):
            active = np.matmul(adj, s[:, :, None])[:, :, 0]
            prob = np.where(active > half_deg, hi, lo)
            s = (u[:, b, :] < prob).astype(np.float32)
            counts[:, t + b + 1] = s.sum(axis=1)
        t += block
    out = []
    for g, sd, c in zip(graphs, seeds, counts):
        meta = {"kind": g.kind, "n": n, "p": rule.p, "seed": sd, "T": T}
        out.append(DensitySeries(c / n, n, meta))
    return out


def run(graph: Graph, rule: RuleParams, rho0: float | None = None, T: int = 100,
        seed: int = 0, initial=None) -> DensitySeries:
    """Single PCA run; returns densities rho_0 .. rho_T."""
    return run_many([graph], rule, T, [seed], rho0=rho0, initial=initial)[0]
