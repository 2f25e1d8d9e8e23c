"""Torus, Erdős–Rényi and Newman–Watts small-world graphs."""

from __future__ import annotations

import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .seeding import TAG_EDGES, stream

KINDS = ("torus", "random", "smallworld")


class ConfigurationError(ValueError):
    """Raised for parameter combinations that cannot produce a valid object."""


class DisconnectedGraphWarning(UserWarning):
    """A generated random graph is not connected."""


@dataclass(frozen=True)
class Graph:
    n: int
    adjacency: tuple[tuple[int, ...], ...]
    kind: str

    def __post_init__(self):
        if len(self.adjacency) != self.n:
            raise ValueError("adjacency length must equal n")
        if self.kind not in KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}")

    @classmethod
    def from_edges(cls, n: int, edges, kind: str) -> "Graph":
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs), kind)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    def edges(self) -> list[tuple[int, int]]:
        """Unordered edges as ``(u, v)`` with ``u < v``, lexicographically sorted."""
        return [(u, v) for u, nb in enumerate(self.adjacency) for v in nb if u < v]

    def adjacency_matrix(self, dtype=np.float64) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=dtype)
        for u, nb in enumerate(self.adjacency):
            a[u, list(nb)] = 1
        return a

    def relabel(self, perm) -> "Graph":
        """Graph with node ``u`` renamed ``perm[u]``."""
        return Graph.from_edges(
            self.n, [(perm[u], perm[v]) for u, v in self.edges()], self.kind
        )

    def to_edgelist(self) -> str:
        lines = [f"n={self.n} kind={self.kind}"]
        lines += [f"{u} {v}" for u, v in self.edges()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_edgelist(cls, text: str) -> "Graph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = dict(tok.split("=", 1) for tok in lines[0].split())
        edges = [tuple(int(x) for x in ln.split()) for ln in lines[1:]]
        return cls.from_edges(int(header["n"]), edges, header["kind"])

    def save(self, path) -> None:
        Path(path).write_text(self.to_edgelist())

    @classmethod
    def load(cls, path) -> "Graph":
        return cls.from_edgelist(Path(path).read_text())


@dataclass(frozen=True)
class TopologySpec:
    kind: str
    n: int
    gamma: int = 4
    p_edge: float | None = None
    p_wire: float | None = None
    seed: int = 0
    dim: int = field(default=0)  # 0: 2-D for torus, 1-D ring base for smallworld

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"unknown topology {self.kind!r}")
        if self.n < 4:
            raise ConfigurationError("n must be at least 4")
        if self.kind == "random" and not _open_unit(self.p_edge):
            raise ConfigurationError("p_edge must lie strictly in (0, 1)")
        if self.kind == "smallworld" and not _open_unit(self.p_wire):
            raise ConfigurationError("p_wire must lie strictly in (0, 1)")
        if self.kind == "torus" and self.torus_dim == 2 and math.isqrt(self.n) ** 2 != self.n:
            raise ConfigurationError("a square torus needs n to be a perfect square")

    @property
    def torus_dim(self) -> int:
        if self.dim:
            return self.dim
        return 2 if self.kind == "torus" else 1

    @property
    def param(self) -> float | None:
        """The edge (random) or wiring (smallworld) probability, if any."""
        return {"random": self.p_edge, "smallworld": self.p_wire}.get(self.kind)

    def build(self) -> Graph:
        if self.kind == "torus":
            side = math.isqrt(self.n) if self.torus_dim == 2 else self.n
            return build_torus(side, self.gamma, dim=self.torus_dim)
        if self.kind == "random":
            return build_random(self.n, self.p_edge, self.seed)
        return build_smallworld(self.n, self.gamma, self.p_wire, self.seed, dim=self.torus_dim)


def _open_unit(x) -> bool:
    return x is not None and 0.0 < x < 1.0


def _lattice_edges(side: int, gamma: int, dim: int) -> list[tuple[int, int]]:
    if dim == 1:
        if gamma < 2 or gamma % 2:
            raise ConfigurationError("a ring torus needs an even gamma >= 2")
        if gamma >= side:
            raise ConfigurationError(f"gamma={gamma} neighbours do not fit on a ring of {side}")
        offsets = range(1, gamma // 2 + 1)
        return [(i, (i + d) % side) for i in range(side) for d in offsets]
    if dim != 2:
        raise ConfigurationError("only 1-D rings and 2-D tori are supported")
    if gamma == 4:
        steps = [(0, 1), (1, 0)]
    elif gamma == 8:
        steps = [(0, 1), (1, 0), (1, 1), (1, -1)]
    else:
        raise ConfigurationError("a 2-D torus supports gamma 4 (von Neumann) or 8 (Moore)")
    if side < 3:
        raise ConfigurationError(f"side={side} is too small: periodic neighbours collide")
    edges = []
    for i in range(side):
        for j in range(side):
            for di, dj in steps:
                edges.append((i * side + j, ((i + di) % side) * side + (j + dj) % side))
    return edges


def build_torus(side: int, gamma: int = 4, dim: int = 2) -> Graph:
    """Regular lattice with periodic boundaries; every node has degree ``gamma``.

    ``dim=2`` gives a ``side x side`` torus (gamma 4 or 8), ``dim=1`` a ring of
    ``side`` nodes joined to ``gamma/2`` neighbours on each side.
    """
    if side < 2:
        raise ConfigurationError("side must be at least 2")
    n = side * side if dim == 2 else side
    g = Graph.from_edges(n, _lattice_edges(side, gamma, dim), "torus")
    if np.any(g.degrees != gamma):
        raise ConfigurationError("lattice wrap produced duplicate neighbours")
    return g


def _pair_uniforms(n: int, seed: int) -> np.ndarray:
    # One uniform per unordered pair (i<j) in lexicographic order, so the draw
    # for a pair depends only on (seed, pair index).
    u = stream(seed, TAG_EDGES).random(n * (n - 1) // 2)
    out = np.ones((n, n))
    iu = np.triu_indices(n, 1)
    out[iu] = u
    return out


def _from_upper(mask: np.ndarray, kind: str) -> Graph:
    n = mask.shape[0]
    full = mask | mask.T
    np.fill_diagonal(full, False)
    return Graph(n, tuple(tuple(np.flatnonzero(row).tolist()) for row in full), kind)


def build_random(n: int, p_edge: float, seed: int) -> Graph:
    """Erdős–Rényi G(n, p_edge).

    Emits :class:`DisconnectedGraphWarning` if the sample is not connected.
    """
    if n < 2:
        raise ConfigurationError("n must be at least 2")
    if not _open_unit(p_edge):
        raise ConfigurationError("p_edge must lie strictly in (0, 1)")
    u = _pair_uniforms(n, seed)
    g = _from_upper(np.triu(u < p_edge, 1), "random")
    if not is_connected(g):
        warnings.warn(f"random graph (n={n}, p_edge={p_edge}, seed={seed}) is disconnected",
                      DisconnectedGraphWarning, stacklevel=2)
    return g


def build_smallworld(n: int, gamma: int, p_wire: float, seed: int, dim: int = 1) -> Graph:
    """Newman–Watts small world: a lattice plus independent shortcuts.

    Every pair not joined by the lattice becomes a shortcut with probability
    ``p_wire``.  Lattice edges are never removed.
    """
    if gamma >= n:
        raise ConfigurationError("gamma must be smaller than n")
    if not _open_unit(p_wire):
        raise ConfigurationError("p_wire must lie strictly in (0, 1)")
    if dim == 2:
        side = math.isqrt(n)
        if side * side != n:
            raise ConfigurationError("a 2-D base lattice needs n to be a perfect square")
    else:
        side = n
    lattice = np.zeros((n, n), dtype=bool)
    for a, b in _lattice_edges(side, gamma, dim):
        lattice[min(a, b), max(a, b)] = True
    u = _pair_uniforms(n, seed)
    shortcuts = np.triu(u < p_wire, 1) & ~lattice
    return _from_upper(lattice | shortcuts, "smallworld")


def is_connected(graph: Graph) -> bool:
    """Breadth-first search from node 0 reaches every node."""
    if graph.n == 0:
        return True
    seen = [False] * graph.n
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in graph.adjacency[u]:
            if not seen[v]:
                seen[v] = True
                queue.append(v)
    return all(seen)


def connectivity_threshold(n: int, target_prob: float) -> float:
    """Edge probability at which G(n, p) is connected with ``target_prob``.

    Uses the asymptotic law P(connected) = exp(-exp(-lam)) for
    p = (log n + lam) / n.
    """
    if n < 2 or not 0.0 < target_prob < 1.0:
        raise ConfigurationError("need n >= 2 and 0 < target_prob < 1")
    lam = -math.log(-math.log(target_prob))
    return (math.log(n) + lam) / n
