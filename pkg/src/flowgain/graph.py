"""Weighted graphs, port sets and the spectral primitives built on them.

Nodes are integers ``0 .. n_nodes - 1``. Edges are stored as an ordered
list ``(u, v, w)``; the order fixes the column order of the incidence
matrix and the coordinate order of every weight vector in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "WeightedGraph",
    "SignedGraph",
    "PortSet",
    "Spectrum",
    "GraphError",
    "DisconnectedPort",
    "incidence",
    "laplacian",
    "signed_laplacian",
    "spectrum",
    "pseudo_inverse",
    "effective_resistance",
    "algebraic_connectivity",
    "components",
    "same_component",
    "psd_tolerance",
    "is_psd",
    "edge_vector",
    "SUPPORT_TOL",
    "RANK_RTOL",
]

# weights at or below this count as absent when deciding connectivity
SUPPORT_TOL = 1e-12
# eigenvalues below RANK_RTOL * max|eigenvalue| are treated as zero
RANK_RTOL = 1e-10
PSD_RTOL = 1e-8


class GraphError(ValueError):
    """Raised when a graph, port set or matrix violates its invariants."""


class DisconnectedPort(GraphError):
    """Two nodes that must be joined lie in different components."""


def _check_pair(u, v, n_nodes, what="edge"):
    if not (0 <= u < n_nodes and 0 <= v < n_nodes):
        raise GraphError(f"{what} ({u}, {v}) has a node outside 0..{n_nodes - 1}")
    if u == v:
        raise GraphError(f"{what} ({u}, {v}) is a self-loop")


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected simple graph with nonnegative edge weights."""

    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]

    def __init__(self, n_nodes: int, edges: Sequence[Sequence] = ()):
        n_nodes = int(n_nodes)
        if n_nodes < 1:
            raise GraphError("a graph needs at least one node")
        clean = []
        seen = set()
        for edge in edges:
            u, v, w = int(edge[0]), int(edge[1]), float(edge[2])
            _check_pair(u, v, n_nodes)
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {{{u}, {v}}}")
            seen.add(key)
            if not np.isfinite(w) or w < 0:
                raise GraphError(f"edge ({u}, {v}) has invalid weight {w!r}")
            clean.append((u, v, w))
        object.__setattr__(self, "n_nodes", n_nodes)
        object.__setattr__(self, "edges", tuple(clean))

    @classmethod
    def from_topology(cls, n_nodes, pairs, weights):
        """Combine an edge list ``[(u, v), ...]`` with a weight vector."""
        weights = np.asarray(weights, dtype=float)
        if len(pairs) != weights.shape[0]:
            raise GraphError("weight vector length does not match edge count")
        return cls(n_nodes, [(u, v, float(w)) for (u, v), w in zip(pairs, weights)])

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(u, v) for u, v, _ in self.edges]

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for _, _, w in self.edges], dtype=float)

    def with_weights(self, weights) -> "WeightedGraph":
        return WeightedGraph.from_topology(self.n_nodes, self.pairs, weights)

    def scaled(self, s: float) -> "WeightedGraph":
        return self.with_weights(s * self.weights)


@dataclass(frozen=True)
class SignedGraph:
    """A nonnegative graph plus a list of negatively weighted edges.

    The Laplacian of the whole thing is the sum of the two parts'
    Laplacians; negative edges may share a node pair with a positive edge.
    """

    positive_part: WeightedGraph
    negative_edges: tuple[tuple[int, int, float], ...]

    def __init__(self, positive_part: WeightedGraph, negative_edges: Sequence[Sequence] = ()):
        n = positive_part.n_nodes
        clean = []
        seen = set()
        for edge in negative_edges:
            u, v, w = int(edge[0]), int(edge[1]), float(edge[2])
            _check_pair(u, v, n, "negative edge")
            key = frozenset((u, v))
            if key in seen:
                raise GraphError(f"duplicate negative edge {{{u}, {v}}}")
            seen.add(key)
            if not np.isfinite(w) or w >= 0:
                raise GraphError(f"negative edge ({u}, {v}) has weight {w!r}, expected < 0")
            clean.append((u, v, w))
        object.__setattr__(self, "positive_part", positive_part)
        object.__setattr__(self, "negative_edges", tuple(clean))

    @property
    def n_nodes(self) -> int:
        return self.positive_part.n_nodes


@dataclass(frozen=True)
class PortSet:
    """Ordered list of ``(inflow, outflow)`` node pairs, one per disturbance channel."""

    n_nodes: int
    ports: tuple[tuple[int, int], ...]

    def __init__(self, n_nodes: int, ports: Sequence[Sequence[int]]):
        n_nodes = int(n_nodes)
        clean = []
        for p in ports:
            i, j = int(p[0]), int(p[1])
            _check_pair(i, j, n_nodes, "port")
            clean.append((i, j))
        object.__setattr__(self, "n_nodes", n_nodes)
        object.__setattr__(self, "ports", tuple(clean))

    @property
    def k(self) -> int:
        return len(self.ports)

    def matrix(self) -> np.ndarray:
        """The ``n_nodes x k`` matrix with +1 at each inflow and -1 at each outflow."""
        E = np.zeros((self.n_nodes, self.k))
        for col, (i, j) in enumerate(self.ports):
            E[i, col] = 1.0
            E[j, col] = -1.0
        return E


class Spectrum(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def edge_vector(n: int, u: int, v: int) -> np.ndarray:
    """``e_u - e_v`` in R^n."""
    b = np.zeros(n)
    b[u] = 1.0
    b[v] = -1.0
    return b


def incidence(g: WeightedGraph) -> np.ndarray:
    """Node-by-edge incidence matrix, +1 at the lower endpoint of each edge."""
    B = np.zeros((g.n_nodes, g.n_edges))
    for j, (u, v, _) in enumerate(g.edges):
        lo, hi = min(u, v), max(u, v)
        B[lo, j] = 1.0
        B[hi, j] = -1.0
    return B


def _laplacian_from_pairs(n, edges):
    L = np.zeros((n, n))
    for u, v, w in edges:
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    return L


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Weighted Laplacian ``B diag(w) B^T``."""
    return _laplacian_from_pairs(g.n_nodes, g.edges)


def signed_laplacian(sg: SignedGraph) -> np.ndarray:
    return laplacian(sg.positive_part) + _laplacian_from_pairs(sg.n_nodes, sg.negative_edges)


def _check_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise GraphError(f"expected a square matrix, got shape {a.shape}")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12 * scale:
        raise GraphError("matrix is not symmetric")
    return a


def spectrum(a) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix, eigenvalues ascending."""
    a = _check_symmetric(a)
    # symmetrize exactly so that eigh sees the same matrix regardless of triangle
    vals, vecs = np.linalg.eigh(0.5 * (a + a.T))
    return Spectrum(vals, vecs)


def pseudo_inverse(a) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix through its eigendecomposition.

    Eigenvalues with magnitude at most ``RANK_RTOL`` times the largest
    magnitude are treated as zero.
    """
    vals, vecs = spectrum(a)
    if vals.size == 0:
        return np.zeros_like(np.asarray(a, dtype=float))
    top = np.max(np.abs(vals))
    keep = np.abs(vals) > RANK_RTOL * top
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    out = (vecs * inv) @ vecs.T
    return 0.5 * (out + out.T)


def components(g: WeightedGraph) -> np.ndarray:
    """Component label per node, using only edges with weight above ``SUPPORT_TOL``."""
    parent = list(range(g.n_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, w in g.edges:
        if w > SUPPORT_TOL:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[max(ru, rv)] = min(ru, rv)
    return np.array([find(x) for x in range(g.n_nodes)])


def same_component(g: WeightedGraph, pairs) -> bool:
    labels = components(g)
    return all(labels[i] == labels[j] for i, j in pairs)


def effective_resistance(g: WeightedGraph, i: int, j: int) -> float:
    """``(e_i - e_j)^T L^+ (e_i - e_j)`` with weights read as conductances."""
    if i == j:
        raise GraphError("effective resistance needs two distinct nodes")
    _check_pair(i, j, g.n_nodes, "node pair")
    if not same_component(g, [(i, j)]):
        raise DisconnectedPort(f"nodes {i} and {j} are not connected")
    b = edge_vector(g.n_nodes, i, j)
    return float(b @ pseudo_inverse(laplacian(g)) @ b)


def algebraic_connectivity(g: WeightedGraph) -> float:
    """Second smallest Laplacian eigenvalue; 0 for a single node or a disconnected graph."""
    if g.n_nodes < 2:
        return 0.0
    if len(set(components(g).tolist())) > 1:
        return 0.0
    return float(spectrum(laplacian(g)).eigenvalues[1])


def psd_tolerance(eigenvalues, rtol: float = PSD_RTOL) -> float:
    """Slack ``rtol * max(1, max|eigenvalue|)`` used by every PSD verdict."""
    top = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return rtol * max(1.0, top)


def is_psd(a, rtol: float = PSD_RTOL) -> tuple[bool, float]:
    """PSD verdict and the smallest eigenvalue (the margin)."""
    vals = spectrum(a).eigenvalues
    margin = float(vals[0])
    return margin >= -psd_tolerance(vals, rtol), margin
