"""Weighted graphs, finite windows, and the collapse construction.

Infinite (or large) graphs are described by a generator: a neighbor function
returning ``(vertex, weight)`` pairs, with vertices encoded as small integer
tuples.  Finite windows are cut out of a generator as graph-distance balls;
a window records its internal symmetric weights, the total edge weight each
vertex sends into the unseen complement, and the full-graph vertex weights
``lambda_x``.  Collapsing the complement onto a single star state turns a
window into a finite irreducible chain ready for continuous-time simulation.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

Vertex = tuple[int, ...]

#: Relative tolerance when checking that a generator reports symmetric weights.
SYMMETRY_RTOL = 1e-12

#: Collapsed transition matrices must be row-stochastic to this tolerance.
ROW_SUM_TOL = 1e-12


class GraphError(Exception):
    """Structural problem in a graph, window, or chain."""


class _Star:
    """The distinguished absorbing-complement state added by the collapse."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "x*"


#: Singleton label for the collapsed-complement state.
STAR = _Star()


@dataclass(frozen=True)
class GraphGenerator:
    """A locally finite weighted graph given by its neighbor function.

    Parameters
    ----------
    neighbors : callable
        Maps a vertex to a finite list of ``(neighbor, weight)`` pairs with
        strictly positive weights.  Weights must be symmetric: querying
        ``y`` from ``x`` and ``x`` from ``y`` yields the same value.
    transient : bool
        User assertion that the induced walk is transient.  Not verified;
        operations that compute infinite-volume limits require it.
    name : str
        Short label used in exports.
    root : tuple of int
        Natural default center for windows.
    """

    neighbors: Callable[[Vertex], list[tuple[Vertex, float]]]
    transient: bool
    name: str = ""
    root: Vertex = (0,)


def lattice(d: int) -> GraphGenerator:
    """Integer lattice ``Z^d`` with unit edge weights.

    The induced walk is transient only for ``d >= 3``; lower dimensions are
    accepted for finite-window mechanics but carry ``transient=False``.
    """
    if d < 1:
        raise ValueError(f"lattice dimension must be >= 1, got {d}")

    def neighbors(v: Vertex) -> list[tuple[Vertex, float]]:
        out = []
        for i in range(d):
            for step in (1, -1):
                w = v[:i] + (v[i] + step,) + v[i + 1 :]
                out.append((w, 1.0))
        return out

    return GraphGenerator(neighbors, transient=d >= 3, name=f"z{d}", root=(0,) * d)


def bary_tree(b: int) -> GraphGenerator:
    """Rooted ``b``-ary tree with unit weights; transient for ``b >= 2``.

    Vertices are paths from the root: the root is ``(0,)`` and the children
    of ``v`` are ``v + (1,) ... v + (b,)``.
    """
    if b < 1:
        raise ValueError(f"branching number must be >= 1, got {b}")

    def neighbors(v: Vertex) -> list[tuple[Vertex, float]]:
        out: list[tuple[Vertex, float]] = []
        if len(v) > 1:
            out.append((v[:-1], 1.0))
        out.extend((v + (i,), 1.0) for i in range(1, b + 1))
        return out

    return GraphGenerator(neighbors, transient=b >= 2, name=f"tree{b}", root=(0,))


def from_edges(edges: Iterable[tuple[int, int, float]], name: str = "edges") -> GraphGenerator:
    """Finite graph from an explicit edge list, with symmetric closure.

    Vertices are 1-tuples of the given integer ids.  Intended for unit tests
    of window/collapse mechanics; the generator is marked non-transient.
    """
    adj: dict[Vertex, dict[Vertex, float]] = {}
    for x, y, w in edges:
        if x == y:
            raise GraphError(f"self-loop at vertex {x} not allowed")
        if w <= 0:
            raise GraphError(f"edge ({x}, {y}) has non-positive weight {w}")
        vx, vy = (int(x),), (int(y),)
        prev = adj.setdefault(vx, {}).get(vy)
        if prev is not None and prev != w:
            raise GraphError(f"conflicting weights for edge ({x}, {y}): {prev} vs {w}")
        adj.setdefault(vx, {})[vy] = float(w)
        adj.setdefault(vy, {})[vx] = float(w)
    if not adj:
        raise GraphError("edge list is empty")
    root = min(adj)

    def neighbors(v: Vertex) -> list[tuple[Vertex, float]]:
        try:
            nb = adj[v]
        except KeyError:
            raise GraphError(f"vertex {v} not present in the edge list") from None
        return sorted(nb.items())

    return GraphGenerator(neighbors, transient=False, name=name, root=root)


def read_edge_list(path) -> GraphGenerator:
    """Parse a text file of ``x y weight`` lines into a finite graph.

    Blank lines and lines starting with ``#`` are skipped; the symmetric
    closure of the listed edges is applied.
    """
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise GraphError(f"{path}:{lineno}: expected 'x y weight', got {line!r}")
            try:
                edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from None
    return from_edges(edges, name="edges")


@dataclass(frozen=True)
class WeightedWindow:
    """A finite connected vertex set with its boundary data.

    ``vertices`` fixes the dense index order.  ``weights`` maps internal
    directed index pairs ``(i, j)`` to the symmetric edge weight;
    ``boundary_weight[i]`` is the total weight of edges from vertex ``i``
    into the complement, and ``lam[i]`` is the full-graph vertex weight, so
    ``lam[i] = sum of internal weights at i + boundary_weight[i]``.
    """

    vertices: tuple[Vertex, ...]
    weights: dict[tuple[int, int], float]
    boundary_weight: np.ndarray
    lam: np.ndarray
    generator: GraphGenerator | None = None
    center: Vertex | None = None
    radius: int | None = None
    index: dict[Vertex, int] = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {v: i for i, v in enumerate(self.vertices)})

    @property
    def n(self) -> int:
        return len(self.vertices)

    def total_boundary_weight(self) -> float:
        return float(self.boundary_weight.sum())

    def weight_matrix(self) -> np.ndarray:
        """Dense symmetric matrix of internal edge weights."""
        c = np.zeros((self.n, self.n))
        for (i, j), w in self.weights.items():
            c[i, j] = w
        return c

    def internal_degree(self) -> np.ndarray:
        deg = np.zeros(self.n)
        for (i, _), w in self.weights.items():
            deg[i] += w
        return deg

    def validate(self) -> None:
        """Check the structural invariants; raise :class:`GraphError` if violated."""
        if self.n == 0:
            raise GraphError("window has no vertices")
        for (i, j), w in self.weights.items():
            if w <= 0:
                raise GraphError(f"internal weight {w} at {(i, j)} not positive")
            if self.weights.get((j, i)) != w:
                raise GraphError(f"internal weights not symmetric at {(i, j)}")
        if np.any(self.boundary_weight < 0):
            raise GraphError("negative boundary weight")
        recon = self.internal_degree() + self.boundary_weight
        if not np.allclose(recon, self.lam, rtol=1e-12, atol=0):
            raise GraphError("lambda does not equal internal degree plus boundary weight")
        if not self._connected():
            raise GraphError("window is not connected through internal edges")

    def _connected(self) -> bool:
        seen = {0}
        stack = [0]
        adj: dict[int, list[int]] = {}
        for (i, j) in self.weights:
            adj.setdefault(i, []).append(j)
        while stack:
            for j in adj.get(stack.pop(), ()):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == self.n

    def to_json_dict(self) -> dict:
        """JSON-ready description: vertices, edges, boundary weights, lambda."""
        edges = sorted(
            [i, j, w] for (i, j), w in self.weights.items() if i < j
        )
        return {
            "generator": self.generator.name if self.generator else None,
            "center": list(self.center) if self.center is not None else None,
            "radius": self.radius,
            "vertices": [list(v) for v in self.vertices],
            "edges": edges,
            "boundary_weight": [float(b) for b in self.boundary_weight],
            "lambda": [float(x) for x in self.lam],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"


@dataclass(frozen=True)
class CollapsedChain:
    """Finite chain on the window vertices plus the star state.

    The star state (index ``n``, label :data:`STAR`) carries all edge weight
    that crossed the window boundary; its weight to window vertex ``y`` is
    the window's ``boundary_weight[y]``.  Vertex weights are unchanged on
    the window, and every state jumps at rate 1.
    """

    window: WeightedWindow
    weights: np.ndarray
    lam: np.ndarray

    @property
    def n_states(self) -> int:
        return self.window.n + 1

    @property
    def star(self) -> int:
        return self.window.n

    @property
    def states(self) -> tuple:
        return self.window.vertices + (STAR,)


def _checked_neighbors(gen: GraphGenerator, v: Vertex) -> list[tuple[Vertex, float]]:
    nb = list(gen.neighbors(v))
    if not nb:
        raise GraphError(f"vertex {v} has an empty neighbor list")
    seen = set()
    for w, c in nb:
        if c <= 0 or not np.isfinite(c):
            raise GraphError(f"edge ({v}, {w}) has invalid weight {c}")
        if w == v:
            raise GraphError(f"self-loop at vertex {v}")
        if w in seen:
            raise GraphError(f"vertex {w} listed twice among neighbors of {v}")
        seen.add(w)
    return nb


def _check_symmetry(gen: GraphGenerator, v: Vertex, w: Vertex, c: float, cache: dict) -> None:
    back = dict(cache[w]).get(v)
    if back is None:
        raise GraphError(f"asymmetric adjacency: {w} is a neighbor of {v} but not conversely")
    if abs(back - c) > SYMMETRY_RTOL * max(1.0, abs(c), abs(back)):
        raise GraphError(f"asymmetric weight on edge ({v}, {w}): {c} vs {back}")


def build_window(gen: GraphGenerator, center: Vertex, radius: int) -> WeightedWindow:
    """Cut the graph-distance ball of the given radius out of a generator.

    Vertices are ordered by breadth-first discovery from ``center``, so the
    dense index order is deterministic.  All edges with both endpoints in
    the ball become internal weights; edge weight into the complement is
    accumulated per vertex, and ``lambda`` comes from the full neighbor
    lists.
    """
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    center = tuple(center)
    order = [center]
    dist = {center: 0}
    cache: dict[Vertex, list[tuple[Vertex, float]]] = {center: _checked_neighbors(gen, center)}
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        if dist[v] == radius:
            continue
        for w, _ in cache[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                order.append(w)
                cache[w] = _checked_neighbors(gen, w)

    index = {v: i for i, v in enumerate(order)}
    n = len(order)
    lam = np.zeros(n)
    boundary = np.zeros(n)
    weights: dict[tuple[int, int], float] = {}
    for v in order:
        i = index[v]
        for w, c in cache[v]:
            lam[i] += c
            j = index.get(w)
            if j is None:
                boundary[i] += c
            else:
                _check_symmetry(gen, v, w, c, cache)
                weights[(i, j)] = float(c)

    return WeightedWindow(
        vertices=tuple(order),
        weights=weights,
        boundary_weight=boundary,
        lam=lam,
        generator=gen,
        center=center,
        radius=radius,
    )


def collapse(window: WeightedWindow) -> CollapsedChain:
    """Collapse the window's complement onto the star state.

    Internal weights are kept; the star state connects to each vertex with
    that vertex's boundary weight and has no self-loop.  Vertex weights stay
    equal to the full-graph ``lambda`` on the window, and the star weight is
    the total boundary weight.
    """
    window.validate()
    total = window.total_boundary_weight()
    if total <= 0:
        raise GraphError("no escape edges: total boundary weight is zero, nothing to collapse onto")
    n = window.n
    c = np.zeros((n + 1, n + 1))
    c[:n, :n] = window.weight_matrix()
    c[n, :n] = window.boundary_weight
    c[:n, n] = window.boundary_weight
    lam = np.concatenate([window.lam, [total]])
    return CollapsedChain(window=window, weights=c, lam=lam)


def transition_matrix(obj: WeightedWindow | CollapsedChain) -> np.ndarray:
    """One-step transition probabilities of the induced discrete walk.

    For a :class:`CollapsedChain` the matrix is row-stochastic (checked to
    ``1e-12``); for a :class:`WeightedWindow` only internal moves appear, so
    row ``x`` sums to ``1 - boundary_weight(x)/lambda(x)`` (the walk is
    killed on exit).
    """
    if isinstance(obj, CollapsedChain):
        p = obj.weights / obj.lam[:, None]
        err = np.abs(p.sum(axis=1) - 1.0).max()
        if err > ROW_SUM_TOL:
            raise GraphError(f"collapsed transition matrix rows sum to 1 +/- {err:.3e}")
        return p
    if isinstance(obj, WeightedWindow):
        return obj.weight_matrix() / obj.lam[:, None]
    raise TypeError(f"expected WeightedWindow or CollapsedChain, got {type(obj).__name__}")


def internal_distances(window: WeightedWindow, source: Vertex) -> np.ndarray:
    """Graph distances from ``source`` using only internal window edges."""
    if source not in window.index:
        raise ValueError(f"source {source} is not a window vertex")
    adj: dict[int, list[int]] = {}
    for (i, j) in window.weights:
        adj.setdefault(i, []).append(j)
    dist = np.full(window.n, -1, dtype=np.int64)
    start = window.index[source]
    dist[start] = 0
    queue = [start]
    head = 0
    while head < len(queue):
        i = queue[head]
        head += 1
        for j in adj.get(i, ()):
            if dist[j] < 0:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def vertices_by_distance(window: WeightedWindow, source: Vertex, targets: Sequence[int]) -> list[Vertex]:
    """First window vertex (in index order) at each requested distance from ``source``.

    Distances without any vertex are skipped.
    """
    dist = internal_distances(window, source)
    out = []
    for d in targets:
        hits = np.nonzero(dist == d)[0]
        if hits.size:
            out.append(window.vertices[hits[0]])
    return out
