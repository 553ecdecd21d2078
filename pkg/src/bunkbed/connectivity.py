"""Reachability between bunkbed vertex copies, post classification, shadows.

Two evaluation paths share one arc program per (model, instance):

* per-configuration BFS (`connects`, `classify`) for symmetry machinery and
  small checks;
* a batch engine (`BatchReachability`) that evaluates one configuration per
  bit of a word array, used by exhaustive enumeration and Monte Carlo.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .models import Configuration, ModelSpec
from .structures import DIGRAPH, GRAPH, HYPERGRAPH, BunkbedInstance, StructureError


@dataclass(frozen=True)
class ReachabilityQuery:
    """Source/target bunkbed copies plus the semantics that produced them."""

    source: tuple[str, int]
    target: tuple[str, int]
    semantics: str = "bond"

    def __post_init__(self):
        if self.semantics not in ("bond", "site"):
            raise ValueError(f"semantics must be bond or site, got {self.semantics!r}")


@dataclass(frozen=True)
class VertexClassification:
    posts: frozenset[str]
    quasi_posts: frozenset[str]


@dataclass(frozen=True)
class ArcProgram:
    """Gated arcs over bunkbed nodes (hypergraph copies get relay nodes).

    An arc fires when its source node is reached and its gate is active;
    site-model gates are open-vertex flags on the destination, bond-model
    gates are retained-element flags.
    """

    n_nodes: int
    n_gates: int
    site: bool
    src: tuple[int, ...]
    dst: tuple[int, ...]
    gate: tuple[int, ...]

    def ordered_from(self, source: int) -> "ArcProgram":
        """Arcs sorted by BFS layer from the source over the full program.

        Arcs whose tail is unreachable even with every gate active can never
        fire and are dropped; the remaining order makes the fixpoint sweep
        converge in a handful of passes.
        """
        out_arcs: dict[int, list[int]] = {}
        for i, s in enumerate(self.src):
            out_arcs.setdefault(s, []).append(i)
        level = {source: 0}
        frontier = [source]
        order: list[int] = []
        while frontier:
            nxt: list[int] = []
            for node in frontier:
                for i in out_arcs.get(node, ()):
                    order.append(i)
                    d = self.dst[i]
                    if d not in level:
                        level[d] = level[node] + 1
                        nxt.append(d)
            frontier = nxt
        return ArcProgram(
            self.n_nodes, self.n_gates, self.site,
            tuple(self.src[i] for i in order),
            tuple(self.dst[i] for i in order),
            tuple(self.gate[i] for i in order),
        )


@lru_cache(maxsize=256)
def _arc_program(model: str, site: bool, b: BunkbedInstance) -> ArcProgram:
    base = b.base
    V, E = base.n_vertices, base.n_edges
    src: list[int] = []
    dst: list[int] = []
    gate: list[int] = []

    def arc(s, d, g):
        src.append(s)
        dst.append(d)
        gate.append(g)

    n_nodes = b.n_nodes
    if site:
        # gates are open-vertex flags; an edge is retained iff both ends open,
        # so gating each hop on the destination suffices once the walk starts
        # at an open source.
        for e, members in enumerate(base.edge_indices):
            for bunk in (0, 1):
                a, c = (b.node(members[0], bunk), b.node(members[1], bunk))
                arc(a, c, c)
                arc(c, a, a)
        for v in range(V):
            lo, hi = b.node(v, 0), b.node(v, 1)
            arc(lo, hi, hi)
            arc(hi, lo, lo)
        return ArcProgram(n_nodes, n_nodes, True,
                          tuple(src), tuple(dst), tuple(gate))

    if base.kind == HYPERGRAPH:
        # relay node per hyperedge copy: vertex -> relay -> vertex
        n_nodes = 2 * V + 2 * E
        for e, members in enumerate(base.edge_indices):
            for bunk in (0, 1):
                elem = b.horizontal_element(e, bunk)
                relay = 2 * V + bunk * E + e
                for v in members:
                    arc(b.node(v, bunk), relay, elem)
                    arc(relay, b.node(v, bunk), elem)
    elif base.kind == GRAPH:
        for e, (a, c) in enumerate(base.edge_indices):
            for bunk in (0, 1):
                elem = b.horizontal_element(e, bunk)
                arc(b.node(a, bunk), b.node(c, bunk), elem)
                arc(b.node(c, bunk), b.node(a, bunk), elem)
    else:  # digraph: horizontal arcs follow edge direction
        for e, (t, h) in enumerate(base.edge_indices):
            for bunk in (0, 1):
                elem = b.horizontal_element(e, bunk)
                arc(b.node(t, bunk), b.node(h, bunk), elem)
    if model == "E8":
        for v in range(V):
            arc(b.node(v, 0), b.node(v, 1), 2 * E + v)
            arc(b.node(v, 1), b.node(v, 0), 2 * E + V + v)
        n_gates = 2 * E + 2 * V
    else:
        for v in range(V):
            elem = b.vertical_element(v)
            arc(b.node(v, 0), b.node(v, 1), elem)
            arc(b.node(v, 1), b.node(v, 0), elem)
        n_gates = b.n_elements
    return ArcProgram(n_nodes, n_gates, False, tuple(src), tuple(dst), tuple(gate))


def arc_program(m: ModelSpec, b: BunkbedInstance) -> ArcProgram:
    m.validate_for(b)
    return _arc_program(m.model, m.site, b)


def _reachable_nodes(b: BunkbedInstance, c: Configuration,
                     source: int, blocked: frozenset[int] = frozenset()) -> set[int]:
    """Nodes reachable from ``source`` in one configuration.

    ``blocked`` nodes are deleted (they neither start nor relay a path).
    Site semantics require the source itself to be open.
    """
    prog = arc_program(c.model, b)
    if source in blocked:
        return set()
    if prog.site and source not in c.open_nodes:
        return set()
    out: dict[int, list[int]] = {}
    for i, s in enumerate(prog.src):
        out.setdefault(s, []).append(i)
    seen = {source}
    stack = [source]
    while stack:
        node = stack.pop()
        for i in out.get(node, ()):
            d = prog.dst[i]
            if d in seen or d in blocked:
                continue
            if c.gate_true(prog.gate[i]):
                seen.add(d)
                stack.append(d)
    return seen


def connects(b: BunkbedInstance, c: Configuration, q: ReachabilityQuery) -> bool:
    """Is there a path of retained elements from q.source to q.target?

    Graph/hypergraph paths are undirected; digraph paths are directed with
    bidirectional verticals.  Under site semantics both endpoints and all
    intermediate vertices must be open; a self-query is true iff the copy is
    open, while bond self-queries hold vacuously.
    """
    if q.semantics != c.model.semantics:
        raise ValueError(
            f"query semantics {q.semantics!r} does not match model {c.model.model}")
    s = b.node_of(*q.source)
    t = b.node_of(*q.target)
    if s == t:
        return (s in c.open_nodes) if c.model.site else True
    return t in _reachable_nodes(b, c, s)


def _both_copy_base_arcs(b: BunkbedInstance, c: Configuration):
    """Base-structure arcs usable in both bunks simultaneously."""
    base = b.base
    E = base.n_edges
    arcs: list[tuple[int, int]] = []
    for e, members in enumerate(base.edge_indices):
        if c.model.model == "E8":
            both = (b.horizontal_element(e, 0) in c.retained
                    and b.horizontal_element(e, 1) in c.retained)
        else:
            both = (b.horizontal_element(e, 0) in c.retained
                    and b.horizontal_element(e, 1) in c.retained)
        if not both:
            continue
        if base.kind == DIGRAPH:
            arcs.append((members[0], members[1]))
        else:
            for a in members:
                for d in members:
                    if a != d:
                        arcs.append((a, d))
    return arcs


def _post_indices(b: BunkbedInstance, c: Configuration) -> set[int]:
    V, E = b.base.n_vertices, b.base.n_edges
    posts = set()
    for v in range(V):
        if c.model.site:
            if b.node(v, 0) in c.open_nodes and b.node(v, 1) in c.open_nodes:
                posts.add(v)
        elif c.model.model == "E8":
            if 2 * E + v in c.retained and 2 * E + V + v in c.retained:
                posts.add(v)
        elif b.vertical_element(v) in c.retained:
            posts.add(v)
    return posts


def classify(b: BunkbedInstance, c: Configuration) -> VertexClassification:
    """Posts and quasi-posts of a configuration.

    A post has its vertical retained (site models: both copies open).  A
    quasi-post additionally reaches some post and is reached back from it
    through edges present in both bunks at once; in a site model that forces
    both copies open, so quasi-posts and posts coincide.
    """
    posts = _post_indices(b, c)
    names = b.base.vertices
    post_names = frozenset(names[v] for v in posts)
    if c.model.site:
        return VertexClassification(post_names, post_names)
    arcs = _both_copy_base_arcs(b, c)
    fwd: dict[int, list[int]] = {}
    rev: dict[int, list[int]] = {}
    for a, d in arcs:
        fwd.setdefault(a, []).append(d)
        rev.setdefault(d, []).append(a)

    def closure(seeds, adj):
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            x = stack.pop()
            for y in adj.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    if b.base.kind == DIGRAPH:
        reach_from_posts = closure(posts, fwd)
        reach_to_posts = closure(posts, rev)
        quasi = reach_from_posts & reach_to_posts
    else:
        quasi = closure(posts, fwd)
    return VertexClassification(post_names,
                                frozenset(names[v] for v in quasi))


def shadow(b: BunkbedInstance, path: list[tuple[str, int]]) -> list[str]:
    """Project a bunkbed path to the base structure.

    Copy labels are removed and consecutive repeats (vertical steps)
    collapse.  The input must be a genuine path: distinct bunkbed nodes with
    every consecutive pair joined by a structure element.
    """
    if not path:
        raise StructureError("empty path")
    nodes = [b.node_of(name, bunk) for name, bunk in path]
    if len(set(nodes)) != len(nodes):
        raise StructureError("not a path: repeated bunkbed vertex")
    adjacency = b.node_adjacency
    for a, d in zip(nodes, nodes[1:]):
        if not any(nbr == d for nbr, _ in adjacency[a]):
            raise StructureError(
                f"not a path: {b.node_label(a)} -> {b.node_label(d)} is not an element")
    out: list[str] = []
    for name, _ in path:
        if not out or out[-1] != name:
            out.append(name)
    return out


_WORD_BITS = 64


def popcount(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


class BatchReachability:
    """Fixpoint reachability from one source, one configuration per bit.

    ``run`` takes a gate array of shape (n_gates, words) and returns the
    (n_nodes, words) reach array: bit t of row x says whether configuration
    t connects the source to node x.
    """

    def __init__(self, m: ModelSpec, b: BunkbedInstance, source: tuple[str, int]):
        prog = arc_program(m, b).ordered_from(b.node_of(*source))
        self.model = m
        self.bunkbed = b
        self.source = b.node_of(*source)
        self.program = prog
        self._src = np.array(prog.src, dtype=np.intp)
        self._dst = np.array(prog.dst, dtype=np.intp)
        self._gate = np.array(prog.gate, dtype=np.intp)

    def run(self, gates: np.ndarray, valid: np.ndarray | None = None) -> np.ndarray:
        words = gates.shape[1]
        prog = self.program
        reach = np.zeros((prog.n_nodes, words), dtype=np.uint64)
        init = gates[self.source] if prog.site else np.full(
            words, 0xFFFFFFFFFFFFFFFF, dtype=np.uint64)
        if valid is not None:
            init = init & valid
        reach[self.source] = init
        src, dst, gate = self._src, self._dst, self._gate
        n_arcs = len(src)
        while True:
            before = reach.copy()
            for i in range(n_arcs):
                d = dst[i]
                np.bitwise_or(reach[d], reach[src[i]] & gates[gate[i]],
                              out=reach[d])
            if np.array_equal(before, reach):
                return reach
