"""Graphs, hypergraphs, directed multigraphs, and their bunkbed doubles.

A structure is described by an ordered vertex list and an ordered edge list.
The bunkbed double keeps two horizontal copies of every edge (one per bunk)
plus one vertical edge per vertex, in a fixed element order so that
configuration bit indices are stable across runs.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

GRAPH = "graph"
HYPERGRAPH = "hypergraph"
DIGRAPH = "digraph"
KINDS = (GRAPH, HYPERGRAPH, DIGRAPH)


class StructureError(ValueError):
    """Raised for invalid structures or structure files."""


@dataclass(frozen=True)
class Structure:
    """An undirected graph, hypergraph, or directed multigraph.

    Vertices are opaque names; indices follow declaration order.  ``posts``
    marks the vertex subset whose vertical edges are conditioned open, and
    ``doubles`` (digraph only) marks edge indices conditioned to appear in
    both bunks.
    """

    kind: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, ...], ...]
    posts: frozenset[str] = frozenset()
    doubles: frozenset[int] = frozenset()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StructureError(f"unknown structure kind {self.kind!r}")
        seen = set()
        for name in self.vertices:
            if not name:
                raise StructureError("empty vertex name")
            if name in seen:
                raise StructureError(f"duplicate vertex {name!r}")
            seen.add(name)
        undirected_pairs = set()
        hyper_sets = set()
        for i, edge in enumerate(self.edges):
            if len(edge) == 0:
                raise StructureError(f"edge {i} is empty")
            for name in edge:
                if name not in seen:
                    raise StructureError(f"edge {i} uses unknown vertex {name!r}")
            if self.kind == GRAPH:
                if len(edge) != 2 or edge[0] == edge[1]:
                    raise StructureError(
                        f"edge {i} is not an unordered pair of distinct vertices"
                    )
                key = frozenset(edge)
                if key in undirected_pairs:
                    raise StructureError(f"duplicate undirected edge {edge!r}")
                undirected_pairs.add(key)
            elif self.kind == HYPERGRAPH:
                if len(set(edge)) != len(edge):
                    raise StructureError(f"edge {i} repeats a vertex")
                key = frozenset(edge)
                if key in hyper_sets:
                    raise StructureError(f"duplicate hyperedge {edge!r}")
                hyper_sets.add(key)
            else:  # digraph: parallel edges allowed
                if len(edge) != 2:
                    raise StructureError(f"digraph edge {i} needs exactly 2 vertices")
        if self.doubles and self.kind != DIGRAPH:
            raise StructureError("doubles are only allowed on digraphs")
        for i in self.doubles:
            if not 0 <= i < len(self.edges):
                raise StructureError(f"double marker on unknown edge index {i}")
        for name in self.posts:
            if name not in seen:
                raise StructureError(f"post marker on unknown vertex {name!r}")

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.vertices)}

    @cached_property
    def edge_indices(self) -> tuple[tuple[int, ...], ...]:
        """Edges with endpoints converted to vertex indices."""
        vi = self.vertex_index
        return tuple(tuple(vi[name] for name in edge) for edge in self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, name: str) -> int:
        return sum(1 for edge in self.edges if name in edge)

    def neighbours(self, name: str) -> frozenset[str]:
        """All vertices sharing an edge with ``name`` (ignoring direction)."""
        out = set()
        for edge in self.edges:
            if name in edge:
                out.update(edge)
        out.discard(name)
        return frozenset(out)

    def with_posts(self, posts) -> "Structure":
        return Structure(self.kind, self.vertices, self.edges,
                         frozenset(posts), self.doubles)

    def digest(self) -> str:
        return hashlib.sha256(serialize_structure(self).encode()).hexdigest()


def parse_structure(text: str) -> Structure:
    """Parse the line-oriented structure file format.

    ``#`` starts a comment.  The first directive must be a ``type`` line;
    ``vertex <name> [post]`` and ``edge <name>... [double]`` lines follow.
    Declaration order is preserved.
    """
    kind = None
    vertices: list[str] = []
    names: set[str] = set()
    edges: list[tuple[str, ...]] = []
    posts: set[str] = set()
    doubles: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        directive, args = tokens[0], tokens[1:]
        if directive == "type":
            if kind is not None:
                raise StructureError(f"line {lineno}: repeated type line")
            if len(args) != 1 or args[0] not in KINDS:
                raise StructureError(f"line {lineno}: type must be one of {KINDS}")
            kind = args[0]
            continue
        if kind is None:
            raise StructureError(f"line {lineno}: missing type line")
        if directive == "vertex":
            is_post = args and args[-1] == "post"
            if is_post:
                args = args[:-1]
            if len(args) != 1:
                raise StructureError(f"line {lineno}: vertex takes one name")
            name = args[0]
            if name in names:
                raise StructureError(f"line {lineno}: duplicate vertex {name!r}")
            vertices.append(name)
            names.add(name)
            if is_post:
                posts.add(name)
        elif directive == "edge":
            is_double = args and args[-1] == "double"
            if is_double:
                if kind != DIGRAPH:
                    raise StructureError(
                        f"line {lineno}: double marker only valid on digraphs")
                args = args[:-1]
            if not args:
                raise StructureError(f"line {lineno}: empty edge")
            for name in args:
                if name not in names:
                    raise StructureError(
                        f"line {lineno}: unknown vertex {name!r}")
            if kind in (GRAPH, DIGRAPH) and len(args) != 2:
                raise StructureError(
                    f"line {lineno}: {kind} edges take exactly 2 vertices")
            if is_double:
                doubles.add(len(edges))
            edges.append(tuple(args))
        else:
            raise StructureError(f"line {lineno}: unknown directive {directive!r}")
    if kind is None:
        raise StructureError("missing type line")
    return Structure(kind, tuple(vertices), tuple(edges),
                     frozenset(posts), frozenset(doubles))


def serialize_structure(s: Structure) -> str:
    """Render a structure in the file format; inverse of parse_structure."""
    lines = [f"type {s.kind}"]
    for name in s.vertices:
        lines.append(f"vertex {name} post" if name in s.posts else f"vertex {name}")
    for i, edge in enumerate(s.edges):
        suffix = " double" if i in s.doubles else ""
        lines.append("edge " + " ".join(edge) + suffix)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BunkbedInstance:
    """The doubled structure: two horizontal copies of the base plus verticals.

    Element order is fixed: bunk-0 horizontals in edge order, bunk-1
    horizontals in edge order, then verticals in vertex order.  Bunkbed
    vertex ids are ``bunk * V + vertex_index``.  Digraph verticals are
    bidirectional single elements (models that split them into two directed
    elements use their own gate layout on top of this instance).
    """

    base: Structure

    @property
    def n_vertices(self) -> int:
        return self.base.n_vertices

    @property
    def n_base_edges(self) -> int:
        return self.base.n_edges

    @property
    def n_elements(self) -> int:
        return 2 * self.base.n_edges + self.base.n_vertices

    @property
    def n_nodes(self) -> int:
        return 2 * self.base.n_vertices

    @property
    def vertical_bidirectional(self) -> bool:
        return self.base.kind == DIGRAPH

    def horizontal_element(self, edge_index: int, bunk: int) -> int:
        return bunk * self.base.n_edges + edge_index

    def vertical_element(self, vertex_index: int) -> int:
        return 2 * self.base.n_edges + vertex_index

    def node(self, vertex_index: int, bunk: int) -> int:
        return bunk * self.base.n_vertices + vertex_index

    def node_of(self, name: str, bunk: int) -> int:
        if bunk not in (0, 1):
            raise StructureError(f"bunk must be 0 or 1, got {bunk}")
        try:
            v = self.base.vertex_index[name]
        except KeyError:
            raise StructureError(f"unknown vertex {name!r}") from None
        return self.node(v, bunk)

    def node_label(self, node: int) -> tuple[str, int]:
        v = node % self.base.n_vertices
        return self.base.vertices[v], node // self.base.n_vertices

    @cached_property
    def elements(self) -> tuple[tuple, ...]:
        """Ordered element descriptors: ('h', edge_index, bunk) or ('v', vertex_index)."""
        out = []
        for bunk in (0, 1):
            for e in range(self.base.n_edges):
                out.append(("h", e, bunk))
        for v in range(self.base.n_vertices):
            out.append(("v", v))
        return tuple(out)

    @cached_property
    def node_adjacency(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Static bunkbed adjacency: per node, (neighbour node, element) pairs.

        Digraph entries are out-arcs only; vertical arcs appear in both
        directions.  Hyperedge co-membership is expanded to pairs.
        """
        V = self.base.n_vertices
        adj: list[list[tuple[int, int]]] = [[] for _ in range(2 * V)]
        for e, members in enumerate(self.base.edge_indices):
            for bunk in (0, 1):
                elem = self.horizontal_element(e, bunk)
                if self.base.kind == DIGRAPH:
                    t, h = members
                    adj[self.node(t, bunk)].append((self.node(h, bunk), elem))
                else:
                    for a in members:
                        for b in members:
                            if a != b:
                                adj[self.node(a, bunk)].append(
                                    (self.node(b, bunk), elem))
        for v in range(V):
            elem = self.vertical_element(v)
            adj[self.node(v, 0)].append((self.node(v, 1), elem))
            adj[self.node(v, 1)].append((self.node(v, 0), elem))
        return tuple(tuple(entries) for entries in adj)


def build_bunkbed(s: Structure) -> BunkbedInstance:
    """Construct the bunkbed double of a structure."""
    return BunkbedInstance(s)
