"""The nine percolation families E0..E8 over a bunkbed instance.

Each model fixes a set of free binary choices; the family has size 2^f and
is indexed by an f-bit mask.  Free-bit layouts (bit j of the mask):

  E0  j = horizontal element index (bunk-0 edges, then bunk-1 edges)
  E1  j = bunk * V + vertex_index          (vertex copy open?)
  E2  j = rank of non-post vertex; bit 1 places it in bunk 1
  E3  j = bunk * NP + non-post rank        (vertex copy open?)
  E4  j = edge index; bit 1 retains the bunk-1 copy
  E5  j = element index                    (element retained?)
  E6  j = rank of non-double edge; bit 1 retains the bunk-1 copy
  E7  j = element index (a vertical is one bidirectional element)
  E8  j < 2E horizontal element; then V upward verticals, V downward

Forced elements (verticals over T, both copies of double edges) never
consume a free bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .streams import BitStream
from .structures import DIGRAPH, GRAPH, HYPERGRAPH, BunkbedInstance

MODEL_NAMES = ("E0", "E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8")
SITE_MODELS = frozenset({"E1", "E2", "E3"})
_MODELS_WITH_POSTS = frozenset({"E0", "E2", "E3", "E4", "E6"})
_KIND_OF_MODEL = {
    "E0": GRAPH, "E1": GRAPH, "E2": GRAPH, "E3": GRAPH,
    "E4": HYPERGRAPH, "E5": HYPERGRAPH,
    "E6": DIGRAPH, "E7": DIGRAPH, "E8": DIGRAPH,
}

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class ModelError(ValueError):
    """Raised when a model is applied to an incompatible instance."""


@dataclass(frozen=True)
class ModelSpec:
    """A model name plus its conditioning set T of posts.

    T is required by E0/E2/E3/E4/E6 (it may be empty) and must be empty for
    the unconditioned models.  E6 additionally reads the double-edge set F
    from the structure.
    """

    model: str
    posts: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.model not in MODEL_NAMES:
            raise ModelError(f"unknown model {self.model!r}")
        if self.posts and self.model not in _MODELS_WITH_POSTS:
            raise ModelError(f"{self.model} does not take a post set")

    @property
    def site(self) -> bool:
        return self.model in SITE_MODELS

    @property
    def semantics(self) -> str:
        return "site" if self.site else "bond"

    def validate_for(self, b: BunkbedInstance) -> None:
        base = b.base
        want = _KIND_OF_MODEL[self.model]
        if base.kind != want:
            raise ModelError(
                f"model {self.model} requires kind={want}, got {base.kind}")
        unknown = self.posts - set(base.vertices)
        if unknown:
            raise ModelError(f"posts name unknown vertices {sorted(unknown)}")
        if self.model == "E8":
            seen = set()
            for edge in base.edges:
                if edge in seen:
                    raise ModelError("E8 requires a simple digraph "
                                     f"(parallel edge {edge!r})")
                seen.add(edge)


def model_spec(model: str, posts=()) -> ModelSpec:
    return ModelSpec(model, frozenset(posts))


def _non_posts(m: ModelSpec, b: BunkbedInstance) -> list[int]:
    return [i for i, name in enumerate(b.base.vertices) if name not in m.posts]


def _free_edges(m: ModelSpec, b: BunkbedInstance) -> list[int]:
    return [e for e in range(b.base.n_edges) if e not in b.base.doubles]


def free_count(m: ModelSpec, b: BunkbedInstance) -> int:
    """Number of free bits; the family has 2**free_count members."""
    m.validate_for(b)
    V, E = b.base.n_vertices, b.base.n_edges
    if m.model == "E0":
        return 2 * E
    if m.model == "E1":
        return 2 * V
    if m.model == "E2":
        return V - len(m.posts)
    if m.model == "E3":
        return 2 * (V - len(m.posts))
    if m.model == "E4":
        return E
    if m.model in ("E5", "E7"):
        return 2 * E + V
    if m.model == "E6":
        return E - len(b.base.doubles)
    return 2 * E + 2 * V  # E8


def gate_count(m: ModelSpec, b: BunkbedInstance) -> int:
    """Rows of the gate array consumed by the propagation engine."""
    if m.site:
        return b.n_nodes
    if m.model == "E8":
        return 2 * b.base.n_edges + 2 * b.base.n_vertices
    return b.n_elements


@dataclass(frozen=True)
class Configuration:
    """One family member: free bits plus the cached expansion.

    Site models carry the open bunkbed-node set; bond models carry the
    retained element set in the model's gate layout (so E8 retained ids
    cover split verticals).
    """

    model: ModelSpec
    bits: int
    open_nodes: frozenset[int] | None = None
    retained: frozenset[int] | None = None

    def gate_true(self, gate: int) -> bool:
        if self.model.site:
            return gate in self.open_nodes
        return gate in self.retained


def realize(m: ModelSpec, b: BunkbedInstance, bits: int) -> Configuration:
    """Deterministically expand an f-bit mask into a configuration."""
    f = free_count(m, b)
    if bits < 0 or bits >> f:
        raise ModelError(f"bitmask needs exactly {f} bits")
    V, E = b.base.n_vertices, b.base.n_edges
    if m.site:
        open_nodes = set()
        if m.model == "E1":
            for v in range(V):
                for bunk in (0, 1):
                    if (bits >> (bunk * V + v)) & 1:
                        open_nodes.add(b.node(v, bunk))
        elif m.model == "E2":
            nps = _non_posts(m, b)
            for r, v in enumerate(nps):
                open_nodes.add(b.node(v, (bits >> r) & 1))
            for name in m.posts:
                v = b.base.vertex_index[name]
                open_nodes.add(b.node(v, 0))
                open_nodes.add(b.node(v, 1))
        else:  # E3
            nps = _non_posts(m, b)
            for r, v in enumerate(nps):
                for bunk in (0, 1):
                    if (bits >> (bunk * len(nps) + r)) & 1:
                        open_nodes.add(b.node(v, bunk))
            for name in m.posts:
                v = b.base.vertex_index[name]
                open_nodes.add(b.node(v, 0))
                open_nodes.add(b.node(v, 1))
        return Configuration(m, bits, open_nodes=frozenset(open_nodes))

    retained = set()
    post_idx = {b.base.vertex_index[name] for name in m.posts}
    if m.model == "E0":
        for j in range(2 * E):
            if (bits >> j) & 1:
                retained.add(j)
        for v in post_idx:
            retained.add(b.vertical_element(v))
    elif m.model == "E4":
        for e in range(E):
            retained.add(b.horizontal_element(e, (bits >> e) & 1))
        for v in post_idx:
            retained.add(b.vertical_element(v))
    elif m.model in ("E5", "E7"):
        for j in range(2 * E + V):
            if (bits >> j) & 1:
                retained.add(j)
    elif m.model == "E6":
        freed = _free_edges(m, b)
        for r, e in enumerate(freed):
            retained.add(b.horizontal_element(e, (bits >> r) & 1))
        for e in b.base.doubles:
            retained.add(b.horizontal_element(e, 0))
            retained.add(b.horizontal_element(e, 1))
        for v in post_idx:
            retained.add(b.vertical_element(v))
    else:  # E8: split verticals, ids 2E+v upward and 2E+V+v downward
        for j in range(2 * E + 2 * V):
            if (bits >> j) & 1:
                retained.add(j)
    return Configuration(m, bits, retained=frozenset(retained))


def sample(m: ModelSpec, b: BunkbedInstance, stream: BitStream) -> Configuration:
    """Draw a uniform family member from a deterministic stream."""
    return realize(m, b, stream.take(free_count(m, b)))


def gate_masks(m: ModelSpec, b: BunkbedInstance, free: np.ndarray) -> np.ndarray:
    """Expand free-bit mask rows into gate rows for the propagation engine.

    ``free`` has shape (free_count, words); one configuration per bit.  The
    result row g holds, for every configuration in the batch, whether gate g
    (an element for bond models, an open vertex copy for site models) is
    active.  Returns ``free`` itself when the layout is the identity.
    """
    V, E = b.base.n_vertices, b.base.n_edges
    words = free.shape[1]
    post_idx = {b.base.vertex_index[name] for name in m.posts}

    def const(row, value):
        gates[row, :] = _ONES if value else 0

    if m.model in ("E5", "E7", "E8"):
        return free
    if m.model == "E1":
        return free  # bit (bunk*V+v) is exactly node (bunk*V+v)
    gates = np.zeros((gate_count(m, b), words), dtype=np.uint64)
    if m.model == "E2":
        for r, v in enumerate(_non_posts(m, b)):
            gates[b.node(v, 0)] = ~free[r]
            gates[b.node(v, 1)] = free[r]
        for v in post_idx:
            const(b.node(v, 0), True)
            const(b.node(v, 1), True)
    elif m.model == "E3":
        nps = _non_posts(m, b)
        for r, v in enumerate(nps):
            gates[b.node(v, 0)] = free[r]
            gates[b.node(v, 1)] = free[len(nps) + r]
        for v in post_idx:
            const(b.node(v, 0), True)
            const(b.node(v, 1), True)
    elif m.model == "E0":
        gates[:2 * E] = free
        for v in range(V):
            const(b.vertical_element(v), v in post_idx)
    elif m.model == "E4":
        for e in range(E):
            gates[b.horizontal_element(e, 0)] = ~free[e]
            gates[b.horizontal_element(e, 1)] = free[e]
        for v in range(V):
            const(b.vertical_element(v), v in post_idx)
    elif m.model == "E6":
        for r, e in enumerate(_free_edges(m, b)):
            gates[b.horizontal_element(e, 0)] = ~free[r]
            gates[b.horizontal_element(e, 1)] = free[r]
        for e in b.base.doubles:
            const(b.horizontal_element(e, 0), True)
            const(b.horizontal_element(e, 1), True)
        for v in range(V):
            const(b.vertical_element(v), v in post_idx)
    else:
        raise ModelError(f"no gate layout for {m.model}")
    return gates


def flip_bits(m: ModelSpec, b: BunkbedInstance, bits: int, w_indices: frozenset[int]) -> int:
    """Free bits of the (site-)flip of a configuration on vertex set W.

    Site models swap the two copies' openness for vertices of W; bond models
    swap the two horizontal copies of every edge all of whose endpoints lie
    in W.  Verticals and forced elements are untouched, so the result is
    always a member of the same family.
    """
    V, E = b.base.n_vertices, b.base.n_edges
    out = bits
    if m.site:
        if m.model == "E1":
            for v in w_indices:
                lo = (bits >> v) & 1
                hi = (bits >> (V + v)) & 1
                if lo != hi:
                    out ^= (1 << v) | (1 << (V + v))
        elif m.model == "E2":
            ranks = {v: r for r, v in enumerate(_non_posts(m, b))}
            for v in w_indices:
                if v in ranks:
                    out ^= 1 << ranks[v]
        else:  # E3
            nps = _non_posts(m, b)
            ranks = {v: r for r, v in enumerate(nps)}
            for v in w_indices:
                r = ranks.get(v)
                if r is None:
                    continue
                lo = (bits >> r) & 1
                hi = (bits >> (len(nps) + r)) & 1
                if lo != hi:
                    out ^= (1 << r) | (1 << (len(nps) + r))
        return out

    def inside(edge_members) -> bool:
        return all(v in w_indices for v in edge_members)

    if m.model in ("E0", "E5", "E7", "E8"):
        for e, members in enumerate(b.base.edge_indices):
            if inside(members):
                lo = (bits >> e) & 1
                hi = (bits >> (E + e)) & 1
                if lo != hi:
                    out ^= (1 << e) | (1 << (E + e))
    elif m.model == "E4":
        for e, members in enumerate(b.base.edge_indices):
            if inside(members):
                out ^= 1 << e
    elif m.model == "E6":
        for r, e in enumerate(_free_edges(m, b)):
            if inside(b.base.edge_indices[e]):
                out ^= 1 << r
    return out
