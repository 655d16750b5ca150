"""Directed graphs with wheels, encoded by flags, involution and partition.

A graph is a finite flag set {0..N-1}, a self-inverse map pairing flags into
edges (fixed points are legs), a partition of the flags into vertices, and a
per-flag direction.  Every edge pairs one outgoing with one incoming flag;
legs carry a bijective labeling by {out 1..m} and {in 1..n}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

from .errors import BadLegLabels, MalformedInvolution, MixedEdgeDirection, NotAnEdge, UnknownVertex

OUT = "out"
IN = "in"


class ExceptionalGraph(Enum):
    """The vertex-free units: a bare strand and a lone wheel.

    They act as identities for grafting and contraction and never enter
    basis enumerations.
    """

    STRAND = "strand"
    WHEEL = "wheel"


@dataclass(frozen=True)
class Biarity:
    outputs: int
    inputs: int

    def __post_init__(self):
        if self.outputs < 0 or self.inputs < 0:
            raise ValueError("biarity components must be nonnegative")

    def as_tuple(self):
        return (self.outputs, self.inputs)


@dataclass(frozen=True)
class FlagGraph:
    n_flags: int
    involution: tuple
    blocks: tuple  # tuple of tuples of flags
    direction: tuple  # per flag, OUT or IN
    out_legs: tuple  # tuple of (label, flag), labels 1..m
    in_legs: tuple

    # -- validation ---------------------------------------------------------

    def validate(self):
        n = self.n_flags
        inv = self.involution
        if len(inv) != n or sorted(set(inv)) != list(range(n)):
            raise MalformedInvolution("involution is not a bijection on the flags")
        for f in range(n):
            if not (0 <= inv[f] < n) or inv[inv[f]] != f:
                raise MalformedInvolution(f"involution not self-inverse at flag {f}")
        if len(self.direction) != n or any(d not in (OUT, IN) for d in self.direction):
            raise MixedEdgeDirection("direction must assign 'out' or 'in' to every flag")
        for f in range(n):
            g = inv[f]
            if g != f and self.direction[f] == self.direction[g]:
                raise MixedEdgeDirection(
                    f"edge ({f},{g}) pairs two {self.direction[f]}-flags"
                )
        seen = set()
        for block in self.blocks:
            for f in block:
                if f in seen or not (0 <= f < n):
                    raise MalformedInvolution(f"flag {f} not in exactly one block")
                seen.add(f)
        if seen != set(range(n)):
            raise MalformedInvolution("blocks do not partition the flag set")
        fixed = {f for f in range(n) if inv[f] == f}
        legs = {}
        for label, f in self.out_legs:
            legs[f] = (OUT, label)
        for label, f in self.in_legs:
            if f in legs:
                raise BadLegLabels(f"flag {f} labeled twice")
            legs[f] = (IN, label)
        if set(legs) != fixed:
            raise BadLegLabels("leg labels are not a bijection onto the fixed points")
        for f, (d, _label) in legs.items():
            if self.direction[f] != d:
                raise BadLegLabels(f"leg at flag {f} has direction {self.direction[f]}, labeled {d}")
        out_labels = sorted(label for label, _ in self.out_legs)
        in_labels = sorted(label for label, _ in self.in_legs)
        if out_labels != list(range(1, len(out_labels) + 1)):
            raise BadLegLabels(f"output labels {out_labels} are not 1..m")
        if in_labels != list(range(1, len(in_labels) + 1)):
            raise BadLegLabels(f"input labels {in_labels} are not 1..n")
        return self

    def is_valid(self):
        try:
            self.validate()
            return True
        except Exception:
            return False

    # -- basic data ----------------------------------------------------------

    @property
    def biarity(self):
        return Biarity(len(self.out_legs), len(self.in_legs))

    def edges(self):
        """Internal edges as (tail_flag, head_flag) with tail outgoing."""
        out = []
        for f in range(self.n_flags):
            g = self.involution[f]
            if g != f and f < g:
                tail, head = (f, g) if self.direction[f] == OUT else (g, f)
                out.append((tail, head))
        return out

    def vertex_of(self, flag):
        for vi, block in enumerate(self.blocks):
            if flag in block:
                return vi
        raise UnknownVertex(f"flag {flag} belongs to no block")

    def biarity_of(self, vertex_index):
        if not (0 <= vertex_index < len(self.blocks)):
            raise UnknownVertex(f"no vertex {vertex_index}")
        block = self.blocks[vertex_index]
        m = sum(1 for f in block if self.direction[f] == OUT)
        return Biarity(m, len(block) - m)

    # -- wheels and loop numbers ----------------------------------------------

    def wheels(self):
        """All simple directed cycles of internal edges.

        A wheel is returned as a tuple of edges (tail_flag, head_flag); it
        visits each vertex at most once.  Parallel edges give distinct wheels.
        """
        edges = self.edges()
        by_tail = {}
        for idx, (t, h) in enumerate(edges):
            by_tail.setdefault(self.vertex_of(t), []).append((idx, self.vertex_of(h)))
        cycles = []

        nverts = len(self.blocks)
        for start in range(nverts):
            # search for cycles whose minimal vertex is `start`
            def walk(v, path_edges, visited):
                for idx, w in by_tail.get(v, ()):
                    if w == start:
                        cycles.append(tuple(edges[i] for i in path_edges + [idx]))
                    elif w > start and w not in visited:
                        walk(w, path_edges + [idx], visited | {w})

            walk(start, [], frozenset({start}))
        return cycles

    def loop_numbers(self):
        """(betti1, genus_euler) = (E - V + components, 1 + E - V)."""
        nverts = len(self.blocks)
        edges = self.edges()
        parent = list(range(nverts))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for t, h in edges:
            a, b = find(self.vertex_of(t)), find(self.vertex_of(h))
            if a != b:
                parent[a] = b
        comps = len({find(v) for v in range(nverts)})
        betti1 = len(edges) - nverts + comps
        genus = 1 + len(edges) - nverts
        return betti1, genus

    # -- contraction -----------------------------------------------------------

    def contract_edge(self, edge):
        """Contract an internal edge given as a (flag, flag) pair.

        Distinct endpoints merge into one vertex; a loop just loses its two
        flags.
        """
        f, g = edge
        if not (0 <= f < self.n_flags) or self.involution[f] != g or f == g:
            raise NotAnEdge(f"{edge} is not an internal edge")
        vi, vj = self.vertex_of(f), self.vertex_of(g)
        remove = {f, g}
        old_to_new = {}
        nxt = 0
        for old in range(self.n_flags):
            if old in remove:
                continue
            old_to_new[old] = nxt
            nxt += 1
        new_blocks = []
        for k, block in enumerate(self.blocks):
            if k == vj and vj != vi:
                continue
            kept = [x for x in block if x not in remove]
            if vj != vi and k == vi:
                kept += [x for x in self.blocks[vj] if x not in remove]
            new_blocks.append(tuple(old_to_new[x] for x in kept))
        inv = [0] * nxt
        for old, new in old_to_new.items():
            inv[new] = old_to_new[self.involution[old]]
        direction = tuple(self.direction[old] for old in sorted(old_to_new, key=old_to_new.get))
        out_legs = tuple((lab, old_to_new[fl]) for lab, fl in self.out_legs)
        in_legs = tuple((lab, old_to_new[fl]) for lab, fl in self.in_legs)
        return FlagGraph(nxt, tuple(inv), tuple(new_blocks), direction, out_legs, in_legs).validate()

    # -- JSON ----------------------------------------------------------------

    def to_json(self):
        payload = {
            "flags": self.n_flags,
            "involution": list(self.involution),
            "blocks": [list(b) for b in self.blocks],
            "direction": list(self.direction),
            "out_legs": {str(lab): fl for lab, fl in self.out_legs},
            "in_legs": {str(lab): fl for lab, fl in self.in_legs},
        }
        return json.dumps(payload, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(text):
        d = json.loads(text)
        return FlagGraph(
            d["flags"],
            tuple(d["involution"]),
            tuple(tuple(b) for b in d["blocks"]),
            tuple(d["direction"]),
            tuple(sorted((int(k), v) for k, v in d["out_legs"].items())),
            tuple(sorted((int(k), v) for k, v in d["in_legs"].items())),
        )


def build_graph(blocks_spec, edge_pairs, out_legs, in_legs):
    """Convenience constructor.

    blocks_spec: list of lists of flag ids; edge_pairs: list of
    (out_flag, in_flag); out_legs/in_legs: dict label -> flag.
    Directions are inferred; remaining flags must be legs.
    """
    n = sum(len(b) for b in blocks_spec)
    inv = list(range(n))
    direction = [None] * n
    for f, g in edge_pairs:
        inv[f], inv[g] = g, f
        direction[f] = OUT
        direction[g] = IN
    for lab, f in out_legs.items():
        direction[f] = OUT
    for lab, f in in_legs.items():
        direction[f] = IN
    if any(d is None for d in direction):
        raise BadLegLabels("every flag must be an edge end or a labeled leg")
    return FlagGraph(
        n,
        tuple(inv),
        tuple(tuple(b) for b in blocks_spec),
        tuple(direction),
        tuple(sorted((lab, f) for lab, f in out_legs.items())),
        tuple(sorted((lab, f) for lab, f in in_legs.items())),
    ).validate()
