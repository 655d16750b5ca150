"""Decorated directed graphs with orientation signs, and their canonical forms.

A term is a tuple of vertices; each vertex is ``(sym, outs, ins)`` where
``sym`` identifies a generator and ``outs``/``ins`` are tuples of *objects*:

    ("o", k)   global output leg k        (k = 1..m)
    ("i", k)   global input leg k         (k = 1..n)
    ("e", k)   internal edge k            (k = 0..E-1)

Every edge id occurs exactly once in some vertex's ``outs`` (its tail) and
exactly once in some ``ins`` (its head); wheels and self-loops are allowed.

Orientation data is implicit: the order of the vertex tuple (signed by the
Koszul rule on generator degrees, or by nothing, per convention) and the
numbering of edges (signed for determinant-of-edges conventions).  The
canonical form minimizes a total encoding over all color-sorted vertex
orders, admissible per-vertex slot arrangements and induced edge
renumberings, accumulating the relating sign; if two minimizers disagree in
sign the class is zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .symmetry import koszul_permutation_sign, rotate, sign as perm_sign


def vertex(sym, outs, ins):
    return (sym, tuple(outs), tuple(ins))


def edge_count(vertices):
    ids = set()
    for _, outs, ins in vertices:
        for obj in outs:
            if obj[0] == "e":
                ids.add(obj[1])
        for obj in ins:
            if obj[0] == "e":
                ids.add(obj[1])
    return len(ids)


@dataclass(frozen=True)
class Conventions:
    """Orientation and symmetry conventions of one complex."""

    vertex_parity: callable  # sym -> 0 or 1
    edge_parity: int  # 1 when the edge order carries the orientation
    kind: callable  # sym -> symmetry tuple, see symmetry.GeneratorSymbol


def _edge_endpoints(vertices):
    tails, heads = {}, {}
    for vi, (_, outs, ins) in enumerate(vertices):
        for obj in outs:
            if obj[0] == "e":
                tails[obj[1]] = vi
        for obj in ins:
            if obj[0] == "e":
                heads[obj[1]] = vi
    return tails, heads


def is_connected(vertices):
    if not vertices:
        return False
    tails, heads = _edge_endpoints(vertices)
    adj = {i: set() for i in range(len(vertices))}
    for e, t in tails.items():
        h = heads[e]
        adj[t].add(h)
        adj[h].add(t)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(vertices)


def _initial_colors(vertices, tails, heads, conv):
    base = []
    for sym, outs, ins in vertices:
        fp_out = tuple(("E",) if o[0] == "e" else o for o in outs)
        fp_in = tuple(("E",) if o[0] == "e" else o for o in ins)
        # slot order is invariant data only for rigid (regular) decorations
        if conv.kind(sym)[0] not in ("regular", "shuffle"):
            fp_out = tuple(sorted(fp_out))
            fp_in = tuple(sorted(fp_in))
        base.append((sym, fp_out, fp_in))
    colors = _rank(base)
    for _ in range(len(vertices)):
        if len(set(colors)) == len(vertices):
            break
        nxt = []
        for vi, (sym, outs, ins) in enumerate(vertices):
            nb = []
            for obj in outs:
                if obj[0] == "e":
                    nb.append((0, colors[heads[obj[1]]]))
            for obj in ins:
                if obj[0] == "e":
                    nb.append((1, colors[tails[obj[1]]]))
            nxt.append((colors[vi], tuple(sorted(nb))))
        new = _rank(nxt)
        if new == colors:
            break
        colors = new
    return colors


def _rank(values):
    order = sorted(set(values))
    pos = {v: i for i, v in enumerate(order)}
    return [pos[v] for v in values]


def _arrangement_candidates(kind, outs, ins, edge_ids):
    """Yield (new_outs, new_ins, sign) admissible slot rearrangements.

    `edge_ids` maps original edge id -> assigned canonical id for edges that
    already have one; unassigned edges sort last, and their mutual order is
    enumerated.
    """
    tag = kind[0]
    if tag in ("regular", "shuffle"):
        yield outs, ins, 1
        return
    if tag == "cyclic-skew":
        n = len(ins)
        step = -1 if (n - 1) % 2 else 1
        for i in range(n):
            yield outs, rotate(ins, i), step ** i
        return
    if tag in ("cyclic-skew-2", "cyclic-2-plain"):
        p, q = kind[1], kind[2]
        if tag == "cyclic-skew-2":
            s1 = -1 if (p - 1) % 2 else 1
            s2 = -1 if (q - 1) % 2 else 1
        else:
            s1 = s2 = 1
        # the blocks live on whichever side carries the slots
        side = ins if ins else outs
        b1, b2 = side[:p], side[p:]
        for i in range(max(p, 1)):
            for j in range(max(q, 1)):
                arranged = rotate(b1, i) + rotate(b2, j)
                s = (s1 ** i) * (s2 ** j)
                if ins:
                    yield outs, arranged, s
                else:
                    yield arranged, ins, s
        return
    if tag == "sym":
        for new_ins, _s in _sorted_arrangements(ins, edge_ids, signed=False):
            yield outs, new_ins, 1
        return
    if tag == "sign-sym":
        for new_outs, s in _sorted_arrangements(outs, edge_ids, signed=True):
            for new_ins, _s in _sorted_arrangements(ins, edge_ids, signed=False):
                yield new_outs, new_ins, s
        return
    raise ValueError(f"unknown symmetry kind {kind!r}")


def _sorted_arrangements(objs, edge_ids, signed):
    """Sorted arrangements: fixed-key objects ascending, unassigned edges last
    in every relative order.  Sign relates the original tuple to the result."""
    fixed, free = [], []
    for obj in objs:
        if obj[0] == "e" and obj[1] not in edge_ids:
            free.append(obj)
        else:
            key = (2, edge_ids[obj[1]]) if obj[0] == "e" else (0 if obj[0] == "o" else 1, obj[1])
            fixed.append((key, obj))
    fixed.sort(key=lambda kv: kv[0])
    head = tuple(obj for _, obj in fixed)
    if not free:
        arr = head
        yield arr, (_perm_sign_between(objs, arr) if signed else 1)
        return
    from itertools import permutations

    for tail in permutations(free):
        arr = head + tail
        yield arr, (_perm_sign_between(objs, arr) if signed else 1)


def _perm_sign_between(old, new):
    pos = {obj: i for i, obj in enumerate(old)}
    perm = tuple(pos[obj] for obj in new)
    # sign of the permutation taking old order to new order
    seen = [False] * len(perm)
    s = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, ln = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            ln += 1
        if ln % 2 == 0:
            s = -s
    return s


class _State:
    __slots__ = ("placed", "order", "edge_ids", "next_eid", "dsign", "enc_vertices")

    def __init__(self, nverts):
        self.placed = 0  # bitmask
        self.order = []
        self.edge_ids = {}
        self.next_eid = 0
        self.dsign = 1
        self.enc_vertices = []


def _canonical_rooted_tree(vertices, conv, tails):
    """Fast path: rooted trees with rigid decorations have no symmetries, so
    the canonical form is the preorder traversal from the output leg."""
    root = None
    for vi, (_s, outs, _i) in enumerate(vertices):
        if outs and outs[0][0] == "o":
            root = vi
    order = []
    edge_ids = {}
    new_vertices = []
    stack = [root]
    while stack:
        vi = stack.pop()
        order.append(vi)
        sym, outs, ins = vertices[vi]
        no = []
        for obj in outs:
            if obj[0] == "e":
                if obj[1] not in edge_ids:
                    edge_ids[obj[1]] = len(edge_ids)
                no.append(("e", edge_ids[obj[1]]))
            else:
                no.append(obj)
        ni = []
        children = []
        for obj in ins:
            if obj[0] == "e":
                if obj[1] not in edge_ids:
                    edge_ids[obj[1]] = len(edge_ids)
                ni.append(("e", edge_ids[obj[1]]))
                children.append(tails[obj[1]])
            else:
                ni.append(obj)
        new_vertices.append((sym, tuple(no), tuple(ni)))
        stack.extend(reversed(children))
    if len(order) != len(vertices):
        return None  # not a spanning tree from the root; use the search
    parities = [conv.vertex_parity(v[0]) & 1 for v in vertices]
    s = koszul_permutation_sign(order, parities)
    return tuple(new_vertices), s


def canonical_term(vertices, conv):
    """Canonical representative of a decorated graph term.

    Returns (canonical_vertices, sign) with
    element(input) == sign * element(canonical), or None when the class is
    killed by a sign-reversing symmetry.
    """
    vertices = tuple(vertices)
    nv = len(vertices)
    tails, heads = _edge_endpoints(vertices)

    if not conv.edge_parity and len(tails) == nv - 1:
        # possibly a rooted tree: one output leg, every vertex one output,
        # all decorations rigid
        rooted = True
        n_out_legs = 0
        for sym, outs, _i in vertices:
            if len(outs) != 1 or conv.kind(sym)[0] not in ("regular", "shuffle"):
                rooted = False
                break
            if outs[0][0] == "o":
                n_out_legs += 1
        if rooted and n_out_legs == 1:
            res = _canonical_rooted_tree(vertices, conv, tails)
            if res is not None:
                return res

    memo_key = (id(conv), vertices)
    hit = _CANON_MEMO.get(memo_key)
    if hit is not None or memo_key in _CANON_MEMO:
        return hit

    colors = _initial_colors(vertices, tails, heads, conv)
    parities = [conv.vertex_parity(v[0]) & 1 for v in vertices]

    states = [_State(nv)]
    for _pos in range(nv):
        best_enc = None
        best = []
        for st in states:
            remaining = [i for i in range(nv) if not (st.placed >> i) & 1]
            min_color = min(colors[i] for i in remaining)
            for vi in remaining:
                if colors[vi] != min_color:
                    continue
                sym, outs, ins = vertices[vi]
                for new_outs, new_ins, dsign in _arrangement_candidates(
                    conv.kind(sym), outs, ins, st.edge_ids
                ):
                    eids = dict(st.edge_ids)
                    nxt = st.next_eid
                    enc_slots_out = []
                    for obj in new_outs:
                        if obj[0] == "e":
                            if obj[1] not in eids:
                                eids[obj[1]] = nxt
                                nxt += 1
                            enc_slots_out.append(("e", eids[obj[1]]))
                        else:
                            enc_slots_out.append(obj)
                    enc_slots_in = []
                    for obj in new_ins:
                        if obj[0] == "e":
                            if obj[1] not in eids:
                                eids[obj[1]] = nxt
                                nxt += 1
                            enc_slots_in.append(("e", eids[obj[1]]))
                        else:
                            enc_slots_in.append(obj)
                    enc_v = (sym, tuple(enc_slots_out), tuple(enc_slots_in))
                    if best_enc is not None and enc_v > best_enc:
                        continue
                    ns = _State(nv)
                    ns.placed = st.placed | (1 << vi)
                    ns.order = st.order + [vi]
                    ns.edge_ids = eids
                    ns.next_eid = nxt
                    ns.dsign = st.dsign * dsign
                    ns.enc_vertices = st.enc_vertices + [enc_v]
                    if best_enc is None or enc_v < best_enc:
                        best_enc = enc_v
                        best = [ns]
                    else:
                        best.append(ns)
        states = best

    # all surviving states share the same encoding by construction
    final_enc = tuple(states[0].enc_vertices)
    signs = set()
    for st in states:
        if tuple(st.enc_vertices) != final_enc:
            continue
        s = st.dsign
        s *= koszul_permutation_sign(st.order, parities)
        if conv.edge_parity:
            perm = [0] * len(st.edge_ids)
            for orig, new in st.edge_ids.items():
                perm[orig] = new
            s *= perm_sign(tuple(p + 1 for p in perm))
        signs.add(s)
    res = None if len(signs) > 1 else (final_enc, signs.pop())
    if len(_CANON_MEMO) < _CANON_MEMO_LIMIT:
        _CANON_MEMO[memo_key] = res
    return res


_CANON_MEMO = {}
_CANON_MEMO_LIMIT = 1 << 20


class GraphVector:
    """Formal rational combination of canonical terms."""

    def __init__(self, conv):
        self.conv = conv
        self.terms = {}

    def add_raw(self, vertices, coeff):
        """Canonicalize a rigid term and accumulate coeff * (its class)."""
        if not coeff:
            return
        res = canonical_term(vertices, self.conv)
        if res is None:
            return
        canon, s = res
        nv = self.terms.get(canon, 0) + coeff * s
        if nv:
            self.terms[canon] = nv
        elif canon in self.terms:
            del self.terms[canon]

    def add_canonical(self, canon, coeff):
        nv = self.terms.get(canon, 0) + coeff
        if nv:
            self.terms[canon] = nv
        elif canon in self.terms:
            del self.terms[canon]

    def is_zero(self):
        return not self.terms

    def items(self):
        return sorted(self.terms.items())

    def __len__(self):
        return len(self.terms)


def relabel_term(vertices, edge_perm=None, vertex_order=None, leg_map=None):
    """Apply a renaming to a rigid term, for tests and enumeration.

    edge_perm: dict old edge id -> new edge id (bijective);
    vertex_order: list, position p holds the old index placed at p;
    leg_map: dict ("o"/"i", k) -> new label k'.
    Returns the new vertex tuple (no sign bookkeeping; callers track signs).
    """
    vertices = list(vertices)
    if vertex_order is not None:
        vertices = [vertices[i] for i in vertex_order]

    def m(obj):
        if obj[0] == "e" and edge_perm is not None:
            return ("e", edge_perm[obj[1]])
        if obj[0] in ("o", "i") and leg_map is not None and (obj[0], obj[1]) in leg_map:
            return (obj[0], leg_map[(obj[0], obj[1])])
        return obj

    return tuple((sym, tuple(m(o) for o in outs), tuple(m(o) for o in ins)) for sym, outs, ins in vertices)
