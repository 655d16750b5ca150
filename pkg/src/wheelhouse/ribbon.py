"""Directed oriented ribbon graphs without legs, their complex, and the
free-PROP counting oracle for the cohomology.

A ribbon graph is stored as a tuple of vertices; a vertex is a cyclic tuple
of flags (edge_id, direction) with direction 0 = outgoing, 1 = incoming.
Every edge id occurs exactly once with each direction.  The admissibility
conditions are: every vertex has valence >= 3 with at least one incoming and
one outgoing flag, and the vertices of any directed cycle either all have
exactly one incoming edge or all have exactly one outgoing edge.  The genus
is the Euler count 1 + E - V (also for disconnected graphs).

Orientation is an ordering of the vertices; odd reorderings flip the sign,
and classes with a sign-reversing automorphism vanish.  The grading is by
the number of vertices, and the differential is the signed transpose of
edge contraction.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from .errors import GenusUnsupported
from .linalg import SparseRationalMatrix
from .symmetry import sign as perm_sign
from .terms import Conventions, canonical_term

OUT, IN = 0, 1


# ---------------------------------------------------------------------------
# admissibility


def vertex_degrees(vertices):
    out = []
    for flags in vertices:
        o = sum(1 for _e, d in flags if d == OUT)
        i = len(flags) - o
        out.append((o, i))
    return out


def _edge_endpoints(vertices):
    tail, head = {}, {}
    for vi, flags in enumerate(vertices):
        for e, d in flags:
            if d == OUT:
                tail[e] = vi
            else:
                head[e] = vi
    return tail, head


def _directed_cycles(vertices):
    """Vertex sets of all simple directed cycles."""
    tail, head = _edge_endpoints(vertices)
    succ = {}
    for e, t in tail.items():
        succ.setdefault(t, []).append(head[e])
    cycles = []
    nv = len(vertices)
    for start in range(nv):
        def walk(v, path):
            for w in succ.get(v, ()):
                if w == start:
                    cycles.append(tuple(path))
                elif w > start and w not in path:
                    walk(w, path + [w])

        walk(start, [start])
    return cycles


def is_admissible(vertices):
    degs = vertex_degrees(vertices)
    for o, i in degs:
        if o + i < 3 or o < 1 or i < 1:
            return False
    for cyc in _directed_cycles(vertices):
        if all(degs[v][1] == 1 for v in cyc):
            continue
        if all(degs[v][0] == 1 for v in cyc):
            continue
        return False
    return True


def euler_genus(vertices):
    n_edges = sum(len(f) for f in vertices) // 2
    return 1 + n_edges - len(vertices)


# ---------------------------------------------------------------------------
# canonical form with the determinant-of-vertices orientation


def _colors(vertices):
    tail, head = _edge_endpoints(vertices)
    base = []
    for flags in vertices:
        o = sum(1 for _e, d in flags if d == OUT)
        base.append((len(flags), o))
    order = sorted(set(base))
    colors = [order.index(b) for b in base]
    for _ in range(len(vertices)):
        if len(set(colors)) == len(vertices):
            break
        nxt = []
        for vi, flags in enumerate(vertices):
            nb = sorted(
                (d, colors[head[e] if d == OUT else tail[e]]) for e, d in flags
            )
            nxt.append((colors[vi], tuple(nb)))
        order = sorted(set(nxt))
        new = [order.index(b) for b in nxt]
        if new == colors:
            break
        colors = new
    return colors


def canonical_ribbon(vertices):
    """Canonical form of an oriented ribbon graph.

    Returns (canonical_vertices, sign) with the input equal to
    sign * canonical as oriented classes, or None for a vanishing class.
    """
    vertices = tuple(tuple(f) for f in vertices)
    nv = len(vertices)
    colors = _colors(vertices)

    states = [((), {}, ())]  # (order, edge_ids, encoded vertices)
    for _pos in range(nv):
        best_enc = None
        best = []
        for order, eids, enc in states:
            remaining = [i for i in range(nv) if i not in order]
            mc = min(colors[i] for i in remaining)
            for vi in remaining:
                if colors[vi] != mc:
                    continue
                flags = vertices[vi]
                for r in range(len(flags)):
                    rot = flags[r:] + flags[:r]
                    ne = dict(eids)
                    enc_v = []
                    for e, d in rot:
                        if e not in ne:
                            ne[e] = len(ne)
                        enc_v.append((ne[e], d))
                    enc_v = tuple(enc_v)
                    if best_enc is not None and enc_v > best_enc:
                        continue
                    st = (order + (vi,), ne, enc + (enc_v,))
                    if best_enc is None or enc_v < best_enc:
                        best_enc = enc_v
                        best = [st]
                    else:
                        best.append(st)
        states = best

    final = states[0][2]
    signs = set()
    for order, _e, enc in states:
        if enc != final:
            continue
        signs.add(perm_sign(tuple(x + 1 for x in order)))
    if len(signs) > 1:
        return None
    return final, signs.pop()


# ---------------------------------------------------------------------------
# enumeration


def enumerate_ribbon(g):
    """Canonical admissible ribbon graphs of Euler genus g, by vertex count."""
    if g < 2:
        raise GenusUnsupported(f"the genus-{g} complex is empty; need g >= 2")
    out = {}
    vmax = 2 * (g - 1)
    for nv in range(1, vmax + 1):
        ne = nv + g - 1
        seen = set()
        for multigraph in _multigraphs(nv, ne):
            for vertices in _ribbon_structures(multigraph, nv):
                if not is_admissible(vertices):
                    continue
                res = canonical_ribbon(vertices)
                if res is not None:
                    seen.add(res[0])
        if seen:
            out[nv] = sorted(seen)
    return out


def _multigraphs(nv, ne):
    """Degree-admissible directed multigraphs as edge lists (tail, head)."""
    pairs = [(t, h) for t in range(nv) for h in range(nv)]
    seen = set()
    for combo in itertools.combinations_with_replacement(pairs, ne):
        outd = [0] * nv
        ind = [0] * nv
        for t, h in combo:
            outd[t] += 1
            ind[h] += 1
        if any(o < 1 or i < 1 or o + i < 3 for o, i in zip(outd, ind)):
            continue
        if combo in seen:
            continue
        seen.add(combo)
        yield combo


def _ribbon_structures(edge_list, nv):
    """All cyclic-order assignments for a given directed multigraph."""
    flags = [[] for _ in range(nv)]
    for ei, (t, h) in enumerate(edge_list):
        flags[t].append((ei, OUT))
        flags[h].append((ei, IN))
    pools = []
    for fl in flags:
        if not fl:
            return
        first = fl[0]
        rest = fl[1:]
        pools.append([(first,) + p for p in itertools.permutations(rest)])
    for combo in itertools.product(*pools):
        yield tuple(combo)


# ---------------------------------------------------------------------------
# differential and cohomology


def _contract(vertices, e):
    """Contract a non-loop edge; returns (vertices', koszul_sign) or None."""
    tail, head = _edge_endpoints(vertices)
    u, w = tail[e], head[e]
    if u == w:
        return None
    fu, fw = vertices[u], vertices[w]
    iu = fu.index((e, OUT))
    iw = fw.index((e, IN))
    # splice w's cyclic order into u's at the contracted flag
    merged = fu[:iu] + fw[iw + 1 :] + fw[:iw] + fu[iu + 1 :]
    rest = [vertices[i] for i in range(len(vertices)) if i not in (u, w)]
    new_vertices = [merged] + rest
    # sign: bring u, w to the front (all vertices odd)
    order = [u, w] + [i for i in range(len(vertices)) if i not in (u, w)]
    s = perm_sign(tuple(x + 1 for x in order))
    # edge ids keep their names; canonical form renumbers
    return tuple(tuple(f) for f in new_vertices), s


def contraction_matrix(basis_high, basis_low):
    """Matrix of the contraction map from (n+1)-vertex to n-vertex classes."""
    index = {t: i for i, t in enumerate(basis_low)}
    mat = SparseRationalMatrix(len(basis_low), len(basis_high))
    for j, term in enumerate(basis_high):
        edges = {e for flags in term for e, _d in flags}
        for e in sorted(edges):
            res = _contract(term, e)
            if res is None:
                continue
            contracted, s = res
            if not is_admissible(contracted):
                continue
            canon = canonical_ribbon(contracted)
            if canon is None:
                continue
            i = index.get(canon[0])
            if i is None:
                continue
            mat.add(i, j, s * canon[1])
    return mat


def ribbon_diff(g, basis=None):
    """Differential matrices by source vertex count: d_n: C^n -> C^{n+1},
    the signed transpose of the contraction incidence."""
    basis = enumerate_ribbon(g) if basis is None else basis
    counts = sorted(basis)
    mats = {}
    for n in counts:
        high = basis.get(n + 1, [])
        low = basis[n]
        mats[n] = contraction_matrix(high, low).transpose()
    return mats


def betti_ribbon(g):
    """Exact cohomology dimensions of the genus-g complex, by vertex count."""
    basis = enumerate_ribbon(g)
    mats = ribbon_diff(g, basis)
    counts = sorted(basis)
    # verify d^2 = 0
    for n in counts:
        if n + 1 in mats and n in mats:
            comp = mats[n + 1].compose(mats[n])
            if not comp.is_zero():
                from .errors import DSquaredFailed

                raise DSquaredFailed(f"ribbon genus {g}: d^2 != 0 out of {n} vertices")
    ranks = {n: mats[n].rank() for n in counts}
    out = {}
    for n in counts:
        r_in = ranks.get(n - 1, 0)
        out[n] = len(basis[n]) - ranks[n] - r_in
    return out


# ---------------------------------------------------------------------------
# the gluing oracle


def _oracle_parity(sym):
    # a piece of arity nu is a wheel with nu (resp. nu - 1 for the
    # distinguished type) odd vertices; swaps of equal pieces see this parity
    kind, p, q = sym
    nu = p + q
    if kind in ("A", "Abar"):
        return (nu - 1) % 2
    return nu % 2


def _oracle_kind(sym):
    # rotating a leg block cyclically permutes the wheel vertices carrying
    # it, so the coinvariants are taken with the skew signs of those cycles
    return ("cyclic-skew-2", sym[1], sym[2])


ORACLE_CONV = Conventions(vertex_parity=_oracle_parity, edge_parity=0, kind=_oracle_kind)


def _oracle_pieces(side, arity):
    """Piece symbols of one side with the given number of glued legs."""
    out = []
    a = "A" if side == "in" else "Abar"
    b = "B" if side == "in" else "Bbar"
    for p in range(1, arity):
        q = arity - p
        if q >= 1:
            out.append((a, p, q))
    for p in range(0, arity + 1):
        out.append((b, p, arity - p))
    return out


def _side_configurations(side, total):
    """Multisets of pieces whose arities sum to `total`."""

    def rec(rem, min_arity, acc):
        if rem == 0:
            yield tuple(acc)
            return
        for ar in range(min_arity, rem + 1):
            for sym in _oracle_pieces(side, ar):
                cand = (ar, sym)
                if acc and cand < acc[-1]:
                    continue
                acc.append(cand)
                yield from rec(rem - ar, ar, acc)
                acc.pop()

    yield from rec(total, 1, [])


def theorem_c_dims(g):
    """Dimension table predicted by the free-PROP gluing description.

    Pieces on the input side (cyclic wheels with only input legs) are glued
    leg-by-leg to mirrored pieces on the output side; each piece carries the
    block-cyclic coinvariant module of its two leg blocks, pieces are graded
    by their suspension degree, and the cohomological degree of a glued
    configuration with a input-side and abar output-side distinguished
    pieces is 2g - 2 - a - abar.
    """
    if g < 2:
        raise GenusUnsupported(f"the genus-{g} table is empty; need g >= 2")
    n_edges = g - 1
    dims = {}
    seen = set()
    for cfg_in in _side_configurations("in", n_edges):
        for cfg_out in _side_configurations("out", n_edges):
            # assign edges: input side slots in order get 0..N-1; output side
            # slots get every permutation
            in_syms = [sym for _ar, sym in cfg_in]
            out_syms = [sym for _ar, sym in cfg_out]
            in_slots = []
            for vi, sym in enumerate(in_syms):
                in_slots.extend([vi] * (sym[1] + sym[2]))
            out_slots = []
            for vi, sym in enumerate(out_syms):
                out_slots.extend([vi] * (sym[1] + sym[2]))
            n_a = sum(1 for s in in_syms if s[0] == "A") + sum(
                1 for s in out_syms if s[0] == "Abar"
            )
            degree = 2 * g - 2 - n_a
            for perm in itertools.permutations(range(n_edges)):
                # build rigid term: input pieces consume edges as ins
                eid = list(range(n_edges))
                ins_of = [[] for _ in in_syms]
                for pos, vi in enumerate(in_slots):
                    ins_of[vi].append(("e", eid[pos]))
                outs_of = [[] for _ in out_syms]
                for pos, vi in enumerate(out_slots):
                    outs_of[vi].append(("e", perm[pos]))
                vertices = []
                for vi, sym in enumerate(out_syms):
                    vertices.append((sym, tuple(outs_of[vi]), ()))
                for vi, sym in enumerate(in_syms):
                    vertices.append((sym, (), tuple(ins_of[vi])))
                res = canonical_term(tuple(vertices), ORACLE_CONV)
                if res is None:
                    continue
                key = (degree, res[0])
                if key not in seen:
                    seen.add(key)
    for degree, _t in seen:
        dims[degree] = dims.get(degree, 0) + 1
    return dims
