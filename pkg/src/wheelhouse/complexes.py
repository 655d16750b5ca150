"""The shipped complexes: generator tables, differentials, slice enumerators.

Generator symbols
    ("mu", n)     (1,n)-corolla, n >= 2, degree 2-n   (associative family,
                  also the commutative family modulo shuffle relations)
    ("w", m, n)   (0,m+n)-corolla, m,n >= 1, degree -(m+n), two cyclic
                  skew-symmetric input blocks
    ("cw", n)     (0,n)-corolla, n >= 2, degree -n, cyclic skew-symmetric
    ("pv", m, n)  (m,n)-corolla, degree m, antisymmetric outputs and
                  symmetric inputs
    ("wn", k)     wheel-complex vertex, k inputs (one of them the wheel edge)

The generator rules below transcribe the corresponding two-level sums; the
few printed ambiguities (empty-range endpoints, relative order of the two
vertices created by a split, slot of a freshly closed loop) are fixed by the
constants right after the imports, and the d^2 = 0 suites plus the known
cohomology tables adjudicate them.
"""

from __future__ import annotations

import hashlib
import itertools
from fractions import Fraction
from functools import lru_cache

from .engine import ComplexSpec, leibniz_term_diff
from .errors import RangeUnsupported
from .symmetry import invert, sign as perm_sign, unshuffles
from .terms import Conventions, is_connected

# -- adjudicated convention constants ----------------------------------------
# Relative vertex order of a two-level split: upper corolla first.
SPLIT_UPPER_FIRST = True
# Wheel-closure slot of the (0,n) cyclic rule: loop input placed first.
CW_LOOP_FIRST = True
# Two-vertex split of the polyvector rule: vertex with the extra output first.
PV_LOWER_FIRST = True


# ---------------------------------------------------------------------------
# conventions


def _graded_parity(sym):
    tag = sym[0]
    if tag == "mu":
        return sym[1] % 2  # degree 2-n
    if tag == "w":
        return (sym[1] + sym[2]) % 2  # degree -(m+n)
    if tag == "cw":
        return sym[1] % 2  # degree -n
    if tag == "pv":
        return sym[1] % 2  # degree m
    raise ValueError(sym)


def _graded_kind(sym):
    tag = sym[0]
    if tag == "mu":
        return ("regular",)
    if tag == "w":
        return ("cyclic-skew-2", sym[1], sym[2])
    if tag == "cw":
        return ("cyclic-skew", sym[1])
    if tag == "pv":
        return ("sign-sym", sym[1], sym[2])
    raise ValueError(sym)


GRADED_CONV = Conventions(vertex_parity=_graded_parity, edge_parity=0, kind=_graded_kind)


def _com_kind(sym):
    # the arity-2 shuffle quotient is exactly the symmetric module, so binary
    # commutative corollas are handled monomially; arity >= 3 stays regular
    # with echelonized relation rows
    if sym[0] == "mu" and sym[1] == 2:
        return ("sym", 2)
    return _graded_kind(sym)


COM_CONV = Conventions(vertex_parity=_graded_parity, edge_parity=0, kind=_com_kind)

WN_CONV = Conventions(
    vertex_parity=lambda sym: 0,
    edge_parity=1,
    kind=lambda sym: ("sym", sym[1]),
)


def _sym_degree(sym):
    tag = sym[0]
    if tag == "mu":
        return 2 - sym[1]
    if tag == "w":
        return -(sym[1] + sym[2])
    if tag == "cw":
        return -sym[1]
    if tag == "pv":
        return sym[1]
    raise ValueError(sym)


def term_degree(vertices):
    return sum(_sym_degree(v[0]) for v in vertices)


# ---------------------------------------------------------------------------
# generator rules

_E = ("e", -1)


def mu_rule(outs, ins):
    """Two-level splits of a (1,n)-corolla with the alternating sign table."""
    n = len(ins)
    res = []
    for k in range(0, n - 1):
        for l in range(2, n - k + 1):
            if n - l + 1 < 2:
                continue
            coeff = -1 if (k + l * (n - k - l) + 1) % 2 else 1
            upper = (("mu", n - l + 1), outs, ins[:k] + (_E,) + ins[k + l :])
            lower = (("mu", l), (_E,), ins[k : k + l])
            pair = (upper, lower) if SPLIT_UPPER_FIRST else (lower, upper)
            res.append((pair, coeff))
    return res


def _rot(seq, i):
    i %= max(len(seq), 1)
    return tuple(seq[i:]) + tuple(seq[:i])


def _w_closure_pattern(m, n):
    """The cyclic double sum of trace closures, on reference labels 1..m+n.

    Each summand is an (m+n+1)-corolla whose output is looped back into the
    slot between the two blocks; the blocks are rotated with the skew signs
    of the two cyclic generators.
    """
    b1 = tuple(("i", k) for k in range(1, m + 1))
    b2 = tuple(("i", k) for k in range(m + 1, m + n + 1))
    loop = ("e", 0)
    s_z = -1 if (m + 1) % 2 else 1
    s_x = -1 if (n + 1) % 2 else 1
    out = []
    for i in range(m):
        for j in range(n):
            pref = (s_z ** i) * (s_x ** j)
            closure = (("mu", m + n + 1), (loop,), _rot(b1, i) + (loop,) + _rot(b2, j))
            out.append(((closure,), Fraction(pref)))
    return out


def _cw_closure_pattern(n):
    """Wheel closures with cyclically shifted labels, on reference labels."""
    seq0 = tuple(("i", k) for k in range(1, n + 1))
    loop = ("e", 0)
    out = []
    for i in range(n):
        seq = _rot(seq0, i)
        si = -1 if ((n - 1) * i) % 2 else 1
        ins = ((loop,) + seq) if CW_LOOP_FIRST else (seq + (loop,))
        out.append((((("mu", n + 1), (loop,), ins),), Fraction(si)))
    return out


# The grafting corrections of the closure generators are the unique
# coefficients making the rule a cocycle; they are solved once per generator
# by exact linear algebra and cached (see _solved_closure_rule below).
_SOLVED_RULES = {}


def _substitute_reference(ref_terms, ins):
    """Instantiate a reference-labeled rule at concrete attached objects."""
    out = []
    for vs, c in ref_terms:
        nvs = []
        for sym, o, i in vs:
            no = tuple(_subst_obj(obj, ins) for obj in o)
            ni = tuple(_subst_obj(obj, ins) for obj in i)
            nvs.append((sym, no, ni))
        out.append((tuple(nvs), c))
    return out


def _subst_obj(obj, ins):
    if obj[0] == "i":
        return ins[obj[1] - 1]
    if obj[0] == "e":
        return ("e", -1 - obj[1])
    return obj


def w_rule(m, n, ins):
    return _substitute_reference(_solved_closure_rule(("w", m, n)), ins)


def cw_rule(n, ins):
    return _substitute_reference(_solved_closure_rule(("cw", n)), ins)


def _solved_closure_rule(sym):
    hit = _SOLVED_RULES.get(sym)
    if hit is None:
        hit = _solve_closure_rule(sym)
        _SOLVED_RULES[sym] = hit
    return hit


def _solve_closure_rule(sym):
    """Differential of a closure generator: printed wheel-closure sum plus
    the unique grafting corrections making it a cocycle.

    The corrections live in the two-vertex graft span of the same slice and
    are determined by exact linear solving against the one-degree-higher
    slice; the solve only involves strictly smaller closure generators, so
    the recursion is well-founded.
    """
    from . import engine as _engine
    from .errors import DSquaredFailed
    from .linalg import solve_exact

    if sym[0] == "w":
        m, n = sym[1], sym[2]
        total = m + n
        spec = get_complex("ass-wheeled-min")
        closure = _w_closure_pattern(m, n)
        marker = "w"
    else:
        total = sym[1]
        spec = get_complex("com-wheeled-min")
        closure = _cw_closure_pattern(total)
        marker = "cw"

    biarity = (0, total)
    src = spec.slice(biarity, 1 - total)
    dst = spec.slice(biarity, 2 - total)

    rhs = {}
    for vs, coeff in closure:
        big = _engine._diff_big_vector(spec, vs, dst)
        for c, v in dst.coordinates(big).items():
            nv = rhs.get(c, Fraction(0)) - coeff * v
            if nv:
                rhs[c] = nv
            elif c in rhs:
                del rhs[c]

    candidates = [
        j
        for j, col in enumerate(src.free)
        if any(v[0][0] == marker for v in src.terms[col])
    ]
    mat = spec.matrix(biarity, 1 - total)
    columns = [mat.column(j) for j in candidates]
    status, data = solve_exact(columns, rhs, len(candidates))
    if status != "solution":
        raise DSquaredFailed(
            f"no grafting corrections make the {sym} closure rule a cocycle"
        )
    rule = list(closure)
    for pos, coeff in sorted(data.items()):
        term = src.terms[src.free[candidates[pos]]]
        rule.append((term, coeff))
    return rule


def pv_rule(m, n, outs, ins):
    """Differential of the (m,n) polyvector corolla: all splits of outputs
    (signed shuffles) and inputs, plus the signed trace closure."""
    res = []
    for r in range(m + 1):
        for i1 in itertools.combinations(range(m), r):
            i2 = tuple(x for x in range(m) if x not in i1)
            shuffle_sign = 1
            for a in i1:
                shuffle_sign *= (-1) ** sum(1 for b in i2 if b < a)
            s = shuffle_sign * ((-1) ** (len(i1) * len(i2) % 2))
            o1 = tuple(outs[x] for x in i1)
            o2 = tuple(outs[x] for x in i2)
            for q in range(n + 1):
                for j1 in itertools.combinations(range(n), q):
                    j2 = tuple(x for x in range(n) if x not in j1)
                    v1 = (("pv", len(i1) + 1, len(j1)), o1 + (_E,), tuple(ins[x] for x in j1))
                    v2 = (("pv", len(i2), len(j2) + 1), o2, tuple(ins[x] for x in j2) + (_E,))
                    pair = (v1, v2) if PV_LOWER_FIRST else (v2, v1)
                    res.append((pair, s))
    closure = (("pv", m + 1, n + 1), outs + (_E,), ins + (_E,))
    res.append(((closure,), (-1) ** (m % 2)))
    return res


def _graded_rule(sym, outs, ins):
    tag = sym[0]
    if tag == "mu":
        return mu_rule(outs, ins)
    if tag == "w":
        return w_rule(sym[1], sym[2], ins)
    if tag == "cw":
        return cw_rule(sym[1], ins)
    if tag == "pv":
        return pv_rule(sym[1], sym[2], outs, ins)
    raise ValueError(sym)


# ---------------------------------------------------------------------------
# tree / wheel / rooted-closure enumeration


def _set_partitions(items, k):
    """Unordered partitions of `items` (tuple) into exactly k nonempty blocks."""
    items = list(items)
    n = len(items)
    if k < 1 or k > n:
        return

    def rec(i, blocks):
        if i == n:
            if len(blocks) == k:
                yield [tuple(b) for b in blocks]
            return
        x = items[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([x])
            yield from rec(i + 1, blocks)
            blocks.pop()

    yield from rec(0, [])


def _ordered_set_partitions(items, k):
    for part in _set_partitions(items, k):
        for order in itertools.permutations(part):
            yield order


def _children_options(labels, next_eid):
    """All rigid forests covering `labels` as an ordered child list.

    Yields (objects tuple, vertices tuple, next_eid).  A singleton block is a
    leg; a bigger block becomes a subtree hanging from a fresh edge.
    """
    labels = tuple(sorted(labels))
    for c in range(1, len(labels) + 1):
        for blocks in _ordered_set_partitions(labels, c):
            yield from _assemble_children(blocks, 0, (), (), next_eid)


def _assemble_children(blocks, idx, objs, verts, next_eid):
    if idx == len(blocks):
        yield objs, verts, next_eid
        return
    block = tuple(sorted(blocks[idx]))
    if len(block) == 1:
        yield from _assemble_children(blocks, idx + 1, objs + (("i", block[0]),), verts, next_eid)
        return
    edge = ("e", next_eid)
    for sub, ne in _subtree_options(block, edge, next_eid + 1):
        yield from _assemble_children(blocks, idx + 1, objs + (edge,), verts + sub, ne)


def _subtree_options(labels, out_obj, next_eid):
    """All rigid trees on `labels` whose root output is `out_obj`."""
    labels = tuple(sorted(labels))
    for k in range(2, len(labels) + 1):
        for blocks in _ordered_set_partitions(labels, k):
            for objs, verts, ne in _assemble_children(blocks, 0, (), (), next_eid):
                if len(objs) != k:
                    continue
                root = (("mu", k), (out_obj,), objs)
                yield (root,) + verts, ne


@lru_cache(maxsize=None)
def _trees_by_degree(n):
    """All rigid (1,n) trees, bucketed by degree."""
    out = {}
    for verts, _ne in _subtree_options(tuple(range(1, n + 1)), ("o", 1), 0):
        out.setdefault(term_degree(verts), []).append(verts)
    return out


def _fan_options(sector, wheel_in, out_obj, next_eid):
    """Rigid decorations of one cyclic vertex: the wheel input in every slot
    position among an ordered child forest covering the sector's labels."""
    for objs, verts, ne in _children_options(sector, next_eid):
        for pos in range(len(objs) + 1):
            ins = objs[:pos] + (wheel_in,) + objs[pos:]
            root = (("mu", len(ins)), (out_obj,), ins)
            yield (root,) + verts, ne


@lru_cache(maxsize=None)
def _wheels_by_degree(n):
    """All rigid (0,n) one-wheel graphs, bucketed by degree.

    The wheel is a directed cycle v_0 -> v_1 -> ... -> v_{j-1} -> v_0 with
    rigid trees hanging; sector 0 contains the label 1 (rotations are
    identified later by the canonical form).
    """
    out = {}
    labels = tuple(range(1, n + 1))
    for j in range(1, n + 1):
        for part in _set_partitions(labels, j):
            anchored = [b for b in part if 1 in b]
            rest = [b for b in part if 1 not in b]
            for order in itertools.permutations(rest):
                sectors = [anchored[0]] + list(order)
                stack = [((), j)]  # (vertices so far, next_eid)
                for si, sector in enumerate(sectors):
                    wheel_in = ("e", (si - 1) % j)
                    out_obj = ("e", si)
                    new_stack = []
                    for verts, ne in stack:
                        for fan, ne2 in _fan_options(tuple(sorted(sector)), wheel_in, out_obj, ne):
                            new_stack.append((verts + fan, ne2))
                    stack = new_stack
                for verts, _ne in stack:
                    out.setdefault(term_degree(verts), []).append(verts)
    return out


def _closure_trees_by_degree(n, root_symbols):
    """Rigid (0,n) trees rooted at a closure generator, bucketed by degree.

    root_symbols: iterable of symbols with input arity s; the root's s slots
    carry an ordered child forest covering all n labels.
    """
    out = {}
    labels = tuple(range(1, n + 1))
    for sym, s in root_symbols:
        if s > n:
            continue
        for blocks in _ordered_set_partitions(labels, s):
            for objs, verts, _ne in _assemble_children(blocks, 0, (), (), 0):
                root = (sym, (), objs)
                term = (root,) + verts
                out.setdefault(term_degree(term), []).append(term)
    return out


@lru_cache(maxsize=None)
def _ass_min_closures_by_degree(n):
    syms = []
    for s in range(2, n + 1):
        for m in range(1, s):
            syms.append((("w", m, s - m), s))
    return _closure_trees_by_degree(n, syms)


@lru_cache(maxsize=None)
def _com_min_closures_by_degree(n):
    syms = [(("cw", s), s) for s in range(2, n + 1)]
    return _closure_trees_by_degree(n, syms)


# ---------------------------------------------------------------------------
# spec constructors


def _tree_wheel_enumerator(wheels, closures):
    def enumerate_slice(biarity, degree):
        m, n = biarity
        if m == 1 and n >= 1:
            return list(_trees_by_degree(n).get(degree, ()))
        if m == 0 and n >= 1:
            out = []
            if wheels:
                out.extend(_wheels_by_degree(n).get(degree, ()))
            if closures is not None:
                out.extend(closures(n).get(degree, ()))
            return out
        return []

    return enumerate_slice


def _tree_wheel_bounds(wheels, closures):
    def bounds(biarity):
        m, n = biarity
        if m == 1 and n >= 2:
            return (2 - n, 0)
        if m == 0 and n >= 1 and (wheels or closures is not None):
            lo = 1 - n if wheels else 0
            if closures is not None:
                lo = min(lo, -n)
            return (lo, 0)
        return (0, -1)  # empty range

    return bounds


def _com_relation_rows(terms):
    for t in terms:
        for vi, (sym, outs, ins) in enumerate(t):
            if sym[0] != "mu":
                continue
            k = len(ins)
            if k < 3:
                continue  # binary corollas are symmetrized monomially
            for kk in range(1, k):
                combo = []
                for tau in unshuffles(kk, k):
                    lam = invert(tau)
                    new_ins = tuple(ins[lam[i] - 1] for i in range(k))
                    vs = t[:vi] + ((sym, outs, new_ins),) + t[vi + 1 :]
                    combo.append((vs, perm_sign(tau)))
                yield combo


def _make_graded_spec(name, wheels, closures, com):
    return ComplexSpec(
        name=name,
        conv=COM_CONV if com else GRADED_CONV,
        enumerate_slice=_tree_wheel_enumerator(wheels, closures),
        degree_bounds=_tree_wheel_bounds(wheels, closures),
        term_diff=leibniz_term_diff(_graded_rule, _graded_parity),
        relation_rows=_com_relation_rows if com else None,
        description=f"{name}|split-upper={SPLIT_UPPER_FIRST}|cwloop={CW_LOOP_FIRST}"
        "|grafts=solved-cocycle|binary-sym={0}".format(com),
    )


# -- polyvector complex -------------------------------------------------------


def _pv_enumerate(biarity, degree):
    m, n = biarity
    e = degree - m
    if e < 0:
        return []
    out = []
    total_out, total_in = m + e, n + e
    for nv in range(1, total_out + total_in + 2):
        if nv > 1 and (total_out + total_in) == 0:
            break
        for arities in _pv_arity_tuples(nv, total_out, total_in):
            out.extend(_pv_wirings(arities, m, n, e))
    return out


def _pv_arity_tuples(nv, total_out, total_in):
    """Nondecreasing tuples of vertex biarities with prescribed totals."""

    def rec(i, rem_out, rem_in, prev, acc):
        if i == nv:
            if rem_out == 0 and rem_in == 0:
                yield tuple(acc)
            return
        for mo in range(rem_out + 1):
            for ni in range(rem_in + 1):
                if (mo, ni) == (0, 0) and nv > 1:
                    continue
                if (mo, ni) < prev:
                    continue
                acc.append((mo, ni))
                yield from rec(i + 1, rem_out - mo, rem_in - ni, (mo, ni), acc)
                acc.pop()

    yield from rec(0, total_out, total_in, (0, 0), [])


def _pv_wirings(arities, m, n, e):
    out_slots = []
    in_slots = []
    for vi, (mo, ni) in enumerate(arities):
        out_slots.extend((vi, k) for k in range(mo))
        in_slots.extend((vi, k) for k in range(ni))
    out_objs = [("o", k) for k in range(1, m + 1)] + [("e", i) for i in range(e)]
    in_objs = [("i", k) for k in range(1, n + 1)] + [("e", i) for i in range(e)]
    res = []
    for out_perm in itertools.permutations(range(len(out_slots))):
        for in_perm in itertools.permutations(range(len(in_slots))):
            slot_out = {}
            for pos, obj in enumerate(out_objs):
                slot_out[out_slots[out_perm[pos]]] = obj
            slot_in = {}
            for pos, obj in enumerate(in_objs):
                slot_in[in_slots[in_perm[pos]]] = obj
            vs = []
            for vi, (mo, ni) in enumerate(arities):
                vs.append(
                    (
                        ("pv", mo, ni),
                        tuple(slot_out[(vi, k)] for k in range(mo)),
                        tuple(slot_in[(vi, k)] for k in range(ni)),
                    )
                )
            vs = tuple(vs)
            if is_connected(vs):
                res.append(vs)
    return res


def _pv_bounds(biarity):
    raise RangeUnsupported(
        "the polyvector complex has slices in every degree >= m; "
        "pass an explicit degree range"
    )


def _make_polyv_spec():
    return ComplexSpec(
        name="polyv",
        conv=GRADED_CONV,
        enumerate_slice=_pv_enumerate,
        degree_bounds=_pv_bounds,
        term_diff=leibniz_term_diff(_graded_rule, _graded_parity),
        description=f"polyv|pv-lower-first={PV_LOWER_FIRST}",
    )


# -- wheel complexes W_n ------------------------------------------------------


def _wn_enumerate(biarity, degree):
    m, n = biarity
    if m != 0 or n < 1:
        return []
    k = -degree
    if not (1 <= k <= n):
        return []
    out = []
    labels = tuple(range(1, n + 1))
    for part in _set_partitions(labels, k):
        anchored = [b for b in part if 1 in b]
        rest = [b for b in part if 1 not in b]
        for order in itertools.permutations(rest):
            blocks = [anchored[0]] + list(order)
            vs = []
            for bi, block in enumerate(blocks):
                ins = (("e", (bi - 1) % k),) + tuple(("i", x) for x in sorted(block))
                vs.append((("wn", len(ins)), (("e", bi),), ins))
            out.append(tuple(vs))
    return out


def _wn_diff(term):
    edges = set()
    for _s, outs, ins in term:
        for obj in outs:
            if obj[0] == "e":
                edges.add(obj[1])
    k = len(edges)
    if k <= 1:
        return []
    res = []
    order = sorted(edges)
    for pos, e in enumerate(order):
        tail = head = None
        for vi, (_s, outs, ins) in enumerate(term):
            if ("e", e) in outs:
                tail = vi
            if ("e", e) in ins:
                head = vi
        if tail == head:
            continue  # a loop contracts to zero
        tsym, touts, tins = term[tail]
        hsym, houts, hins = term[head]
        merged_ins = tuple(o for o in tins if o != ("e", e)) + tuple(
            o for o in hins if o != ("e", e)
        )
        merged = (("wn", len(merged_ins)), houts, merged_ins)
        vs = [v for vi, v in enumerate(term) if vi not in (tail, head)]
        vs.append(merged)
        # compact the remaining edge ids, preserving order
        remaining = [x for x in order if x != e]
        remap = {old: new for new, old in enumerate(remaining)}
        vs2 = []
        for sym, outs, ins in vs:
            vs2.append(
                (
                    sym,
                    tuple(("e", remap[o[1]]) if o[0] == "e" else o for o in outs),
                    tuple(("e", remap[o[1]]) if o[0] == "e" else o for o in ins),
                )
            )
        res.append((tuple(vs2), -1 if pos % 2 else 1))
    return res


def _wn_bounds(biarity):
    m, n = biarity
    if m != 0 or n < 1:
        return (0, -1)
    return (-n, -1)


def _make_wn_spec():
    return ComplexSpec(
        name="wn",
        conv=WN_CONV,
        enumerate_slice=_wn_enumerate,
        degree_bounds=_wn_bounds,
        term_diff=_wn_diff,
        description="wn|det-edges",
    )


# ---------------------------------------------------------------------------
# catalog


def build_catalog():
    return {
        "ass-infty": _make_graded_spec("ass-infty", wheels=False, closures=None, com=False),
        "ass-infty-wheelified": _make_graded_spec(
            "ass-infty-wheelified", wheels=True, closures=None, com=False
        ),
        "ass-wheeled-min": _make_graded_spec(
            "ass-wheeled-min", wheels=True, closures=_ass_min_closures_by_degree, com=False
        ),
        "com-infty": _make_graded_spec("com-infty", wheels=False, closures=None, com=True),
        "com-infty-wheelified": _make_graded_spec(
            "com-infty-wheelified", wheels=True, closures=None, com=True
        ),
        "com-wheeled-min": _make_graded_spec(
            "com-wheeled-min", wheels=True, closures=_com_min_closures_by_degree, com=True
        ),
        "polyv": _make_polyv_spec(),
        "wn": _make_wn_spec(),
    }


CATALOG = build_catalog()


def get_complex(name):
    try:
        return CATALOG[name]
    except KeyError:
        from .errors import UnknownComplex

        raise UnknownComplex(f"no complex named {name!r}; known: {sorted(CATALOG)}")


def catalog_version():
    text = "\n".join(sorted(spec.description for spec in CATALOG.values()))
    return hashlib.sha256(text.encode()).hexdigest()[:16]
