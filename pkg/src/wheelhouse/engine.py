"""Chain engine: slice bases, differential matrices, d^2 checks, cohomology.

A ComplexSpec bundles the orientation conventions, a slice enumerator, a
term-level differential rule and (optionally) a generator of relation
vectors.  Relation vectors turn the enumerated monomial basis into a
presentation of a quotient complex: the engine echelonizes them per slice,
keeps the free columns as the working basis and verifies that the
differential maps the relation span into the relation span.

All matrices are exact; ranks come from fraction-free elimination with
modular probes.
"""

from __future__ import annotations

import gc
from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DSquaredFailed, InfiniteSlice
from .linalg import RationalEchelon, SparseRationalMatrix
from .terms import canonical_term


@contextmanager
def _gc_paused():
    """The engine allocates millions of acyclic tuples; generational GC scans
    dominate otherwise.  Reference counting reclaims everything we drop."""
    was = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was:
            gc.enable()


@dataclass
class ComplexSpec:
    name: str
    conv: object  # terms.Conventions
    enumerate_slice: callable  # (biarity, degree) -> iterable of rigid terms
    degree_bounds: callable  # biarity -> (dmin, dmax) inclusive
    term_diff: callable  # canonical term -> [(rigid_vertices, coeff), ...]
    relation_rows: callable = None  # (slice terms) -> iterable of [(rigid, coeff)]
    description: str = ""
    _cache: dict = field(default_factory=dict, repr=False)

    def slice(self, biarity, degree):
        key = (tuple(biarity), degree)
        hit = self._cache.get(key)
        if hit is None:
            with _gc_paused():
                hit = _build_slice(self, biarity, degree)
            self._cache[key] = hit
        return hit

    def matrix(self, biarity, degree):
        key = ("d", tuple(biarity), degree)
        hit = self._cache.get(key)
        if hit is None:
            with _gc_paused():
                hit = _build_matrix(self, biarity, degree)
            self._cache[key] = hit
        return hit


class Slice:
    def __init__(self, terms, rel):
        self.terms = terms
        self.index = {t: i for i, t in enumerate(terms)}
        self.rel = rel
        if rel is not None:
            self.free = rel.free_columns(len(terms))
        else:
            self.free = list(range(len(terms)))
        self.free_index = {c: i for i, c in enumerate(self.free)}

    @property
    def dim(self):
        return len(self.free)

    def coordinates(self, big_vec):
        """Quotient coordinates of a big-space vector (dict col -> Fraction)."""
        if self.rel is not None:
            big_vec = self.rel.reduce(big_vec)
        return {self.free_index[c]: v for c, v in big_vec.items() if v}


def _build_slice(spec, biarity, degree):
    seen = set()
    for rigid in spec.enumerate_slice(biarity, degree):
        res = canonical_term(rigid, spec.conv)
        if res is not None:
            seen.add(res[0])
    terms = sorted(seen)
    rel = None
    if spec.relation_rows is not None:
        index = {t: i for i, t in enumerate(terms)}
        rel = RationalEchelon()
        for combo in spec.relation_rows(terms):
            row = {}
            for rigid, coeff in combo:
                res = canonical_term(rigid, spec.conv)
                if res is None:
                    continue
                canon, s = res
                c = index.get(canon)
                if c is None:
                    raise InfiniteSlice(
                        f"relation for {spec.name} leaves the enumerated slice "
                        f"{biarity} deg {degree}"
                    )
                nv = row.get(c, 0) + coeff * s
                if nv:
                    row[c] = nv
                elif c in row:
                    del row[c]
            if row:
                rel.insert(row)
    return Slice(terms, rel)


def _diff_big_vector(spec, term, target):
    """Image of one canonical big-space term under the differential, as a
    dict over the target slice's big index."""
    out = {}
    for rigid, coeff in spec.term_diff(term):
        res = canonical_term(rigid, spec.conv)
        if res is None:
            continue
        canon, s = res
        idx = target.index.get(canon)
        if idx is None:
            raise DSquaredFailed(
                f"{spec.name}: differential output not in the enumerated "
                f"target slice (term {canon})"
            )
        nv = out.get(idx, 0) + coeff * s
        if nv:
            out[idx] = nv
        elif idx in out:
            del out[idx]
    return out


def _build_matrix(spec, biarity, degree):
    src = spec.slice(biarity, degree)
    dst = spec.slice(biarity, degree + 1)
    mat = SparseRationalMatrix(dst.dim, src.dim)
    for j, col in enumerate(src.free):
        big = _diff_big_vector(spec, src.terms[col], dst)
        for r, v in dst.coordinates(big).items():
            mat.add(r, j, v)
    return mat


def enumerate_basis(spec, biarity, degree):
    """Canonical representatives of the slice basis (quotient classes are
    represented by their echelon-free big terms)."""
    sl = spec.slice(biarity, degree)
    return [sl.terms[c] for c in sl.free]


def differential_matrix(spec, biarity, degree):
    return spec.matrix(biarity, degree)


def verify_relations_preserved(spec, biarity, degree):
    """Check that the differential maps the relation span into the relation
    span (well-definedness of the quotient differential)."""
    src = spec.slice(biarity, degree)
    if src.rel is None:
        return None
    dst = spec.slice(biarity, degree + 1)
    for piv_col, row in sorted(src.rel.pivots.items()):
        img = {}
        for c, coeff in row.items():
            big = _diff_big_vector(spec, src.terms[c], dst)
            for i, v in big.items():
                nv = img.get(i, 0) + coeff * v
                if nv:
                    img[i] = nv
                elif i in img:
                    del img[i]
        if dst.rel is not None:
            img = dst.rel.reduce(img)
        if img:
            return (piv_col, img)
    return None


def verify_d_squared(spec, biarity, degree_range):
    """Compose consecutive differentials over the degree range.

    Returns None if every composite vanishes (and, for quotient complexes,
    the relation span is preserved); otherwise a (degree, column, vector)
    counterexample describing d(d(basis element)).
    """
    degrees = list(degree_range)
    for d in degrees:
        if spec.relation_rows is not None:
            bad = verify_relations_preserved(spec, biarity, d)
            if bad is not None:
                return (d, "relations", bad)
    for d in degrees:
        a = spec.matrix(biarity, d)
        b = spec.matrix(biarity, d + 1)
        with _gc_paused():
            comp = b.compose(a)
        for j in range(comp.cols):
            col = comp.column(j)
            if col:
                src = spec.slice(biarity, d)
                dst2 = spec.slice(biarity, d + 2)
                vec = {dst2.terms[dst2.free[i]]: v for i, v in col.items()}
                return (d, src.terms[src.free[j]], vec)
    return None


def cohomology_dims(spec, biarity, degree_range=None, check_d_squared=True):
    """Exact cohomology dimensions per degree over the slice's support."""
    if degree_range is None:
        dmin, dmax = spec.degree_bounds(biarity)
        degrees = list(range(dmin, dmax + 1))
    else:
        degrees = list(degree_range)
    if check_d_squared:
        bad = verify_d_squared(spec, biarity, degrees)
        if bad is not None:
            raise DSquaredFailed(f"{spec.name}{tuple(biarity)}: d^2 != 0 at degree {bad[0]}")
    dims = {d: spec.slice(biarity, d).dim for d in degrees}
    ranks = {}
    for d in degrees:
        with _gc_paused():
            ranks[d] = spec.matrix(biarity, d).rank()
    below = {degrees[0] - 1: 0}
    out = {}
    for d in degrees:
        r_prev = ranks.get(d - 1, below.get(d - 1, 0))
        out[d] = dims[d] - ranks[d] - r_prev
    return {d: v for d, v in out.items() if dims[d]}


def euler_characteristic(spec, biarity, degrees):
    chain = 0
    for d in degrees:
        chain += (-1) ** (d % 2) * spec.slice(biarity, d).dim
    return chain


# ---------------------------------------------------------------------------
# Leibniz extension of generator rules


def leibniz_term_diff(generator_rule, vertex_parity):
    """Lift a one-vertex rule to a differential on whole terms.

    generator_rule(sym, outs, ins) returns [(mini_vertices, coeff), ...]
    where mini_vertices reference the corolla's objects plus fresh edges
    tagged ("e", -1), ("e", -2), ...; the rule's vertex order is kept at the
    substitution site.  The Koszul sign is (-1)**(sum of degrees of the
    decorations preceding the acted vertex).
    """

    def diff(term):
        out = []
        prefix = 0
        all_ids = set()
        for _s, outs, ins in term:
            for obj in outs:
                if obj[0] == "e":
                    all_ids.add(obj[1])
            for obj in ins:
                if obj[0] == "e":
                    all_ids.add(obj[1])
        next_id = max(all_ids) + 1 if all_ids else 0
        for i, (sym, outs, ins) in enumerate(term):
            for mini, coeff in generator_rule(sym, outs, ins):
                fresh = {}
                spliced = []
                for msym, mouts, mins in mini:
                    no = tuple(_fresh(obj, fresh, next_id) for obj in mouts)
                    ni = tuple(_fresh(obj, fresh, next_id) for obj in mins)
                    spliced.append((msym, no, ni))
                new_vs = term[:i] + tuple(spliced) + term[i + 1 :]
                out.append((new_vs, -coeff if prefix & 1 else coeff))
            prefix += vertex_parity(sym) & 1
        return out

    return diff


def _fresh(obj, fresh, base):
    if obj[0] == "e" and obj[1] < 0:
        if obj[1] not in fresh:
            fresh[obj[1]] = base + len(fresh)
        return ("e", fresh[obj[1]])
    return obj
