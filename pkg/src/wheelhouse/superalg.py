"""Truncated polynomial superalgebra: odd Laplacian, brackets, master equation.

The algebra is generated by coordinates x_1..x_d (parity of the underlying
basis vector) and their odd conjugates psi_1..psi_d (opposite parity), with
all products truncated above a fixed total polynomial degree.  Monomials are
stored in the canonical order x_1^{a_1}...x_d^{a_d} psi_1^{b_1}...psi_d^{b_d};
odd variables square to zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParityError, SpaceMismatch, SymmetryViolation


@dataclass(frozen=True)
class SuperSpace:
    """A finite-dimensional complex: basis parities and an odd differential."""

    parity: tuple  # parity of e_alpha, 0 or 1
    d_matrix: tuple = None  # D[beta][alpha]: d(e_alpha) = sum_beta D[beta][alpha] e_beta

    def __post_init__(self):
        d = len(self.parity)
        if self.d_matrix is None:
            object.__setattr__(self, "d_matrix", tuple(tuple(Fraction(0) for _ in range(d)) for _ in range(d)))
        D = self.d_matrix
        for beta in range(d):
            for alpha in range(d):
                if D[beta][alpha] and (self.parity[beta] - self.parity[alpha]) % 2 != 1:
                    raise ParityError(f"differential entry D[{beta}][{alpha}] is not parity-shifting")
        for beta in range(d):
            for alpha in range(d):
                acc = Fraction(0)
                for gamma in range(d):
                    acc += D[beta][gamma] * D[gamma][alpha]
                if acc:
                    raise ParityError("the differential does not square to zero")

    @property
    def dim(self):
        return len(self.parity)

    def x_parity(self, alpha):
        return self.parity[alpha] & 1

    def psi_parity(self, alpha):
        return (self.parity[alpha] + 1) & 1


# monomial: (xexp tuple, psiexp tuple)


class SuperPoly:
    """A truncated polynomial in the x and psi variables."""

    __slots__ = ("space", "trunc", "coeffs")

    def __init__(self, space, trunc, coeffs=None):
        self.space = space
        self.trunc = trunc
        self.coeffs = dict(coeffs or {})

    def copy(self):
        return SuperPoly(self.space, self.trunc, self.coeffs)

    @staticmethod
    def zero(space, trunc):
        return SuperPoly(space, trunc)

    @staticmethod
    def one(space, trunc):
        d = space.dim
        return SuperPoly(space, trunc, {((0,) * d, (0,) * d): Fraction(1)})

    @staticmethod
    def variable(space, trunc, kind, alpha):
        d = space.dim
        x = [0] * d
        p = [0] * d
        (x if kind == "x" else p)[alpha] = 1
        return SuperPoly(space, trunc, {(tuple(x), tuple(p)): Fraction(1)})

    # -- bookkeeping ---------------------------------------------------------

    def _check(self, other):
        if self.space is not other.space and self.space != other.space:
            raise SpaceMismatch("operands live on different superspaces")
        if self.trunc != other.trunc:
            raise SpaceMismatch("operands carry different truncation orders")

    def monomial_parity(self, mono):
        x, p = mono
        par = 0
        for alpha in range(self.space.dim):
            par += x[alpha] * self.space.x_parity(alpha)
            par += p[alpha] * self.space.psi_parity(alpha)
        return par & 1

    def parity_components(self):
        even = SuperPoly(self.space, self.trunc)
        odd = SuperPoly(self.space, self.trunc)
        for mono, c in self.coeffs.items():
            (odd if self.monomial_parity(mono) else even).coeffs[mono] = c
        return even, odd

    def is_zero(self):
        return not self.coeffs

    def add(self, other, scale=1):
        self._check(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            nv = out.get(m, Fraction(0)) + scale * c
            if nv:
                out[m] = nv
            elif m in out:
                del out[m]
        return SuperPoly(self.space, self.trunc, out)

    def scale(self, s):
        if not s:
            return SuperPoly(self.space, self.trunc)
        return SuperPoly(self.space, self.trunc, {m: c * s for m, c in self.coeffs.items()})

    def __eq__(self, other):
        return (
            isinstance(other, SuperPoly)
            and self.space == other.space
            and self.trunc == other.trunc
            and self.coeffs == other.coeffs
        )

    # -- products --------------------------------------------------------------

    def _odd_units(self, mono):
        """Odd factors of the monomial in canonical order, as variable keys."""
        x, p = mono
        units = []
        for alpha in range(self.space.dim):
            if x[alpha] and self.space.x_parity(alpha):
                units.append((0, alpha))
        for alpha in range(self.space.dim):
            if p[alpha] and self.space.psi_parity(alpha):
                units.append((1, alpha))
        return units

    def wedge(self, other):
        """The supercommutative product, truncated."""
        self._check(other)
        space, trunc = self.space, self.trunc
        out = {}
        for m1, c1 in self.coeffs.items():
            deg1 = sum(m1[0]) + sum(m1[1])
            u1 = self._odd_units(m1)
            for m2, c2 in other.coeffs.items():
                if deg1 + sum(m2[0]) + sum(m2[1]) > trunc:
                    continue
                u2 = self._odd_units(m2)
                if set(u1) & set(u2):
                    continue  # an odd variable squares to zero
                # merge sign: inversions between the two сanonically ordered
                # odd sequences
                s = 1
                for a in u1:
                    for b in u2:
                        if b < a:
                            s = -s
                x = tuple(m1[0][i] + m2[0][i] for i in range(space.dim))
                p = tuple(m1[1][i] + m2[1][i] for i in range(space.dim))
                mono = (x, p)
                nv = out.get(mono, Fraction(0)) + s * c1 * c2
                if nv:
                    out[mono] = nv
                elif mono in out:
                    del out[mono]
        return SuperPoly(space, trunc, out)

    # -- left derivatives ---------------------------------------------------------

    def derivative(self, kind, alpha):
        """Left graded derivative with respect to x_alpha or psi_alpha."""
        space = self.space
        vkey = (0, alpha) if kind == "x" else (1, alpha)
        vpar = space.x_parity(alpha) if kind == "x" else space.psi_parity(alpha)
        out = {}
        for (x, p), c in self.coeffs.items():
            exp = x[alpha] if kind == "x" else p[alpha]
            if not exp:
                continue
            # sign: move one factor of v to the front
            if vpar:
                pref = 0
                for u in self._odd_units((x, p)):
                    if u < vkey:
                        pref += 1
                s = -1 if pref & 1 else 1
            else:
                s = 1
            if kind == "x":
                nm = (tuple(v - 1 if i == alpha else v for i, v in enumerate(x)), p)
            else:
                nm = (x, tuple(v - 1 if i == alpha else v for i, v in enumerate(p)))
            nv = out.get(nm, Fraction(0)) + s * exp * c
            if nv:
                out[nm] = nv
            elif nm in out:
                del out[nm]
        return SuperPoly(space, self.trunc, out)


def wedge(f, g):
    return f.wedge(g)


def laplacian(f):
    """The odd Laplacian sum_alpha d^2/dx^alpha dpsi_alpha (left derivatives)."""
    out = SuperPoly(f.space, f.trunc)
    for alpha in range(f.space.dim):
        out = out.add(f.derivative("psi", alpha).derivative("x", alpha))
    return out


def schouten(f, g):
    """The odd bracket in coordinates.

    For f of parity s and base parity p_alpha the bracket is
      sum_alpha (-1)^{s(1+p)} d_psi f . d_x g  +  (-1)^{s p} d_x f . d_psi g,
    derived once from the second-order defect of the Laplacian; the
    derived-bracket route below must agree and the tests enforce it.
    """
    f._check(g)
    out = SuperPoly(f.space, f.trunc)
    f_even, f_odd = f.parity_components()
    for s, part in ((0, f_even), (1, f_odd)):
        if part.is_zero():
            continue
        for alpha in range(f.space.dim):
            p = f.space.x_parity(alpha)
            s1 = -1 if (s * (1 + p)) & 1 else 1
            s2 = -1 if (s * p) & 1 else 1
            out = out.add(part.derivative("psi", alpha).wedge(g.derivative("x", alpha)), s1)
            out = out.add(part.derivative("x", alpha).wedge(g.derivative("psi", alpha)), s2)
    return out


def derived_bracket(f, g):
    """[f,g] = (-1)^{|f|} Delta(fg) - (-1)^{|f|} Delta(f)g - f Delta(g)."""
    f._check(g)
    out = SuperPoly(f.space, f.trunc)
    f_even, f_odd = f.parity_components()
    for s, part in ((0, f_even), (1, f_odd)):
        if part.is_zero():
            continue
        sg = -1 if s else 1
        out = out.add(laplacian(part.wedge(g)), sg)
        out = out.add(laplacian(part).wedge(g), -sg)
        out = out.add(part.wedge(laplacian(g)), -1)
    return out


def d0_element(space, trunc):
    """The differential as a linear hamiltonian: sum x^alpha D^beta_alpha psi_beta."""
    out = SuperPoly(space, trunc)
    D = space.d_matrix
    for alpha in range(space.dim):
        for beta in range(space.dim):
            if D[beta][alpha]:
                xa = SuperPoly.variable(space, trunc, "x", alpha)
                pb = SuperPoly.variable(space, trunc, "psi", beta)
                out = out.add(xa.wedge(pb), D[beta][alpha])
    return out


def d_action(f):
    """df := [d0 . f], the differential induced on the algebra."""
    return schouten(d0_element(f.space, f.trunc), f)


def master_residual(S, space=None):
    """dS + Delta S + (1/2)[S,S]; raises ParityError for odd S.

    The generating function is expected to carry the interaction part (the
    linear differential acts through d, not through S itself; including the
    linear hamiltonian in S double-counts it).
    """
    space = space or S.space
    _ev, odd = S.parity_components()
    if not odd.is_zero():
        raise ParityError("master functions must be even")
    res = d_action(S)
    res = res.add(laplacian(S))
    res = res.add(schouten(S, S), Fraction(1, 2))
    return res


def poly_exp(S, trunc=None):
    """exp(S) of a polynomial with no constant term, up to truncation."""
    trunc = S.trunc if trunc is None else trunc
    out = SuperPoly.one(S.space, S.trunc)
    term = SuperPoly.one(S.space, S.trunc)
    for k in range(1, trunc + 1):
        term = term.wedge(S).scale(Fraction(1, k))
        if term.is_zero():
            break
        out = out.add(term)
    return out


def exponential_defect(S):
    """(d + Delta) e^S - (dS + Delta S + (1/2)[S,S]) e^S, in exact degrees.

    Both sides are computed under the truncation; degrees at the truncation
    boundary are discarded because the products there are not exact.
    """
    eS = poly_exp(S)
    lhs = d_action(eS).add(laplacian(eS))
    rhs = master_residual(S).wedge(eS)
    diff = lhs.add(rhs, -1)
    safe = {}
    for mono, c in diff.coeffs.items():
        if sum(mono[0]) + sum(mono[1]) <= S.trunc - 2:
            safe[mono] = c
    return SuperPoly(S.space, S.trunc, safe)


# ---------------------------------------------------------------------------
# representation data and the dictionary


class RepresentationData:
    """Corolla values: a map (out indices, in indices) -> rational.

    Entries are graded-antisymmetric in the outputs and graded-symmetric in
    the inputs; arbitrary index tuples are canonicalized on insertion.
    """

    def __init__(self, space, cutoff):
        self.space = space
        self.cutoff = cutoff
        self.entries = {}

    def add(self, out_idx, in_idx, value):
        if len(out_idx) + len(in_idx) > self.cutoff:
            raise SymmetryViolation(
                f"corolla arity {len(out_idx)}+{len(in_idx)} exceeds the cutoff {self.cutoff}"
            )
        res = self._canonical(tuple(out_idx), tuple(in_idx))
        if res is None:
            if value:
                raise SymmetryViolation(
                    f"entry {out_idx}|{in_idx} repeats an antisymmetric index"
                )
            return
        key, s = res
        nv = self.entries.get(key, Fraction(0)) + s * Fraction(value)
        if nv:
            self.entries[key] = nv
        elif key in self.entries:
            del self.entries[key]

    def _canonical(self, out_idx, in_idx):
        space = self.space
        # outputs: sort with psi-parities (psi_alpha has parity p_alpha + 1)
        s = 1
        out = list(out_idx)
        for i in range(1, len(out)):
            j = i
            while j > 0 and out[j - 1] > out[j]:
                if space.psi_parity(out[j - 1]) and space.psi_parity(out[j]):
                    s = -s
                out[j - 1], out[j] = out[j], out[j - 1]
                j -= 1
        for i in range(1, len(out)):
            if out[i - 1] == out[i] and space.psi_parity(out[i]):
                return None
        ins = list(in_idx)
        for i in range(1, len(ins)):
            j = i
            while j > 0 and ins[j - 1] > ins[j]:
                if space.x_parity(ins[j - 1]) and space.x_parity(ins[j]):
                    s = -s
                ins[j - 1], ins[j] = ins[j], ins[j - 1]
                j -= 1
        for i in range(1, len(ins)):
            if ins[i - 1] == ins[i] and space.x_parity(ins[i]):
                return None
        return (tuple(out), tuple(ins)), s

    def value(self, out_idx, in_idx):
        res = self._canonical(tuple(out_idx), tuple(in_idx))
        if res is None:
            return Fraction(0)
        key, s = res
        return s * self.entries.get(key, Fraction(0))


def rep_to_S(rep, trunc, include_d0=False):
    """Assemble the generating function of a representation.

    Each canonical entry contributes value / prod(multiplicities!) times its
    monomial; with include_d0 the linear hamiltonian of the differential is
    added (as in the master function with the differential absorbed).
    """
    space = rep.space
    out = SuperPoly(space, trunc)
    for (A, B), val in rep.entries.items():
        if len(A) + len(B) > trunc:
            continue
        x = [0] * space.dim
        p = [0] * space.dim
        for beta in B:
            x[beta] += 1
        for alpha in A:
            p[alpha] += 1
        if any(v > 1 for i, v in enumerate(x) if space.x_parity(i)):
            continue
        denom = 1
        for i in range(space.dim):
            for k in range(2, x[i] + 1):
                denom *= k
        mono = (tuple(x), tuple(p))
        c = out.coeffs.get(mono, Fraction(0)) + val / denom
        if c:
            out.coeffs[mono] = c
        elif mono in out.coeffs:
            del out.coeffs[mono]
    if include_d0:
        out = out.add(d0_element(space, trunc))
    return out


# -- tensor-side evaluation of the graph differential -------------------------


def _merge_sign(units_a, units_b):
    s = 1
    for a in units_a:
        for b in units_b:
            if b < a:
                s = -s
    return s


class _SuperTensor:
    """A multilinear map in coordinates: dict (A_out sorted, B_in sorted) -> value.

    Used only for the dictionary check; A carries psi-parities, B x-parities.
    """

    def __init__(self, space):
        self.space = space
        self.data = {}

    def add(self, A, B, val):
        if not val:
            return
        nv = self.data.get((A, B), Fraction(0)) + val
        if nv:
            self.data[(A, B)] = nv
        elif (A, B) in self.data:
            del self.data[(A, B)]


def _insert_sorted(idx_tuple, gamma, parities):
    """Insert gamma at the end then sort left; returns (tuple, sign) or None."""
    lst = list(idx_tuple) + [gamma]
    s = 1
    j = len(lst) - 1
    while j > 0 and lst[j - 1] > lst[j]:
        if parities[lst[j - 1]] and parities[lst[j]]:
            s = -s
        lst[j - 1], lst[j] = lst[j], lst[j - 1]
        j -= 1
    for i in range(1, len(lst)):
        if lst[i - 1] == lst[i] and parities[lst[i]]:
            return None
    return tuple(lst), s


def rep_compatibility_defect(rep, trunc=None):
    """R(delta(corolla)) - d0(R(corolla)) over all corollas within the cutoff.

    Computed on the tensor side by contracting corolla values along the
    graphs of the polyvector differential; returns the total defect tensor
    (a dict keyed by (generator biarity, output indices, input indices)).
    Raises CutoffTooSmall when the loop closure needs arities beyond the
    representation's cutoff.
    """
    from .errors import CutoffTooSmall
    from .complexes import pv_rule

    space = rep.space
    d = space.dim
    psi_par = [space.psi_parity(a) for a in range(d)]
    x_par = [space.x_parity(a) for a in range(d)]
    defect = {}

    def add_defect(m, n, A, B, val):
        if not val:
            return
        key = ((m, n), A, B)
        nv = defect.get(key, Fraction(0)) + val
        if nv:
            defect[key] = nv
        elif key in defect:
            del defect[key]

    for m in range(0, rep.cutoff + 1):
        for n in range(0, rep.cutoff + 1 - m):
            if m + n + 2 > rep.cutoff:
                raise CutoffTooSmall(
                    f"corolla ({m},{n}) needs arity {m + n + 2} values; cutoff {rep.cutoff}"
                )
            # evaluate R(delta c) term by term
            outs = tuple(("o", k) for k in range(1, m + 1))
            ins = tuple(("i", k) for k in range(1, n + 1))
            acc = _SuperTensor(space)
            for graph, coeff in pv_rule(m, n, outs, ins):
                _eval_graph(rep, graph, m, n, coeff, acc)
            # subtract d0 R(c)
            _eval_d0R(rep, m, n, acc)
            for (A, B), val in acc.data.items():
                add_defect(m, n, A, B, val)
    return defect


def _slot_positions(objs, kind):
    return [obj[1] - 1 for obj in objs if obj[0] == kind]


def _eval_graph(rep, graph, m, n, coeff, acc):
    """Evaluate one one- or two-vertex graph of the polyvector rule."""
    space = rep.space
    d = space.dim
    psi_par = [space.psi_parity(a) for a in range(d)]
    x_par = [space.x_parity(a) for a in range(d)]

    if len(graph) == 1:
        # trace closure: (m+1, n+1)-corolla with the last output contracted
        # against the last input
        (sym, outs, ins) = graph[0]
        for (A, B), val in rep.entries.items():
            if len(A) != m + 1 or len(B) != n + 1:
                continue
            for pos_a in range(m + 1):
                gamma = A[pos_a]
                rest_a = A[:pos_a] + A[pos_a + 1 :]
                # sign to move gamma to the last output slot
                s_a = 1
                tail = A[pos_a + 1 :]
                if psi_par[gamma]:
                    for t in tail:
                        if psi_par[t]:
                            s_a = -s_a
                for pos_b in range(n + 1):
                    if B[pos_b] != gamma:
                        continue
                    rest_b = B[:pos_b] + B[pos_b + 1 :]
                    s_b = 1
                    if x_par[gamma]:
                        for t in B[pos_b + 1 :]:
                            if x_par[t]:
                                s_b = -s_b
                    # supertrace sign on the contracted index
                    s_tr = -1 if x_par[gamma] else 1
                    acc.add(rest_a, rest_b, coeff * val * s_a * s_b * s_tr)
        return

    # two-vertex graph: v1 carries outputs I1 + edge, v2 inputs J2 + edge
    v1, v2 = graph
    i1 = _slot_positions(v1[1][:-1], "o")
    j1 = _slot_positions(v1[2], "i")
    i2 = _slot_positions(v2[1], "o")
    j2 = _slot_positions(v2[2][:-1], "i")
    for (A1, B1), val1 in rep.entries.items():
        if len(A1) != len(i1) + 1 or len(B1) != len(j1):
            continue
        for (A2, B2), val2 in rep.entries.items():
            if len(A2) != len(i2) or len(B2) != len(j2) + 1:
                continue
            for pos_g in range(len(A1)):
                gamma = A1[pos_g]
                rest1 = A1[:pos_g] + A1[pos_g + 1 :]
                s_g = 1
                if psi_par[gamma]:
                    for t in A1[pos_g + 1 :]:
                        if psi_par[t]:
                            s_g = -s_g
                for pos_h in range(len(B2)):
                    if B2[pos_h] != gamma:
                        continue
                    rest2 = B2[:pos_h] + B2[pos_h + 1 :]
                    s_h = 1
                    if x_par[gamma]:
                        for t in B2[pos_h + 1 :]:
                            if x_par[t]:
                                s_h = -s_h
                    # crossing sign: the contracted psi index moves past the
                    # outputs of the second factor
                    s_x = 1
                    if psi_par[gamma]:
                        for t in A2:
                            if psi_par[t]:
                                s_x = -s_x
                    A = _insert_many(rest1, A2, psi_par)
                    B = _insert_many(B1, rest2, x_par)
                    if A is None or B is None:
                        continue
                    (At, sA) = A
                    (Bt, sB) = B
                    # map slot labels back to the corolla's ordering
                    sl = _label_sign(v1, v2, i1, i2, j1, j2, At, Bt, rep.space)
                    if sl is None:
                        continue
                    acc.add(
                        At,
                        Bt,
                        coeff * val1 * val2 * s_g * s_h * s_x * sA * sB * sl,
                    )


def _insert_many(a, b, parities):
    """Merge two sorted index tuples with Koszul signs; None kills squares."""
    out = list(a)
    s = 1
    for g in b:
        res = _insert_sorted(tuple(out), g, parities)
        if res is None:
            return None
        t, s2 = res
        out = list(t)
        s *= s2
    return (tuple(out), s)


def _label_sign(v1, v2, i1, i2, j1, j2, At, Bt, space):
    """Sign relating the split slot labels to the corolla's canonical order."""
    # outputs: the rule splits the label set as I1 | I2 with a shuffle sign
    # that the rule itself already carries, and the inputs symmetrically; on
    # the tensor side the merge signs above account for the index reordering,
    # so only the relative block order of the label sets matters.
    s = 1
    for a in i2:
        for b in i1:
            if a < b:
                s = s  # label blocks were already signed by the rule
    return s


def _eval_d0R(rep, m, n, acc):
    """Subtract the differential acting on the corolla value."""
    space = rep.space
    d = space.dim
    D = space.d_matrix
    psi_par = [space.psi_parity(a) for a in range(d)]
    x_par = [space.x_parity(a) for a in range(d)]
    for (A, B), val in rep.entries.items():
        if len(A) != m or len(B) != n:
            continue
        # d0 on each output slot
        for pos in range(m):
            alpha = A[pos]
            pref = 1
            for t in A[:pos]:
                if psi_par[t] and (space.parity[alpha] + 1 + 1) % 2:
                    pass
            for beta in range(d):
                if not D[beta][alpha]:
                    continue
                rest = A[:pos] + A[pos + 1 :]
                res = _insert_sorted(rest, beta, psi_par)
                if res is None:
                    continue
                At, s = res
                s_move = 1
                for t in A[:pos]:
                    if psi_par[t]:
                        s_move = -s_move
                acc.add(At, B, -val * D[beta][alpha] * s * s_move)
        # d0 on each input slot, with the sign of passing the outputs
        s_out = 1
        for t in A:
            if psi_par[t]:
                s_out = -s_out
        for pos in range(n):
            beta = B[pos]
            for alpha in range(d):
                if not D[beta][alpha]:
                    continue
                rest = B[:pos] + B[pos + 1 :]
                res = _insert_sorted(rest, alpha, x_par)
                if res is None:
                    continue
                Bt, s = res
                s_move = 1
                for t in B[:pos]:
                    if x_par[t]:
                        s_move = -s_move
                acc.add(A, Bt, val * D[beta][alpha] * s * s_move * s_out)
