"""Permutation utilities and generator-symmetry reduction.

Permutations are tuples of 1-based images: ``p[i-1] = p(i)``.

The module provides

* elementary permutation calculus (compose, invert, sign, cycles),
* unshuffle enumeration,
* cyclic-coinvariant dimensions with an orbit-enumeration cross-check,
* normal forms of decorated-corolla labelings for the symmetry types used
  by the shipped complexes (regular, cyclic skew, one or two blocks,
  sign-symmetric, plain symmetric), and
* the shuffle-quotient machinery: per arity, an exact echelon basis of the
  relation module spanned by all relabelings of the signed unshuffle sums,
  a transversal basis of the quotient and a reduction map expressing any
  labeling in that basis.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import ArityMismatch, BadPartition, BadRange


# ---------------------------------------------------------------------------
# permutation calculus


def identity(n):
    return tuple(range(1, n + 1))


def compose(a, b):
    """(a o b)(i) = a(b(i))."""
    return tuple(a[b[i] - 1] for i in range(len(a)))


def invert(a):
    inv = [0] * len(a)
    for i, v in enumerate(a):
        inv[v - 1] = i + 1
    return tuple(inv)


def sign(a):
    """Sign of a permutation given as a tuple of 1-based images."""
    seen = [False] * len(a)
    s = 1
    for i in range(len(a)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = a[j] - 1
            length += 1
        if length % 2 == 0:
            s = -s
    return s


def cycle(n):
    """The long cycle (1 2 ... n): 1->2, ..., n->1."""
    return tuple(list(range(2, n + 1)) + [1]) if n else ()


def rotate(seq, i):
    """Rotate a tuple left by i: (a_{i+1},...,a_n,a_1,...,a_i) for i steps."""
    i %= max(len(seq), 1)
    return tuple(seq[i:]) + tuple(seq[:i])


def koszul_sign_of_sort(keys, parities):
    """Sign of sorting `keys` ascending when item i has parity `parities[i]`.

    Equivalent to the Koszul sign of the permutation that stably sorts the
    sequence.  Returns 0 if two equal keys both have odd parity.
    """
    items = list(zip(keys, parities))
    s = 1
    # insertion sort, counting graded transpositions
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1][0] > items[j][0]:
            if items[j - 1][1] & items[j][1] & 1:
                s = -s
            items[j - 1], items[j] = items[j], items[j - 1]
            j -= 1
    for k in range(1, len(items)):
        if items[k - 1][0] == items[k][0] and items[k - 1][1] & items[k][1] & 1:
            return 0
    return s


def koszul_permutation_sign(order, parities):
    """Koszul sign of reordering graded objects 0..n-1 into `order`.

    `order[p]` is the original index placed at position p; `parities[i]` is
    the parity of original object i.
    """
    s = 1
    n = len(order)
    for p in range(n):
        for q in range(p + 1, n):
            if order[p] > order[q] and parities[order[p]] & parities[order[q]] & 1:
                s = -s
    return s


def unshuffles(k, n):
    """All tau with tau(1)<...<tau(k) and tau(k+1)<...<tau(n)."""
    if not (1 <= k <= n - 1):
        raise BadRange(f"unshuffles requires 1 <= k <= n-1, got k={k}, n={n}")
    out = []
    universe = range(1, n + 1)
    for first in itertools.combinations(universe, k):
        rest = tuple(v for v in universe if v not in first)
        out.append(first + rest)
    return out


# ---------------------------------------------------------------------------
# cyclic coinvariants


def _cyclic_subgroup_gens(n, p, q):
    gens = []
    if p >= 2:
        g = list(range(1, n + 1))
        for i in range(1, p + 1):
            g[i - 1] = i + 1 if i < p else 1
        gens.append(tuple(g))
    if q >= 2:
        g = list(range(1, n + 1))
        for i in range(p + 1, p + q + 1):
            g[i - 1] = i + 1 if i < p + q else p + 1
        gens.append(tuple(g))
    return gens


@lru_cache(maxsize=None)
def coinvariant_dim(n, p, q):
    """dim of k[Sigma_n] coinvariants under C_p x C_q (blocks 1..p, p+1..p+q).

    Computed by explicit orbit enumeration for n <= 8 and cross-checked
    against n!/(max(p,1)*max(q,1)); blocks of size <= 1 contribute trivial
    cyclic groups.
    """
    if p < 0 or q < 0 or p + q != n or n < 1:
        raise BadPartition(f"need p+q=n with p,q>=0, n>=1; got n={n}, p={p}, q={q}")
    formula = _factorial(n) // (max(p, 1) * max(q, 1))
    if n <= 8:
        gens = _cyclic_subgroup_gens(n, p, q)
        seen = set()
        orbits = 0
        for perm in itertools.permutations(range(1, n + 1)):
            if perm in seen:
                continue
            orbits += 1
            frontier = [perm]
            seen.add(perm)
            while frontier:
                x = frontier.pop()
                for g in gens:
                    y = compose(g, x)
                    if y not in seen:
                        seen.add(y)
                        frontier.append(y)
        if orbits != formula:
            raise BadPartition(
                f"orbit count {orbits} disagrees with formula {formula} "
                f"for (n,p,q)=({n},{p},{q})"
            )
        return orbits
    return formula


def _factorial(n):
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


# ---------------------------------------------------------------------------
# generator symbols


@dataclass(frozen=True)
class GeneratorSymbol:
    """A generator of a complex: name, biarity, Z-degree and symmetry type.

    symmetry is one of
      ("regular",)                  -- free module, ordered slots
      ("cyclic-skew", n)            -- one cyclic block with skew signs
      ("cyclic-skew-2", m, n)       -- two cyclic blocks with skew signs
      ("cyclic-2-plain", p, q)      -- two cyclic blocks, no signs
      ("shuffle", n)                -- regular modulo signed unshuffle sums
      ("sign-sym", m, n)            -- antisymmetric outputs, symmetric inputs
      ("sym", n)                    -- fully symmetric inputs
    """

    name: str
    biarity: tuple
    degree: int
    symmetry: tuple

    def __post_init__(self):
        kind = self.symmetry[0]
        m, n = self.biarity
        if kind in ("cyclic-skew-2", "cyclic-2-plain") and sum(self.symmetry[1:]) != m + n:
            raise ArityMismatch(f"block sizes of {self.symmetry} do not sum to arity {m + n}")
        if kind in ("cyclic-skew", "shuffle", "sym") and self.symmetry[1] != n:
            raise ArityMismatch(f"block size of {self.symmetry} differs from input arity {n}")


def _cyclic_skew_normal(block, step_sign):
    """Least rotation of a block, with (step_sign)**steps accumulated."""
    if not block:
        return block, 1
    best = None
    for i in range(len(block)):
        cand = rotate(block, i)
        s = step_sign ** i
        if best is None or cand < best[0]:
            best = (cand, s)
        elif cand == best[0] and s != best[1]:
            return None  # stabilizer acts by -1
    return best


def reduce_decoration(symbol, labeling):
    """Normal form of a corolla labeling under the symbol's symmetry.

    Returns a list of (labeling, coefficient) pairs: a single pair with
    coefficient +-1 for the monomial symmetry types, the expansion in the
    cached transversal basis for shuffle symbols, and [] when a stabilizing
    symmetry kills the class.
    """
    m, n = symbol.biarity
    kind = symbol.symmetry[0]
    if kind in ("cyclic-skew-2", "cyclic-2-plain"):
        p, q = symbol.symmetry[1], symbol.symmetry[2]
        total = p + q
    else:
        total = symbol.symmetry[1] if len(symbol.symmetry) > 1 else n
    if kind == "sign-sym":
        total = sum(symbol.symmetry[1:])
    if len(labeling) != total:
        raise ArityMismatch(
            f"labeling of length {len(labeling)} against symbol arity {total}"
        )
    labeling = tuple(labeling)

    if kind == "regular":
        return [(labeling, Fraction(1))]

    if kind == "cyclic-skew":
        res = _cyclic_skew_normal(labeling, -1 if (total - 1) % 2 else 1)
        return [] if res is None else [(res[0], Fraction(res[1]))]

    if kind in ("cyclic-skew-2", "cyclic-2-plain"):
        p, q = symbol.symmetry[1], symbol.symmetry[2]
        if kind == "cyclic-skew-2":
            s1 = -1 if (p - 1) % 2 else 1
            s2 = -1 if (q - 1) % 2 else 1
        else:
            s1 = s2 = 1
        # minimize jointly over the product of the two rotation groups
        best = None
        zero = False
        for i in range(max(p, 1)):
            for j in range(max(q, 1)):
                cand = rotate(labeling[:p], i) + rotate(labeling[p:], j)
                s = (s1 ** i) * (s2 ** j)
                if best is None or cand < best[0]:
                    best = (cand, s)
                elif cand == best[0] and s != best[1]:
                    zero = True
        if zero:
            return []
        return [(best[0], Fraction(best[1]))]

    if kind == "sym":
        return [(tuple(sorted(labeling)), Fraction(1))]

    if kind == "sign-sym":
        mm = symbol.symmetry[1]
        outs, ins = labeling[:mm], labeling[mm:]
        if len(set(outs)) != len(outs):
            return []
        s = koszul_sign_of_sort(list(outs), [1] * len(outs))
        return [(tuple(sorted(outs)) + tuple(sorted(ins)), Fraction(s))]

    if kind == "shuffle":
        if len(set(labeling)) != len(labeling):
            raise ArityMismatch("shuffle reduction needs distinct labels")
        ranked = sorted(labeling)
        rank = {v: i + 1 for i, v in enumerate(ranked)}
        pattern = tuple(rank[v] for v in labeling)
        out = []
        for bpat, coef in shuffle_reduce(pattern):
            out.append((tuple(ranked[i - 1] for i in bpat), coef))
        return out

    raise ArityMismatch(f"unknown symmetry kind {kind!r}")


# ---------------------------------------------------------------------------
# shuffle quotient: relation echelon, transversal basis, reduction map
#
# Relations at arity n: for every relabeling sigma and every 1<=k<=n-1 the
# signed sum  sum_tau sgn(tau) e_{sigma o tau^{-1}}  over (k,n-k)-unshuffles
# tau vanishes.  (Equivalently, the sum over shuffle permutations; this is
# the unique reading that is stable under relabeling of the attached objects
# and cuts k[Sigma_n] down to dimension (n-1)!.)  The engine needs (a) a
# basis transversal, (b) the expansion of an arbitrary labeling pattern in
# that transversal and (c) the echelonized relation subspace itself.


class _ShuffleArity:
    def __init__(self, n):
        self.n = n
        perms = sorted(itertools.permutations(range(1, n + 1)))
        self.index = {p: i for i, p in enumerate(perms)}
        self.perms = perms
        # echelon of the relation module: pivot column -> row (dict col->int)
        pivots = {}

        def insert(row):
            while row:
                lead = min(row)
                if lead not in pivots:
                    lv = row[lead]
                    if lv < 0:
                        row = {c: -v for c, v in row.items()}
                    g = 0
                    for v in row.values():
                        g = _gcd(g, abs(v))
                    if g > 1:
                        row = {c: v // g for c, v in row.items()}
                    pivots[lead] = row
                    return True
                piv = pivots[lead]
                a, b = piv[lead], row[lead]
                # row := a*row - b*piv   (integer, cancels lead)
                new = {}
                for c, v in row.items():
                    new[c] = a * v
                for c, v in piv.items():
                    new[c] = new.get(c, 0) - b * v
                row = {c: v for c, v in new.items() if v}
            return False

        base = {}
        for k in range(1, n):
            vec = {}
            for tau in unshuffles(k, n):
                lam = invert(tau)
                vec[lam] = vec.get(lam, 0) + sign(lam)
            base[k] = {t: c for t, c in vec.items() if c}
        for sig in perms:
            for k in range(1, n):
                row = {}
                for tau, c in base[k].items():
                    col = self.index[compose(sig, tau)]
                    row[col] = row.get(col, 0) + c
                insert({c: v for c, v in row.items() if v})
        self.pivot_rows = pivots
        self.rank = len(pivots)
        if self.rank != _factorial(n) - _factorial(n - 1):
            raise ArityMismatch(
                f"shuffle relation module at arity {n} has rank {self.rank}, "
                f"expected {_factorial(n) - _factorial(n - 1)}"
            )
        self.basis = [p for i, p in enumerate(perms) if i not in pivots]
        self._reduce_cache = {}

    def reduce(self, pattern):
        key = tuple(pattern)
        hit = self._reduce_cache.get(key)
        if hit is not None:
            return hit
        col = self.index[key]
        vec = {col: Fraction(1)}
        # eliminate pivot columns in increasing order
        changed = True
        while changed:
            changed = False
            for c in sorted(vec):
                if c in self.pivot_rows and vec[c]:
                    piv = self.pivot_rows[c]
                    f = vec[c] / piv[c]
                    for cc, v in piv.items():
                        nv = vec.get(cc, Fraction(0)) - f * v
                        if nv:
                            vec[cc] = nv
                        elif cc in vec:
                            del vec[cc]
                    changed = True
                    break
        out = [(self.perms[c], v) for c, v in sorted(vec.items()) if v]
        self._reduce_cache[key] = out
        return out


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


_SHUFFLE_CACHE = {}


def shuffle_arity(n):
    tab = _SHUFFLE_CACHE.get(n)
    if tab is None:
        tab = _ShuffleArity(n)
        _SHUFFLE_CACHE[n] = tab
    return tab


def shuffle_reduce(pattern):
    """Expand a labeling pattern (a permutation of 1..n) in the quotient basis."""
    return shuffle_arity(len(pattern)).reduce(pattern)


def shuffle_basis(n):
    """The transversal patterns spanning the arity-n shuffle quotient."""
    return list(shuffle_arity(n).basis)


def shuffle_nonbasis_reductions(n):
    """Pairs (pattern, expansion) for every non-transversal pattern at arity n."""
    tab = shuffle_arity(n)
    out = []
    basis = set(tab.basis)
    for p in tab.perms:
        if p not in basis:
            out.append((p, tab.reduce(p)))
    return out
