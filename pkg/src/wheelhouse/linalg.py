"""Exact sparse linear algebra over the rationals.

Ranks are computed by integer fraction-free elimination (rows are rescaled
to integers, combined by cross-multiplication and divided by their content),
so no floating point is ever involved.  Every rank can be cross-checked by
independent row reduction modulo random word-sized primes; a disagreement
aborts the computation.
"""

from __future__ import annotations

import random
from fractions import Fraction
from heapq import heapify, heappop, heappush
from math import gcd

from .errors import RankMismatch

_PRIME_FLOOR = 1 << 30


def _random_primes(count, seed):
    rng = random.Random(seed)
    primes = []
    while len(primes) < count:
        cand = rng.randrange(_PRIME_FLOOR, _PRIME_FLOOR << 1) | 1
        if _is_prime(cand) and cand not in primes:
            primes.append(cand)
    return primes


def _is_prime(n):
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _int_rows(rows):
    """Clear denominators rowwise; content-normalize."""
    out = []
    for row in rows:
        if not row:
            continue
        denom = 1
        for v in row.values():
            if isinstance(v, Fraction):
                denom = denom * v.denominator // gcd(denom, v.denominator)
        new = {}
        g = 0
        for c, v in row.items():
            iv = int(v * denom) if isinstance(v, Fraction) else v * denom
            if iv:
                new[c] = iv
                g = gcd(g, abs(iv))
        if new:
            if g > 1:
                new = {c: v // g for c, v in new.items()}
            out.append(new)
    return out


def _sparse_rank(rows, p=None):
    """Rank of sparse integer rows by Markowitz-pivoted elimination.

    p = None works exactly over the integers (cross-multiplication plus
    content reduction, so no fractions appear); otherwise arithmetic is done
    modulo the prime p.  Unit pivots are strongly preferred, which keeps the
    integer growth negligible on incidence-like matrices.
    """
    live = {}
    col_rows = {}
    for ri, row in enumerate(rows):
        if p is not None:
            row = {c: v % p for c, v in row.items() if v % p}
        else:
            row = {c: v for c, v in row.items() if v}
        if not row:
            continue
        live[ri] = row
        for c in row:
            col_rows.setdefault(c, set()).add(ri)

    rank = 0
    while live:
        # pivot in a shortest row, preferring unit entries in thin columns
        pri = min(live, key=lambda r: len(live[r]))
        prow_view = live[pri]
        best = None
        for c, v in prow_view.items():
            unit = 0 if (abs(v) == 1 or p is not None) else 1
            score = (unit, len(col_rows[c]))
            if best is None or score < best[0]:
                best = (score, c)
        pc = best[1]
        prow = live.pop(pri)
        for c in prow:
            col_rows[c].discard(pri)
        rank += 1
        pv = prow[pc]
        if p is not None:
            inv = pow(pv, p - 2, p)
            prow = {c: v * inv % p for c, v in prow.items()}
            pv = 1
        targets = list(col_rows.get(pc, ()))
        for ri in targets:
            row = live[ri]
            rv = row[pc]
            if p is not None:
                f = rv
                new = {}
                for c, v in row.items():
                    new[c] = v
                for c, v in prow.items():
                    nv = (new.get(c, 0) - f * v) % p
                    if nv:
                        new[c] = nv
                    elif c in new:
                        del new[c]
            else:
                new = {}
                if pv == 1 or pv == -1:
                    f = rv * pv
                    for c, v in row.items():
                        new[c] = v
                    for c, v in prow.items():
                        nv = new.get(c, 0) - f * v
                        if nv:
                            new[c] = nv
                        elif c in new:
                            del new[c]
                else:
                    for c, v in row.items():
                        new[c] = pv * v
                    for c, v in prow.items():
                        nv = new.get(c, 0) - rv * v
                        if nv:
                            new[c] = nv
                        elif c in new:
                            del new[c]
                    g = 0
                    for v in new.values():
                        g = gcd(g, abs(v))
                        if g == 1:
                            break
                    if g > 1:
                        new = {c: v // g for c, v in new.items()}
            for c in row:
                col_rows[c].discard(ri)
            if new:
                live[ri] = new
                for c in new:
                    col_rows.setdefault(c, set()).add(ri)
            else:
                del live[ri]
    return rank


def _eliminate_int(rows):
    """Kept for the echelon-style callers: pivot dict col -> row."""
    pivots = {}
    for row in rows:
        row = dict(row)
        while row:
            lead = min(row)
            piv = pivots.get(lead)
            if piv is None:
                if row[lead] < 0:
                    row = {c: -v for c, v in row.items()}
                g = 0
                for v in row.values():
                    g = gcd(g, abs(v))
                if g > 1:
                    row = {c: v // g for c, v in row.items()}
                pivots[lead] = row
                break
            a, b = piv[lead], row[lead]
            new = {}
            for c, v in row.items():
                new[c] = a * v
            for c, v in piv.items():
                nv = new.get(c, 0) - b * v
                if nv:
                    new[c] = nv
                elif c in new:
                    del new[c]
            row = new
    return pivots


class SparseRationalMatrix:
    """Sparse matrix with Fraction entries, stored column-major.

    Columns are the natural unit here: the chain engine assembles one column
    per basis element of the source slice.
    """

    def __init__(self, rows, cols):
        self.rows = rows
        self.cols = cols
        self.columns = [dict() for _ in range(cols)]

    def add(self, i, j, value):
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError((i, j))
        col = self.columns[j]
        nv = col.get(i, 0) + value
        if nv:
            col[i] = nv
        elif i in col:
            del col[i]

    def entry(self, i, j):
        return self.columns[j].get(i, Fraction(0))

    # values may be ints or Fractions; both are exact

    def nnz(self):
        return sum(len(c) for c in self.columns)

    def is_zero(self):
        return all(not c for c in self.columns)

    def column(self, j):
        return dict(self.columns[j])

    def compose(self, other):
        """self o other (apply other first): self.cols must equal other.rows."""
        if other.rows != self.cols:
            raise ValueError("dimension mismatch in compose")
        out = SparseRationalMatrix(self.rows, other.cols)
        for j in range(other.cols):
            acc = {}
            for k, v in other.columns[j].items():
                for i, w in self.columns[k].items():
                    nv = acc.get(i, 0) + v * w
                    if nv:
                        acc[i] = nv
                    elif i in acc:
                        del acc[i]
            out.columns[j] = acc
        return out

    def transpose(self):
        out = SparseRationalMatrix(self.cols, self.rows)
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                out.columns[i][j] = v
        return out

    def _row_dicts(self):
        rows = [dict() for _ in range(self.rows)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                rows[i][j] = v
        return [r for r in rows if r]

    def rank(self, probe_primes=3, probe_seed=0):
        """Exact rank by fraction-free elimination, cross-checked mod primes."""
        int_rows = _int_rows(self._row_dicts())
        exact = _sparse_rank([dict(r) for r in int_rows])
        if probe_primes:
            for p in _random_primes(probe_primes, probe_seed):
                modular = _sparse_rank([dict(r) for r in int_rows], p)
                if modular > exact:
                    raise RankMismatch(
                        f"modular rank {modular} (p={p}) exceeds exact rank {exact}"
                    )
                # modular rank may only drop (bad prime); a drop is harmless
        return exact

    def rank_mod(self, p):
        int_rows = _int_rows(self._row_dicts())
        return _sparse_rank(int_rows, p)

    def permuted(self, row_perm=None, col_perm=None):
        """Matrix with rows/columns permuted; perm[i] = new position of i."""
        out = SparseRationalMatrix(self.rows, self.cols)
        for j, col in enumerate(self.columns):
            nj = col_perm[j] if col_perm else j
            for i, v in col.items():
                out.columns[nj][row_perm[i] if row_perm else i] = v
        return out


class RationalEchelon:
    """Incremental echelon form over Q for sparse vectors (dict col -> Fraction).

    Pivot of a row is its smallest column.  Pivot rows are kept as
    content-reduced integer rows (the inserted vectors are cleared of
    denominators first), so building the span never touches Fractions;
    reducing a rational vector against the span does exact Fraction steps.
    """

    def __init__(self):
        self.pivots = {}

    def _reduce_int(self, row):
        # eliminating the lead only introduces larger columns, so one
        # ascending heap pass reduces completely
        heap = sorted(row)
        heapify(heap)
        while heap:
            lead = heappop(heap)
            if lead not in row:
                continue
            piv = self.pivots.get(lead)
            if piv is None:
                return row
            a, b = piv[lead], row[lead]
            if a != 1:
                for c in list(row):
                    row[c] *= a
            for c, v in piv.items():
                nv = row.get(c, 0) - b * v
                if nv:
                    if c not in row and c > lead:
                        heappush(heap, c)
                    row[c] = nv
                elif c in row:
                    del row[c]
        return row

    def reduce(self, vec):
        """Fully reduce a rational vector; returns dict col -> value."""
        vec = {c: v for c, v in vec.items() if v}
        heap = sorted(vec)
        heapify(heap)
        while heap:
            hit = heappop(heap)
            if hit not in vec:
                continue
            piv = self.pivots.get(hit)
            if piv is None:
                continue
            f = Fraction(vec[hit], piv[hit]) if isinstance(vec[hit], int) else vec[hit] / piv[hit]
            for cc, v in piv.items():
                nv = vec.get(cc, 0) - f * v
                if nv:
                    if cc not in vec and cc > hit:
                        heappush(heap, cc)
                    vec[cc] = nv
                elif cc in vec:
                    del vec[cc]
        return vec

    def insert(self, vec):
        """Reduce and, if nonzero, add as a new pivot row. Returns True if added."""
        denom = 1
        for v in vec.values():
            if isinstance(v, Fraction) and v.denominator != 1:
                denom = denom * v.denominator // gcd(denom, v.denominator)
        row = {}
        for c, v in vec.items():
            iv = int(v * denom)
            if iv:
                row[c] = iv
        row = self._reduce_int(row)
        if not row:
            return False
        lead = min(row)
        if row[lead] < 0:
            row = {c: -v for c, v in row.items()}
        g = 0
        for v in row.values():
            g = gcd(g, abs(v))
            if g == 1:
                break
        if g > 1:
            row = {c: v // g for c, v in row.items()}
        self.pivots[lead] = row
        return True

    def contains(self, vec):
        return not self.reduce(vec)

    @property
    def rank(self):
        return len(self.pivots)

    def free_columns(self, dim):
        return [c for c in range(dim) if c not in self.pivots]


def solve_exact(columns, rhs, ncols):
    """Solve A x = rhs for sparse columns; returns (x dict) or certificate.

    `columns` is a list of dict(row -> Fraction) describing A's columns.
    On success returns ("solution", x) with x a dict col -> Fraction.
    On failure returns ("certificate", y) with y a dict row -> Fraction such
    that y.A = 0 and y.rhs != 0.
    """
    # augmented row echelon with tracked row operations
    rows = {}
    for j, col in enumerate(columns):
        for i, v in col.items():
            rows.setdefault(i, {})[j] = Fraction(v)
    all_rows = sorted(set(rows) | {i for i in rhs})
    work = []
    for i in all_rows:
        r = dict(rows.get(i, {}))
        b = Fraction(rhs.get(i, 0))
        cert = {i: Fraction(1)}
        work.append((r, b, cert))

    pivots = []  # (col, row, b, cert)
    for r, b, cert in work:
        r = dict(r)
        b = Fraction(b)
        cert = dict(cert)
        for col, pr, pb, pc in pivots:
            if col in r:
                f = r[col]
                for c, v in pr.items():
                    nv = r.get(c, Fraction(0)) - f * v
                    if nv:
                        r[c] = nv
                    elif c in r:
                        del r[c]
                b -= f * pb
                for c, v in pc.items():
                    nv = cert.get(c, Fraction(0)) - f * v
                    if nv:
                        cert[c] = nv
                    elif c in cert:
                        del cert[c]
        if r:
            lead = min(r)
            inv = 1 / r[lead]
            r = {c: v * inv for c, v in r.items()}
            b *= inv
            cert = {c: v * inv for c, v in cert.items()}
            pivots.append((lead, r, b, cert))
        elif b:
            inv = 1 / b
            return ("certificate", {c: v * inv for c, v in cert.items()})

    # back substitution
    x = {}
    for col, r, b, _ in reversed(pivots):
        val = b
        for c, v in r.items():
            if c != col and c in x:
                val -= v * x[c]
        if val:
            x[col] = val
    return ("solution", x)
