"""Polycyclic presentations with prime-power relative orders.

Elements are exponent vectors in normal form; multiplication is collection
from the left with exponent stacking, so single big generator powers merge
in one step instead of letter by letter.  On top of the collector sit the
standard consistency (overlap) checks, induced generating sequences for
subgroups, lower central series, quotients and abelian invariants of
sections.

Only finite presentations are handled: every relative order is a power of
one fixed prime, which is exactly the shape all catalog groups and their
quotients have.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .linalg import abelian_invariants_from_lattice, modinv

Vector = tuple[int, ...]
Word = Sequence[tuple[int, int]]


def _vp(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def canonical_relation_order(n: int) -> list[tuple]:
    """Relation indexing used everywhere: for each j, the power relation of
    g_j followed by the conjugation relations g_j^{g_h} for h < j ascending."""
    rels: list[tuple] = []
    for j in range(n):
        rels.append(("power", j))
        for h in range(j):
            rels.append(("conj", h, j))
    return rels


class PcPresentation:
    """Power-conjugate presentation data, immutable after construction.

    power_rhs[j] is the normal-form exponent vector of g_j^{orders[j]} with
    support strictly above j; conj_rhs[h][j] (h < j) is the vector of
    g_j^{g_h} with support strictly above h.
    """

    __slots__ = (
        "n",
        "orders",
        "prime",
        "power_rhs",
        "conj_rhs",
        "_conj_trivial",
        "_power_comm",
        "_conj_comm",
        "_identity",
    )

    def __init__(
        self,
        orders: Sequence[int],
        power_rhs: Sequence[Sequence[int]],
        conj_rhs,
    ):
        n = len(orders)
        self.n = n
        self.orders = tuple(int(o) for o in orders)
        primes = set()
        for o in self.orders:
            if o < 2:
                raise ValueError("relative orders must be at least 2")
            f = _smallest_prime_factor(o)
            q = o
            while q % f == 0:
                q //= f
            if q != 1:
                raise ValueError(f"relative order {o} is not a prime power")
            primes.add(f)
        if len(primes) > 1:
            raise ValueError(f"mixed primes in relative orders: {sorted(primes)}")
        self.prime = primes.pop() if primes else None

        if len(power_rhs) != n:
            raise ValueError("power_rhs must have one entry per generator")
        pw = []
        for j, vec in enumerate(power_rhs):
            vec = tuple(int(x) for x in vec)
            self._check_normal(vec, j, f"power relation of g{j + 1}")
            pw.append(vec)
        self.power_rhs = tuple(pw)

        conj = [[None] * n for _ in range(n)]
        for h in range(n):
            for j in range(h + 1, n):
                vec = conj_rhs[h][j] if not isinstance(conj_rhs, dict) else conj_rhs[(h, j)]
                vec = tuple(int(x) for x in vec)
                self._check_normal(vec, h, f"conjugate relation g{j + 1}^g{h + 1}")
                conj[h][j] = vec
        self.conj_rhs = tuple(tuple(row) for row in conj)

        unit = lambda j: tuple(1 if k == j else 0 for k in range(n))
        self._conj_trivial = tuple(
            tuple(
                (self.conj_rhs[h][j] == unit(j)) if h < j else True
                for j in range(n)
            )
            for h in range(n)
        )
        self._power_comm = tuple(self._word_commutes(v) for v in self.power_rhs)
        self._conj_comm = tuple(
            tuple(
                self._word_commutes(self.conj_rhs[h][j]) if h < j else True
                for j in range(n)
            )
            for h in range(n)
        )
        self._identity = tuple([0] * n)

    def _check_normal(self, vec: Vector, above: int, what: str) -> None:
        if len(vec) != self.n:
            raise ValueError(f"{what}: vector length {len(vec)} != {self.n}")
        for k, e in enumerate(vec):
            if e and k <= above:
                raise ValueError(f"{what}: entry at generator {k + 1} not allowed")
            if not 0 <= e < self.orders[k]:
                raise ValueError(f"{what}: exponent {e} out of range at generator {k + 1}")

    def _word_commutes(self, vec: Vector) -> bool:
        supp = [k for k, e in enumerate(vec) if e]
        for a in range(len(supp)):
            for b in range(a + 1, len(supp)):
                if self.conj_rhs[supp[a]][supp[b]] != tuple(
                    1 if k == supp[b] else 0 for k in range(self.n)
                ):
                    return False
        return True

    # -- collection ---------------------------------------------------------

    @property
    def identity(self) -> Vector:
        return self._identity

    def generator(self, j: int) -> Vector:
        return tuple(1 if k == j else 0 for k in range(self.n))

    def collect(self, word: Word) -> Vector:
        """Normal form of an arbitrary word of (generator, exponent) letters.

        Negative exponents are admitted only on generators with trivial
        power relation (then g^-e = g^(o-e)); anything else would need the
        group's own arithmetic before a presentation exists.
        """
        n = self.n
        orders = self.orders
        power_rhs = self.power_rhs
        conj_rhs = self.conj_rhs
        conj_trivial = self._conj_trivial
        x = [0] * n
        stack: list[tuple[int, int]] = []
        push = stack.append
        for g, e in reversed(list(word)):
            if not 0 <= g < n:
                raise ValueError(f"generator index {g} out of range")
            if e < 0:
                if any(power_rhs[g]):
                    raise ValueError(
                        f"negative exponent on generator {g + 1} with nontrivial power relation"
                    )
                e %= orders[g]
            if e:
                push((g, e))
        while stack:
            g, e = stack.pop()
            top = -1
            for k in range(n - 1, g, -1):
                if x[k]:
                    top = k
                    break
            if top < 0 or all(conj_trivial[g][k] for k in range(g + 1, n) if x[k]):
                f = x[g] + e
                if f < orders[g]:
                    x[g] = f
                    continue
                q, s = divmod(f, orders[g])
                pw = power_rhs[g]
                if not any(pw):
                    x[g] = s
                    continue
                tail = [(k, x[k]) for k in range(g + 1, n) if x[k]]
                for k, _ in tail:
                    x[k] = 0
                x[g] = s
                for item in reversed(tail):
                    push(item)
                if q == 1 or self._power_comm[g]:
                    for k in range(n - 1, g, -1):
                        if pw[k]:
                            push((k, pw[k] * q))
                else:
                    seg = [(k, pw[k]) for k in range(n) if pw[k]]
                    for _ in range(q):
                        for item in reversed(seg):
                            push(item)
                continue
            # peel one copy of g past the block above it
            tail = [(k, x[k]) for k in range(g + 1, n) if x[k]]
            for k, _ in tail:
                x[k] = 0
            items: list[tuple[int, int]] = []
            f = x[g] + 1
            if f < orders[g]:
                x[g] = f
            else:
                x[g] = 0
                pw = power_rhs[g]
                if any(pw):
                    items.extend((k, pw[k]) for k in range(n) if pw[k])
            for k, c in tail:
                if conj_trivial[g][k]:
                    items.append((k, c))
                else:
                    w = conj_rhs[g][k]
                    if c == 1:
                        items.extend((kk, w[kk]) for kk in range(n) if w[kk])
                    elif self._conj_comm[g][k]:
                        items.extend((kk, w[kk] * c) for kk in range(n) if w[kk])
                    else:
                        seg = [(kk, w[kk]) for kk in range(n) if w[kk]]
                        for _ in range(c):
                            items.extend(seg)
            if e > 1:
                items.append((g, e - 1))
            for item in reversed(items):
                push(item)
        return tuple(x)


def _smallest_prime_factor(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


# ---------------------------------------------------------------------------
# Group handle
# ---------------------------------------------------------------------------


@dataclass
class ConsistencyViolation:
    kind: str
    indices: tuple[int, ...]
    lhs: Vector
    rhs: Vector

    def __str__(self):
        idx = ",".join(str(i + 1) for i in self.indices)
        return f"{self.kind} overlap ({idx}): {self.lhs} != {self.rhs}"


class PcGroup:
    """A finite p-group given by a pc presentation, with cached invariants.

    The handle is immutable apart from internal memoisation; distinct
    handles can be used concurrently.
    """

    def __init__(self, pres: PcPresentation, check: bool = False):
        self.pres = pres
        self._violations: Optional[list[ConsistencyViolation]] = None
        self._lcs: Optional[list["Igs"]] = None
        self._full: Optional["Igs"] = None
        if check:
            v = self.consistency_violations()
            if v:
                raise ValueError(f"inconsistent presentation: {v[0]}")

    # -- arithmetic ---------------------------------------------------------

    @property
    def n(self) -> int:
        return self.pres.n

    @property
    def prime(self) -> Optional[int]:
        return self.pres.prime

    @property
    def identity(self) -> Vector:
        return self.pres.identity

    @property
    def order(self) -> int:
        out = 1
        for o in self.pres.orders:
            out *= o
        return out

    def generators(self) -> list[Vector]:
        return [self.pres.generator(j) for j in range(self.n)]

    def letters(self, x: Vector) -> list[tuple[int, int]]:
        return [(k, e) for k, e in enumerate(x) if e]

    def mult(self, a: Vector, b: Vector) -> Vector:
        return self.pres.collect(self.letters(a) + self.letters(b))

    def power(self, a: Vector, e: int) -> Vector:
        if e < 0:
            return self.power(self.inverse(a), -e)
        out = self.identity
        base = a
        while e:
            if e & 1:
                out = self.mult(out, base)
            e >>= 1
            if e:
                base = self.mult(base, base)
        return out

    def element_order(self, a: Vector) -> int:
        p = self.prime
        if a == self.identity:
            return 1
        ord_ = 1
        x = a
        while x != self.identity:
            x = self.power(x, p)
            ord_ *= p
        return ord_

    def inverse(self, a: Vector) -> Vector:
        if a == self.identity:
            return a
        return self.power(a, self.element_order(a) - 1)

    def conj(self, a: Vector, b: Vector) -> Vector:
        return self.mult(self.mult(self.inverse(b), a), b)

    def comm(self, a: Vector, b: Vector) -> Vector:
        return self.mult(
            self.mult(self.inverse(a), self.inverse(b)), self.mult(a, b)
        )

    # -- consistency ----------------------------------------------------------

    def consistency_violations(self) -> list[ConsistencyViolation]:
        if self._violations is not None:
            return self._violations
        viols: list[ConsistencyViolation] = []
        n = self.n
        orders = self.pres.orders
        collect = self.pres.collect
        gen = self.pres.generator
        mult = self.mult

        def record(kind, indices, lhs, rhs):
            if lhs != rhs:
                viols.append(ConsistencyViolation(kind, indices, lhs, rhs))

        for i in range(n):
            for j in range(i + 1, n):
                for k in range(j + 1, n):
                    lhs = mult(gen(k), mult(gen(j), gen(i)))
                    rhs = mult(mult(gen(k), gen(j)), gen(i))
                    record("associativity", (k, j, i), lhs, rhs)
        for i in range(n):
            for j in range(i + 1, n):
                lhs = mult(collect([(j, orders[j])]), gen(i))
                rhs = mult(collect([(j, orders[j] - 1)]), mult(gen(j), gen(i)))
                record("power-left", (j, i), lhs, rhs)
                lhs = mult(gen(j), collect([(i, orders[i])]))
                rhs = mult(mult(gen(j), gen(i)), collect([(i, orders[i] - 1)]))
                record("power-right", (j, i), lhs, rhs)
        for j in range(n):
            lhs = mult(collect([(j, orders[j])]), gen(j))
            rhs = mult(gen(j), collect([(j, orders[j])]))
            record("power-self", (j,), lhs, rhs)
        self._violations = viols
        return viols

    @property
    def is_consistent(self) -> bool:
        return not self.consistency_violations()

    def closure_cross_check(self, bound: int = 4096, triples: int = 2048) -> bool:
        """Brute-force sanity check for small presentations.

        Builds the closure of the generators under collected multiplication
        and samples associativity; a consistent presentation has closure
        size equal to the product of the relative orders and an associative
        product.
        """
        if self.order > bound:
            raise ValueError(f"order {self.order} exceeds cross-check bound {bound}")
        seen = {self.identity}
        frontier = [self.identity]
        gens = self.generators()
        while frontier:
            x = frontier.pop()
            for g in gens:
                y = self.mult(x, g)
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        if len(seen) != self.order:
            return False
        elems = sorted(seen)
        count = 0
        for a in elems:
            for b in elems:
                for c in elems:
                    if self.mult(self.mult(a, b), c) != self.mult(a, self.mult(b, c)):
                        return False
                    count += 1
                    if count >= triples:
                        return True
        return True

    # -- element enumeration --------------------------------------------------

    def elements(self) -> Iterable[Vector]:
        return itertools.product(*[range(o) for o in self.pres.orders])

    def order_histogram(self, bound: int) -> Counter:
        """Histogram of element orders; refuses above the enumeration bound."""
        if self.order > bound:
            raise ValueError(
                f"group order {self.order} exceeds enumeration bound {bound}"
            )
        p = self.prime
        memo: dict[Vector, int] = {self.identity: 1}
        for vec in self.elements():
            chain = []
            x = vec
            while x not in memo:
                chain.append(x)
                x = self.power(x, p)
            base = memo[x]
            for i, y in enumerate(reversed(chain), 1):
                memo[y] = base * p**i
        return Counter(memo.values())

    # -- subgroups ------------------------------------------------------------

    def subgroup(self, gens: Iterable[Vector]) -> "Igs":
        igs = Igs(self)
        igs.extend(gens)
        igs.close()
        return igs

    def normal_closure(self, gens: Iterable[Vector]) -> "Igs":
        igs = self.subgroup(gens)
        gen_elems = self.generators()
        changed = True
        while changed:
            changed = False
            for u in list(igs.rows.values()):
                for g in gen_elems:
                    c = self.conj(u, g)
                    if igs.add(c):
                        changed = True
            if changed:
                igs.close()
        return igs

    def full_igs(self) -> "Igs":
        if self._full is None:
            igs = self.subgroup(self.generators())
            if igs.order != self.order:
                raise ValueError(
                    "generators do not span the declared order; presentation inconsistent?"
                )
            self._full = igs
        return self._full

    def lower_central_series(self) -> list["Igs"]:
        if self._lcs is not None:
            return self._lcs
        series = [self.full_igs()]
        gens = self.generators()
        while series[-1].order > 1:
            cur = series[-1]
            comms = []
            for u in cur.rows.values():
                for g in gens:
                    c = self.comm(u, g)
                    if c != self.identity:
                        comms.append(c)
            nxt = self.normal_closure(comms) if comms else self.subgroup([])
            if nxt.order >= cur.order:
                raise ValueError("lower central series does not descend; not nilpotent")
            series.append(nxt)
        self._lcs = series
        return series

    @property
    def nilpotency_class(self) -> int:
        return len(self.lower_central_series()) - 1

    @property
    def coclass(self) -> int:
        n_exp = _vp(self.order, self.prime) if self.order > 1 else 0
        return n_exp - self.nilpotency_class

    def lcs_term(self, i: int) -> "Igs":
        """gamma_i(G) with gamma_1 = G; terms past the series length are trivial."""
        series = self.lower_central_series()
        if i < 1:
            raise ValueError("lower central series starts at 1")
        if i <= len(series):
            return series[i - 1]
        return series[-1]

    # -- quotients and sections -------------------------------------------------

    def quotient(self, nsub: "Igs") -> "QuotientMap":
        if nsub.group is not self:
            raise ValueError("subgroup belongs to a different group")
        for u in nsub.rows.values():
            for g in self.generators():
                if not nsub.contains(self.conj(u, g)):
                    raise ValueError(f"subgroup is not normal: conjugate of {u} escapes")
        p = self.prime
        orders = self.pres.orders
        n = self.n
        lead_val = {}
        for k, row in nsub.rows.items():
            lead_val[k] = _vp(row[k], p)
        kept = []
        new_orders = []
        for j in range(n):
            v = lead_val.get(j, _vp(orders[j], p))
            if v > 0:
                kept.append(j)
                new_orders.append(p**v)
        newindex = {j: i for i, j in enumerate(kept)}

        def project(x: Vector) -> Vector:
            rep = nsub.coset_representative(x)
            return tuple(rep[j] for j in kept)

        m = len(kept)
        power_rhs = []
        conj_rhs = [[None] * m for _ in range(m)]
        for i, j in enumerate(kept):
            z = self.power(self.pres.generator(j), new_orders[i])
            rep = nsub.coset_representative(z)
            vec = [0] * m
            for k in kept:
                if rep[k]:
                    vec[newindex[k]] = rep[k]
            power_rhs.append(vec)
            for hi, h in enumerate(kept[:i]):
                z = self.conj(self.pres.generator(j), self.pres.generator(h))
                rep = nsub.coset_representative(z)
                vec = [0] * m
                for k in kept:
                    if rep[k]:
                        vec[newindex[k]] = rep[k]
                conj_rhs[hi][i] = vec
        pres = PcPresentation(new_orders, power_rhs, conj_rhs)
        return QuotientMap(group=PcGroup(pres), kept=tuple(kept), project=project)

    def section_invariants(self, top: "Igs", bottom: Optional["Igs"] = None) -> list[int]:
        """Abelian invariants of top/bottom; the section must be abelian."""
        p = self.prime
        rows = top.ordered_rows()
        s = len(rows)
        if s == 0:
            return []
        lattice: list[list[int]] = []
        for idx, u in enumerate(rows):
            k = next(i for i, e in enumerate(u) if e)
            rel_ord = self.pres.orders[k] // (p ** _vp(u[k], p))
            z = self.power(u, rel_ord)
            coeffs = top.coefficients(z)
            row = [-c for c in coeffs]
            row[idx] += rel_ord
            lattice.append(row)
        for a in range(s):
            for b in range(a + 1, s):
                c = self.comm(rows[a], rows[b])
                if bottom is None:
                    if c != self.identity:
                        raise ValueError(f"section is not abelian: [{rows[a]}, {rows[b]}] != 1")
                elif not bottom.contains(c):
                    raise ValueError("section is not abelian modulo the bottom subgroup")
                if c != self.identity:
                    lattice.append(list(top.coefficients(c)))
        if bottom is not None:
            for u in bottom.ordered_rows():
                lattice.append(list(top.coefficients(u)))
        return abelian_invariants_from_lattice(lattice, s)

    def abelian_invariants(self) -> list[int]:
        g2 = self.lcs_term(2)
        return self.section_invariants(self.full_igs(), g2)


@dataclass
class QuotientMap:
    group: PcGroup
    kept: tuple[int, ...]
    project: object  # callable Vector -> Vector


# ---------------------------------------------------------------------------
# Induced generating sequences
# ---------------------------------------------------------------------------


class Igs:
    """Echelonised generating sequence of a subgroup.

    rows maps a leading generator index to an element whose leading exponent
    is an exact power of p; sifting against the rows decides membership.
    """

    def __init__(self, group: PcGroup):
        self.group = group
        self.rows: dict[int, Vector] = {}

    def __repr__(self):
        return f"Igs(order={self.order}, rows={sorted(self.rows.values())})"

    @property
    def order(self) -> int:
        p = self.group.prime
        out = 1
        for k, row in self.rows.items():
            out *= self.group.pres.orders[k] // (p ** _vp(row[k], p))
        return out

    def ordered_rows(self) -> list[Vector]:
        return [self.rows[k] for k in sorted(self.rows)]

    def _normalize(self, x: Vector) -> Vector:
        g = self.group
        p = g.prime
        k = next(i for i, e in enumerate(x) if e)
        a = x[k]
        v = _vp(a, p)
        unit = a // p**v
        m = g.pres.orders[k] // p**v
        if unit % m == 1 % m:
            return x
        c = modinv(unit % m, m)
        return g.power(x, c)

    def add(self, x: Vector) -> bool:
        """Sift x in, extending the sequence; True if the span grew/changed."""
        g = self.group
        p = g.prime
        changed = False
        while x != g.identity:
            k = next(i for i, e in enumerate(x) if e)
            row = self.rows.get(k)
            v = _vp(x[k], p)
            if row is None:
                self.rows[k] = self._normalize(x)
                return True
            vr = _vp(row[k], p)
            if v >= vr:
                c = x[k] // (p**vr)
                x = g.mult(g.inverse(g.power(row, c)), x)
            else:
                self.rows[k] = self._normalize(x)
                x = row
                changed = True
        return changed

    def extend(self, gens: Iterable[Vector]) -> None:
        for x in gens:
            self.add(x)

    def close(self) -> None:
        """Close the span under multiplication (hence as a subgroup)."""
        g = self.group
        changed = True
        while changed:
            changed = False
            items = self.ordered_rows()
            for a in items:
                for b in items:
                    if self.add(g.mult(a, b)):
                        changed = True
                        break
                if changed:
                    break

    def sift(self, x: Vector) -> Vector:
        g = self.group
        p = g.prime
        while x != g.identity:
            k = next(i for i, e in enumerate(x) if e)
            row = self.rows.get(k)
            if row is None:
                return x
            vr = _vp(row[k], p)
            if _vp(x[k], p) < vr:
                return x
            c = x[k] // (p**vr)
            x = g.mult(g.inverse(g.power(row, c)), x)
        return x

    def contains(self, x: Vector) -> bool:
        return self.sift(x) == self.group.identity

    def coefficients(self, x: Vector) -> tuple[int, ...]:
        """Exponents over ordered_rows() with x = prod rows^coeffs; x must be a member."""
        g = self.group
        p = g.prime
        order = sorted(self.rows)
        pos = {k: i for i, k in enumerate(order)}
        coeffs = [0] * len(order)
        while x != g.identity:
            k = next(i for i, e in enumerate(x) if e)
            row = self.rows.get(k)
            if row is None:
                raise ValueError(f"{x} is not a member")
            vr = _vp(row[k], p)
            if _vp(x[k], p) < vr:
                raise ValueError(f"{x} is not a member")
            c = x[k] // (p**vr)
            coeffs[pos[k]] = c
            x = g.mult(g.inverse(g.power(row, c)), x)
        return tuple(coeffs)

    def coset_representative(self, x: Vector) -> Vector:
        """Canonical representative of x modulo this (normal) subgroup."""
        g = self.group
        p = g.prime
        for k in sorted(self.rows):
            row = self.rows[k]
            vr = _vp(row[k], p)
            c = x[k] // (p**vr)
            if c:
                x = g.mult(g.inverse(g.power(row, c)), x)
        return x
