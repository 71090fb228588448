"""Exact linear algebra over the integers and over residue rings.

Everything here is exact: arbitrary-precision Python integers, no floating
point.  The two workhorses are

* ``smith_normal_form`` over the integers, with unimodular transforms, and
* canonical subgroup bases (Howell form) for subgroups of a finite abelian
  group of the shape ``Z/m_1 x ... x Z/m_n`` with prime-power ``m_j``.

The Howell form is an echelon form that, unlike a plain Hermite-style
echelon over ``Z/m``, also spans every suffix-zero element of the row span.
That property makes the basis canonical (two generating sets of the same
subgroup reduce to the identical basis) and makes membership sifting exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, lcm, prod
from typing import Iterable, Optional, Sequence

Vector = tuple[int, ...]


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Extended gcd: returns (g, s, t) with s*a + t*b = g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def modinv(a: int, m: int) -> int:
    g, s, _ = xgcd(a % m, m)
    if g != 1:
        raise ValueError(f"{a} is not invertible modulo {m}")
    return s % m


def lifted_unit(d: int, m: int) -> int:
    """A unit u modulo m with u*d == gcd(d, m) (mod m).

    Standard normalisation step for echelon forms over Z/m: every ideal of
    Z/m has a unique generator dividing m, and ``u`` rotates d onto it.
    """
    d %= m
    g = gcd(d, m)
    if g == m:
        return 1
    d1 = d // g
    m1 = m // g
    u = modinv(d1 % m1, m1) if m1 > 1 else 1
    while gcd(u, m) != 1:
        u += m1
    return u % m


def factor_prime_powers(n: int) -> list[int]:
    """Split n > 0 into its prime-power components, sorted ascending."""
    out = []
    d = 2
    n = abs(n)
    while d * d <= n:
        if n % d == 0:
            q = 1
            while n % d == 0:
                q *= d
                n //= d
            out.append(q)
        d += 1
    if n > 1:
        out.append(n)
    return sorted(out)


# ---------------------------------------------------------------------------
# Small dense integer matrices (tuples of row tuples)
# ---------------------------------------------------------------------------

Matrix = tuple[Vector, ...]


def mat_identity(d: int) -> Matrix:
    return tuple(tuple(1 if i == j else 0 for j in range(d)) for i in range(d))


def matmul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0])))
        for i in range(len(a))
    )


def matvec(a: Matrix, v: Sequence[int]) -> Vector:
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


def matpow(a: Matrix, e: int) -> Matrix:
    out = mat_identity(len(a))
    base = a
    while e:
        if e & 1:
            out = matmul(out, base)
        e >>= 1
        if e:
            base = matmul(base, base)
    return out


def mat_det(a: Matrix) -> int:
    d = len(a)
    if d == 0:
        return 1
    if d == 1:
        return a[0][0]
    out = 0
    for j in range(d):
        minor = tuple(row[:j] + row[j + 1 :] for row in a[1:])
        out += (-1) ** j * a[0][j] * mat_det(minor)
    return out


def mat_inverse_unimodular(a: Matrix) -> Matrix:
    """Exact inverse of an integer matrix with determinant +-1 (adjugate)."""
    d = len(a)
    det = mat_det(a)
    if det not in (1, -1):
        raise ValueError(f"matrix is not unimodular (det={det})")
    if d == 0:
        return ()
    adj = []
    for i in range(d):
        row = []
        for j in range(d):
            minor = tuple(
                tuple(a[r][c] for c in range(d) if c != i)
                for r in range(d)
                if r != j
            )
            row.append((-1) ** (i + j) * mat_det(minor) * det)
        adj.append(tuple(row))
    return tuple(adj)


# ---------------------------------------------------------------------------
# Smith normal form over Z
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SmithForm:
    """U @ A @ V = D with U, V unimodular and D diagonal, d1 | d2 | ..."""

    d: tuple[Vector, ...]
    u: tuple[Vector, ...]
    v: tuple[Vector, ...]

    @property
    def diagonal(self) -> tuple[int, ...]:
        n = min(len(self.d), len(self.d[0]) if self.d else 0)
        return tuple(self.d[i][i] for i in range(n))


def smith_normal_form(mat: Sequence[Sequence[int]]) -> SmithForm:
    """Smith normal form of an integer matrix with transform tracking."""
    m = len(mat)
    n = len(mat[0]) if m else 0
    a = [[int(x) for x in row] for row in mat]
    if any(len(row) != n for row in a):
        raise ValueError("matrix is not rectangular")
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_add(i, j, c):
        ai, aj = a[i], a[j]
        for k in range(n):
            ai[k] += c * aj[k]
        ui, uj = u[i], u[j]
        for k in range(m):
            ui[k] += c * uj[k]

    def col_add(i, j, c):
        for row in a:
            row[i] += c * row[j]
        for row in v:
            row[i] += c * row[j]

    def row_swap(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def row_neg(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    rank = min(m, n)
    while t < rank:
        # pivot: smallest nonzero magnitude in the trailing block
        piv = None
        best = None
        for i in range(t, m):
            row = a[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best):
                    best = abs(x)
                    piv = (i, j)
                    if best == 1:
                        break
            if best == 1:
                break
        if piv is None:
            break
        if piv[0] != t:
            row_swap(t, piv[0])
        if piv[1] != t:
            col_swap(t, piv[1])

        while True:
            # clear column t
            restart = False
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // a[t][t]
                    row_add(i, t, -q)
                    if a[i][t]:
                        row_swap(t, i)
                        restart = True
                        break
            if restart:
                continue
            # clear row t
            for j in range(t + 1, n):
                if a[t][j]:
                    q = a[t][j] // a[t][t]
                    col_add(j, t, -q)
                    if a[t][j]:
                        col_swap(t, j)
                        restart = True
                        break
            if restart:
                continue
            # pivot must divide the trailing block for the divisor chain
            offender = None
            for i in range(t + 1, m):
                row = a[i]
                for j in range(t + 1, n):
                    if row[j] % a[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_add(t, offender, 1)
        if a[t][t] < 0:
            row_neg(t)
        t += 1

    tup = lambda rows: tuple(tuple(r) for r in rows)
    return SmithForm(d=tup(a), u=tup(u), v=tup(v))


def integer_kernel(mat: Sequence[Sequence[int]], ncols: Optional[int] = None) -> list[Vector]:
    """Basis of {x in Z^n : mat @ x = 0}, via the Smith form."""
    m = len(mat)
    n = ncols if ncols is not None else (len(mat[0]) if m else 0)
    if m == 0:
        return [tuple(1 if i == j else 0 for j in range(n)) for i in range(n)]
    snf = smith_normal_form(mat)
    diag = snf.diagonal
    free = [j for j in range(n) if j >= len(diag) or diag[j] == 0]
    return [tuple(snf.v[i][j] for i in range(n)) for j in free]


def abelian_invariants_from_lattice(
    lattice_rows: Sequence[Sequence[int]], rank: int
) -> list[int]:
    """Invariants of Z^rank / <lattice_rows>, as sorted prime powers.

    The quotient must be finite; a zero invariant raises.
    """
    if rank == 0:
        return []
    if not lattice_rows:
        raise ValueError("quotient is infinite (empty relation lattice)")
    snf = smith_normal_form(lattice_rows)
    diag = list(snf.diagonal) + [0] * (rank - len(snf.diagonal))
    out: list[int] = []
    for d in diag[:rank]:
        if d == 0:
            raise ValueError("quotient is infinite")
        if d > 1:
            out.extend(factor_prime_powers(d))
    return sorted(out)


# ---------------------------------------------------------------------------
# Canonical subgroups of Z/m_1 x ... x Z/m_n  (Howell form)
# ---------------------------------------------------------------------------


def _howell(rows: list[list[int]], K: int, width: int) -> list[list[int]]:
    """Canonical Howell basis of the span of ``rows`` inside (Z/K)^width."""
    pool = []
    for r in rows:
        rr = [x % K for x in r]
        if any(rr):
            pool.append(rr)
    result: list[list[int]] = []
    pivots: list[tuple[int, int]] = []  # (column, pivot value)
    for c in range(width):
        here = [r for r in pool if r[c]]
        rest = [r for r in pool if not r[c]]
        if not here:
            pool = rest
            continue
        piv = here[0]
        for r in here[1:]:
            a, b = piv[c], r[c]
            g, s, t = xgcd(a, b)
            ag, bg = a // g, b // g
            new_piv = [(s * x + t * y) % K for x, y in zip(piv, r)]
            red = [(ag * y - bg * x) % K for x, y in zip(piv, r)]
            piv = new_piv
            if any(red):
                rest.append(red)
        unit = lifted_unit(piv[c], K)
        piv = [(unit * x) % K for x in piv]
        d = piv[c]  # now the canonical divisor-of-K generator
        ann = K // d
        extra = [(ann * x) % K for x in piv]
        if any(extra):
            rest.append(extra)
        result.append(piv)
        pivots.append((c, d))
        pool = rest
    # reduce entries above each pivot
    for k in range(len(result)):
        c, d = pivots[k]
        row_k = result[k]
        for i in range(k):
            q = result[i][c] // d
            if q:
                result[i] = [(x - q * y) % K for x, y in zip(result[i], row_k)]
    return result


class ResidueSubgroup:
    """A subgroup of Z/m_1 x ... x Z/m_n in canonical echelon form.

    The basis is the Howell form of any generating set, so two generating
    sets of the same subgroup produce bitwise-identical objects.  Moduli are
    expected to be prime powers (possibly of different primes), which is all
    the rest of the package needs; the algorithms themselves work for any
    positive moduli.
    """

    __slots__ = ("moduli", "basis", "_scaled", "_pivots", "_order")

    def __init__(self, moduli: Sequence[int], generators: Iterable[Sequence[int]]):
        moduli = tuple(int(m) for m in moduli)
        if any(m <= 0 for m in moduli):
            raise ValueError("moduli must be positive")
        n = len(moduli)
        K = lcm(*moduli) if moduli else 1
        scale = [K // m for m in moduli]
        scaled_gens = []
        for g in generators:
            g = list(g)
            if len(g) != n:
                raise ValueError(
                    f"generator length {len(g)} does not match ambient rank {n}"
                )
            scaled_gens.append([(x * s) % K for x, s in zip(g, scale)])
        rows = _howell(scaled_gens, K, n) if n else []
        self.moduli = moduli
        self._scaled = tuple(tuple(r) for r in rows)
        self._pivots = tuple(
            (next(j for j in range(n) if r[j]), r[next(j for j in range(n) if r[j])])
            for r in rows
        )
        basis = []
        for r in rows:
            basis.append(tuple(x // s if s else 0 for x, s in zip(r, scale)))
        self.basis = tuple(basis)
        order = 1
        for _, d in self._pivots:
            order *= K // d
        self._order = order

    # -- basic protocol ---------------------------------------------------

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ResidueSubgroup)
            and self.moduli == other.moduli
            and self._scaled == other._scaled
        )

    def __hash__(self):
        return hash((self.moduli, self._scaled))

    def __repr__(self):
        return f"ResidueSubgroup(moduli={self.moduli}, basis={self.basis}, order={self.order})"

    @property
    def order(self) -> int:
        return self._order

    @property
    def ambient_rank(self) -> int:
        return len(self.moduli)

    def _scale_vec(self, vec: Sequence[int]) -> list[int]:
        K = lcm(*self.moduli) if self.moduli else 1
        return [(int(x) * (K // m)) % K for x, m in zip(vec, self.moduli)]

    def reduce(self, vec: Sequence[int]) -> tuple[Vector, Vector]:
        """Sift ``vec`` through the basis; returns (residue, coefficients).

        ``vec`` is a member exactly when the residue is zero; the
        coefficients express the sifted-off part over ``basis``.
        """
        if len(vec) != len(self.moduli):
            raise ValueError("vector length does not match ambient rank")
        K = lcm(*self.moduli) if self.moduli else 1
        v = self._scale_vec(vec)
        coeffs = [0] * len(self._scaled)
        for k, (c, d) in enumerate(self._pivots):
            q, r = divmod(v[c], d)
            if r:
                continue  # not reducible at this pivot; residue stays nonzero
            if q:
                row = self._scaled[k]
                v = [(x - q * y) % K for x, y in zip(v, row)]
                coeffs[k] = q
        scale = [K // m for m in self.moduli]
        residue = tuple(
            (x // s) % m if x % s == 0 else -1
            for x, s, m in zip(v, scale, self.moduli)
        )
        # a residue coordinate of -1 cannot occur: scaled coords stay multiples
        return residue, tuple(coeffs)

    def contains(self, vec: Sequence[int]) -> bool:
        residue, _ = self.reduce(vec)
        return not any(residue)

    def coefficients(self, vec: Sequence[int]) -> Vector:
        residue, coeffs = self.reduce(vec)
        if any(residue):
            raise ValueError(f"{tuple(vec)} is not a member")
        return coeffs

    def issubgroup_of(self, other: "ResidueSubgroup") -> Optional[Vector]:
        """None if self <= other, else a witness basis vector outside."""
        for b in self.basis:
            if not other.contains(b):
                return b
        return None

    # -- lattice operations ------------------------------------------------

    def add(self, other: "ResidueSubgroup") -> "ResidueSubgroup":
        if self.moduli != other.moduli:
            raise ValueError("ambient mismatch")
        return ResidueSubgroup(self.moduli, self.basis + other.basis)

    def scaled(self, c: int) -> "ResidueSubgroup":
        return ResidueSubgroup(self.moduli, [[c * x for x in b] for b in self.basis])

    def intersection(self, other: "ResidueSubgroup") -> "ResidueSubgroup":
        if self.moduli != other.moduli:
            raise ValueError("ambient mismatch")
        n = len(self.moduli)
        ru, rv = len(self.basis), len(other.basis)
        # columns: self coefficients, other coefficients, modulus multiples
        cols = ru + rv + n
        rows = []
        for i in range(n):
            row = [self.basis[k][i] for k in range(ru)]
            row += [-other.basis[k][i] for k in range(rv)]
            row += [-(self.moduli[i]) if j == i else 0 for j in range(n)]
            rows.append(row)
        gens = []
        for ker in integer_kernel(rows, cols):
            vec = [
                sum(ker[k] * self.basis[k][i] for k in range(ru)) % self.moduli[i]
                for i in range(n)
            ]
            gens.append(vec)
        return ResidueSubgroup(self.moduli, gens)


def full_subgroup(moduli: Sequence[int]) -> ResidueSubgroup:
    n = len(moduli)
    gens = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    return ResidueSubgroup(moduli, gens)


def quotient_invariants(big: ResidueSubgroup, small: ResidueSubgroup) -> list[int]:
    """Abelian invariants of big/small as sorted prime powers.

    Raises with a witness vector when ``small`` is not contained in ``big``.
    """
    if big.moduli != small.moduli:
        raise ValueError("ambient mismatch")
    witness = small.issubgroup_of(big)
    if witness is not None:
        raise ValueError(f"not a subgroup: witness {witness}")
    s = len(big.basis)
    if s == 0:
        return []
    # relation lattice of Z^s -> big/small
    rows: list[list[int]] = []
    n = len(big.moduli)
    # relations within the ambient: c with sum c_i b_i == 0 (mod moduli)
    amb = []
    for i in range(n):
        row = [big.basis[k][i] for k in range(s)]
        row += [big.moduli[i] if j == i else 0 for j in range(n)]
        amb.append(row)
    for ker in integer_kernel(amb, s + n):
        rows.append(list(ker[:s]))
    # generators of the subgroup in big-coordinates
    for b in small.basis:
        rows.append(list(big.coefficients(b)))
    inv = abelian_invariants_from_lattice(rows, s)
    return inv


# ---------------------------------------------------------------------------
# Linear congruence systems
# ---------------------------------------------------------------------------


@dataclass
class ModularSolution:
    particular: Vector
    kernel: ResidueSubgroup


def kernel_mod(
    rows: Sequence[Sequence[int]],
    row_moduli: Sequence[int],
    col_moduli: Sequence[int],
) -> ResidueSubgroup:
    """All x in prod Z/col_moduli with rows @ x == 0 (mod row_moduli), rowwise.

    Solved by a Howell reduction of the syzygy matrix [A^T | I]; the rows
    whose equation part vanishes span the kernel exactly.
    """
    m = len(rows)
    n = len(col_moduli)
    if any(len(r) != n for r in rows):
        raise ValueError("coefficient row length mismatch")
    if len(row_moduli) != m:
        raise ValueError("row moduli length mismatch")
    mods = [int(x) for x in row_moduli] + [int(x) for x in col_moduli]
    F = lcm(*mods) if mods else 1
    syz = []
    for j in range(n):
        row = [(rows[i][j] * (F // row_moduli[i])) % F for i in range(m)]
        row += [1 if k == j else 0 for k in range(n)]
        syz.append(row)
    reduced = _howell(syz, F, m + n)
    gens = [r[m:] for r in reduced if not any(r[:m])]
    gens += [[col_moduli[j] if k == j else 0 for k in range(n)] for j in range(n)]
    return ResidueSubgroup(col_moduli, gens)


def solve_mod(
    rows: Sequence[Sequence[int]],
    rhs: Sequence[int],
    row_moduli: Sequence[int],
    col_moduli: Optional[Sequence[int]] = None,
) -> Optional[ModularSolution]:
    """Solve rows @ x == rhs (mod row_moduli); None when unsolvable.

    The solution set is returned as a particular vector plus the canonical
    kernel subgroup of prod Z/col_moduli (defaults to the row moduli, which
    is the common square case).
    """
    m = len(rows)
    if col_moduli is None:
        if m and len(rows[0]) != m:
            raise ValueError("col_moduli required for non-square systems")
        col_moduli = row_moduli
    n = len(col_moduli)
    if len(rhs) != m:
        raise ValueError("rhs length mismatch")
    # integer system [A | diag(row_moduli)] (x, y) = rhs
    aug = [list(rows[i]) + [row_moduli[i] if j == i else 0 for j in range(m)] for i in range(m)]
    snf = smith_normal_form(aug)
    ub = [sum(snf.u[i][k] * rhs[k] for k in range(m)) for i in range(m)]
    diag = snf.diagonal
    w = [0] * (n + m)
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d:
                return None
            w[i] = ub[i] // d
    z = [sum(snf.v[i][j] * w[j] for j in range(n + m)) for i in range(n + m)]
    particular = tuple(z[j] % col_moduli[j] for j in range(n))
    kernel = kernel_mod(rows, row_moduli, col_moduli)
    return ModularSolution(particular=particular, kernel=kernel)
