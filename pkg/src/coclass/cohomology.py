"""Second cohomology of a finite p-group acting on a finite abelian module.

The computation follows the tails formalism: an extension of the module A by
a pc-presented group R assigns to every R-relation a module element (its
tail).  Running the standard consistency overlaps of the extension
presentation with symbolic tails produces a homogeneous linear system; its
solution subgroup of A^m represents the cocycles, and the image of the
generator-shift map A^n -> A^m represents the coboundaries.  H^2(R, A) is
the quotient, realised here through canonical residue subgroups.

A single symbolic run per (R, action) serves every module in the family
A_i = (Z/p^(e/d+i))^d: the overlap equations have integer coefficients that
do not depend on the exponent, so only the solving modulus changes with i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .linalg import (
    Matrix,
    ResidueSubgroup,
    Vector,
    integer_kernel,
    kernel_mod,
    mat_identity,
    matmul,
    matpow,
    matvec,
    modinv,
    quotient_invariants,
)
from .pcgroup import PcGroup, PcPresentation, canonical_relation_order


class ActionError(ValueError):
    """The module data does not define an action of the given group."""


# ---------------------------------------------------------------------------
# Modules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModuleSpec:
    """Finite abelian module with a generator action.

    ``exponents`` are per-coordinate prime powers; ``action[h]`` is the
    integer matrix of the h-th group generator, whose column c is the
    exponent vector of the image of the c-th module generator.
    """

    exponents: tuple[int, ...]
    action: tuple[Matrix, ...]

    @property
    def rank(self) -> int:
        return len(self.exponents)

    @property
    def order(self) -> int:
        out = 1
        for e in self.exponents:
            out *= e
        return out

    @property
    def prime(self) -> int:
        e = self.exponents[0]
        d = 2
        while e % d:
            d += 1
        return d

    def reduce(self, vec: Sequence[int]) -> Vector:
        return tuple(int(x) % m for x, m in zip(vec, self.exponents))

    def scaled_down(self, c: int) -> "ModuleSpec":
        """The submodule p^c * A in its own coordinates (b = p^c y <-> y)."""
        p = self.prime
        if any(e % p**c for e in self.exponents):
            raise ValueError(f"p^{c} does not divide every exponent")
        return ModuleSpec(
            exponents=tuple(e // p**c for e in self.exponents), action=self.action
        )


def word_matrix(module: ModuleSpec, letters: Sequence[tuple[int, int]]) -> Matrix:
    """Action matrix of a group word; conjugating by ab applies a then b."""
    out = mat_identity(module.rank)
    for g, e in letters:
        out = matmul(matpow(module.action[g], e), out)
    return out


def validate_action(rpres: PcPresentation, module: ModuleSpec) -> None:
    """Check that the action respects every relation of the presentation.

    Matrices are compared modulo the module exponents rowwise; column
    divisibility for mixed exponents is enforced as well.
    """
    d = module.rank
    exps = module.exponents
    p = module.prime
    if len(module.action) != rpres.n:
        raise ActionError("one action matrix per group generator is required")

    def congruent(a: Matrix, b: Matrix) -> bool:
        return all(
            (a[r][c] - b[r][c]) % exps[r] == 0 for r in range(d) for c in range(d)
        )

    for h, mat in enumerate(module.action):
        if len(mat) != d or any(len(row) != d for row in mat):
            raise ActionError(f"action matrix of generator {h + 1} is not {d}x{d}")
        det = _det_mod_p(mat, p)
        if det % p == 0:
            raise ActionError(f"action of generator {h + 1} is singular modulo {p}")
        for r in range(d):
            for c in range(d):
                if (mat[r][c] * exps[c]) % exps[r]:
                    raise ActionError(
                        f"action of generator {h + 1} is incompatible with the"
                        f" exponents at entry ({r + 1},{c + 1})"
                    )
    letters = lambda vec: [(k, e) for k, e in enumerate(vec) if e]
    for j in range(rpres.n):
        lhs = matpow(module.action[j], rpres.orders[j])
        rhs = word_matrix(module, letters(rpres.power_rhs[j]))
        if not congruent(lhs, rhs):
            raise ActionError(f"action violates the power relation of g{j + 1}")
        for h in range(j):
            lhs = matmul(module.action[h], module.action[j])
            rhs = matmul(
                word_matrix(module, letters(rpres.conj_rhs[h][j])), module.action[h]
            )
            if not congruent(lhs, rhs):
                raise ActionError(f"action violates the relation g{j + 1}^g{h + 1}")


def _det_mod_p(mat: Matrix, p: int) -> int:
    d = len(mat)
    a = [[x % p for x in row] for row in mat]
    det = 1
    for c in range(d):
        piv = next((r for r in range(c, d) if a[r][c] % p), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = (det * a[c][c]) % p
        inv = modinv(a[c][c], p)
        for r in range(c + 1, d):
            f = (a[r][c] * inv) % p
            if f:
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[c])]
    return det % p


# ---------------------------------------------------------------------------
# Tails: concrete vectors and symbolic linear expressions
# ---------------------------------------------------------------------------


class VectorTails:
    """Concrete module-element tails, reduced modulo the exponents."""

    def __init__(self, exponents: Sequence[int]):
        self.exponents = tuple(exponents)
        self.zero = tuple([0] * len(self.exponents))

    def is_zero(self, t) -> bool:
        return not any(t)

    def add(self, a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, self.exponents))

    def scale(self, c, a):
        return tuple((c * x) % m for x, m in zip(a, self.exponents))

    def act(self, mat, a):
        return tuple(
            sum(mat[r][k] * a[k] for k in range(len(a))) % self.exponents[r]
            for r in range(len(a))
        )


class LinearTails:
    """Symbolic tails: integer-matrix combinations of symbol vectors.

    A value maps a symbol index to the d x d coefficient matrix applied to
    that symbol; absent symbols have zero coefficient.  No modular reduction
    happens here, so one symbolic run serves every exponent.
    """

    def __init__(self, d: int):
        self.d = d
        self.zero: dict[int, Matrix] = {}

    def symbol(self, idx: int):
        return {idx: mat_identity(self.d)}

    def is_zero(self, t) -> bool:
        return not t

    def add(self, a, b):
        if not a:
            return b
        if not b:
            return a
        out = dict(a)
        for k, m in b.items():
            if k in out:
                s = tuple(
                    tuple(x + y for x, y in zip(r1, r2)) for r1, r2 in zip(out[k], m)
                )
                if any(any(row) for row in s):
                    out[k] = s
                else:
                    del out[k]
            else:
                out[k] = m
        return out

    def neg(self, a):
        return {k: tuple(tuple(-x for x in row) for row in m) for k, m in a.items()}

    def scale(self, c, a):
        if c == 0:
            return {}
        return {k: tuple(tuple(c * x for x in row) for row in m) for k, m in a.items()}

    def act(self, mat, a):
        return {k: matmul(mat, m) for k, m in a.items()}


class TailCollector:
    """Collection in an extension presentation with per-relation tails.

    The group part follows the pc collector; module content is carried as a
    tail value that action matrices push through generator letters.  Items
    are ('g', index, exponent) letters and ('t', tail) blocks.
    """

    def __init__(self, rpres: PcPresentation, mats: Sequence[Matrix], rel_tails, ops):
        self.rpres = rpres
        self.mats = tuple(mats)
        self.rel_tails = list(rel_tails)
        self.ops = ops
        self._powers: list[list[Matrix]] = []
        d = len(mats[0]) if mats else 0
        for j, m in enumerate(self.mats):
            pows = [mat_identity(d)]
            for _ in range(rpres.orders[j]):
                pows.append(matmul(m, pows[-1]))
            self._powers.append(pows)
        self._ridx: dict[tuple, int] = {
            rel: i for i, rel in enumerate(canonical_relation_order(rpres.n))
        }

    def power_tail(self, j: int):
        return self.rel_tails[self._ridx[("power", j)]]

    def conj_tail(self, h: int, j: int):
        return self.rel_tails[self._ridx[("conj", h, j)]]

    def collect(self, items):
        rp = self.rpres
        n = rp.n
        orders = rp.orders
        ops = self.ops
        x = [0] * n
        T = ops.zero
        stack = list(reversed(list(items)))
        while stack:
            it = stack.pop()
            if it[0] == "t":
                T = ops.add(T, it[1])
                continue
            _, j, e = it
            if e == 0:
                continue
            Tm = T if ops.is_zero(T) else ops.act(self._powers[j][e], T)
            residual: list = []
            if not any(x[k] for k in range(j + 1, n)):
                f = x[j] + e
                q, s = divmod(f, orders[j])
                x[j] = s
                if q:
                    w = rp.power_rhs[j]
                    tau = self.power_tail(j)
                    if not any(w):
                        residual.append(("t", ops.scale(q, tau)))
                    else:
                        unit = [("g", k, w[k]) for k in range(n) if w[k]]
                        unit.append(("t", tau))
                        residual.extend(unit * q)
            else:
                # peel one copy of g_j past the block above it
                above = [(k, x[k]) for k in range(j + 1, n) if x[k]]
                for k, _ in above:
                    x[k] = 0
                f = x[j] + 1
                q, s = divmod(f, orders[j])
                x[j] = s
                if q:
                    w = rp.power_rhs[j]
                    tau = self.power_tail(j)
                    if any(w):
                        residual.extend(("g", k, w[k]) for k in range(n) if w[k])
                    residual.append(("t", tau))
                for k, c in above:
                    w = rp.conj_rhs[j][k]
                    tau = self.conj_tail(j, k)
                    unit = [("g", kk, w[kk]) for kk in range(n) if w[kk]]
                    unit.append(("t", tau))
                    residual.extend(unit * c)
                if e > 1:
                    residual.append(("g", j, e - 1))
            if residual:
                residual.append(("t", Tm))
                T = ops.zero
                stack.extend(reversed(residual))
            else:
                T = Tm
        return tuple(x), T

    def element(self, j: int):
        return self.collect([("g", j, 1)])

    def mult(self, a, b):
        items = [("g", k, e) for k, e in enumerate(a[0]) if e]
        items.append(("t", a[1]))
        items.extend(("g", k, e) for k, e in enumerate(b[0]) if e)
        items.append(("t", b[1]))
        return self.collect(items)


# ---------------------------------------------------------------------------
# The cocycle and coboundary systems
# ---------------------------------------------------------------------------


def relation_count(n: int) -> int:
    return n + n * (n - 1) // 2


def consistency_rows(rpres: PcPresentation, action: Sequence[Matrix], d: int):
    """Overlap equations on symbolic tails.

    Returns a list of (coordinate, row) pairs; ``row`` has one integer entry
    per tail coordinate (relation-major layout) and must vanish modulo the
    module exponent of ``coordinate``.
    """
    n = rpres.n
    m = relation_count(n)
    ops = LinearTails(d)
    tails = [ops.symbol(i) for i in range(m)]
    col = TailCollector(rpres, action, tails, ops)

    rows: list[tuple[int, Vector]] = []
    seen = set()

    def eq(lhs, rhs, what):
        if lhs[0] != rhs[0]:
            raise ValueError(f"base presentation is inconsistent at {what}")
        diff = ops.add(lhs[1], ops.neg(rhs[1]))
        for r in range(d):
            row = [0] * (m * d)
            nonzero = False
            for sym, mat in diff.items():
                for c in range(d):
                    if mat[r][c]:
                        row[sym * d + c] = mat[r][c]
                        nonzero = True
            if nonzero:
                key = (r, tuple(row))
                if key not in seen:
                    seen.add(key)
                    rows.append((r, tuple(row)))

    gen = col.element
    mult = col.mult
    orders = rpres.orders
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                eq(
                    mult(gen(k), mult(gen(j), gen(i))),
                    mult(mult(gen(k), gen(j)), gen(i)),
                    (k, j, i),
                )
    for i in range(n):
        for j in range(i + 1, n):
            eq(
                mult(col.collect([("g", j, orders[j])]), gen(i)),
                mult(col.collect([("g", j, orders[j] - 1)]), mult(gen(j), gen(i))),
                ("pl", j, i),
            )
            eq(
                mult(gen(j), col.collect([("g", i, orders[i])])),
                mult(mult(gen(j), gen(i)), col.collect([("g", i, orders[i] - 1)])),
                ("pr", j, i),
            )
    for j in range(n):
        eq(
            mult(col.collect([("g", j, orders[j])]), gen(j)),
            mult(gen(j), col.collect([("g", j, orders[j])])),
            ("ps", j),
        )
    return rows


def coboundary_generators(rpres: PcPresentation, action: Sequence[Matrix], d: int):
    """Tail changes induced by shifting each generator representative.

    Returns one integer vector in the tail ambient per (generator, module
    coordinate); these generate the coboundary subgroup once reduced.
    """
    n = rpres.n
    m = relation_count(n)
    ops = LinearTails(d)
    zero_tails = [ops.zero] * m
    col = TailCollector(rpres, action, zero_tails, ops)

    def decorated(j: int, e: int):
        return [("g", j, 1), ("t", ops.symbol(j))] * e

    deltas: list[dict] = []
    for rel in canonical_relation_order(n):
        if rel[0] == "power":
            j = rel[1]
            lhs = col.collect(decorated(j, rpres.orders[j]))
            rhs_items = []
            for k, e in enumerate(rpres.power_rhs[j]):
                if e:
                    rhs_items.extend(decorated(k, e))
            rhs = col.collect(rhs_items)
        else:
            _, h, j = rel
            lhs = col.collect(decorated(j, 1) + decorated(h, 1))
            rhs_items = decorated(h, 1)
            for k, e in enumerate(rpres.conj_rhs[h][j]):
                if e:
                    rhs_items.extend(decorated(k, e))
            rhs = col.collect(rhs_items)
        if lhs[0] != rhs[0]:
            raise ValueError(f"base presentation is inconsistent at relation {rel}")
        deltas.append(ops.add(lhs[1], ops.neg(rhs[1])))

    gens = []
    for h in range(n):
        for c in range(d):
            vec = [0] * (m * d)
            for ridx, delta in enumerate(deltas):
                mat = delta.get(h)
                if mat:
                    for r in range(d):
                        if mat[r][c]:
                            vec[ridx * d + r] = mat[r][c]
            gens.append(tuple(vec))
    return gens


@dataclass
class H2Structure:
    """Cocycles and coboundaries of H^2(R, A) in tail coordinates.

    The ambient group is A^m with relation-major layout: the tail of the
    j-th relation (canonical ordering) occupies coordinates j*d .. j*d+d-1.
    """

    rpres: PcPresentation
    module: ModuleSpec
    cocycles: ResidueSubgroup
    coboundaries: ResidueSubgroup
    rows: list  # integer overlap equations, (coordinate, row) pairs

    @property
    def relation_count(self) -> int:
        return relation_count(self.rpres.n)

    @property
    def ambient_moduli(self) -> tuple[int, ...]:
        return self.module.exponents * self.relation_count

    def invariants(self) -> list[int]:
        return quotient_invariants(self.cocycles, self.coboundaries)

    def order(self) -> int:
        return self.cocycles.order // self.coboundaries.order

    def class_of(self, tails: Sequence[int]) -> "CocycleClass":
        return CocycleClass(self, self.reduce_tails(tails))

    def reduce_tails(self, tails: Sequence[int]) -> Vector:
        mods = self.ambient_moduli
        if len(tails) != len(mods):
            raise ValueError("tail vector length does not match the ambient")
        return tuple(int(x) % mm for x, mm in zip(tails, mods))


@dataclass(frozen=True)
class CocycleClass:
    """A cocycle given by a representative tail vector; equality is mod B."""

    space: H2Structure
    tails: Vector

    def __post_init__(self):
        if not self.space.cocycles.contains(self.tails):
            raise ValueError("tail vector is not a cocycle")

    def __eq__(self, other):
        if not isinstance(other, CocycleClass) or self.space is not other.space:
            return NotImplemented
        diff = [
            (a - b) % mm
            for a, b, mm in zip(self.tails, other.tails, self.space.ambient_moduli)
        ]
        return self.space.coboundaries.contains(diff)

    def __hash__(self):
        raise TypeError("cocycle classes are not hashable; compare explicitly")

    def is_zero(self) -> bool:
        return self.space.coboundaries.contains(self.tails)


def cocycle_space(
    rpres: PcPresentation,
    module: ModuleSpec,
    rows=None,
    cob_gens=None,
) -> H2Structure:
    """Z and B of H^2(R, A) as canonical subgroups of the tail ambient.

    ``rows``/``cob_gens`` allow reusing the symbolic systems across modules
    with the same action (they do not depend on the exponents).
    """
    validate_action(rpres, module)
    d = module.rank
    m = relation_count(rpres.n)
    if rows is None:
        rows = consistency_rows(rpres, module.action, d)
    if cob_gens is None:
        cob_gens = coboundary_generators(rpres, module.action, d)
    ambient = module.exponents * m
    z = kernel_mod(
        [row for _, row in rows],
        [module.exponents[r] for r, _ in rows],
        ambient,
    )
    b = ResidueSubgroup(ambient, cob_gens)
    if b.issubgroup_of(z) is not None:
        raise RuntimeError("coboundaries escaped the cocycle subgroup")
    return H2Structure(
        rpres=rpres, module=module, cocycles=z, coboundaries=b, rows=rows
    )


# ---------------------------------------------------------------------------
# The two direct summands
# ---------------------------------------------------------------------------


def inclusion_image(h2: H2Structure, scale_exp: int) -> ResidueSubgroup:
    """Image of H^2(R, p^c A) in H^2(R, A) under the inclusion p^c A -> A.

    Cocycles with tails in the submodule are cocycles of the submodule in
    its own coordinates; scaling them back embeds the image, and the
    coboundaries of A are added so the result is saturated below.
    """
    module = h2.module
    p = module.prime
    c = scale_exp
    sub = module.scaled_down(c)
    m = h2.relation_count
    sub_ambient = sub.exponents * m
    z_sub = kernel_mod(
        [row for _, row in h2.rows],
        [sub.exponents[r] for r, _ in h2.rows],
        sub_ambient,
    )
    gens = [tuple(p**c * x for x in b) for b in z_sub.basis]
    return ResidueSubgroup(h2.ambient_moduli, gens).add(h2.coboundaries)


def projection_image(h2: H2Structure) -> ResidueSubgroup:
    """Image of H^2(R, T) in H^2(R, A) under the projection T -> A.

    T is the free module Z_p^d with the same integer action; its cocycles
    are the exact integer kernel of the overlap system, so the image is the
    reduction of that kernel plus the coboundaries.
    """
    mat = [row for _, row in h2.rows]
    m = h2.relation_count
    d = h2.module.rank
    kern = integer_kernel(mat, m * d) if mat else []
    return ResidueSubgroup(h2.ambient_moduli, kern).add(h2.coboundaries)


@dataclass
class H2Decomposition:
    space: H2Structure
    from_projection: ResidueSubgroup
    from_inclusion: ResidueSubgroup

    @property
    def sum_is_everything(self) -> bool:
        return self.from_projection.add(self.from_inclusion) == self.space.cocycles

    @property
    def intersection_is_trivial(self) -> bool:
        inter = self.from_projection.intersection(self.from_inclusion)
        return inter == self.space.coboundaries

    @property
    def orders_multiply(self) -> bool:
        b = self.space.coboundaries.order
        return (
            (self.from_projection.order // b) * (self.from_inclusion.order // b)
            == self.space.cocycles.order // b
        )

    @property
    def certified(self) -> bool:
        return (
            self.sum_is_everything
            and self.intersection_is_trivial
            and self.orders_multiply
        )

    def inclusion_quotient_order(self) -> int:
        return self.from_inclusion.order // self.space.coboundaries.order

    def inclusion_quotient_invariants(self) -> list[int]:
        return quotient_invariants(self.from_inclusion, self.space.coboundaries)

    def projection_quotient_invariants(self) -> list[int]:
        return quotient_invariants(self.from_projection, self.space.coboundaries)


def decompose(h2: H2Structure, scale_exp: int) -> H2Decomposition:
    return H2Decomposition(
        space=h2,
        from_projection=projection_image(h2),
        from_inclusion=inclusion_image(h2, scale_exp),
    )


def shift_class(h2_target: H2Structure, tails: Sequence[int], i: int) -> Vector:
    """Tails multiplied by p^i and reinterpreted in the target module.

    This is the map induced by identifying A_0 with the p^i-th powers
    inside A_i; the input is a tail vector over A_0.
    """
    p = h2_target.module.prime
    return h2_target.reduce_tails([p**i * x for x in tails])


# ---------------------------------------------------------------------------
# Extensions from tails
# ---------------------------------------------------------------------------


def extension_from_tails(
    rpres: PcPresentation,
    module: ModuleSpec,
    tails: Sequence[int],
    check: bool = True,
) -> PcGroup:
    """The extension group on n + d generators defined by a tail vector.

    The presentation keeps R's relations with the tails appended, adds the
    action relations for the module generators and makes the module
    abelian of the given exponents.  With ``check`` the consistency of the
    result is verified (tails outside the cocycle subgroup fail here).
    """
    n = rpres.n
    d = module.rank
    m = relation_count(n)
    exps = module.exponents
    if len(tails) != m * d:
        raise ValueError("tail vector length does not match the relation count")
    total = n + d
    orders = list(rpres.orders) + list(exps)
    ridx = {rel: i for i, rel in enumerate(canonical_relation_order(n))}

    def tail_part(rel) -> list[int]:
        j = ridx[rel]
        return [tails[j * d + c] % exps[c] for c in range(d)]

    power_rhs = []
    for j in range(n):
        vec = list(rpres.power_rhs[j]) + tail_part(("power", j))
        power_rhs.append(vec)
    for c in range(d):
        power_rhs.append([0] * total)
    conj_rhs = [[None] * total for _ in range(total)]
    for h in range(n):
        for j in range(h + 1, n):
            conj_rhs[h][j] = list(rpres.conj_rhs[h][j]) + tail_part(("conj", h, j))
        for c in range(d):
            col = [module.action[h][r][c] % exps[r] for r in range(d)]
            conj_rhs[h][n + c] = [0] * n + col
    for a in range(d):
        for b in range(a + 1, d):
            conj_rhs[n + a][n + b] = [0] * n + [1 if r == b else 0 for r in range(d)]
    pres = PcPresentation(orders, power_rhs, conj_rhs)
    group = PcGroup(pres)
    if check and not group.is_consistent:
        viol = group.consistency_violations()[0]
        raise ValueError(f"tails do not define an extension: {viol}")
    return group


# ---------------------------------------------------------------------------
# Independent brute-force oracle
# ---------------------------------------------------------------------------


def brute_force_h2_order(
    table: Sequence[Sequence[int]],
    exponents: Sequence[int],
    element_action: Sequence[Matrix],
    size_bound: int = 16,
) -> int:
    """|H^2(R, A)| from set-theoretic 2-cocycles on a multiplication table.

    Completely independent of the tails machinery: normalised cocycles are
    counted as solutions of the cocycle identity
    f(x,y)^z + f(xy,z) = f(x,yz) + f(y,z), modulo the coboundaries of maps
    R -> A.  Identity index must be 0.  Sizes are deliberately capped; this
    is an oracle, not a workhorse.
    """
    import numpy as np

    q = len(table)
    exps = [int(e) for e in exponents]
    d = len(exps)
    if q > size_bound or _prod(exps) > size_bound:
        raise ValueError("brute-force oracle is restricted to tiny inputs")
    if q == 1:
        return 1
    p = ModuleSpec(tuple(exps), tuple(element_action[:1])).prime
    F = max(e for e in exps).bit_length() - 1 if p == 2 else 0
    # uniform exponent p^F with column/row scaling for mixed modules
    F = 0
    for e in exps:
        k = 0
        while p**k < e:
            k += 1
        if p**k != e:
            raise ValueError("module exponents must be powers of one prime")
        F = max(F, k)
    mod = p**F

    nz = list(range(1, q))
    var_index = {}
    for x in nz:
        for y in nz:
            var_index[(x, y)] = len(var_index)
    nvars = len(var_index) * d

    def fvar(x, y):
        if x == 0 or y == 0:
            return None
        return var_index[(x, y)]

    rows = []
    for x in nz:
        for y in nz:
            for z in nz:
                # f(x,y)^z + f(xy,z) - f(x,yz) - f(y,z) = 0
                for r in range(d):
                    row = [0] * nvars
                    mat = element_action[z]
                    base = fvar(x, y)
                    for c in range(d):
                        row[base * d + c] += mat[r][c]
                    for sign, pair in (
                        (1, (table[x][y], z)),
                        (-1, (x, table[y][z])),
                        (-1, (y, z)),
                    ):
                        v = fvar(*pair)
                        if v is not None:
                            row[v * d + r] += sign
                    rows.append(row)
    col_scale = [mod // exps[c % d] for c in range(nvars)]
    row_scale = [mod // exps[i % d] for i in range(len(rows))]
    a = np.array(rows, dtype=np.int64)
    a = (a * np.array(col_scale, dtype=np.int64)[None, :]) % mod
    a = (a * np.array(row_scale, dtype=np.int64)[:, None]) % mod
    z_count = _kernel_size_mod_pf(a, p, F)

    # coboundaries: b: R -> A with b(0) = 0; db(x,y) = b(x)^y + b(y) - b(xy)
    nbvars = len(nz) * d
    bidx = {x: i for i, x in enumerate(nz)}
    rows = []
    for x in nz:
        for y in nz:
            for r in range(d):
                row = [0] * nbvars
                mat = element_action[y]
                for c in range(d):
                    row[bidx[x] * d + c] += mat[r][c]
                row[bidx[y] * d + r] += 1
                if table[x][y] != 0:
                    row[bidx[table[x][y]] * d + r] -= 1
                rows.append(row)
    col_scale = [mod // exps[c % d] for c in range(nbvars)]
    row_scale = [mod // exps[i % d] for i in range(len(rows))]
    a = np.array(rows, dtype=np.int64)
    a = (a * np.array(col_scale, dtype=np.int64)[None, :]) % mod
    a = (a * np.array(row_scale, dtype=np.int64)[:, None]) % mod
    delta_kernel = _kernel_size_mod_pf(a, p, F)
    module_order = _prod(exps)
    b_count = module_order ** len(nz) // delta_kernel
    assert z_count % b_count == 0
    return z_count // b_count


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def _kernel_size_mod_pf(a, p: int, F: int) -> int:
    """Number of solutions of a x = 0 over (Z/p^F)^ncols, by diagonalisation."""
    import numpy as np

    mod = p**F
    a = a % mod
    m, n = a.shape
    if F == 0 or n == 0:
        return 1
    active_rows = np.ones(m, dtype=bool)
    active_cols = np.ones(n, dtype=bool)
    pivots = []
    while True:
        sub = a[np.ix_(active_rows, active_cols)]
        if sub.size == 0 or not sub.any():
            break
        v = 0
        while True:
            mask = (sub % (p ** (v + 1))) != 0
            if mask.any():
                break
            v += 1
        ri, ci = np.argwhere(mask)[0]
        rows_idx = np.where(active_rows)[0]
        cols_idx = np.where(active_cols)[0]
        i, j = rows_idx[ri], cols_idx[ci]
        piv = int(a[i, j])
        unit = piv // p**v
        inv = pow(int(unit), -1, mod)
        a[i] = (a[i] * inv) % mod
        pv = p**v
        col = a[:, j]
        factor = (col // pv) % mod
        factor[i] = 0
        a = (a - factor[:, None] * a[i][None, :]) % mod
        row = a[i]
        cfac = (row // pv) % mod
        cfac[j] = 0
        a = (a - a[:, j][:, None] * cfac[None, :]) % mod
        pivots.append(v)
        active_rows[i] = False
        active_cols[j] = False
    free = int(active_cols.sum())
    size = _prod([p ** min(v, F) for v in pivots]) * (mod**free)
    return size
