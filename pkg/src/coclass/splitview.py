"""Fast exact arithmetic for extensions of a finite module by a small group.

An instantiated sequence group is an extension of a finite abelian module by
a small quotient R.  Elements are pairs (R-index, module vector), multiplied
through a precomputed R-table with tail values and per-element action
matrices.  Because powering acts affinely on the module part, element-order
statistics come from counting solutions of small linear congruence systems;
no element enumeration is ever needed, so order histograms of the largest
catalog instantiations are exact and cheap.
"""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Iterable, Optional, Sequence

from .cohomology import ModuleSpec, TailCollector, VectorTails, relation_count, word_matrix
from .linalg import (
    ResidueSubgroup,
    mat_identity,
    matmul,
    matvec,
    smith_normal_form,
    solve_mod,
)
from .pcgroup import PcGroup, PcPresentation


class SplitView:
    """Multiplication model (R-index, module vector) of an extension."""

    def __init__(self, rgroup: PcGroup, module: ModuleSpec, table, elmat, relements):
        self.rgroup = rgroup
        self.module = module
        self.table = table
        self.elmat = elmat
        self.relements = relements
        self.rindex = {vec: i for i, vec in enumerate(relements)}
        self.identity = (0, (0,) * module.rank)

    # -- construction -------------------------------------------------------

    @classmethod
    def from_extension(
        cls, rpres: PcPresentation, module: ModuleSpec, tails: Sequence[int]
    ) -> "SplitView":
        rgroup = PcGroup(rpres)
        d = module.rank
        m = relation_count(rpres.n)
        ops = VectorTails(module.exponents)
        rel_tails = [
            tuple(tails[j * d + c] % module.exponents[c] for c in range(d))
            for j in range(m)
        ]
        col = TailCollector(rpres, module.action, rel_tails, ops)
        relements = list(itertools.product(*[range(o) for o in rpres.orders]))
        ridx = {v: i for i, v in enumerate(relements)}
        exps = module.exponents
        elmat = []
        for vec in relements:
            letters = [(k, e) for k, e in enumerate(vec) if e]
            mat = word_matrix(module, letters)
            elmat.append(
                tuple(tuple(x % exps[r] for x in row) for r, row in enumerate(mat))
            )
        table = []
        for a in relements:
            row = []
            items_a = [("g", k, e) for k, e in enumerate(a) if e]
            for b in relements:
                items = items_a + [("g", k, e) for k, e in enumerate(b) if e]
                vec, tail = col.collect(items)
                row.append((ridx[vec], tail))
            table.append(row)
        return cls(rgroup, module, table, elmat, relements)

    # -- basic arithmetic -----------------------------------------------------

    @property
    def order(self) -> int:
        return len(self.relements) * self.module.order

    @property
    def prime(self) -> int:
        return self.module.prime

    def mult(self, a, b):
        i, v = a
        j, w = b
        k, f = self.table[i][j]
        mat = self.elmat[j]
        exps = self.module.exponents
        tail = tuple(
            (sum(mat[r][c] * v[c] for c in range(len(v))) + w[r] + f[r]) % exps[r]
            for r in range(len(v))
        )
        return (k, tail)

    def power(self, a, e: int):
        out = self.identity
        base = a
        while e:
            if e & 1:
                out = self.mult(out, base)
            e >>= 1
            if e:
                base = self.mult(base, base)
        return out

    def element_order(self, a) -> int:
        p = self.prime
        out = 1
        while a != self.identity:
            a = self.power(a, p)
            out *= p
        return out

    def from_pc_vector(self, vec: Sequence[int]):
        n = self.rgroup.n
        return (self.rindex[tuple(vec[:n])], tuple(vec[n:]))

    def to_pc_vector(self, a) -> tuple[int, ...]:
        return self.relements[a[0]] + a[1]

    # -- affine powering -------------------------------------------------------

    def _power_affine_steps(self, i: int, kmax: int):
        """Affine maps of v -> module part of (i, v)^(p^k), k = 1..kmax.

        Yields (r_index_k, M_k, c_k) with (i,v)^(p^k) = (r_k, M_k v + c_k).
        """
        p = self.prime
        d = self.module.rank
        exps = self.module.exponents
        ident = mat_identity(d)
        cur_i = i
        M = ident
        c = (0,) * d
        for _ in range(kmax):
            # one p-th power step applied to the element (cur_i, w)
            step_m = ident
            step_c = (0,) * d
            idx = cur_i
            for _ in range(p - 1):
                k2, f = self.table[idx][cur_i]
                mat = self.elmat[cur_i]
                # (idx, u)(cur_i, w) = (k2, A_(cur_i) u + w + f)
                step_m = matmul(mat, step_m)
                step_m = tuple(
                    tuple((step_m[r][cc] + (1 if r == cc else 0)) % exps[r] for cc in range(d))
                    for r in range(d)
                )
                step_c = tuple(
                    (sum(mat[r][cc] * step_c[cc] for cc in range(d)) + f[r]) % exps[r]
                    for r in range(d)
                )
                idx = k2
            # compose with the accumulated map
            M = tuple(
                tuple(sum(step_m[r][t] * M[t][cc] for t in range(d)) % exps[r] for cc in range(d))
                for r in range(d)
            )
            c = tuple(
                (sum(step_m[r][t] * c[t] for t in range(d)) + step_c[r]) % exps[r]
                for r in range(d)
            )
            cur_i = idx
            yield cur_i, M, c

    def _count_affine_zero(self, rows, rhs) -> int:
        exps = self.module.exponents
        sol = solve_mod(rows, rhs, list(exps) * (len(rows) // len(exps)), exps)
        if sol is None:
            return 0
        return sol.kernel.order

    def order_histogram(self, bound: Optional[int] = None) -> Counter:
        """Exact element-order histogram via affine powering (any size)."""
        p = self.prime
        d = self.module.rank
        exps = self.module.exponents
        kmax = 0
        while p**kmax < self.order:
            kmax += 1
        counts = [0] * (kmax + 1)  # counts[k] = #elements with x^(p^k) = 1
        counts[0] = 1
        for i in range(len(self.relements)):
            for k, (ri, M, c) in enumerate(self._power_affine_steps(i, kmax), start=1):
                if ri == 0:
                    rows = [list(M[r]) for r in range(d)]
                    rhs = [(-c[r]) % exps[r] for r in range(d)]
                    counts[k] += self._count_affine_zero(rows, rhs)
        hist = Counter()
        hist[1] = 1
        prev = 1
        for k in range(1, kmax + 1):
            n_k = counts[k]
            if n_k > prev:
                hist[p**k] = n_k - prev
            prev = max(prev, n_k)
            if n_k == self.order:
                break
        return hist

    # -- the centre -------------------------------------------------------------

    def _central_rows(self, i: int):
        """Linear conditions on v making (i, v) central, or None."""
        d = self.module.rank
        exps = self.module.exponents
        ident = tuple(
            tuple(1 if r == c else 0 for c in range(d)) for r in range(d)
        )
        if any(
            (self.elmat[i][r][c] - ident[r][c]) % exps[r]
            for r in range(d)
            for c in range(d)
        ):
            return None
        rows = []
        rhs = []
        ngens = self.rgroup.n
        gen_indices = [self.rindex[g] for g in self.rgroup.generators()]
        for h in gen_indices:
            if self.table[i][h][0] != self.table[h][i][0]:
                return None
            # (A_h - 1) v = f(h, i) - f(i, h)
            mat = self.elmat[h]
            fhi = self.table[h][i][1]
            fih = self.table[i][h][1]
            for r in range(d):
                rows.append([
                    (mat[r][c] - (1 if r == c else 0)) for c in range(d)
                ])
                rhs.append((fhi[r] - fih[r]) % exps[r])
        return rows, rhs

    def center_order_counts(self) -> list[int]:
        """counts[k] = number of central elements x with x^(p^k) = 1."""
        p = self.prime
        d = self.module.rank
        exps = self.module.exponents
        kmax = 0
        while p**kmax < self.order:
            kmax += 1
        counts = [1] + [0] * kmax
        for i in range(len(self.relements)):
            central = self._central_rows(i)
            if central is None:
                continue
            crows, crhs = central
            for k, (ri, M, c) in enumerate(self._power_affine_steps(i, kmax), start=1):
                if ri != 0:
                    continue
                rows = crows + [list(M[r]) for r in range(d)]
                rhs = crhs + [(-c[r]) % exps[r] for r in range(d)]
                sol = solve_mod(rows, rhs, list(exps) * (len(rows) // d), exps)
                if sol is not None:
                    counts[k] += sol.kernel.order
        return counts

    # -- module quotients ---------------------------------------------------------

    def quotient_by_submodule(self, gens: Iterable[Sequence[int]]) -> "SplitView":
        """The quotient by an action-invariant subgroup of the module part."""
        d = self.module.rank
        exps = self.module.exponents
        sub = ResidueSubgroup(exps, gens)
        lattice_cols = [list(b) for b in sub.basis] + [
            [exps[r] if c == r else 0 for r in range(d)] for c in range(d)
        ]
        # columns of the lattice matrix span the full-rank relation lattice
        mat = [[col[r] for col in lattice_cols] for r in range(d)]
        snf = smith_normal_form(mat)
        diag = [snf.d[r][r] for r in range(d)]
        U = snf.u
        kept = [r for r in range(d) if diag[r] > 1]
        new_exps = tuple(diag[r] for r in kept)
        new_d = len(kept)

        def project(v):
            y = matvec(U, v)
            return tuple(y[r] % diag[r] for r in kept)

        # transform action matrices; verify invariance of the submodule
        from .linalg import mat_inverse_unimodular

        uinv = mat_inverse_unimodular(U)
        new_elmat = []
        for mat_a in self.elmat:
            big = matmul(matmul(U, mat_a), uinv)
            for ri, r in enumerate(kept):
                for c in range(d):
                    if c not in kept and big[r][c] % diag[r]:
                        raise ValueError("submodule is not action invariant")
            new_elmat.append(
                tuple(
                    tuple(big[r][c] % diag[r] for c in kept) for r in kept
                )
            )
        new_table = []
        for row in self.table:
            new_table.append([(k, project(f)) for (k, f) in row])
        new_module = ModuleSpec(
            exponents=new_exps,
            action=tuple(
                tuple(tuple(m[r][c] for c in range(new_d)) for r in range(new_d))
                for m in (new_elmat[self.rindex[g]] for g in self.rgroup.generators())
            ),
        )
        out = SplitView(self.rgroup, new_module, new_table, new_elmat, self.relements)
        return out
