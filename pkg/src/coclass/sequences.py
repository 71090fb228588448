"""Construction of the infinite sequences: bounds, instantiation, tail space.

A catalog family fixes a finite quotient R, a module action, per-relation
base tails and a basis of deep tail vectors.  For a sequence index i the
family instantiates to the finite group on the R-generators plus d module
generators of order p^(e/d+i), with relation tails  v_j + p^i * w_j.  The
index-independent bound formulas and the validation of (root, offset)
pairs live here as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional, Sequence

from .catalog import SequenceFamily
from .cohomology import (
    H2Structure,
    ModuleSpec,
    cocycle_space,
    coboundary_generators,
    consistency_rows,
    decompose,
    extension_from_tails,
    relation_count,
)
from .linalg import mat_identity
from .pcgroup import PcGroup


# ---------------------------------------------------------------------------
# Bound formulas
# ---------------------------------------------------------------------------


def secondary_root_bound(u: int, p: int, r: int, k: int, d: int) -> int:
    """Smallest l certified as a secondary root: u - 1 + max(p^r, ceil(3(k+d)/2))."""
    if min(u, p, r, k, d) <= 0:
        raise ValueError("all arguments must be positive")
    return u - 1 + max(p**r, (3 * (k + d) + 1) // 2)


def offset_bound(d: int, l: int, r: int) -> int:
    """Offset guarantee depending only on (d, l, r): 2d(2l + 2r - 1)."""
    if min(d, l, r) <= 0:
        raise ValueError("all arguments must be positive")
    return 2 * d * (2 * l + 2 * r - 1)


def offset_from_definition(d: int, a: int, b: int, l: int, r: int) -> int:
    """Defining offset threshold max(2d(a+b+1), d(l+r-1)) from the action
    kernel exponent a and the multiplicator exponent b."""
    if min(d, l, r) <= 0 or a < 0 or b < 0:
        raise ValueError("bad arguments")
    return max(2 * d * (a + b + 1), d * (l + r - 1))


def order_formula(p: int, r: int, l: int, e: int, d: int, i: int) -> int:
    """Order of the i-th group of a sequence for the pair (l, e)."""
    return p ** (r - 1 + l + e + i * d)


def module_invariants_formula(p: int, d: int, e: int, i: int) -> list[int]:
    """Abelian invariants of the module at index i: write e = qd + t, then
    t coordinates of exponent i+q+1 and d-t of exponent i+q."""
    q, t = divmod(e, d)
    return sorted([p ** (i + q + 1)] * t + [p ** (i + q)] * (d - t))


# ---------------------------------------------------------------------------
# Modules and instantiation
# ---------------------------------------------------------------------------


def build_module(family: SequenceFamily, i: int) -> ModuleSpec:
    """The homocyclic module of the family at index i (requires d | e)."""
    if i < 0:
        raise ValueError("index must be nonnegative")
    if family.l < family.u:
        raise ValueError("secondary root below the primary root")
    if family.e % family.d:
        raise ValueError("parametrised instantiation needs d | e")
    m = family.e // family.d + i
    exps = (family.p**m,) * family.d
    return ModuleSpec(exponents=exps, action=family.action)


def coefficient_orders(family: SequenceFamily) -> tuple[int, ...]:
    """Additive order of each tail basis vector inside the index-0 module."""
    m0 = family.e // family.d
    return tuple(
        family.p ** max(m0 - s, 0) for s in family.w_scale_exps
    )


def tail_space(family: SequenceFamily) -> list[tuple[int, ...]]:
    """All coefficient tuples over the tail basis, one per sequence class."""
    return [tuple(c) for c in product(*[range(o) for o in coefficient_orders(family)])]


def w_vector(family: SequenceFamily, coeffs: Optional[Sequence[int]]) -> tuple[int, ...]:
    """Integer tail vector of a coefficient combination (unreduced)."""
    m = family.relation_count
    d = family.d
    flat = [0] * (m * d)
    if coeffs is None:
        return tuple(flat)
    if len(coeffs) != len(family.w_basis):
        raise ValueError("coefficient vector length does not match the basis")
    for c, vec in zip(coeffs, family.w_basis):
        if c:
            for idx, x in enumerate(vec):
                flat[idx] += c * x
    return tuple(flat)


def instantiation_tails(
    family: SequenceFamily, coeffs: Optional[Sequence[int]], i: int
) -> tuple[int, ...]:
    """Flat tail vector v + p^i * w of the instantiation, reduced."""
    module = build_module(family, i)
    w = w_vector(family, coeffs)
    p = family.p
    mods = module.exponents * family.relation_count
    return tuple(
        (v + p**i * x) % mm for v, x, mm in zip(family.base_tails, w, mods)
    )


def instantiate(
    family: SequenceFamily,
    coeffs: Optional[Sequence[int]],
    i: int,
    check: bool = True,
) -> PcGroup:
    """The i-th group of the sequence selected by the coefficients.

    None or all-zero coefficients give the group on the distinguished
    infinite path.  The result is consistency-checked; a failure indicates
    tails outside the cocycle subgroup or corrupt catalog data.
    """
    module = build_module(family, i)
    tails = instantiation_tails(family, coeffs, i)
    group = extension_from_tails(family.rpres, module, tails, check=check)
    expected = order_formula(family.p, family.r, family.l, family.e, family.d, i)
    if group.order != expected:
        raise ValueError(
            f"instantiation of {family.label} at i={i} has order {group.order},"
            f" expected {expected}"
        )
    return group


# ---------------------------------------------------------------------------
# Cohomology pipeline with per-family caching
# ---------------------------------------------------------------------------


_SYMBOLIC_CACHE: dict[int, tuple] = {}


def family_symbolic_systems(family: SequenceFamily):
    """Cocycle equations and coboundary generators; exponent-independent."""
    key = id(family)
    if key not in _SYMBOLIC_CACHE:
        rows = consistency_rows(family.rpres, family.action, family.d)
        cob = coboundary_generators(family.rpres, family.action, family.d)
        _SYMBOLIC_CACHE[key] = (rows, cob)
    return _SYMBOLIC_CACHE[key]


def family_h2(family: SequenceFamily, i: int) -> H2Structure:
    rows, cob = family_symbolic_systems(family)
    return cocycle_space(family.rpres, build_module(family, i), rows=rows, cob_gens=cob)


def action_kernel_exponent(family: SequenceFamily) -> int:
    """log_p of the exponent of H/H' for the action kernel H <= R.

    H consists of the elements whose integer action matrix is the identity;
    this is exact for the free module the action comes from.
    """
    from .cohomology import word_matrix

    R = PcGroup(family.rpres)
    module = build_module(family, 0)
    ident = mat_identity(family.d)
    members = []
    for vec in R.elements():
        letters = [(k, e) for k, e in enumerate(vec) if e]
        if word_matrix(module, letters) == ident:
            members.append(vec)
    h = R.subgroup(members)
    # derived subgroup of H: close commutators under conjugation by H only
    comms = []
    rows = h.ordered_rows()
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            c = R.comm(rows[a], rows[b])
            if c != R.identity:
                comms.append(c)
    hprime = R.subgroup(comms)
    changed = True
    while changed:
        changed = False
        for u in list(hprime.rows.values()):
            for g in rows:
                if hprime.add(R.conj(u, g)):
                    changed = True
        if changed:
            hprime.close()
    inv = R.section_invariants(h, hprime)
    exp = max(inv, default=1)
    a = 0
    while family.p**a < exp:
        a += 1
    return a


def family_decomposition(family: SequenceFamily, i: int):
    """Direct-sum decomposition of H^2 at index i, via the submodule at
    depth d(a+1)+id, which for d | e is scaling by p^(a+1+i)."""
    a = action_kernel_exponent(family)
    scale = a + 1 + i
    m = family.e // family.d + i
    if scale > m:
        raise ValueError(
            f"submodule depth p^{scale} exceeds the module exponent p^{m};"
            " the offset is below the decomposition threshold"
        )
    return decompose(family_h2(family, i), scale)


# ---------------------------------------------------------------------------
# Pair validation
# ---------------------------------------------------------------------------


@dataclass
class PairValidation:
    family_label: str
    l: int
    e: int
    root_rule: str
    offset_rule: str
    residue: int
    ok: bool
    problems: tuple[str, ...]


def validate_pairs(families: Sequence[SequenceFamily], k: Optional[int] = None) -> list[PairValidation]:
    """Validate a family set as a pair system for one pro-p-group.

    Checks each secondary root and offset against the rule in force (bound,
    definitional threshold with known multiplicator exponent, or catalog
    assertion) and that l+e covers every residue class modulo d exactly
    once.
    """
    if not families:
        return []
    d = families[0].d
    p, r, u = families[0].p, families[0].r, families[0].u
    name = families[0].name
    if any((f.name, f.d, f.p, f.r) != (name, d, p, r) for f in families):
        raise ValueError("pair validation needs families of a single group")
    k = k if k is not None else max(f.k for f in families)
    out = []
    residues = {}
    for fam in families:
        problems = []
        bound = secondary_root_bound(u, p, r, k, d)
        if fam.l >= bound:
            root_rule = f"bound({bound})"
        elif fam.min_secondary_root is not None and fam.l >= fam.min_secondary_root:
            root_rule = f"asserted({fam.min_secondary_root})"
        else:
            root_rule = "none"
            problems.append(f"l={fam.l} below every applicable root criterion")
        if fam.multiplicator_exponent is not None:
            a = action_kernel_exponent(fam)
            defn = offset_from_definition(d, a, fam.multiplicator_exponent, fam.l, r)
        else:
            defn = None
        theorem = offset_bound(d, fam.l, r)
        if fam.e >= theorem:
            offset_rule = f"bound({theorem})"
        elif defn is not None and fam.e >= defn:
            offset_rule = f"definition({defn})"
        elif fam.asserted_offset is not None and fam.e >= fam.asserted_offset:
            offset_rule = f"asserted({fam.asserted_offset})"
        else:
            offset_rule = "none"
            problems.append(f"e={fam.e} below every applicable offset criterion")
        res = (fam.l + fam.e) % d
        if res in residues:
            problems.append(
                f"residue collision modulo d: {fam.l}+{fam.e} and {residues[res]}"
            )
        residues[res] = f"{fam.l}+{fam.e}"
        out.append(
            PairValidation(
                family_label=fam.label, l=fam.l, e=fam.e,
                root_rule=root_rule, offset_rule=offset_rule,
                residue=res, ok=not problems, problems=tuple(problems),
            )
        )
    missing = set(range(d)) - set(residues)
    if missing:
        out.append(
            PairValidation(
                family_label=f"{name} (pair set)", l=0, e=0,
                root_rule="-", offset_rule="-", residue=-1, ok=False,
                problems=(f"residue classes {sorted(missing)} are not covered",),
            )
        )
    return out


# ---------------------------------------------------------------------------
# Structural properties of instantiations
# ---------------------------------------------------------------------------


def path_quotient_matches(family: SequenceFamily, i: int) -> bool:
    """The path group at i+1, cut by the bottom module layer, is the path
    group at i: with zero tails both sides reduce to the same presentation,
    so the check compares the canonical quotient with the instantiation."""
    g_next = instantiate(family, None, i + 1)
    p = family.p
    d = family.d
    n = len(family.orders)
    m_next = family.e // family.d + i + 1
    cut = p ** (family.e // family.d + i)
    gens = []
    for c in range(d):
        vec = [0] * (n + d)
        vec[n + c] = cut
        gens.append(tuple(vec))
    sub = g_next.subgroup(gens)
    q = g_next.quotient(sub)
    g_i = instantiate(family, None, i)
    return (
        q.group.pres.orders == g_i.pres.orders
        and q.group.pres.power_rhs == g_i.pres.power_rhs
        and q.group.pres.conj_rhs == g_i.pres.conj_rhs
    )


def bottom_module_invariants(family: SequenceFamily, group: PcGroup) -> list[int]:
    """Abelian invariants of the l-th lower-central term of an instantiation."""
    term = group.lcs_term(family.l)
    return group.section_invariants(term, None)
