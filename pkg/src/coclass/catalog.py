"""Catalog of sequence families: machine-readable presentation data.

Each catalog block carries one pro-p-group presented as an extension of a
free abelian part by a finite quotient, together with a chosen (secondary
root, offset) pair, the tail basis spanning the sequence-defining classes,
the printed representative set and the expected table values.

The loader validates structurally, normalises elided/dotted vectors to
zeros, consistency-checks every presentation at index 0, and quarantines
blocks it cannot validate instead of failing the run.  Quarantined blocks
may declare repair hypotheses; these are loaded as clearly-marked separate
families and never silently replace the printed data.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .pcgroup import PcGroup, PcPresentation, canonical_relation_order


class CatalogError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceFamily:
    """One (group, (l, e)) block of the catalog, fully validated."""

    name: str
    p: int
    r: int
    d: int
    u: int
    k: int
    l: int
    e: int
    orders: tuple[int, ...]
    rpres: PcPresentation
    base_tails: tuple[int, ...]  # flat v-vector, one d-block per relation
    action: tuple  # d x d integer matrices, one per generator
    w_basis: tuple[tuple[int, ...], ...]  # flat integer tail vectors (scaled)
    w_scale_exps: tuple[int, ...]
    representatives: tuple[tuple[int, ...], ...]
    expected: dict
    min_secondary_root: Optional[int] = None
    multiplicator_exponent: Optional[int] = None
    asserted_offset: Optional[int] = None
    notes: tuple[str, ...] = ()
    hypothesis: Optional[str] = None  # set when this family is a repair guess

    @property
    def label(self) -> str:
        base = f"{self.name}({self.l},{self.e})"
        if self.hypothesis:
            base += f"#{self.hypothesis}"
        return base

    @property
    def relation_count(self) -> int:
        n = len(self.orders)
        return n + n * (n - 1) // 2

    def __repr__(self):
        return f"SequenceFamily({self.label})"


@dataclass
class QuarantinedBlock:
    name: str
    label: str
    reason: str
    notes: tuple[str, ...] = ()


@dataclass
class CatalogLoad:
    families: list[SequenceFamily] = field(default_factory=list)
    hypotheses: list[SequenceFamily] = field(default_factory=list)
    quarantined: list[QuarantinedBlock] = field(default_factory=list)

    def by_label(self, label: str) -> SequenceFamily:
        for fam in self.families + self.hypotheses:
            if fam.label == label or fam.label.startswith(label):
                return fam
        raise KeyError(f"no catalog family matches {label!r}")

    def all_families(self, include_hypotheses: bool = False) -> list[SequenceFamily]:
        return self.families + (self.hypotheses if include_hypotheses else [])


def default_catalog_path() -> str:
    env = os.environ.get("COCLASS_CATALOG")
    if env:
        return env
    return str(resources.files("coclass").joinpath("data/catalog.json"))


def _zero_pad_vector(entry, d: int, what: str) -> list[int]:
    if entry == "." or entry is None:
        return [0] * d
    if not isinstance(entry, (list, tuple)) or len(entry) != d:
        raise CatalogError(f"{what}: expected a length-{d} vector, got {entry!r}")
    return [int(x) for x in entry]


def _parse_block(block: dict) -> SequenceFamily:
    for key in ("name", "p", "r", "d", "u", "k", "l", "e", "generators",
                "t_rank", "relative_orders", "relations", "action",
                "W_basis", "representatives"):
        if key not in block:
            raise CatalogError(f"missing key {key!r}")
    name = block["name"]
    p, r, d = int(block["p"]), int(block["r"]), int(block["d"])
    u, k, l, e = int(block["u"]), int(block["k"]), int(block["l"]), int(block["e"])
    if int(block["t_rank"]) != d:
        raise CatalogError("t_rank does not match the dimension")
    n = len(block["generators"])
    orders = [int(o) for o in block["relative_orders"]]
    if len(orders) != n:
        raise CatalogError("relative_orders length does not match the generators")
    rels = block["relations"]
    expected_order = canonical_relation_order(n)
    m = len(expected_order)
    if len(rels) != m:
        raise CatalogError(f"expected {m} relations in canonical order, got {len(rels)}")

    power_rhs = [None] * n
    conj_rhs = [[None] * n for _ in range(n)]
    base_tails: list[int] = []
    for idx, (rel, spec) in enumerate(zip(expected_order, rels), start=1):
        kind = spec.get("kind")
        rhs = spec.get("rhs_g", [])
        v = _zero_pad_vector(spec.get("v", [0] * d), d, f"relation {idx} tail")
        if len(rhs) != n:
            raise CatalogError(
                f"relation {idx} right side has {len(rhs)} generator entries"
                f" but {n} generators are declared"
            )
        rhs = [int(x) for x in rhs]
        if any(x < 0 or x >= orders[kk] for kk, x in enumerate(rhs)):
            raise CatalogError(f"relation {idx} has generator exponents out of range")
        if rel[0] == "power":
            j = rel[1]
            if kind != "power" or int(spec.get("gen")) != j + 1:
                raise CatalogError(f"relation {idx} is not the power relation of g{j + 1}")
            power_rhs[j] = rhs
        else:
            _, h, j = rel
            if (
                kind != "conjugate"
                or int(spec.get("gen")) != j + 1
                or int(spec.get("by")) != h + 1
            ):
                raise CatalogError(
                    f"relation {idx} is not the conjugate relation g{j + 1}^g{h + 1}"
                )
            conj_rhs[h][j] = rhs
        base_tails.extend(v)

    rpres = PcPresentation(orders, power_rhs, conj_rhs)
    rgroup = PcGroup(rpres)
    viols = rgroup.consistency_violations()
    if viols:
        raise CatalogError(f"quotient presentation inconsistent: {viols[0]}")

    raw_action = block["action"]
    if len(raw_action) != n:
        raise CatalogError("one action entry per generator is required")
    action = []
    for h, cols in enumerate(raw_action):
        if len(cols) != d:
            raise CatalogError(f"action of g{h + 1} must list {d} image vectors")
        cols = [_zero_pad_vector(cv, d, f"action of g{h + 1}") for cv in cols]
        # stored column-wise (image of each module generator); matrix rows:
        action.append(tuple(tuple(cols[c][row] for c in range(d)) for row in range(d)))

    w_basis = []
    w_scales = []
    for bi, wb in enumerate(block["W_basis"]):
        scale = int(wb["scale_exp"])
        vecs = list(wb["vectors"])
        if len(vecs) > m:
            raise CatalogError(f"tail basis vector {bi + 1} longer than the relation count")
        vecs = vecs + [None] * (m - len(vecs))
        flat: list[int] = []
        for entry in vecs:
            flat.extend(p**scale * x for x in _zero_pad_vector(entry, d, "tail basis"))
        w_basis.append(tuple(flat))
        w_scales.append(scale)

    reps = []
    for cv in block["representatives"]:
        cv = [int(x) for x in cv]
        if len(cv) != len(w_basis):
            raise CatalogError("representative coefficient length mismatch")
        reps.append(tuple(cv))

    return SequenceFamily(
        name=name, p=p, r=r, d=d, u=u, k=k, l=l, e=e,
        orders=tuple(orders),
        rpres=rpres,
        base_tails=tuple(base_tails),
        action=tuple(action),
        w_basis=tuple(w_basis),
        w_scale_exps=tuple(w_scales),
        representatives=tuple(reps),
        expected=dict(block.get("expected", {})),
        min_secondary_root=block.get("min_secondary_root"),
        multiplicator_exponent=block.get("multiplicator_exponent"),
        asserted_offset=block.get("asserted_offset"),
        notes=tuple(block.get("notes", ())),
    )


def load_catalog(path: Optional[str] = None, check_instantiation: bool = True) -> CatalogLoad:
    """Load and validate a catalog file; invalid blocks are quarantined."""
    from .sequences import instantiate  # deferred: sequences imports catalog types

    path = path or default_catalog_path()
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, list):
        raise CatalogError("catalog file must contain a list of family blocks")
    out = CatalogLoad()
    for block in data:
        label = f"{block.get('name', '?')}({block.get('l', '?')},{block.get('e', '?')})"
        attempts = [(None, block)]
        for ri, repair in enumerate(block.get("repairs", []), start=1):
            fixed = json.loads(json.dumps(block))
            rel = fixed["relations"][int(repair["relation"]) - 1]
            if "rhs_g" in repair:
                rel["rhs_g"] = repair["rhs_g"]
            if "v" in repair:
                rel["v"] = repair["v"]
            attempts.append((f"repair{ri}:{repair.get('description', '')}", fixed))
        verbatim_ok = False
        for hypothesis, blk in attempts:
            try:
                fam = _parse_block(blk)
                if hypothesis:
                    import dataclasses

                    fam = dataclasses.replace(fam, hypothesis=hypothesis)
                if check_instantiation:
                    instantiate(fam, None, 0)
                if hypothesis is None:
                    verbatim_ok = True
                    out.families.append(fam)
                elif not verbatim_ok:
                    out.hypotheses.append(fam)
            except (CatalogError, ValueError) as exc:
                if hypothesis is None:
                    out.quarantined.append(
                        QuarantinedBlock(
                            name=block.get("name", "?"),
                            label=label,
                            reason=str(exc),
                            notes=tuple(block.get("notes", ())),
                        )
                    )
                else:
                    out.quarantined.append(
                        QuarantinedBlock(
                            name=block.get("name", "?"),
                            label=f"{label}#{hypothesis}",
                            reason=f"repair hypothesis failed: {exc}",
                        )
                    )
    return out
