"""Comparison of sites along a functor.

Continuity is decided against the bounded sheaf census of the target,
so a ``True`` answer is relative to the carrier bound used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import PreconditionFailed, TypeMismatch
from .fincat import FinFunctor, is_fully_faithful, precompose, validate_functor
from .limits import effective_epis, is_effective_epi_family_mask
from .sheaves import canonical_form, is_sheaf_for_topology, sheaf_census
from .sieves import (
    functor_pullback_mask,
    image_sieve_mask,
    presieve_masks,
    pushforward_mask,
    sieve_masks,
)
from .topology import (
    GrothTopology,
    PredicateResult,
    coherent_coverage,
    is_precoherent,
    saturate,
)


@dataclass(frozen=True)
class SiteMap:
    functor: FinFunctor
    source_topology: GrothTopology
    target_topology: GrothTopology

    def __post_init__(self):
        if self.source_topology.base != self.functor.source:
            raise TypeMismatch("source topology lives on another category")
        if self.target_topology.base != self.functor.target:
            raise TypeMismatch("target topology lives on another category")


def is_continuous(m: SiteMap, max_carrier: int = 2, budget: Optional[int] = None) -> PredicateResult:
    """Precomposition sends every target sheaf within the carrier bound to a source sheaf."""
    fn = m.functor
    for p in sheaf_census(fn.target, m.target_topology, max_carrier, budget):
        if not is_sheaf_for_topology(precompose(p, fn), m.source_topology, budget):
            return PredicateResult(False, (p.carrier, p.restriction), "precomposed sheaf fails")
    return PredicateResult(True)


def is_cocontinuous(m: SiteMap) -> PredicateResult:
    """Functor-pullbacks of target covering sieves on F(U) cover U."""
    fn = m.functor
    for u in fn.source.objects:
        for s in sorted(m.target_topology.covering[fn.object_map[u]]):
            if functor_pullback_mask(fn, u, s) not in m.source_topology.covering[u]:
                return PredicateResult(False, (u, s), "pulled-back sieve does not cover")
    return PredicateResult(True)


def is_cover_dense(fn: FinFunctor, t_target: GrothTopology) -> PredicateResult:
    """The sieve of maps factoring through the image covers every target object."""
    for y in fn.target.objects:
        if image_sieve_mask(fn, y) not in t_target.covering[y]:
            return PredicateResult(False, (y,), "image sieve does not cover")
    return PredicateResult(True)


def induced_topology(fn: FinFunctor, t_target: GrothTopology, cap: Optional[int] = None) -> GrothTopology:
    """Sieves on X whose pushforward covers F(X); needs F fully faithful and cover-dense."""
    if not is_fully_faithful(fn):
        raise PreconditionFailed(f"{fn.name} is not fully faithful")
    dense = is_cover_dense(fn, t_target)
    if not dense:
        raise PreconditionFailed(f"{fn.name} is not cover-dense at object {dense.witness[0]}")
    c = fn.source
    covering = []
    for x in c.objects:
        target_cov = t_target.covering[fn.object_map[x]]
        covering.append(frozenset(s for s in sieve_masks(c, x, cap) if pushforward_mask(fn, s) in target_cov))
    return GrothTopology(c, tuple(covering), name=f"induced({fn.name})")


def image_presieve_mask(fn: FinFunctor, mask: int) -> int:
    out = 0
    f = 0
    while mask:
        if mask & 1:
            out |= 1 << fn.morphism_map[f]
        mask >>= 1
        f += 1
    return out


@dataclass(frozen=True)
class EquivalenceConditions:
    fully_faithful: bool
    target_precoherent: bool
    families_preserved_reflected: PredicateResult
    effective_covers: PredicateResult
    source_precoherent: PredicateResult

    @property
    def ok(self) -> bool:
        return bool(
            self.fully_faithful
            and self.target_precoherent
            and self.families_preserved_reflected
            and self.effective_covers
        )

    def __bool__(self):
        return self.ok

    def lines(self) -> list[str]:
        def word(v):
            return "PASS" if v else "FAIL"

        out = [
            f"fully-faithful {word(self.fully_faithful)}",
            f"target-precoherent {word(self.target_precoherent)}",
            f"families-preserved-reflected {word(self.families_preserved_reflected)}",
            f"effective-cover-from-image {word(self.effective_covers)}",
            f"source-precoherent {word(self.source_precoherent)}",
        ]
        return out


def check_equivalence_conditions(fn: FinFunctor, cap: Optional[int] = None) -> EquivalenceConditions:
    """The two hypotheses of the comparison theorem, plus its first conclusion."""
    validate_functor(fn).raise_if_failed()
    src, tgt = fn.source, fn.target
    ff = is_fully_faithful(fn)
    tgt_pc = bool(is_precoherent(tgt, cap))

    families = PredicateResult(True)
    for x in src.objects:
        for mask in presieve_masks(src, x, cap):
            here = is_effective_epi_family_mask(src, x, mask)
            there = is_effective_epi_family_mask(tgt, fn.object_map[x], image_presieve_mask(fn, mask))
            if here != there:
                families = PredicateResult(False, (x, mask), "effectiveness differs across the functor")
                break
        if not families:
            break

    eff = effective_epis(tgt)
    image = set(fn.object_map)
    covers = PredicateResult(True)
    for y in tgt.objects:
        if not any(tgt.dom(e) in image for e in tgt.morphisms_into(y) if e in eff):
            covers = PredicateResult(False, (y,), "no effective epimorphism from the image")
            break

    return EquivalenceConditions(ff, tgt_pc, families, covers, is_precoherent(src, cap))


@dataclass(frozen=True)
class EquivalenceReport:
    source_count: int
    target_count: int
    matching: tuple[tuple[int, int], ...]
    lands_in_sheaves: bool
    injective: bool
    surjective: bool
    topologies_agree: bool
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.lands_in_sheaves and self.injective and self.surjective

    def __bool__(self):
        return self.ok


def verify_sheaf_equivalence(
    fn: FinFunctor, max_carrier: int = 2, budget: Optional[int] = None, cap: Optional[int] = None
) -> EquivalenceReport:
    """Compare bounded sheaf censuses on both sides through precomposition with ``fn``."""
    cond = check_equivalence_conditions(fn, cap)
    if not cond:
        failed = [line for line in cond.lines() if line.endswith("FAIL")]
        raise PreconditionFailed("comparison hypotheses fail: " + ", ".join(failed))
    src, tgt = fn.source, fn.target
    t_tgt = saturate(coherent_coverage(tgt, cap), cap)
    t_src = saturate(coherent_coverage(src, cap), cap)
    agree = induced_topology(fn, t_tgt, cap) == t_src

    tgt_sheaves = sheaf_census(tgt, t_tgt, max_carrier, budget)
    src_sheaves = sheaf_census(src, t_src, max_carrier, budget)
    src_index = {canonical_form(p): i for i, p in enumerate(src_sheaves)}

    matching = []
    lands = True
    notes = []
    for j, p in enumerate(tgt_sheaves):
        q = precompose(p, fn)
        if not is_sheaf_for_topology(q, t_src, budget):
            lands = False
            notes.append(f"target sheaf {j} restricts to a non-sheaf")
            continue
        i = src_index.get(canonical_form(q))
        if i is None:
            notes.append(f"target sheaf {j} restricts outside the source census")
            continue
        matching.append((j, i))
    hit = [i for _, i in matching]
    return EquivalenceReport(
        source_count=len(src_sheaves),
        target_count=len(tgt_sheaves),
        matching=tuple(matching),
        lands_in_sheaves=lands,
        injective=len(set(hit)) == len(hit) == len(tgt_sheaves),
        surjective=set(hit) == set(range(len(src_sheaves))),
        topologies_agree=agree,
        notes=tuple(notes),
    )
