"""Coverages, Grothendieck topologies and their saturation fixed point.

Also hosts the three category predicates (preregular, finitary extensive,
precoherent) and the regular, extensive and coherent coverages they
license, together with the direct sieve characterizations used to
cross-check saturation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Iterable, Optional, Sequence

from .errors import CapExceeded, NotExtensive, NotPrecoherent, NotPreregular, TypeMismatch
from .fincat import FinCat, ValidationReport, Violation, mask_members
from .limits import (
    effective_epis,
    exhibits_coproduct,
    find_binary_coproduct,
    find_initial,
    find_pullback,
    is_effective_epi_family_mask,
    is_pullback_cone,
)
from .sieves import (
    Presieve,
    Sieve,
    generate_mask,
    is_downward_closed,
    presieve_masks,
    pullback_mask,
    sieve_masks,
)


def _check_masks(c: FinCat, covering: Sequence[Iterable[int]]) -> tuple[frozenset[int], ...]:
    if len(covering) != c.object_count:
        raise TypeMismatch("one covering collection per object is required")
    out = []
    for x, masks in enumerate(covering):
        fs = frozenset(masks)
        for m in fs:
            if m & ~c.into_masks[x]:
                raise TypeMismatch(f"covering collection on {c.object_name(x)} has a foreign morphism")
        out.append(fs)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class Coverage:
    """Per-object sets of covering presieves, stored as bitsets."""

    base: FinCat
    covering: tuple[frozenset[int], ...]
    name: str = "K"

    def __post_init__(self):
        object.__setattr__(self, "covering", _check_masks(self.base, self.covering))

    def presieves(self, x: int) -> list[Presieve]:
        return [Presieve(self.base, x, m) for m in sorted(self.covering[x])]

    def union(self, other: "Coverage") -> "Coverage":
        if other.base != self.base:
            raise TypeMismatch("coverages live on different categories")
        return Coverage(self.base, tuple(a | b for a, b in zip(self.covering, other.covering)),
                        name=f"{self.name}+{other.name}")

    def __le__(self, other: "Coverage") -> bool:
        return all(a <= b for a, b in zip(self.covering, other.covering))

    def __eq__(self, other):
        if not isinstance(other, Coverage):
            return NotImplemented
        return self.covering == other.covering and self.base == other.base

    def __hash__(self):
        return hash(self.covering)


@dataclass(frozen=True, eq=False)
class GrothTopology:
    """Per-object sets of covering sieves, stored as bitsets."""

    base: FinCat
    covering: tuple[frozenset[int], ...]
    name: str = "J"

    def __post_init__(self):
        object.__setattr__(self, "covering", _check_masks(self.base, self.covering))

    def sieves(self, x: int) -> list[Sieve]:
        return [Sieve(self.base, x, m) for m in sorted(self.covering[x])]

    def covers(self, s: Presieve) -> bool:
        return s.mask in self.covering[s.target]

    def __le__(self, other: "GrothTopology") -> bool:
        return all(a <= b for a, b in zip(self.covering, other.covering))

    def __eq__(self, other):
        if not isinstance(other, GrothTopology):
            return NotImplemented
        return self.covering == other.covering and self.base == other.base

    def __hash__(self):
        return hash(self.covering)

    def size(self) -> int:
        return sum(len(s) for s in self.covering)


@dataclass(frozen=True)
class PredicateResult:
    """A boolean verdict with the first counterexample in canonical order."""

    value: bool
    witness: tuple = ()
    reason: str = ""

    def __bool__(self):
        return self.value


def empty_coverage(c: FinCat) -> Coverage:
    return Coverage(c, tuple(frozenset() for _ in c.objects), name="empty")


def top_coverage(c: FinCat) -> Coverage:
    return Coverage(c, tuple(frozenset({c.into_masks[x]}) for x in c.objects), name="top")


def minimal_topology(c: FinCat) -> GrothTopology:
    return GrothTopology(c, tuple(frozenset({c.into_masks[x]}) for x in c.objects), name="minimal")


# -- validation ----------------------------------------------------------------


def check_coverage(cov: Coverage) -> ValidationReport:
    """Every pullback of a covering presieve is refined by some covering presieve."""
    c = cov.base
    violations = []
    for y in c.objects:
        for s in sorted(cov.covering[y]):
            gen = generate_mask(c, s)
            for f in c.morphisms_into(y):
                allowed = pullback_mask(c, f, gen)
                if not any(t & ~allowed == 0 for t in cov.covering[c.dom(f)]):
                    violations.append(Violation("coverage-refinement", (f,) + tuple(mask_members(s))))
    return ValidationReport(tuple(violations))


def _descent_mask(c: FinCat, x: int, r: int, covering, cache=None) -> int:
    """Bitset of f into x whose pullback of r is currently covering."""
    d = 0
    for f in c.morphisms_into(x):
        key = (f, r)
        if cache is not None and key in cache:
            pb = cache[key]
        else:
            pb = pullback_mask(c, f, r)
            if cache is not None:
                cache[key] = pb
        if pb in covering[c.dom(f)]:
            d |= 1 << f
    return d


def check_topology(t: GrothTopology, cap: int | None = None) -> ValidationReport:
    c = t.base
    cov = t.covering
    violations = []
    for x in c.objects:
        for s in sorted(cov[x]):
            if not is_downward_closed(c, s):
                violations.append(Violation("not-a-sieve", tuple(mask_members(s))))
    for x in c.objects:
        if c.into_masks[x] not in cov[x]:
            violations.append(Violation("top-sieve", (c.identity(x),)))
    for y in c.objects:
        for s in sorted(cov[y]):
            for f in c.morphisms_into(y):
                if pullback_mask(c, f, s) not in cov[c.dom(f)]:
                    violations.append(Violation("pullback-stability", (f,) + tuple(mask_members(s))))
    for y in c.objects:
        universe = sieve_masks(c, y, cap)
        for r in universe:
            if r in cov[y]:
                continue
            d = _descent_mask(c, y, r, cov)
            for s in sorted(cov[y]):
                if s & ~d == 0:
                    violations.append(Violation("local-character", tuple(mask_members(r)),
                                                f"witness {mask_members(s)}"))
                    break
            for s in sorted(cov[y]):
                if s & ~r == 0:
                    violations.append(Violation("upward-closure", tuple(mask_members(r)),
                                                f"contains {mask_members(s)}"))
                    break
    return ValidationReport(tuple(violations))


# -- saturation --------------------------------------------------------------


def saturate(cov: Coverage, cap: int | None = None) -> GrothTopology:
    """Least family of sieve-sets containing top sieves and generated covers, closed
    under local character; computed as a monotone fixed point over all sieves."""
    c = cov.base
    universe = [sieve_masks(c, x, cap) for x in c.objects]
    covering: list[set[int]] = []
    for x in c.objects:
        seeds = {c.into_masks[x]}
        seeds.update(generate_mask(c, p) for p in cov.covering[x])
        covering.append(seeds)
    cache: dict = {}
    changed = True
    while changed:
        changed = False
        for x in c.objects:
            current = list(covering[x])
            for r in universe[x]:
                if r in covering[x]:
                    continue
                d = _descent_mask(c, x, r, covering, cache)
                if any(s & ~d == 0 for s in current):
                    covering[x].add(r)
                    current.append(r)
                    changed = True
    return GrothTopology(c, tuple(frozenset(s) for s in covering), name=f"sat({cov.name})")


def generated_by_union(a: Coverage, b: Coverage, cap: int | None = None) -> GrothTopology:
    return saturate(a.union(b), cap)


def associated_coverage_contains(t: GrothTopology, cov: Coverage) -> bool:
    c = t.base
    return all(generate_mask(c, p) in t.covering[x] for x in c.objects for p in cov.covering[x])


def topology_infimum(cov: Coverage, limit: int = 1 << 20) -> GrothTopology:
    """Intersection of every topology whose associated coverage contains ``cov``.

    Exhaustive over all families of sieve-sets; only for tiny categories.
    """
    c = cov.base
    universe = [sieve_masks(c, x) for x in c.objects]
    total = sum(len(u) for u in universe)
    if (1 << total) > limit:
        raise CapExceeded(f"2^{total} candidate families exceeds limit {limit}")
    meet: Optional[list[frozenset[int]]] = None
    for choice in product(*(range(1 << len(u)) for u in universe)):
        covering = tuple(
            frozenset(u[i] for i in range(len(u)) if bits >> i & 1) for u, bits in zip(universe, choice)
        )
        t = GrothTopology(c, covering)
        if not associated_coverage_contains(t, cov):
            continue
        if not _is_topology_fast(t, universe):
            continue
        meet = list(covering) if meet is None else [a & b for a, b in zip(meet, covering)]
    if meet is None:
        raise ValueError("no topology contains the coverage")  # unreachable: the maximal family works
    return GrothTopology(c, tuple(meet), name=f"inf({cov.name})")


def _is_topology_fast(t: GrothTopology, universe) -> bool:
    c, cov = t.base, t.covering
    for x in c.objects:
        if c.into_masks[x] not in cov[x]:
            return False
    for y in c.objects:
        for s in cov[y]:
            for f in c.morphisms_into(y):
                if pullback_mask(c, f, s) not in cov[c.dom(f)]:
                    return False
    for y in c.objects:
        for r in universe[y]:
            if r in cov[y]:
                continue
            d = _descent_mask(c, y, r, cov)
            if any(s & ~d == 0 for s in cov[y]):
                return False
    return True


# -- category predicates -------------------------------------------------------


def is_preregular(c: FinCat) -> PredicateResult:
    """Every cospan (effective epi g, any f) completes to a square whose left side is effective."""
    comp = c.compose_table
    eff = effective_epis(c)
    eff_into = [[h for h in c.morphisms_into(x) if h in eff] for x in c.objects]
    for g in sorted(eff):
        z, y = c.morphisms[g]
        for f in c.morphisms_into(y):
            x = c.dom(f)
            found = False
            for h in eff_into[x]:
                fh = comp[(f, h)]
                if any(comp[(g, i)] == fh for i in c.hom(c.dom(h), z)):
                    found = True
                    break
            if not found:
                return PredicateResult(False, (g, f), "no effective epi completes the square")
    return PredicateResult(True)


def is_finitary_extensive(c: FinCat, require_all_coproducts: bool = False) -> PredicateResult:
    """Initial object, pullbacks along coprojections, and the van Kampen biconditional.

    Binary coproducts are quantified over those that exist unless
    ``require_all_coproducts`` is set; truncated categories such as the
    skeleton of sets of size at most n can never have all of them.
    """
    if find_initial(c) is None:
        return PredicateResult(False, (), "no initial object")
    coproducts = []
    for x in c.objects:
        for y in range(x, c.object_count):
            w = find_binary_coproduct(c, x, y)
            if w is not None:
                coproducts.append(w)
            elif require_all_coproducts:
                return PredicateResult(False, (x, y), "binary coproduct missing")
    for w in coproducts:
        for leg in w.legs:
            for z in c.morphisms_into(w.apex):
                if find_pullback(c, z, leg) is None:
                    return PredicateResult(False, (z, leg), "pullback along coprojection missing")
    comp = c.compose_table
    for w in coproducts:
        (x, y), (i1, i2) = w.of, w.legs
        cop_cache: dict = {}
        for z in c.morphisms_into(w.apex):
            zo = c.dom(z)
            sides = []
            for base, leg in ((x, i1), (y, i2)):
                squares = []
                for z1 in c.objects:
                    for a in c.hom(z1, zo):
                        za = comp[(z, a)]
                        for b in c.hom(z1, base):
                            if comp[(leg, b)] == za:
                                squares.append((a, b, is_pullback_cone(c, z, leg, a, b)))
                sides.append(squares)
            for a1, b1, pb1 in sides[0]:
                for a2, b2, pb2 in sides[1]:
                    key = (a1, a2)
                    if key not in cop_cache:
                        cop_cache[key] = exhibits_coproduct(c, zo, (a1, a2))
                    if (pb1 and pb2) != cop_cache[key]:
                        return PredicateResult(False, (z, a1, b1, a2, b2), "van Kampen condition fails")
    return PredicateResult(True)


@lru_cache(maxsize=256)
def effective_presieves(c: FinCat, x: int, cap: int | None = None) -> tuple[int, ...]:
    return tuple(m for m in presieve_masks(c, x, cap) if is_effective_epi_family_mask(c, x, m))


@lru_cache(maxsize=256)
def coproduct_presieves(c: FinCat, x: int, cap: int | None = None) -> tuple[int, ...]:
    out = []
    for m in presieve_masks(c, x, cap):
        if exhibits_coproduct(c, x, mask_members(m)):
            out.append(m)
    return tuple(out)


@lru_cache(maxsize=256)
def effective_sieves(c: FinCat, x: int, cap: int | None = None) -> tuple[int, ...]:
    """Sieves on x that are effective epimorphic when read as families."""
    return tuple(s for s in sieve_masks(c, x, cap) if is_effective_epi_family_mask(c, x, s))


def is_precoherent(c: FinCat, cap: int | None = None, method: str = "sieves") -> PredicateResult:
    """Every pullback of a finite effective epimorphic presieve is refined by one.

    A presieve is effective exactly when the sieve it generates is, so the
    default method quantifies over sieves; ``method="presieves"`` runs the
    literal search over every subset of morphisms instead.
    """
    if method == "presieves":
        eff = [effective_presieves(c, x, cap) for x in c.objects]
    elif method == "sieves":
        eff = [effective_sieves(c, x, cap) for x in c.objects]
    else:
        raise ValueError(f"unknown method {method!r}")
    for b in c.objects:
        seen = set()
        for fam in eff[b]:
            s = generate_mask(c, fam)
            if s in seen:
                continue
            seen.add(s)
            for f in c.morphisms_into(b):
                allowed = pullback_mask(c, f, s)
                if not any(e & ~allowed == 0 for e in eff[c.dom(f)]):
                    return PredicateResult(False, (fam, f), "no effective family refines the pullback")
    return PredicateResult(True)


# -- the three coverages -------------------------------------------------------


def regular_coverage(c: FinCat) -> Coverage:
    if not is_preregular(c):
        raise NotPreregular(f"{c.name} is not preregular")
    eff = effective_epis(c)
    return Coverage(
        c, tuple(frozenset(1 << f for f in c.morphisms_into(x) if f in eff) for x in c.objects), name="regular"
    )


def extensive_coverage(c: FinCat, cap: int | None = None) -> Coverage:
    verdict = is_finitary_extensive(c)
    if not verdict:
        raise NotExtensive(f"{c.name} is not finitary extensive: {verdict.reason}")
    cov = Coverage(c, tuple(frozenset(coproduct_presieves(c, x, cap)) for x in c.objects), name="extensive")
    report = check_coverage(cov)
    if not report:
        raise NotExtensive(f"coproduct presieves of {c.name} do not form a coverage: {report.violations[0]}")
    return cov


def coherent_coverage(c: FinCat, cap: int | None = None) -> Coverage:
    if not is_precoherent(c, cap):
        raise NotPrecoherent(f"{c.name} is not precoherent")
    return Coverage(c, tuple(frozenset(effective_presieves(c, x, cap)) for x in c.objects), name="coherent")


def named_coverage(c: FinCat, kind: str, cap: int | None = None) -> Coverage:
    if kind == "regular":
        return regular_coverage(c)
    if kind == "extensive":
        return extensive_coverage(c, cap)
    if kind == "coherent":
        return coherent_coverage(c, cap)
    if kind == "union":
        return regular_coverage(c).union(extensive_coverage(c, cap))
    if kind in ("empty", "minimal"):
        return empty_coverage(c)
    raise ValueError(f"unknown coverage {kind!r}")


# -- direct characterizations ----------------------------------------------------


def _containing(c: FinCat, x: int, generators: Iterable[int], cap) -> list[Sieve]:
    gens = list(generators)
    return [Sieve(c, x, s) for s in sieve_masks(c, x, cap) if any(g & ~s == 0 for g in gens)]


def regular_covering_sieves(c: FinCat, x: int, cap: int | None = None) -> list[Sieve]:
    """Sieves on x containing an effective epimorphism."""
    if not is_preregular(c):
        raise NotPreregular(f"{c.name} is not preregular")
    eff = effective_epis(c)
    return _containing(c, x, (1 << f for f in c.morphisms_into(x) if f in eff), cap)


def extensive_covering_sieves(c: FinCat, x: int, cap: int | None = None) -> list[Sieve]:
    """Sieves on x containing a family exhibiting x as a coproduct."""
    if not is_finitary_extensive(c):
        raise NotExtensive(f"{c.name} is not finitary extensive")
    return _containing(c, x, coproduct_presieves(c, x, cap), cap)


def coherent_covering_sieves(c: FinCat, x: int, cap: int | None = None) -> list[Sieve]:
    """Sieves on x containing a finite effective epimorphic family."""
    if not is_precoherent(c, cap):
        raise NotPrecoherent(f"{c.name} is not precoherent")
    return _containing(c, x, effective_presieves(c, x, cap), cap)


def direct_topology(c: FinCat, kind: str, cap: int | None = None) -> GrothTopology:
    fn = {
        "regular": regular_covering_sieves,
        "extensive": extensive_covering_sieves,
        "coherent": coherent_covering_sieves,
    }[kind]
    return GrothTopology(
        c, tuple(frozenset(s.mask for s in fn(c, x, cap)) for x in c.objects), name=f"direct-{kind}"
    )
