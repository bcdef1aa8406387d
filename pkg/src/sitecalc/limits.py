"""Brute-force (co)limit detection and epimorphism classification.

Every universal property is decided by counting: a candidate cone is
universal exactly when, for each test object, the mediating-map
assignment is a bijection onto the competing cones. Witnesses record the
mediator found for every competitor so a failure can be replayed.

Ties between isomorphic solutions are broken by least apex id, then
lexicographically least leg ids.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Mapping, Optional, Sequence

from .fincat import FinCat, mask_members
from .sieves import Presieve


@dataclass(frozen=True)
class ConeWitness:
    """A certified (co)limit cone.

    ``shape`` is one of ``initial``, ``binary-coproduct``, ``coproduct``,
    ``pullback``, ``coequalizer`` or ``kernel-pair``; ``of`` holds the
    objects or morphisms the shape is taken of. ``mediators`` maps each
    competing cone, written ``(test_object, *legs)``, to its unique
    mediating morphism.
    """

    shape: str
    apex: int
    legs: tuple[int, ...]
    of: tuple[int, ...]
    mediators: Mapping[tuple[int, ...], int] = field(default_factory=dict, compare=False, repr=False)

    def mediator(self, cone: Sequence[int]) -> int:
        return self.mediators[tuple(cone)]


@dataclass(frozen=True)
class EpiClass:
    morphism: int
    is_epi: bool
    is_regular_epi: bool
    is_effective_epi: bool
    has_kernel_pair: bool
    kernel_pair: Optional[ConeWitness] = None


# -- cocone checks -------------------------------------------------------


def coproduct_mediators(c: FinCat, apex: int, legs: Sequence[int]) -> Optional[dict]:
    """Mediators if ``legs`` (all into ``apex``) exhibit it as coproduct of their domains."""
    doms = [c.dom(l) for l in legs]
    comp = c.compose_table
    mediators = {}
    for w in c.objects:
        homs = c.hom(apex, w)
        expected = 1
        for d in doms:
            expected *= len(c.hom(d, w))
        if len(homs) != expected:
            return None
        seen = {}
        for d in homs:
            key = tuple(comp[(d, l)] for l in legs)
            if key in seen:
                return None
            seen[key] = d
        for key, d in seen.items():
            mediators[(w,) + key] = d
    return mediators


def exhibits_coproduct(c: FinCat, apex: int, legs: Sequence[int]) -> bool:
    return coproduct_mediators(c, apex, legs) is not None


def find_initial(c: FinCat) -> Optional[int]:
    for i in c.objects:
        if all(len(c.hom(i, w)) == 1 for w in c.objects):
            return i
    return None


def initial_witness(c: FinCat) -> Optional[ConeWitness]:
    i = find_initial(c)
    if i is None:
        return None
    return ConeWitness("initial", i, (), (), {(w,): c.hom(i, w)[0] for w in c.objects})


def find_coproduct(c: FinCat, objects: Sequence[int]) -> Optional[ConeWitness]:
    """Coproduct of any finite list of objects; the empty list asks for an initial object."""
    objects = tuple(objects)
    for apex in c.objects:
        ok = True
        for w in c.objects:
            expected = 1
            for x in objects:
                expected *= len(c.hom(x, w))
            if len(c.hom(apex, w)) != expected:
                ok = False
                break
        if not ok:
            continue
        for legs in product(*(c.hom(x, apex) for x in objects)):
            med = coproduct_mediators(c, apex, legs)
            if med is not None:
                shape = "binary-coproduct" if len(objects) == 2 else "coproduct"
                return ConeWitness(shape, apex, tuple(legs), objects, med)
    return None


def find_binary_coproduct(c: FinCat, x: int, y: int) -> Optional[ConeWitness]:
    return find_coproduct(c, (x, y))


# -- limits ----------------------------------------------------------------


def _pullback_competitors(c: FinCat, f: int, g: int, q: int) -> int:
    comp = c.compose_table
    left = Counter(comp[(f, a)] for a in c.hom(q, c.dom(f)))
    right = Counter(comp[(g, b)] for b in c.hom(q, c.dom(g)))
    return sum(left[k] * right[k] for k in left)


def pullback_mediators(c: FinCat, f: int, g: int, apex: int, p1: int, p2: int) -> Optional[dict]:
    comp = c.compose_table
    if comp[(f, p1)] != comp[(g, p2)]:
        return None
    mediators = {}
    for q in c.objects:
        homs = c.hom(q, apex)
        if len(homs) != _pullback_competitors(c, f, g, q):
            return None
        seen = {}
        for m in homs:
            key = (comp[(p1, m)], comp[(p2, m)])
            if key in seen:
                return None
            seen[key] = m
        for key, m in seen.items():
            mediators[(q,) + key] = m
    return mediators


def is_pullback_cone(c: FinCat, f: int, g: int, p1: int, p2: int) -> bool:
    return pullback_mediators(c, f, g, c.dom(p1), p1, p2) is not None


def find_pullback(c: FinCat, f: int, g: int, shape: str = "pullback") -> Optional[ConeWitness]:
    if c.cod(f) != c.cod(g):
        return None
    x, y = c.dom(f), c.dom(g)
    counts = [_pullback_competitors(c, f, g, q) for q in c.objects]
    comp = c.compose_table
    for apex in c.objects:
        if any(len(c.hom(q, apex)) != counts[q] for q in c.objects):
            continue
        for p1 in c.hom(apex, x):
            fp1 = comp[(f, p1)]
            for p2 in c.hom(apex, y):
                if comp[(g, p2)] != fp1:
                    continue
                med = pullback_mediators(c, f, g, apex, p1, p2)
                if med is not None:
                    return ConeWitness(shape, apex, (p1, p2), (f, g), med)
    return None


def kernel_pair(c: FinCat, f: int) -> Optional[ConeWitness]:
    return find_pullback(c, f, f, shape="kernel-pair")


def _coequalizing(c: FinCat, g1: int, g2: int, w: int) -> list[int]:
    comp = c.compose_table
    return [e for e in c.hom(c.cod(g1), w) if comp[(e, g1)] == comp[(e, g2)]]


def coequalizer_mediators(c: FinCat, g1: int, g2: int, q: int) -> Optional[dict]:
    comp = c.compose_table
    if comp[(q, g1)] != comp[(q, g2)]:
        return None
    apex = c.cod(q)
    mediators = {}
    for w in c.objects:
        homs = c.hom(apex, w)
        if len(homs) != len(_coequalizing(c, g1, g2, w)):
            return None
        seen = {}
        for d in homs:
            key = comp[(d, q)]
            if key in seen:
                return None
            seen[key] = d
        for key, d in seen.items():
            mediators[(w, key)] = d
    return mediators


def find_coequalizer(c: FinCat, g1: int, g2: int) -> Optional[ConeWitness]:
    if c.morphisms[g1] != c.morphisms[g2]:
        return None
    y = c.cod(g1)
    counts = [len(_coequalizing(c, g1, g2, w)) for w in c.objects]
    for apex in c.objects:
        if any(len(c.hom(apex, w)) != counts[w] for w in c.objects):
            continue
        for q in c.hom(y, apex):
            med = coequalizer_mediators(c, g1, g2, q)
            if med is not None:
                return ConeWitness("coequalizer", apex, (q,), (g1, g2), med)
    return None


# -- epimorphisms ----------------------------------------------------------


def is_epi(c: FinCat, f: int) -> bool:
    """Right-cancellable: ``h1∘f = h2∘f`` forces ``h1 = h2``."""
    comp = c.compose_table
    x = c.cod(f)
    for w in c.objects:
        homs = c.hom(x, w)
        if len({comp[(h, f)] for h in homs}) != len(homs):
            return False
    return True


def _coequalized_groups(c: FinCat, f: int) -> list[tuple[int, ...]]:
    """Classes of morphisms into ``dom f`` (per source) with equal composite with f.

    Every pair within a class is a pair that f coequalizes, and nothing else is.
    """
    comp = c.compose_table
    y = c.dom(f)
    groups = []
    for z in c.objects:
        by_image: dict[int, list[int]] = {}
        for g in c.hom(z, y):
            by_image.setdefault(comp[(f, g)], []).append(g)
        groups.extend(tuple(v) for v in by_image.values() if len(v) > 1)
    return groups


def is_effective_epi(c: FinCat, f: int) -> bool:
    """Every e coequalizing what f coequalizes factors uniquely as ``d∘f``."""
    comp = c.compose_table
    y, x = c.morphisms[f]
    groups = _coequalized_groups(c, f)
    for w in c.objects:
        factorizations = Counter(comp[(d, f)] for d in c.hom(x, w))
        for e in c.hom(y, w):
            if all(len({comp[(e, g)] for g in grp}) == 1 for grp in groups):
                if factorizations[e] != 1:
                    return False
    return True


def regular_epi_witness(c: FinCat, f: int) -> Optional[tuple[int, int]]:
    """A pair ``(g1, g2)`` whose coequalizer is f, or None."""
    if not is_epi(c, f):
        return None
    comp = c.compose_table
    y, x = c.morphisms[f]
    target_counts = [len(c.hom(x, w)) for w in c.objects]
    for z in c.objects:
        homs = c.hom(z, y)
        for i, g1 in enumerate(homs):
            for g2 in homs[i:]:
                if comp[(f, g1)] != comp[(f, g2)]:
                    continue
                if all(len(_coequalizing(c, g1, g2, w)) == target_counts[w] for w in c.objects):
                    return (g1, g2)
    return None


def is_regular_epi(c: FinCat, f: int) -> bool:
    return regular_epi_witness(c, f) is not None


def classify_epi(c: FinCat, f: int) -> EpiClass:
    kp = kernel_pair(c, f)
    return EpiClass(
        morphism=f,
        is_epi=is_epi(c, f),
        is_regular_epi=is_regular_epi(c, f),
        is_effective_epi=is_effective_epi(c, f),
        has_kernel_pair=kp is not None,
        kernel_pair=kp,
    )


@lru_cache(maxsize=64)
def effective_epis(c: FinCat) -> frozenset[int]:
    return frozenset(f for f in range(c.morphism_count) if is_effective_epi(c, f))


# -- effective epimorphic families -------------------------------------------


def _family_constraints(c: FinCat, members: Sequence[int]) -> list[list[tuple[int, int, int]]]:
    """Per member k, the checks ``(g, k0, g0)`` meaning ``e_k∘g == e_k0∘g0`` (k0 <= k).

    Pairs (g_i, g_j) coequalized by the family are grouped by their common
    composite; agreement with the earliest entry of each group is
    equivalent to agreement on every coequalized pair.
    """
    comp = c.compose_table
    buckets: dict[int, list[tuple[int, int]]] = {}
    for k, fk in enumerate(members):
        for g in c.morphisms_into(c.dom(fk)):
            buckets.setdefault(comp[(fk, g)], []).append((k, g))
    checks: list[list[tuple[int, int, int]]] = [[] for _ in members]
    for entries in buckets.values():
        k0, g0 = entries[0]
        for k, g in entries[1:]:
            checks[k].append((g, k0, g0))
    return checks


def _compatible_assignments(c: FinCat, members: Sequence[int], w: int, checks):
    """Yield every coequalizing assignment ``(e_i: dom f_i -> w)`` in mixed-radix order."""
    comp = c.compose_table
    choices = [c.hom(c.dom(f), w) for f in members]
    n = len(members)
    current = [0] * n

    def rec(k):
        if k == n:
            yield tuple(current)
            return
        for e in choices[k]:
            current[k] = e
            ok = True
            for g, k0, g0 in checks[k]:
                if comp[(e, g)] != comp[(current[k0], g0)]:
                    ok = False
                    break
            if ok:
                yield from rec(k + 1)

    yield from rec(0)


def is_effective_epi_family_mask(c: FinCat, target: int, mask: int) -> bool:
    members = mask_members(mask)
    comp = c.compose_table
    checks = _family_constraints(c, members)
    for w in c.objects:
        descents = Counter(tuple(comp[(d, f)] for f in members) for d in c.hom(target, w))
        for e in _compatible_assignments(c, members, w, checks):
            if descents[e] != 1:
                return False
    return True


def is_effective_epi_family(c: FinCat, fam: Presieve) -> bool:
    """Every coequalizing family ``(e_i)`` descends along a unique ``d`` out of the target."""
    return is_effective_epi_family_mask(c, fam.target, fam.mask)


def effective_family_via_sheaf(c: FinCat, fam: Presieve) -> bool:
    """Same predicate, decided as: every representable is a sheaf for the generated sieve."""
    from .fincat import representable
    from .sheaves import is_sheaf_for_sieve
    from .sieves import generate

    sieve = generate(fam)
    return all(is_sheaf_for_sieve(representable(c, w), sieve) for w in c.objects)


def copairing(c: FinCat, witness: ConeWitness, maps: Sequence[int]) -> int:
    """The morphism out of a certified coproduct restricting to ``maps`` on the legs."""
    if not maps:
        raise ValueError("copairing of an empty family has no target; read the mediator table")
    return witness.mediator((c.cod(maps[0]), *maps))


def is_projective(c: FinCat, p: int) -> bool:
    """Every morphism out of ``p`` lifts along every epimorphism with the same target."""
    comp = c.compose_table
    for e in range(c.morphism_count):
        if not is_epi(c, e):
            continue
        a, b = c.morphisms[e]
        reachable = {comp[(e, l)] for l in c.hom(p, a)}
        if any(q not in reachable for q in c.hom(p, b)):
            return False
    return True
