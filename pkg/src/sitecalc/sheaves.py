"""Sheaf conditions for finite presheaves, plus bounded presheaf enumeration.

A presheaf is a sheaf for a presieve exactly when sending an element to
its induced family is a bijection onto the compatible families. The
checker counts compatible families by a constrained depth-first search
and stops as soon as the count exceeds the carrier, so it rarely walks
the whole family space.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Iterator, Optional, Sequence

from . import config
from .errors import BudgetExceeded, MissingPullback, NoKernelPair, NotExtensive, TypeMismatch
from .fincat import FinCat, Presheaf, mask_members
from .limits import ConeWitness, find_binary_coproduct, find_initial, find_pullback
from .sieves import Presieve


@dataclass(frozen=True)
class FamilyOfElements:
    """``values[i]`` is the element of ``F(dom f_i)`` chosen for the i-th member (ascending id)."""

    presieve: Presieve
    values: tuple[int, ...]

    def __post_init__(self):
        if len(self.values) != len(self.presieve):
            raise TypeMismatch("a family assigns exactly one element per presieve member")

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.presieve.members, self.values))


def _square_checks(c: FinCat, members: Sequence[int]) -> list[list[tuple[int, int, int]]]:
    """Per member k, checks ``(g, k0, g0)``: ``F(g)(x_k)`` must equal ``F(g0)(x_k0)``.

    Commutative squares over the presieve are grouped by their common
    diagonal; agreeing with the first entry of each group is equivalent
    to agreeing on every square.
    """
    comp = c.compose_table
    buckets: dict[int, tuple[int, int]] = {}
    checks: list[list[tuple[int, int, int]]] = [[] for _ in members]
    for k, fk in enumerate(members):
        for g in c.morphisms_into(c.dom(fk)):
            d = comp[(fk, g)]
            if d in buckets:
                k0, g0 = buckets[d]
                checks[k].append((g, k0, g0))
            else:
                buckets[d] = (k, g)
    return checks


def is_compatible(f: Presheaf, fam: FamilyOfElements) -> bool:
    c = f.base
    members = fam.presieve.members
    res = f.restriction
    for k, checks in enumerate(_square_checks(c, members)):
        for g, k0, g0 in checks:
            if res[g][fam.values[k]] != res[g0][fam.values[k0]]:
                return False
    return True


def amalgamations(f: Presheaf, fam: FamilyOfElements) -> list[int]:
    res = f.restriction
    pairs = list(zip(fam.presieve.members, fam.values))
    return [x for x in range(f.carrier[fam.presieve.target]) if all(res[m][x] == v for m, v in pairs)]


def compatible_families(f: Presheaf, p: Presieve) -> Iterator[tuple[int, ...]]:
    """Every compatible family over ``p`` in mixed-radix order of ascending members."""
    c = f.base
    members = p.members
    checks = _square_checks(c, members)
    res = f.restriction
    sizes = [f.carrier[c.dom(m)] for m in members]
    n = len(members)
    current = [0] * n

    def rec(k):
        if k == n:
            yield tuple(current)
            return
        for v in range(sizes[k]):
            current[k] = v
            ok = True
            for g, k0, g0 in checks[k]:
                if res[g][v] != res[g0][current[k0]]:
                    ok = False
                    break
            if ok:
                yield from rec(k + 1)

    yield from rec(0)


def _family_space(f: Presheaf, members: Sequence[int]) -> int:
    total = 1
    for m in members:
        total *= f.carrier[f.base.dom(m)]
    return total


def is_sheaf_for_presieve(f: Presheaf, p: Presieve, budget: Optional[int] = None) -> bool:
    """Every compatible family over ``p`` has exactly one amalgamation."""
    if p.base != f.base:
        raise TypeMismatch("presieve and presheaf live on different categories")
    c = f.base
    x = p.target
    members = p.members
    if c.identity(x) in p:
        return True
    limit = config.family_budget(budget)
    if _family_space(f, members) > limit:
        raise BudgetExceeded(f"family space {_family_space(f, members)} exceeds budget {limit}")
    res = f.restriction
    induced = {tuple(res[m][e] for m in members) for e in range(f.carrier[x])}
    if len(induced) != f.carrier[x]:
        return False
    count = 0
    for fam in compatible_families(f, p):
        count += 1
        if count > f.carrier[x] or fam not in induced:
            return False
    return count == f.carrier[x]


def is_sheaf_for_sieve(f: Presheaf, s: Presieve, budget: Optional[int] = None) -> bool:
    return is_sheaf_for_presieve(f, s, budget)


def is_sheaf_for_topology(f: Presheaf, t, budget: Optional[int] = None) -> bool:
    """Sheaf for every covering sieve of a Grothendieck topology."""
    c = f.base
    for x in c.objects:
        for mask in sorted(t.covering[x]):
            if not is_sheaf_for_presieve(f, Presieve(c, x, mask), budget):
                return False
    return True


def is_sheaf_for_coverage(f: Presheaf, cov, budget: Optional[int] = None) -> bool:
    """Sheaf for every covering presieve of a coverage."""
    return is_sheaf_for_topology(f, cov, budget)


def equalizer_condition(f: Presheaf, pi: int, kp: Optional[ConeWitness]) -> bool:
    """``F(B) -> F(X) ⇉ F(X ×_B X)`` is an equalizer for ``pi: X -> B`` and its kernel pair."""
    if kp is None:
        raise NoKernelPair(f"no kernel pair supplied for {f.base.name_of(pi)}")
    c = f.base
    x, b = c.morphisms[pi]
    p1, p2 = kp.legs
    res = f.restriction
    image = [res[pi][e] for e in range(f.carrier[b])]
    if len(set(image)) != len(image):
        return False
    agree = {y for y in range(f.carrier[x]) if res[p1][y] == res[p2][y]}
    return agree == set(image)


def pullback_diagram_sheaf(f: Presheaf, p: Presieve) -> bool:
    """Sheaf condition through ``F(X) -> ∏ F(X_i) ⇉ ∏ F(X_i ×_X X_j)``.

    Needs every pairwise pullback of the members; raises MissingPullback otherwise.
    """
    c = f.base
    members = p.members
    res = f.restriction
    pairs = []
    for i, fi in enumerate(members):
        for j, fj in enumerate(members):
            w = find_pullback(c, fi, fj)
            if w is None:
                raise MissingPullback(f"{c.name_of(fi)} and {c.name_of(fj)} have no pullback")
            pairs.append((i, j, w.legs[0], w.legs[1]))
    sizes = [range(f.carrier[c.dom(m)]) for m in members]
    equalized = [
        fam for fam in product(*sizes) if all(res[a][fam[i]] == res[b][fam[j]] for i, j, a, b in pairs)
    ]
    induced = [tuple(res[m][e] for m in members) for e in range(f.carrier[p.target])]
    return len(set(induced)) == len(induced) and set(induced) == set(equalized)


@lru_cache(maxsize=64)
def _product_data(c: FinCat) -> tuple[int, tuple[ConeWitness, ...]]:
    from .topology import is_finitary_extensive

    if not is_finitary_extensive(c):
        raise NotExtensive(f"{c.name} is not finitary extensive")
    witnesses = []
    for x in c.objects:
        for y in range(x, c.object_count):
            w = find_binary_coproduct(c, x, y)
            if w is not None:
                witnesses.append(w)
    return find_initial(c), tuple(witnesses)


def preserves_finite_products(f: Presheaf) -> bool:
    """``F(initial)`` is a point and ``F(X ⊔ Y) -> F(X) × F(Y)`` is a bijection for each pair."""
    initial, witnesses = _product_data(f.base)
    if f.carrier[initial] != 1:
        return False
    res = f.restriction
    for w in witnesses:
        x, y = w.of
        i1, i2 = w.legs
        pairs = {(res[i1][z], res[i2][z]) for z in range(f.carrier[w.apex])}
        if f.carrier[w.apex] != f.carrier[x] * f.carrier[y] or len(pairs) != f.carrier[w.apex]:
            return False
    return True


# -- enumeration and isomorphism -------------------------------------------------


def _triples_by_last(c: FinCat) -> list[list[tuple[int, int, int]]]:
    """Composition entries ``(g, f, h)`` filed under the largest id they mention."""
    out: list[list[tuple[int, int, int]]] = [[] for _ in range(c.morphism_count)]
    for (g, f), h in c.compose_table.items():
        out[max(g, f, h)].append((g, f, h))
    return out


def enumerate_presheaves(c: FinCat, max_carrier: int, budget: Optional[int] = None) -> Iterator[Presheaf]:
    """Every presheaf with all carriers at most ``max_carrier``, in canonical order.

    Order: carrier tuples lexicographically, then restriction tables by
    ascending morphism id and lexicographic value tuple.
    """
    limit = config.census_budget(budget)
    triples = _triples_by_last(c)
    identities = set(c.identity_of)
    steps = 0
    for carrier in product(range(max_carrier + 1), repeat=c.object_count):
        tables: list[Optional[tuple[int, ...]]] = [None] * c.morphism_count

        def consistent(m):
            for g, f, h in triples[m]:
                tg, tf, th = tables[g], tables[f], tables[h]
                if any(th[y] != tf[tg[y]] for y in range(len(th))):
                    return False
            return True

        def rec(m):
            nonlocal steps
            if m == c.morphism_count:
                yield Presheaf(c, carrier, tuple(tables))
                return
            d, cd = c.morphisms[m]
            if m in identities:
                options: Iterable = (tuple(range(carrier[d])),)
            else:
                options = product(range(carrier[d]), repeat=carrier[cd])
            for table in options:
                steps += 1
                if steps > limit:
                    raise BudgetExceeded(f"presheaf enumeration exceeded {limit} steps")
                tables[m] = table
                if consistent(m):
                    yield from rec(m + 1)
            tables[m] = None

        yield from rec(0)


def relabel(f: Presheaf, perms: Sequence[Sequence[int]]) -> Presheaf:
    """Transport along bijections: element e of ``F(X)`` becomes ``perms[X][e]``."""
    c = f.base
    tables = []
    for m, table in enumerate(f.restriction):
        d, cd = c.morphisms[m]
        new = [0] * len(table)
        for y, v in enumerate(table):
            new[perms[cd][y]] = perms[d][v]
        tables.append(tuple(new))
    return Presheaf(c, f.carrier, tuple(tables), name=f.name)


def canonical_form(f: Presheaf) -> tuple:
    """Least restriction data over all per-object relabellings; equal iff isomorphic."""
    best = None
    for perms in product(*(list(permutations(range(n))) for n in f.carrier)):
        key = relabel(f, perms).restriction
        if best is None or key < best:
            best = key
    return (f.carrier, best)


def are_isomorphic(f: Presheaf, g: Presheaf) -> bool:
    if f.base != g.base or f.carrier != g.carrier:
        return False
    return canonical_form(f) == canonical_form(g)


def find_isomorphism(f: Presheaf, g: Presheaf) -> Optional[tuple[tuple[int, ...], ...]]:
    """Per-object bijections carrying ``f`` onto ``g``, or None."""
    if f.carrier != g.carrier:
        return None
    for perms in product(*(list(permutations(range(n))) for n in f.carrier)):
        if relabel(f, perms).restriction == g.restriction:
            return tuple(perms)
    return None


def census(c: FinCat, max_carrier: int, keep, budget: Optional[int] = None) -> list[Presheaf]:
    """Isomorphism classes of presheaves passing ``keep``, as canonical representatives."""
    classes: dict[tuple, Presheaf] = {}
    for p in enumerate_presheaves(c, max_carrier, budget):
        key = canonical_form(p)
        if key in classes:
            continue
        if keep(p):
            classes[key] = Presheaf(c, key[0], key[1])
    return [classes[k] for k in sorted(classes)]


def sheaf_census(c: FinCat, site, max_carrier: int = 2, budget: Optional[int] = None) -> list[Presheaf]:
    """Sheaves for ``site`` (a topology or a coverage) with carriers at most ``max_carrier``."""
    return census(c, max_carrier, lambda p: is_sheaf_for_topology(p, site, budget), budget)


def describe_family(c: FinCat, p: Presieve, values: Sequence[int]) -> str:
    return " ".join(f"{c.name_of(m)}:{v}" for m, v in zip(mask_members(p.mask), values))
