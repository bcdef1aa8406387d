"""Builtin categories: finite sets, finite topological spaces, posets, monoids.

Concrete generators return a model that keeps the underlying functions
next to the category, so tests can compare categorical predicates with
set-level facts such as surjectivity.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional, Sequence

from .. import config
from ..errors import CapExceeded, ValidationError
from ..fincat import FinCat, FinFunctor, build_category, validate_category


@dataclass(frozen=True, eq=False)
class ConcreteModel:
    """A category of functions between finite carriers.

    ``sizes[x]`` is the cardinality of object x; ``functions[f]`` is the
    value tuple of morphism f. ``opens`` is filled only for spaces.
    """

    category: FinCat
    sizes: tuple[int, ...]
    functions: tuple[tuple[int, ...], ...]
    opens: tuple[frozenset[int], ...] = ()

    def is_surjective(self, f: int) -> bool:
        return set(self.functions[f]) == set(range(self.sizes[self.category.cod(f)]))

    def is_injective(self, f: int) -> bool:
        vals = self.functions[f]
        return len(set(vals)) == len(vals)

    def final_topology(self, f: int) -> frozenset[int]:
        """Subsets U of the codomain whose preimage under f is open."""
        d, cd = self.category.morphisms[f]
        fn = self.functions[f]
        return frozenset(u for u in range(1 << self.sizes[cd]) if _preimage(fn, u) in self.opens[d])

    def is_quotient_map(self, f: int) -> bool:
        cd = self.category.cod(f)
        return self.is_surjective(f) and self.final_topology(f) == self.opens[cd]

    def morphism_by_function(self, dom: int, cod: int, fn: Sequence[int]) -> int:
        return self._index[(dom, cod, tuple(fn))]

    @property
    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {(d, cd, fn): f for f, ((d, cd), fn) in enumerate(zip(self.category.morphisms, self.functions))}
            object.__setattr__(self, "_idx", idx)
        return idx


def _preimage(fn: Sequence[int], u: int) -> int:
    out = 0
    for i, v in enumerate(fn):
        if u >> v & 1:
            out |= 1 << i
    return out


def _digits(fn: Sequence[int]) -> str:
    return "".join(map(str, fn)) if fn else "e"


def _concrete(
    object_names: Sequence[str],
    sizes: Sequence[int],
    homs: dict[tuple[int, int], list[tuple[int, ...]]],
    morphism_name,
    name: str,
    opens: Sequence[frozenset[int]] = (),
) -> ConcreteModel:
    n = len(sizes)
    total = sum(len(v) for v in homs.values())
    if total > config.MAX_MORPHISMS:
        raise CapExceeded(f"{total} morphisms exceeds cap {config.MAX_MORPHISMS}")
    entries: list[tuple[str, int, int]] = []
    functions: list[tuple[int, ...]] = []
    index: dict[tuple[int, int, tuple[int, ...]], int] = {}
    identities = [0] * n
    for x in range(n):
        for y in range(n):
            for fn in homs.get((x, y), ()):
                index[(x, y, fn)] = len(entries)
                if x == y and fn == tuple(range(sizes[x])):
                    identities[x] = len(entries)
                    entries.append((f"id_{object_names[x]}", x, y))
                else:
                    entries.append((morphism_name(x, y, fn), x, y))
                functions.append(fn)

    def compose(g, f):
        fg = tuple(functions[g][v] for v in functions[f])
        return index[(entries[f][1], entries[g][2], fg)]

    c = build_category(object_names, entries, identities, compose, name=name)
    return ConcreteModel(c, tuple(sizes), tuple(functions), tuple(opens))


# -- finite sets ---------------------------------------------------------------------


def finset_skeleton_model(n: int) -> ConcreteModel:
    if n < 0:
        raise ValueError("n must be nonnegative")
    sizes = list(range(n + 1))
    homs = {(m, k): list(product(range(k), repeat=m)) for m in sizes for k in sizes}
    return _concrete(
        [str(m) for m in sizes], sizes, homs, lambda m, k, fn: f"s{m}_{k}_{_digits(fn)}", name=f"FinSet_skel({n})"
    )


def gen_finset_skeleton(n: int) -> FinCat:
    """Skeleton of finite sets of size at most n; functions listed lexicographically per hom-set."""
    return finset_skeleton_model(n).category


FULL_SETS: tuple[tuple[int, ...], ...] = ((), (0,), (0, 1), (5,), (3, 7))


def _set_name(s: Sequence[int]) -> str:
    return "S" + ("".join(map(str, s)) if s else "_")


def finset_full_model(sets: Sequence[Sequence[int]] = FULL_SETS) -> ConcreteModel:
    """Full category on chosen finite sets; functions act on positions of sorted elements."""
    sets = [tuple(sorted(s)) for s in sets]
    names = [_set_name(s) for s in sets]
    sizes = [len(s) for s in sets]
    homs = {
        (x, y): list(product(range(sizes[y]), repeat=sizes[x])) for x in range(len(sets)) for y in range(len(sets))
    }

    def mname(x, y, fn):
        return f"{names[x]}_{names[y]}_{_digits(fn)}"

    return _concrete(names, sizes, homs, mname, name="FinSet_full")


def gen_finset_full(sets: Sequence[Sequence[int]] = FULL_SETS) -> FinCat:
    return finset_full_model(sets).category


def concrete_inclusion(source: ConcreteModel, target: ConcreteModel, object_map: Sequence[int], name="incl") -> FinFunctor:
    """The functor sending each function to the same value tuple between the mapped objects."""
    c = source.category
    morphism_map = []
    for f, fn in enumerate(source.functions):
        d, cd = c.morphisms[f]
        morphism_map.append(target.morphism_by_function(object_map[d], object_map[cd], fn))
    return FinFunctor(c, target.category, tuple(object_map), tuple(morphism_map), name=name)


def skeleton_inclusion(n: int = 2, sets: Sequence[Sequence[int]] = FULL_SETS) -> FinFunctor:
    """Inclusion of the skeleton of size at most n into the full category on ``sets``.

    Object k goes to the set {0..k-1}, which must be among ``sets``.
    """
    src = finset_skeleton_model(n)
    tgt = finset_full_model(sets)
    canon = [tuple(sorted(s)) for s in sets]
    try:
        object_map = [canon.index(tuple(range(k))) for k in range(n + 1)]
    except ValueError:
        raise ValidationError(f"sets must contain {{0..k-1}} for every k <= {n}") from None
    return concrete_inclusion(src, tgt, object_map, name="skel")


# -- finite topological spaces ----------------------------------------------------------


def topologies_on(m: int) -> list[frozenset[int]]:
    """All topologies on range(m), each a set of open subsets as bitmasks, canonically sorted."""
    full = (1 << m) - 1
    subsets = range(1 << m)
    found = []
    for fam in range(1 << (1 << m)):
        opens = [s for s in subsets if fam >> s & 1]
        if not (fam & 1 and fam >> full & 1):
            continue
        ss = set(opens)
        if all((a | b) in ss and (a & b) in ss for a in opens for b in opens):
            found.append(frozenset(opens))
    return sorted(found, key=lambda t: (len(t), sorted(t)))


def fintop_model(n: int) -> ConcreteModel:
    """All topologies on sets of size at most n, not identified up to homeomorphism."""
    if n > 3:
        raise CapExceeded("finite spaces are generated for at most 3 points")
    spaces = [(m, t) for m in range(n + 1) for t in topologies_on(m)]
    names = []
    for m in range(n + 1):
        names.extend(f"T{m}_{i}" for i in range(sum(1 for s in spaces if s[0] == m)))
    homs = {}
    for x, (m, tx) in enumerate(spaces):
        for y, (k, ty) in enumerate(spaces):
            homs[(x, y)] = [fn for fn in product(range(k), repeat=m) if all(_preimage(fn, u) in tx for u in ty)]
    return _concrete(
        names,
        [m for m, _ in spaces],
        homs,
        lambda x, y, fn: f"c{x}_{y}_{_digits(fn)}",
        name=f"FinTop({n})",
        opens=[t for _, t in spaces],
    )


def gen_fintop(n: int) -> FinCat:
    return fintop_model(n).category


# -- posets, monoids and small shapes ------------------------------------------------------


def gen_poset(size: int, leq: Iterable[tuple[int, int]], names: Optional[Sequence[str]] = None, name="P") -> FinCat:
    """Thin category of a partial order given as a set of pairs ``(i, j)`` meaning i <= j."""
    rel = set(leq)
    problems = []
    for i in range(size):
        if (i, i) not in rel:
            problems.append(f"not reflexive at {i}")
    for i, j in rel:
        if not (0 <= i < size and 0 <= j < size):
            problems.append(f"pair ({i}, {j}) out of range")
        elif i != j and (j, i) in rel:
            problems.append(f"not antisymmetric at ({i}, {j})")
    for i, j in rel:
        for k, l in rel:
            if j == k and (i, l) not in rel:
                problems.append(f"not transitive at ({i}, {j}, {l})")
    if problems:
        raise ValidationError("; ".join(sorted(set(problems))))
    names = list(names) if names else [f"x{i}" for i in range(size)]
    pairs = sorted(rel)
    index = {p: k for k, p in enumerate(pairs)}
    entries = [(f"id_{names[i]}" if i == j else f"{names[i]}_{names[j]}", i, j) for i, j in pairs]
    identities = [index[(i, i)] for i in range(size)]
    return build_category(names, entries, identities, lambda g, f: index[(pairs[f][0], pairs[g][1])], name=name)


def chain(n: int) -> FinCat:
    return gen_poset(n, {(i, j) for i in range(n) for j in range(i, n)}, name=f"chain({n})")


def walking_arrow() -> FinCat:
    """Objects a, b and one non-identity arrow f: a -> b."""
    entries = [("id_a", 0, 0), ("f", 0, 1), ("id_b", 1, 1)]
    table = {(0, 0): 0, (1, 0): 1, (2, 1): 1, (2, 2): 2}
    return build_category(["a", "b"], entries, [0, 2], lambda g, f: table[(g, f)], name="walking_arrow")


def trivial_category() -> FinCat:
    return build_category(["*"], [("id_*", 0, 0)], [0], lambda g, f: 0, name="trivial")


def gen_monoid(table: Sequence[Sequence[int]], name="M") -> FinCat:
    """One-object category of a monoid; ``table[a][b]`` is the product a·b, composed as a∘b."""
    n = len(table)
    if n == 0 or any(len(row) != n for row in table):
        raise ValidationError("multiplication table must be square and nonempty")
    if any(not 0 <= v < n for row in table for v in row):
        raise ValidationError("multiplication table leaves the carrier")
    units = [e for e in range(n) if all(table[e][a] == a == table[a][e] for a in range(n))]
    if not units:
        raise ValidationError("no unit element")
    for a, b, c in product(range(n), repeat=3):
        if table[table[a][b]][c] != table[a][table[b][c]]:
            raise ValidationError(f"not associative at ({a}, {b}, {c})")
    unit = units[0]
    entries = [("id_*" if a == unit else f"m{a}", 0, 0) for a in range(n)]
    c = build_category(["*"], entries, [unit], lambda g, f: table[g][f], name=name)
    validate_category(c).raise_if_failed()
    return c


def cyclic_group(n: int) -> FinCat:
    return gen_monoid([[(a + b) % n for b in range(n)] for a in range(n)], name=f"Z{n}")


def all_monoids(max_order: int = 3) -> list[FinCat]:
    """Every monoid table of order at most ``max_order`` with unit 0 (not deduplicated by isomorphism)."""
    out = []
    for n in range(1, max_order + 1):
        free = [(a, b) for a in range(1, n) for b in range(1, n)]
        for values in product(range(n), repeat=len(free)):
            table = [[b if a == 0 else (a if b == 0 else 0) for b in range(n)] for a in range(n)]
            for (a, b), v in zip(free, values):
                table[a][b] = v
            try:
                out.append(gen_monoid(table, name=f"monoid{n}_{len(out)}"))
            except ValidationError:
                continue
    return out


def random_poset(size: int, seed: int, density: float = 0.4) -> FinCat:
    """Random order: transitive closure of random forward edges on a shuffled ranking."""
    rng = random.Random(seed)
    rank = list(range(size))
    rng.shuffle(rank)
    rel = {(i, i) for i in range(size)}
    for a in range(size):
        for b in range(a + 1, size):
            if rng.random() < density:
                rel.add((rank[a], rank[b]))
    changed = True
    while changed:
        changed = False
        for i, j in list(rel):
            for k, l in list(rel):
                if j == k and (i, l) not in rel:
                    rel.add((i, l))
                    changed = True
    return gen_poset(size, rel, name=f"poset({size},{seed})")


def four_element_poset() -> FinCat:
    """The diamond: bottom < left, right < top."""
    rel = {(i, i) for i in range(4)} | {(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)}
    return gen_poset(4, rel, names=["bot", "l", "r", "top"], name="diamond")


def full_subcategory(c: FinCat, objects: Sequence[int], name: Optional[str] = None) -> FinFunctor:
    """Inclusion functor of the full subcategory on ``objects`` (kept in the given order)."""
    objects = list(objects)
    pos = {x: i for i, x in enumerate(objects)}
    kept = [f for f in range(c.morphism_count) if c.dom(f) in pos and c.cod(f) in pos]
    new_id = {f: i for i, f in enumerate(kept)}
    entries = [(c.name_of(f), pos[c.dom(f)], pos[c.cod(f)]) for f in kept]
    sub = build_category(
        [c.object_name(x) for x in objects],
        entries,
        [new_id[c.identity(x)] for x in objects],
        lambda g, f: new_id[c.compose(kept[g], kept[f])],
        name=name or f"{c.name}|{','.join(c.object_name(x) for x in objects)}",
    )
    return FinFunctor(sub, c, tuple(objects), tuple(kept), name="incl")


def corpus(random_count: int = 12, seed: int = 0) -> list[FinCat]:
    """Builtin test corpus: skeletons, finite spaces, small shapes, posets and monoids."""
    cats = [gen_finset_skeleton(n) for n in range(3)]
    cats += [gen_fintop(n) for n in range(3)]
    cats += [trivial_category(), walking_arrow(), four_element_poset(), chain(3)]
    cats += all_monoids(3)
    cats += [random_poset(2 + i % 4, seed + i) for i in range(random_count)]
    return cats
