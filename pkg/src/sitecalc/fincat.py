"""Finite categories, functors between them, and finite-set-valued presheaves.

Morphisms live in a single global id space; hom-sets are derived views.
Sieves elsewhere in the package are Python ints used as bitsets over that
id space, so several derived masks are cached on :class:`FinCat`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterator, Mapping, Sequence

from . import config
from .errors import AxiomViolation, CapExceeded, CarrierMismatch, MalformedTable


@dataclass(frozen=True)
class Violation:
    law: str
    morphisms: tuple[int, ...]
    detail: str = ""

    def __str__(self):
        ids = " ".join(str(m) for m in self.morphisms)
        text = f"{self.law} [{ids}]"
        return f"{text} {self.detail}" if self.detail else text


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of a ``validate_*`` call: every violated instance, in canonical order."""

    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def raise_if_failed(self, exc=AxiomViolation):
        if self.violations:
            head = "; ".join(str(v) for v in self.violations[:5])
            more = len(self.violations) - 5
            if more > 0:
                head += f"; ... {more} more"
            raise exc(head, self)


@dataclass(frozen=True, eq=False)
class FinCat:
    """A finite category given by an explicit composition table.

    ``compose_table[(g, f)]`` is ``g ∘ f`` and must be present exactly when
    ``cod(f) == dom(g)``. Construction only checks id ranges and size caps;
    use :func:`validate_category` for the category axioms.
    """

    object_count: int
    morphisms: tuple[tuple[int, int], ...]
    identity_of: tuple[int, ...]
    compose_table: Mapping[tuple[int, int], int]
    object_names: tuple[str, ...] = ()
    morphism_names: tuple[str, ...] = ()
    name: str = "C"

    def __post_init__(self):
        n, m = self.object_count, len(self.morphisms)
        if n > config.MAX_OBJECTS:
            raise CapExceeded(f"{n} objects exceeds cap {config.MAX_OBJECTS}")
        if m > config.MAX_MORPHISMS:
            raise CapExceeded(f"{m} morphisms exceeds cap {config.MAX_MORPHISMS}")
        object.__setattr__(self, "morphisms", tuple(tuple(p) for p in self.morphisms))
        object.__setattr__(self, "identity_of", tuple(self.identity_of))
        object.__setattr__(self, "compose_table", dict(self.compose_table))
        for f, (d, c) in enumerate(self.morphisms):
            if not (0 <= d < n and 0 <= c < n):
                raise MalformedTable(f"morphism {f} has endpoint outside 0..{n - 1}")
        if len(self.identity_of) != n:
            raise MalformedTable("identity_of must list one morphism per object")
        for x, i in enumerate(self.identity_of):
            if not 0 <= i < m:
                raise MalformedTable(f"identity of object {x} is out of range: {i}")
        for (g, f), h in self.compose_table.items():
            if not (0 <= g < m and 0 <= f < m and 0 <= h < m):
                raise MalformedTable(f"composition entry ({g}, {f}) -> {h} out of range")
        if not self.object_names:
            object.__setattr__(self, "object_names", tuple(f"o{x}" for x in range(n)))
        if not self.morphism_names:
            object.__setattr__(self, "morphism_names", tuple(f"m{f}" for f in range(m)))
        object.__setattr__(self, "object_names", tuple(self.object_names))
        object.__setattr__(self, "morphism_names", tuple(self.morphism_names))
        if len(self.object_names) != n or len(self.morphism_names) != m:
            raise MalformedTable("name lists do not match object/morphism counts")

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FinCat):
            return NotImplemented
        return (
            self.object_count == other.object_count
            and self.morphisms == other.morphisms
            and self.identity_of == other.identity_of
            and self.compose_table == other.compose_table
            and self.object_names == other.object_names
            and self.morphism_names == other.morphism_names
        )

    def __hash__(self):
        return hash((self.object_count, self.morphisms, self.identity_of))

    def __repr__(self):
        return f"FinCat({self.name!r}, objects={self.object_count}, morphisms={self.morphism_count})"

    @property
    def morphism_count(self) -> int:
        return len(self.morphisms)

    @property
    def objects(self) -> range:
        return range(self.object_count)

    def dom(self, f: int) -> int:
        return self.morphisms[f][0]

    def cod(self, f: int) -> int:
        return self.morphisms[f][1]

    def compose(self, g: int, f: int) -> int:
        """``g ∘ f``; raises ``KeyError`` when the pair is not composable."""
        return self.compose_table[(g, f)]

    def identity(self, x: int) -> int:
        return self.identity_of[x]

    @cached_property
    def _identity_set(self) -> frozenset[int]:
        return frozenset(self.identity_of)

    def is_identity(self, f: int) -> bool:
        return f in self._identity_set

    @cached_property
    def _homs(self) -> dict[tuple[int, int], tuple[int, ...]]:
        homs: dict[tuple[int, int], list[int]] = {}
        for f, dc in enumerate(self.morphisms):
            homs.setdefault(dc, []).append(f)
        return {k: tuple(v) for k, v in homs.items()}

    def hom(self, x: int, y: int) -> tuple[int, ...]:
        return self._homs.get((x, y), ())

    @cached_property
    def _into(self) -> tuple[tuple[int, ...], ...]:
        into: list[list[int]] = [[] for _ in self.objects]
        for f, (_, c) in enumerate(self.morphisms):
            into[c].append(f)
        return tuple(tuple(v) for v in into)

    def morphisms_into(self, x: int) -> tuple[int, ...]:
        return self._into[x]

    @cached_property
    def _out(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.objects]
        for f, (d, _) in enumerate(self.morphisms):
            out[d].append(f)
        return tuple(tuple(v) for v in out)

    def morphisms_out_of(self, x: int) -> tuple[int, ...]:
        return self._out[x]

    # -- bitset views used by the sieve and topology layers --

    @cached_property
    def into_masks(self) -> tuple[int, ...]:
        return tuple(sum(1 << f for f in fs) for fs in self._into)

    @cached_property
    def precompositions(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """For each f, the pairs ``(g, f∘g)`` over all g with ``cod g = dom f``."""
        table = self.compose_table
        return tuple(
            tuple((g, table[(f, g)]) for g in self._into[self.morphisms[f][0]] if (f, g) in table)
            for f in range(self.morphism_count)
        )

    @cached_property
    def principal_masks(self) -> tuple[int, ...]:
        """Bitset of the sieve generated by the single morphism f."""
        out = []
        for f, pairs in enumerate(self.precompositions):
            mask = 1 << f
            for _, h in pairs:
                mask |= 1 << h
            out.append(mask)
        return tuple(out)

    def name_of(self, f: int) -> str:
        return self.morphism_names[f]

    def object_name(self, x: int) -> str:
        return self.object_names[x]

    def non_identity_into(self, x: int) -> int:
        return sum(1 for f in self._into[x] if not self.is_identity(f))


def mask_members(mask: int) -> list[int]:
    """Ascending ids of the set bits of ``mask``."""
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def validate_category(c: FinCat) -> ValidationReport:
    """Check typing, totality, identity laws and associativity exhaustively."""
    violations: list[Violation] = []
    table = c.compose_table
    for x in c.objects:
        i = c.identity(x)
        if c.morphisms[i] != (x, x):
            violations.append(Violation("identity-typing", (i,), f"identity of object {x}"))
    for (g, f), h in sorted(table.items()):
        if c.cod(f) != c.dom(g):
            violations.append(Violation("composite-not-composable", (g, f, h)))
        elif c.morphisms[h] != (c.dom(f), c.cod(g)):
            violations.append(Violation("composite-typing", (g, f, h)))
    for f in range(c.morphism_count):
        for g in c.morphisms_out_of(c.cod(f)):
            if (g, f) not in table:
                violations.append(Violation("composite-missing", (g, f)))
    for f in range(c.morphism_count):
        d, cd = c.morphisms[f]
        left = table.get((c.identity(cd), f))
        right = table.get((f, c.identity(d)))
        if left is not None and left != f:
            violations.append(Violation("left-identity", (c.identity(cd), f, left)))
        if right is not None and right != f:
            violations.append(Violation("right-identity", (f, c.identity(d), right)))
    for f in range(c.morphism_count):
        for g in c.morphisms_out_of(c.cod(f)):
            gf = table.get((g, f))
            for h in c.morphisms_out_of(c.cod(g)):
                hg = table.get((h, g))
                if gf is None or hg is None:
                    continue
                a = table.get((h, gf))
                b = table.get((hg, f))
                if a is not None and b is not None and a != b:
                    violations.append(Violation("associativity", (h, g, f), f"{a} != {b}"))
    return ValidationReport(tuple(violations))


@dataclass(frozen=True, eq=False)
class FinFunctor:
    source: FinCat
    target: FinCat
    object_map: tuple[int, ...]
    morphism_map: tuple[int, ...]
    name: str = "F"

    def __post_init__(self):
        object.__setattr__(self, "object_map", tuple(self.object_map))
        object.__setattr__(self, "morphism_map", tuple(self.morphism_map))
        if len(self.object_map) != self.source.object_count:
            raise MalformedTable("object_map length differs from source object count")
        if len(self.morphism_map) != self.source.morphism_count:
            raise MalformedTable("morphism_map length differs from source morphism count")
        for y in self.object_map:
            if not 0 <= y < self.target.object_count:
                raise MalformedTable(f"object image {y} out of range")
        for g in self.morphism_map:
            if not 0 <= g < self.target.morphism_count:
                raise MalformedTable(f"morphism image {g} out of range")

    def __call__(self, f: int) -> int:
        return self.morphism_map[f]

    def on_object(self, x: int) -> int:
        return self.object_map[x]

    def __eq__(self, other):
        if not isinstance(other, FinFunctor):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.object_map == other.object_map
            and self.morphism_map == other.morphism_map
        )

    def __hash__(self):
        return hash((self.object_map, self.morphism_map))


def identity_functor(c: FinCat) -> FinFunctor:
    return FinFunctor(c, c, tuple(c.objects), tuple(range(c.morphism_count)), name="id")


def compose_functors(g: FinFunctor, f: FinFunctor) -> FinFunctor:
    """``g ∘ f`` as table composition."""
    if f.target != g.source:
        raise MalformedTable("functors are not composable")
    return FinFunctor(
        f.source,
        g.target,
        tuple(g.object_map[y] for y in f.object_map),
        tuple(g.morphism_map[m] for m in f.morphism_map),
        name=f"{g.name}{f.name}",
    )


def validate_functor(fn: FinFunctor) -> ValidationReport:
    src, tgt = fn.source, fn.target
    violations: list[Violation] = []
    for f in range(src.morphism_count):
        d, c = src.morphisms[f]
        if tgt.morphisms[fn.morphism_map[f]] != (fn.object_map[d], fn.object_map[c]):
            violations.append(Violation("functor-typing", (f,)))
    for x in src.objects:
        if fn.morphism_map[src.identity(x)] != tgt.identity(fn.object_map[x]):
            violations.append(Violation("functor-identity", (src.identity(x),)))
    for (g, f), h in sorted(src.compose_table.items()):
        fg, ff = fn.morphism_map[g], fn.morphism_map[f]
        if tgt.compose_table.get((fg, ff)) != fn.morphism_map[h]:
            violations.append(Violation("functor-composition", (g, f, h)))
    return ValidationReport(tuple(violations))


def is_fully_faithful(fn: FinFunctor) -> bool:
    src, tgt = fn.source, fn.target
    for x in src.objects:
        for y in src.objects:
            homs = src.hom(x, y)
            images = {fn.morphism_map[f] for f in homs}
            if len(images) != len(homs):
                return False
            if len(tgt.hom(fn.object_map[x], fn.object_map[y])) != len(homs):
                return False
    return True


@dataclass(frozen=True, eq=False)
class Presheaf:
    """A functor ``base^op -> FinSet`` with carriers ``range(n)``.

    ``restriction[f]`` for ``f: X -> Y`` is a tuple of length
    ``carrier[Y]`` whose entries lie in ``range(carrier[X])``.
    """

    base: FinCat
    carrier: tuple[int, ...]
    restriction: tuple[tuple[int, ...], ...]
    name: str = "P"

    def __post_init__(self):
        c = self.base
        object.__setattr__(self, "carrier", tuple(self.carrier))
        object.__setattr__(self, "restriction", tuple(tuple(t) for t in self.restriction))
        if len(self.carrier) != c.object_count:
            raise CarrierMismatch("carrier list length differs from object count")
        if len(self.restriction) != c.morphism_count:
            raise CarrierMismatch("one restriction table per morphism is required")
        for f, table in enumerate(self.restriction):
            d, cd = c.morphisms[f]
            if len(table) != self.carrier[cd]:
                raise CarrierMismatch(
                    f"restriction along {c.name_of(f)} has {len(table)} entries, "
                    f"carrier of codomain has {self.carrier[cd]}"
                )
            if any(not 0 <= v < self.carrier[d] for v in table):
                raise CarrierMismatch(f"restriction along {c.name_of(f)} leaves the domain carrier")

    def __eq__(self, other):
        if not isinstance(other, Presheaf):
            return NotImplemented
        return self.carrier == other.carrier and self.restriction == other.restriction and self.base == other.base

    def __hash__(self):
        return hash((self.carrier, self.restriction))

    def restrict(self, f: int, y: int) -> int:
        return self.restriction[f][y]


def validate_presheaf(p: Presheaf) -> ValidationReport:
    c = p.base
    violations: list[Violation] = []
    for x in c.objects:
        i = c.identity(x)
        if p.restriction[i] != tuple(range(p.carrier[x])):
            violations.append(Violation("presheaf-identity", (i,)))
    for (g, f), h in sorted(c.compose_table.items()):
        rg, rf, rh = p.restriction[g], p.restriction[f], p.restriction[h]
        if any(rh[y] != rf[rg[y]] for y in range(len(rh))):
            violations.append(Violation("presheaf-functoriality", (g, f, h)))
    return ValidationReport(tuple(violations))


def constant_presheaf(c: FinCat, k: int) -> Presheaf:
    ident = tuple(range(k))
    return Presheaf(c, (k,) * c.object_count, (ident,) * c.morphism_count, name=f"const{k}")


def representable(c: FinCat, w: int) -> Presheaf:
    """``Hom(-, w)`` with each carrier enumerating its hom-set in ascending id order."""
    carriers = [c.hom(x, w) for x in c.objects]
    index = [{h: i for i, h in enumerate(hs)} for hs in carriers]
    tables = []
    for f in range(c.morphism_count):
        d, cd = c.morphisms[f]
        tables.append(tuple(index[d][c.compose(h, f)] for h in carriers[cd]))
    return Presheaf(c, tuple(len(hs) for hs in carriers), tuple(tables), name=f"h_{c.object_name(w)}")


def precompose(p: Presheaf, fn: FinFunctor) -> Presheaf:
    """``p ∘ fn^op`` on ``fn.source``."""
    if p.base != fn.target:
        raise MalformedTable("presheaf does not live on the functor's target")
    return Presheaf(
        fn.source,
        tuple(p.carrier[y] for y in fn.object_map),
        tuple(p.restriction[g] for g in fn.morphism_map),
        name=f"{p.name}.{fn.name}",
    )


def iter_functions(m: int, k: int) -> Iterator[tuple[int, ...]]:
    """All functions ``range(m) -> range(k)`` as value tuples, lexicographically."""
    return product(range(k), repeat=m)


def build_category(
    object_names: Sequence[str],
    morphisms: Sequence[tuple[str, int, int]],
    identities: Sequence[int],
    compose,
    name: str = "C",
) -> FinCat:
    """Build a category from a composition callback ``compose(g, f) -> id``.

    The callback is consulted for every composable pair.
    """
    table = {}
    by_cod: dict[int, list[int]] = {}
    for f, (_, _, cd) in enumerate(morphisms):
        by_cod.setdefault(cd, []).append(f)
    for g, (_, d, _) in enumerate(morphisms):
        for f in by_cod.get(d, ()):
            table[(g, f)] = compose(g, f)
    return FinCat(
        object_count=len(object_names),
        morphisms=tuple((d, cd) for _, d, cd in morphisms),
        identity_of=tuple(identities),
        compose_table=table,
        object_names=tuple(object_names),
        morphism_names=tuple(n for n, _, _ in morphisms),
        name=name,
    )


__all__ = [
    "FinCat",
    "FinFunctor",
    "Presheaf",
    "ValidationReport",
    "Violation",
    "build_category",
    "compose_functors",
    "constant_presheaf",
    "identity_functor",
    "is_fully_faithful",
    "mask_members",
    "precompose",
    "representable",
    "validate_category",
    "validate_functor",
    "validate_presheaf",
]
