"""Presieves and sieves as bitsets over a category's morphism ids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from . import config
from .errors import CapExceeded, TypeMismatch
from .fincat import FinCat, FinFunctor, mask_members


@dataclass(frozen=True, eq=False)
class Presieve:
    """A set of morphisms sharing the codomain ``target``."""

    base: FinCat
    target: int
    mask: int

    def __post_init__(self):
        if self.mask & ~self.base.into_masks[self.target]:
            raise TypeMismatch(f"presieve on {self.target} contains a morphism with another codomain")

    @classmethod
    def of(cls, base: FinCat, target: int, members: Iterable[int]):
        return cls(base, target, sum(1 << f for f in set(members)))

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(mask_members(self.mask))

    def __contains__(self, f: int) -> bool:
        return bool(self.mask >> f & 1)

    def __len__(self):
        return bin(self.mask).count("1")

    def __iter__(self):
        return iter(self.members)

    def __eq__(self, other):
        if not isinstance(other, Presieve):
            return NotImplemented
        return (
            self.target == other.target
            and self.mask == other.mask
            and (self.base is other.base or self.base == other.base)
        )

    def __hash__(self):
        return hash((self.target, self.mask))

    def __repr__(self):
        names = " ".join(self.base.name_of(f) for f in self.members)
        return f"{type(self).__name__}(on={self.base.object_name(self.target)}, {{{names}}})"


class Sieve(Presieve):
    """A downward-closed presieve."""

    def __post_init__(self):
        super().__post_init__()
        if not is_downward_closed(self.base, self.mask):
            raise TypeMismatch("members are not downward closed")


def is_downward_closed(c: FinCat, mask: int) -> bool:
    principal = c.principal_masks
    return all(principal[f] & ~mask == 0 for f in mask_members(mask))


def generate_mask(c: FinCat, mask: int) -> int:
    principal = c.principal_masks
    out = 0
    for f in mask_members(mask):
        out |= principal[f]
    return out


def pullback_mask(c: FinCat, f: int, mask: int) -> int:
    """Bitset of ``f^*S``: the g into ``dom f`` with ``f∘g`` in ``mask``."""
    out = 0
    for g, h in c.precompositions[f]:
        if mask >> h & 1:
            out |= 1 << g
    return out


def generate(p: Presieve) -> Sieve:
    """All morphisms factoring through a member of ``p``."""
    return Sieve(p.base, p.target, generate_mask(p.base, p.mask))


def pullback_sieve(s: Presieve, f: int) -> Sieve:
    c = s.base
    if c.cod(f) != s.target:
        raise TypeMismatch(f"cod({c.name_of(f)}) is not the sieve's target")
    return Sieve(c, c.dom(f), pullback_mask(c, f, s.mask))


def top_sieve(c: FinCat, x: int) -> Sieve:
    return Sieve(c, x, c.into_masks[x])


def check_cap(c: FinCat, x: int, cap: int | None = None) -> None:
    cap = config.SIEVE_CAP if cap is None else cap
    h = c.non_identity_into(x)
    if h > cap:
        raise CapExceeded(
            f"{h} non-identity morphisms into {c.object_name(x)} exceeds the sieve cap {cap}"
        )


def sieve_masks(c: FinCat, x: int, cap: int | None = None) -> list[int]:
    """Every sieve on ``x`` as a bitset, ascending.

    Sieves are exactly the unions of principal sieves, so the lattice is
    built by closing ``{0}`` under union with each principal sieve.
    """
    check_cap(c, x, cap)
    found = {0}
    for f in c.morphisms_into(x):
        p = c.principal_masks[f]
        found |= {s | p for s in found}
    return sorted(found)


def enumerate_sieves(c: FinCat, x: int, cap: int | None = None) -> list[Sieve]:
    return [Sieve(c, x, m) for m in sieve_masks(c, x, cap)]


def presieve_masks(c: FinCat, x: int, cap: int | None = None) -> list[int]:
    """Every subset of ``Hom(-, x)`` as a bitset, ascending."""
    check_cap(c, x, cap)
    members = c.morphisms_into(x)
    out = []
    for bits in range(1 << len(members)):
        m = 0
        for i, f in enumerate(members):
            if bits >> i & 1:
                m |= 1 << f
        out.append(m)
    return sorted(out)


def intersect(a: Presieve, b: Presieve) -> Sieve:
    if a.target != b.target:
        raise TypeMismatch("sieves live on different objects")
    return Sieve(a.base, a.target, a.mask & b.mask)


def pushforward_mask(fn: FinFunctor, mask: int) -> int:
    images = 0
    for g in mask_members(mask):
        images |= 1 << fn.morphism_map[g]
    return generate_mask(fn.target, images)


def pushforward_sieve(fn: FinFunctor, s: Presieve) -> Sieve:
    """Morphisms into ``F(X)`` factoring through ``F(g)`` for some g in ``s``."""
    return Sieve(fn.target, fn.object_map[s.target], pushforward_mask(fn, s.mask))


def functor_pullback_mask(fn: FinFunctor, x: int, mask: int) -> int:
    out = 0
    for f in fn.source.morphisms_into(x):
        if mask >> fn.morphism_map[f] & 1:
            out |= 1 << f
    return out


def functor_pullback_sieve(fn: FinFunctor, s: Presieve, x: int) -> Sieve:
    """Morphisms f into ``x`` with ``F(f)`` in ``s``; ``s`` must live on ``F(x)``."""
    if fn.object_map[x] != s.target:
        raise TypeMismatch("sieve does not live on the image object")
    return Sieve(fn.source, x, functor_pullback_mask(fn, x, s.mask))


def image_sieve_mask(fn: FinFunctor, y: int) -> int:
    tgt = fn.target
    image_objects = set(fn.object_map)
    gens = 0
    for k in tgt.morphisms_into(y):
        if tgt.dom(k) in image_objects:
            gens |= 1 << k
    return generate_mask(tgt, gens)


def image_sieve(fn: FinFunctor, y: int) -> Sieve:
    """Morphisms into ``y`` that factor through some ``F(X)``."""
    return Sieve(fn.target, y, image_sieve_mask(fn, y))
