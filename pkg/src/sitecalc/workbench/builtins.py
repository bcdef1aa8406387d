"""Resolution of ``builtin:NAME[:ARG...]`` pseudo-paths used by the CLI."""

from __future__ import annotations

import re
from typing import Callable

from ..errors import SitecalcError
from ..fincat import FinCat, FinFunctor
from . import generators as g

PREFIX = "builtin:"


def _int(args: list[str], i: int, default: int | None = None) -> int:
    if i < len(args):
        return int(args[i])
    if default is None:
        raise SitecalcError("missing integer argument")
    return default


CATEGORIES: dict[str, Callable[[list[str]], FinCat]] = {
    "finset-skeleton": lambda a: g.gen_finset_skeleton(_int(a, 0, 2)),
    "finset-full": lambda a: g.gen_finset_full(),
    "fintop": lambda a: g.gen_fintop(_int(a, 0, 2)),
    "walking-arrow": lambda a: g.walking_arrow(),
    "trivial": lambda a: g.trivial_category(),
    "diamond": lambda a: g.four_element_poset(),
    "chain": lambda a: g.chain(_int(a, 0, 3)),
    "cyclic": lambda a: g.cyclic_group(_int(a, 0, 2)),
    "poset": lambda a: g.random_poset(_int(a, 0, 4), _int(a, 1, 0)),
}

FUNCTORS: dict[str, Callable[[list[str]], FinFunctor]] = {
    "skeleton-inclusion": lambda a: g.skeleton_inclusion(_int(a, 0, 2)),
    "identity-skeleton": lambda a: _identity(g.gen_finset_skeleton(_int(a, 0, 2))),
    "nonempty-inclusion": lambda a: g.full_subcategory(
        g.gen_finset_skeleton(_int(a, 0, 2)), list(range(1, _int(a, 0, 2) + 1))
    ),
}


def _identity(c: FinCat) -> FinFunctor:
    from ..fincat import identity_functor

    return identity_functor(c)


def is_builtin(path: str) -> bool:
    return path.startswith(PREFIX)


def _split(path: str) -> tuple[str, list[str]]:
    parts = path[len(PREFIX):].split(":")
    return parts[0], parts[1:]


def builtin_category(path: str) -> FinCat:
    name, args = _split(path)
    if name not in CATEGORIES:
        raise SitecalcError(f"unknown builtin category {name!r}; known: {', '.join(sorted(CATEGORIES))}")
    try:
        return CATEGORIES[name](args)
    except ValueError as exc:
        raise SitecalcError(f"bad argument in {path!r}: {exc}") from None


def builtin_functor(path: str) -> FinFunctor:
    name, args = _split(path)
    if name not in FUNCTORS:
        raise SitecalcError(f"unknown builtin functor {name!r}; known: {', '.join(sorted(FUNCTORS))}")
    try:
        return FUNCTORS[name](args)
    except ValueError as exc:
        raise SitecalcError(f"bad argument in {path!r}: {exc}") from None


# Names the generators give their categories, so emitted functor documents
# can refer to builtin categories without embedding them.
_GENERATED_NAMES: list[tuple[re.Pattern, Callable[..., FinCat]]] = [
    (re.compile(r"FinSet_skel\((\d+)\)"), lambda n: g.gen_finset_skeleton(int(n))),
    (re.compile(r"FinSet_full"), lambda: g.gen_finset_full()),
    (re.compile(r"FinTop\((\d+)\)"), lambda n: g.gen_fintop(int(n))),
    (re.compile(r"chain\((\d+)\)"), lambda n: g.chain(int(n))),
    (re.compile(r"Z(\d+)"), lambda n: g.cyclic_group(int(n))),
    (re.compile(r"poset\((\d+),(\d+)\)"), lambda n, s: g.random_poset(int(n), int(s))),
    (re.compile(r"walking_arrow"), g.walking_arrow),
    (re.compile(r"trivial"), g.trivial_category),
    (re.compile(r"diamond"), g.four_element_poset),
]


def resolve_category_name(name: str) -> FinCat:
    """A builtin category from its pseudo-path or from the name its generator assigns."""
    if is_builtin(name):
        return builtin_category(name)
    for pattern, make in _GENERATED_NAMES:
        m = pattern.fullmatch(name)
        if m:
            return make(*m.groups())
    raise SitecalcError(f"category {name!r} is neither declared nor a builtin")
