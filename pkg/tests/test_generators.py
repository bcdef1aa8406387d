from itertools import product

import pytest

from sitecalc.errors import CapExceeded, SitecalcError, ValidationError
from sitecalc.fincat import validate_category, validate_functor
from sitecalc.limits import is_effective_epi
from sitecalc.topology import is_finitary_extensive, is_precoherent, is_preregular
from sitecalc.workbench import builtins as b
from sitecalc.workbench import generators as g


def test_skeleton_counts():
    c = g.gen_finset_skeleton(2)
    assert (c.object_count, c.morphism_count) == (3, 11)
    assert [len(c.hom(m, k)) for m, k in product(range(3), repeat=2)] == [1, 1, 1, 0, 1, 2, 0, 1, 4]
    zero = g.gen_finset_skeleton(0)
    assert (zero.object_count, zero.morphism_count) == (1, 1)


def test_skeleton_surjections_effective():
    model = g.finset_skeleton_model(2)
    for f in range(model.category.morphism_count):
        if model.is_surjective(f):
            assert is_effective_epi(model.category, f)


@pytest.mark.parametrize("n", [2, 3])
def test_skeleton_predicates(n):
    c = g.gen_finset_skeleton(n)
    assert is_preregular(c) and is_finitary_extensive(c)
    assert is_precoherent(c, cap=64 if n == 3 else None)


def test_topology_counts():
    # 1, 1, 4, 29 topologies on sets of size 0..3
    assert [len(g.topologies_on(m)) for m in range(4)] == [1, 1, 4, 29]


def test_fintop_objects():
    one = g.gen_fintop(1)
    assert one.object_count == 2
    model = g.fintop_model(2)
    assert model.category.object_count == 6
    two_point = sorted(len(model.opens[x]) for x in model.category.objects if model.sizes[x] == 2)
    assert two_point == [2, 3, 3, 4]
    assert validate_category(model.category).ok


def test_fintop_caps():
    with pytest.raises(CapExceeded):
        g.gen_fintop(4)
    with pytest.raises(CapExceeded):
        g.gen_fintop(3)


def test_fintop_maps_are_continuous():
    model = g.fintop_model(2)
    c = model.category
    for f in range(c.morphism_count):
        d, cd = c.morphisms[f]
        for u in model.opens[cd]:
            pre = sum(1 << i for i, v in enumerate(model.functions[f]) if u >> v & 1)
            assert pre in model.opens[d]


def test_posets():
    c = g.chain(2)
    arrow = g.walking_arrow()
    assert c.morphisms == arrow.morphisms and dict(c.compose_table) == dict(arrow.compose_table)
    with pytest.raises(ValidationError):
        g.gen_poset(2, {(0, 0), (1, 1), (0, 1), (1, 0)})
    with pytest.raises(ValidationError):
        g.gen_poset(2, {(0, 0)})
    for seed in range(10):
        assert validate_category(g.random_poset(5, seed)).ok


def test_monoids():
    t = g.gen_monoid([[0]])
    assert (t.object_count, t.morphism_count) == (1, 1)
    z2 = g.cyclic_group(2)
    assert all(is_effective_epi(z2, f) for f in range(z2.morphism_count))
    with pytest.raises(ValidationError):
        g.gen_monoid([[0, 1], [1, 1], [0, 0]])
    with pytest.raises(ValidationError):
        g.gen_monoid([[1, 0], [0, 0]])  # 0 is absorbing, 1 is not a unit
    mons = g.all_monoids(3)
    assert sum(1 for m in mons if m.morphism_count == 2) == 2
    assert all(validate_category(m).ok for m in mons)


def test_full_subcategory_and_inclusion(skel2):
    fn = g.full_subcategory(skel2, [1, 2])
    assert validate_functor(fn).ok
    assert fn.source.morphism_count == 1 + 2 + 1 + 4
    incl = g.skeleton_inclusion(2)
    assert validate_functor(incl).ok
    with pytest.raises(ValidationError):
        g.skeleton_inclusion(2, sets=((), (0,), (3, 7)))


def test_full_sets_category():
    c = g.gen_finset_full()
    assert c.object_names == ("S_", "S0", "S01", "S5", "S37")
    assert validate_category(c).ok


def test_corpus_is_valid():
    cats = g.corpus()
    assert len(cats) >= 20
    assert all(validate_category(c).ok for c in cats)


# -- builtin pseudo-paths ----------------------------------------------------------------------


@pytest.mark.parametrize(
    "path, objects",
    [
        ("builtin:finset-skeleton:2", 3),
        ("builtin:finset-skeleton", 3),
        ("builtin:finset-full", 5),
        ("builtin:fintop:1", 2),
        ("builtin:walking-arrow", 2),
        ("builtin:trivial", 1),
        ("builtin:diamond", 4),
        ("builtin:chain:5", 5),
        ("builtin:cyclic:3", 1),
        ("builtin:poset:4:9", 4),
    ],
)
def test_builtin_categories(path, objects):
    assert b.builtin_category(path).object_count == objects


def test_builtin_errors():
    with pytest.raises(SitecalcError):
        b.builtin_category("builtin:nothing")
    with pytest.raises(SitecalcError):
        b.builtin_category("builtin:chain:x")
    with pytest.raises(SitecalcError):
        b.builtin_functor("builtin:nothing")


def test_builtin_functors():
    assert b.builtin_functor("builtin:skeleton-inclusion:2") == g.skeleton_inclusion(2)
    assert validate_functor(b.builtin_functor("builtin:identity-skeleton:1")).ok
    assert b.builtin_functor("builtin:nonempty-inclusion:2").source.object_count == 2


def test_generated_names_resolve():
    for c in (g.gen_finset_skeleton(2), g.gen_fintop(1), g.chain(3), g.cyclic_group(2), g.random_poset(3, 1),
              g.walking_arrow(), g.trivial_category(), g.four_element_poset(), g.gen_finset_full()):
        assert b.resolve_category_name(c.name) == c
