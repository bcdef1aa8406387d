from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from sitecalc.errors import CapExceeded, TypeMismatch
from sitecalc.fincat import identity_functor
from sitecalc.sieves import (
    Presieve,
    Sieve,
    enumerate_sieves,
    functor_pullback_sieve,
    generate,
    image_sieve,
    intersect,
    is_downward_closed,
    pullback_sieve,
    pushforward_sieve,
    top_sieve,
)
from sitecalc.workbench import generators as g

from conftest import find_morphism, obj


def factoring_oracle(c, members, x):
    """Morphisms into x that are some member composed with something: brute force."""
    out = set()
    for m in members:
        for h in c.morphisms_into(c.dom(m)):
            out.add(c.compose(m, h))
    return out


def test_generate_examples(skel2):
    assert generate(Presieve(skel2, 2, 0)).mask == 0
    for x in skel2.objects:
        assert generate(Presieve.of(skel2, x, [skel2.identity(x)])) == top_sieve(skel2, x)
    u = find_morphism(skel2, "s2_1_00")
    assert generate(Presieve.of(skel2, 1, [u])) == top_sieve(skel2, 1)


def test_generate_matches_factorization(skel2, diamond):
    for c in (skel2, diamond):
        for x in c.objects:
            into = c.morphisms_into(x)
            for k in range(len(into) + 1):
                for members in combinations(into, k):
                    got = set(generate(Presieve.of(c, x, members)).members)
                    assert got == factoring_oracle(c, members, x)


def test_pullback_examples(arrow):
    f = find_morphism(arrow, "f")
    b = obj(arrow, "b")
    s = Sieve.of(arrow, b, [f])
    assert pullback_sieve(s, f) == top_sieve(arrow, obj(arrow, "a"))
    assert pullback_sieve(s, arrow.identity(b)) == s
    assert pullback_sieve(top_sieve(arrow, b), f) == top_sieve(arrow, 0)
    with pytest.raises(TypeMismatch):
        pullback_sieve(top_sieve(arrow, 0), f)


def test_top_sieve_sizes(trivial, arrow, skel2):
    assert len(top_sieve(trivial, 0)) == 1
    assert set(top_sieve(arrow, 1).members) == {find_morphism(arrow, "f"), find_morphism(arrow, "id_b")}
    assert len(top_sieve(skel2, 2)) == 7


def test_enumerate_examples(trivial, arrow):
    assert [s.mask for s in enumerate_sieves(arrow, 0)] == [0, 1 << 0]
    names = [{arrow.name_of(f) for f in s.members} for s in enumerate_sieves(arrow, 1)]
    assert names == [set(), {"f"}, {"f", "id_b"}]
    assert len(enumerate_sieves(trivial, 0)) == 2


def test_enumerate_properties(skel2, diamond):
    for c in (skel2, diamond):
        for x in c.objects:
            sieves = enumerate_sieves(c, x)
            masks = [s.mask for s in sieves]
            assert masks == sorted(set(masks))
            assert 0 in masks and c.into_masks[x] in masks
            assert all(is_downward_closed(c, m) for m in masks)


def test_sieve_cap():
    c = g.gen_finset_skeleton(3)  # 27 + 8 + 1 + ... morphisms into 3
    with pytest.raises(CapExceeded):
        enumerate_sieves(c, 3)
    assert enumerate_sieves(c, 3, cap=64)  # the cap is configurable per call


def test_non_sieve_rejected(arrow):
    with pytest.raises(TypeMismatch):
        Sieve.of(arrow, 1, [find_morphism(arrow, "id_b")])


def test_functor_operations_identity(skel2):
    ident = identity_functor(skel2)
    for x in skel2.objects:
        for s in enumerate_sieves(skel2, x):
            assert pushforward_sieve(ident, s) == s
            assert functor_pullback_sieve(ident, s, x) == s
        assert image_sieve(ident, x) == top_sieve(skel2, x)


def test_skeleton_inclusion_sieves(skel2):
    fn = g.skeleton_inclusion(2)
    u = find_morphism(skel2, "s2_1_00")
    pushed = pushforward_sieve(fn, generate(Presieve.of(skel2, 1, [u])))
    assert pushed == top_sieve(fn.target, fn.object_map[1])
    for y in fn.target.objects:
        assert image_sieve(fn, y) == top_sieve(fn.target, y)
    for x in skel2.objects:
        assert functor_pullback_sieve(fn, Sieve(fn.target, fn.object_map[x], 0), x).mask == 0
        assert functor_pullback_sieve(fn, top_sieve(fn.target, fn.object_map[x]), x) == top_sieve(skel2, x)


def test_image_sieve_through_point(skel2):
    fn = g.full_subcategory(skel2, [1])
    s = image_sieve(fn, 2)
    names = {skel2.name_of(f) for f in s.members}
    assert "id_2" not in names and "s2_2_10" not in names
    expected = factoring_oracle(skel2, [f for f in skel2.morphisms_into(2) if skel2.dom(f) == 1], 2)
    assert set(s.members) == expected


@st.composite
def presieve_in(draw, c):
    x = draw(st.sampled_from(list(c.objects)))
    into = c.morphisms_into(x)
    members = draw(st.lists(st.sampled_from(into), unique=True)) if into else []
    return Presieve.of(c, x, members)


CATS = [g.gen_finset_skeleton(2), g.four_element_poset(), g.walking_arrow(), g.cyclic_group(3), g.chain(3)]


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(CATS).flatmap(lambda c: st.tuples(presieve_in(c), presieve_in(c))))
def test_generate_is_closure(pair):
    p, q = pair
    gp = generate(p)
    assert p.mask & ~gp.mask == 0
    assert generate(gp) == gp
    if p.target == q.target and p.mask & ~q.mask == 0:
        assert gp.mask & ~generate(q).mask == 0


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(CATS).flatmap(lambda c: st.tuples(presieve_in(c), presieve_in(c), st.data())))
def test_intersection_and_pullback(args):
    p, q, data = args
    if p.target != q.target:
        return
    a, b = generate(p), generate(q)
    both = intersect(a, b)
    assert is_downward_closed(p.base, both.mask)
    c = p.base
    f = data.draw(st.sampled_from(c.morphisms_into(p.target)))
    assert pullback_sieve(both, f) == intersect(pullback_sieve(a, f), pullback_sieve(b, f))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2), st.data())
def test_functor_images_are_sieves(x, data):
    fn = g.skeleton_inclusion(2)
    s = data.draw(st.sampled_from(enumerate_sieves(fn.source, x)))
    assert is_downward_closed(fn.target, pushforward_sieve(fn, s).mask)
    t = data.draw(st.sampled_from(enumerate_sieves(fn.target, fn.object_map[x])))
    assert is_downward_closed(fn.source, functor_pullback_sieve(fn, t, x).mask)
    for y in fn.target.objects:
        assert is_downward_closed(fn.target, image_sieve(fn, y).mask)
