from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from sitecalc.errors import CapExceeded, NotExtensive, NotPrecoherent, NotPreregular
from sitecalc.fincat import mask_members
from sitecalc.limits import is_effective_epi_family_mask
from sitecalc.sieves import generate_mask, pullback_mask, sieve_masks
from sitecalc.topology import (
    Coverage,
    GrothTopology,
    check_coverage,
    check_topology,
    coherent_coverage,
    coherent_covering_sieves,
    direct_topology,
    empty_coverage,
    extensive_coverage,
    generated_by_union,
    is_finitary_extensive,
    is_precoherent,
    is_preregular,
    minimal_topology,
    regular_coverage,
    regular_covering_sieves,
    saturate,
    top_coverage,
    topology_infimum,
)
from sitecalc.workbench import generators as g
from sitecalc.workbench.docformat import parse_category

from conftest import find_morphism

DATA = Path(__file__).parent / "data"


def not_preregular():
    return parse_category((DATA / "not_preregular.fincat").read_text())


def naive_saturation(cov):
    """Reference closure: apply the three rules to sets of frozensets until nothing changes."""
    c = cov.base

    def members(m):
        return frozenset(mask_members(m))

    universe = {x: [members(s) for s in sieve_masks(c, x)] for x in c.objects}
    covering = {x: {members(c.into_masks[x])} for x in c.objects}
    for x in c.objects:
        for p in cov.covering[x]:
            covering[x].add(members(generate_mask(c, p)))
    while True:
        added = False
        for x in c.objects:
            for r in universe[x]:
                if r in covering[x]:
                    continue
                for s in list(covering[x]):
                    pulled = (
                        frozenset(h for h in c.morphisms_into(c.dom(f)) if c.compose(f, h) in r) for f in s
                    )
                    if all(p in covering[c.dom(f)] for f, p in zip(s, pulled)):
                        covering[x].add(r)
                        added = True
                        break
        if not added:
            break
    return {x: {sum(1 << f for f in s) for s in covering[x]} for x in c.objects}


def as_dict(t):
    return {x: set(t.covering[x]) for x in t.base.objects}


SMALL = [g.gen_finset_skeleton(2), g.walking_arrow(), g.four_element_poset(), g.chain(3), g.cyclic_group(2)]


# -- coverages and topologies -----------------------------------------------------------


def test_top_coverage_is_valid(skel2, arrow):
    for c in (skel2, arrow):
        assert check_coverage(top_coverage(c)).ok
        assert saturate(top_coverage(c)) == minimal_topology(c)


def test_coherent_coverage_is_valid(skel2):
    assert check_coverage(coherent_coverage(skel2)).ok


def test_walking_arrow_coverage_without_witness(arrow):
    f = find_morphism(arrow, "f")
    cov = Coverage(arrow, (frozenset(), frozenset({1 << f})))
    report = check_coverage(cov)
    assert not report
    assert all(v.law == "coverage-refinement" for v in report.violations)


def test_minimal_topology(skel2):
    t = saturate(empty_coverage(skel2))
    assert t == minimal_topology(skel2)
    assert all(t.covering[x] == {skel2.into_masks[x]} for x in skel2.objects)
    assert check_topology(t).ok


def test_missing_top_sieve_reported(arrow):
    t = GrothTopology(arrow, (frozenset(), frozenset({arrow.into_masks[1]})))
    assert "top-sieve" in {v.law for v in check_topology(t).violations}


def test_unstable_family_reported(arrow):
    # the empty sieve covers b, but its pullback to a (again empty) does not cover a
    t = GrothTopology(arrow, (frozenset({arrow.into_masks[0]}), frozenset({0, arrow.into_masks[1]})))
    assert "pullback-stability" in {v.law for v in check_topology(t).violations}
    # covering a by the empty sieve too repairs stability, but then every sieve on b must cover
    partial = GrothTopology(arrow, (frozenset({0, arrow.into_masks[0]}), t.covering[1]))
    assert {v.law for v in check_topology(partial).violations} == {"local-character", "upward-closure"}
    full = GrothTopology(arrow, (partial.covering[0], frozenset(sieve_masks(arrow, 1))))
    assert check_topology(full).ok


@pytest.mark.parametrize("c", SMALL, ids=lambda c: c.name)
def test_saturation_matches_reference(c):
    for kind in ("coherent", "regular", "minimal"):
        try:
            cov = {"coherent": coherent_coverage, "regular": regular_coverage, "minimal": empty_coverage}[kind](c)
        except (NotPrecoherent, NotPreregular):
            continue
        t = saturate(cov)
        assert as_dict(t) == naive_saturation(cov)
        assert check_topology(t).ok


def test_saturation_is_least(arrow, diamond, trivial):
    for c in (arrow, diamond, trivial):
        cov = coherent_coverage(c)
        assert topology_infimum(cov) == saturate(cov)


def test_infimum_limit(skel2):
    with pytest.raises(CapExceeded):
        topology_infimum(coherent_coverage(skel2), limit=1 << 10)


def test_saturation_monotone(skel2):
    reg, coh = regular_coverage(skel2), coherent_coverage(skel2)
    assert reg <= coh
    assert saturate(reg) <= saturate(coh)


# -- predicates ------------------------------------------------------------------------------


def test_groups_are_preregular_not_extensive():
    c = g.cyclic_group(3)
    assert is_preregular(c)
    r = is_finitary_extensive(c)
    assert not r and r.reason == "no initial object"


def test_skeleton_predicates(skel2):
    assert is_preregular(skel2)
    assert is_finitary_extensive(skel2)
    assert is_precoherent(skel2)
    assert is_precoherent(skel2, method="presieves")


def test_skeleton_extensive_needs_two_points():
    # in the skeleton on sizes 0 and 1, 1 + 1 = 1 is a spurious coproduct
    one = g.gen_finset_skeleton(1)
    assert not is_finitary_extensive(one)
    assert is_finitary_extensive(g.gen_finset_skeleton(3))


def test_walking_arrow_not_extensive(arrow):
    r = is_finitary_extensive(arrow)
    assert not r and r.witness


def test_precoherent_methods_agree():
    for c in g.corpus(random_count=6):
        try:
            a = bool(is_precoherent(c, method="sieves"))
            b = bool(is_precoherent(c, method="presieves"))
        except CapExceeded:
            continue
        assert a == b, c.name


def test_fintop_two_is_precoherent_with_raised_cap():
    c = g.gen_fintop(2)
    assert is_preregular(c) and is_finitary_extensive(c)
    with pytest.raises(CapExceeded):
        is_precoherent(c)
    assert is_precoherent(c, cap=24)


def test_named_coverage_errors():
    with pytest.raises(NotExtensive):
        extensive_coverage(g.cyclic_group(2))
    with pytest.raises(NotPreregular):
        regular_coverage(not_preregular())
    with pytest.raises(NotPrecoherent):
        coherent_coverage(not_preregular())


def test_coequalizer_that_does_not_pull_back():
    c = not_preregular()
    r = is_preregular(c)
    assert not r
    g_, f = r.witness
    assert (c.name_of(g_), c.name_of(f)) == ("g", "f")
    assert not is_precoherent(c)


# -- the named coverages on the skeleton -----------------------------------------------------


def test_regular_coverage_contents(skel2):
    cov = regular_coverage(skel2)
    u = find_morphism(skel2, "s2_1_00")
    assert 1 << u in cov.covering[1] and 1 << skel2.identity(1) in cov.covering[1]
    group = g.cyclic_group(3)
    assert regular_coverage(group).covering[0] == {1 << f for f in range(group.morphism_count)}


def test_extensive_coverage_contents(skel2):
    cov = extensive_coverage(skel2)
    pts = (1 << find_morphism(skel2, "s1_2_0")) | (1 << find_morphism(skel2, "s1_2_1"))
    assert pts in cov.covering[2]
    assert 0 in cov.covering[0]
    for x in skel2.objects:
        assert 1 << skel2.identity(x) in cov.covering[x]


def test_coherent_contains_the_others(skel2):
    coh = coherent_coverage(skel2)
    assert regular_coverage(skel2) <= coh
    assert extensive_coverage(skel2) <= coh


def test_direct_characterization_examples(skel2, trivial):
    # the lone object is initial, so the empty family is effective and the empty sieve covers
    assert [s.mask for s in coherent_covering_sieves(trivial, 0)] == [0, 1]
    u, i1 = find_morphism(skel2, "s2_1_00"), skel2.identity(1)
    expected = [s for s in sieve_masks(skel2, 1) if s >> u & 1 or s >> i1 & 1]
    assert [s.mask for s in coherent_covering_sieves(skel2, 1)] == expected
    for x in skel2.objects:
        reg = {s.mask for s in regular_covering_sieves(skel2, x)}
        coh = {s.mask for s in coherent_covering_sieves(skel2, x)}
        assert reg <= coh


@pytest.mark.parametrize("kind", ["regular", "extensive", "coherent"])
def test_saturation_equals_direct(skel2, kind):
    cov = {"regular": regular_coverage, "extensive": extensive_coverage, "coherent": coherent_coverage}[kind](skel2)
    assert saturate(cov) == direct_topology(skel2, kind)


def test_union_generates_coherent(skel2):
    reg, ext = regular_coverage(skel2), extensive_coverage(skel2)
    assert generated_by_union(reg, ext) == saturate(coherent_coverage(skel2))
    assert generated_by_union(reg, reg) == saturate(reg)
    e = empty_coverage(skel2)
    assert generated_by_union(e, e) == minimal_topology(skel2)


# -- properties -------------------------------------------------------------------------------


@st.composite
def random_coverage(draw):
    """Random sieves closed under pullback: such a family is always a coverage."""
    c = draw(st.sampled_from(SMALL))
    covering = [{c.into_masks[x]} for x in c.objects]
    for _ in range(draw(st.integers(0, 3))):
        x = draw(st.sampled_from(list(c.objects)))
        covering[x].add(draw(st.sampled_from(sieve_masks(c, x))))
    todo = [(x, s) for x in c.objects for s in covering[x]]
    while todo:
        x, s = todo.pop()
        for f in c.morphisms_into(x):
            p = pullback_mask(c, f, s)
            if p not in covering[c.dom(f)]:
                covering[c.dom(f)].add(p)
                todo.append((c.dom(f), p))
    cov = Coverage(c, tuple(frozenset(s) for s in covering))
    assert check_coverage(cov).ok
    return cov


@settings(max_examples=60, deadline=None)
@given(random_coverage())
def test_saturate_always_gives_topology(cov):
    t = saturate(cov)
    assert check_topology(t).ok
    assert as_dict(t) == naive_saturation(cov)
    # upward closure
    c = cov.base
    for x in c.objects:
        for s in t.covering[x]:
            for r in sieve_masks(c, x):
                if s & ~r == 0:
                    assert r in t.covering[x]


@settings(max_examples=40, deadline=None)
@given(random_coverage(), random_coverage())
def test_saturate_monotone(a, b):
    if a.base is not b.base:
        return
    both = a.union(b)
    assert saturate(a) <= saturate(both)


def test_composite_families_stay_effective(skel2):
    from sitecalc.workbench.suites import composite_family, sample_composite_families

    samples = list(sample_composite_families(skel2, 50, seed=7))
    assert len(samples) == 50
    for x, outer, inners in samples:
        assert is_effective_epi_family_mask(skel2, x, composite_family(skel2, outer, inners))


def test_pullback_of_top_is_top(skel2):
    for x in skel2.objects:
        for f in skel2.morphisms_into(x):
            assert pullback_mask(skel2, f, skel2.into_masks[x]) == skel2.into_masks[skel2.dom(f)]
