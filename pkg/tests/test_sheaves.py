import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from sitecalc.errors import BudgetExceeded, MissingPullback, NoKernelPair, NotExtensive
from sitecalc.fincat import Presheaf, constant_presheaf, representable, validate_presheaf
from sitecalc.limits import effective_epis, is_projective, kernel_pair
from sitecalc.sheaves import (
    FamilyOfElements,
    amalgamations,
    are_isomorphic,
    canonical_form,
    census,
    enumerate_presheaves,
    equalizer_condition,
    find_isomorphism,
    is_compatible,
    is_sheaf_for_coverage,
    is_sheaf_for_presieve,
    is_sheaf_for_sieve,
    is_sheaf_for_topology,
    preserves_finite_products,
    pullback_diagram_sheaf,
    relabel,
    sheaf_census,
)
from sitecalc.sieves import Presieve, generate, presieve_masks
from sitecalc.topology import (
    coherent_coverage,
    extensive_coverage,
    minimal_topology,
    regular_coverage,
    saturate,
)
from sitecalc.workbench import generators as g

from conftest import find_morphism


# -- independent oracles ---------------------------------------------------------------


def brute_compatible(f, members, values):
    c = f.base
    res = f.restriction
    for (m1, v1), (m2, v2) in product(zip(members, values), repeat=2):
        for y in c.objects:
            for a in c.hom(y, c.dom(m1)):
                for b in c.hom(y, c.dom(m2)):
                    if c.compose(m1, a) == c.compose(m2, b) and res[a][v1] != res[b][v2]:
                        return False
    return True


def brute_sheaf(f, p):
    members = p.members
    res = f.restriction
    for values in product(*(range(f.carrier[f.base.dom(m)]) for m in members)):
        if not brute_compatible(f, members, values):
            continue
        amalg = [e for e in range(f.carrier[p.target]) if all(res[m][e] == v for m, v in zip(members, values))]
        if len(amalg) != 1:
            return False
    return True


def brute_presheaves(c, k):
    out = []
    for carrier in product(range(k + 1), repeat=c.object_count):
        spaces = [list(product(range(carrier[c.dom(m)]), repeat=carrier[c.cod(m)])) for m in range(c.morphism_count)]
        for tables in product(*spaces):
            try:
                p = Presheaf(c, carrier, tables)
            except Exception:
                continue
            if validate_presheaf(p).ok:
                out.append(p)
    return out


# -- families ----------------------------------------------------------------------------


def test_compatibility_examples(skel2):
    h2 = representable(skel2, 2)
    pts = Presieve.of(skel2, 2, [find_morphism(skel2, "s1_2_0"), find_morphism(skel2, "s1_2_1")])
    for a, b in product(range(2), repeat=2):
        fam = FamilyOfElements(pts, (a, b))
        assert is_compatible(h2, fam) == brute_compatible(h2, pts.members, (a, b))
        assert is_compatible(h2, fam)
        got = amalgamations(h2, fam)
        assert len(got) == 1
        # the amalgamation is the map 2 -> 2 sending the two points to a and b
        model = g.finset_skeleton_model(2)
        assert model.functions[skel2.hom(2, 2)[got[0]]] == (a, b)
    k = constant_presheaf(skel2, 3)
    fam = FamilyOfElements(pts, (1, 1))
    assert is_compatible(k, fam)


def test_amalgamation_edge_cases(skel2):
    f = constant_presheaf(skel2, 2)
    assert amalgamations(f, FamilyOfElements(Presieve(skel2, 1, 0), ())) == [0, 1]
    top = Presieve(skel2, 1, skel2.into_masks[1])
    h = representable(skel2, 1)
    for x in range(h.carrier[1]):
        values = tuple(h.restriction[m][x] for m in top.members)
        assert amalgamations(h, FamilyOfElements(top, values)) == [x]


def test_sheaf_for_presieve_examples(skel2):
    two = constant_presheaf(skel2, 2)
    assert not is_sheaf_for_presieve(two, Presieve(skel2, 1, 0))
    for x in skel2.objects:
        assert is_sheaf_for_presieve(two, Presieve(skel2, x, skel2.into_masks[x]))
    coh = coherent_coverage(skel2)
    for w in skel2.objects:
        for x in skel2.objects:
            for mask in coh.covering[x]:
                assert is_sheaf_for_presieve(representable(skel2, w), Presieve(skel2, x, mask))


@pytest.mark.parametrize("name", ["skel2", "arrow", "diamond"])
def test_sheaf_check_matches_brute_force(name, request):
    c = request.getfixturevalue(name)
    presheaves = list(enumerate_presheaves(c, 2))
    rng = random.Random(3)
    sample = rng.sample(presheaves, min(25, len(presheaves)))
    for f in sample:
        for x in c.objects:
            for mask in presieve_masks(c, x):
                p = Presieve(c, x, mask)
                assert is_sheaf_for_presieve(f, p) == brute_sheaf(f, p)


def test_budget(skel2):
    f = constant_presheaf(skel2, 2)
    p = Presieve(skel2, 2, skel2.into_masks[2] & ~(1 << skel2.identity(2)))
    with pytest.raises(BudgetExceeded):
        is_sheaf_for_presieve(f, p, budget=4)


def test_budget_from_environment(monkeypatch, skel2):
    monkeypatch.setenv("SITECALC_BUDGET", "4")
    f = constant_presheaf(skel2, 2)
    p = Presieve(skel2, 2, skel2.into_masks[2] & ~(1 << skel2.identity(2)))
    with pytest.raises(BudgetExceeded):
        is_sheaf_for_presieve(f, p)


# -- topologies ----------------------------------------------------------------------------


def test_topology_examples(skel2):
    for f in (constant_presheaf(skel2, 2), representable(skel2, 1)):
        assert is_sheaf_for_topology(f, minimal_topology(skel2))
    coh = saturate(coherent_coverage(skel2))
    for w in skel2.objects:
        assert is_sheaf_for_topology(representable(skel2, w), coh)
    ext = saturate(extensive_coverage(skel2))
    assert not is_sheaf_for_topology(constant_presheaf(skel2, 2), ext)
    assert not is_sheaf_for_presieve(constant_presheaf(skel2, 2), Presieve(skel2, 0, 0))


@pytest.mark.parametrize("kind", ["regular", "extensive", "coherent"])
def test_coverage_and_topology_agree(skel2, kind):
    cov = {"regular": regular_coverage, "extensive": extensive_coverage, "coherent": coherent_coverage}[kind](skel2)
    t = saturate(cov)
    for f in enumerate_presheaves(skel2, 2):
        assert is_sheaf_for_coverage(f, cov) == is_sheaf_for_topology(f, t)


def test_projective_objects_make_every_presheaf_regular_sheaf(skel2):
    assert all(is_projective(skel2, x) for x in skel2.objects)
    t = saturate(regular_coverage(skel2))
    for f in enumerate_presheaves(skel2, 2):
        assert is_sheaf_for_topology(f, t)


def test_extensive_sheaves_are_product_preserving(skel2):
    t = saturate(extensive_coverage(skel2))
    for f in enumerate_presheaves(skel2, 2):
        assert is_sheaf_for_topology(f, t) == preserves_finite_products(f)


# -- equalizer and products ------------------------------------------------------------------------


def test_equalizer_condition():
    c = g.gen_finset_skeleton(4)
    pi = find_morphism(c, "s2_1_00")
    kp = kernel_pair(c, pi)
    for w in (0, 1, 2):
        assert equalizer_condition(representable(c, w), pi, kp)
    assert equalizer_condition(constant_presheaf(c, 1), pi, kp)
    ident = c.identity(1)
    assert equalizer_condition(constant_presheaf(c, 2), ident, kernel_pair(c, ident))


def test_equalizer_condition_on_subset_presheaf():
    c = g.gen_finset_skeleton(4)
    pi = find_morphism(c, "s2_1_00")
    # subsets of X, restricted by preimage, satisfy the condition
    model = g.finset_skeleton_model(4)
    carriers = tuple(1 << model.sizes[x] for x in c.objects)
    tables = []
    for m in range(c.morphism_count):
        fn = model.functions[m]
        tables.append(tuple(sum(1 << i for i, v in enumerate(fn) if u >> v & 1) for u in range(carriers[c.cod(m)])))
    power = Presheaf(c, carriers, tuple(tables))
    assert validate_presheaf(power).ok
    assert equalizer_condition(power, pi, kernel_pair(c, pi))
    # pi has a section, so F(pi) is injective for every presheaf; break the
    # condition by handing over a cone that is not the kernel pair instead
    fake = kernel_pair(c, c.identity(2))
    assert not equalizer_condition(power, pi, fake)
    with pytest.raises(NoKernelPair):
        equalizer_condition(power, pi, None)


def test_products(skel2):
    for w in skel2.objects:
        assert preserves_finite_products(representable(skel2, w))
    assert not preserves_finite_products(constant_presheaf(skel2, 2))
    assert preserves_finite_products(constant_presheaf(skel2, 1))
    with pytest.raises(NotExtensive):
        preserves_finite_products(constant_presheaf(g.cyclic_group(2), 1))


def test_pullback_diagram_matches(diamond, arrow):
    for c in (diamond, arrow):
        for f in enumerate_presheaves(c, 2):
            for x in c.objects:
                for mask in presieve_masks(c, x):
                    p = Presieve(c, x, mask)
                    try:
                        via = pullback_diagram_sheaf(f, p)
                    except MissingPullback:
                        continue
                    assert via == is_sheaf_for_presieve(f, p)


# -- enumeration and census ------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["arrow", "trivial"])
def test_enumeration_matches_brute_force(name, request):
    c = request.getfixturevalue(name)
    got = list(enumerate_presheaves(c, 2))
    assert len(got) == len(set(got))
    assert set(got) == set(brute_presheaves(c, 2))


def test_trivial_census(trivial):
    classes = sheaf_census(trivial, minimal_topology(trivial), 2)
    assert [p.carrier for p in classes] == [(0,), (1,), (2,)]


def test_terminal_presheaf_always_a_sheaf(skel2):
    for t in (minimal_topology(skel2), saturate(coherent_coverage(skel2))):
        classes = sheaf_census(skel2, t, 1)
        assert any(p.carrier == (1, 1, 1) for p in classes)


def test_census_counts_product_preserving(skel2):
    coh = saturate(coherent_coverage(skel2))
    sheaves = sheaf_census(skel2, coh, 2)
    products = census(skel2, 2, preserves_finite_products)
    assert len(sheaves) == len(products) == 2
    assert [canonical_form(p) for p in sheaves] == [canonical_form(p) for p in products]


def test_isomorphism_helpers(skel2):
    h = representable(skel2, 2)
    perms = ((0,), (1, 0), (3, 2, 1, 0))
    moved = relabel(h, perms)
    assert validate_presheaf(moved).ok
    assert are_isomorphic(h, moved)
    iso = find_isomorphism(h, moved)
    assert relabel(h, iso) == moved
    assert not are_isomorphic(h, representable(skel2, 1))


# -- generation invariance on random samples --------------------------------------------------------


SITES = [g.gen_finset_skeleton(2), g.four_element_poset(), g.walking_arrow(), g.cyclic_group(2), g.chain(3)]
PRESHEAVES = {c.name: list(enumerate_presheaves(c, 2, budget=200_000)) for c in SITES}


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(SITES), st.data())
def test_sheaf_for_presieve_iff_for_generated_sieve(c, data):
    f = data.draw(st.sampled_from(PRESHEAVES[c.name]))
    x = data.draw(st.sampled_from(list(c.objects)))
    mask = data.draw(st.sampled_from(presieve_masks(c, x)))
    p = Presieve(c, x, mask)
    assert is_sheaf_for_presieve(f, p) == is_sheaf_for_sieve(f, generate(p))


def test_effective_epis_cached_consistently(skel2):
    assert effective_epis(skel2) == effective_epis(skel2)
