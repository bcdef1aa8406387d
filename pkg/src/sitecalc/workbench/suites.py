"""Cross-checking suites run by ``sitecalc check-paper``.

Each suite pairs two independent computations (or a hypothesis with a
conclusion) on one category and reports PASS, FAIL or SKIP. Sampling is
seeded, so output is identical across runs and ``--jobs`` settings.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import islice
from typing import Callable, Optional

from ..errors import BudgetExceeded, CapExceeded
from ..fincat import FinCat, Presheaf, constant_presheaf, mask_members, representable
from ..limits import (
    classify_epi,
    effective_epis,
    find_coproduct,
    is_effective_epi_family,
    is_effective_epi_family_mask,
    effective_family_via_sheaf,
    is_projective,
    kernel_pair,
)
from ..sheaves import (
    enumerate_presheaves,
    equalizer_condition,
    is_sheaf_for_coverage,
    is_sheaf_for_presieve,
    is_sheaf_for_topology,
    preserves_finite_products,
)
from ..sieves import Presieve, generate, presieve_masks, sieve_masks
from ..topology import (
    check_coverage,
    check_topology,
    coherent_coverage,
    direct_topology,
    effective_presieves,
    extensive_coverage,
    generated_by_union,
    is_finitary_extensive,
    is_precoherent,
    is_preregular,
    regular_coverage,
    saturate,
    topology_infimum,
)

SAMPLE_SEED = 20240


@dataclass(frozen=True)
class SuiteResult:
    suite: str
    status: str  # PASS, FAIL or SKIP
    checked: int = 0
    detail: str = ""

    def text(self) -> str:
        extra = f" ({self.detail})" if self.detail else ""
        return f"{self.status} {self.suite} checked={self.checked}{extra}"

    def structured(self) -> str:
        detail = self.detail.replace(" ", "_")
        return f"suite={self.suite} status={self.status} checked={self.checked} detail={detail or '-'}"


class _Context:
    """Lazily computed facts shared by the suites of one run."""

    def __init__(self, c: FinCat):
        self.c = c
        self._memo: dict = {}

    def memo(self, key, fn):
        if key not in self._memo:
            self._memo[key] = fn()
        return self._memo[key]

    @property
    def preregular(self):
        return self.memo("pre", lambda: bool(is_preregular(self.c)))

    @property
    def extensive(self):
        return self.memo("ext", lambda: bool(is_finitary_extensive(self.c)))

    @property
    def precoherent(self):
        return self.memo("coh", lambda: bool(is_precoherent(self.c)))

    def topology(self, kind):
        builders = {"regular": regular_coverage, "extensive": extensive_coverage, "coherent": coherent_coverage}
        return self.memo(("top", kind), lambda: saturate(builders[kind](self.c)))

    def all_projective(self):
        return self.memo("proj", lambda: all(is_projective(self.c, x) for x in self.c.objects))

    def presheaves(self, limit: int = 60) -> list[Presheaf]:
        """Representables, small constants, then enumerated presheaves with carriers at most 2."""

        def build():
            c = self.c
            out = [representable(c, w) for w in c.objects]
            out += [constant_presheaf(c, k) for k in range(3)]
            found = []
            try:
                for p in islice(enumerate_presheaves(c, 2, budget=200_000), 2000):
                    found.append(p)
            except BudgetExceeded:
                pass
            rng = random.Random(SAMPLE_SEED)
            if len(found) > limit:
                found = rng.sample(found, limit)
            return out + found

        return self.memo(("psh", limit), build)


Suite = Callable[[_Context], SuiteResult]
SUITES: dict[str, Suite] = {}


def suite(name: str):
    def register(fn):
        SUITES[name] = fn
        return fn

    return register


def _verdict(name: str, failures: list[str], checked: int) -> SuiteResult:
    if failures:
        return SuiteResult(name, "FAIL", checked, f"first counterexample: {failures[0]}")
    return SuiteResult(name, "PASS", checked)


def _skip(name: str, why: str) -> SuiteResult:
    return SuiteResult(name, "SKIP", 0, why)


@suite("eff-epi-implies-epi")
def _epi_hierarchy(ctx: _Context) -> SuiteResult:
    c = ctx.c
    bad = []
    for f in range(c.morphism_count):
        k = classify_epi(c, f)
        if k.is_effective_epi and not k.is_epi:
            bad.append(f"{c.name_of(f)} effective but not epi")
        if k.is_regular_epi and not k.is_effective_epi:
            bad.append(f"{c.name_of(f)} regular but not effective")
        if k.is_effective_epi and k.has_kernel_pair and not k.is_regular_epi:
            bad.append(f"{c.name_of(f)} effective with kernel pair but not regular")
    return _verdict("eff-epi-implies-epi", bad, c.morphism_count)


@suite("family-sheaf-equivalence")
def _family_sheaf(ctx: _Context) -> SuiteResult:
    c = ctx.c
    bad, n = [], 0
    for x in c.objects:
        for m in presieve_masks(c, x):
            p = Presieve(c, x, m)
            n += 1
            if is_effective_epi_family(c, p) != effective_family_via_sheaf(c, p):
                bad.append(repr(p))
    return _verdict("family-sheaf-equivalence", bad, n)


@suite("singleton-family-effective")
def _singleton(ctx: _Context) -> SuiteResult:
    c = ctx.c
    eff = effective_epis(c)
    bad = [
        c.name_of(f)
        for f in range(c.morphism_count)
        if is_effective_epi_family_mask(c, c.cod(f), 1 << f) != (f in eff)
    ]
    return _verdict("singleton-family-effective", bad, c.morphism_count)


@suite("coproduct-family-effective")
def _coproduct_family(ctx: _Context) -> SuiteResult:
    c = ctx.c
    eff = effective_epis(c)
    bad, n = [], 0
    for x in c.objects:
        for m in effective_presieves(c, x):
            members = mask_members(m)
            w = find_coproduct(c, [c.dom(f) for f in members])
            if w is None:
                continue
            n += 1
            induced = w.mediator((x, *members))
            if induced not in eff:
                bad.append(f"{repr(Presieve(c, x, m))} induces {c.name_of(induced)}")
    return _verdict("coproduct-family-effective", bad, n)


@suite("preregular-extensive-precoherent")
def _prop_precoherent(ctx: _Context) -> SuiteResult:
    if not (ctx.preregular and ctx.extensive):
        return _skip("preregular-extensive-precoherent", "hypotheses fail")
    return _verdict("preregular-extensive-precoherent", [] if ctx.precoherent else ["not precoherent"], 1)


def _available(ctx: _Context) -> list[str]:
    kinds = []
    if ctx.preregular:
        kinds.append("regular")
    if ctx.extensive:
        kinds.append("extensive")
    if ctx.precoherent:
        kinds.append("coherent")
    return kinds


@suite("coverage-axioms")
def _coverage_axioms(ctx: _Context) -> SuiteResult:
    builders = {"regular": regular_coverage, "extensive": extensive_coverage, "coherent": coherent_coverage}
    kinds = _available(ctx)
    if not kinds:
        return _skip("coverage-axioms", "no named coverage applies")
    bad = [k for k in kinds if not check_coverage(builders[k](ctx.c))]
    return _verdict("coverage-axioms", bad, len(kinds))


@suite("saturation-is-topology")
def _saturation_topology(ctx: _Context) -> SuiteResult:
    kinds = _available(ctx)
    if not kinds:
        return _skip("saturation-is-topology", "no named coverage applies")
    bad = []
    for k in kinds:
        report = check_topology(ctx.topology(k))
        if not report:
            bad.append(f"{k}: {report.violations[0]}")
    return _verdict("saturation-is-topology", bad, len(kinds))


@suite("saturation-is-infimum")
def _infimum(ctx: _Context) -> SuiteResult:
    c = ctx.c
    kinds = _available(ctx)
    if not kinds:
        return _skip("saturation-is-infimum", "no named coverage applies")
    total = sum(len(sieve_masks(c, x)) for x in c.objects)
    if total > 16:
        return _skip("saturation-is-infimum", f"{total} sieves exceed the exhaustive bound 16")
    builders = {"regular": regular_coverage, "extensive": extensive_coverage, "coherent": coherent_coverage}
    bad = [k for k in kinds if topology_infimum(builders[k](c)) != ctx.topology(k)]
    return _verdict("saturation-is-infimum", bad, len(kinds))


def _direct(kind: str):
    name = f"direct-{kind}-sieves"

    def run(ctx: _Context) -> SuiteResult:
        if kind not in _available(ctx):
            return _skip(name, "predicate fails")
        sat = ctx.topology(kind)
        direct = direct_topology(ctx.c, kind)
        bad = [ctx.c.object_name(x) for x in ctx.c.objects if sat.covering[x] != direct.covering[x]]
        return _verdict(name, [f"disagreement at {b}" for b in bad], ctx.c.object_count)

    SUITES[name] = run


for _k in ("regular", "extensive", "coherent"):
    _direct(_k)


@suite("union-generates-coherent")
def _union(ctx: _Context) -> SuiteResult:
    if not (ctx.preregular and ctx.extensive):
        return _skip("union-generates-coherent", "hypotheses fail")
    c = ctx.c
    ok = generated_by_union(regular_coverage(c), extensive_coverage(c)) == ctx.topology("coherent")
    return _verdict("union-generates-coherent", [] if ok else ["topologies differ"], 1)


@suite("sieve-generation-sheaf")
def _generation(ctx: _Context) -> SuiteResult:
    c = ctx.c
    rng = random.Random(SAMPLE_SEED)
    pres = ctx.presheaves()
    all_presieves = [(x, m) for x in c.objects for m in presieve_masks(c, x)]
    bad, n = [], 0
    for _ in range(300):
        p = rng.choice(pres)
        x, m = rng.choice(all_presieves)
        ps = Presieve(c, x, m)
        try:
            a = is_sheaf_for_presieve(p, ps)
            b = is_sheaf_for_presieve(p, generate(ps))
        except BudgetExceeded:
            continue
        n += 1
        if a != b:
            bad.append(f"{p.name} on {ps!r}")
    return _verdict("sieve-generation-sheaf", bad, n)


@suite("coverage-sheaf-topology")
def _coverage_sheaf(ctx: _Context) -> SuiteResult:
    builders = {"regular": regular_coverage, "extensive": extensive_coverage, "coherent": coherent_coverage}
    kinds = _available(ctx)
    if not kinds:
        return _skip("coverage-sheaf-topology", "no named coverage applies")
    bad, n = [], 0
    for k in kinds:
        cov = builders[k](ctx.c)
        for p in ctx.presheaves():
            n += 1
            if is_sheaf_for_coverage(p, cov) != is_sheaf_for_topology(p, ctx.topology(k)):
                bad.append(f"{k}: {p.name} carriers {p.carrier}")
    return _verdict("coverage-sheaf-topology", bad, n)


def _subcanonical(kind: str):
    name = f"subcanonical-{kind}"

    def run(ctx: _Context) -> SuiteResult:
        if kind not in _available(ctx):
            return _skip(name, "predicate fails")
        t = ctx.topology(kind)
        c = ctx.c
        bad = [c.object_name(w) for w in c.objects if not is_sheaf_for_topology(representable(c, w), t)]
        return _verdict(name, [f"h_{b} is not a sheaf" for b in bad], c.object_count)

    SUITES[name] = run


for _k in ("regular", "extensive", "coherent"):
    _subcanonical(_k)


@suite("projective-regular-sheaves")
def _projective(ctx: _Context) -> SuiteResult:
    if not (ctx.preregular and ctx.all_projective()):
        return _skip("projective-regular-sheaves", "hypotheses fail")
    t = ctx.topology("regular")
    pres = ctx.presheaves()
    bad = [f"{p.name} carriers {p.carrier}" for p in pres if not is_sheaf_for_topology(p, t)]
    return _verdict("projective-regular-sheaves", bad, len(pres))


@suite("extensive-sheaf-products")
def _ext_products(ctx: _Context) -> SuiteResult:
    if not ctx.extensive:
        return _skip("extensive-sheaf-products", "not finitary extensive")
    t = ctx.topology("extensive")
    pres = ctx.presheaves()
    bad = [
        f"{p.name} carriers {p.carrier}"
        for p in pres
        if is_sheaf_for_topology(p, t) != preserves_finite_products(p)
    ]
    return _verdict("extensive-sheaf-products", bad, len(pres))


@suite("coherent-sheaf-products-eqcond")
def _coh_eqcond(ctx: _Context) -> SuiteResult:
    if not (ctx.preregular and ctx.extensive):
        return _skip("coherent-sheaf-products-eqcond", "hypotheses fail")
    c = ctx.c
    kps = [(f, kernel_pair(c, f)) for f in sorted(effective_epis(c))]
    kps = [(f, kp) for f, kp in kps if kp is not None]
    t = ctx.topology("coherent")
    pres = ctx.presheaves()
    bad = []
    for p in pres:
        sheaf = is_sheaf_for_topology(p, t)
        other = preserves_finite_products(p) and all(equalizer_condition(p, f, kp) for f, kp in kps)
        if sheaf != other:
            bad.append(f"{p.name} carriers {p.carrier}")
    return _verdict("coherent-sheaf-products-eqcond", bad, len(pres))


@suite("projective-coherent-products")
def _proj_products(ctx: _Context) -> SuiteResult:
    if not (ctx.preregular and ctx.extensive and ctx.all_projective()):
        return _skip("projective-coherent-products", "hypotheses fail")
    t = ctx.topology("coherent")
    pres = ctx.presheaves()
    bad = [
        f"{p.name} carriers {p.carrier}"
        for p in pres
        if is_sheaf_for_topology(p, t) != preserves_finite_products(p)
    ]
    return _verdict("projective-coherent-products", bad, len(pres))


def composite_family(c: FinCat, outer: int, inners: dict[int, int]) -> int:
    """Bitset of composites ``f ∘ g`` for each outer member f and each g in its inner family."""
    out = 0
    for f in mask_members(outer):
        for g in mask_members(inners[f]):
            out |= 1 << c.compose(f, g)
    return out


def sample_composite_families(c: FinCat, count: int, seed: int = SAMPLE_SEED):
    """Random (target, outer family, inner families) triples built from effective families."""
    rng = random.Random(seed)
    eff = {x: effective_presieves(c, x) for x in c.objects}
    targets = [x for x in c.objects if eff[x]]
    for _ in range(count):
        x = rng.choice(targets)
        outer = rng.choice(eff[x])
        inners = {f: rng.choice(eff[c.dom(f)]) for f in mask_members(outer)}
        yield x, outer, inners


@suite("composite-families-effective")
def _composites(ctx: _Context) -> SuiteResult:
    c = ctx.c
    bad, n = [], 0
    for x, outer, inners in sample_composite_families(c, 200):
        n += 1
        if not is_effective_epi_family_mask(c, x, composite_family(c, outer, inners)):
            bad.append(f"outer {mask_members(outer)} at {c.object_name(x)}")
    return _verdict("composite-families-effective", bad, n)


def suite_ids() -> list[str]:
    return list(SUITES)


def run_suite(c: FinCat, name: str, ctx: Optional[_Context] = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    try:
        return SUITES[name](ctx or _Context(c))
    except CapExceeded as exc:
        return _skip(name, f"cap exceeded: {exc}")
    except BudgetExceeded as exc:
        return _skip(name, f"budget exceeded: {exc}")


def _run_one(args) -> SuiteResult:
    c, name = args
    return run_suite(c, name)


def run_suites(c: FinCat, names: Optional[list[str]] = None, jobs: int = 1) -> list[SuiteResult]:
    """Run suites in registry order; parallel runs return the same list."""
    names = list(names) if names else suite_ids()
    if jobs <= 1:
        ctx = _Context(c)
        return [run_suite(c, n, ctx) for n in names]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, [(c, n) for n in names]))


__all__ = ["SuiteResult", "composite_family", "run_suite", "run_suites", "sample_composite_families", "suite_ids"]
