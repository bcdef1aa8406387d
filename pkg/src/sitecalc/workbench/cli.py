"""``sitecalc`` command-line driver.

Exit codes: 0 when the answer is yes or the command succeeded, 1 when it
is no or a counterexample was found, 2 on usage or input errors.
``--format structured`` prints one ``key=value`` record per line.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from .. import config
from ..errors import AxiomViolation, SitecalcError
from ..fincat import FinCat, Presheaf, constant_presheaf, mask_members, representable, validate_category
from ..limits import classify_epi, find_binary_coproduct, find_initial, kernel_pair
from ..sheaves import is_sheaf_for_topology, sheaf_census
from ..sieves import sieve_masks
from ..topology import (
    Coverage,
    GrothTopology,
    check_topology,
    is_finitary_extensive,
    is_precoherent,
    is_preregular,
    minimal_topology,
    named_coverage,
    saturate,
)
from ..transport import check_equivalence_conditions, is_cover_dense, verify_sheaf_equivalence
from .builtins import builtin_category, builtin_functor, is_builtin, resolve_category_name
from .docformat import Document, parse_document
from .suites import run_suites, suite_ids

COVERAGE_KINDS = ("regular", "extensive", "coherent", "union", "minimal")


class Output:
    def __init__(self, structured: bool, stream=None):
        self.structured = structured
        self.stream = stream or sys.stdout

    def emit(self, text: str, **record):
        if self.structured:
            print(" ".join(f"{k}={_value(v)}" for k, v in record.items()), file=self.stream)
        else:
            print(text, file=self.stream)


def _value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ",".join(_value(x) for x in v) if v else "-"
    s = str(v)
    return s.replace(" ", "_") if s else "-"


def _names(c: FinCat, mask: int) -> list[str]:
    return [c.name_of(f) for f in mask_members(mask)]


def _braced(c: FinCat, mask: int) -> str:
    return "{" + " ".join(_names(c, mask)) + "}"


# -- loading ---------------------------------------------------------------------


def load(path: str, category: Optional[str] = None) -> tuple[FinCat, Optional[Document]]:
    if is_builtin(path):
        return builtin_category(path), None
    doc = parse_document(Path(path).read_text(encoding="utf-8"))
    if category is not None:
        if category not in doc.categories:
            raise SitecalcError(f"no category {category!r} in {path}")
        return doc.categories[category], doc
    if not doc.categories:
        raise SitecalcError(f"{path} declares no category")
    return next(iter(doc.categories.values())), doc


def _topology(c: FinCat, spec: str, doc: Optional[Document], cap) -> GrothTopology:
    if spec == "minimal":
        return minimal_topology(c)
    return saturate(_coverage(c, spec, doc, cap), cap)


def _coverage(c: FinCat, spec: str, doc: Optional[Document], cap) -> Coverage:
    if spec in COVERAGE_KINDS:
        return named_coverage(c, spec, cap)
    if spec.startswith("file:"):
        other = parse_document(Path(spec[5:]).read_text(encoding="utf-8"))
        for cname, covs in other.coverages.items():
            if covs:
                moved = _rename_coverage(next(iter(covs.values())), c)
                if moved is not None:
                    return moved
        raise SitecalcError(f"{spec[5:]} has no coverage whose morphism names match {c.name}")
    if doc is not None:
        for covs in doc.coverages.values():
            if spec in covs and covs[spec].base == c:
                return covs[spec]
    raise SitecalcError(f"unknown coverage {spec!r}")


def _rename_coverage(cov: Coverage, c: FinCat) -> Optional[Coverage]:
    """Carry ``cov`` onto ``c`` by morphism names; None when the names or types disagree."""
    src = cov.base
    if sorted(src.morphism_names) != sorted(c.morphism_names):
        return None
    index = {n: i for i, n in enumerate(c.morphism_names)}
    moved = [0] * src.morphism_count
    for f in range(src.morphism_count):
        g = index[src.name_of(f)]
        if (src.object_name(src.dom(f)), src.object_name(src.cod(f))) != (c.object_name(c.dom(g)), c.object_name(c.cod(g))):
            return None
        moved[f] = g
    covering = [set() for _ in c.objects]
    for x in src.objects:
        y = c.object_names.index(src.object_name(x))
        for mask in cov.covering[x]:
            covering[y].add(sum(1 << moved[f] for f in mask_members(mask)))
    return Coverage(c, tuple(frozenset(s) for s in covering), name=cov.name)


def _presheaf(c: FinCat, name: str, doc: Optional[Document]) -> Presheaf:
    if name.startswith("rep:"):
        obj = name[4:]
        if obj not in c.object_names:
            raise SitecalcError(f"unknown object {obj!r}")
        return representable(c, c.object_names.index(obj))
    if name.startswith("const:"):
        return constant_presheaf(c, int(name[6:]))
    if doc is not None:
        for ps in doc.presheaves.values():
            if name in ps and ps[name].base == c:
                return ps[name]
    raise SitecalcError(f"unknown presheaf {name!r}")


# -- subcommands ---------------------------------------------------------------------


def cmd_validate(args, out: Output) -> int:
    try:
        c, _ = load(args.category, args.name)
    except AxiomViolation as exc:
        for v in exc.report.violations if exc.report is not None else ():
            out.emit(f"VIOLATION {v}", kind="violation", law=v.law, morphisms=list(v.morphisms))
        out.emit(f"INVALID {exc}", kind="status", status="invalid")
        return 1
    report = validate_category(c)
    for v in report.violations:
        out.emit(f"VIOLATION {v}", kind="violation", law=v.law, morphisms=list(v.morphisms))
    if report:
        out.emit(
            f"OK {c.name}: {c.object_count} objects, {c.morphism_count} morphisms",
            kind="status", status="ok", category=c.name, objects=c.object_count, morphisms=c.morphism_count,
        )
        return 0
    return 1


def cmd_epis(args, out: Output) -> int:
    c, _ = load(args.category, args.name)

    def yn(b):
        return "yes" if b else "no"

    for f in range(c.morphism_count):
        k = classify_epi(c, f)
        d, cd = c.morphisms[f]
        out.emit(
            f"{c.name_of(f)} : {c.object_name(d)} -> {c.object_name(cd)}  epi={yn(k.is_epi)} "
            f"regular={yn(k.is_regular_epi)} effective={yn(k.is_effective_epi)} kernel-pair={yn(k.has_kernel_pair)}",
            morphism=c.name_of(f), dom=c.object_name(d), cod=c.object_name(cd), epi=k.is_epi,
            regular=k.is_regular_epi, effective=k.is_effective_epi, kernel_pair=k.has_kernel_pair,
        )
    return 0


def cmd_limits(args, out: Output) -> int:
    c, _ = load(args.category, args.name)
    i = find_initial(c)
    init = c.object_name(i) if i is not None else "none"
    out.emit(f"initial {init}", kind="initial", object=init)
    for x in c.objects:
        for y in range(x, c.object_count):
            w = find_binary_coproduct(c, x, y)
            xn, yn = c.object_name(x), c.object_name(y)
            if w is None:
                out.emit(f"coproduct {xn} {yn} -> none", kind="coproduct", left=xn, right=yn, apex="none")
            else:
                legs = [c.name_of(l) for l in w.legs]
                out.emit(
                    f"coproduct {xn} {yn} -> {c.object_name(w.apex)} legs {' '.join(legs)}",
                    kind="coproduct", left=xn, right=yn, apex=c.object_name(w.apex), legs=legs,
                )
    for f in range(c.morphism_count):
        w = kernel_pair(c, f)
        if w is None:
            out.emit(f"kernel-pair {c.name_of(f)} -> none", kind="kernel-pair", morphism=c.name_of(f), apex="none")
        else:
            legs = [c.name_of(l) for l in w.legs]
            out.emit(
                f"kernel-pair {c.name_of(f)} -> {c.object_name(w.apex)} legs {' '.join(legs)}",
                kind="kernel-pair", morphism=c.name_of(f), apex=c.object_name(w.apex), legs=legs,
            )
    return 0


def cmd_predicates(args, out: Output) -> int:
    c, _ = load(args.category, args.name)
    results = [
        ("preregular", is_preregular(c)),
        ("finitary-extensive", is_finitary_extensive(c)),
        ("precoherent", is_precoherent(c, args.cap)),
    ]
    for name, r in results:
        tail = "" if r else f"  witness={list(r.witness)} reason={r.reason}"
        out.emit(f"{name} {'true' if r else 'false'}{tail}", predicate=name, value=bool(r),
                 witness=list(r.witness), reason=r.reason)
    return 0 if all(r for _, r in results) else 1


def cmd_topology(args, out: Output) -> int:
    c, doc = load(args.category, args.name)
    t = _topology(c, args.coverage, doc, args.cap)
    for x in c.objects:
        for s in sorted(t.covering[x]):
            out.emit(f"on {c.object_name(x)} : {_braced(c, s)}", object=c.object_name(x), sieve=_names(c, s))
    report = check_topology(t, args.cap)
    out.emit(f"topology {'OK' if report else 'INVALID'}", kind="status", valid=bool(report))
    return 0 if report else 1


def cmd_sieves(args, out: Output) -> int:
    c, _ = load(args.category, args.name)
    for x in c.objects:
        for s in sieve_masks(c, x, args.cap):
            out.emit(f"on {c.object_name(x)} : {_braced(c, s)}", object=c.object_name(x), sieve=_names(c, s))
    return 0


def cmd_sheaf(args, out: Output) -> int:
    c, doc = load(args.category, args.name)
    p = _presheaf(c, args.presheaf, doc)
    t = _topology(c, args.topology, doc, args.cap)
    ok = is_sheaf_for_topology(p, t)
    out.emit(f"sheaf {p.name} for {args.topology}: {'true' if ok else 'false'}",
             presheaf=p.name, topology=args.topology, sheaf=ok)
    return 0 if ok else 1


def cmd_census(args, out: Output) -> int:
    c, doc = load(args.category, args.name)
    t = _topology(c, args.topology, doc, args.cap)
    sheaves = sheaf_census(c, t, args.max_carrier)
    out.emit(f"census {len(sheaves)} sheaves up to isomorphism (carriers <= {args.max_carrier})",
             kind="count", count=len(sheaves), max_carrier=args.max_carrier)
    for i, p in enumerate(sheaves):
        out.emit(f"  [{i}] carriers {' '.join(map(str, p.carrier))}", kind="sheaf", index=i, carriers=list(p.carrier))
    return 0


def cmd_transport(args, out: Output) -> int:
    if is_builtin(args.functor):
        fn = builtin_functor(args.functor)
    else:
        doc = parse_document(Path(args.functor).read_text(encoding="utf-8"), resolve=resolve_category_name)
        if not doc.functors:
            raise SitecalcError(f"{args.functor} declares no functor")
        fn = next(iter(doc.functors.values()))
    cond = check_equivalence_conditions(fn, args.cap)
    for line in cond.lines():
        key, status = line.rsplit(" ", 1)
        out.emit(line, condition=key, status=status)
    if not cond:
        return 1
    report = verify_sheaf_equivalence(fn, args.max_carrier, cap=args.cap)
    out.emit(f"census source={report.source_count} target={report.target_count}",
             kind="census", source=report.source_count, target=report.target_count)
    for j, i in report.matching:
        out.emit(f"  target[{j}] -> source[{i}]", kind="match", target=j, source=i)
    dense = bool(is_cover_dense(fn, saturate(named_coverage(fn.target, "coherent", args.cap), args.cap)))
    verdicts = [
        ("cover-dense", dense),
        ("lands-in-sheaves", report.lands_in_sheaves),
        ("injective-on-classes", report.injective),
        ("surjective-on-classes", report.surjective),
        ("induced-equals-coherent", report.topologies_agree),
    ]
    for key, v in verdicts:
        out.emit(f"{key} {'PASS' if v else 'FAIL'}", condition=key, status="PASS" if v else "FAIL")
    return 0 if all(v for _, v in verdicts) else 1


def cmd_check(args, out: Output) -> int:
    if args.list:
        for s in suite_ids():
            out.emit(s, suite=s)
        return 0
    if args.category is None:
        raise SitecalcError("a category is required")
    c, _ = load(args.category, args.name)
    names = None
    if args.prop:
        unknown = [p for p in args.prop if p not in suite_ids()]
        if unknown:
            raise SitecalcError(f"unknown suite {unknown[0]!r}; use --list")
        names = args.prop
    results = run_suites(c, names, jobs=args.jobs)
    for r in results:
        out.emit(r.text(), suite=r.suite, status=r.status, checked=r.checked, detail=r.detail)
    return 1 if any(r.status == "FAIL" for r in results) else 0


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--name", help="category to use when the document declares several")
    common.add_argument("--cap", type=int, default=None,
                        help=f"non-identity morphisms allowed into one object (default {config.SIEVE_CAP})")

    p = argparse.ArgumentParser(prog="sitecalc", description="Finite sites workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, category=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if category:
            sp.add_argument("category", help="a .fincat document or builtin:NAME[:ARG...]")
        sp.set_defaults(func=fn)
        return sp

    add("validate", cmd_validate, "check the category axioms")
    add("epis", cmd_epis, "classify every morphism")
    add("limits", cmd_limits, "initial object, binary coproducts, kernel pairs")
    add("predicates", cmd_predicates, "preregular / finitary extensive / precoherent")
    sp = add("topology", cmd_topology, "covering sieves of a generated topology")
    sp.add_argument("--coverage", default="coherent",
                    help="regular|extensive|coherent|union|minimal|file:PATH|coverage block name")
    add("sieves", cmd_sieves, "all sieves on every object")
    sp = add("sheaf", cmd_sheaf, "decide sheafhood of a presheaf")
    sp.add_argument("--presheaf", required=True, help="block name, rep:OBJECT or const:K")
    sp.add_argument("--topology", default="coherent")
    sp = add("census", cmd_census, "sheaves with bounded carriers, up to isomorphism")
    sp.add_argument("--max-carrier", type=int, default=2)
    sp.add_argument("--topology", default="coherent")
    sp = add("transport", cmd_transport, "compare sites along a functor", category=False)
    sp.add_argument("--functor", required=True, help="functor document or builtin:NAME[:ARG]")
    sp.add_argument("--max-carrier", type=int, default=2)
    sp = sub.add_parser("check-paper", parents=[common], help="run the cross-checking suites")
    sp.add_argument("category", nargs="?")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true", help="run every suite (default)")
    group.add_argument("--prop", action="append", metavar="ID", help="run one suite; repeatable")
    group.add_argument("--list", action="store_true", help="list suite ids")
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out = Output(args.format == "structured")
    try:
        return args.func(args, out)
    except (SitecalcError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
