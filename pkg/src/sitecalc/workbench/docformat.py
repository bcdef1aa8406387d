"""Plain-text documents describing categories, presheaves, coverages and functors.

Grammar (``#`` starts a comment that runs to the end of the line)::

    category NAME
    objects a b c
    morphism f : a -> b
    identity a = id_a
    compose g f = h                     # g∘f = h
    presheaf P { at a = 3; along f = [0 2 1]; }
    coverage K { on a : {f g} {h}; }
    functor F : A -> B
    object a => x
    morphism f => g

Top-level statements end at a newline; block bodies use ``;``. A
document may hold several categories; presheaf and coverage blocks
attach to the most recent one, and ``object``/``morphism ... =>`` lines
attach to the most recent functor header. Omitted identities are named
``id_<object>``; omitted composites with an identity are implied, as
are omitted ``along`` tables and functor images of identities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import AxiomViolation, ParseError
from ..fincat import FinCat, FinFunctor, Presheaf, validate_category, validate_functor, validate_presheaf
from ..topology import Coverage

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<comment>#[^\n]*)|(?P<nl>\n)|(?P<arrow>->)|(?P<maps>=>)"
    r"|(?P<punct>[:;=\[\]{}])|(?P<name>[^\s#:;=\[\]{}<>\-]+)"
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            tokens.append(Token("nl", "\n", line, col))
            line, col = line + 1, 1
        else:
            if kind in ("arrow", "maps", "punct", "name"):
                tokens.append(Token("name" if kind == "name" else "sym", chunk, line, col))
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass
class _CatDraft:
    name: str
    line: int
    objects: list[str] = field(default_factory=list)
    morphisms: list[tuple[str, str, str]] = field(default_factory=list)
    identities: dict[str, tuple[str, Token]] = field(default_factory=dict)
    compose: dict[tuple[str, str], tuple[str, Token]] = field(default_factory=dict)
    presheaves: list[tuple[str, dict, dict, Token]] = field(default_factory=list)
    coverages: list[tuple[str, dict, Token]] = field(default_factory=list)


@dataclass
class _FunctorDraft:
    name: str
    source: str
    target: str
    token: Token
    objects: dict[str, str] = field(default_factory=dict)
    morphisms: dict[str, str] = field(default_factory=dict)


@dataclass
class Document:
    categories: dict[str, FinCat] = field(default_factory=dict)
    presheaves: dict[str, dict[str, Presheaf]] = field(default_factory=dict)
    coverages: dict[str, dict[str, Coverage]] = field(default_factory=dict)
    functors: dict[str, FinFunctor] = field(default_factory=dict)

    def only_category(self) -> FinCat:
        if len(self.categories) != 1:
            raise ParseError(f"expected exactly one category, found {len(self.categories)}", 1, 1)
        return next(iter(self.categories.values()))


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, msg: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.column)

    def name(self, what: str = "name") -> Token:
        tok = self.peek()
        if tok.kind != "name":
            self.fail(f"expected {what}, found {tok.text or 'end of input'!r}")
        return self.take()

    def sym(self, s: str) -> Token:
        tok = self.peek()
        if tok.kind != "sym" or tok.text != s:
            self.fail(f"expected {s!r}, found {tok.text or 'end of input'!r}")
        return self.take()

    def skip_nl(self):
        while self.peek().kind == "nl":
            self.take()

    def end_statement(self):
        tok = self.peek()
        if tok.kind not in ("nl", "eof"):
            self.fail(f"unexpected {tok.text!r} after statement")
        if tok.kind == "nl":
            self.take()

    def block_open(self):
        self.sym("{")

    def block_tokens(self):
        """Skip newlines inside a block and report whether the block continues."""
        self.skip_nl()
        tok = self.peek()
        if tok.kind == "eof":
            self.fail("unterminated block")
        if tok.kind == "sym" and tok.text == "}":
            self.take()
            return False
        return True

    def integer(self) -> int:
        tok = self.name("integer")
        if not tok.text.isdigit():
            self.fail(f"expected integer, found {tok.text!r}", tok)
        return int(tok.text)

    def semicolon(self):
        self.skip_nl()
        self.sym(";")

    def parse(self) -> tuple[list[_CatDraft], list[_FunctorDraft]]:
        cats: list[_CatDraft] = []
        functors: list[_FunctorDraft] = []
        current_functor: Optional[_FunctorDraft] = None

        def cat(tok) -> _CatDraft:
            if not cats:
                self.fail("statement before any 'category' header", tok)
            return cats[-1]

        while True:
            self.skip_nl()
            tok = self.peek()
            if tok.kind == "eof":
                break
            kw = self.name("keyword")
            word = kw.text
            if word == "category":
                n = self.name("category name")
                if any(c.name == n.text for c in cats):
                    self.fail(f"duplicate category {n.text!r}", n)
                cats.append(_CatDraft(n.text, n.line))
                current_functor = None
            elif word == "objects":
                d = cat(kw)
                while self.peek().kind == "name":
                    o = self.take()
                    if o.text in d.objects:
                        self.fail(f"duplicate object {o.text!r}", o)
                    d.objects.append(o.text)
            elif word == "morphism":
                f = self.name("morphism name")
                if self.peek().kind == "sym" and self.peek().text == "=>":
                    self.take()
                    g = self.name("morphism name")
                    if current_functor is None:
                        self.fail("'=>' mapping outside a functor", kw)
                    if f.text in current_functor.morphisms:
                        self.fail(f"duplicate image for morphism {f.text!r}", f)
                    current_functor.morphisms[f.text] = g.text
                else:
                    d = cat(kw)
                    self.sym(":")
                    a = self.name("object")
                    self.sym("->")
                    b = self.name("object")
                    for o in (a, b):
                        if o.text not in d.objects:
                            self.fail(f"unknown object {o.text!r}", o)
                    if any(m[0] == f.text for m in d.morphisms):
                        self.fail(f"duplicate morphism {f.text!r}", f)
                    d.morphisms.append((f.text, a.text, b.text))
                    current_functor = None
            elif word == "identity":
                d = cat(kw)
                a = self.name("object")
                self.sym("=")
                i = self.name("morphism")
                if a.text not in d.objects:
                    self.fail(f"unknown object {a.text!r}", a)
                if a.text in d.identities:
                    self.fail(f"duplicate identity for {a.text!r}", a)
                d.identities[a.text] = (i.text, i)
            elif word == "compose":
                d = cat(kw)
                g = self.name("morphism")
                f = self.name("morphism")
                self.sym("=")
                h = self.name("morphism")
                if (g.text, f.text) in d.compose:
                    self.fail(f"duplicate composition entry for {g.text} {f.text}", kw)
                d.compose[(g.text, f.text)] = (h.text, h)
            elif word == "presheaf":
                d = cat(kw)
                n = self.name("presheaf name")
                self.block_open()
                at, along = {}, {}
                while self.block_tokens():
                    k = self.name("'at' or 'along'")
                    if k.text == "at":
                        o = self.name("object")
                        self.sym("=")
                        if o.text in at:
                            self.fail(f"duplicate carrier for {o.text!r}", o)
                        at[o.text] = (self.integer(), o)
                    elif k.text == "along":
                        f = self.name("morphism")
                        self.sym("=")
                        self.sym("[")
                        vals = []
                        while self.peek().kind == "name":
                            vals.append(self.integer())
                        self.sym("]")
                        if f.text in along:
                            self.fail(f"duplicate restriction for {f.text!r}", f)
                        along[f.text] = (tuple(vals), f)
                    else:
                        self.fail(f"unknown presheaf entry {k.text!r}", k)
                    self.semicolon()
                d.presheaves.append((n.text, at, along, n))
            elif word == "coverage":
                d = cat(kw)
                n = self.name("coverage name")
                self.block_open()
                on: dict = {}
                while self.block_tokens():
                    k = self.name("'on'")
                    if k.text != "on":
                        self.fail(f"unknown coverage entry {k.text!r}", k)
                    o = self.name("object")
                    self.sym(":")
                    families = []
                    while self.peek().kind == "sym" and self.peek().text == "{":
                        self.take()
                        fam = []
                        while self.peek().kind == "name":
                            fam.append(self.take())
                        self.sym("}")
                        families.append(fam)
                    on.setdefault(o.text, (o, []))[1].extend(families)
                    self.semicolon()
                d.coverages.append((n.text, on, n))
            elif word == "functor":
                n = self.name("functor name")
                self.sym(":")
                a = self.name("category")
                self.sym("->")
                b = self.name("category")
                current_functor = _FunctorDraft(n.text, a.text, b.text, n)
                functors.append(current_functor)
            elif word == "object":
                if current_functor is None:
                    self.fail("'object' mapping outside a functor", kw)
                a = self.name("object")
                self.sym("=>")
                b = self.name("object")
                if a.text in current_functor.objects:
                    self.fail(f"duplicate image for object {a.text!r}", a)
                current_functor.objects[a.text] = b.text
            else:
                self.fail(f"unknown statement {word!r}", kw)
            self.end_statement()
        return cats, functors


def _build_category(d: _CatDraft) -> FinCat:
    morphisms = list(d.morphisms)
    names = [m[0] for m in morphisms]
    identities = []
    for o in d.objects:
        if o in d.identities:
            iname, tok = d.identities[o]
            if iname not in names:
                morphisms.append((iname, o, o))
                names.append(iname)
            identities.append(iname)
        else:
            iname = f"id_{o}"
            if iname not in names:
                morphisms.append((iname, o, o))
                names.append(iname)
            identities.append(iname)
    index = {n: i for i, n in enumerate(names)}
    oindex = {o: i for i, o in enumerate(d.objects)}
    ids = {index[i] for i in identities}
    table: dict[tuple[int, int], int] = {}
    for (g, f), (h, tok) in d.compose.items():
        for n in (g, f, h):
            if n not in index:
                raise ParseError(f"unknown morphism {n!r}", tok.line, tok.column)
        gi, fi = index[g], index[f]
        if morphisms[fi][2] != morphisms[gi][1]:
            raise ParseError(f"{g} and {f} are not composable", tok.line, tok.column)
        table[(gi, fi)] = index[h]
    for gi, (_, gd, _) in enumerate(morphisms):
        for fi, (_, _, fc) in enumerate(morphisms):
            if fc != gd or (gi, fi) in table:
                continue
            if gi in ids:
                table[(gi, fi)] = fi
            elif fi in ids:
                table[(gi, fi)] = gi
            else:
                raise ParseError(f"missing composition entry for {names[gi]} {names[fi]}", d.line, 1)
    c = FinCat(
        object_count=len(d.objects),
        morphisms=tuple((oindex[a], oindex[b]) for _, a, b in morphisms),
        identity_of=tuple(index[i] for i in identities),
        compose_table=table,
        object_names=tuple(d.objects),
        morphism_names=tuple(names),
        name=d.name,
    )
    report = validate_category(c)
    if not report:
        raise AxiomViolation(f"category {d.name} violates the axioms: {report.violations[0]}", report)
    return c


def _build_presheaf(c: FinCat, name: str, at: dict, along: dict, tok: Token) -> Presheaf:
    carrier = []
    for o in c.object_names:
        if o not in at:
            raise ParseError(f"presheaf {name} has no carrier at {o!r}", tok.line, tok.column)
        carrier.append(at[o][0])
    for o, (_, t) in at.items():
        if o not in c.object_names:
            raise ParseError(f"unknown object {o!r}", t.line, t.column)
    index = {n: i for i, n in enumerate(c.morphism_names)}
    for f, (_, t) in along.items():
        if f not in index:
            raise ParseError(f"unknown morphism {f!r}", t.line, t.column)
    tables = []
    for f, fname in enumerate(c.morphism_names):
        if fname in along:
            tables.append(along[fname][0])
        elif c.is_identity(f):
            tables.append(tuple(range(carrier[c.dom(f)])))
        else:
            raise ParseError(f"presheaf {name} has no restriction along {fname!r}", tok.line, tok.column)
    p = Presheaf(c, tuple(carrier), tuple(tables), name=name)
    report = validate_presheaf(p)
    if not report:
        raise AxiomViolation(f"presheaf {name} is not functorial: {report.violations[0]}", report)
    return p


def _build_coverage(c: FinCat, name: str, on: dict) -> Coverage:
    index = {n: i for i, n in enumerate(c.morphism_names)}
    oindex = {o: i for i, o in enumerate(c.object_names)}
    covering = [set() for _ in c.objects]
    for o, (otok, families) in on.items():
        if o not in oindex:
            raise ParseError(f"unknown object {o!r}", otok.line, otok.column)
        x = oindex[o]
        for fam in families:
            mask = 0
            for t in fam:
                if t.text not in index:
                    raise ParseError(f"unknown morphism {t.text!r}", t.line, t.column)
                f = index[t.text]
                if c.cod(f) != x:
                    raise ParseError(f"{t.text} does not land in {o}", t.line, t.column)
                mask |= 1 << f
            covering[x].add(mask)
    return Coverage(c, tuple(frozenset(s) for s in covering), name=name)


def _build_functor(d: _FunctorDraft, cats: dict[str, FinCat]) -> FinFunctor:
    tok = d.token
    for n in (d.source, d.target):
        if n not in cats:
            raise ParseError(f"unknown category {n!r}", tok.line, tok.column)
    src, tgt = cats[d.source], cats[d.target]
    s_obj = {o: i for i, o in enumerate(src.object_names)}
    t_obj = {o: i for i, o in enumerate(tgt.object_names)}
    s_mor = {n: i for i, n in enumerate(src.morphism_names)}
    t_mor = {n: i for i, n in enumerate(tgt.morphism_names)}
    object_map = []
    for o in src.object_names:
        if o not in d.objects:
            raise ParseError(f"functor {d.name} has no image for object {o!r}", tok.line, tok.column)
        if d.objects[o] not in t_obj:
            raise ParseError(f"unknown target object {d.objects[o]!r}", tok.line, tok.column)
        object_map.append(t_obj[d.objects[o]])
    for n in list(d.objects) + list(d.morphisms):
        if n not in s_obj and n not in s_mor:
            raise ParseError(f"unknown source name {n!r}", tok.line, tok.column)
    morphism_map = []
    for f, fname in enumerate(src.morphism_names):
        if fname in d.morphisms:
            g = d.morphisms[fname]
            if g not in t_mor:
                raise ParseError(f"unknown target morphism {g!r}", tok.line, tok.column)
            morphism_map.append(t_mor[g])
        elif src.is_identity(f):
            morphism_map.append(tgt.identity(object_map[src.dom(f)]))
        else:
            raise ParseError(f"functor {d.name} has no image for morphism {fname!r}", tok.line, tok.column)
    fn = FinFunctor(src, tgt, tuple(object_map), tuple(morphism_map), name=d.name)
    report = validate_functor(fn)
    if not report:
        raise AxiomViolation(f"functor {d.name} is not functorial: {report.violations[0]}", report)
    return fn


def parse_document(text: str, resolve: Optional[Callable[[str], FinCat]] = None) -> Document:
    """Parse a full document; ``resolve`` supplies categories a functor names but the document lacks."""
    cats, functors = _Parser(text).parse()
    doc = Document()
    for d in cats:
        c = _build_category(d)
        doc.categories[d.name] = c
        doc.presheaves[d.name] = {}
        doc.coverages[d.name] = {}
        for name, at, along, tok in d.presheaves:
            if name in doc.presheaves[d.name]:
                raise ParseError(f"duplicate presheaf {name!r}", tok.line, tok.column)
            doc.presheaves[d.name][name] = _build_presheaf(c, name, at, along, tok)
        for name, on, tok in d.coverages:
            if name in doc.coverages[d.name]:
                raise ParseError(f"duplicate coverage {name!r}", tok.line, tok.column)
            doc.coverages[d.name][name] = _build_coverage(c, name, on)
    pool = dict(doc.categories)
    for fd in functors:
        for n in (fd.source, fd.target):
            if n not in pool and resolve is not None:
                pool[n] = resolve(n)
        doc.functors[fd.name] = _build_functor(fd, pool)
    return doc


def parse_category(text: str) -> FinCat:
    return parse_document(text).only_category()


# -- emission -------------------------------------------------------------------------


def emit_category(c: FinCat) -> str:
    """Every morphism, identity and non-identity composite written out explicitly."""
    on, mn = c.object_names, c.morphism_names
    lines = [f"category {c.name}", "objects " + " ".join(on)]
    for f, (d, cd) in enumerate(c.morphisms):
        lines.append(f"morphism {mn[f]} : {on[d]} -> {on[cd]}")
    for x in c.objects:
        lines.append(f"identity {on[x]} = {mn[c.identity(x)]}")
    for (g, f), h in sorted(c.compose_table.items()):
        if c.is_identity(g) or c.is_identity(f):
            continue
        lines.append(f"compose {mn[g]} {mn[f]} = {mn[h]}")
    return "\n".join(lines) + "\n"


def emit_presheaf(p: Presheaf) -> str:
    c = p.base
    parts = [f"at {c.object_name(x)} = {p.carrier[x]};" for x in c.objects]
    for f in range(c.morphism_count):
        if c.is_identity(f):
            continue
        parts.append(f"along {c.name_of(f)} = [{' '.join(map(str, p.restriction[f]))}];")
    body = "\n".join("  " + s for s in parts)
    return f"presheaf {p.name} {{\n{body}\n}}\n"


def emit_coverage(cov: Coverage) -> str:
    c = cov.base
    parts = []
    for x in c.objects:
        if not cov.covering[x]:
            continue
        fams = " ".join(
            "{" + " ".join(c.name_of(f) for f in range(c.morphism_count) if m >> f & 1) + "}"
            for m in sorted(cov.covering[x])
        )
        parts.append(f"  on {c.object_name(x)} : {fams};")
    return f"coverage {cov.name} {{\n" + "\n".join(parts) + ("\n" if parts else "") + "}\n"


def emit_functor(fn: FinFunctor) -> str:
    s, t = fn.source, fn.target
    lines = [f"functor {fn.name} : {s.name} -> {t.name}"]
    for x in s.objects:
        lines.append(f"object {s.object_name(x)} => {t.object_name(fn.object_map[x])}")
    for f in range(s.morphism_count):
        lines.append(f"morphism {s.name_of(f)} => {t.name_of(fn.morphism_map[f])}")
    return "\n".join(lines) + "\n"
