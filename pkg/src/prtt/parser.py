"""Concrete surface syntax for ``.prtt`` files and elaboration to core terms.

Layout-insensitive, line comments ``--``.  Declarations are
``def name : type := body`` (annotation optional) plus ``import "path"``.
Top-level names are transparent definitional constants: resolution inlines
the defining term, so core declarations never reference each other.

ASCII and unicode spellings are interchangeable for ``->``/``→``,
``*``/``×`` and ``fun``/``λ``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from . import core
from .core import (
    App, Empty, Eq, EqInd, ExFalso, Fst, Inl, Inr, Lam, Lift, Nat, NatInd,
    Pair, Pi, Refl, Sigma, Snd, Star, Suc, Sum, SumInd, Term, Unit, UnitInd,
    Univ, Var, Zero,
)


@dataclass(frozen=True, slots=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: frozenset[str] = frozenset()):
        super().__init__(message)
        self.message = message
        self.span = span
        self.expected = expected

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class ResolveError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span

    def __str__(self) -> str:
        return f"{self.span}: {self.message}"


class UnboundIdentifier(ResolveError):
    def __init__(self, name: str, span: SourceSpan):
        super().__init__(f"unbound identifier '{name}'", span)
        self.name = name


class DuplicateDefinition(ResolveError):
    def __init__(self, name: str, span: SourceSpan):
        super().__init__(f"duplicate definition of '{name}'", span)
        self.name = name


# ---------------------------------------------------------------------------
# Lexing

_SYMBOLS = (":=", "=>", "->", "(", ")", "{", "}", ":", "*", "+", ",")
_UNICODE = {"→": "->", "×": "*", "λ": "fun"}
KEYWORDS = frozenset(
    "def import fun ind case unitind exfalso zero suc Nat Unit star Empty "
    "lift Eq refl J pair fst snd inl inr".split()
)


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # 'ident', 'number', 'string', 'univ', a keyword, or a symbol
    text: str
    line: int
    column: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.column, max(1, len(self.text)))


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c in _UNICODE:
            toks.append(Token(_UNICODE[c], c, line, col))
            i += 1
            col += 1
            continue
        matched = False
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                toks.append(Token(sym, sym, line, col))
                i += len(sym)
                col += len(sym)
                matched = True
                break
        if matched:
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise ParseError("unterminated string literal",
                                     SourceSpan(file, line, col, j - i))
                j += 1
            if j >= n:
                raise ParseError("unterminated string literal",
                                 SourceSpan(file, line, col, j - i))
            toks.append(Token("string", text[i + 1:j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Token("number", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_'"):
                j += 1
            word = text[i:j]
            if word in KEYWORDS:
                kind = word
            elif len(word) >= 2 and word[0] == "U" and word[1:].isdigit():
                kind = "univ"
            else:
                kind = "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {c!r}", SourceSpan(file, line, col, 1))
    toks.append(Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Surface AST

@dataclass(frozen=True, slots=True)
class SExpr:
    pass


@dataclass(frozen=True, slots=True)
class SVar(SExpr):
    name: str
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SNum(SExpr):
    value: int
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SConst(SExpr):
    """Keyword-named former with a fixed argument count."""

    head: str
    args: tuple[SExpr, ...]
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SUniv(SExpr):
    level: int
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SLift(SExpr):
    src: int
    dst: int
    body: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SApp(SExpr):
    fn: SExpr
    arg: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SLam(SExpr):
    binders: tuple[tuple[str, SExpr], ...]
    body: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SPi(SExpr):
    name: str | None
    dom: SExpr
    cod: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SSigma(SExpr):
    name: str | None
    fst: SExpr
    snd: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SSum(SExpr):
    left: SExpr
    right: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SurfaceDecl:
    name: str
    annot: SExpr | None
    body: SExpr
    span: SourceSpan


@dataclass(frozen=True, slots=True)
class SurfaceModule:
    decls: tuple[SurfaceDecl, ...]
    imports: tuple[tuple[str, SourceSpan], ...]
    file: str


# keyword former -> argument count
_FORMS = {
    "suc": 1, "ind": 4, "case": 4, "unitind": 3, "exfalso": 2,
    "Eq": 3, "refl": 1, "J": 5, "pair": 2, "fst": 1, "snd": 1,
    "inl": 1, "inr": 1,
}
_ATOM_STARTS = frozenset(
    ["ident", "number", "univ", "(", "zero", "star", "Nat", "Unit", "Empty"])


class _Parser:
    def __init__(self, toks: list[Token], file: str):
        self.toks = toks
        self.pos = 0
        self.file = file

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        tok = self.toks[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            self.fail(f"expected {kind!r}", {kind})
        return self.next()

    def fail(self, message: str, expected: set[str] = frozenset()):
        tok = self.peek()
        shown = tok.text if tok.kind != "eof" else "end of input"
        raise ParseError(f"{message}, found {shown!r}", tok.span(self.file),
                         frozenset(expected))

    # ---- expressions ----

    def expr(self) -> SExpr:
        return self.arrow()

    def arrow(self) -> SExpr:
        tok = self.peek()
        if tok.kind == "fun":
            return self.lam()
        if tok.kind == "(" and self.peek(1).kind == "ident" and self.peek(2).kind == ":":
            # dependent binder: (x : A) -> B  or  (x : A) * B
            self.next()
            name_tok = self.expect("ident")
            self.expect(":")
            dom = self.expr()
            self.expect(")")
            nxt = self.peek()
            if nxt.kind == "->":
                self.next()
                return SPi(name_tok.text, dom, self.arrow(), tok.span(self.file))
            if nxt.kind == "*":
                self.next()
                sig = SSigma(name_tok.text, dom, self.plus(), tok.span(self.file))
                if self.peek().kind == "->":
                    self.next()
                    return SPi(None, sig, self.arrow(), tok.span(self.file))
                return sig
            self.fail("expected '->' or '*' after a binder", {"->", "*"})
        left = self.plus()
        if self.peek().kind == "->":
            self.next()
            return SPi(None, left, self.arrow(), _span_of(left))
        return left

    def lam(self) -> SExpr:
        tok = self.expect("fun")
        binders: list[tuple[str, SExpr]] = []
        while self.peek().kind == "(":
            self.next()
            name = self.expect("ident").text
            self.expect(":")
            ty = self.expr()
            self.expect(")")
            binders.append((name, ty))
        if not binders:
            self.fail("expected at least one '(x : T)' binder after 'fun'", {"("})
        self.expect("=>")
        return SLam(tuple(binders), self.expr(), tok.span(self.file))

    def plus(self) -> SExpr:
        left = self.times()
        if self.peek().kind == "+":
            self.next()
            return SSum(left, self.plus(), _span_of(left))
        return left

    def times(self) -> SExpr:
        left = self.app()
        if self.peek().kind == "*":
            self.next()
            return SSigma(None, left, self.times(), _span_of(left))
        return left

    def app(self) -> SExpr:
        head = self.head()
        while self.peek().kind in _ATOM_STARTS:
            arg = self.atom()
            head = SApp(head, arg, _span_of(head))
        return head

    def head(self) -> SExpr:
        tok = self.peek()
        if tok.kind == "fun":
            return self.lam()
        if tok.kind == "lift":
            self.next()
            src, dst = 0, 1
            if self.peek().kind == "{":
                self.next()
                src = int(self.expect("number").text)
                self.expect(",")
                dst = int(self.expect("number").text)
                self.expect("}")
            return SLift(src, dst, self.atom(), tok.span(self.file))
        if tok.kind in _FORMS:
            self.next()
            args = tuple(self.atom() for _ in range(_FORMS[tok.kind]))
            return SConst(tok.kind, args, tok.span(self.file))
        return self.atom()

    def atom(self) -> SExpr:
        tok = self.peek()
        if tok.kind == "ident":
            self.next()
            return SVar(tok.text, tok.span(self.file))
        if tok.kind == "number":
            self.next()
            return SNum(int(tok.text), tok.span(self.file))
        if tok.kind == "univ":
            self.next()
            return SUniv(int(tok.text[1:]), tok.span(self.file))
        if tok.kind in ("zero", "star", "Nat", "Unit", "Empty"):
            self.next()
            if tok.kind == "zero":
                return SNum(0, tok.span(self.file))
            return SConst(tok.kind, (), tok.span(self.file))
        if tok.kind == "(":
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        self.fail("expected an expression", _ATOM_STARTS)

    # ---- declarations ----

    def module(self) -> SurfaceModule:
        decls: list[SurfaceDecl] = []
        imports: list[tuple[str, SourceSpan]] = []
        while self.peek().kind != "eof":
            tok = self.peek()
            if tok.kind == "import":
                self.next()
                s = self.expect("string")
                imports.append((s.text, s.span(self.file)))
            elif tok.kind == "def":
                self.next()
                name = self.expect("ident")
                annot = None
                if self.peek().kind == ":":
                    self.next()
                    annot = self.expr()
                self.expect(":=")
                body = self.expr()
                decls.append(SurfaceDecl(name.text, annot, body, name.span(self.file)))
            else:
                self.fail("expected 'def' or 'import'", {"def", "import"})
        return SurfaceModule(tuple(decls), tuple(imports), self.file)


def _span_of(e: SExpr) -> SourceSpan:
    return e.span


def parse_module(text: str, file: str = "<input>") -> SurfaceModule:
    """Parse one module; raises ParseError with a span on bad input."""
    return _Parser(tokenize(text, file), file).module()


def parse_expr(text: str, file: str = "<input>") -> SExpr:
    p = _Parser(tokenize(text, file), file)
    e = p.expr()
    if p.peek().kind != "eof":
        p.fail("trailing input after expression")
    return e


# ---------------------------------------------------------------------------
# Resolution: names to indices, globals inlined, numerals desugared

@dataclass(frozen=True, slots=True)
class CoreDecl:
    name: str
    type: Term | None
    body: Term
    span: SourceSpan


def resolve(module: SurfaceModule,
            globals_in: dict[str, CoreDecl] | None = None) -> list[CoreDecl]:
    """Elaborate a surface module into closed core declarations.

    Top-level references are replaced by the referenced body (definitional
    transparency by inlining); binders become de Bruijn indices, innermost
    binding wins for shadowed names; numerals become successor chains.
    """
    globals_: dict[str, CoreDecl] = dict(globals_in or {})
    out: list[CoreDecl] = []
    for d in module.decls:
        if d.name in globals_:
            raise DuplicateDefinition(d.name, d.span)
        ty = _elab(d.annot, [], globals_) if d.annot is not None else None
        body = _elab(d.body, [], globals_)
        cd = CoreDecl(d.name, ty, body, d.span)
        globals_[d.name] = cd
        out.append(cd)
    return out


def _elab(e: SExpr, scope: list[str], globals_: dict[str, CoreDecl]) -> Term:
    te = type(e)
    if te is SVar:
        for i in range(len(scope) - 1, -1, -1):
            if scope[i] == e.name:
                return Var(len(scope) - 1 - i)
        if e.name in globals_:
            return globals_[e.name].body
        raise UnboundIdentifier(e.name, e.span)
    if te is SNum:
        return core.numeral(e.value)
    if te is SUniv:
        return Univ(e.level)
    if te is SLift:
        return Lift(e.src, e.dst, _elab(e.body, scope, globals_))
    if te is SApp:
        return App(_elab(e.fn, scope, globals_), _elab(e.arg, scope, globals_))
    if te is SLam:
        annots = []
        for name, ty in e.binders:
            annots.append(_elab(ty, scope, globals_))
            scope.append(name)
        body = _elab(e.body, scope, globals_)
        for _ in e.binders:
            scope.pop()
        for annot in reversed(annots):
            body = Lam(annot, body)
        return body
    if te is SPi:
        dom = _elab(e.dom, scope, globals_)
        scope.append(e.name or "_")
        cod = _elab(e.cod, scope, globals_)
        scope.pop()
        return Pi(dom, cod)
    if te is SSigma:
        fst = _elab(e.fst, scope, globals_)
        scope.append(e.name or "_")
        snd = _elab(e.snd, scope, globals_)
        scope.pop()
        return Sigma(fst, snd)
    if te is SSum:
        return Sum(_elab(e.left, scope, globals_), _elab(e.right, scope, globals_))
    if te is SConst:
        args = [_elab(a, scope, globals_) for a in e.args]
        head = e.head
        if head == "Nat":
            return Nat()
        if head == "Unit":
            return Unit()
        if head == "Empty":
            return Empty()
        if head == "star":
            return Star()
        if head == "suc":
            return Suc(args[0])
        if head == "ind":
            return NatInd(args[0], args[1], args[2], args[3])
        if head == "case":
            return SumInd(args[0], args[1], args[2], args[3])
        if head == "unitind":
            return UnitInd(args[0], args[1], args[2])
        if head == "exfalso":
            return ExFalso(args[0], args[1])
        if head == "Eq":
            return Eq(args[0], args[1], args[2])
        if head == "refl":
            return Refl(args[0])
        if head == "J":
            return EqInd(args[0], args[1], args[2], args[3], args[4])
        if head == "pair":
            return Pair(args[0], args[1])
        if head == "fst":
            return Fst(args[0])
        if head == "snd":
            return Snd(args[0])
        if head == "inl":
            return Inl(args[0])
        if head == "inr":
            return Inr(args[0])
    raise TypeError(f"unhandled surface node {e!r}")


# ---------------------------------------------------------------------------
# Module loading (imports resolve relative to the importing file)

def load_program(path: str, _seen: set[str] | None = None) -> list[SurfaceModule]:
    """Load a module file plus its imports, dependencies first."""
    seen = _seen if _seen is not None else set()
    apath = os.path.abspath(path)
    if apath in seen:
        return []
    seen.add(apath)
    with open(apath, encoding="utf-8") as fh:
        text = fh.read()
    module = parse_module(text, path)
    out: list[SurfaceModule] = []
    for rel, span in module.imports:
        target = os.path.join(os.path.dirname(apath), rel)
        if not os.path.exists(target):
            raise ParseError(f"import not found: {rel!r}", span)
        out.extend(load_program(target, seen))
    out.append(module)
    return out


def resolve_program(modules: list[SurfaceModule]) -> list[CoreDecl]:
    globals_: dict[str, CoreDecl] = {}
    out: list[CoreDecl] = []
    for m in modules:
        for d in resolve(m, globals_):
            globals_[d.name] = d
            out.append(d)
    return out


# ---------------------------------------------------------------------------
# Printing (inverse of parse . resolve up to binder names and inlining)

_PREC_ARROW, _PREC_PLUS, _PREC_TIMES, _PREC_APP, _PREC_ATOM = range(5)


def print_term(t: Term, names: tuple[str, ...] = ()) -> str:
    return _pp(t, list(names), _PREC_ARROW)


def _paren(s: str, need: bool) -> str:
    return f"({s})" if need else s


def _fresh(names: list[str]) -> str:
    return f"x{len(names)}"


def _pp(t: Term, names: list[str], prec: int) -> str:
    tt = type(t)
    if tt is Var:
        if t.index < len(names):
            return names[-1 - t.index]
        return f"!{t.index}"  # unbound; only reachable when printing open terms
    if tt is Nat:
        return "Nat"
    if tt is Unit:
        return "Unit"
    if tt is Empty:
        return "Empty"
    if tt is Star:
        return "star"
    if tt is Univ:
        return f"U{t.level}"
    if tt is Zero:
        return "0"
    if tt is Suc:
        val = core.numeral_value(t)
        if val is not None:
            return str(val)
        return _paren(f"suc {_pp(t.n, names, _PREC_ATOM)}", prec > _PREC_APP)
    if tt is Lam:
        x = _fresh(names)
        annot = _pp(t.annot, names, _PREC_ARROW)
        names.append(x)
        body = _pp(t.body, names, _PREC_ARROW)
        names.pop()
        return _paren(f"fun ({x} : {annot}) => {body}", prec > _PREC_ARROW)
    if tt is Pi:
        if _uses_binder(t.cod):
            x = _fresh(names)
            dom = _pp(t.dom, names, _PREC_ARROW)
            names.append(x)
            cod = _pp(t.cod, names, _PREC_ARROW)
            names.pop()
            return _paren(f"({x} : {dom}) -> {cod}", prec > _PREC_ARROW)
        dom = _pp(t.dom, names, _PREC_PLUS)
        cod = _pp(core.subst(t.cod, 0, Zero()), names, _PREC_ARROW)
        return _paren(f"{dom} -> {cod}", prec > _PREC_ARROW)
    if tt is Sigma:
        if _uses_binder(t.snd):
            x = _fresh(names)
            fst = _pp(t.fst, names, _PREC_ARROW)
            names.append(x)
            snd = _pp(t.snd, names, _PREC_PLUS)
            names.pop()
            return _paren(f"({x} : {fst}) * {snd}", prec > _PREC_TIMES)
        fst = _pp(t.fst, names, _PREC_APP)
        snd = _pp(core.subst(t.snd, 0, Zero()), names, _PREC_TIMES)
        return _paren(f"{fst} * {snd}", prec > _PREC_TIMES)
    if tt is Sum:
        left = _pp(t.left, names, _PREC_TIMES)
        right = _pp(t.right, names, _PREC_PLUS)
        return _paren(f"{left} + {right}", prec > _PREC_PLUS)
    if tt is App:
        fn = _pp(t.fn, names, _PREC_APP)
        arg = _pp(t.arg, names, _PREC_ATOM)
        return _paren(f"{fn} {arg}", prec > _PREC_APP)
    if tt is Lift:
        body = _pp(t.ty, names, _PREC_ATOM)
        head = "lift" if (t.src, t.dst) == (0, 1) else f"lift{{{t.src},{t.dst}}}"
        return _paren(f"{head} {body}", prec > _PREC_APP)
    form = _form_parts(t)
    if form is not None:
        head, parts = form
        body = " ".join([head] + [_pp(p, names, _PREC_ATOM) for p in parts])
        return _paren(body, prec > _PREC_APP)
    raise TypeError(f"unknown term node {t!r}")


def _uses_binder(body: Term) -> bool:
    found = False

    def on_var(index: int, depth: int):
        nonlocal found
        if index == depth:
            found = True
        return Var(index)

    core._map_vars(body, 0, on_var)
    return found


def _form_parts(t: Term):
    tt = type(t)
    if tt is NatInd:
        return "ind", (t.motive, t.base, t.step, t.scrut)
    if tt is SumInd:
        return "case", (t.motive, t.lcase, t.rcase, t.scrut)
    if tt is UnitInd:
        return "unitind", (t.motive, t.base, t.scrut)
    if tt is ExFalso:
        return "exfalso", (t.motive, t.scrut)
    if tt is Eq:
        return "Eq", (t.ty, t.lhs, t.rhs)
    if tt is Refl:
        return "refl", (t.a,)
    if tt is EqInd:
        return "J", (t.motive, t.base, t.lhs, t.rhs, t.proof)
    if tt is Pair:
        return "pair", (t.a, t.b)
    if tt is Fst:
        return "fst", (t.p,)
    if tt is Snd:
        return "snd", (t.p,)
    if tt is Inl:
        return "inl", (t.a,)
    if tt is Inr:
        return "inr", (t.b,)
    return None


def print_decl(d: CoreDecl) -> str:
    if d.type is not None:
        return f"def {d.name} : {print_term(d.type)} := {print_term(d.body)}"
    return f"def {d.name} := {print_term(d.body)}"


def print_module(decls: list[CoreDecl]) -> str:
    return "\n".join(print_decl(d) for d in decls) + "\n"
