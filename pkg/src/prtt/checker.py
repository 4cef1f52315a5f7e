"""Bidirectional type checking.

Two restrictions carry the whole theory: Pi-formation over level-alpha data
lands at level max(1, alpha), and every eliminator motive must be a family
into U0.  Conversion is decided by normalization (module ``nbe``) and
compares eta-long normal forms up to alpha (plain structural equality on
nameless terms).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import core, nbe
from .core import (
    App, Context, Eq, EqInd, ExFalso, Fst, Inl, Inr, Lam,
    Lift, Nat, NatInd, Pair, Pi, Refl, Sigma, Snd, Star, Suc, Sum, SumInd,
    Term, Unit, UnitInd, Univ, Var, Zero, shift, subst,
)

MISMATCH = "Mismatch"
MOTIVE_NOT_IN_U0 = "MotiveNotInU0"
PI_NOT_IN_U0 = "PiNotInU0"
UNBOUND_VARIABLE = "UnboundVariable"
NOT_A_FUNCTION = "NotAFunction"
NOT_A_PAIR = "NotAPair"
LEVEL_OVERFLOW = "LevelOverflow"
EMPTY_IMPOSSIBLE = "EmptyImpossible"


@dataclass(frozen=True, slots=True)
class Options:
    """Checker configuration.

    ``unsafe_disable_motive_gate`` exists solely so the test suite can prove
    the gate is load-bearing; leaving it off makes Ackermann-style structural
    recursion into function types check, which breaks the extraction theorem.
    """

    max_level: int = core.DEFAULT_MAX_LEVEL
    step_budget: int = nbe.DEFAULT_STEP_BUDGET
    unsafe_disable_motive_gate: bool = False

    def __post_init__(self):
        if not 0 <= self.max_level <= core.MAX_CONFIGURABLE_LEVEL:
            raise ValueError(f"max_level must lie in [0, {core.MAX_CONFIGURABLE_LEVEL}]")


DEFAULT_OPTIONS = Options()


@dataclass(frozen=True, slots=True)
class TypedTerm:
    """A term together with its synthesized type and the type's level."""

    term: Term
    type: Term
    level: int


class TypeCheckError(Exception):
    def __init__(self, kind: str, message: str, *, expected: Term | None = None,
                 actual: Term | None = None, span=None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.expected = expected
        self.actual = actual
        self.span = span

    def __str__(self) -> str:
        return f"[{self.kind}] {self.message}"


def _fuel(opts: Options) -> nbe.Fuel:
    return nbe.Fuel(opts.step_budget)


def _apply_chain(f: Term, args: list[Term]) -> Term:
    for a in args:
        f = App(f, a)
    return f


def nf_type(ctx: Context, ty: Term, opts: Options = DEFAULT_OPTIONS) -> Term:
    """Normal form of a type expression (used for matching and messages)."""
    return nbe.normalize_type(ctx, ty, _fuel(opts))


def type_level(ctx: Context, ty: Term, opts: Options = DEFAULT_OPTIONS) -> int:
    """Judgment level at which ``ty`` is a type, validating ``ty`` on the way.

    A type classified by ``Univ(b)`` sits at level ``b``; the top universe
    itself sits at ``max_level + 1`` and is the only type up there.
    """
    collapsed = core.collapse_lifts(ty)
    if type(collapsed) is Univ:
        if collapsed.level > opts.max_level:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"U{collapsed.level} exceeds the top level {opts.max_level}")
        return collapsed.level + 1
    tt = infer(ctx, ty, opts)
    w = core.collapse_lifts(nf_type(ctx, tt.type, opts))
    if type(w) is Univ:
        return w.level
    raise TypeCheckError(
        MISMATCH, "expected a type", expected=Univ(0), actual=w)


def _level_of_normal_type(ctx: Context, w: Term, opts: Options) -> int:
    """Level of an already well-formed normal type, judged structurally.

    Unlike ``type_level`` this never re-infers lambda-headed subterms, so it
    is safe on types assembled by the checker itself (e.g. instantiated
    codomains and motive applications).
    """
    tw = type(w)
    if tw is Univ:
        return w.level + 1
    if tw is Lift:
        return w.dst
    if tw is Pi:
        la = _level_of_normal_type(ctx, w.dom, opts)
        lb = _level_of_normal_type(ctx.extend(w.dom, la), w.cod, opts)
        return max(1, la, lb)
    if tw is Sigma:
        la = _level_of_normal_type(ctx, w.fst, opts)
        return max(la, _level_of_normal_type(ctx.extend(w.fst, la), w.snd, opts))
    if tw is Sum:
        return max(_level_of_normal_type(ctx, w.left, opts),
                   _level_of_normal_type(ctx, w.right, opts))
    if tw is Eq:
        return _level_of_normal_type(ctx, w.ty, opts)
    if tw is Nat or tw is Unit or tw is core.Empty:
        return 0
    # neutral-headed: normal forms have no beta-redexes, so inference is safe
    tt = infer(ctx, w, opts)
    nf = core.collapse_lifts(nf_type(ctx, tt.type, opts))
    if type(nf) is Univ:
        return nf.level
    raise TypeCheckError(MISMATCH, "expected a type", actual=nf)


def conv(ctx: Context, a: Term, b: Term, ty: Term, opts: Options = DEFAULT_OPTIONS) -> bool:
    """Judgmental equality of ``a`` and ``b`` at type ``ty`` (both checked)."""
    fuel = _fuel(opts)
    env, depth = nbe.context_env(ctx, fuel)
    tyv = nbe.eval_term(ty, env, fuel)
    na = nbe.quote(nbe.eval_term(a, env, fuel), depth, tyv, fuel)
    nb = nbe.quote(nbe.eval_term(b, env, fuel), depth, tyv, fuel)
    return na == nb


def conv_types(ctx: Context, a: Term, b: Term, opts: Options = DEFAULT_OPTIONS) -> bool:
    return nf_type(ctx, a, opts) == nf_type(ctx, b, opts)


def same_inhabitants(ctx: Context, a: Term, b: Term, opts: Options = DEFAULT_OPTIONS) -> bool:
    """Do ``a`` and ``b`` classify the same terms?

    Terms of ``lift A`` are exactly the terms of ``A``, so membership ignores
    lift wrappers entirely; equality of type codes inside a universe does not
    (lift is injective there).  Subsumption checks use this relation.
    """
    na = core.erase_lifts(nf_type(ctx, a, opts))
    nb = core.erase_lifts(nf_type(ctx, b, opts))
    return na == nb


def check_elim_motive(ctx: Context, motive: Term, domains: list[Term],
                      opts: Options = DEFAULT_OPTIONS) -> None:
    """Require ``motive : domains[0] -> ... -> U0``.

    Eliminators for N, sums, unit, empty and equality all funnel through
    here; a motive landing anywhere above U0 is rejected.

    Lambda motives are peeled structurally against the expected domains and
    the body's level is judged directly.  This keeps an over-level family
    like ``fun (n : Nat) => Nat -> Nat`` reportable as a motive error even
    when its function type (``Pi(Nat, U1)``) does not fit under the top
    universe at all.
    """
    inner = ctx
    m = motive
    remaining = list(domains)
    while remaining and type(m) is Lam:
        dom = remaining.pop(0)
        if not same_inhabitants(inner, m.annot, dom, opts):
            raise TypeCheckError(
                MISMATCH, "motive family has the wrong domain",
                expected=nf_type(inner, dom, opts),
                actual=nf_type(inner, m.annot, opts))
        inner = inner.extend(m.annot, type_level(inner, m.annot, opts))
        m = m.body
    if remaining:
        # neutral or partially-applied motive: fall back to its inferred type
        mt = infer(inner, m, opts)
        w = nf_type(inner, mt.type, opts)
        for dom in remaining:
            if type(w) is not Pi:
                raise TypeCheckError(
                    NOT_A_FUNCTION,
                    "eliminator motive must be a type family",
                    actual=w)
            if not same_inhabitants(inner, w.dom, dom, opts):
                raise TypeCheckError(
                    MISMATCH, "motive family has the wrong domain",
                    expected=nf_type(inner, dom, opts),
                    actual=nf_type(inner, w.dom, opts))
            inner = inner.extend(w.dom, type_level(inner, w.dom, opts))
            w = nf_type(inner, w.cod, opts)
        w = core.collapse_lifts(w)
        if opts.unsafe_disable_motive_gate:
            return
        if type(w) is not Univ or w.level != 0:
            lvl = w.level if type(w) is Univ else None
            detail = f"U{lvl}" if lvl is not None else "a non-universe"
            raise TypeCheckError(
                MOTIVE_NOT_IN_U0,
                f"eliminator motive must land in U0, but lands in {detail}",
                actual=w)
        return
    # all domains consumed by lambda binders: judge the body as a type
    lvl = type_level(inner, m, opts)
    if opts.unsafe_disable_motive_gate:
        return
    if lvl != 0:
        raise TypeCheckError(
            MOTIVE_NOT_IN_U0,
            f"eliminator motive must land in U0, but lands in U{lvl}",
            actual=nf_type(inner, m, opts))


def infer(ctx: Context, t: Term, opts: Options = DEFAULT_OPTIONS) -> TypedTerm:
    """Synthesize the principal type and minimal level of ``t``."""
    tt = type(t)
    lmax = opts.max_level

    if tt is Var:
        if t.index < 0 or t.index >= len(ctx):
            raise TypeCheckError(UNBOUND_VARIABLE, f"unbound variable index {t.index}")
        ty, lvl = ctx.lookup(t.index)
        return TypedTerm(t, shift(ty, 0, t.index + 1), lvl)

    if tt is Univ:
        if t.level < 0 or t.level + 1 > lmax:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"U{t.level} has no type: U{t.level + 1} exceeds the top level {lmax}")
        return TypedTerm(t, Univ(t.level + 1), t.level + 2)

    if tt is Nat or tt is Unit or tt is core.Empty:
        return TypedTerm(t, Univ(0), 1)
    if tt is Zero:
        return TypedTerm(t, Nat(), 0)
    if tt is Star:
        return TypedTerm(t, Unit(), 0)
    if tt is Suc:
        check(ctx, t.n, Nat(), opts)
        return TypedTerm(t, Nat(), 0)

    if tt is Lift:
        if not (0 <= t.src <= t.dst <= lmax):
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"lift from U{t.src} to U{t.dst} violates 0 <= src <= dst <= {lmax}")
        check(ctx, t.ty, Univ(t.src), opts)
        return TypedTerm(t, Univ(t.dst), t.dst + 1)

    if tt is Pi:
        la = type_level(ctx, t.dom, opts)
        lb = type_level(ctx.extend(t.dom, la), t.cod, opts)
        alpha = max(la, lb)
        if alpha > lmax:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"function type needs level {alpha} components, top level is {lmax}")
        lvl = max(1, alpha)
        return TypedTerm(t, Univ(lvl), lvl + 1)

    if tt is Sigma:
        la = type_level(ctx, t.fst, opts)
        lb = type_level(ctx.extend(t.fst, la), t.snd, opts)
        alpha = max(la, lb)
        if alpha > lmax:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"pair type needs level {alpha} components, top level is {lmax}")
        return TypedTerm(t, Univ(alpha), alpha + 1)

    if tt is Sum:
        la = type_level(ctx, t.left, opts)
        lb = type_level(ctx, t.right, opts)
        alpha = max(la, lb)
        if alpha > lmax:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"sum type needs level {alpha} components, top level is {lmax}")
        return TypedTerm(t, Univ(alpha), alpha + 1)

    if tt is Eq:
        la = type_level(ctx, t.ty, opts)
        if la > lmax:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"equality type over a level-{la} type, top level is {lmax}")
        check(ctx, t.lhs, t.ty, opts)
        check(ctx, t.rhs, t.ty, opts)
        return TypedTerm(t, Univ(la), la + 1)

    if tt is Lam:
        la = type_level(ctx, t.annot, opts)
        body = infer(ctx.extend(t.annot, la), t.body, opts)
        alpha = max(la, body.level)
        if alpha > lmax:
            raise TypeCheckError(
                LEVEL_OVERFLOW,
                f"lambda needs a level-{alpha} function type, top level is {lmax}")
        return TypedTerm(t, Pi(t.annot, body.type), max(1, alpha))

    if tt is App:
        fn = infer(ctx, t.fn, opts)
        w = nf_type(ctx, fn.type, opts)
        if type(w) is not Pi:
            raise TypeCheckError(
                NOT_A_FUNCTION, "application head is not a function", actual=w)
        check(ctx, t.arg, w.dom, opts)
        rty = subst(w.cod, 0, t.arg)
        return TypedTerm(t, rty, _level_of_normal_type(ctx, nf_type(ctx, rty, opts), opts))

    if tt is Pair or tt is Inl or tt is Inr:
        raise TypeCheckError(
            MISMATCH,
            f"cannot synthesize a type for a bare {tt.__name__.lower()}; "
            "check it against an annotation")

    if tt is Refl:
        a = infer(ctx, t.a, opts)
        return TypedTerm(t, Eq(a.type, t.a, t.a), a.level)

    if tt is Fst:
        p = infer(ctx, t.p, opts)
        w = nf_type(ctx, p.type, opts)
        if type(w) is not Sigma:
            raise TypeCheckError(NOT_A_PAIR, "fst of a non-pair", actual=w)
        return TypedTerm(t, w.fst, _level_of_normal_type(ctx, w.fst, opts))

    if tt is Snd:
        p = infer(ctx, t.p, opts)
        w = nf_type(ctx, p.type, opts)
        if type(w) is not Sigma:
            raise TypeCheckError(NOT_A_PAIR, "snd of a non-pair", actual=w)
        rty = subst(w.snd, 0, Fst(t.p))
        return TypedTerm(t, rty, _level_of_normal_type(ctx, nf_type(ctx, rty, opts), opts))

    if tt is NatInd:
        check_elim_motive(ctx, t.motive, [Nat()], opts)
        check(ctx, t.base, App(t.motive, Zero()), opts)
        m1 = shift(t.motive, 0, 1)
        m2 = shift(t.motive, 0, 2)
        step_ty = Pi(Nat(), Pi(App(m1, Var(0)), App(m2, Suc(Var(1)))))
        check(ctx, t.step, step_ty, opts)
        check(ctx, t.scrut, Nat(), opts)
        return TypedTerm(t, App(t.motive, t.scrut), 0)

    if tt is SumInd:
        s = infer(ctx, t.scrut, opts)
        w = nf_type(ctx, s.type, opts)
        if type(w) is not Sum:
            raise TypeCheckError(
                MISMATCH, "case scrutinee is not a sum", actual=w)
        check_elim_motive(ctx, t.motive, [w], opts)
        m1 = shift(t.motive, 0, 1)
        check(ctx, t.lcase, Pi(w.left, App(m1, Inl(Var(0)))), opts)
        check(ctx, t.rcase, Pi(w.right, App(m1, Inr(Var(0)))), opts)
        return TypedTerm(t, App(t.motive, t.scrut), 0)

    if tt is UnitInd:
        check_elim_motive(ctx, t.motive, [Unit()], opts)
        check(ctx, t.base, App(t.motive, Star()), opts)
        check(ctx, t.scrut, Unit(), opts)
        return TypedTerm(t, App(t.motive, t.scrut), 0)

    if tt is ExFalso:
        check_elim_motive(ctx, t.motive, [core.Empty()], opts)
        check(ctx, t.scrut, core.Empty(), opts)
        return TypedTerm(t, App(t.motive, t.scrut), 0)

    if tt is EqInd:
        p = infer(ctx, t.proof, opts)
        w = nf_type(ctx, p.type, opts)
        w = core.collapse_lifts(w)
        if type(w) is not Eq:
            raise TypeCheckError(
                MISMATCH, "eqind proof is not an equality", actual=w)
        if not conv(ctx, t.lhs, w.lhs, w.ty, opts):
            raise TypeCheckError(
                MISMATCH, "eqind left endpoint disagrees with the proof",
                expected=nbe.normalize(ctx, w.lhs, w.ty, _fuel(opts)),
                actual=nbe.normalize(ctx, t.lhs, w.ty, _fuel(opts)))
        if not conv(ctx, t.rhs, w.rhs, w.ty, opts):
            raise TypeCheckError(
                MISMATCH, "eqind right endpoint disagrees with the proof",
                expected=nbe.normalize(ctx, w.rhs, w.ty, _fuel(opts)),
                actual=nbe.normalize(ctx, t.rhs, w.ty, _fuel(opts)))
        eq_fam = Eq(shift(w.ty, 0, 1), shift(t.lhs, 0, 1), Var(0))
        check_elim_motive(ctx, t.motive, [w.ty, eq_fam], opts)
        check(ctx, t.base, App(App(t.motive, t.lhs), Refl(t.lhs)), opts)
        return TypedTerm(t, App(App(t.motive, t.rhs), t.proof), 0)

    raise TypeCheckError(MISMATCH, f"cannot infer type of {t!r}")


def check(ctx: Context, t: Term, ty: Term, opts: Options = DEFAULT_OPTIONS) -> TypedTerm:
    """Check ``t`` against ``ty``; intro forms switch to checking mode."""
    tt = type(t)
    w = nf_type(ctx, ty, opts)
    ws = core.collapse_lifts(w)
    tws = type(ws)

    if tt is Lam and tws is Pi:
        la = type_level(ctx, t.annot, opts)
        if not same_inhabitants(ctx, t.annot, ws.dom, opts):
            raise TypeCheckError(
                MISMATCH, "lambda annotation disagrees with the function type",
                expected=nf_type(ctx, ws.dom, opts), actual=nf_type(ctx, t.annot, opts))
        check(ctx.extend(t.annot, la), t.body, ws.cod, opts)
        return TypedTerm(t, ty, _level_of_normal_type(ctx, w, opts))

    if tt is Pair and tws is Sigma:
        check(ctx, t.a, ws.fst, opts)
        check(ctx, t.b, subst(ws.snd, 0, t.a), opts)
        return TypedTerm(t, ty, _level_of_normal_type(ctx, w, opts))

    if tt is Inl and tws is Sum:
        check(ctx, t.a, ws.left, opts)
        return TypedTerm(t, ty, _level_of_normal_type(ctx, w, opts))

    if tt is Inr and tws is Sum:
        check(ctx, t.b, ws.right, opts)
        return TypedTerm(t, ty, _level_of_normal_type(ctx, w, opts))

    if tt is Refl and tws is Eq:
        check(ctx, t.a, ws.ty, opts)
        if not (conv(ctx, t.a, ws.lhs, ws.ty, opts) and conv(ctx, t.a, ws.rhs, ws.ty, opts)):
            raise TypeCheckError(
                MISMATCH, "refl endpoints are not judgmentally equal",
                expected=ws, actual=Eq(ws.ty, t.a, t.a))
        return TypedTerm(t, ty, _level_of_normal_type(ctx, w, opts))

    if tt is Pi and tws is Univ and ws.level == 0:
        raise TypeCheckError(
            PI_NOT_IN_U0,
            "function types never live in U0 (they land at level max(1, alpha))",
            expected=ws, actual=Univ(1))

    if tt is App:
        # derived let rule: a beta-redex checks by checking the argument
        # against the binder annotation and the reduced body against the goal
        head = t
        args: list[Term] = []
        while type(head) is App:
            args.append(head.arg)
            head = head.fn
        if type(head) is Lam:
            args.reverse()
            cur: Term = head
            reduced = False
            for i, a in enumerate(args):
                if type(cur) is not Lam:
                    cur = _apply_chain(cur, args[i:])
                    break
                check(ctx, a, cur.annot, opts)
                cur = subst(cur.body, 0, a)
                reduced = True
            if reduced:
                return check(ctx, cur, ty, opts)

    inferred = infer(ctx, t, opts)
    if not same_inhabitants(ctx, inferred.type, ty, opts):
        raise TypeCheckError(
            MISMATCH, "type mismatch",
            expected=w, actual=nf_type(ctx, inferred.type, opts))
    return TypedTerm(t, ty, _level_of_normal_type(ctx, w, opts))
