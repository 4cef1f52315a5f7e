"""Normalization by evaluation.

Terms evaluate into a semantic domain of values; quotation reads values back
as beta-normal, eta-long (at Pi and Sigma) terms.  Neutrals carry the type of
their head variable so spines can be quoted type-directedly.

Closed naturals are kept as machine integers behind the successor interface,
so large results (e.g. exponentials) never materialize as node chains during
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import core
from .core import (
    App, Context, Empty, Eq, EqInd, ExFalso, Fst, Inl, Inr, Lam, Lift, Nat,
    NatInd, Pair, Pi, Refl, Sigma, Snd, Star, Suc, Sum, SumInd, Term, Unit,
    UnitInd, Univ, Var, Zero,
)

DEFAULT_STEP_BUDGET = 10**9


class KernelBugError(Exception):
    """Internal invariant violated: evaluation met an ill-typed shape."""


class NonCanonical(Exception):
    """A closed Nat failed to normalize to a numeral (soundness alarm)."""


class StepBudgetExceeded(Exception):
    """The iota-step budget ran out; operational, not a semantics error."""


class Fuel:
    """Mutable iota-step counter shared across one evaluation session."""

    __slots__ = ("remaining", "spent")

    def __init__(self, budget: int = DEFAULT_STEP_BUDGET) -> None:
        self.remaining = budget
        self.spent = 0

    def spend(self, n: int = 1) -> None:
        self.remaining -= n
        self.spent += n
        if self.remaining < 0:
            raise StepBudgetExceeded(f"iota-step budget exhausted after {self.spent} steps")


class Value:
    __slots__ = ()


class Closure:
    """A binder body paired with its environment."""

    __slots__ = ("env", "body", "fuel")

    def __init__(self, env: tuple, body: Term, fuel: Fuel) -> None:
        self.env = env
        self.body = body
        self.fuel = fuel

    def apply(self, v: Value) -> Value:
        return eval_term(self.body, self.env + (v,), self.fuel)


class MetaClosure:
    """A closure given by a host-language function (used during quotation)."""

    __slots__ = ("fn",)

    def __init__(self, fn) -> None:
        self.fn = fn

    def apply(self, v: Value) -> Value:
        return self.fn(v)


@dataclass(slots=True, eq=False)
class VPi(Value):
    dom: Value
    cod: Closure | MetaClosure


@dataclass(slots=True, eq=False)
class VLam(Value):
    clo: Closure | MetaClosure


@dataclass(slots=True, eq=False)
class VSigma(Value):
    dom: Value
    cod: Closure | MetaClosure


@dataclass(slots=True, eq=False)
class VPair(Value):
    fst: Value
    snd: Value


@dataclass(slots=True, eq=False)
class VSum(Value):
    left: Value
    right: Value


@dataclass(slots=True, eq=False)
class VInl(Value):
    value: Value


@dataclass(slots=True, eq=False)
class VInr(Value):
    value: Value


@dataclass(slots=True, eq=False)
class VNat(Value):
    pass


@dataclass(slots=True, eq=False)
class VUnit(Value):
    pass


@dataclass(slots=True, eq=False)
class VEmpty(Value):
    pass


@dataclass(slots=True, eq=False)
class VStar(Value):
    pass


@dataclass(slots=True, eq=False)
class VNum(Value):
    """Closed numeral suc^value(zero)."""

    value: int


@dataclass(slots=True, eq=False)
class VSucs(Value):
    """count >= 1 successors over a stuck Nat."""

    count: int
    stuck: "VNeutral"


@dataclass(slots=True, eq=False)
class VEq(Value):
    ty: Value
    lhs: Value
    rhs: Value


@dataclass(slots=True, eq=False)
class VRefl(Value):
    value: Value


@dataclass(slots=True, eq=False)
class VUniv(Value):
    level: int


@dataclass(slots=True, eq=False)
class VLift(Value):
    src: int
    dst: int
    ty: Value


class Elim:
    __slots__ = ()


@dataclass(slots=True, eq=False)
class EApp(Elim):
    arg: Value


@dataclass(slots=True, eq=False)
class EFst(Elim):
    pass


@dataclass(slots=True, eq=False)
class ESnd(Elim):
    pass


@dataclass(slots=True, eq=False)
class ENatInd(Elim):
    motive: Value
    base: Value
    step: Value


@dataclass(slots=True, eq=False)
class ESumInd(Elim):
    motive: Value
    lcase: Value
    rcase: Value


@dataclass(slots=True, eq=False)
class EUnitInd(Elim):
    motive: Value
    base: Value


@dataclass(slots=True, eq=False)
class EExFalso(Elim):
    motive: Value


@dataclass(slots=True, eq=False)
class EEqInd(Elim):
    motive: Value
    base: Value


@dataclass(slots=True, eq=False)
class Neutral:
    """Spine of eliminations stuck on a variable (a de Bruijn *level*)."""

    head: int
    head_ty: Value
    spine: tuple[Elim, ...]


@dataclass(slots=True, eq=False)
class VNeutral(Value):
    neutral: Neutral
    ty: Value


VNAT = VNat()
VUNIT = VUnit()
VEMPTY = VEmpty()
VSTAR = VStar()
_NUMS = tuple(VNum(i) for i in range(512))


def vnum(n: int) -> VNum:
    return _NUMS[n] if n < 512 else VNum(n)


def fresh_var(level: int, ty: Value) -> VNeutral:
    return VNeutral(Neutral(level, ty, ()), ty)


def eval_term(t: Term, env: tuple, fuel: Fuel) -> Value:
    tt = type(t)
    if tt is Var:
        return env[-1 - t.index]
    if tt is App:
        return apply_value(eval_term(t.fn, env, fuel), eval_term(t.arg, env, fuel), fuel)
    if tt is Lam:
        return VLam(Closure(env, t.body, fuel))
    if tt is Zero:
        return _NUMS[0]
    if tt is Suc:
        k = 0
        u = t
        while type(u) is Suc:
            k += 1
            u = u.n
        inner = eval_term(u, env, fuel)
        ti = type(inner)
        if ti is VNum:
            return vnum(inner.value + k)
        if ti is VSucs:
            return VSucs(inner.count + k, inner.stuck)
        if ti is VNeutral:
            return VSucs(k, inner)
        raise KernelBugError("suc applied to a non-natural value")
    if tt is NatInd:
        # dispatch on the scrutinee before touching the other components, so
        # the closed fast paths never evaluate what they do not consume
        scrut = eval_term(t.scrut, env, fuel)
        ts = type(scrut)
        if ts is VNum:
            n = scrut.value
            if n == 0:
                return eval_term(t.base, env, fuel)
            step_term = t.step
            if type(step_term) is Lam and type(step_term.body) is Lam:
                sbody = step_term.body.body
                if _step_ignores_acc(sbody):
                    fuel.spend()
                    return eval_term(sbody, env + (vnum(n - 1), VSTAR), fuel)
                fuel.spend(n)
                acc = eval_term(t.base, env, fuel)
                for i in range(n):
                    acc = eval_term(sbody, env + (vnum(i), acc), fuel)
                return acc
            fuel.spend(n)
            acc = eval_term(t.base, env, fuel)
            step = eval_term(step_term, env, fuel)
            for i in range(n):
                acc = apply2(step, vnum(i), acc, fuel)
            return acc
        motive = eval_term(t.motive, env, fuel)
        base = eval_term(t.base, env, fuel)
        step = eval_term(t.step, env, fuel)
        return nat_ind_value(motive, base, step, scrut, fuel)
    if tt is Pair:
        return VPair(eval_term(t.a, env, fuel), eval_term(t.b, env, fuel))
    if tt is Fst:
        return vfst(eval_term(t.p, env, fuel))
    if tt is Snd:
        return vsnd(eval_term(t.p, env, fuel))
    if tt is Inl:
        return VInl(eval_term(t.a, env, fuel))
    if tt is Inr:
        return VInr(eval_term(t.b, env, fuel))
    if tt is SumInd:
        scrut = eval_term(t.scrut, env, fuel)
        ts = type(scrut)
        if ts is VInl:
            fuel.spend()
            branch = t.lcase
            if type(branch) is Lam:
                return eval_term(branch.body, env + (scrut.value,), fuel)
            return apply_value(eval_term(branch, env, fuel), scrut.value, fuel)
        if ts is VInr:
            fuel.spend()
            branch = t.rcase
            if type(branch) is Lam:
                return eval_term(branch.body, env + (scrut.value,), fuel)
            return apply_value(eval_term(branch, env, fuel), scrut.value, fuel)
        motive = eval_term(t.motive, env, fuel)
        lcase = eval_term(t.lcase, env, fuel)
        rcase = eval_term(t.rcase, env, fuel)
        return sum_ind_value(motive, lcase, rcase, scrut, fuel)
    if tt is Nat:
        return VNAT
    if tt is Unit:
        return VUNIT
    if tt is Star:
        return VSTAR
    if tt is Empty:
        return VEMPTY
    if tt is Pi:
        return VPi(eval_term(t.dom, env, fuel), Closure(env, t.cod, fuel))
    if tt is Sigma:
        return VSigma(eval_term(t.fst, env, fuel), Closure(env, t.snd, fuel))
    if tt is Sum:
        return VSum(eval_term(t.left, env, fuel), eval_term(t.right, env, fuel))
    if tt is Eq:
        return VEq(
            eval_term(t.ty, env, fuel),
            eval_term(t.lhs, env, fuel),
            eval_term(t.rhs, env, fuel),
        )
    if tt is Refl:
        return VRefl(eval_term(t.a, env, fuel))
    if tt is EqInd:
        proof = eval_term(t.proof, env, fuel)
        if type(proof) is VRefl:
            fuel.spend()
            return eval_term(t.base, env, fuel)
        motive = eval_term(t.motive, env, fuel)
        base = eval_term(t.base, env, fuel)
        return eq_ind_value(motive, base, proof, fuel)
    if tt is UnitInd:
        scrut = eval_term(t.scrut, env, fuel)
        if type(scrut) is VStar:
            fuel.spend()
            return eval_term(t.base, env, fuel)
        motive = eval_term(t.motive, env, fuel)
        base = eval_term(t.base, env, fuel)
        return unit_ind_value(motive, base, scrut, fuel)
    if tt is ExFalso:
        scrut = eval_term(t.scrut, env, fuel)
        motive = eval_term(t.motive, env, fuel)
        return ex_falso_value(motive, scrut, fuel)
    if tt is Univ:
        return VUniv(t.level)
    if tt is Lift:
        return vlift(t.src, t.dst, eval_term(t.ty, env, fuel))
    raise KernelBugError(f"eval on unknown node {t!r}")


def vsuc(v: Value) -> Value:
    tv = type(v)
    if tv is VNum:
        return vnum(v.value + 1)
    if tv is VSucs:
        return VSucs(v.count + 1, v.stuck)
    if tv is VNeutral:
        return VSucs(1, v)
    raise KernelBugError("suc applied to a non-natural value")


def apply_value(f: Value, a: Value, fuel: Fuel) -> Value:
    tf = type(f)
    if tf is VLam:
        return f.clo.apply(a)
    if tf is VNeutral:
        fty = f.ty
        if type(fty) is not VPi:
            raise KernelBugError("application head is not function-typed")
        ne = f.neutral
        return VNeutral(
            Neutral(ne.head, ne.head_ty, ne.spine + (EApp(a),)),
            fty.cod.apply(a),
        )
    raise KernelBugError("application of a non-function value")


def apply2(f: Value, a: Value, b: Value, fuel: Fuel) -> Value:
    return apply_value(apply_value(f, a, fuel), b, fuel)


def vfst(v: Value) -> Value:
    tv = type(v)
    if tv is VPair:
        return v.fst
    if tv is VNeutral:
        ty = _strip_lift(v.ty)
        if type(ty) is not VSigma:
            raise KernelBugError("fst of a non-pair value")
        ne = v.neutral
        return VNeutral(Neutral(ne.head, ne.head_ty, ne.spine + (EFst(),)), ty.dom)
    raise KernelBugError("fst of a non-pair value")


def vsnd(v: Value) -> Value:
    tv = type(v)
    if tv is VPair:
        return v.snd
    if tv is VNeutral:
        ty = _strip_lift(v.ty)
        if type(ty) is not VSigma:
            raise KernelBugError("snd of a non-pair value")
        ne = v.neutral
        return VNeutral(
            Neutral(ne.head, ne.head_ty, ne.spine + (ESnd(),)),
            ty.cod.apply(vfst(v)),
        )
    raise KernelBugError("snd of a non-pair value")


def _strip_lift(ty: Value) -> Value:
    # terms of `lift A` are exactly terms of A
    while type(ty) is VLift:
        ty = ty.ty
    return ty


# Step-term analysis results, keyed by id(); the term is kept alive so ids
# stay valid.  Bounded by the number of distinct recursion steps evaluated.
_ACC_USE_CACHE: dict[int, tuple[Term, bool]] = {}


def _step_ignores_acc(body: Term) -> bool:
    """True when a two-binder recursion step never consults its accumulator.

    Then ``ind`` behaves as a case analysis and only the final unfolding
    matters; the evaluator exploits this to keep predecessor-style
    definitions O(1) instead of O(n).
    """
    key = id(body)
    hit = _ACC_USE_CACHE.get(key)
    if hit is not None and hit[0] is body:
        return hit[1]
    result = not _occurs(body, 0)
    _ACC_USE_CACHE[key] = (body, result)
    return result


def _occurs(t: Term, index: int) -> bool:
    stack = [(t, index)]
    found = False
    while stack:
        u, i = stack.pop()
        tu = type(u)
        if tu is Var:
            if u.index == i:
                found = True
                break
            continue
        if tu is Lam:
            stack.append((u.annot, i))
            stack.append((u.body, i + 1))
        elif tu is Pi:
            stack.append((u.dom, i))
            stack.append((u.cod, i + 1))
        elif tu is Sigma:
            stack.append((u.fst, i))
            stack.append((u.snd, i + 1))
        else:
            for c in core.children(u):
                stack.append((c, i))
    return found


def nat_ind_value(motive: Value, base: Value, step: Value, scrut: Value, fuel: Fuel) -> Value:
    ts = type(scrut)
    # unpack a literal two-binder step once; the loop then evaluates the body
    # directly instead of allocating an intermediate closure per unfolding
    sbody = senv = None
    if type(step) is VLam and type(step.clo) is Closure:
        clo = step.clo
        if type(clo.body) is Lam:
            sbody = clo.body.body
            senv = clo.env
    if ts is VNum:
        n = scrut.value
        if n == 0:
            return base
        if sbody is not None:
            if _step_ignores_acc(sbody):
                fuel.spend()
                return eval_term(sbody, senv + (vnum(n - 1), VSTAR), fuel)
            fuel.spend(n)
            acc = base
            for i in range(n):
                acc = eval_term(sbody, senv + (vnum(i), acc), fuel)
            return acc
        fuel.spend(n)
        acc = base
        for i in range(n):
            acc = apply2(step, vnum(i), acc, fuel)
        return acc
    if ts is VSucs:
        k, ne = scrut.count, scrut.stuck
        if sbody is not None and _step_ignores_acc(sbody):
            fuel.spend()
            prev = ne if k == 1 else VSucs(k - 1, ne)
            return eval_term(sbody, senv + (prev, VSTAR), fuel)
        fuel.spend(k)
        acc = _stuck_nat_ind(motive, base, step, ne, fuel)
        for j in range(k):
            prev: Value = ne if j == 0 else VSucs(j, ne)
            if sbody is not None:
                acc = eval_term(sbody, senv + (prev, acc), fuel)
            else:
                acc = apply2(step, prev, acc, fuel)
        return acc
    if ts is VNeutral:
        return _stuck_nat_ind(motive, base, step, scrut, fuel)
    raise KernelBugError("ind scrutinee is not a natural")


def _stuck_nat_ind(motive: Value, base: Value, step: Value, scrut: VNeutral, fuel: Fuel) -> Value:
    ne = scrut.neutral
    return VNeutral(
        Neutral(ne.head, ne.head_ty, ne.spine + (ENatInd(motive, base, step),)),
        apply_value(motive, scrut, fuel),
    )


def sum_ind_value(motive: Value, lcase: Value, rcase: Value, scrut: Value, fuel: Fuel) -> Value:
    ts = type(scrut)
    fuel.spend()
    if ts is VInl:
        return apply_value(lcase, scrut.value, fuel)
    if ts is VInr:
        return apply_value(rcase, scrut.value, fuel)
    if ts is VNeutral:
        ne = scrut.neutral
        return VNeutral(
            Neutral(ne.head, ne.head_ty, ne.spine + (ESumInd(motive, lcase, rcase),)),
            apply_value(motive, scrut, fuel),
        )
    raise KernelBugError("case scrutinee is not a sum value")


def unit_ind_value(motive: Value, base: Value, scrut: Value, fuel: Fuel) -> Value:
    ts = type(scrut)
    fuel.spend()
    if ts is VStar:
        return base
    if ts is VNeutral:
        ne = scrut.neutral
        return VNeutral(
            Neutral(ne.head, ne.head_ty, ne.spine + (EUnitInd(motive, base),)),
            apply_value(motive, scrut, fuel),
        )
    raise KernelBugError("unitind scrutinee is not a unit value")


def ex_falso_value(motive: Value, scrut: Value, fuel: Fuel) -> Value:
    if type(scrut) is VNeutral:
        ne = scrut.neutral
        return VNeutral(
            Neutral(ne.head, ne.head_ty, ne.spine + (EExFalso(motive),)),
            apply_value(motive, scrut, fuel),
        )
    raise KernelBugError("exfalso scrutinee evaluated to a canonical value")


def eq_ind_value(motive: Value, base: Value, proof: Value, fuel: Fuel) -> Value:
    ts = type(proof)
    fuel.spend()
    if ts is VRefl:
        return base
    if ts is VNeutral:
        ne = proof.neutral
        pty = _strip_lift(proof.ty)
        if type(pty) is not VEq:
            raise KernelBugError("eqind proof is not equality-typed")
        return VNeutral(
            Neutral(ne.head, ne.head_ty, ne.spine + (EEqInd(motive, base),)),
            apply2(motive, pty.rhs, proof, fuel),
        )
    raise KernelBugError("eqind proof is not an equality value")


class _LiftClosure:
    """Postcompose a type family with a lift (pushes lifts under binders)."""

    __slots__ = ("src", "dst", "inner")

    def __init__(self, src: int, dst: int, inner) -> None:
        self.src = src
        self.dst = dst
        self.inner = inner

    def apply(self, v: Value) -> Value:
        return vlift(self.src, self.dst, self.inner.apply(v))


def vlift(src: int, dst: int, v: Value) -> Value:
    if src == dst:
        return v
    tv = type(v)
    if tv is VLift:
        return vlift(v.src, dst, v.ty)
    if tv is VSigma:
        return VSigma(vlift(src, dst, v.dom), _LiftClosure(src, dst, v.cod))
    if tv is VEq:
        return VEq(vlift(src, dst, v.ty), v.lhs, v.rhs)
    if tv is VPi and src > 0:
        return VPi(vlift(src, dst, v.dom), _LiftClosure(src, dst, v.cod))
    return VLift(src, dst, v)


# ---------------------------------------------------------------------------
# Quotation


def quote(v: Value, depth: int, ty: Value, fuel: Fuel) -> Term:
    """Read a value back as a beta-normal, eta-long term of type ``ty``."""
    ty = _strip_lift(ty)
    tty = type(ty)
    if tty is VPi:
        fresh = fresh_var(depth, ty.dom)
        body = apply_value(v, fresh, fuel)
        return Lam(
            quote_type(ty.dom, depth, fuel),
            quote(body, depth + 1, ty.cod.apply(fresh), fuel),
        )
    if tty is VSigma:
        a = vfst(v)
        b = vsnd(v)
        return Pair(
            quote(a, depth, ty.dom, fuel),
            quote(b, depth, ty.cod.apply(a), fuel),
        )
    if tty is VNat:
        tv = type(v)
        if tv is VNum:
            return core.numeral(v.value)
        if tv is VSucs:
            t = quote_neutral(v.stuck.neutral, depth, fuel)
            for _ in range(v.count):
                t = Suc(t)
            return t
    elif tty is VSum:
        tv = type(v)
        if tv is VInl:
            return Inl(quote(v.value, depth, ty.left, fuel))
        if tv is VInr:
            return Inr(quote(v.value, depth, ty.right, fuel))
    elif tty is VUnit:
        if type(v) is VStar:
            return Star()
    elif tty is VEq:
        if type(v) is VRefl:
            return Refl(quote(v.value, depth, ty.ty, fuel))
    elif tty is VUniv:
        return quote_type(v, depth, fuel)
    if type(v) is VNeutral:
        return quote_neutral(v.neutral, depth, fuel)
    if type(ty) is VNeutral:
        raise KernelBugError("canonical value at a stuck type")
    raise KernelBugError(f"cannot quote value {v!r} at type {ty!r}")


def quote_type(v: Value, depth: int, fuel: Fuel) -> Term:
    """Read a type value back as a term (structural; no eta at the outside)."""
    tv = type(v)
    if tv is VNat:
        return Nat()
    if tv is VUnit:
        return Unit()
    if tv is VEmpty:
        return Empty()
    if tv is VUniv:
        return Univ(v.level)
    if tv is VPi:
        fresh = fresh_var(depth, v.dom)
        return Pi(
            quote_type(v.dom, depth, fuel),
            quote_type(v.cod.apply(fresh), depth + 1, fuel),
        )
    if tv is VSigma:
        fresh = fresh_var(depth, v.dom)
        return Sigma(
            quote_type(v.dom, depth, fuel),
            quote_type(v.cod.apply(fresh), depth + 1, fuel),
        )
    if tv is VSum:
        return Sum(quote_type(v.left, depth, fuel), quote_type(v.right, depth, fuel))
    if tv is VEq:
        return Eq(
            quote_type(v.ty, depth, fuel),
            quote(v.lhs, depth, v.ty, fuel),
            quote(v.rhs, depth, v.ty, fuel),
        )
    if tv is VLift:
        return Lift(v.src, v.dst, quote_type(v.ty, depth, fuel))
    if tv is VNeutral:
        return quote_neutral(v.neutral, depth, fuel)
    raise KernelBugError(f"cannot quote {v!r} as a type")


def _const_family(result: Value) -> VPi:
    return VPi(VNAT, MetaClosure(lambda _v: result))


def quote_neutral(ne: Neutral, depth: int, fuel: Fuel) -> Term:
    term: Term = Var(depth - 1 - ne.head)
    ty: Value = ne.head_ty
    taken: tuple[Elim, ...] = ()
    for e in ne.spine:
        te = type(e)
        ty = _strip_lift(ty)
        taken = taken + (e,)
        if te is EApp:
            if type(ty) is not VPi:
                raise KernelBugError("spine applies a non-function")
            term = App(term, quote(e.arg, depth, ty.dom, fuel))
            ty = ty.cod.apply(e.arg)
        elif te is EFst:
            term = Fst(term)
            ty = ty.dom
        elif te is ESnd:
            prefix = VNeutral(Neutral(ne.head, ne.head_ty, taken[:-1]), ty)
            term = Snd(term)
            ty = ty.cod.apply(vfst(prefix))
        elif te is ENatInd:
            mty = VPi(VNAT, MetaClosure(lambda _v: VUniv(0)))
            motive_t = quote(e.motive, depth, mty, fuel)
            base_t = quote(e.base, depth, apply_value(e.motive, _NUMS[0], fuel), fuel)
            step_ty = VPi(
                VNAT,
                MetaClosure(
                    lambda n, m=e.motive: VPi(
                        apply_value(m, n, fuel),
                        MetaClosure(lambda _a, n=n, m=m: apply_value(m, vsuc(n), fuel)),
                    )
                ),
            )
            step_t = quote(e.step, depth, step_ty, fuel)
            stuck = VNeutral(Neutral(ne.head, ne.head_ty, taken[:-1]), ty)
            term = NatInd(motive_t, base_t, step_t, term)
            ty = apply_value(e.motive, stuck, fuel)
        elif te is ESumInd:
            if type(ty) is not VSum:
                raise KernelBugError("case on a non-sum neutral")
            sty = ty
            mty = VPi(sty, MetaClosure(lambda _v: VUniv(0)))
            motive_t = quote(e.motive, depth, mty, fuel)
            lty = VPi(
                sty.left,
                MetaClosure(lambda a, m=e.motive: apply_value(m, VInl(a), fuel)),
            )
            rty = VPi(
                sty.right,
                MetaClosure(lambda b, m=e.motive: apply_value(m, VInr(b), fuel)),
            )
            lcase_t = quote(e.lcase, depth, lty, fuel)
            rcase_t = quote(e.rcase, depth, rty, fuel)
            stuck = VNeutral(Neutral(ne.head, ne.head_ty, taken[:-1]), ty)
            term = SumInd(motive_t, lcase_t, rcase_t, term)
            ty = apply_value(e.motive, stuck, fuel)
        elif te is EUnitInd:
            mty = VPi(VUNIT, MetaClosure(lambda _v: VUniv(0)))
            motive_t = quote(e.motive, depth, mty, fuel)
            base_t = quote(e.base, depth, apply_value(e.motive, VSTAR, fuel), fuel)
            stuck = VNeutral(Neutral(ne.head, ne.head_ty, taken[:-1]), ty)
            term = UnitInd(motive_t, base_t, term)
            ty = apply_value(e.motive, stuck, fuel)
        elif te is EExFalso:
            mty = VPi(VEMPTY, MetaClosure(lambda _v: VUniv(0)))
            motive_t = quote(e.motive, depth, mty, fuel)
            stuck = VNeutral(Neutral(ne.head, ne.head_ty, taken[:-1]), ty)
            term = ExFalso(motive_t, term)
            ty = apply_value(e.motive, stuck, fuel)
        elif te is EEqInd:
            if type(ty) is not VEq:
                raise KernelBugError("eqind on a non-equality neutral")
            ety = ty
            mty = VPi(
                ety.ty,
                MetaClosure(
                    lambda b, A=ety.ty, l=ety.lhs: VPi(
                        VEq(A, l, b), MetaClosure(lambda _p: VUniv(0))
                    )
                ),
            )
            motive_t = quote(e.motive, depth, mty, fuel)
            base_ty = apply2(e.motive, ety.lhs, VRefl(ety.lhs), fuel)
            base_t = quote(e.base, depth, base_ty, fuel)
            lhs_t = quote(ety.lhs, depth, ety.ty, fuel)
            rhs_t = quote(ety.rhs, depth, ety.ty, fuel)
            stuck = VNeutral(Neutral(ne.head, ne.head_ty, taken[:-1]), ty)
            term = EqInd(motive_t, base_t, lhs_t, rhs_t, term)
            ty = apply2(e.motive, ety.rhs, stuck, fuel)
        else:
            raise KernelBugError(f"unknown spine elimination {e!r}")
    return term


# ---------------------------------------------------------------------------
# Entry points


def context_env(ctx: Context, fuel: Fuel) -> tuple[tuple, int]:
    """Environment of fresh neutrals for the context; returns (env, depth)."""
    env: tuple = ()
    depth = 0
    for ty_term, _lvl in ctx.bindings:
        tyv = eval_term(ty_term, env, fuel)
        env = env + (fresh_var(depth, tyv),)
        depth += 1
    return env, depth


def normalize(ctx: Context, t: Term, ty: Term, fuel: Fuel | None = None) -> Term:
    """Unique beta-normal eta-long form of ``t`` at type ``ty`` in ``ctx``."""
    fuel = fuel or Fuel()
    env, depth = context_env(ctx, fuel)
    tyv = eval_term(ty, env, fuel)
    return quote(eval_term(t, env, fuel), depth, tyv, fuel)


def normalize_type(ctx: Context, ty: Term, fuel: Fuel | None = None) -> Term:
    fuel = fuel or Fuel()
    env, depth = context_env(ctx, fuel)
    return quote_type(eval_term(ty, env, fuel), depth, fuel)


def canonical_nat(t: Term, fuel: Fuel | None = None) -> int:
    """The unique n with ``t = suc^n zero`` for closed well-typed ``t : Nat``.

    Raises NonCanonical if the normal form is not a numeral; for well-typed
    closed input this is unreachable, so a raise means a kernel bug.
    """
    fuel = fuel or Fuel()
    v = eval_term(t, (), fuel)
    if type(v) is VNum:
        return v.value
    raise NonCanonical(f"closed Nat evaluated to non-numeral {v!r}")
