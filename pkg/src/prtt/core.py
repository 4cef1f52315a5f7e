"""Nameless abstract syntax, universe levels, contexts, and substitution.

Terms use de Bruijn indices: ``Var(0)`` is the innermost binder.  Binders
occur in ``Lam`` (body), ``Pi`` (cod) and ``Sigma`` (snd); every other
constructor is a plain node.  Eliminator motives, branches, and steps are
ordinary function-typed terms, applied with ``App``.
"""

from __future__ import annotations

from dataclasses import dataclass

# Universe configuration.  The default is exactly two universes U0 : U1;
# the checker accepts any max level up to MAX_CONFIGURABLE_LEVEL.
DEFAULT_MAX_LEVEL = 1
MAX_CONFIGURABLE_LEVEL = 8

Level = int


class Term:
    """Base class of all syntax nodes."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    index: int


@dataclass(frozen=True, slots=True)
class Lam(Term):
    annot: Term
    body: Term


@dataclass(frozen=True, slots=True)
class App(Term):
    fn: Term
    arg: Term


@dataclass(frozen=True, slots=True)
class Pi(Term):
    dom: Term
    cod: Term


@dataclass(frozen=True, slots=True)
class Sigma(Term):
    fst: Term
    snd: Term


@dataclass(frozen=True, slots=True)
class Pair(Term):
    a: Term
    b: Term


@dataclass(frozen=True, slots=True)
class Fst(Term):
    p: Term


@dataclass(frozen=True, slots=True)
class Snd(Term):
    p: Term


@dataclass(frozen=True, slots=True)
class Eq(Term):
    ty: Term
    lhs: Term
    rhs: Term


@dataclass(frozen=True, slots=True)
class Refl(Term):
    a: Term


@dataclass(frozen=True, slots=True)
class EqInd(Term):
    """J eliminator: motive takes the varying endpoint and the proof."""

    motive: Term
    base: Term
    lhs: Term
    rhs: Term
    proof: Term


@dataclass(frozen=True, slots=True)
class Empty(Term):
    pass


@dataclass(frozen=True, slots=True)
class ExFalso(Term):
    motive: Term
    scrut: Term


@dataclass(frozen=True, slots=True)
class Unit(Term):
    pass


@dataclass(frozen=True, slots=True)
class Star(Term):
    pass


@dataclass(frozen=True, slots=True)
class UnitInd(Term):
    motive: Term
    base: Term
    scrut: Term


@dataclass(frozen=True, slots=True)
class Nat(Term):
    pass


@dataclass(frozen=True, slots=True)
class Zero(Term):
    pass


@dataclass(frozen=True, slots=True)
class Suc(Term):
    n: Term


@dataclass(frozen=True, slots=True)
class NatInd(Term):
    motive: Term
    base: Term
    step: Term
    scrut: Term


@dataclass(frozen=True, slots=True)
class Sum(Term):
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Inl(Term):
    a: Term


@dataclass(frozen=True, slots=True)
class Inr(Term):
    b: Term


@dataclass(frozen=True, slots=True)
class SumInd(Term):
    motive: Term
    lcase: Term
    rcase: Term
    scrut: Term


@dataclass(frozen=True, slots=True)
class Univ(Term):
    level: Level


@dataclass(frozen=True, slots=True)
class Lift(Term):
    """Explicit cumulativity coercion on types; requires src <= dst."""

    src: Level
    dst: Level
    ty: Term


class ScopeError(Exception):
    """Raised when index shifting would produce a negative index."""


@dataclass(frozen=True, slots=True)
class Context:
    """Telescope of bindings ``(type, level)``; innermost binding last.

    ``Var(0)`` refers to the last entry.  Each stored type is well formed in
    the preceding prefix and is a type at the recorded judgment level.
    """

    bindings: tuple[tuple[Term, Level], ...] = ()

    def __len__(self) -> int:
        return len(self.bindings)

    def extend(self, ty: Term, level: Level) -> "Context":
        return Context(self.bindings + ((ty, level),))

    def lookup(self, index: int) -> tuple[Term, Level]:
        """Type and level of ``Var(index)``, unshifted (as stored)."""
        if index < 0 or index >= len(self.bindings):
            raise ScopeError(f"variable index {index} out of scope")
        return self.bindings[-1 - index]


EMPTY_CONTEXT = Context()


def _map_vars(t: Term, depth: int, on_var) -> Term:
    """Rebuild ``t``, replacing each ``Var`` via ``on_var(index, depth)``.

    ``depth`` counts binders crossed; ``on_var`` receives the original index
    and the depth at the occurrence and returns a replacement term.
    """
    tt = type(t)
    if tt is Var:
        return on_var(t.index, depth)
    if tt in (Nat, Zero, Unit, Star, Empty, Univ):
        return t
    if tt is Suc:
        return Suc(_map_vars(t.n, depth, on_var))
    if tt is App:
        return App(_map_vars(t.fn, depth, on_var), _map_vars(t.arg, depth, on_var))
    if tt is Lam:
        return Lam(_map_vars(t.annot, depth, on_var), _map_vars(t.body, depth + 1, on_var))
    if tt is Pi:
        return Pi(_map_vars(t.dom, depth, on_var), _map_vars(t.cod, depth + 1, on_var))
    if tt is Sigma:
        return Sigma(_map_vars(t.fst, depth, on_var), _map_vars(t.snd, depth + 1, on_var))
    if tt is Pair:
        return Pair(_map_vars(t.a, depth, on_var), _map_vars(t.b, depth, on_var))
    if tt is Fst:
        return Fst(_map_vars(t.p, depth, on_var))
    if tt is Snd:
        return Snd(_map_vars(t.p, depth, on_var))
    if tt is Eq:
        return Eq(
            _map_vars(t.ty, depth, on_var),
            _map_vars(t.lhs, depth, on_var),
            _map_vars(t.rhs, depth, on_var),
        )
    if tt is Refl:
        return Refl(_map_vars(t.a, depth, on_var))
    if tt is EqInd:
        return EqInd(
            _map_vars(t.motive, depth, on_var),
            _map_vars(t.base, depth, on_var),
            _map_vars(t.lhs, depth, on_var),
            _map_vars(t.rhs, depth, on_var),
            _map_vars(t.proof, depth, on_var),
        )
    if tt is ExFalso:
        return ExFalso(_map_vars(t.motive, depth, on_var), _map_vars(t.scrut, depth, on_var))
    if tt is UnitInd:
        return UnitInd(
            _map_vars(t.motive, depth, on_var),
            _map_vars(t.base, depth, on_var),
            _map_vars(t.scrut, depth, on_var),
        )
    if tt is NatInd:
        return NatInd(
            _map_vars(t.motive, depth, on_var),
            _map_vars(t.base, depth, on_var),
            _map_vars(t.step, depth, on_var),
            _map_vars(t.scrut, depth, on_var),
        )
    if tt is Sum:
        return Sum(_map_vars(t.left, depth, on_var), _map_vars(t.right, depth, on_var))
    if tt is Inl:
        return Inl(_map_vars(t.a, depth, on_var))
    if tt is Inr:
        return Inr(_map_vars(t.b, depth, on_var))
    if tt is SumInd:
        return SumInd(
            _map_vars(t.motive, depth, on_var),
            _map_vars(t.lcase, depth, on_var),
            _map_vars(t.rcase, depth, on_var),
            _map_vars(t.scrut, depth, on_var),
        )
    if tt is Lift:
        return Lift(t.src, t.dst, _map_vars(t.ty, depth, on_var))
    raise TypeError(f"unknown term node {t!r}")


def shift(t: Term, cutoff: int, amount: int) -> Term:
    """Adjust all free indices >= ``cutoff`` by ``amount``."""

    def on_var(index: int, depth: int) -> Term:
        if index >= cutoff + depth:
            if index + amount < 0:
                raise ScopeError(f"shift underflow: Var({index}) by {amount}")
            return Var(index + amount)
        return Var(index)

    if amount == 0:
        return t
    return _map_vars(t, 0, on_var)


def subst(t: Term, k: int, u: Term) -> Term:
    """Substitute ``u`` for ``Var(k)`` in ``t``, removing the binder slot.

    Indices above ``k`` are decremented; ``u`` is shifted as it moves under
    binders, so capture is impossible.
    """

    def on_var(index: int, depth: int) -> Term:
        j = k + depth
        if index == j:
            return shift(u, 0, depth) if depth else u
        if index > j:
            return Var(index - 1)
        return Var(index)

    return _map_vars(t, 0, on_var)


def instantiate(body: Term, arg: Term) -> Term:
    """Replace the binder variable of ``body`` (``Var(0)``) with ``arg``."""
    return subst(body, 0, arg)


def collapse_lifts(t: Term) -> Term:
    """Fuse and push lifts: drop identities, merge compositions, and commute
    lifts under Sigma, Eq, and (for src > 0) Pi.

    The result never has a ``Lift`` directly wrapping another ``Lift`` and
    never an identity ``Lift``.
    """
    tt = type(t)
    if tt is Lift:
        inner = collapse_lifts(t.ty)
        return _push_lift(t.src, t.dst, inner)
    if tt in (Var, Nat, Zero, Unit, Star, Empty, Univ):
        return t
    if tt is Suc:
        return Suc(collapse_lifts(t.n))
    if tt is App:
        return App(collapse_lifts(t.fn), collapse_lifts(t.arg))
    if tt is Lam:
        return Lam(collapse_lifts(t.annot), collapse_lifts(t.body))
    if tt is Pi:
        return Pi(collapse_lifts(t.dom), collapse_lifts(t.cod))
    if tt is Sigma:
        return Sigma(collapse_lifts(t.fst), collapse_lifts(t.snd))
    if tt is Pair:
        return Pair(collapse_lifts(t.a), collapse_lifts(t.b))
    if tt is Fst:
        return Fst(collapse_lifts(t.p))
    if tt is Snd:
        return Snd(collapse_lifts(t.p))
    if tt is Eq:
        return Eq(collapse_lifts(t.ty), collapse_lifts(t.lhs), collapse_lifts(t.rhs))
    if tt is Refl:
        return Refl(collapse_lifts(t.a))
    if tt is EqInd:
        return EqInd(
            collapse_lifts(t.motive),
            collapse_lifts(t.base),
            collapse_lifts(t.lhs),
            collapse_lifts(t.rhs),
            collapse_lifts(t.proof),
        )
    if tt is ExFalso:
        return ExFalso(collapse_lifts(t.motive), collapse_lifts(t.scrut))
    if tt is UnitInd:
        return UnitInd(collapse_lifts(t.motive), collapse_lifts(t.base), collapse_lifts(t.scrut))
    if tt is NatInd:
        return NatInd(
            collapse_lifts(t.motive),
            collapse_lifts(t.base),
            collapse_lifts(t.step),
            collapse_lifts(t.scrut),
        )
    if tt is Sum:
        return Sum(collapse_lifts(t.left), collapse_lifts(t.right))
    if tt is Inl:
        return Inl(collapse_lifts(t.a))
    if tt is Inr:
        return Inr(collapse_lifts(t.b))
    if tt is SumInd:
        return SumInd(
            collapse_lifts(t.motive),
            collapse_lifts(t.lcase),
            collapse_lifts(t.rcase),
            collapse_lifts(t.scrut),
        )
    raise TypeError(f"unknown term node {t!r}")


def _push_lift(src: Level, dst: Level, inner: Term) -> Term:
    # inner is already collapsed
    if src == dst:
        return inner
    tt = type(inner)
    if tt is Lift:
        # composition coherence: the inner lift ends where this one starts
        return _push_lift(inner.src, dst, inner.ty)
    if tt is Sigma:
        return Sigma(
            _push_lift(src, dst, inner.fst),
            _push_lift(src, dst, inner.snd),
        )
    if tt is Eq:
        return Eq(_push_lift(src, dst, inner.ty), inner.lhs, inner.rhs)
    if tt is Pi and src > 0:
        return Pi(_push_lift(src, dst, inner.dom), _push_lift(src, dst, inner.cod))
    return Lift(src, dst, inner)


def erase_lifts(t: Term) -> Term:
    """Drop every ``Lift`` node; used to state lift-coherence invariants."""
    while type(t) is Lift:
        t = t.ty
    return _map_children(t, erase_lifts)


def _map_children(t: Term, f) -> Term:
    """Apply ``f`` to each immediate child term (binder-blind)."""
    tt = type(t)
    if tt in (Var, Nat, Zero, Unit, Star, Empty, Univ):
        return t
    if tt is Suc:
        return Suc(f(t.n))
    if tt is App:
        return App(f(t.fn), f(t.arg))
    if tt is Lam:
        return Lam(f(t.annot), f(t.body))
    if tt is Pi:
        return Pi(f(t.dom), f(t.cod))
    if tt is Sigma:
        return Sigma(f(t.fst), f(t.snd))
    if tt is Pair:
        return Pair(f(t.a), f(t.b))
    if tt is Fst:
        return Fst(f(t.p))
    if tt is Snd:
        return Snd(f(t.p))
    if tt is Eq:
        return Eq(f(t.ty), f(t.lhs), f(t.rhs))
    if tt is Refl:
        return Refl(f(t.a))
    if tt is EqInd:
        return EqInd(f(t.motive), f(t.base), f(t.lhs), f(t.rhs), f(t.proof))
    if tt is ExFalso:
        return ExFalso(f(t.motive), f(t.scrut))
    if tt is UnitInd:
        return UnitInd(f(t.motive), f(t.base), f(t.scrut))
    if tt is NatInd:
        return NatInd(f(t.motive), f(t.base), f(t.step), f(t.scrut))
    if tt is Sum:
        return Sum(f(t.left), f(t.right))
    if tt is Inl:
        return Inl(f(t.a))
    if tt is Inr:
        return Inr(f(t.b))
    if tt is SumInd:
        return SumInd(f(t.motive), f(t.lcase), f(t.rcase), f(t.scrut))
    if tt is Lift:
        return Lift(t.src, t.dst, f(t.ty))
    raise TypeError(f"unknown term node {t!r}")


def children(t: Term) -> tuple[Term, ...]:
    out: list[Term] = []
    _map_children(t, lambda c: (out.append(c), c)[1])
    return tuple(out)


def term_size(t: Term) -> int:
    """Number of nodes in the tree."""
    size = 1
    for c in children(t):
        size += term_size(c)
    return size


def numeral(n: int) -> Term:
    """The n-th numeral ``suc^n zero``."""
    if n < 0:
        raise ValueError("numerals are naturals")
    t: Term = Zero()
    for _ in range(n):
        t = Suc(t)
    return t


def numeral_value(t: Term) -> int | None:
    """Inverse of ``numeral``; None if ``t`` is not a closed numeral."""
    n = 0
    while type(t) is Suc:
        n += 1
        t = t.n
    return n if type(t) is Zero else None


def max_free_index(t: Term) -> int:
    """Largest free index in ``t``, or -1 if closed."""
    best = -1

    def on_var(index: int, depth: int) -> Term:
        nonlocal best
        if index >= depth:
            best = max(best, index - depth)
        return Var(index)

    _map_vars(t, 0, on_var)
    return best


def is_closed(t: Term) -> bool:
    return max_free_index(t) < 0
