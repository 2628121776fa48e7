"""Formula ASTs: parallel connectives, choice quantifiers, recurrence, directory refs.

Concrete syntax (see parser.py):

    ~F        negation
    F /\\ G    parallel conjunction
    F \\/ G    parallel disjunction
    F -> G    implication (right associative)
    @x. F     choice-all: the quantifier's opponent picks x
    #x. F     choice-exists: the quantifier's owner picks x
    $F        replicable service (branching recurrence)
    /m, !/m   shared / copied directory reference
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .terms import Term, Var, pretty_term, subst_var, term_vars


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()


@dataclass(frozen=True)
class Neg:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class All:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Recur:
    body: "Formula"


@dataclass(frozen=True)
class DirRef:
    name: str
    args: tuple = ()
    copy: bool = False


Formula = Atom | Neg | And | Or | Implies | All | Exists | Recur | DirRef

_BINARY = {And: "/\\", Or: "\\/", Implies: "->"}
_UNARY = (Neg, All, Exists, Recur)


def children(f: Formula) -> tuple:
    """Child subformulas, in address order (1-based for locate)."""
    if isinstance(f, (And, Or, Implies)):
        return (f.left, f.right)
    if isinstance(f, (Neg, All, Exists, Recur)):
        return (f.body,)
    return ()


def with_children(f: Formula, kids: tuple) -> Formula:
    if isinstance(f, (And, Or, Implies)):
        return type(f)(kids[0], kids[1])
    if isinstance(f, Neg):
        return Neg(kids[0])
    if isinstance(f, (All, Exists)):
        return type(f)(f.var, kids[0])
    if isinstance(f, Recur):
        return Recur(kids[0])
    return f


def free_vars(f: Formula) -> set:
    """Names of Vars free in f (quantifiers bind; DirRef args count)."""
    if isinstance(f, Atom):
        out = set()
        for t in f.args:
            out |= term_vars(t)
        return out
    if isinstance(f, DirRef):
        out = set()
        for t in f.args:
            out |= term_vars(t)
        return out
    if isinstance(f, (All, Exists)):
        return free_vars(f.body) - {f.var}
    out = set()
    for c in children(f):
        out |= free_vars(c)
    return out


def substitute(f: Formula, var: str, value: Term) -> Formula:
    """Capture-avoiding substitution of `value` for free Var(var) in f.

    Inner binders of the same name shadow.  A binder whose name occurs free
    in `value` is renamed before descending, so the substituted term can
    never be captured.
    """
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(subst_var(t, var, value) for t in f.args))
    if isinstance(f, DirRef):
        return DirRef(f.name, tuple(subst_var(t, var, value) for t in f.args), f.copy)
    if isinstance(f, (All, Exists)):
        if f.var == var:
            return f
        clash = term_vars(value)
        if f.var in clash and var in free_vars(f.body):
            fresh = _fresh_name(f.var, clash | free_vars(f.body) | {var})
            body = substitute(f.body, f.var, Var(fresh))
            return type(f)(fresh, substitute(body, var, value))
        return type(f)(f.var, substitute(f.body, var, value))
    kids = tuple(substitute(c, var, value) for c in children(f))
    return with_children(f, kids)


def _fresh_name(base: str, avoid: set) -> str:
    i = 1
    while f"{base}{i}" in avoid:
        i += 1
    return f"{base}{i}"


def locate(f: Formula, segments) -> Formula:
    """The subformula at a 1-based child path; [] addresses the root."""
    cur = f
    for seg in segments:
        kids = children(cur)
        if not 1 <= seg <= len(kids):
            raise ConfigError(
                f"no child {seg} at {pretty(cur)} (has {len(kids)})")
        cur = kids[seg - 1]
    return cur


def replace_at(f: Formula, segments, new: Formula) -> Formula:
    """f with the subformula at `segments` swapped for `new`."""
    if not segments:
        return new
    seg = segments[0]
    kids = children(f)
    if not 1 <= seg <= len(kids):
        raise ConfigError(f"no child {seg} at {pretty(f)}")
    kids = list(kids)
    kids[seg - 1] = replace_at(kids[seg - 1], segments[1:], new)
    return with_children(f, tuple(kids))


# Precedence levels for printing; parenthesize any child that binds
# looser than its context, and right children of the left-associative
# binary connectives at equal level.
_LEVEL = {Implies: 1, Or: 2, And: 3}
_UNARY_LEVEL = 4


def pretty(f: Formula, level: int = 0) -> str:
    if isinstance(f, Atom):
        if not f.args:
            return f.pred
        return f"{f.pred}({','.join(pretty_term(t) for t in f.args)})"
    if isinstance(f, DirRef):
        bang = "!" if f.copy else ""
        if not f.args:
            return f"{bang}/{f.name}"
        return f"{bang}/{f.name}({','.join(pretty_term(t) for t in f.args)})"
    if isinstance(f, Neg):
        return _wrap(f"~{pretty(f.body, _UNARY_LEVEL)}", _UNARY_LEVEL, level)
    if isinstance(f, All):
        return _wrap(f"@{f.var}. {pretty(f.body, _UNARY_LEVEL)}", _UNARY_LEVEL, level)
    if isinstance(f, Exists):
        return _wrap(f"#{f.var}. {pretty(f.body, _UNARY_LEVEL)}", _UNARY_LEVEL, level)
    if isinstance(f, Recur):
        return _wrap(f"${pretty(f.body, _UNARY_LEVEL)}", _UNARY_LEVEL, level)
    mine = _LEVEL[type(f)]
    op = _BINARY[type(f)]
    if isinstance(f, Implies):
        # right associative: the left child needs strictly tighter binding
        left = pretty(f.left, mine + 1)
        right = pretty(f.right, mine)
    else:
        left = pretty(f.left, mine)
        right = pretty(f.right, mine + 1)
    return _wrap(f"{left} {op} {right}", mine, level)


def _wrap(text: str, mine: int, ctx: int) -> str:
    return f"({text})" if mine < ctx else text
