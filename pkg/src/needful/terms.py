"""Terms with explicit substitutions, in De Bruijn form.

A term is one of ``Var``, ``Abs``, ``App`` or ``ESub``.  ``ESub(body, arg)``
stands for ``body[x\\arg]``: the substituted variable is index 0 inside
``body`` only, ``arg`` lives in the enclosing scope.

Free variables are the indices that escape every binder.  At binder depth
``d`` the index ``d + k`` denotes the ``k``-th entry of the free variable
table.  Display names (``hint``) never take part in equality or hashing, so
``==`` on terms is alpha-equivalence for a fixed free variable table.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Var:
    index: int
    hint: Optional[str] = field(default=None, compare=False)

    def __hash__(self):
        return hash(self.index)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Abs:
    body: "Term"
    hint: Optional[str] = field(default=None, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)
    _shown: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("abs", self.body)))
        object.__setattr__(self, "_shown", hash((self.hint, shown_hash(self.body))))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class App:
    fn: "Term"
    arg: "Term"
    _hash: int = field(init=False, repr=False, compare=False)
    _shown: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("app", self.fn, self.arg)))
        object.__setattr__(self, "_shown",
                           hash((shown_hash(self.fn), shown_hash(self.arg))))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class ESub:
    body: "Term"
    arg: "Term"
    hint: Optional[str] = field(default=None, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)
    _shown: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("es", self.body, self.arg)))
        object.__setattr__(self, "_shown", hash((self.hint, shown_hash(self.body),
                                                 shown_hash(self.arg))))

    def __hash__(self):
        return self._hash

    def __str__(self):
        return to_text(self)


Term = Union[Var, Abs, App, ESub]


def shown_hash(t: Term) -> int:
    """Hash of the display names of ``t``; equal terms may differ here.

    Caches keyed on terms use it alongside the term so that results built
    for one spelling of a term are not handed out for another.
    """
    if isinstance(t, Var):
        return hash((t.index, t.hint))
    return t._shown


class FreeVarStatus(enum.Enum):
    FROZEN = "frozen"
    PLAIN = "plain"


class FreeVarTable:
    """Ordered free variable names with their top-level status.

    Command line runs start with every entry frozen.
    """

    def __init__(self, names=(), status=FreeVarStatus.FROZEN):
        self.names: list[str] = []
        self.status: list[FreeVarStatus] = []
        for name in names:
            if name in self.names:
                raise ValueError(f"duplicate free variable {name!r}")
            self.add(name, status)

    def add(self, name: str, status=FreeVarStatus.FROZEN) -> int:
        if name in self.names:
            return self.names.index(name)
        self.names.append(name)
        self.status.append(status)
        return len(self.names) - 1

    def index(self, name: str) -> int:
        return self.names.index(name)

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __repr__(self):
        return f"FreeVarTable({self.names!r})"


def is_pure(t: Term) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, Abs):
        return is_pure(t.body)
    if isinstance(t, App):
        return is_pure(t.fn) and is_pure(t.arg)
    return False


def is_value(t: Term) -> bool:
    return isinstance(t, Abs)


def is_answer(t: Term) -> bool:
    """A value under a (possibly empty) list of explicit substitutions."""
    while isinstance(t, ESub):
        t = t.body
    return isinstance(t, Abs)


# ---------------------------------------------------------------------------
# Index arithmetic


def shift(t: Term, d: int, cutoff: int = 0) -> Term:
    """Add ``d`` to every index ``>= cutoff``."""
    if d == 0:
        return t
    if isinstance(t, Var):
        if t.index >= cutoff:
            return Var(t.index + d, t.hint)
        return t
    if isinstance(t, Abs):
        return Abs(shift(t.body, d, cutoff + 1), t.hint)
    if isinstance(t, App):
        return App(shift(t.fn, d, cutoff), shift(t.arg, d, cutoff))
    return ESub(shift(t.body, d, cutoff + 1), shift(t.arg, d, cutoff), t.hint)


def subst_meta(t: Term, target: int, u: Term, depth: int = 0) -> Term:
    """Capture-avoiding ``t{x:=u}`` where ``x`` is index ``target`` of ``t``.

    ``u`` is expressed in the scope of ``t``.  The binder slot of ``x`` is
    kept, so the result lives in the same scope as ``t``.
    """
    if isinstance(t, Var):
        if t.index == target + depth:
            return shift(u, depth)
        return t
    if isinstance(t, Abs):
        return Abs(subst_meta(t.body, target, u, depth + 1), t.hint)
    if isinstance(t, App):
        return App(subst_meta(t.fn, target, u, depth), subst_meta(t.arg, target, u, depth))
    return ESub(subst_meta(t.body, target, u, depth + 1),
                subst_meta(t.arg, target, u, depth), t.hint)


def instantiate(body: Term, arg: Term) -> Term:
    """Substitute ``arg`` for index 0 of ``body`` and drop that binder."""
    return shift(subst_meta(body, 0, shift(arg, 1)), -1, 1)


def free_indices(t: Term, depth: int = 0) -> frozenset:
    """Indices free in ``t``, relative to the scope of ``t``."""
    out = set()

    def go(t, depth):
        if isinstance(t, Var):
            if t.index >= depth:
                out.add(t.index - depth)
        elif isinstance(t, Abs):
            go(t.body, depth + 1)
        elif isinstance(t, App):
            go(t.fn, depth)
            go(t.arg, depth)
        else:
            go(t.body, depth + 1)
            go(t.arg, depth)

    go(t, depth)
    return frozenset(out)


def occurs(t: Term, index: int) -> bool:
    return index in free_indices(t)


def count_occurrences(t: Term, index: int) -> int:
    if isinstance(t, Var):
        return int(t.index == index)
    if isinstance(t, Abs):
        return count_occurrences(t.body, index + 1)
    if isinstance(t, App):
        return count_occurrences(t.fn, index) + count_occurrences(t.arg, index)
    return count_occurrences(t.body, index + 1) + count_occurrences(t.arg, index)


def free_count(t: Term) -> int:
    """Size of the smallest free variable table that covers ``t``."""
    idx = free_indices(t)
    return max(idx) + 1 if idx else 0


def free_names(t: Term) -> dict:
    """Map each free index of ``t`` to the display hint found on it."""
    names = {}

    def go(t, depth):
        if isinstance(t, Var):
            if t.index >= depth and t.hint is not None:
                names.setdefault(t.index - depth, t.hint)
        elif isinstance(t, Abs):
            go(t.body, depth + 1)
        elif isinstance(t, App):
            go(t.fn, depth)
            go(t.arg, depth)
        else:
            go(t.body, depth + 1)
            go(t.arg, depth)

    go(t, 0)
    return names


def rename_free(t: Term, names: dict, depth: int = 0) -> Term:
    """``t`` with free index ``k`` displayed as ``names[k]`` when given."""
    if isinstance(t, Var):
        k = t.index - depth
        if k >= 0 and k in names and t.hint != names[k]:
            return Var(t.index, names[k])
        return t
    if isinstance(t, Abs):
        return Abs(rename_free(t.body, names, depth + 1), t.hint)
    if isinstance(t, App):
        return App(rename_free(t.fn, names, depth), rename_free(t.arg, names, depth))
    return ESub(rename_free(t.body, names, depth + 1), rename_free(t.arg, names, depth),
                t.hint)


def free_vars(t: Term) -> frozenset:
    """Names of the free variables of ``t`` (``#k`` when no name is known)."""
    names = free_names(t)
    return frozenset(names.get(i, f"#{i}") for i in free_indices(t))


def size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 1 + size(t.body)
    if isinstance(t, App):
        return 1 + size(t.fn) + size(t.arg)
    return 1 + size(t.body) + size(t.arg)


def depth(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 1 + depth(t.body)
    if isinstance(t, App):
        return 1 + max(depth(t.fn), depth(t.arg))
    return 1 + max(depth(t.body), depth(t.arg))


def count_esubs(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    if isinstance(t, Abs):
        return count_esubs(t.body)
    if isinstance(t, App):
        return count_esubs(t.fn) + count_esubs(t.arg)
    return 1 + count_esubs(t.body) + count_esubs(t.arg)


def alpha_eq(t: Term, u: Term) -> bool:
    """Alpha-equivalence.

    Bound names are irrelevant; free variables must agree on index and, when
    both sides carry a name for them, on that name.
    """
    if t != u:
        return False
    nt, nu = free_names(t), free_names(u)
    return all(nt[k] == nu[k] for k in nt.keys() & nu.keys())


# ---------------------------------------------------------------------------
# Unfolding, reverting, garbage collection


def unfold(t: Term) -> Term:
    """Apply every explicit substitution; the result is a pure term."""
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(unfold(t.body), t.hint)
    if isinstance(t, App):
        return App(unfold(t.fn), unfold(t.arg))
    return instantiate(unfold(t.body), unfold(t.arg))


def revert(t: Term) -> Term:
    """Turn every ``t[x\\u]`` back into the redex ``(\\x. t) u``."""
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(revert(t.body), t.hint)
    if isinstance(t, App):
        return App(revert(t.fn), revert(t.arg))
    return App(Abs(revert(t.body), t.hint), revert(t.arg))


def gc(t: Term) -> Term:
    """Drop every substitution whose variable does not occur in its body.

    Not part of any reduction strategy; provided as a cleanup pass.
    """
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(gc(t.body), t.hint)
    if isinstance(t, App):
        return App(gc(t.fn), gc(t.arg))
    body = gc(t.body)
    if not occurs(body, 0):
        return shift(body, -1, 1)
    return ESub(body, gc(t.arg), t.hint)


# ---------------------------------------------------------------------------
# Paths


def subterm(t: Term, path) -> Term:
    for i in path:
        if isinstance(t, Abs):
            t = t.body
        elif isinstance(t, App):
            t = t.fn if i == 0 else t.arg
        else:
            t = t.body if i == 0 else t.arg
    return t


def replace_at(t: Term, path, new: Term) -> Term:
    """Put ``new`` at ``path`` in ``t``; ``new`` must be in the hole's scope."""
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, Abs):
        return Abs(replace_at(t.body, rest, new), t.hint)
    if isinstance(t, App):
        if i == 0:
            return App(replace_at(t.fn, rest, new), t.arg)
        return App(t.fn, replace_at(t.arg, rest, new))
    if i == 0:
        return ESub(replace_at(t.body, rest, new), t.arg, t.hint)
    return ESub(t.body, replace_at(t.arg, rest, new), t.hint)


def binders_on_path(t: Term, path) -> int:
    """Number of binders crossed when walking ``path`` down from ``t``."""
    n = 0
    for i in path:
        if isinstance(t, Abs):
            n += 1
            t = t.body
        elif isinstance(t, App):
            t = t.fn if i == 0 else t.arg
        else:
            if i == 0:
                n += 1
                t = t.body
            else:
                t = t.arg
    return n


# ---------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z0-9_][A-Za-z0-9_']*)|(?P<sym>[\\λ.()\[\]]))")


class ParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


def _tokenize(text: str):
    pos = 0
    tokens = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start("ident") if m.group("ident") else m.start("sym")
        if m.group("ident"):
            tokens.append(("ident", m.group("ident"), start))
        else:
            sym = m.group("sym")
            tokens.append(("\\" if sym == "λ" else sym, sym, start))
        pos = m.end()
    tokens.append(("eof", None, len(text)))
    return tokens


class _Parser:
    """Recursive descent over the token list, producing a named tree.

    Named nodes: ``("var", name)``, ``("abs", name, body)``,
    ``("app", fn, arg)``, ``("es", body, name, arg)``.
    """

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i][0]

    def take(self, kind):
        tok = self.tokens[self.i]
        if tok[0] != kind:
            what = tok[1] if tok[1] is not None else "end of input"
            raise ParseError(f"expected {kind!r}, found {what!r}", tok[2])
        self.i += 1
        return tok

    def parse(self):
        t = self.term()
        self.take("eof")
        return t

    def term(self):
        if self.peek() == "\\":
            return self.abstraction()
        return self.application()

    def abstraction(self):
        self.take("\\")
        names = [self.take("ident")[1]]
        while self.peek() == "ident":
            names.append(self.take("ident")[1])
        self.take(".")
        body = self.term()
        for name in reversed(names):
            body = ("abs", name, body)
        return body

    def application(self):
        t = self.postfix()
        while True:
            kind = self.peek()
            if kind in ("ident", "("):
                t = ("app", t, self.postfix())
            elif kind == "\\":
                return ("app", t, self.abstraction())
            else:
                return t

    def postfix(self):
        t = self.atom()
        while self.peek() == "[":
            self.take("[")
            name = self.take("ident")[1]
            self.take("\\")
            arg = self.term()
            self.take("]")
            t = ("es", t, name, arg)
        return t

    def atom(self):
        tok = self.tokens[self.i]
        if tok[0] == "ident":
            self.i += 1
            return ("var", tok[1])
        if tok[0] == "(":
            self.i += 1
            t = self.term()
            self.take(")")
            return t
        what = tok[1] if tok[1] is not None else "end of input"
        raise ParseError(f"unexpected {what!r}", tok[2])


def _resolve(node, scope: list, table: FreeVarTable) -> Term:
    kind = node[0]
    if kind == "var":
        name = node[1]
        for j in range(len(scope) - 1, -1, -1):
            if scope[j] == name:
                return Var(len(scope) - 1 - j, name)
        return Var(len(scope) + table.add(name), name)
    if kind == "abs":
        scope.append(node[1])
        body = _resolve(node[2], scope, table)
        scope.pop()
        return Abs(body, node[1])
    if kind == "app":
        return App(_resolve(node[1], scope, table), _resolve(node[2], scope, table))
    scope.append(node[2])
    body = _resolve(node[1], scope, table)
    scope.pop()
    return ESub(body, _resolve(node[3], scope, table), node[2])


def parse(text: str, table: Optional[FreeVarTable] = None) -> Term:
    """Parse concrete syntax into a canonical term.

    Grammar: ``x``, ``\\x. t`` (several binders allowed), ``t u``
    (left associative) and the postfix ``t[x\\u]``, which applies to atoms.
    Unbound identifiers are appended to ``table`` in order of first
    occurrence.
    """
    if table is None:
        table = FreeVarTable()
    return _resolve(_Parser(text).parse(), [], table)


# ---------------------------------------------------------------------------
# Printing

_NAMES = ["x", "y", "z", "w", "u", "v", "a", "b", "c", "d", "e", "f", "g", "h"]


def _fresh_names() -> Iterator[str]:
    yield from _NAMES
    n = 1
    while True:
        for name in _NAMES:
            yield f"{name}{n}"
        n += 1


class _Printer:
    def __init__(self, t: Term, table: Optional[FreeVarTable]):
        hints = free_names(t)
        self.free: dict[int, str] = {}
        for k in free_indices(t):
            if table is not None and k < len(table):
                self.free[k] = table.names[k]
            else:
                self.free[k] = hints.get(k, f"free{k}")
        self.used = set(self.free.values())

    def name_for(self, hint, body, scope):
        # names of outer variables that the body refers to must stay visible
        captured = set()
        for j in free_indices(body):
            if j == 0:
                continue
            j -= 1
            if j < len(scope):
                captured.add(scope[len(scope) - 1 - j])
            else:
                captured.add(self.free[j - len(scope)])
        if hint is not None and hint not in captured:
            name = hint
        else:
            base = hint
            name = None
            if base is not None:
                n = 1
                while f"{base}{n}" in captured or f"{base}{n}" in self.used:
                    n += 1
                name = f"{base}{n}"
            else:
                for cand in _fresh_names():
                    if cand not in self.used and cand not in captured:
                        name = cand
                        break
        self.used.add(name)
        return name

    def var(self, t, scope):
        if t.index < len(scope):
            return scope[len(scope) - 1 - t.index]
        return self.free[t.index - len(scope)]

    def term(self, t, scope):
        if isinstance(t, Abs):
            name = self.name_for(t.hint, t.body, scope)
            scope.append(name)
            body = self.term(t.body, scope)
            scope.pop()
            return f"\\{name}. {body}"
        if isinstance(t, App):
            fn = self.term(t.fn, scope)
            if isinstance(t.fn, Abs):
                fn = f"({fn})"
            arg = self.term(t.arg, scope)
            if isinstance(t.arg, (Abs, App)):
                arg = f"({arg})"
            return f"{fn} {arg}"
        if isinstance(t, ESub):
            name = self.name_for(t.hint, t.body, scope)
            scope.append(name)
            body = self.term(t.body, scope)
            scope.pop()
            if isinstance(t.body, (Abs, App)):
                body = f"({body})"
            arg = self.term(t.arg, scope)
            return f"{body}[{name}\\{arg}]"
        return self.var(t, scope)


def to_text(t: Term, table: Optional[FreeVarTable] = None) -> str:
    """Concrete syntax for ``t``; ``parse`` of the result is alpha-equal to ``t``.

    Binder hints are kept when they cause no capture, otherwise names are
    regenerated deterministically.
    """
    return _Printer(t, table).term(t, [])


# ---------------------------------------------------------------------------
# JSON encoding


def to_json(t: Term):
    if isinstance(t, Var):
        return {"var": t.index}
    if isinstance(t, Abs):
        return {"abs": [t.hint, to_json(t.body)]}
    if isinstance(t, App):
        return {"app": [to_json(t.fn), to_json(t.arg)]}
    return {"es": [t.hint, to_json(t.body), to_json(t.arg)]}


def from_json(data) -> Term:
    if "var" in data:
        return Var(int(data["var"]))
    if "abs" in data:
        hint, body = data["abs"]
        return Abs(from_json(body), hint)
    if "app" in data:
        fn, arg = data["app"]
        return App(from_json(fn), from_json(arg))
    hint, body, arg = data["es"]
    return ESub(from_json(body), from_json(arg), hint)
