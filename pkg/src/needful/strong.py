"""Strong call-by-need reduction with explicit substitutions.

The reduction relation ``t ->(rho, phi, mu) t'`` is implemented as an
enumerator of every derivable conclusion.  Contexts are tuples of binder
statuses, innermost binder first, so that ``ctx[k]`` is the status of the
variable with De Bruijn index ``k``.  Free variables of a top-level term
occupy the tail of the tuple and start out frozen.

Three variants share the code:

* ``SN``: the plain strong calculus;
* ``SN_PLUS``: substitution only of values that are local normal forms;
* ``SCBN2017``: no reduction under abstractions in non top-level-like
  positions, and arguments of a structure are reduced only once the
  structure itself is normal.
"""
from __future__ import annotations

import enum
import random
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

from .terms import Abs, App, ESub, Term, Var, free_count, shift, shown_hash


class Mode(enum.Enum):
    TOP = "top"
    BOT = "bot"

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Mode.{self.name}"


class Status(enum.Enum):
    FROZEN = "frozen"
    OMEGA = "omega"
    PLAIN = "plain"
    # the variable under substitution behaves like any unfrozen one; sharing
    # the member keeps enumerations of nested substitutions cacheable
    ACTIVE = "plain"

    __hash__ = object.__hash__

    def __repr__(self):
        return f"Status.{self.name}"


class Variant(enum.Enum):
    SN = "sn"
    SN_PLUS = "sn+"
    SCBN2017 = "scbn2017"


TOP, BOT = Mode.TOP, Mode.BOT
FROZEN, OMEGA, ACTIVE, PLAIN = Status.FROZEN, Status.OMEGA, Status.ACTIVE, Status.PLAIN


# Labels.  Binder references are De Bruijn indices in the scope of the term
# being reduced; ``Sub.value`` lives in that same scope.


@dataclass(frozen=True)
class DB:
    def lift(self):
        return self


@dataclass(frozen=True)
class LSV:
    def lift(self):
        return self


@dataclass(frozen=True)
class Id:
    var: int

    def lift(self):
        return Id(self.var + 1)


@dataclass(frozen=True)
class Sub:
    var: int
    value: Term

    def __post_init__(self):
        if not isinstance(self.value, Abs):
            raise ValueError("only abstractions can be substituted")

    def lift(self):
        return Sub(self.var + 1, shift(self.value, 1))


DB_LABEL = DB()
LSV_LABEL = LSV()


def top_context(t: Term, statuses=None) -> tuple:
    """Context for ``t`` at top level: every free variable frozen by default."""
    if statuses is None:
        return (FROZEN,) * free_count(t)
    statuses = tuple(statuses)
    if len(statuses) < free_count(t):
        raise ValueError("context does not cover every free variable")
    return statuses


def _status(ctx, k):
    if k >= len(ctx):
        raise IndexError(f"variable {k} is not bound by the context")
    return ctx[k]


# ---------------------------------------------------------------------------
# Structures, normal forms, local normal forms


@lru_cache(maxsize=1 << 18)
def is_structure(t: Term, ctx: tuple, head: Status = FROZEN) -> bool:
    """``t`` is an application spine led by a variable of status ``head``.

    With ``head=OMEGA`` this is the structure judgment over the omega set.
    """
    if isinstance(t, Var):
        return _status(ctx, t.index) is head
    if isinstance(t, App):
        return is_structure(t.fn, ctx, head)
    if isinstance(t, ESub):
        if is_structure(t.body, (PLAIN,) + ctx, head):
            return True
        return is_structure(t.body, (head,) + ctx, head) and is_structure(t.arg, ctx, head)
    return False


@lru_cache(maxsize=1 << 18)
def is_nf(t: Term, ctx: tuple) -> bool:
    if isinstance(t, Var):
        return _status(ctx, t.index) is FROZEN
    if isinstance(t, App):
        return is_nf(t.fn, ctx) and is_structure(t.fn, ctx) and is_nf(t.arg, ctx)
    if isinstance(t, Abs):
        return is_nf(t.body, (FROZEN,) + ctx)
    if (is_nf(t.arg, ctx) and is_structure(t.arg, ctx)
            and is_nf(t.body, (FROZEN,) + ctx)):
        return True
    return is_nf(t.body, (PLAIN,) + ctx)


@lru_cache(maxsize=1 << 18)
def is_lnf(t: Term, ctx: tuple, mode: Mode) -> bool:
    """Local normal form; ``FROZEN`` entries form phi, ``OMEGA`` entries omega."""
    if isinstance(t, Var):
        return _status(ctx, t.index) in (FROZEN, OMEGA)
    if isinstance(t, Abs):
        if mode is TOP:
            return is_lnf(t.body, (FROZEN,) + ctx, TOP)
        return is_lnf(t.body, (OMEGA,) + ctx, BOT)
    if isinstance(t, App):
        if not is_lnf(t.fn, ctx, mode):
            return False
        if is_structure(t.fn, ctx) and is_lnf(t.arg, ctx, TOP):
            return True
        return is_structure(t.fn, ctx, OMEGA)
    if is_lnf(t.body, (PLAIN,) + ctx, mode):
        return True
    if (is_lnf(t.body, (FROZEN,) + ctx, mode) and is_lnf(t.arg, ctx, BOT)
            and is_structure(t.arg, ctx)):
        return True
    return is_lnf(t.body, (OMEGA,) + ctx, mode) and is_structure(t.arg, ctx, OMEGA)


def substitution_gate_context(ctx: tuple, relaxed: bool = False) -> tuple:
    """Context used to check that a value may be substituted.

    Frozen variables stay frozen.  Every other variable is left out of both
    phi and omega, unless ``relaxed`` is set, in which case it joins omega.
    """
    other = OMEGA if relaxed else PLAIN
    return tuple(s if s is FROZEN else other for s in ctx)


# ---------------------------------------------------------------------------
# Reduction


@dataclass(frozen=True)
class Calculus:
    variant: Variant = Variant.SN_PLUS
    relaxed_lnf: bool = False

    def steps(self, t: Term, ctx: tuple, mode: Mode, label) -> tuple:
        """Every derivation of ``t ->(label, ctx, mode) t'``.

        Returns ``(path, rule, t')`` triples where ``path`` locates the node
        at which the base rule fired, without repetitions.
        """
        spelling = shown_hash(t), shown_hash(label.value) if isinstance(label, Sub) else 0
        return _steps(self, t, ctx, mode, label, spelling)

    def derive(self, t: Term, ctx: tuple, mode: Mode, label) -> Iterator[tuple]:
        if isinstance(t, Var):
            if isinstance(label, Id) and label.var == t.index:
                yield (), "id", t
            elif isinstance(label, Sub) and label.var == t.index:
                yield (), "sub", label.value
            return
        if label is DB_LABEL or isinstance(label, DB):
            for r in aux_db(t):
                yield (), "dB", r
        elif isinstance(label, LSV):
            for r in self.aux_lsv(t, ctx, mode):
                yield (), "lsv", r
        if isinstance(t, App):
            for p, rule, f in self.steps(t.fn, ctx, BOT, label):
                yield (0,) + p, rule, App(f, t.arg)
            if self.app_right_allowed(t.fn, ctx):
                for p, rule, a in self.steps(t.arg, ctx, TOP, label):
                    yield (1,) + p, rule, App(t.fn, a)
        elif isinstance(t, Abs):
            inner = label.lift()
            if mode is TOP:
                for p, rule, b in self.steps(t.body, (FROZEN,) + ctx, TOP, inner):
                    yield (0,) + p, rule, Abs(b, t.hint)
            elif self.variant is not Variant.SCBN2017:
                for p, rule, b in self.steps(t.body, (PLAIN,) + ctx, BOT, inner):
                    yield (0,) + p, rule, Abs(b, t.hint)
        elif isinstance(t, ESub):
            inner = label.lift()
            for p, rule, b in self.steps(t.body, (PLAIN,) + ctx, mode, inner):
                yield (0,) + p, rule, ESub(b, t.arg, t.hint)
            if is_structure(t.arg, ctx):
                for p, rule, b in self.steps(t.body, (FROZEN,) + ctx, mode, inner):
                    yield (0,) + p, rule, ESub(b, t.arg, t.hint)
            if self.probe(t.body, (ACTIVE,) + ctx, mode, 0):
                for p, rule, a in self.steps(t.arg, ctx, BOT, label):
                    yield (1,) + p, rule, ESub(t.body, a, t.hint)

    def app_right_allowed(self, fn: Term, ctx: tuple) -> bool:
        if not is_structure(fn, ctx):
            return False
        return self.variant is not Variant.SCBN2017 or is_nf(fn, ctx)

    def probe(self, t: Term, ctx: tuple, mode: Mode, var: int) -> bool:
        """Whether ``t ->(id var, ctx, mode) t`` is derivable."""
        return bool(self.steps(t, ctx, mode, Id(var)))

    def aux_lsv(self, t: Term, ctx: tuple, mode: Mode) -> Iterator[Term]:
        if not isinstance(t, ESub):
            return
        u = t.arg
        if isinstance(u, Abs):
            if self.variant is Variant.SN_PLUS:
                gate = substitution_gate_context(ctx, self.relaxed_lnf)
                if not is_lnf(u, gate, BOT):
                    return
            label = Sub(0, shift(u, 1))
            for _, _, b in self.steps(t.body, (ACTIVE,) + ctx, mode, label):
                yield ESub(b, u, t.hint)
        elif isinstance(u, ESub):
            # t[x\u1[y\w]]: move [y\w] out and look for t[x\u1] under y
            lifted = ESub(shift(t.body, 1, 1), u.body, t.hint)
            for r in self.aux_lsv(lifted, (PLAIN,) + ctx, mode):
                yield ESub(r, u.arg, u.hint)
            if is_structure(u.arg, ctx):
                for r in self.aux_lsv(lifted, (FROZEN,) + ctx, mode):
                    yield ESub(r, u.arg, u.hint)

    # -- public enumerators ------------------------------------------------

    def step_all(self, t: Term, ctx: tuple, mode: Mode, label) -> list:
        """Distinct conclusions of ``t ->(label, ctx, mode) t'``."""
        return _dedupe(r for _, _, r in self.steps(t, ctx, mode, label))

    def top_steps(self, t: Term, ctx: Optional[tuple] = None) -> list:
        """Top-level dB and lsv steps, as ``Step`` records in leftmost order.

        Two steps reaching the same term are merged, keeping the leftmost.
        """
        if ctx is None:
            ctx = top_context(t)
        found = []
        for label, prio in ((DB_LABEL, 0), (LSV_LABEL, 1)):
            for p, rule, r in self.steps(t, ctx, TOP, label):
                found.append(((p, prio), Step(rule, p, r)))
        found.sort(key=lambda item: item[0])
        seen = set()
        out = []
        for _, s in found:
            if s.term not in seen:
                seen.add(s.term)
                out.append(s)
        return out

    def reducts(self, t: Term, ctx: Optional[tuple] = None) -> list:
        return [s.term for s in self.top_steps(t, ctx)]


@lru_cache(maxsize=1 << 19)
def _steps(calc, t, ctx, mode, label, spelling):
    # nested substitutions make the rules revisit the same subterms in the
    # same configuration many times, so every enumeration is remembered;
    # ``spelling`` keeps display names out of the sharing
    return tuple(_dedupe(calc.derive(t, ctx, mode, label)))


def aux_db(t: Term) -> list:
    """``(\\x.b) L u => b[x\\u] L``."""
    if not isinstance(t, App):
        return []
    f, u = t.fn, t.arg
    if isinstance(f, Abs):
        return [ESub(f.body, u, f.hint)]
    if isinstance(f, ESub):
        return [ESub(r, f.arg, f.hint) for r in aux_db(App(f.body, shift(u, 1)))]
    return []


def _dedupe(items) -> list:
    seen = set()
    out = []
    for r in items:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


# ---------------------------------------------------------------------------
# Module level entry points


def _calculus(variant, relaxed_lnf=False):
    if isinstance(variant, str):
        variant = Variant(variant)
    return Calculus(variant, relaxed_lnf)


def sn_step_all(t: Term, ctx: tuple, mode: Mode, variant=Variant.SN, label=LSV_LABEL,
                relaxed_lnf: bool = False) -> list:
    return _calculus(variant, relaxed_lnf).step_all(t, ctx, mode, label)


def aux_db_sn(t: Term) -> list:
    return aux_db(t)


def aux_lsv_sn(t: Term, ctx: tuple, mode: Mode, variant=Variant.SN,
               relaxed_lnf: bool = False) -> list:
    return _dedupe(_calculus(variant, relaxed_lnf).aux_lsv(t, ctx, mode))


def top_reducts(t: Term, variant=Variant.SN_PLUS, ctx=None, relaxed_lnf=False) -> list:
    return _calculus(variant, relaxed_lnf).reducts(t, ctx)


# ---------------------------------------------------------------------------
# Drivers


@dataclass(frozen=True)
class Step:
    rule: str
    path: tuple
    term: Term


@dataclass(frozen=True)
class Leftmost:
    pass


@dataclass(frozen=True)
class ExhaustiveGraph:
    node_cap: int = 10_000


@dataclass(frozen=True)
class RandomSeeded:
    seed: int = 0


@dataclass
class NF:
    term: Term
    trace: list
    # every normal form found; only the graph strategy can find more than one
    normal_forms: list = field(default_factory=list)

    @property
    def steps(self):
        return len(self.trace)


@dataclass
class Timeout:
    term: Term
    trace: list

    @property
    def steps(self):
        return len(self.trace)


def normalize(t: Term, variant=Variant.SN_PLUS, strategy=None, fuel: int = 1500,
              ctx: Optional[tuple] = None, relaxed_lnf: bool = False):
    """Reduce ``t`` at top level until no step applies or ``fuel`` steps were made.

    ``Leftmost`` always takes the first step in (path, dB before lsv)
    order.  ``RandomSeeded`` picks uniformly among the distinct reducts.
    ``ExhaustiveGraph`` explores every reduct breadth first up to depth
    ``fuel``; the returned trace is a shortest path to the first normal
    form met.
    """
    calc = _calculus(variant, relaxed_lnf)
    if ctx is None:
        ctx = top_context(t)
    if strategy is None:
        strategy = Leftmost()
    if isinstance(strategy, ExhaustiveGraph):
        return _normalize_graph(calc, t, ctx, fuel, strategy.node_cap)
    rng = random.Random(strategy.seed) if isinstance(strategy, RandomSeeded) else None
    trace = []
    while True:
        options = calc.top_steps(t, ctx)
        if not options:
            return NF(t, trace, [t])
        if len(trace) == fuel:
            return Timeout(t, trace)
        step = options[0] if rng is None else rng.choice(options)
        trace.append(step)
        t = step.term


def _normalize_graph(calc, t, ctx, fuel, node_cap):
    parent = {t: None}
    frontier = deque([(t, 0)])
    sinks = []
    exhausted = True
    while frontier:
        u, d = frontier.popleft()
        options = calc.top_steps(u, ctx)
        if not options:
            sinks.append(u)
            continue
        if d == fuel:
            exhausted = False
            continue
        for s in options:
            if s.term not in parent:
                if len(parent) >= node_cap:
                    exhausted = False
                    continue
                parent[s.term] = (u, s)
                frontier.append((s.term, d + 1))
    if not sinks or not exhausted:
        return Timeout(sinks[0] if sinks else t, _path_to(parent, sinks[0]) if sinks else [])
    return NF(sinks[0], _path_to(parent, sinks[0]), sinks)


def _path_to(parent, node):
    trace = []
    while parent[node] is not None:
        prev, step = parent[node]
        trace.append(step)
        node = prev
    trace.reverse()
    return trace
