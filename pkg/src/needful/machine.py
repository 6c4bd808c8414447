"""Big-step strong call-by-need abstract machine.

Configurations are ``(store, stack, mode, term)``.  The store is a single
global list indexed by De Bruijn indices counted from its end; the stack is
a global list too, and each call only owns the part above its base mark.
Terms waiting on the stack or in the store are closures: a term together
with the store size at which its indices are valid.  Indices are adjusted
only when the closure is actually used.

Every binding introduced by an explicit substitution carries a status
cache, filled from the rule that produced its value, so a bound term is
evaluated at most once per binding.
"""
from __future__ import annotations

import enum
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .terms import Abs, App, ESub, Term, Var, free_count, free_indices, shift
from .strong import Mode

TOP, BOT = Mode.TOP, Mode.BOT


class Status(enum.Enum):
    UNEVALUATED = "unevaluated"
    EVALUATED_ABS = "abs"
    EVALUATED_STRUCT_PHI = "struct-phi"
    EVALUATED_STRUCT_OMEGA = "struct-omega"


class Kind(enum.Enum):
    """Shape of a machine result: an answer or a structure over phi or omega."""
    ABS = "abs"
    PHI = "phi"
    OMEGA = "omega"


class StructKind(enum.Enum):
    PHI = "phi"
    OMEGA = "omega"
    NOT_STRUCT = "not-struct"


_STATUS_OF_KIND = {
    Kind.ABS: Status.EVALUATED_ABS,
    Kind.PHI: Status.EVALUATED_STRUCT_PHI,
    Kind.OMEGA: Status.EVALUATED_STRUCT_OMEGA,
}
_KIND_OF_STATUS = {v: k for k, v in _STATUS_OF_KIND.items()}


@dataclass(frozen=True)
class Closure:
    term: Term
    env_mark: int

    def shift_pending(self, current_size: int) -> bool:
        return current_size != self.env_mark


def adjust_indices(c: Closure, current_size: int) -> Term:
    """The closure's term with indices valid for a store of ``current_size``."""
    if current_size < c.env_mark:
        raise ValueError("store shrank below the closure's mark")
    return shift(c.term, current_size - c.env_mark)


class LamBinding:
    """Variable bound by an abstraction; ``mode`` TOP means frozen."""

    __slots__ = ("mode",)

    def __init__(self, mode: Mode):
        self.mode = mode

    def __repr__(self):
        return "LamTop" if self.mode is TOP else "LamBot"


LAM_TOP = LamBinding(TOP)
LAM_BOT = LamBinding(BOT)


class BoundTerm:
    """Variable bound by an explicit substitution, with its status cache.

    ``top`` records that the stored value was evaluated in a top-level-like
    position; only the optimized machine sets it.
    """

    __slots__ = ("closure", "status", "top")

    def __init__(self, closure: Closure, status: Status = Status.UNEVALUATED):
        self.closure = closure
        self.status = status
        self.top = False

    def __repr__(self):
        return f"BoundTerm({self.closure.term!r}, {self.status.name})"


class MachineTimeout(Exception):
    pass


class StoreInvariantError(AssertionError):
    pass


@dataclass
class Result:
    term: Term
    stats: Counter
    diagnostics: Counter = field(default_factory=Counter)

    @property
    def steps(self):
        return sum(self.stats.values())


@dataclass
class Timeout:
    stats: Counter
    diagnostics: Counter = field(default_factory=Counter)

    @property
    def steps(self):
        return sum(self.stats.values())


OPT_CAVEAT = ("optimized rules: a bound value in a top-level-like position is "
              "evaluated there directly and shared; the reductions performed no "
              "longer enjoy the diamond property")


class Machine:
    def __init__(self, fuel: int = 1500, optimize: bool = False):
        self.fuel = fuel
        self.optimize = optimize
        self.store: list = []
        self.stack: list = []
        self.stats: Counter = Counter()
        self.diagnostics: Counter = Counter()

    def tick(self, rule: str):
        self.stats[rule] += 1
        if sum(self.stats.values()) > self.fuel:
            raise MachineTimeout()

    # -- entry point -------------------------------------------------------

    def run(self, t: Term):
        n = free_count(t)
        self.store = [LAM_TOP] * n
        self.stack = []
        try:
            r, _ = self.eval(t, 0, TOP)
        except MachineTimeout:
            return Timeout(self.stats, self.diagnostics)
        if len(self.store) != n or self.stack:
            raise StoreInvariantError("store or stack not balanced at exit")
        return Result(r, self.stats, self.diagnostics)

    # -- evaluation --------------------------------------------------------

    def eval(self, t: Term, base: int, mode: Mode):
        """Evaluate ``t`` against the stack segment above ``base``.

        Returns the result term, valid for the store size at entry, and its
        kind.  The stack segment is consumed entirely.
        """
        size = len(self.store)
        if isinstance(t, Abs):
            if len(self.stack) > base:
                self.tick("abs-cons")
                return self.eval_es(t.body, self.stack.pop(), t.hint, base, mode)
            self.tick("abs-nil")
            self.store.append(LAM_TOP if mode is TOP else LAM_BOT)
            body, _ = self.eval(t.body, len(self.stack), mode)
            self.pop_binding(size)
            return Abs(body, t.hint), Kind.ABS
        if isinstance(t, App):
            self.tick("app")
            self.stack.append(Closure(t.arg, size))
            return self.eval(t.fn, base, mode)
        if isinstance(t, ESub):
            return self.eval_es(t.body, Closure(t.arg, size), t.hint, base, mode)
        return self.eval_var(t, base, mode)

    def eval_es(self, body: Term, arg: Closure, hint, base: int, mode: Mode):
        self.tick("es")
        size = len(self.store)
        binding = BoundTerm(arg)
        self.store.append(binding)
        r, kind = self.eval(body, base, mode)
        self.pop_binding(size)
        return ESub(r, self.content_at(binding, size), hint), kind

    def pop_binding(self, size: int):
        self.store.pop()
        if len(self.store) != size:
            raise StoreInvariantError("store not balanced")

    def content_at(self, binding: BoundTerm, size: int) -> Term:
        return adjust_indices(binding.closure, size)

    def eval_var(self, t: Var, base: int, mode: Mode):
        size = len(self.store)
        pos = size - 1 - t.index
        binding = self.store[pos]
        if isinstance(binding, LamBinding):
            if binding.mode is TOP:
                self.tick("var-λ-Frozen")
                return self.s_phi(t, base)
            self.tick("var-λ-NonFrozen")
            return self.s_omega(t, base)
        if self.optimize and len(self.stack) == base and mode is TOP:
            return self.eval_var_shared(t, binding, pos)
        kind = self.force(binding, pos, BOT)
        if kind is Kind.ABS:
            self.tick("var-abs")
            value = adjust_indices(binding.closure, size)
            return self.eval(value, base, mode)
        self.tick("var-S")
        self.check_struct(binding, pos, kind)
        if kind is Kind.PHI:
            return self.s_phi(t, base)
        return self.s_omega(t, base)

    def force(self, binding: BoundTerm, pos: int, mode: Mode) -> Kind:
        """Evaluate a bound term with an empty stack unless already done."""
        if binding.status is not Status.UNEVALUATED and (mode is BOT or binding.top):
            return _KIND_OF_STATUS[binding.status]
        size = len(self.store)
        value = adjust_indices(binding.closure, size)
        r, kind = self.eval(value, len(self.stack), mode)
        gap = size - pos
        if any(i < gap for i in free_indices(r)):
            raise StoreInvariantError("evaluated value refers to later bindings")
        binding.closure = Closure(shift(r, -gap), pos)
        binding.status = _STATUS_OF_KIND[kind]
        binding.top = binding.top or mode is TOP
        return kind

    def eval_var_shared(self, t: Var, binding: BoundTerm, pos: int):
        # evaluate the bound value in place and keep the variable
        kind = self.force(binding, pos, TOP)
        if kind is Kind.ABS:
            self.tick("var-abs")
            return t, Kind.ABS
        self.tick("var-S")
        self.check_struct(binding, pos, kind)
        if kind is Kind.PHI:
            return self.s_phi(t, len(self.stack))
        return self.s_omega(t, len(self.stack))

    def check_struct(self, binding: BoundTerm, pos: int, kind: Kind):
        seen = machine_struct(self.store[:pos], binding.closure.term)
        expected = StructKind.PHI if kind is Kind.PHI else StructKind.OMEGA
        if seen is not expected:
            self.diagnostics["struct_flip"] += 1

    def take_args(self, base: int) -> list:
        args = self.stack[base:]
        del self.stack[base:]
        args.reverse()
        return args

    def s_phi(self, head: Term, base: int):
        self.tick("s-phi")
        size = len(self.store)
        r = head
        for c in self.take_args(base):
            a, _ = self.eval(adjust_indices(c, size), len(self.stack), TOP)
            r = App(r, a)
        return r, Kind.PHI

    def s_omega(self, head: Term, base: int):
        self.tick("s-omega")
        size = len(self.store)
        r = head
        for c in self.take_args(base):
            r = App(r, adjust_indices(c, size))
        return r, Kind.OMEGA


def machine_struct(env: list, t: Term) -> StructKind:
    """Structure judgment seen by the machine, for ``t`` valid over ``env``."""
    env = list(env)
    while True:
        if isinstance(t, App):
            t = t.fn
        elif isinstance(t, ESub):
            env.append(BoundTerm(Closure(t.arg, len(env))))
            t = t.body
        elif isinstance(t, Var):
            pos = len(env) - 1 - t.index
            b = env[pos]
            if isinstance(b, LamBinding):
                return StructKind.PHI if b.mode is TOP else StructKind.OMEGA
            del env[pos:]
            t = adjust_indices(b.closure, pos)
        else:
            return StructKind.NOT_STRUCT


def run(t: Term, fuel: int = 1500, optimize: bool = False):
    """Run the machine on ``t``; every free variable starts frozen."""
    return Machine(fuel, optimize).run(t)


def ensure_deep_recursion(limit: int = 200_000):
    if sys.getrecursionlimit() < limit:
        sys.setrecursionlimit(limit)
