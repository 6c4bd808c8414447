"""Plain beta reduction on pure terms: the reference every other result is judged by.

Deliberately naive: no sharing, no memoization.
"""
from __future__ import annotations

from dataclasses import dataclass

from .terms import Abs, App, ESub, Term, Var, instantiate, is_pure


class ImpureTermError(ValueError):
    """Raised when a term with explicit substitutions reaches the oracle."""


@dataclass(frozen=True)
class NormalForm:
    term: Term
    steps: int


@dataclass(frozen=True)
class Timeout:
    term: Term
    steps: int


def _check_pure(t):
    if not is_pure(t):
        raise ImpureTermError("beta oracle only accepts pure terms")


def _reducts(t):
    # pre-order: the redex at the root first, then left subtree, then right
    if isinstance(t, Var):
        return
    if isinstance(t, Abs):
        for b in _reducts(t.body):
            yield Abs(b, t.hint)
        return
    if isinstance(t, ESub):
        raise ImpureTermError("beta oracle only accepts pure terms")
    if isinstance(t.fn, Abs):
        yield instantiate(t.fn.body, t.arg)
    for f in _reducts(t.fn):
        yield App(f, t.arg)
    for a in _reducts(t.arg):
        yield App(t.fn, a)


def beta_step_all(t: Term) -> list:
    """All one-step beta reducts, leftmost-outermost first, without duplicates."""
    _check_pure(t)
    seen = set()
    out = []
    for r in _reducts(t):
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out


def is_beta_nf(t: Term) -> bool:
    _check_pure(t)
    return _nf(t)


def _nf(t):
    if isinstance(t, Var):
        return True
    if isinstance(t, Abs):
        return _nf(t.body)
    return not isinstance(t.fn, Abs) and _nf(t.fn) and _nf(t.arg)


def _leftmost_step(t):
    """Contract the leftmost-outermost redex; None when ``t`` is normal."""
    if isinstance(t, Var):
        return None
    if isinstance(t, Abs):
        b = _leftmost_step(t.body)
        return None if b is None else Abs(b, t.hint)
    if isinstance(t.fn, Abs):
        return instantiate(t.fn.body, t.arg)
    f = _leftmost_step(t.fn)
    if f is not None:
        return App(f, t.arg)
    a = _leftmost_step(t.arg)
    return None if a is None else App(t.fn, a)


def normalize_normal_order(t: Term, fuel: int = 1500):
    """Normal-order normalization; ``fuel`` bounds the number of contractions."""
    _check_pure(t)
    steps = 0
    while True:
        nxt = _leftmost_step(t)
        if nxt is None:
            return NormalForm(t, steps)
        if steps == fuel:
            return Timeout(t, steps)
        t = nxt
        steps += 1


def beta_reachable(src: Term, dst: Term, max_depth: int, node_cap: int = 10_000) -> bool:
    """Breadth-first search for ``src ->beta* dst`` within ``max_depth`` steps."""
    frontier = {src}
    seen = {src}
    for _ in range(max_depth + 1):
        if dst in frontier:
            return True
        nxt = set()
        for t in frontier:
            for r in beta_step_all(t):
                if r not in seen:
                    seen.add(r)
                    nxt.add(r)
        if len(seen) > node_cap:
            return False
        frontier = nxt
    return False
