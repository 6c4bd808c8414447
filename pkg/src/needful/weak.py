"""Weak call-by-need reduction, in two independent presentations.

``wn_step_ctx`` decomposes a term as ``E[r]`` with ``E`` drawn from the
grammar ``E ::= * | E u | E[x\\u] | E<<x>>[x\\E]`` and contracts ``r``.
``wn_step_ind`` follows the inductive rules (app-left, es-left, es-right,
id, sub, dB, lsv) and their auxiliary relations.  Both must agree.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from .terms import Abs, App, ESub, Term, Var, binders_on_path, replace_at, shift, subterm
from .strong import DB, DB_LABEL, LSV, LSV_LABEL, Id, Sub, aux_db


# ---------------------------------------------------------------------------
# Evaluation contexts


@dataclass(frozen=True)
class AppLeft:
    arg: Term


@dataclass(frozen=True)
class ESLeft:
    hint: object
    arg: Term


@dataclass(frozen=True)
class ESRightAt:
    """Frame ``t<<x>>[x\\*]``; ``occurrence`` is the path of ``x`` inside ``t``."""
    body: Term
    hint: object
    occurrence: tuple


def _holes(t: Term) -> Iterator[tuple]:
    """Paths of the holes of all evaluation contexts of ``t``, with frames."""
    yield (), ()
    if isinstance(t, App):
        for p, frames in _holes(t.fn):
            yield (0,) + p, (AppLeft(t.arg),) + frames
    elif isinstance(t, ESub):
        for p, frames in _holes(t.body):
            yield (0,) + p, (ESLeft(t.hint, t.arg),) + frames
        for q in _bound_occurrences(t.body):
            for p, frames in _holes(t.arg):
                yield (1,) + p, (ESRightAt(t.body, t.hint, q),) + frames


def _bound_occurrences(body: Term) -> list:
    """Hole paths of ``body`` filled by the variable bound just outside it."""
    out = []
    for q, _ in _holes(body):
        r = subterm(body, q)
        if isinstance(r, Var) and r.index == binders_on_path(body, q):
            out.append(q)
    return out


def _strip(u: Term):
    """Split an answer-like term ``v L`` into ``v`` and the list ``L``."""
    layers = []
    while isinstance(u, ESub):
        layers.append((u.hint, u.arg))
        u = u.body
    return u, layers


def _wrap(t: Term, layers) -> Term:
    for hint, arg in reversed(layers):
        t = ESub(t, arg, hint)
    return t


def wn_decompose(t: Term) -> list:
    """Every ``(path, frames, redex, rule, occurrence)`` with ``t = E[redex]``.

    ``occurrence`` is the path of the substituted variable inside the body
    of an lsv redex, ``None`` for dB.
    """
    out = []
    for p, frames in _holes(t):
        r = subterm(t, p)
        if isinstance(r, App) and isinstance(_strip(r.fn)[0], Abs):
            out.append((p, frames, r, "dB", None))
        if isinstance(r, ESub) and isinstance(_strip(r.arg)[0], Abs):
            for q in _bound_occurrences(r.body):
                out.append((p, frames, r, "lsv", q))
    return out


def contract(redex: Term, rule: str, occurrence=None) -> Term:
    """Apply a base rule at the root of ``redex``."""
    if rule == "dB":
        lam, layers = _strip(redex.fn)
        return _wrap(ESub(lam.body, shift(redex.arg, len(layers)), lam.hint), layers)
    v, layers = _strip(redex.arg)
    n = len(layers)
    body = shift(redex.body, n, 1)
    k = binders_on_path(body, occurrence)
    body = replace_at(body, occurrence, shift(v, k + 1))
    return _wrap(ESub(body, v, redex.hint), layers)


def wn_step_ctx(t: Term, rule=None) -> list:
    """Reducts of ``t`` by contracting a redex in an evaluation context."""
    out = []
    for p, _, r, name, q in wn_decompose(t):
        if rule is None or rule == name:
            out.append(replace_at(t, p, contract(r, name, q)))
    return _dedupe(out)


def eval_occurrences(t: Term, var: int) -> list:
    """Paths ``p`` with ``t = E[x]`` where ``x`` is free variable ``var``."""
    out = []
    for p, _ in _holes(t):
        r = subterm(t, p)
        if isinstance(r, Var) and r.index == var + binders_on_path(t, p):
            out.append(p)
    return out


# ---------------------------------------------------------------------------
# Inductive presentation


def wn_steps(t: Term, label) -> Iterator[Term]:
    if isinstance(t, Var):
        if isinstance(label, Id) and label.var == t.index:
            yield t
        elif isinstance(label, Sub) and label.var == t.index:
            yield label.value
        return
    if isinstance(label, DB):
        yield from aux_db(t)
    elif isinstance(label, LSV):
        yield from aux_lsv(t)
    if isinstance(t, App):
        for f in wn_steps(t.fn, label):
            yield App(f, t.arg)
    elif isinstance(t, ESub):
        for b in wn_steps(t.body, label.lift()):
            yield ESub(b, t.arg, t.hint)
        if any(True for _ in wn_steps(t.body, Id(0))):
            for a in wn_steps(t.arg, label):
                yield ESub(t.body, a, t.hint)


def aux_lsv(t: Term) -> Iterator[Term]:
    if not isinstance(t, ESub):
        return
    u = t.arg
    if isinstance(u, Abs):
        for b in wn_steps(t.body, Sub(0, shift(u, 1))):
            yield ESub(b, u, t.hint)
    elif isinstance(u, ESub):
        for r in aux_lsv(ESub(shift(t.body, 1, 1), u.body, t.hint)):
            yield ESub(r, u.arg, u.hint)


def wn_step_ind(t: Term, label) -> list:
    return _dedupe(wn_steps(t, label))


def aux_db_wn(t: Term) -> list:
    return aux_db(t)


def aux_lsv_wn(t: Term) -> list:
    return _dedupe(aux_lsv(t))


def wn_reducts(t: Term) -> list:
    return _dedupe(list(wn_steps(t, DB_LABEL)) + list(wn_steps(t, LSV_LABEL)))


def _dedupe(items) -> list:
    seen = set()
    out = []
    for r in items:
        if r not in seen:
            seen.add(r)
            out.append(r)
    return out
