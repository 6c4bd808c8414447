"""Exhaustive enumeration of small terms and the executable metatheory checks.

Every check walks a corpus in a fixed order and yields ``Record`` objects,
one per term (or per notable pair), whose verdict is ``pass``, ``fail`` or
``skip``.
"""
from __future__ import annotations

import itertools
import json
import multiprocessing
import sys
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

from . import beta
from .machine import Result as MachineResult
from .machine import run as machine_run
from .strong import (BOT, DB_LABEL, FROZEN, LSV_LABEL, PLAIN, TOP, Calculus, Id, Sub,
                     Variant, is_lnf, is_nf, is_structure)
from .terms import (Abs, App, ESub, FreeVarTable, Term, Var, alpha_eq, count_occurrences,
                    free_count, is_pure, replace_at, to_text, unfold)
from . import weak

FREE_NAMES = "abcdefghijklmnopqrstuvw"


# ---------------------------------------------------------------------------
# Enumeration


@dataclass(frozen=True)
class CorpusSpec:
    max_size: Optional[int] = None
    max_depth: Optional[int] = None
    free_var_count: int = 0
    allow_es: bool = False
    cap_fuel: int = 1500

    def __post_init__(self):
        if (self.max_size is None) == (self.max_depth is None):
            raise ValueError("give exactly one of max_size and max_depth")
        bound = self.max_size if self.max_size is not None else self.max_depth
        if bound < 1:
            raise ValueError("bounds must be at least 1")

    def table(self) -> FreeVarTable:
        return FreeVarTable(FREE_NAMES[: self.free_var_count])


def _name_free(t: Term, n: int, depth: int = 0) -> Term:
    # give free variables their display names from the fixed table
    if isinstance(t, Var):
        k = t.index - depth
        return Var(t.index, FREE_NAMES[k]) if 0 <= k < n else t
    if isinstance(t, Abs):
        return Abs(_name_free(t.body, n, depth + 1), t.hint)
    if isinstance(t, App):
        return App(_name_free(t.fn, n, depth), _name_free(t.arg, n, depth))
    return ESub(_name_free(t.body, n, depth + 1), _name_free(t.arg, n, depth), t.hint)


@lru_cache(maxsize=None)
def _by_size(size: int, scope: int, es: bool) -> tuple:
    """All terms of exactly ``size`` nodes over ``scope`` variables."""
    if size == 1:
        return tuple(Var(i) for i in range(scope))
    out = [Abs(b) for b in _by_size(size - 1, scope + 1, es)]
    for k in range(1, size - 1):
        for f in _by_size(k, scope, es):
            for a in _by_size(size - 1 - k, scope, es):
                out.append(App(f, a))
    if es:
        for k in range(1, size - 1):
            for b in _by_size(k, scope + 1, es):
                for a in _by_size(size - 1 - k, scope, es):
                    out.append(ESub(b, a))
    return tuple(out)


@lru_cache(maxsize=None)
def _by_depth(depth: int, scope: int, es: bool) -> tuple:
    """All terms of depth at most ``depth`` over ``scope`` variables."""
    if depth < 1:
        return ()
    out = [Var(i) for i in range(scope)]
    if depth == 1:
        return tuple(out)
    out += [Abs(b) for b in _by_depth(depth - 1, scope + 1, es)]
    sub = _by_depth(depth - 1, scope, es)
    out += [App(f, a) for f in sub for a in sub]
    if es:
        out += [ESub(b, a) for b in _by_depth(depth - 1, scope + 1, es) for a in sub]
    return tuple(out)


def enumerate_terms(spec: CorpusSpec) -> Iterator[Term]:
    """Every term within the bounds, once each, smaller terms first."""
    n = spec.free_var_count
    if spec.max_size is not None:
        for s in range(1, spec.max_size + 1):
            for t in _by_size(s, n, spec.allow_es):
                yield _name_free(t, n)
    else:
        for d in range(1, spec.max_depth + 1):
            for t in _by_depth(d, n, spec.allow_es):
                if _depth(t) == d:
                    yield _name_free(t, n)


def _depth(t):
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        return 1 + _depth(t.body)
    if isinstance(t, App):
        return 1 + max(_depth(t.fn), _depth(t.arg))
    return 1 + max(_depth(t.body), _depth(t.arg))


def count_terms(spec: CorpusSpec) -> int:
    """Number of terms ``enumerate_terms`` yields, computed by recurrence."""
    n, es = spec.free_var_count, spec.allow_es
    if spec.max_size is not None:
        return sum(_count_size(s, n, es) for s in range(1, spec.max_size + 1))
    return _count_depth(spec.max_depth, n, es)


@lru_cache(maxsize=None)
def _count_size(size, scope, es):
    if size == 1:
        return scope
    total = _count_size(size - 1, scope + 1, es)
    for k in range(1, size - 1):
        total += _count_size(k, scope, es) * _count_size(size - 1 - k, scope, es)
        if es:
            total += _count_size(k, scope + 1, es) * _count_size(size - 1 - k, scope, es)
    return total


@lru_cache(maxsize=None)
def _count_depth(depth, scope, es):
    if depth < 1:
        return 0
    if depth == 1:
        return scope
    sub = _count_depth(depth - 1, scope, es)
    total = scope + _count_depth(depth - 1, scope + 1, es) + sub * sub
    if es:
        total += _count_depth(depth - 1, scope + 1, es) * sub
    return total


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Record:
    check: str
    term: Optional[str]
    verdict: str
    witness: Optional[object] = None

    def to_json(self) -> str:
        d = {"check": self.check, "term": self.term, "verdict": self.verdict}
        if self.witness is not None:
            d["witness"] = self.witness
        return json.dumps(d, ensure_ascii=False)


@dataclass
class Report:
    check: str
    records: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return [r for r in self.records if r.verdict == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def count(self, verdict: str) -> int:
        return sum(1 for r in self.records if r.verdict == verdict)

    def summary(self) -> str:
        return (f"{self.check}: {len(self.records)} records, {self.count('pass')} pass, "
                f"{self.count('fail')} fail, {self.count('skip')} skip")


def _report(check: str, records) -> Report:
    return Report(check, list(records))


def _show(t):
    return to_text(t)


# ---------------------------------------------------------------------------
# Reduction graphs


class ReductionGraph:
    """Top-level reduction graph of a term, explored breadth first."""

    def __init__(self, root: Term, variant=Variant.SN_PLUS, node_cap: int = 10_000,
                 ctx=None, relaxed_lnf: bool = False):
        self.root = root
        self.variant = variant
        self.node_cap = node_cap
        self.truncated = False
        self.edges: dict = {}
        calc = Calculus(variant, relaxed_lnf)
        if ctx is None:
            ctx = (FROZEN,) * free_count(root)
        self.ctx = ctx
        queue = deque([root])
        self.edges[root] = None
        while queue:
            t = queue.popleft()
            steps = calc.top_steps(t, ctx)
            self.edges[t] = [(s.rule, s.path, s.term) for s in steps]
            for s in steps:
                if s.term not in self.edges:
                    if len(self.edges) >= node_cap:
                        self.truncated = True
                        continue
                    self.edges[s.term] = None
                    queue.append(s.term)
        if self.truncated:
            # nodes discovered but never expanded carry no edge list
            self.edges = {k: v for k, v in self.edges.items() if v is not None}

    @property
    def nodes(self):
        return list(self.edges)

    def successors(self, t):
        return [dst for _, _, dst in self.edges.get(t) or ()]

    def sinks(self) -> list:
        return [t for t, es in self.edges.items() if not es]

    def topological_order(self) -> Optional[list]:
        """Nodes with every edge going forward, or ``None`` if there is a cycle."""
        indeg = {t: 0 for t in self.edges}
        for t in self.edges:
            for u in self.successors(t):
                if u in indeg:
                    indeg[u] += 1
        order = []
        queue = deque(t for t, d in indeg.items() if d == 0)
        while queue:
            t = queue.popleft()
            order.append(t)
            for u in self.successors(t):
                if u in indeg:
                    indeg[u] -= 1
                    if indeg[u] == 0:
                        queue.append(u)
        return order if len(order) == len(indeg) else None

    def is_acyclic(self) -> bool:
        return self.topological_order() is not None

    def distances(self) -> dict:
        """Shortest number of steps from the root to every node."""
        dist = {self.root: 0}
        queue = deque([self.root])
        while queue:
            t = queue.popleft()
            for u in self.successors(t):
                if u not in dist:
                    dist[u] = dist[t] + 1
                    queue.append(u)
        return dist

    def longest_from_root(self) -> dict:
        order = self.topological_order()
        if order is None:
            raise ValueError("graph has a cycle")
        longest = {self.root: 0}
        for t in order:
            if t not in longest:
                continue
            for u in self.successors(t):
                longest[u] = max(longest.get(u, -1), longest[t] + 1)
        return longest

    def maximal_path_lengths(self) -> tuple:
        """(shortest, longest) length of a path from the root to a sink."""
        order = self.topological_order()
        if order is None:
            raise ValueError("graph has a cycle")
        lo, hi = {}, {}
        for t in reversed(order):
            succ = self.successors(t)
            if not succ:
                lo[t] = hi[t] = 0
            else:
                lo[t] = 1 + min(lo[u] for u in succ)
                hi[t] = 1 + max(hi[u] for u in succ)
        return lo[self.root], hi[self.root]

    def has_path(self, terms) -> bool:
        """Whether consecutive ``terms`` are joined by edges of the graph."""
        return all(b in self.successors(a) for a, b in zip(terms, terms[1:]))


# ---------------------------------------------------------------------------
# Thm: the two presentations of weak call-by-need coincide

IDENTITY = Abs(Var(0, "q"), "q")


def equivalence_problems(t: Term, ind=None) -> list:
    """Differences between context-based and inductive weak reduction of ``t``."""
    if ind is None:
        ind = weak.wn_step_ind
    problems = []
    for rule, label in (("dB", DB_LABEL), ("lsv", LSV_LABEL)):
        a = set(weak.wn_step_ctx(t, rule))
        b = set(ind(t, label))
        if a != b:
            problems.append({"rule": rule, "contexts": sorted(map(_show, a)),
                             "inductive": sorted(map(_show, b))})
    for k in range(free_count(t) + 1):
        occ = weak.eval_occurrences(t, k)
        found = ind(t, Id(k))
        if bool(found) != bool(occ):
            problems.append({"rule": "id", "var": k, "occurrences": len(occ)})
        if any(r != t for r in found):
            problems.append({"rule": "id", "var": k, "changed": True})
        subs = set(ind(t, Sub(k, IDENTITY)))
        expected = {replace_at(t, p, IDENTITY) for p in occ}
        if subs != expected:
            problems.append({"rule": "sub", "var": k})
        before = count_occurrences(t, k)
        if any(count_occurrences(r, k) != before - 1 for r in subs):
            problems.append({"rule": "sub", "var": k, "count": True})
    # the auxiliary relations fire exactly on their redex shapes
    db_shape = isinstance(t, App) and isinstance(weak._strip(t.fn)[0], Abs)
    if bool(weak.aux_db_wn(t)) != db_shape:
        problems.append({"rule": "aux-dB"})
    lsv_shape = (isinstance(t, ESub) and isinstance(weak._strip(t.arg)[0], Abs)
                 and bool(weak._bound_occurrences(t.body)))
    if bool(weak.aux_lsv_wn(t)) != lsv_shape:
        problems.append({"rule": "aux-lsv"})
    return problems


def _reduce_under_abs(t, label):
    # deliberately wrong weak relation: also reduces under a leading abstraction
    yield from weak.wn_steps(t, label)
    if isinstance(t, Abs):
        for b in _reduce_under_abs(t.body, label.lift()):
            yield Abs(b, t.hint)


def mutated_wn_step_ind(t, label):
    return weak._dedupe(_reduce_under_abs(t, label))


def check_equivalence_weak(spec: CorpusSpec, mutated: bool = False) -> Report:
    ind = mutated_wn_step_ind if mutated else None
    name = "equivalence"

    def records():
        for t in enumerate_terms(spec):
            problems = equivalence_problems(t, ind)
            yield Record(name, _show(t), "fail" if problems else "pass",
                         problems or None)
    return _report(name, records())


# ---------------------------------------------------------------------------
# Diamond


def diamond_failures(t: Term, variant=Variant.SN_PLUS, relaxed_lnf=False) -> list:
    calc = Calculus(variant, relaxed_lnf)
    reducts = calc.reducts(t)
    nexts = {r: set(calc.reducts(r)) for r in reducts}
    bad = []
    for t1, t2 in itertools.combinations(reducts, 2):
        if not nexts[t1] & nexts[t2]:
            bad.append([_show(t1), _show(t2)])
    return bad


def check_diamond(spec: CorpusSpec, variant=Variant.SN_PLUS, terms=None,
                  relaxed_lnf=False) -> Report:
    name = "diamond"

    def records():
        for t in (terms if terms is not None else enumerate_terms(spec)):
            bad = diamond_failures(t, variant, relaxed_lnf)
            yield Record(name, _show(t), "fail" if bad else "pass", bad or None)
    return _report(name, records())


# ---------------------------------------------------------------------------
# Minimality and random descent


def minimality_problems(t: Term, node_cap: int = 10_000):
    """Problems found for ``t``, or ``None`` when a graph was truncated."""
    plus = ReductionGraph(t, Variant.SN_PLUS, node_cap)
    plain = ReductionGraph(t, Variant.SN, node_cap)
    if plus.truncated or plain.truncated:
        return None
    problems = []
    if not plus.is_acyclic() or not plain.is_acyclic():
        problems.append({"cycle": True})
        return problems
    lo, hi = plus.maximal_path_lengths()
    if lo != hi:
        problems.append({"unequal_maximal_paths": [lo, hi]})
    longest_plus = plus.longest_from_root()
    shortest = plain.distances()
    for nf in plus.sinks():
        if nf not in shortest:
            problems.append({"normal_form": _show(nf), "missing_in_sn": True})
        elif longest_plus[nf] > shortest[nf]:
            problems.append({"normal_form": _show(nf), "sn_plus": longest_plus[nf],
                             "sn": shortest[nf]})
    return problems


def check_minimality(spec: CorpusSpec, node_cap: int = 10_000, terms=None) -> Report:
    name = "minimality"

    def records():
        for t in (terms if terms is not None else enumerate_terms(spec)):
            problems = minimality_problems(t, node_cap)
            if problems is None:
                yield Record(name, _show(t), "skip", {"truncated": True})
            else:
                yield Record(name, _show(t), "fail" if problems else "pass",
                             problems or None)
    return _report(name, records())


# ---------------------------------------------------------------------------
# Soundness and termination


def soundness_problems(t: Term, fuel: int = 1500, node_cap: int = 10_000,
                       variant=Variant.SN, divergent_cap: int = 200):
    """``(verdict, witness)`` for one term, judged against the beta oracle.

    When the oracle finds no normal form the graph is only explored up to
    ``divergent_cap`` nodes: there is nothing to compare a sink with, and
    graphs of divergent terms grow expensive quickly.
    """
    oracle = beta.normalize_normal_order(unfold(t), fuel)
    if isinstance(oracle, beta.Timeout):
        graph = ReductionGraph(t, variant, divergent_cap)
        bad = [_show(s) for s in graph.sinks() if not is_nf(s, graph.ctx)]
        witness = {"oracle": "timeout", "sinks": len(graph.sinks()),
                   "truncated": graph.truncated}
        if bad:
            witness["sink_not_normal"] = bad
            return "fail", witness
        return "skip", witness
    graph = ReductionGraph(t, variant, node_cap)
    problems = []
    if graph.truncated:
        problems.append({"truncated": True})
    elif not graph.is_acyclic():
        problems.append({"cycle": True})
    ctx = graph.ctx
    for s in graph.sinks():
        if not is_nf(s, ctx):
            problems.append({"sink_not_normal": _show(s)})
        if not alpha_eq(unfold(s), oracle.term):
            problems.append({"sink": _show(s), "unfolds_to": _show(unfold(s)),
                             "oracle": _show(oracle.term)})
    if not graph.sinks():
        problems.append({"no_sink": True})
    return ("fail" if problems else "pass"), (problems or None)


def check_soundness_termination(spec: CorpusSpec, node_cap: int = 10_000, terms=None,
                                variant=Variant.SN) -> Report:
    name = "soundness"

    def records():
        for t in (terms if terms is not None else enumerate_terms(spec)):
            verdict, witness = soundness_problems(t, spec.cap_fuel, node_cap, variant)
            yield Record(name, _show(t), verdict, witness)
    return _report(name, records())


# ---------------------------------------------------------------------------
# Machine against the oracle


def machine_verdict(t: Term, fuel: int = 1500, optimize: bool = False):
    oracle = beta.normalize_normal_order(unfold(t), fuel)
    result = machine_run(t, fuel, optimize)
    machine_done = isinstance(result, MachineResult)
    oracle_done = isinstance(oracle, beta.NormalForm)
    if machine_done and oracle_done:
        got = unfold(result.term)
        if alpha_eq(got, oracle.term):
            return "pass", None
        return "fail", {"machine": _show(got), "oracle": _show(oracle.term)}
    if machine_done != oracle_done:
        return "fail", {"machine": "done" if machine_done else "timeout",
                        "oracle": "done" if oracle_done else "timeout"}
    return "pass", {"both": "timeout"}


def check_machine(spec: CorpusSpec, optimize: bool = False, terms=None) -> Report:
    name = "machine"

    def records():
        for t in (terms if terms is not None else enumerate_terms(spec)):
            verdict, witness = machine_verdict(t, spec.cap_fuel, optimize)
            yield Record(name, _show(t), verdict, witness)
    return _report(name, records())


# ---------------------------------------------------------------------------
# Judgment cross-checks


def _contexts(n: int):
    """Every frozen/plain assignment to ``n`` free variables."""
    return [tuple(c) for c in itertools.product((FROZEN, PLAIN), repeat=n)]


def _labels(t: Term, ctx: tuple, include_frozen_sub: bool = False):
    labels = [DB_LABEL, LSV_LABEL]
    for k in range(len(ctx)):
        labels.append(Id(k))
        if include_frozen_sub or ctx[k] is not FROZEN:
            labels.append(Sub(k, IDENTITY))
    return labels


def lemma_problems(t: Term, n_free: int) -> list:
    problems = []
    for variant in (Variant.SN, Variant.SN_PLUS):
        calc = Calculus(variant)
        for ctx in _contexts(n_free):
            names = "".join("F" if s is FROZEN else "." for s in ctx)
            nf = is_nf(t, ctx)

            def red(mode, labels=None):
                labels = labels if labels is not None else _labels(t, ctx)
                return any(calc.step_all(t, ctx, mode, lab) for lab in labels
                           if not (isinstance(lab, Id) and ctx[lab.var] is FROZEN))

            top, bot = red(TOP), red(BOT)
            # normal forms are exactly the irreducible terms
            if nf == top or (nf and bot) or (bot and not top):
                problems.append({"lemma": "nf-xor-reducible", "variant": variant.value,
                                 "ctx": names, "nf": nf, "top": top, "bot": bot})
            if nf != is_lnf(t, ctx, TOP):
                problems.append({"lemma": "nf-iff-lnf", "ctx": names})
            if nf and not beta.is_beta_nf(unfold(t)):
                problems.append({"lemma": "unfolded-nf", "ctx": names})
            for mode in (TOP, BOT):
                if is_structure(t, ctx):
                    for lab in _labels(t, ctx):
                        if isinstance(lab, Sub) and ctx[lab.var] is FROZEN:
                            continue
                        for r in calc.step_all(t, ctx, mode, lab):
                            if not is_structure(r, ctx):
                                problems.append({"lemma": "structure-stability",
                                                 "variant": variant.value, "ctx": names,
                                                 "label": repr(lab), "reduct": _show(r)})
                for bigger in _contexts(n_free):
                    if not all(b is FROZEN or a is not FROZEN for a, b in zip(ctx, bigger)):
                        continue
                    if bigger == ctx:
                        continue
                    for lab in _labels(t, ctx):
                        if isinstance(lab, Sub) and bigger[lab.var] is FROZEN:
                            continue
                        if variant is Variant.SN and not isinstance(lab, Id):
                            continue
                        small = set(calc.step_all(t, ctx, mode, lab))
                        large = set(calc.step_all(t, bigger, mode, lab))
                        if not small <= large:
                            problems.append({"lemma": "weakening", "variant": variant.value,
                                             "ctx": names, "label": repr(lab)})
                for k in range(n_free):
                    if ctx[k] is FROZEN:
                        continue
                    frozen_k = ctx[:k] + (FROZEN,) + ctx[k + 1:]
                    if calc.probe(t, frozen_k, mode, k) and not calc.probe(t, ctx, mode, k):
                        problems.append({"lemma": "strengthening", "variant": variant.value,
                                         "ctx": names, "var": k})
    return problems


def check_lemmas(spec: CorpusSpec) -> Report:
    name = "lemmas"

    def records():
        for t in enumerate_terms(spec):
            problems = lemma_problems(t, spec.free_var_count)
            yield Record(name, _show(t), "fail" if problems else "pass", problems or None)
    return _report(name, records())


# ---------------------------------------------------------------------------

def suite_record(suite: str, t: Term, spec: CorpusSpec, options=None) -> Record:
    """The record one suite produces for one term."""
    options = options or {}
    node_cap = options.get("node_cap", 10_000)
    variant = Variant(options.get("variant", "sn+"))
    if suite == "equivalence":
        ind = mutated_wn_step_ind if options.get("mutated") else None
        problems = equivalence_problems(t, ind)
    elif suite == "diamond":
        problems = diamond_failures(t, variant, options.get("relaxed_lnf", False))
    elif suite == "minimality":
        problems = minimality_problems(t, node_cap)
        if problems is None:
            return Record(suite, _show(t), "skip", {"truncated": True})
    elif suite == "soundness":
        verdict, witness = soundness_problems(t, spec.cap_fuel, node_cap,
                                              Variant(options.get("variant", "sn")))
        return Record(suite, _show(t), verdict, witness)
    elif suite == "machine":
        verdict, witness = machine_verdict(t, spec.cap_fuel, options.get("optimize", False))
        return Record(suite, _show(t), verdict, witness)
    elif suite == "lemmas":
        problems = lemma_problems(t, spec.free_var_count)
    else:
        raise KeyError(suite)
    return Record(suite, _show(t), "fail" if problems else "pass", problems or None)


SUITES = ("equivalence", "diamond", "minimality", "soundness", "machine", "lemmas")


def _worker_init():
    sys.setrecursionlimit(50_000)


def _worker(job):
    suite, t, spec, options = job
    return suite_record(suite, t, spec, options)


def run_suite(suite: str, spec: CorpusSpec, jobs: int = 1, options=None) -> Iterator[Record]:
    """Records of ``suite`` over the corpus, in enumeration order.

    With ``jobs > 1`` terms are farmed out to a process pool; the order of
    the records does not depend on the number of workers.
    """
    if suite not in SUITES:
        raise KeyError(suite)
    if jobs <= 1:
        for t in enumerate_terms(spec):
            yield suite_record(suite, t, spec, options)
        return
    work = ((suite, t, spec, options) for t in enumerate_terms(spec))
    with multiprocessing.Pool(jobs, initializer=_worker_init) as pool:
        yield from pool.imap(_worker, work, chunksize=32)
