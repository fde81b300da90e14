"""Design problems as monotone evaluators ``f -> Antichain of minimal resources``.

Every DP here maps a functionality point to the antichain of minimal feasible
resources. Composition operators build new evaluators; nothing stores the
(infinite) feasibility relation itself.

Each DP also exposes :meth:`DesignProblem.branches`, a finite list of DPs whose
union is the DP. Unions are pushed outward through series, parallel,
intersection and diagrams, which lets :func:`trace` solve one scalar loop per
branch instead of iterating on a multi-valued loop map.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Callable, Iterable, Mapping, Sequence

from .poset import (
    INCREASING,
    Antichain,
    Point,
    PosetDescriptor,
    antichain_dominates,
    antichain_intersection,
    antichain_union,
)

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-9
TRACE_MAX_ITER = 200
TRACE_CEILING = 1e9


class NonMonotoneLoopError(RuntimeError):
    """Kleene iterates decreased, so the loop map is not monotone."""


class DesignProblem:
    """Base class. Subclasses implement :meth:`_evaluate`."""

    def __init__(self, fun: PosetDescriptor, res: PosetDescriptor, label: str = ""):
        self.fun = fun
        self.res = res
        self.label = label or type(self).__name__

    def evaluate(self, f: Sequence[float]) -> Antichain:
        return self._evaluate(self.fun.check(f))

    __call__ = evaluate

    def _evaluate(self, f: Point) -> Antichain:
        raise NotImplementedError

    def branches(self) -> list["DesignProblem"]:
        return [self]

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label!r} F{self.fun.dimension}->R{self.res.dimension}>"


class FunctionDP(DesignProblem):
    """DP backed by a function returning candidate minimal resource points.

    ``fn`` may return any iterable of points (or an empty one when infeasible);
    the result is re-minimized.
    """

    def __init__(self, fun, res, fn: Callable[[Point], Iterable[Sequence[float]]], label=""):
        super().__init__(fun, res, label)
        self.fn = fn

    def _evaluate(self, f):
        return Antichain(self.res, tuple(tuple(p) for p in self.fn(f)))


def dp_from_function(fun, res, fn, label="") -> FunctionDP:
    return FunctionDP(fun, res, fn, label)


def identity_dp(desc: PosetDescriptor) -> FunctionDP:
    return FunctionDP(desc, desc, lambda f: [f], "id")


def empty_dp(fun: PosetDescriptor, res: PosetDescriptor) -> FunctionDP:
    return FunctionDP(fun, res, lambda f: (), "empty")


def sum_dp(k: int, name: str = "sum", unit: str = "") -> FunctionDP:
    """Requires the total of ``k`` provided quantities."""
    fun = PosetDescriptor.chains([f"{name}_{i}" for i in range(k)], [unit] * k if unit else None)
    res = PosetDescriptor.chains([name], [unit] if unit else None)
    return FunctionDP(fun, res, lambda f: [(math.fsum(f),)], name)


def split_dp(k: int, name: str = "split", unit: str = "") -> FunctionDP:
    """Providing ``x`` requires ``x`` on each of ``k`` branches."""
    fun = PosetDescriptor.chains([name], [unit] if unit else None)
    res = PosetDescriptor.chains([f"{name}_{i}" for i in range(k)], [unit] * k if unit else None)
    return FunctionDP(fun, res, lambda f: [f * k], name)


def feasible(dp: DesignProblem, f: Sequence[float], r: Sequence[float]) -> bool:
    return antichain_dominates(dp.evaluate(f), dp.res.check(r))


def _product_branches(parts: Sequence[DesignProblem], build) -> list[DesignProblem]:
    options = [p.branches() for p in parts]
    if all(len(o) == 1 for o in options):
        return None  # caller returns [self]
    return [build(combo) for combo in itertools.product(*options)]


class SeriesDP(DesignProblem):
    def __init__(self, a: DesignProblem, b: DesignProblem):
        if not a.res.compatible(b.fun):
            raise ValueError(f"cannot connect {a.label} resources to {b.label} functionalities")
        super().__init__(a.fun, b.res, f"({a.label} ; {b.label})")
        self.a, self.b = a, b

    def _evaluate(self, f):
        pts: list[Point] = []
        for q in self.a.evaluate(f):
            pts.extend(self.b.evaluate(q).points)
        return Antichain(self.res, tuple(pts))

    def branches(self):
        return _product_branches([self.a, self.b], lambda c: SeriesDP(*c)) or [self]


class ParallelDP(DesignProblem):
    def __init__(self, a: DesignProblem, b: DesignProblem):
        super().__init__(a.fun.product(b.fun), a.res.product(b.res), f"({a.label} || {b.label})")
        self.a, self.b = a, b

    def _evaluate(self, f):
        k = self.a.fun.dimension
        ra = self.a.evaluate(f[:k])
        if not ra:
            return Antichain.empty(self.res)
        rb = self.b.evaluate(f[k:])
        return Antichain(self.res, tuple(p + q for p in ra for q in rb))

    def branches(self):
        return _product_branches([self.a, self.b], lambda c: ParallelDP(*c)) or [self]


class UnionDP(DesignProblem):
    def __init__(self, parts: Sequence[DesignProblem]):
        _check_alike(parts)
        super().__init__(parts[0].fun, parts[0].res, " | ".join(p.label for p in parts))
        self.parts = tuple(parts)

    def _evaluate(self, f):
        out = Antichain.empty(self.res)
        for p in self.parts:
            out = antichain_union(out, p.evaluate(f))
        return out

    def branches(self):
        return [b for p in self.parts for b in p.branches()]


class IntersectionDP(DesignProblem):
    def __init__(self, parts: Sequence[DesignProblem]):
        _check_alike(parts)
        super().__init__(parts[0].fun, parts[0].res, " & ".join(p.label for p in parts))
        self.parts = tuple(parts)

    def _evaluate(self, f):
        out = self.parts[0].evaluate(f)
        for p in self.parts[1:]:
            if not out:
                break
            out = antichain_intersection(out, p.evaluate(f))
        return out

    def branches(self):
        return _product_branches(self.parts, IntersectionDP) or [self]


def _check_alike(parts: Sequence[DesignProblem]) -> None:
    if not parts:
        raise ValueError("need at least one operand")
    for p in parts[1:]:
        if not (p.fun.compatible(parts[0].fun) and p.res.compatible(parts[0].res)):
            raise ValueError(f"descriptor mismatch between {parts[0].label} and {p.label}")


def series(a: DesignProblem, b: DesignProblem) -> DesignProblem:
    return SeriesDP(a, b)


def parallel(a: DesignProblem, b: DesignProblem) -> DesignProblem:
    return ParallelDP(a, b)


def union(*parts: DesignProblem) -> DesignProblem:
    return parts[0] if len(parts) == 1 else UnionDP(parts)


def intersection(*parts: DesignProblem) -> DesignProblem:
    return parts[0] if len(parts) == 1 else IntersectionDP(parts)


@dataclass(frozen=True)
class LoopSpec:
    """Functionality coordinate ``fun_index`` is fed by resource coordinate ``res_index``."""

    fun_index: int
    res_index: int


@dataclass
class KleeneResult:
    resources: Antichain
    witness: float  # loop value the resources were evaluated at
    loop_value: float  # loop resource required at the witness
    iterations: int
    status: str  # "converged" | "infeasible" | "diverged" | "max_iter"


def _drop(p: Point, i: int) -> Point:
    return p[:i] + p[i + 1:]


class TraceDP(DesignProblem):
    """Feedback of one scalar resource coordinate into one functionality coordinate.

    Solved per branch by Kleene iteration from the bottom of the loop chain.
    """

    def __init__(self, dp: DesignProblem, loop: LoopSpec, tol=TRACE_TOL,
                 max_iter=TRACE_MAX_ITER, ceiling=TRACE_CEILING):
        fi, ri = loop.fun_index, loop.res_index
        if dp.fun.directions[fi] != INCREASING or dp.res.directions[ri] != INCREASING:
            raise ValueError("looped coordinates must be increasing chains with bottom 0")
        if dp.fun.dimension < 2 or dp.res.dimension < 2:
            raise ValueError("trace needs at least one open functionality and resource")
        fun = _drop_desc(dp.fun, fi)
        res = _drop_desc(dp.res, ri)
        super().__init__(fun, res, f"trace({dp.label})")
        self.dp, self.loop = dp, loop
        self.tol, self.max_iter, self.ceiling = tol, max_iter, ceiling

    def _evaluate(self, f):
        parts = self.dp.branches()
        out = Antichain.empty(self.res)
        for b in parts:
            out = antichain_union(out, kleene(b, self.loop, f, self.tol, self.max_iter,
                                              self.ceiling).resources)
        return out

    def branches(self):
        parts = self.dp.branches()
        if len(parts) == 1:
            return [self]
        return [TraceDP(b, self.loop, self.tol, self.max_iter, self.ceiling) for b in parts]

    def solve(self, f: Sequence[float]) -> KleeneResult:
        """Kleene diagnostics; only valid when the looped DP is a single branch."""
        parts = self.dp.branches()
        if len(parts) != 1:
            raise ValueError("solve() needs a single-branch loop; use branches()")
        return kleene(parts[0], self.loop, self.fun.check(f), self.tol, self.max_iter, self.ceiling)


def _drop_desc(d: PosetDescriptor, i: int) -> PosetDescriptor:
    return PosetDescriptor(d.dimension - 1, _drop(d.directions, i),
                           _drop(d.names, i) if d.names else (),
                           _drop(d.units, i) if d.units else ())


def kleene(dp: DesignProblem, loop: LoopSpec, f: Point, tol=TRACE_TOL, max_iter=TRACE_MAX_ITER,
           ceiling=TRACE_CEILING) -> KleeneResult:
    """Least fixpoint of the scalar loop map ``x -> loop resource at (f, x)``."""
    fi, ri = loop.fun_index, loop.res_index
    empty = Antichain.empty(_drop_desc(dp.res, ri))
    x = 0.0
    for k in range(1, max_iter + 1):
        ac = dp.evaluate(f[:fi] + (x,) + f[fi:])
        if not ac:
            return KleeneResult(empty, x, math.inf, k, "infeasible")
        if len(ac) > 1:
            raise ValueError(f"loop map of {dp.label} is multi-valued; split it into branches")
        r = ac.points[0]
        xn = r[ri]
        if not xn <= ceiling:
            return KleeneResult(empty, x, xn, k, "diverged")
        scale = tol * max(1.0, x)
        if xn < x - scale:
            raise NonMonotoneLoopError(f"loop value fell from {x!r} to {xn!r} in {dp.label}")
        if abs(xn - x) <= scale:
            return KleeneResult(Antichain(empty.descriptor, (_drop(r, ri),)), x, xn, k, "converged")
        x = xn
    logger.warning("Kleene iteration for %s hit max_iter=%d at x=%g", dp.label, max_iter, x)
    return KleeneResult(empty, x, math.inf, max_iter, "max_iter")


def trace(dp: DesignProblem, loop: LoopSpec, tol=TRACE_TOL, max_iter=TRACE_MAX_ITER,
          ceiling=TRACE_CEILING) -> TraceDP:
    return TraceDP(dp, loop, tol, max_iter, ceiling)


def fix_fun_min_res(dp: DesignProblem, fs: Sequence[Sequence[float]]) -> Antichain:
    """Minimal resources feasible for every functionality in ``fs`` at once."""
    if not fs:
        raise ValueError("fs must be nonempty")
    out = dp.evaluate(fs[0])
    for f in fs[1:]:
        if not out:
            break
        out = antichain_intersection(out, dp.evaluate(f))
    return out


# ---------------------------------------------------------------------------
# diagrams

@dataclass(frozen=True)
class Port:
    node: str
    index: int


@dataclass
class Diagram:
    """Wiring of named DPs.

    ``edges`` connect a resource port (first) to a functionality port (second).
    Every node port must be wired exactly once: functionality ports by a system
    input, an edge or a feedback edge; resource ports by a system output, an
    edge or a feedback edge. Fan-out and summation go through explicit
    :func:`split_dp` / :func:`sum_dp` nodes.
    """

    nodes: Mapping[str, DesignProblem]
    inputs: Sequence[Port]
    outputs: Sequence[Port]
    edges: Sequence[tuple[Port, Port]] = ()
    feedback: Sequence[tuple[Port, Port]] = ()
    label: str = "diagram"

    def validate(self) -> list[str]:
        fun_src: dict[Port, object] = {}
        res_dst: dict[Port, object] = {}

        def claim(table, port, what, kind):
            if port.node not in self.nodes:
                raise ValueError(f"unknown node {port.node!r}")
            dp = self.nodes[port.node]
            dim = (dp.fun if kind == "fun" else dp.res).dimension
            if not 0 <= port.index < dim:
                raise ValueError(f"{kind} port {port} out of range")
            if port in table:
                raise ValueError(f"{kind} port {port} wired twice")
            table[port] = what

        for i, p in enumerate(self.inputs):
            claim(fun_src, p, ("input", i), "fun")
        for j, p in enumerate(self.outputs):
            claim(res_dst, p, ("output", j), "res")
        for src, dst in list(self.edges) + list(self.feedback):
            claim(res_dst, src, dst, "res")
            claim(fun_src, dst, src, "fun")
            s = self.nodes[src.node].res
            t = self.nodes[dst.node].fun
            if s.directions[src.index] != t.directions[dst.index]:
                raise ValueError(f"direction mismatch on wire {src} -> {dst}")
        for name, dp in self.nodes.items():
            for i in range(dp.fun.dimension):
                if Port(name, i) not in fun_src:
                    raise ValueError(f"functionality port {name}[{i}] is not wired")
            for i in range(dp.res.dimension):
                if Port(name, i) not in res_dst:
                    raise ValueError(f"resource port {name}[{i}] is not wired")
        ts = TopologicalSorter({n: set() for n in self.nodes})
        for src, dst in self.edges:
            ts.add(dst.node, src.node)
        try:
            return list(ts.static_order())
        except CycleError as e:
            raise ValueError(f"diagram has a cycle outside its feedback edges: {e.args[1]}") from None


class DagDP(DesignProblem):
    """Acyclic diagram; feedback edges are opened into an extra input and output each."""

    def __init__(self, d: Diagram):
        order = d.validate()
        self.diagram, self.order = d, order
        open_in = list(d.inputs) + [dst for _, dst in d.feedback]
        open_out = list(d.outputs) + [src for src, _ in d.feedback]
        fun = _stack([d.nodes[p.node].fun for p in open_in], [p.index for p in open_in])
        res = _stack([d.nodes[p.node].res for p in open_out], [p.index for p in open_out])
        super().__init__(fun, res, d.label)
        self._in, self._out = open_in, open_out
        self._feed = {dst: src for src, dst in d.edges}

    def _evaluate(self, f):
        d = self.diagram
        given = {p: f[i] for i, p in enumerate(self._in)}
        states: list[dict[Port, float]] = [{}]
        for name in self.order:
            dp = d.nodes[name]
            new_states = []
            for st in states:
                fv = tuple(given[Port(name, i)] if Port(name, i) in given
                           else st[self._feed[Port(name, i)]] for i in range(dp.fun.dimension))
                for r in dp.evaluate(fv):
                    nst = dict(st)
                    nst.update((Port(name, i), v) for i, v in enumerate(r))
                    new_states.append(nst)
            states = new_states
            if not states:
                return Antichain.empty(self.res)
        return Antichain(self.res, tuple(tuple(st[p] for p in self._out) for st in states))

    def branches(self):
        names = list(self.diagram.nodes)
        options = [self.diagram.nodes[n].branches() for n in names]
        if all(len(o) == 1 for o in options):
            return [self]
        out = []
        for combo in itertools.product(*options):
            nodes = dict(zip(names, combo))
            out.append(DagDP(Diagram(nodes, self.diagram.inputs, self.diagram.outputs,
                                     self.diagram.edges, self.diagram.feedback, self.diagram.label)))
        return out


def _stack(descs: Sequence[PosetDescriptor], idx: Sequence[int]) -> PosetDescriptor:
    return PosetDescriptor(
        len(descs),
        tuple(d.directions[i] for d, i in zip(descs, idx)),
        tuple(d.names[i] if d.names else f"x{k}" for k, (d, i) in enumerate(zip(descs, idx))),
        tuple(d.units[i] if d.units else "" for d, i in zip(descs, idx)),
    )


def solve_diagram(d: Diagram, tol=TRACE_TOL, max_iter=TRACE_MAX_ITER,
                  ceiling=TRACE_CEILING) -> DesignProblem:
    """Composite DP of a diagram with at most one scalar feedback loop."""
    if len(d.nodes) == 1 and not d.edges and not d.feedback:
        (name, dp), = d.nodes.items()
        if ([p.index for p in d.inputs] == list(range(dp.fun.dimension))
                and [p.index for p in d.outputs] == list(range(dp.res.dimension))):
            d.validate()
            return dp
    dag = DagDP(d)
    if not d.feedback:
        return dag
    if len(d.feedback) > 1:
        raise ValueError("only a single scalar feedback loop is supported")
    return TraceDP(dag, LoopSpec(len(d.inputs), len(d.outputs)), tol, max_iter, ceiling)
