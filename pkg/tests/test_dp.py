import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codesign.dp import (
    Diagram,
    LoopSpec,
    NonMonotoneLoopError,
    Port,
    dp_from_function,
    empty_dp,
    feasible,
    fix_fun_min_res,
    identity_dp,
    intersection,
    kleene,
    parallel,
    series,
    solve_diagram,
    split_dp,
    sum_dp,
    trace,
    union,
)
from codesign.poset import Antichain, PosetDescriptor
from strategies import table_dp_from, table_dps

D1 = PosetDescriptor.chains(["x"])
D2 = PosetDescriptor.chains(["x", "y"])


def grid(desc, hi=5):
    return list(itertools.product(*([[float(v) for v in range(hi)]] * desc.dimension)))


# ---------------------------------------------------------------------------
# composition laws on random monotone DPs

@settings(max_examples=1000)
@given(st.data())
def test_series_associative(data):
    d = data.draw(st.sampled_from([D1, D2]))
    a, b, c = (data.draw(table_dps(d, d)) for _ in range(3))
    left, right = series(series(a, b), c), series(a, series(b, c))
    for f in grid(d)[::3]:
        assert left.evaluate(f).same_set(right.evaluate(f))


@settings(max_examples=1000)
@given(st.data())
def test_union_intersection_lattice_laws(data):
    d = data.draw(st.sampled_from([D1, D2]))
    a, b, c = (data.draw(table_dps(d, d)) for _ in range(3))
    for f in grid(d)[::4]:
        def ev(x):
            return x.evaluate(f)
        assert ev(union(a, b)).same_set(ev(union(b, a)))
        assert ev(intersection(a, b)).same_set(ev(intersection(b, a)))
        assert ev(union(a, union(b, c))).same_set(ev(union(union(a, b), c)))
        assert ev(intersection(a, intersection(b, c))).same_set(ev(intersection(intersection(a, b), c)))
        assert ev(union(a, intersection(a, b))).same_set(ev(a))
        assert ev(intersection(a, union(a, b))).same_set(ev(a))
        assert ev(union(a, a)).same_set(ev(a))


@settings(max_examples=300)
@given(st.data())
def test_feasibility_is_an_upper_set(data):
    a = data.draw(table_dps(D2, D2))
    g = grid(D2, 4)
    for f, r in itertools.product(g[::3], g[::3]):
        if feasible(a, f, r):
            for f2, r2 in itertools.product(g[::5], g[::5]):
                if all(x <= y for x, y in zip(f2, f)) and all(x >= y for x, y in zip(r2, r)):
                    assert feasible(a, f2, r2)


# ---------------------------------------------------------------------------
# brute force on finite grids: feasibility relations as boolean matrices

def random_relation(rng, n, k):
    """Table DP on the chain {0..n-1} and its feasibility matrix ``M[f, r]``."""
    impls = [((float(rng.integers(0, n)),), (float(rng.integers(0, n)),)) for _ in range(k)]
    M = np.zeros((n, n), dtype=bool)
    for (fi,), (ri,) in impls:
        M[: int(fi) + 1, int(ri):] = True
    return table_dp_from(D1, D1, impls), M


def relation_of(dp, n, k_fun=1, k_res=1):
    fs = list(itertools.product(range(n), repeat=k_fun))
    rs = list(itertools.product(range(n), repeat=k_res))
    return np.array([[feasible(dp, tuple(map(float, f)), tuple(map(float, r))) for r in rs] for f in fs])


@pytest.mark.parametrize("n", [5, 12, 20])
def test_grid_series_parallel_intersection(n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        (a, A), (b, B) = random_relation(rng, n, 3), random_relation(rng, n, 3)
        assert np.array_equal(relation_of(a, n), A)
        S = (A.astype(int) @ B.astype(int)) > 0
        assert np.array_equal(relation_of(series(a, b), n), S)
        assert np.array_equal(relation_of(intersection(a, b), n), A & B)
        assert np.array_equal(relation_of(union(a, b), n), A | B)
        p = parallel(a, b)
        for f1, f2, r1, r2 in rng.integers(0, n, (200, 4)):
            want = A[f1, r1] and B[f2, r2]
            assert feasible(p, (float(f1), float(f2)), (float(r1), float(r2))) == want


def test_grid_two_dimensional_series():
    rng = np.random.default_rng(7)
    n = 4
    g = grid(D2, n)
    for _ in range(5):
        impls = lambda: [(tuple(map(float, rng.integers(0, n, 2))), tuple(map(float, rng.integers(0, n, 2))))  # noqa: E731
                         for _ in range(3)]
        a, b = table_dp_from(D2, D2, impls()), table_dp_from(D2, D2, impls())
        s = series(a, b)
        for f in g:
            for r in g:
                want = any(feasible(a, f, m) and feasible(b, m, r) for m in g)
                assert feasible(s, f, r) == want


# ---------------------------------------------------------------------------
# primitives

def test_primitives():
    assert identity_dp(D2).evaluate((1, 2)).points == ((1.0, 2.0),)
    assert not empty_dp(D1, D1).evaluate((0,))
    assert sum_dp(3).evaluate((0.1, 0.2, 0.3)).points == ((math.fsum([0.1, 0.2, 0.3]),),)
    assert split_dp(2).evaluate((4,)).points == ((4.0, 4.0),)
    with pytest.raises(ValueError):
        series(identity_dp(D1), identity_dp(D2))
    with pytest.raises(ValueError):
        union(identity_dp(D1), identity_dp(D2))


def test_fix_fun_min_res_intersects_requirements():
    dp = dp_from_function(D1, D2, lambda f: [(f[0], 1.0), (1.0, f[0])])
    ac = fix_fun_min_res(dp, [(2.0,), (3.0,)])
    # joins of {(2,1),(1,2)} with {(3,1),(1,3)}: (3,1) (2,3) (3,2) (1,3), minimal ones kept
    assert ac.same_set(Antichain(D2, ((3.0, 1.0), (1.0, 3.0))))
    with pytest.raises(ValueError):
        fix_fun_min_res(dp, [])


# ---------------------------------------------------------------------------
# trace

def affine_loop(a, b):
    """(f, x) -> (r = f + x, x' = a + b x); least fixpoint x* = a / (1 - b) for b < 1."""
    return dp_from_function(D2, D2, lambda f: [(f[0] + f[1], a + b * f[1])], f"aff({a},{b})")


def test_trace_affine_fixpoint():
    t = trace(affine_loop(2.0, 0.5), LoopSpec(1, 1))
    res = t.solve((1.0,))
    assert res.status == "converged"
    assert math.isclose(res.witness, 4.0, rel_tol=1e-8)
    assert abs(res.loop_value - res.witness) <= 1e-9 * max(1.0, res.witness)
    assert math.isclose(t.evaluate((1.0,)).points[0][0], 5.0, rel_tol=1e-8)


def test_trace_divergence_is_infeasible():
    t = trace(affine_loop(1.0, 1.5), LoopSpec(1, 1))
    assert t.solve((0.0,)).status == "diverged"
    assert not t.evaluate((0.0,))


def test_trace_max_iter_is_infeasible():
    t = trace(affine_loop(1.0, 1.0), LoopSpec(1, 1), ceiling=math.inf, max_iter=50)
    r = t.solve((0.0,))
    assert r.status == "max_iter" and not r.resources


def test_trace_nonmonotone_raises():
    dp = dp_from_function(D2, D2, lambda f: [(0.0, 5.0 if f[1] == 0 else 1.0)])
    with pytest.raises(NonMonotoneLoopError):
        trace(dp, LoopSpec(1, 1)).evaluate((0.0,))


def test_trace_of_union_is_union_of_traces():
    a, b = affine_loop(2.0, 0.5), affine_loop(1.0, 0.8)
    t = trace(union(a, b), LoopSpec(1, 1))
    want = union(trace(a, LoopSpec(1, 1)), trace(b, LoopSpec(1, 1)))
    for f in [(0.0,), (3.0,)]:
        assert t.evaluate(f).same_set(want.evaluate(f), tol=1e-8)
    with pytest.raises(ValueError):
        t.solve((0.0,))


def test_kleene_rejects_multivalued_loop():
    dp = dp_from_function(D2, D2, lambda f: [(0.0, 1.0), (1.0, 0.5)])
    with pytest.raises(ValueError):
        kleene(dp, LoopSpec(1, 1), (0.0,))


# ---------------------------------------------------------------------------
# diagrams

def test_diagram_matches_series_and_parallel():
    rng = np.random.default_rng(3)
    for _ in range(10):
        (a, _), (b, _) = random_relation(rng, 6, 3), random_relation(rng, 6, 3)
        d = Diagram({"a": a, "b": b}, [Port("a", 0)], [Port("b", 0)], [(Port("a", 0), Port("b", 0))])
        s = solve_diagram(d)
        p = solve_diagram(Diagram({"a": a, "b": b}, [Port("a", 0), Port("b", 0)], [Port("a", 0), Port("b", 0)]))
        for f in range(6):
            assert s.evaluate((float(f),)).same_set(series(a, b).evaluate((float(f),)))
            for g in range(6):
                assert p.evaluate((float(f), float(g))).same_set(parallel(a, b).evaluate((float(f), float(g))))


def test_diagram_feedback_equals_trace():
    loop = affine_loop(2.0, 0.5)
    d = Diagram({"n": loop}, [Port("n", 0)], [Port("n", 0)], feedback=[(Port("n", 1), Port("n", 1))])
    got = solve_diagram(d).evaluate((1.0,))
    assert got.same_set(trace(loop, LoopSpec(1, 1)).evaluate((1.0,)), tol=1e-12)


def test_diagram_validation():
    a = identity_dp(D1)
    with pytest.raises(ValueError, match="not wired"):
        solve_diagram(Diagram({"a": a, "b": a}, [Port("a", 0)], [Port("a", 0)]))
    with pytest.raises(ValueError, match="twice"):
        solve_diagram(Diagram({"a": a}, [Port("a", 0), Port("a", 0)], [Port("a", 0)]))
    with pytest.raises(ValueError, match="cycle"):
        solve_diagram(Diagram({"a": a, "b": a}, [], [],
                              [(Port("a", 0), Port("b", 0)), (Port("b", 0), Port("a", 0))]))
    rev = dp_from_function(PosetDescriptor(1, (-1,)), D1, lambda f: [f])
    with pytest.raises(ValueError, match="direction"):
        solve_diagram(Diagram({"a": a, "r": rev}, [Port("a", 0)], [Port("r", 0)], [(Port("a", 0), Port("r", 0))]))
    two = dp_from_function(PosetDescriptor.chains(["u", "v", "w"]), PosetDescriptor.chains(["u", "v", "w"]),
                           lambda f: [f])
    with pytest.raises(ValueError, match="single"):
        solve_diagram(Diagram({"t": two}, [Port("t", 0)], [Port("t", 0)],
                              feedback=[(Port("t", 1), Port("t", 1)), (Port("t", 2), Port("t", 2))]))
