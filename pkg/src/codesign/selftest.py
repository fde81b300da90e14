"""Fast invariant suite run by ``--experiment selftest``.

Each check draws randomized instances from one seeded stream and returns a
:class:`Check`. The suite is a smoke-level mirror of the test suite that needs
no test runner.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dp import dp_from_function, feasible, intersection, parallel, series, union
from .io import Column, ResultTable
from .poset import DECREASING, INCREASING, PosetDescriptor, leq, minimal_elements
from .streams import substream
from .uncertainty import ParamSpec, SampleSpace, sample_block


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def table_dp(rng: np.random.Generator, fun: PosetDescriptor, res: PosetDescriptor, k: int = 4, hi: int = 6):
    """Monotone DP from ``k`` random implementations ``(f_i, r_i)``: ``f -> min{r_i : f <= f_i}``."""
    impls = [(tuple(map(float, rng.integers(0, hi, fun.dimension))),
              tuple(map(float, rng.integers(0, hi, res.dimension)))) for _ in range(k)]

    def ev(f):
        return [r for fi, r in impls if leq(fun, f, fi)]

    return dp_from_function(fun, res, ev, "table")


def _grid(desc: PosetDescriptor, hi: int = 6):
    return list(itertools.product(*(map(float, range(hi)) for _ in range(desc.dimension))))


def check_order(rng, cases=300) -> Check:
    d = PosetDescriptor(3, (INCREASING, DECREASING, INCREASING))
    for _ in range(cases):
        a, b, c = (tuple(map(float, rng.integers(0, 3, 3))) for _ in range(3))
        if not leq(d, a, a):
            return Check("order axioms", False, f"not reflexive at {a}")
        if leq(d, a, b) and leq(d, b, a) and a != b:
            return Check("order axioms", False, f"not antisymmetric at {a}, {b}")
        if leq(d, a, b) and leq(d, b, c) and not leq(d, a, c):
            return Check("order axioms", False, f"not transitive at {a}, {b}, {c}")
    return Check("order axioms", True, f"{cases} triples")


def check_antichain(rng, cases=300) -> Check:
    d = PosetDescriptor.chains(["x", "y"])
    for _ in range(cases):
        pts = [tuple(map(float, rng.integers(0, 5, 2))) for _ in range(rng.integers(1, 8))]
        m = minimal_elements(d, pts)
        perm = [pts[i] for i in rng.permutation(len(pts))]
        if minimal_elements(d, perm) != m or minimal_elements(d, m) != m:
            return Check("antichain canonical form", False, f"{pts}")
        if any(leq(d, p, q) for p, q in itertools.permutations(m, 2)):
            return Check("antichain canonical form", False, f"comparable elements in {m}")
    return Check("antichain canonical form", True, f"{cases} sets")


def check_algebra(rng, cases=100) -> Check:
    d = PosetDescriptor.chains(["x", "y"])
    for _ in range(cases):
        a, b, c = (table_dp(rng, d, d) for _ in range(3))
        for f in _grid(d)[::5]:
            s1 = series(series(a, b), c).evaluate(f)
            s2 = series(a, series(b, c)).evaluate(f)
            if not s1.same_set(s2):
                return Check("composition laws", False, f"series associativity at {f}")
            if not union(a, b).evaluate(f).same_set(union(b, a).evaluate(f)):
                return Check("composition laws", False, f"union commutativity at {f}")
            if not union(a, intersection(a, b)).evaluate(f).same_set(a.evaluate(f)):
                return Check("composition laws", False, f"absorption at {f}")
    return Check("composition laws", True, f"{cases} triples")


def check_grid_equivalence(rng, cases=20) -> Check:
    d = PosetDescriptor.chains(["x", "y"])
    grid = _grid(d)
    for _ in range(cases):
        a, b = table_dp(rng, d, d), table_dp(rng, d, d)
        p = parallel(a, b)
        for f in grid[::7]:
            for r in grid[::7]:
                want = feasible(a, f, r) and feasible(b, f, r)
                if feasible(intersection(a, b), f, r) != want:
                    return Check("brute-force feasibility", False, f"intersection at {f}, {r}")
                if feasible(p, f + f, r + r) != (feasible(a, f, r) and feasible(b, f, r)):
                    return Check("brute-force feasibility", False, f"parallel at {f}, {r}")
                via = any(feasible(a, f, m) and feasible(b, m, r) for m in grid)
                if feasible(series(a, b), f, r) != via:
                    return Check("brute-force feasibility", False, f"series at {f}, {r}")
    return Check("brute-force feasibility", True, f"{cases} pairs on a 6x6 grid")


def check_calibration(seed: int) -> Check:
    p = ParamSpec("x", 100.0, fraction=0.05, level=0.9)
    draws = sample_block(SampleSpace((p,)), substream(seed, 9), 20000)[:, 0]
    lo, hi = np.quantile(draws, [0.05, 0.95])
    ok = bool(abs(lo / 95.0 - 1) < 0.005 and abs(hi / 105.0 - 1) < 0.005)
    return Check("calibration", ok, f"5%={lo:.3f} 95%={hi:.3f}")


def check_uav(seed: int) -> list[Check]:
    from .uav.experiments import experiment_adaptive, experiment_distributional, experiment_interval
    from .uav.model import UavModel

    model = UavModel()
    payloads = np.linspace(0.0, 3500.0, 8)
    out = []
    iv = experiment_interval(model, payloads)
    ordered = bool(np.all(iv["optimistic"].cost <= iv["nominal"].cost)
                   and np.all(iv["nominal"].cost <= iv["pessimistic"].cost))
    cliff = bool(np.any(np.isinf(iv["pessimistic"].cost) & np.isfinite(iv["optimistic"].cost)))
    out.append(Check("interval envelope", ordered and cliff, f"ordered={ordered} cliff={cliff}"))

    omegas = model.sample(64, seed)
    sol = model.solve_omegas(payloads, omegas)
    ok = sol.status == 0
    act, bat, N = model.layout.arrays(omegas)
    m = sol.mass
    # loop closure: battery mass from the capacity needed at the returned total mass
    c = model.consts()
    amass = act[:, :, 0][None, :, :, None]
    F = c.g * (payloads[:, None, None, None] + c.frame + m) / 1000.0
    P = act[:, :, 3][None, :, :, None] + act[:, :, 4][None, :, :, None] * F * F + c.perception
    x = amass + P * c.endurance / 3600.0 / bat[:, :, 0][None, :, None, :] * 1000.0
    with np.errstate(invalid="ignore"):
        resid = np.abs(x - m)[ok] / np.maximum(1.0, m[ok])
    out.append(Check("weight-loop residual", bool(resid.max(initial=0) <= 1e-9), f"max={resid.max(initial=0):.2e}"))

    d = experiment_distributional(model, payloads, 64, seed)
    mono = bool(np.all(np.diff(d.samples, axis=0) >= 0))
    out.append(Check("per-sample monotonicity", mono))
    union_ok = bool(np.array_equal(d.samples, sol.cost.reshape(len(payloads), 64, -1).min(axis=2)))
    out.append(Check("union equals min over choices", union_ok))
    out.append(Check("bound level", math.isclose(d.level, 0.9 ** 30, rel_tol=1e-12), f"{d.level:.6g}"))

    a = experiment_adaptive(model, payloads[:3], 16, seed, inner_n=20, policy_n=50)
    same = bool(np.array_equal(a.samples["fully_adaptive"], d.samples[:3, :16]))
    out.append(Check("fully adaptive equals lifted union", same))
    return out


def run_selftest(seed: int = 0) -> list[Check]:
    rng = substream(seed, 8)
    checks: list[Callable[[], Check | list[Check]]] = [
        lambda: check_order(rng), lambda: check_antichain(rng), lambda: check_algebra(rng),
        lambda: check_grid_equivalence(rng), lambda: check_calibration(seed), lambda: check_uav(seed),
    ]
    out: list[Check] = []
    for c in checks:
        r = c()
        out += r if isinstance(r, list) else [r]
    return out


def selftest_table(checks: list[Check]) -> ResultTable:
    failed = [c.name for c in checks if not c.ok]
    if failed:
        raise AssertionError(f"selftest failed: {', '.join(failed)}")
    return ResultTable("selftest", "selftest/1", [Column("check"), Column("ok"), Column("detail")],
                       [(c.name, str(c.ok).lower(), c.detail) for c in checks])
