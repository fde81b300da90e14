"""Independent reference computations used to freeze expected values.

Nothing here imports the package's numerical code: the oracles re-derive the
UAV model from its closed forms and use plain bisection.
"""

from __future__ import annotations

import math

import numpy as np

G = 9.81
PERCEPTION = 5.0 + 2.0 * 3.0  # W at 3 m/s
ENDURANCE = 1000.0 / 3.0  # s for 1000 m at 3 m/s

ACTUATORS = {  # mass g, cost $, v_max m/s, p0 W, p1 W/N^2
    "a1": (50.0, 50.0, 3.0, 1.0, 2.0),
    "a2": (100.0, 100.0, 3.0, 2.0, 1.5),
    "a3": (150.0, 150.0, 3.0, 3.0, 1.5),
}
BATTERIES = {  # Wh/kg, Wh/$, cycles
    "NiMH": (100.0, 3.41, 500.0),
    "NiH2": (45.0, 10.50, 20000.0),
    "LCO": (195.0, 2.84, 750.0),
    "LMO": (150.0, 2.84, 500.0),
    "NiCad": (30.0, 7.50, 500.0),
    "SLA": (30.0, 7.00, 500.0),
    "LiPo": (150.0, 2.50, 600.0),
    "LFP": (90.0, 1.50, 1500.0),
}


def bisect(fn, lo: float, hi: float, tol: float = 1e-14, iters: int = 400) -> float:
    """Root of an increasing-through-zero ``fn`` on ``[lo, hi]``."""
    flo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def normal_ppf(q: float) -> float:
    return bisect(lambda x: normal_cdf(x) - q, -40.0, 40.0, tol=1e-16)


def truncnorm_ppf(q: float, mu: float, sigma: float, lb: float = 0.0) -> float:
    a = normal_cdf((lb - mu) / sigma)
    return mu + sigma * normal_ppf(a + q * (1 - a))


def loop_map(x: float, payload: float, act, bat, frame: float = 0.0) -> float:
    """Total component mass (g) required when the vehicle carries ``x`` g of components."""
    mass, _, _, p0, p1 = act
    rho = bat[0]
    lift = G * (payload + frame + x) / 1000.0  # N
    power = p0 + p1 * lift * lift + PERCEPTION  # W
    capacity = power * ENDURANCE / 3600.0  # Wh
    return mass + capacity / rho * 1000.0  # g


def fixpoint_bisection(payload: float, act, bat) -> float:
    """Least fixpoint of :func:`loop_map` (``inf`` when none exists).

    ``g(x) = loop_map(x) - x`` is convex with ``g(0) > 0``; the least root lies
    left of its minimiser, which bisection on ``g'`` locates first.
    """
    g = lambda x: loop_map(x, payload, act, bat) - x  # noqa: E731
    dg = lambda x: (loop_map(x + 1e-3, payload, act, bat) - loop_map(x - 1e-3, payload, act, bat)) / 2e-3 - 1  # noqa: E731
    hi = 1.0
    while dg(hi) < 0 and hi < 1e12:
        hi *= 2
    xmin = bisect(dg, 0.0, hi, tol=1e-15)
    if g(xmin) > 0:
        return math.inf
    return bisect(lambda x: -g(x), 0.0, xmin, tol=1e-15)


def fixpoint_closed_form(payload: float, act, bat) -> float:
    """Same least fixpoint from the quadratic ``k y^2 - y + c = 0`` with ``y = payload + x``."""
    mass, _, _, p0, p1 = act
    scale = ENDURANCE / 3600.0 / bat[0] * 1000.0
    k = p1 * (G / 1000.0) ** 2 * scale
    c = mass + (p0 + PERCEPTION) * scale + payload
    disc = 1.0 - 4.0 * k * c
    if disc < 0:
        return math.inf
    y = (1.0 - math.sqrt(disc)) / (2.0 * k)
    return y - payload


def pair_cost(payload: float, act, bat, missions: float = 1000.0) -> float:
    x = fixpoint_closed_form(payload, act, bat)
    if not math.isfinite(x):
        return math.inf
    capacity = (x - act[0]) * bat[0] / 1000.0
    return act[1] + capacity / bat[1] * math.ceil(missions / bat[2])


def brute_force_min_cost(payload: float, missions: float = 1000.0, step: float = 0.1,
                         cmax: float = 2000.0) -> tuple[float, str, str]:
    """Exhaustive search over actuators, batteries and a capacity grid.

    A capacity ``C`` (Wh) is feasible when the energy one mission needs, with
    the battery of that capacity on board, does not exceed ``C``.
    """
    C = np.arange(0.0, cmax + step / 2, step)
    best = (math.inf, "", "")
    for an, act in ACTUATORS.items():
        if 3.0 > act[2]:
            continue
        for bn, bat in BATTERIES.items():
            total = act[0] + C / bat[0] * 1000.0
            lift = G * (payload + total) / 1000.0
            need = (act[3] + act[4] * lift * lift + PERCEPTION) * ENDURANCE / 3600.0
            ok = np.flatnonzero(need <= C)
            if ok.size == 0:
                continue
            cost = act[1] + C[ok[0]] / bat[1] * math.ceil(missions / bat[2])
            if cost < best[0]:
                best = (cost, an, bn)
    return best
