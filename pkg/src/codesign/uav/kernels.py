"""Vectorised weight-loop solver for every (payload, sample, actuator, battery) cell.

Two interchangeable backends compute the same Kleene iteration with the same
floating-point operation order:

* ``numba``: an ``@njit`` loop nest (default when numba imports).
* ``numpy``: masked array iteration over the still-active cells.

``CODESIGN_BACKEND=numpy`` (or ``numba``) selects the backend process-wide;
every public function also takes an explicit ``backend=`` override.

The loop variable is the total component mass ``x`` (actuator + battery, g)::

    lift   = g * (payload + frame + x) / 1000            [N]
    power  = p0 + p1 * lift**2 + (c0 + c1 * v)            [W]
    energy = power * T / 3600                              [Wh]
    x'     = actuator mass + energy / energy_density * 1000

and lifetime cost = actuator cost + energy / energy_per_cost * ceil(N / cycles).
"""

from __future__ import annotations

import math
import os
from typing import NamedTuple

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

NUMBA_AVAILABLE = numba is not None

CONVERGED, SLOW, INFEASIBLE, DIVERGED, MAX_ITER, NON_MONOTONE = 0, -1, 1, 2, 3, 4
# SLOW is internal to the numpy path (cell still iterating)

# actuator columns
MASS, COST, VMAX, P0, P1 = range(5)
# battery columns
RHO, ALPHA, CYCLES = range(3)


def default_backend() -> str:
    env = os.environ.get("CODESIGN_BACKEND", "").strip().lower()
    if env in ("numpy", "numba"):
        if env == "numba" and not NUMBA_AVAILABLE:
            raise RuntimeError("CODESIGN_BACKEND=numba but numba is not installed")
        return env
    if env:
        raise ValueError(f"unknown CODESIGN_BACKEND {env!r}")
    return "numba" if NUMBA_AVAILABLE else "numpy"


class Consts(NamedTuple):
    g: float
    frame: float
    perception: float  # W, at cruise velocity
    velocity: float
    endurance: float  # s
    tol: float
    max_iter: int
    ceiling: float


class PairSolution(NamedTuple):
    cost: np.ndarray  # (P, S, A, B) $, inf when infeasible
    mass: np.ndarray  # total component mass at the fixpoint, g
    status: np.ndarray  # int8 codes
    iterations: np.ndarray  # int32


def _solve_numpy(payloads, act, bat, nmis, c: Consts):
    P, S, A, B = len(payloads), act.shape[0], act.shape[1], bat.shape[1]
    shape = (P, S, A, B)
    W = np.broadcast_to(payloads[:, None, None, None], shape).ravel()
    m_a = np.broadcast_to(act[None, :, :, None, MASS], shape).ravel()
    c_a = np.broadcast_to(act[None, :, :, None, COST], shape).ravel()
    vmax = np.broadcast_to(act[None, :, :, None, VMAX], shape).ravel()
    p0 = np.broadcast_to(act[None, :, :, None, P0], shape).ravel()
    p1 = np.broadcast_to(act[None, :, :, None, P1], shape).ravel()
    rho = np.broadcast_to(bat[None, :, None, :, RHO], shape).ravel()
    alpha = np.broadcast_to(bat[None, :, None, :, ALPHA], shape).ravel()
    cyc = np.broadcast_to(bat[None, :, None, :, CYCLES], shape).ravel()
    N = np.broadcast_to(nmis[None, :, None, None], shape).ravel()

    n = W.size
    cost = np.full(n, np.inf)
    mass = np.full(n, np.inf)
    status = np.full(n, SLOW, dtype=np.int8)
    iters = np.zeros(n, dtype=np.int32)
    status[c.velocity > vmax] = INFEASIBLE

    act_idx = np.flatnonzero(status == SLOW)
    x = np.zeros(act_idx.size)
    for k in range(1, c.max_iter + 1):
        if act_idx.size == 0:
            break
        i = act_idx
        F = c.g * (W[i] + c.frame + x) / 1000.0
        Pw = p0[i] + p1[i] * F * F + c.perception
        C = Pw * c.endurance / 3600.0
        xn = m_a[i] + C / rho[i] * 1000.0
        scale = c.tol * np.maximum(1.0, x)
        iters[i] = k
        div = ~(xn <= c.ceiling)
        nonmono = ~div & (xn < x - scale)
        conv = ~div & ~nonmono & (np.abs(xn - x) <= scale)
        status[i[div]] = DIVERGED
        status[i[nonmono]] = NON_MONOTONE
        ci = i[conv]
        status[ci] = CONVERGED
        mass[ci] = xn[conv]
        cost[ci] = c_a[ci] + C[conv] / alpha[ci] * np.ceil(N[ci] / cyc[ci])
        keep = ~(div | nonmono | conv)
        act_idx, x = i[keep], xn[keep]
    status[act_idx] = MAX_ITER
    return (cost.reshape(shape), mass.reshape(shape), status.reshape(shape), iters.reshape(shape))


def _solve_python(payloads, act, bat, nmis, g, frame, perception, velocity, endurance, tol, max_iter,
                  ceiling, cost, mass, status, iters):
    # also the source compiled by numba; keep the op order identical to _solve_numpy
    P, S, A, B = cost.shape
    for p in range(P):
        W = payloads[p]
        for s in range(S):
            N = nmis[s]
            for a in range(A):
                if velocity > act[s, a, VMAX]:
                    for b in range(B):
                        status[p, s, a, b] = INFEASIBLE
                    continue
                m_a = act[s, a, MASS]
                p0 = act[s, a, P0]
                p1 = act[s, a, P1]
                for b in range(B):
                    rho = bat[s, b, RHO]
                    x = 0.0
                    st = MAX_ITER
                    k = 0
                    C = 0.0
                    xn = 0.0
                    while k < max_iter:
                        k += 1
                        F = g * (W + frame + x) / 1000.0
                        Pw = p0 + p1 * F * F + perception
                        C = Pw * endurance / 3600.0
                        xn = m_a + C / rho * 1000.0
                        scale = tol * max(1.0, x)
                        if not xn <= ceiling:
                            st = DIVERGED
                            break
                        if xn < x - scale:
                            st = NON_MONOTONE
                            break
                        if abs(xn - x) <= scale:
                            st = CONVERGED
                            break
                        x = xn
                    status[p, s, a, b] = st
                    iters[p, s, a, b] = k
                    if st == CONVERGED:
                        mass[p, s, a, b] = xn
                        cost[p, s, a, b] = act[s, a, COST] + C / bat[s, b, ALPHA] * math.ceil(N / bat[s, b, CYCLES])


_solve_numba = None


def _numba_kernel():
    global _solve_numba
    if _solve_numba is None:
        _solve_numba = numba.njit(cache=True, nogil=True)(_solve_python)
    return _solve_numba


def solve_pairs(payloads, act, bat, nmis, consts: Consts, backend: str | None = None) -> PairSolution:
    """Solve the weight loop for all cells.

    ``payloads`` (P,) g; ``act`` (S, A, 5); ``bat`` (S, B, 3); ``nmis`` (S,).
    """
    backend = backend or default_backend()
    payloads = np.ascontiguousarray(payloads, dtype=np.float64).reshape(-1)
    act = np.ascontiguousarray(act, dtype=np.float64)
    bat = np.ascontiguousarray(bat, dtype=np.float64)
    nmis = np.ascontiguousarray(nmis, dtype=np.float64).reshape(-1)
    if act.ndim != 3 or bat.ndim != 3 or act.shape[0] != bat.shape[0] or nmis.shape[0] != act.shape[0]:
        raise ValueError("inconsistent kernel array shapes")
    if backend == "numpy":
        cost, mass, status, iters = _solve_numpy(payloads, act, bat, nmis, consts)
    elif backend in ("numba", "python"):
        shape = (payloads.size, act.shape[0], act.shape[1], bat.shape[1])
        cost = np.full(shape, np.inf)
        mass = np.full(shape, np.inf)
        status = np.empty(shape, dtype=np.int8)
        iters = np.zeros(shape, dtype=np.int32)
        fn = _numba_kernel() if backend == "numba" else _solve_python
        fn(payloads, act, bat, nmis, consts.g, consts.frame, consts.perception, consts.velocity,
           consts.endurance, consts.tol, int(consts.max_iter), consts.ceiling, cost, mass, status, iters)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if (status == NON_MONOTONE).any():
        raise ArithmeticError("weight loop iterates decreased; the loop map is not monotone")
    return PairSolution(cost, mass, status, iters)
