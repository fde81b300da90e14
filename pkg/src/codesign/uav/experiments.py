"""The four UAV experiments: deterministic trade-off, interval envelope, cost
distributions with confidence bounds, and the adaptivity comparison.

Each returns plain arrays; :mod:`codesign.io` turns them into result tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..adaptive import LEVELS, run_process
from ..interval import perturb_params
from ..uncertainty import rect_corners
from . import kernels
from .model import UavModel
from .processes import build_uav_process

DEFAULT_PAYLOADS = tuple(np.linspace(0.0, 3500.0, 8))
Z95 = 1.959963984540054


@dataclass(frozen=True)
class Curve:
    """Minimal lifetime cost per payload and the pair attaining it ("" when infeasible)."""

    payloads: np.ndarray
    cost: np.ndarray
    actuator: list[str]
    battery: list[str]


def _curve(model: UavModel, payloads, sol: kernels.PairSolution) -> Curve:
    m, idx = model.best(sol.cost[:, 0])
    labels = [model.label(int(i)) if i >= 0 else ("", "") for i in idx]
    return Curve(np.asarray(payloads, dtype=float), m, [a for a, _ in labels], [b for _, b in labels])


def experiment_deterministic(model: UavModel, payloads=DEFAULT_PAYLOADS) -> Curve:
    """FixFunMinRes at nominal catalog values, projected on the cost axis."""
    return _curve(model, payloads, model.solve_nominal(payloads))


def experiment_interval(model: UavModel, payloads=DEFAULT_PAYLOADS, frac: float = 0.05,
                        exempt=("v_max",)) -> dict[str, Curve]:
    """Optimistic, nominal and pessimistic curves.

    Each curve picks its own best pair (wait-and-see), so labels may differ.
    """
    pes, opt = perturb_params(model.catalog.param_table(), frac, exempt)
    return {
        "optimistic": _curve(model, payloads, model.solve_nominal(payloads, model.catalog.with_table(opt))),
        "nominal": experiment_deterministic(model, payloads),
        "pessimistic": _curve(model, payloads, model.solve_nominal(payloads, model.catalog.with_table(pes))),
    }


def _quantiles(samples: np.ndarray, qs) -> np.ndarray:
    # order statistics, never interpolated, so +inf samples stay +inf
    return np.quantile(samples, qs, axis=-1, method="inverted_cdf").T


@dataclass(frozen=True)
class Distributional:
    payloads: np.ndarray
    samples: np.ndarray  # (P, n) minimal cost per world draw
    choice: np.ndarray  # (P, n) flat pair index attaining it, -1 when infeasible
    pairs: list[tuple[str, str]]
    quantile_levels: tuple[float, ...]
    quantiles: np.ndarray  # (P, len(quantile_levels))
    lower_cost: np.ndarray  # (P,) optimistic corner, nominal mission count
    upper_cost: np.ndarray  # (P,) pessimistic corner, nominal mission count
    level: float  # rho ** K
    out_of_bound: np.ndarray  # (P,) fraction of samples outside their bound
    rho: float

    def choice_probabilities(self) -> list[dict[tuple[str, str], float]]:
        """Per payload, frequency of each pair being optimal; ``("", "")`` collects infeasible draws."""
        out = []
        n = self.samples.shape[1]
        for row in self.choice:
            counts = np.bincount(row[row >= 0], minlength=len(self.pairs))
            probs = {self.pairs[k]: c / n for k, c in enumerate(counts) if c}
            miss = int((row < 0).sum())
            if miss:
                probs[("", "")] = miss / n
            out.append(probs)
        return out


def _solve_chunked(model: UavModel, payloads, omegas: np.ndarray, workers: int, chunk: int = 256):
    """Kernel solve split over sample chunks; results do not depend on ``workers``."""
    bounds = [(lo, min(len(omegas), lo + chunk)) for lo in range(0, len(omegas), chunk)]

    def work(b):
        return model.solve_omegas(payloads, omegas[b[0]:b[1]]).cost

    if workers <= 1 or len(bounds) == 1:
        parts = [work(b) for b in bounds]
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(work, bounds))
    return np.concatenate(parts, axis=1)


def experiment_distributional(model: UavModel, payloads=DEFAULT_PAYLOADS, n: int = 2000, seed: int = 0,
                              rho: float = 0.9, workers: int = 1,
                              quantile_levels=(0.05, 0.25, 0.5, 0.75, 0.95)) -> Distributional:
    """Cost distribution of the post-observation (lifted-union) design problem.

    The inner bound is the rectangle of central ``rho`` intervals over every
    component parameter, of level ``rho ** K``. Since the bound is stated for
    the components, coverage is checked with each draw's own mission count.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    payloads = np.asarray(payloads, dtype=float)
    omegas = model.sample(n, seed)
    cost = _solve_chunked(model, payloads, omegas, workers)
    samples, choice = model.best(cost)

    bounded = model.layout.bounded_names()
    pes, opt = rect_corners(model.space, rho, bounded)
    nominal_n = model.space.nominal()[model.layout.missions]
    corner_cost = {}
    for name, corner in (("pes", pes), ("opt", opt)):
        at_nominal = corner.copy()
        at_nominal[model.layout.missions] = nominal_n
        per_draw = np.tile(corner, (n, 1))
        per_draw[:, model.layout.missions] = omegas[:, model.layout.missions]
        both = np.vstack([at_nominal, per_draw])
        corner_cost[name] = model.best(model.solve_omegas(payloads, both).cost)[0]
    lo, hi = corner_cost["opt"], corner_cost["pes"]
    inside = (lo[:, 1:] <= samples) & (samples <= hi[:, 1:])
    return Distributional(payloads, samples, choice, model.pairs, tuple(quantile_levels),
                          _quantiles(samples, quantile_levels), lo[:, 0], hi[:, 0], rho ** len(bounded),
                          1.0 - inside.mean(axis=1), rho)


@dataclass(frozen=True)
class PairedDiff:
    """Mean of ``b - a`` over common draws with a 95% normal interval.

    Draws where both costs are infinite count as equal. Any remaining infinite
    difference makes the mean and both interval ends that infinity.
    """

    mean: float
    lo: float
    hi: float

    @property
    def nonnegative(self) -> bool:
        """``mean(a) <= mean(b)`` is not rejected."""
        return self.hi >= 0

    @property
    def strictly_positive(self) -> bool:
        return math.isfinite(self.mean) and self.lo > 0


def paired_diff(a: np.ndarray, b: np.ndarray) -> PairedDiff:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    same_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    with np.errstate(invalid="ignore"):
        d = np.where(same_inf, 0.0, b - a)
    if np.isnan(d).any():
        return PairedDiff(math.nan, math.nan, math.nan)
    if not np.isfinite(d).all():
        m = float(d.sum())
        return PairedDiff(m, m, m)
    m = float(d.mean())
    half = Z95 * float(d.std(ddof=1)) / math.sqrt(len(d)) if len(d) > 1 else 0.0
    return PairedDiff(m, m - half, m + half)


@dataclass(frozen=True)
class Adaptive:
    payloads: np.ndarray
    samples: dict[str, np.ndarray]  # level -> (P, n)
    quantile_levels: tuple[float, ...]
    meta: dict = field(default_factory=dict)

    def means(self) -> dict[str, np.ndarray]:
        return {k: v.mean(axis=1) for k, v in self.samples.items()}

    def quantiles(self) -> dict[str, np.ndarray]:
        return {k: _quantiles(v, self.quantile_levels) for k, v in self.samples.items()}

    def diffs(self, a: str, b: str) -> list[PairedDiff]:
        """Per payload, paired ``b - a``."""
        return [paired_diff(x, y) for x, y in zip(self.samples[a], self.samples[b])]


def experiment_adaptive(model: UavModel, payloads=DEFAULT_PAYLOADS, n: int = 2000, seed: int = 0,
                        workers: int = 1, inner_n: int = 200, policy_n: int = 1000,
                        levels=LEVELS, quantile_levels=(0.05, 0.25, 0.5, 0.75, 0.95)) -> Adaptive:
    """Run each adaptivity level on the same world draws (common random numbers)."""
    payloads = np.asarray(payloads, dtype=float)
    out = {}
    for level in levels:
        proc = build_uav_process(level, model, seed=seed, inner_n=inner_n, policy_n=policy_n)
        res = run_process(proc, payloads, n, seed, workers=workers)
        out[level] = np.stack([res[float(w)] for w in payloads])
    return Adaptive(payloads, out, tuple(quantile_levels), {"inner_n": inner_n, "policy_n": policy_n})
