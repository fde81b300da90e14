"""Product sample spaces, random design problems and Monte Carlo queries.

A :class:`SampleSpace` is an ordered product of independent scalar parameters
with truncated-Gaussian marginals. A :class:`RandomDP` maps an omega point
(one value per parameter) to a :class:`~codesign.dp.DesignProblem`; distributions
over DPs are the pushforwards of the product measure. Kernel composition is
realised by chaining samplers, never by integrating densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import dp as _dp
from .dp import DesignProblem, Diagram, feasible, fix_fun_min_res, solve_diagram
from .interval import DPInterval, HARMFUL, param_direction
from .streams import OMEGA, substream

_STD = NormalDist()
MAX_REJECTIONS = 1000


def sigma_from_calibration(nominal: float, fraction: float = 0.05, level: float = 0.90) -> float:
    """Std. dev. whose central ``level`` interval is ``nominal * (1 ± fraction)``."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if fraction == 0:
        return 0.0
    z = _STD.inv_cdf((1 + level) / 2)
    return fraction * nominal / z


@dataclass(frozen=True)
class ParamSpec:
    name: str
    nominal: float
    unit: str = ""
    fraction: float = 0.05
    level: float = 0.90
    lower_bound: float = 0.0
    integer: bool = False  # sampled value is rounded up
    block: str = ""

    def __post_init__(self):
        if not self.nominal > 0:
            raise ValueError(f"{self.name}: nominal must be positive")
        if not 0 < self.level < 1:
            raise ValueError(f"{self.name}: level must lie in (0, 1)")
        if self.fraction < 0:
            raise ValueError(f"{self.name}: fraction must be nonnegative")

    @property
    def sigma(self) -> float:
        return sigma_from_calibration(self.nominal, self.fraction, self.level)

    def central_interval(self, rho: float) -> tuple[float, float]:
        """Central probability-``rho`` interval of the truncated marginal."""
        s = self.sigma
        if s == 0:
            return self.nominal, self.nominal
        a = _STD.cdf((self.lower_bound - self.nominal) / s)

        def q(u):
            return self.nominal + s * _STD.inv_cdf(a + u * (1 - a))

        lo, hi = q((1 - rho) / 2), q((1 + rho) / 2)
        if self.integer:
            lo, hi = math.ceil(lo), math.ceil(hi)
        return lo, hi


@dataclass(frozen=True)
class SampleSpace:
    params: tuple[ParamSpec, ...]

    def __post_init__(self):
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("parameter names must be unique")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def __len__(self):
        return len(self.params)

    def index(self, name: str) -> int:
        return self._index[name]

    def block(self, block: str) -> list[str]:
        return [p.name for p in self.params if p.block == block]

    def nominal(self) -> np.ndarray:
        return np.array([p.nominal for p in self.params])

    def with_fraction(self, fraction: float) -> "SampleSpace":
        from dataclasses import replace
        return SampleSpace(tuple(replace(p, fraction=fraction) for p in self.params))


def sample_omega(space: SampleSpace, rng: np.random.Generator) -> np.ndarray:
    """One omega point; each coordinate an independent truncated Gaussian draw."""
    mu = space.nominal()
    sig = np.array([p.sigma for p in space.params])
    lb = np.array([p.lower_bound for p in space.params])
    out = mu + sig * rng.standard_normal(len(mu))
    bad = np.flatnonzero(out < lb)
    for i in bad:
        for _ in range(MAX_REJECTIONS):
            out[i] = mu[i] + sig[i] * rng.standard_normal()
            if out[i] >= lb[i]:
                break
        else:
            raise RuntimeError(f"truncated sampler for {space.params[i].name} rejected {MAX_REJECTIONS} draws")
    for i, p in enumerate(space.params):
        if p.integer:
            out[i] = math.ceil(out[i])
    return out


def sample_block(space: SampleSpace, rng: np.random.Generator, n: int) -> np.ndarray:
    """``(n, len(space))`` draws from one stream, vectorised; same marginals as :func:`sample_omega`."""
    mu = space.nominal()
    sig = np.array([p.sigma for p in space.params])
    lb = np.array([p.lower_bound for p in space.params])
    out = mu + sig * rng.standard_normal((n, len(mu)))
    for _ in range(MAX_REJECTIONS):
        bad = out < lb
        if not bad.any():
            break
        rows, cols = np.nonzero(bad)
        out[rows, cols] = mu[cols] + sig[cols] * rng.standard_normal(rows.size)
    else:
        raise RuntimeError(f"truncated sampler rejected {MAX_REJECTIONS} rounds")
    ints = [i for i, p in enumerate(space.params) if p.integer]
    if ints:
        out[:, ints] = np.ceil(out[:, ints])
    return out


def sample_omegas(space: SampleSpace, seed: int, n: int, start: int = 0, stream: int = OMEGA) -> np.ndarray:
    """``(n, len(space))`` matrix; row ``i`` depends only on ``(seed, stream, start + i)``."""
    return np.stack([sample_omega(space, substream(seed, stream, start + i)) for i in range(n)]) \
        if n else np.empty((0, len(space)))


class ParamView(Mapping[str, float]):
    """Read-only name lookup into an omega point restricted to ``allowed`` names."""

    def __init__(self, space: SampleSpace, omega: np.ndarray, allowed: frozenset[str] | None):
        self._space, self._omega, self._allowed = space, omega, allowed

    def __getitem__(self, name):
        if self._allowed is not None and name not in self._allowed:
            raise KeyError(f"{name!r} is outside this component's declared dependencies")
        return float(self._omega[self._space.index(name)])

    def __iter__(self):
        return iter(self._allowed if self._allowed is not None else self._space.names)

    def __len__(self):
        return len(self._allowed if self._allowed is not None else self._space.names)


@dataclass(frozen=True)
class RandomDP:
    """``realize`` receives a :class:`ParamView` limited to ``depends_on``."""

    space: SampleSpace
    realize_fn: Callable[[Mapping[str, float]], DesignProblem]
    depends_on: frozenset[str] = field(default_factory=frozenset)
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "depends_on", frozenset(self.depends_on))
        unknown = self.depends_on - set(self.space.names)
        if unknown:
            raise ValueError(f"unknown parameters {sorted(unknown)}")

    def realize(self, omega: np.ndarray) -> DesignProblem:
        return self.realize_fn(ParamView(self.space, omega, self.depends_on))


def constant_random(space: SampleSpace, dp: DesignProblem) -> RandomDP:
    return RandomDP(space, lambda _: dp, frozenset(), dp.label)


def compose_random(components: Mapping[str, RandomDP], d: Diagram, **trace_kw) -> RandomDP:
    """Random DP of a diagram whose named nodes are replaced by realizations.

    Component dependency sets must be disjoint so the composite is the
    pushforward of the product measure.
    """
    comps = dict(components)
    if not comps:
        raise ValueError("no components")
    space = next(iter(comps.values())).space
    seen: set[str] = set()
    for name, c in comps.items():
        if c.space is not space and c.space != space:
            raise ValueError("components must share one sample space")
        if name not in d.nodes:
            raise ValueError(f"diagram has no node {name!r}")
        overlap = seen & c.depends_on
        if overlap:
            raise ValueError(f"components share parameters {sorted(overlap)}")
        seen |= c.depends_on
    if len(comps) == 1 and len(d.nodes) == 1:
        return next(iter(comps.values()))

    def realize(view: ParamView) -> DesignProblem:
        nodes = dict(d.nodes)
        for name, c in comps.items():
            nodes[name] = c.realize_fn(ParamView(space, view._omega, c.depends_on))
        return solve_diagram(Diagram(nodes, d.inputs, d.outputs, d.edges, d.feedback, d.label), **trace_kw)

    return RandomDP(space, realize, frozenset(seen), d.label)


def lifted_union_random(components: Sequence[RandomDP]) -> RandomDP:
    """Free choice made after the outcome is observed: pointwise union."""
    if len(components) == 1:
        return components[0]
    space = components[0].space
    deps = frozenset().union(*(c.depends_on for c in components))

    def realize(view: ParamView) -> DesignProblem:
        return _dp.union(*(c.realize_fn(ParamView(space, view._omega, c.depends_on)) for c in components))

    return RandomDP(space, realize, deps, " | ".join(c.label for c in components))


def _binomial_radius(p: float, n: int) -> float:
    return 1.959963984540054 * math.sqrt(p * (1 - p) / n)


def feasibility_probability(rdp: RandomDP, pairs: Sequence[tuple[Sequence[float], Sequence[float]]],
                            n: int, seed: int) -> tuple[float, float]:
    """Monte Carlo probability that every ``(f, r)`` pair is feasible.

    Returns ``(estimate, 95% binomial radius)``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    hits = 0
    for i in range(n):
        d = rdp.realize(sample_omega(rdp.space, substream(seed, OMEGA, i)))
        hits += all(feasible(d, f, r) for f, r in pairs)
    p = hits / n
    return p, _binomial_radius(p, n)


def r_min(dp: DesignProblem, fs: Sequence[Sequence[float]], coord: int = 0) -> float:
    """Infimal value of one (totally ordered) resource coordinate feasible for all ``fs``."""
    ac = fix_fun_min_res(dp, fs)
    return min((p[coord] for p in ac), default=math.inf)


def min_resource_samples(rdp: RandomDP, fs: Sequence[Sequence[float]], coord: int, n: int,
                         seed: int) -> np.ndarray:
    out = np.empty(n)
    for i in range(n):
        out[i] = r_min(rdp.realize(sample_omega(rdp.space, substream(seed, OMEGA, i))), fs, coord)
    return out


# ---------------------------------------------------------------------------
# confidence bounds

@dataclass(frozen=True)
class InnerBound:
    interval: DPInterval
    level: float
    pessimistic: np.ndarray  # omega corner used for the lower DP
    optimistic: np.ndarray
    depends_on: frozenset[str]


def rect_corners(space: SampleSpace, rho: float, bounded: Iterable[str],
                 directions: Callable[[str], int] = param_direction) -> tuple[np.ndarray, np.ndarray]:
    """Pessimistic and optimistic corners of the rectangle of central ``rho`` intervals.

    Parameters outside ``bounded`` stay at their nominal values.
    """
    pes, opt = space.nominal(), space.nominal()
    for name in bounded:
        p = space.params[space.index(name)]
        lo, hi = p.central_interval(rho)
        d = directions(name)
        if d not in (-1, 1):
            raise ValueError(f"dependence on {name!r} is not monotone")
        i = space.index(name)
        pes[i], opt[i] = (hi, lo) if d == HARMFUL else (lo, hi)
    return pes, opt


def inner_bound_rect(rdp: RandomDP, rho: float, bounded: Iterable[str] | None = None,
                     directions: Callable[[str], int] = param_direction) -> InnerBound:
    """DP interval from a product rectangle of per-parameter central intervals.

    The level is ``rho ** K`` with ``K`` the number of bounded scalars.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    names = sorted(rdp.depends_on) if bounded is None else list(bounded)
    pes, opt = rect_corners(rdp.space, rho, names, directions)
    iv = DPInterval(rdp.realize(pes), rdp.realize(opt))
    return InnerBound(iv, rho ** len(names), pes, opt, frozenset(names))


def compose_inner_bounds(bounds: Mapping[str, InnerBound], d: Diagram, **trace_kw) -> InnerBound:
    """Endpoint-wise diagram solve; the level is the product of component levels."""
    seen: set[str] = set()
    for b in bounds.values():
        if seen & b.depends_on:
            raise ValueError(f"bounds share parameters {sorted(seen & b.depends_on)}")
        seen |= b.depends_on
    if len(bounds) == 1 and len(d.nodes) == 1:
        return next(iter(bounds.values()))

    def solve(which):
        nodes = dict(d.nodes)
        for name, b in bounds.items():
            nodes[name] = getattr(b.interval, which)
        return solve_diagram(Diagram(nodes, d.inputs, d.outputs, d.edges, d.feedback, d.label), **trace_kw)

    level = math.prod(b.level for b in bounds.values())
    pes = opt = np.empty(0)
    return InnerBound(DPInterval(solve("lower"), solve("upper")), level, pes, opt, frozenset(seen))


def check_outer_bound_empirical(rdp: RandomDP, interval: DPInterval,
                                probes: Sequence[tuple[Sequence[float], Sequence[float]]],
                                n: int, seed: int) -> tuple[float, float]:
    """Empirical ``(p_hat, q_hat)`` on a probe grid.

    ``p_hat``: fraction of realizations missing some probe the pessimistic DP
    accepts (falling below the interval). ``q_hat``: fraction accepting some
    probe the optimistic DP rejects (rising above it).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    below = above = 0
    lo = [feasible(interval.lower, f, r) for f, r in probes]
    hi = [feasible(interval.upper, f, r) for f, r in probes]
    for i in range(n):
        d = rdp.realize(sample_omega(rdp.space, substream(seed, OMEGA, i)))
        got = [feasible(d, f, r) for f, r in probes]
        below += any(l and not g for l, g in zip(lo, got))
        above += any(g and not h for g, h in zip(got, hi))
    return below / n, above / n
