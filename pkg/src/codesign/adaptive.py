"""Markov-kernel stages, re-parameterization and Monte Carlo MAP policies.

Kernels are samplers: ``sample(x, rng) -> y``. Composition threads one stream
through both stages, so ``(a . b) . c`` and ``a . (b . c)`` draw identical
samples for the same generator state.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping, Sequence

import numpy as np

from .streams import OMEGA, POLICY, STAGE, float_key, substream
from .uncertainty import SampleSpace, sample_omega


@dataclass(frozen=True)
class Kernel:
    input_type: Hashable
    output_type: Hashable
    sample: Callable[[Any, np.random.Generator], Any]
    name: str = ""

    def __call__(self, x, rng):
        return self.sample(x, rng)


def deterministic_kernel(fn: Callable[[Any], Any], input_type, output_type, name="") -> Kernel:
    return Kernel(input_type, output_type, lambda x, rng: fn(x), name or getattr(fn, "__name__", ""))


def identity_kernel(t) -> Kernel:
    return Kernel(t, t, lambda x, rng: x, "id")


def constant_kernel(value, input_type, output_type, name="const") -> Kernel:
    return Kernel(input_type, output_type, lambda x, rng: value, name)


def kleisli_compose(a: Kernel, b: Kernel) -> Kernel:
    """Sample ``a`` then feed its output to ``b`` on the same stream."""
    if a.output_type != b.input_type:
        raise TypeError(f"cannot compose {a.name}: ->{a.output_type!r} with {b.name}: {b.input_type!r}->")
    return Kernel(a.input_type, b.output_type, lambda x, rng: b.sample(a.sample(x, rng), rng),
                  f"{a.name};{b.name}")


def reparameterize(model: Kernel, f: Kernel) -> Kernel:
    """Pre-compose a design model with a kernel choosing its input."""
    return kleisli_compose(f, model)


# ---------------------------------------------------------------------------
# policies

@dataclass
class Policy:
    """Maps an observation to a choice, or to ``{choice: prob}`` when randomized."""

    choices: Sequence[Hashable]
    decide: Callable[[Any], Any]
    randomized: bool = False
    name: str = ""

    def __call__(self, obs, rng: np.random.Generator | None = None):
        out = self.decide(obs)
        if not self.randomized:
            return out
        keys = list(out)
        p = np.array([out[k] for k in keys], dtype=float)
        return keys[int(rng.choice(len(keys), p=p / p.sum()))]

    def as_kernel(self, input_type, output_type="choice") -> Kernel:
        return Kernel(input_type, output_type, lambda obs, rng: self(obs, rng), self.name or "policy")


def constant_policy(choice) -> Policy:
    return Policy([choice], lambda obs: choice, name=f"const({choice})")


@dataclass(frozen=True)
class MapEstimate:
    choice: int
    probabilities: np.ndarray
    mean_cost: np.ndarray


def map_choice(costs: np.ndarray) -> MapEstimate:
    """MAP pick from an ``(n, k)`` cost matrix.

    A candidate attains the optimum in a sample when its cost equals the finite
    sample minimum. Ties go to the lower mean cost, then the lower index.
    """
    costs = np.atleast_2d(costs)
    best = costs.min(axis=1, keepdims=True)
    wins = (costs == best) & np.isfinite(best)
    prob = wins.mean(axis=0)
    with np.errstate(invalid="ignore"):
        mean = costs.mean(axis=0)
    order = np.lexsort((np.arange(costs.shape[1]), mean, -prob))
    return MapEstimate(int(order[0]), prob, mean)


def estimate_map_policy(candidates: Sequence[Hashable],
                        scenario_sampler: Callable[[Any, np.random.Generator, int], Any],
                        cost: Callable[[Any, Any], np.ndarray],
                        inner_n: int, seed: int,
                        key: Callable[[Any], tuple[int, ...]] | None = None,
                        name: str = "map") -> Policy:
    """Deterministic MAP policy estimated by Monte Carlo.

    For an observation ``obs``, ``scenario_sampler(obs, rng, inner_n)`` draws
    the remaining uncertainty and ``cost(obs, scenarios)`` returns an
    ``(inner_n, len(candidates))`` cost matrix. The candidate most often
    attaining the minimum is chosen. The inner stream is keyed by
    ``key(obs)`` (default: the observation's float bits), so the policy is a
    pure function of the observation.
    """
    if inner_n < 1:
        raise ValueError("inner_n must be >= 1")
    cands = list(candidates)
    keyfn = key or float_key
    if len(cands) == 1:
        return Policy(cands, lambda obs: cands[0], name=name)

    def estimate(obs) -> MapEstimate:
        rng = substream(seed, POLICY, *keyfn(obs))
        return map_choice(cost(obs, scenario_sampler(obs, rng, inner_n)))

    policy = Policy(cands, lambda obs: cands[estimate(obs).choice], name=name)
    policy.estimate = estimate  # type: ignore[attr-defined]
    return policy


# ---------------------------------------------------------------------------
# staged processes

class _LazyStream:
    """Generator proxy built on first use; most stages never draw."""

    __slots__ = ("_key", "_rng")

    def __init__(self, *key: int):
        self._key, self._rng = key, None

    def __getattr__(self, name):
        if self._rng is None:
            self._rng = substream(*self._key)
        return getattr(self._rng, name)


@dataclass(frozen=True)
class Stage:
    kernel: Kernel
    inputs: tuple[str, ...]
    output: str


@dataclass
class StagedProcess:
    """Stages run in order on an environment dict seeded with ``omega`` and ``payload``.

    Stage ``j`` of sample ``i`` receives ``substream(seed, STAGE, j, i)``.
    """

    world: SampleSpace
    stages: list[Stage]
    result: str = "system"
    observe: Callable[[Any, float], float] | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        known = {"omega", "payload"}
        for st in self.stages:
            missing = [k for k in st.inputs if k not in known]
            if missing:
                raise ValueError(f"stage {st.kernel.name} reads {missing} before they exist")
            known.add(st.output)
        if self.result not in known:
            raise ValueError(f"no stage produces {self.result!r}")

    def run_one(self, omega: np.ndarray, payload: float, seed: int, sample_idx: int) -> dict:
        env: dict[str, Any] = {"omega": omega, "payload": payload}
        for j, st in enumerate(self.stages):
            x = env[st.inputs[0]] if len(st.inputs) == 1 else tuple(env[k] for k in st.inputs)
            env[st.output] = st.kernel.sample(x, _LazyStream(seed, STAGE, j, sample_idx))
        return env


def run_process(p: StagedProcess, payloads: Sequence[float], n: int, seed: int,
                workers: int = 1, chunk: int = 64) -> dict[float, np.ndarray]:
    """Per-payload arrays of the observed value, one entry per sample index.

    World draws depend only on ``(seed, sample index)``, so payloads and
    adaptivity levels share common random numbers and the output does not
    depend on ``workers``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if p.observe is None:
        raise ValueError("process has no observation")
    pls = [float(w) for w in payloads]
    out = np.empty((len(pls), n))

    def work(lo: int, hi: int):
        for i in range(lo, hi):
            omega = sample_omega(p.world, substream(seed, OMEGA, i))
            for k, w in enumerate(pls):
                env = p.run_one(omega, w, seed, i)
                out[k, i] = p.observe(env[p.result], w)

    bounds = [(lo, min(n, lo + chunk)) for lo in range(0, n, chunk)]
    if workers <= 1:
        for lo, hi in bounds:
            work(lo, hi)
    else:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(lambda b: work(*b), bounds))
    return {w: out[k] for k, w in enumerate(pls)}


LEVELS = ("non_adaptive", "partly_adaptive", "fully_adaptive")


def build_scenario(level: str, config: Mapping[str, Any] | None = None) -> StagedProcess:
    """UAV decision process at one adaptivity level (see :mod:`codesign.uav.processes`)."""
    from .uav.processes import build_uav_process

    return build_uav_process(level, **dict(config or {}))
