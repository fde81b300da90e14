"""The three adaptivity levels of the UAV benchmark as staged decision processes.

All levels share the world draw ``omega`` (one per sample index) and resolve
the actuator operating point and battery mass inside the per-sample weight-loop
solve. They differ only in what the discrete choices may observe:

* ``non_adaptive``: actuator and battery fixed per payload before any draw.
* ``partly_adaptive``: actuator fixed per payload; battery chosen after seeing
  the realized specification of that actuator.
* ``fully_adaptive``: both chosen after seeing every component parameter, the
  mission count and the payload.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..adaptive import (
    LEVELS,
    Kernel,
    Stage,
    StagedProcess,
    deterministic_kernel,
    estimate_map_policy,
)
from ..streams import POLICY, float_key
from ..uncertainty import SampleSpace, sample_block, sample_omegas
from .catalog import ACT_FIELDS
from .components import uav_diagram
from .model import UavModel, actuator_from_spec, battery_from_spec


@dataclass(frozen=True)
class UavRealization:
    """Realized specifications of one actuator/battery pair plus the mission count."""

    actuator: str
    battery: str
    act_spec: tuple[float, ...]  # mass, cost, v_max, p0, p1
    bat_spec: tuple[float, ...]  # energy_density, energy_per_cost, cycles
    num_missions: float

    def min_cost(self, model: UavModel, payload: float) -> float:
        sol = model.solve([payload], np.array(self.act_spec)[None, None], np.array(self.bat_spec)[None, None],
                          np.array([self.num_missions]))
        return float(sol.cost[0, 0, 0, 0])

    def to_dp(self, model: UavModel):
        return uav_diagram(actuator_from_spec(self.actuator, self.act_spec),
                           battery_from_spec(self.battery, self.bat_spec),
                           model.params, model.profile, self.num_missions)


class UavKernels:
    """Observation and policy kernels for one model and seed."""

    def __init__(self, model: UavModel, seed: int, inner_n: int = 200, policy_n: int = 1000):
        self.model, self.seed = model, seed
        self.inner_n, self.policy_n = inner_n, policy_n
        self.A = len(model.catalog.actuators)
        self.B = len(model.catalog.batteries)
        lay = model.layout
        space = model.space
        # battery block + mission count: what a battery policy still does not know
        self.tb_space = SampleSpace(tuple(p for p in space.params if p.block in ("T", "B")))
        self._tb_idx = [space.index(p.name) for p in self.tb_space.params]
        self._cache: dict = {}
        self._lay = lay
        self.policy_omegas = None

    # observations ----------------------------------------------------------
    def act_specs(self, omega) -> np.ndarray:
        act, _, _ = self._lay.arrays(omega)
        return act[0]

    def bat_specs(self, omega) -> np.ndarray:
        _, bat, _ = self._lay.arrays(omega)
        return bat[0]

    def obs_actuator(self) -> Kernel:
        return deterministic_kernel(lambda x: tuple(self.act_specs(x[1])[x[0]]), ("actuator", "omega"),
                                    "act_spec", "obs_A")

    def obs_battery(self) -> Kernel:
        return deterministic_kernel(lambda x: tuple(self.bat_specs(x[1])[x[0]]), ("battery", "omega"),
                                    "bat_spec", "obs_B")

    def obs_task(self) -> Kernel:
        return deterministic_kernel(lambda om: float(om[self._lay.missions]), "omega", "missions", "obs_T")

    def obs_all(self) -> Kernel:
        return deterministic_kernel(lambda om: (self.act_specs(om), self.bat_specs(om)), "omega", "specs",
                                    "obs_AB")

    def realize(self) -> Kernel:
        cat = self.model.catalog

        def fn(x):
            (a, b), act_spec, bat_spec, N = x
            return UavRealization(cat.actuator_ids[a], cat.battery_ids[b], tuple(map(float, act_spec)),
                                  tuple(map(float, bat_spec)), float(N))

        return deterministic_kernel(fn, ("pair", "act_spec", "bat_spec", "missions"), "system", "a_UAV")

    def observe(self, system: UavRealization, payload: float) -> float:
        return system.min_cost(self.model, payload)

    # policies ---------------------------------------------------------------
    def _policy_costs(self, payload: float) -> np.ndarray:
        """``(policy_n, A, B)`` costs on the policy-estimation draws (shared by all payloads)."""
        if self.policy_omegas is None:
            # separate stream from evaluation samples so policies are not fit on them
            self.policy_omegas = sample_omegas(self.model.space, self.seed, self.policy_n, stream=POLICY)
        key = ("pol", payload)
        if key not in self._cache:
            self._cache[key] = self.model.solve_omegas([payload], self.policy_omegas).cost[0]
        return self._cache[key]

    def pair_policy(self):
        """Unconditional MAP over (actuator, battery) pairs, per payload."""
        pairs = [(a, b) for a in range(self.A) for b in range(self.B)]
        pol = estimate_map_policy(
            pairs, lambda payload, rng, n: None,
            lambda payload, _: self._policy_costs(payload).reshape(self.policy_n, -1),
            self.policy_n, self.seed, key=lambda payload: float_key([payload]), name="pi_AB")
        return _cached(pol)

    def actuator_policy(self):
        """Unconditional MAP over actuators, scored by each actuator's best battery."""
        pol = estimate_map_policy(
            list(range(self.A)), lambda payload, rng, n: None,
            lambda payload, _: self._policy_costs(payload).min(axis=2),
            self.policy_n, self.seed, key=lambda payload: float_key([payload]), name="pi_A")
        return _cached(pol)

    def battery_policy(self):
        """MAP over batteries given the chosen actuator's realized specification.

        Nested Monte Carlo: ``inner_n`` draws of the battery parameters and
        mission count, keyed by the observed specification only, so the same
        draws are reused across payloads.
        """
        def sampler(obs, rng, n):
            a, spec, payload = obs
            ck = ("tb", a, spec)
            if ck not in self._cache:
                self._cache[ck] = sample_block(self.tb_space, rng, n)
            return self._cache[ck]

        def cost(obs, draws):
            a, spec, payload = obs
            n = len(draws)
            full = np.tile(self.model.space.nominal(), (n, 1))
            full[:, self._tb_idx] = draws
            _, bat, N = self._lay.arrays(full)
            act = np.broadcast_to(np.asarray(spec, dtype=float), (n, 1, len(ACT_FIELDS)))
            return self.model.solve([payload], act, bat, N).cost[0, :, 0, :]

        pol = estimate_map_policy(list(range(self.B)), sampler, cost, self.inner_n, self.seed,
                                  key=lambda obs: (obs[0],) + float_key(obs[1]), name="pi_B")
        return pol

    def full_policy(self):
        """Both choices after observing everything: the MAP degenerates to the exact argmin."""
        pairs = [(a, b) for a in range(self.A) for b in range(self.B)]

        def cost(obs, _):
            (act, bat), N, payload = obs
            sol = self.model.solve([payload], act[None], bat[None], np.array([N]))
            return sol.cost.reshape(1, -1)

        return estimate_map_policy(pairs, lambda obs, rng, n: None, cost, 1, self.seed,
                                   key=lambda obs: (), name="pi_AB|all")


def _cached(pol):
    table: dict = {}
    inner = pol.decide

    def decide(obs):
        if obs not in table:
            table[obs] = inner(obs)
        return table[obs]

    pol.decide = decide
    pol.table = table
    return pol


def build_uav_process(level: str, model: UavModel | None = None, seed: int = 0, inner_n: int = 200,
                      policy_n: int = 1000) -> StagedProcess:
    if level not in LEVELS:
        raise ValueError(f"unknown adaptivity level {level!r}; expected one of {LEVELS}")
    model = model or UavModel()
    K = UavKernels(model, seed, inner_n, policy_n)
    if level == "non_adaptive":
        pi = K.pair_policy()
        stages = [
            Stage(pi.as_kernel("payload", "pair"), ("payload",), "pair"),
            Stage(deterministic_kernel(lambda x: x[0], "pair", "actuator"), ("pair",), "actuator"),
            Stage(deterministic_kernel(lambda x: x[1], "pair", "battery"), ("pair",), "battery"),
        ]
    elif level == "partly_adaptive":
        pi_a = K.actuator_policy()
        pi_b = K.battery_policy()
        stages = [
            Stage(pi_a.as_kernel("payload", "actuator"), ("payload",), "actuator"),
            Stage(K.obs_actuator(), ("actuator", "omega"), "act_spec"),
        ]
        stages.append(Stage(pi_b.as_kernel(("actuator", "act_spec", "payload"), "battery"),
                            ("actuator", "act_spec", "payload"), "battery"))
        stages.append(Stage(deterministic_kernel(lambda x: x, ("actuator", "battery"), "pair"),
                            ("actuator", "battery"), "pair"))
    else:
        pi = K.full_policy()
        stages = [
            Stage(K.obs_all(), ("omega",), "specs"),
            Stage(K.obs_task(), ("omega",), "missions"),
            Stage(pi.as_kernel(("specs", "missions", "payload"), "pair"), ("specs", "missions", "payload"), "pair"),
            Stage(deterministic_kernel(lambda x: x[0], "pair", "actuator"), ("pair",), "actuator"),
            Stage(deterministic_kernel(lambda x: x[1], "pair", "battery"), ("pair",), "battery"),
        ]
    names = {st.output for st in stages}
    if "act_spec" not in names:
        stages.append(Stage(K.obs_actuator(), ("actuator", "omega"), "act_spec"))
    stages.append(Stage(K.obs_battery(), ("battery", "omega"), "bat_spec"))
    if "missions" not in names:
        stages.append(Stage(K.obs_task(), ("omega",), "missions"))
    stages.append(Stage(K.realize(), ("pair", "act_spec", "bat_spec", "missions"), "system"))
    return StagedProcess(model.space, stages, "system", K.observe, level,
                         {"kernels": K, "seed": seed, "inner_n": inner_n, "policy_n": policy_n})
