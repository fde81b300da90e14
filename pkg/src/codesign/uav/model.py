"""The UAV benchmark bundled as one object: catalog + constants + task profile."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..uncertainty import SampleSpace, sample_omegas
from . import kernels
from .catalog import (
    ActuatorModel,
    BatteryTech,
    Catalog,
    OmegaLayout,
    TaskProfile,
    UavParams,
    load_catalog,
    sample_space,
)
from .components import uav_diagram


@dataclass
class UavModel:
    catalog: Catalog = field(default_factory=load_catalog)
    params: UavParams = field(default_factory=UavParams)
    profile: TaskProfile = field(default_factory=TaskProfile)
    fraction: float = 0.05
    level: float = 0.90
    backend: str | None = None

    def __post_init__(self):
        self.space: SampleSpace = sample_space(self.catalog, self.profile, self.fraction, self.level)
        self.layout = OmegaLayout(self.catalog, self.space)

    @property
    def pairs(self) -> list[tuple[str, str]]:
        return [(a, b) for a in self.catalog.actuator_ids for b in self.catalog.battery_ids]

    def consts(self) -> kernels.Consts:
        p = self.params
        v = p.cruise_velocity
        return kernels.Consts(p.g, p.frame_mass, p.perception_power(v), v, p.endurance(self.profile),
                              p.trace_tol, p.trace_max_iter, p.trace_ceiling)

    def solve(self, payloads, act, bat, nmis) -> kernels.PairSolution:
        return kernels.solve_pairs(payloads, act, bat, nmis, self.consts(), self.backend)

    def solve_nominal(self, payloads, catalog: Catalog | None = None) -> kernels.PairSolution:
        act, bat = (catalog or self.catalog).arrays()
        return self.solve(payloads, act[None], bat[None], np.array([float(self.profile.num_missions)]))

    def solve_omegas(self, payloads, omegas) -> kernels.PairSolution:
        act, bat, N = self.layout.arrays(omegas)
        return self.solve(payloads, act, bat, N)

    def sample(self, n: int, seed: int, start: int = 0) -> np.ndarray:
        return sample_omegas(self.space, seed, n, start)

    def label(self, flat_index: int) -> tuple[str, str]:
        return self.pairs[flat_index]

    def best(self, cost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Min over the trailing (A, B) axes and the flat argmin (-1 when all infinite)."""
        flat = cost.reshape(cost.shape[:-2] + (-1,))
        idx = np.argmin(flat, axis=-1)
        m = np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]
        return m, np.where(np.isfinite(m), idx, -1)

    def system_dp(self, actuators=None, batteries=None, catalog: Catalog | None = None,
                  num_missions: float | None = None):
        """Generic-algebra system DP (slow path, for cross-checks)."""
        cat = catalog or self.catalog
        acts = list(cat.actuators) if actuators is None else actuators
        bats = list(cat.batteries) if batteries is None else batteries
        return uav_diagram(acts, bats, self.params, self.profile, num_missions)

    def catalog_at(self, omega: np.ndarray) -> Catalog:
        """Catalog with the random parameters replaced by one omega point."""
        table = self.catalog.param_table()
        for name, v in zip(self.space.names, omega):
            if name in table:
                table[name] = float(v)
        return self.catalog.with_table(table)

    def missions_at(self, omega: np.ndarray) -> float:
        return float(omega[self.layout.missions])


def actuator_from_spec(id: str, spec: Sequence[float]) -> ActuatorModel:
    return ActuatorModel(id, *map(float, spec))


def battery_from_spec(id: str, spec: Sequence[float]) -> BatteryTech:
    return BatteryTech(id, *map(float, spec))


