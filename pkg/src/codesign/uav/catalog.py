"""Catalog entries, task profile, model constants and the benchmark sample space."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .. import _toml
from ..uncertainty import ParamSpec, SampleSpace


@dataclass(frozen=True)
class ActuatorModel:
    id: str
    mass: float  # g
    cost: float  # $
    v_max: float  # m/s
    p0: float  # W
    p1: float  # W/N^2


@dataclass(frozen=True)
class BatteryTech:
    id: str
    energy_density: float  # Wh/kg
    energy_per_cost: float  # Wh/$
    cycles: float


@dataclass(frozen=True)
class TaskProfile:
    num_missions: float = 1000
    distance: float = 1000.0  # m per mission
    frequency: float = 1.0  # missions/day; carried but unused in any formula

    def __post_init__(self):
        if self.num_missions < 0 or self.distance < 0 or self.frequency <= 0:
            raise ValueError("invalid task profile")


@dataclass(frozen=True)
class UavParams:
    g: float = 9.81  # m/s^2
    frame_mass: float = 0.0  # g
    perception_c0: float = 5.0  # W
    perception_c1: float = 2.0  # W s/m
    cruise_velocity: float = 3.0  # m/s
    trace_tol: float = 1e-9
    trace_max_iter: int = 10_000
    trace_ceiling: float = 1e9  # g

    def endurance(self, profile: TaskProfile) -> float:
        """Seconds per mission at cruise velocity."""
        return profile.distance / self.cruise_velocity

    def perception_power(self, v: float) -> float:
        return self.perception_c0 + self.perception_c1 * v


ACT_FIELDS = ("mass", "cost", "v_max", "p0", "p1")
BAT_FIELDS = ("energy_density", "energy_per_cost", "cycles")
# parameters that carry distributional uncertainty (30 scalars for the default catalog)
ACT_RANDOM = ("p0", "p1")
BAT_RANDOM = BAT_FIELDS
MISSIONS = "task.num_missions"


@dataclass(frozen=True)
class Catalog:
    actuators: tuple[ActuatorModel, ...]
    batteries: tuple[BatteryTech, ...]

    @property
    def actuator_ids(self) -> list[str]:
        return [a.id for a in self.actuators]

    @property
    def battery_ids(self) -> list[str]:
        return [b.id for b in self.batteries]

    def actuator(self, key: str) -> ActuatorModel:
        for a in self.actuators:
            if a.id == key:
                return a
        raise KeyError(f"unknown actuator {key!r}")

    def battery(self, key: str) -> BatteryTech:
        for b in self.batteries:
            if b.id == key:
                return b
        raise KeyError(f"unknown battery {key!r}")

    def param_table(self) -> dict[str, float]:
        t = {}
        for a in self.actuators:
            t.update({f"{a.id}.{k}": getattr(a, k) for k in ACT_FIELDS})
        for b in self.batteries:
            t.update({f"{b.id}.{k}": getattr(b, k) for k in BAT_FIELDS})
        return t

    def with_table(self, table: Mapping[str, float]) -> "Catalog":
        acts = tuple(replace(a, **{k: table.get(f"{a.id}.{k}", getattr(a, k)) for k in ACT_FIELDS})
                     for a in self.actuators)
        bats = tuple(replace(b, **{k: table.get(f"{b.id}.{k}", getattr(b, k)) for k in BAT_FIELDS})
                     for b in self.batteries)
        return Catalog(acts, bats)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Nominal ``(A, 5)`` actuator and ``(B, 3)`` battery parameter arrays."""
        act = np.array([[getattr(a, k) for k in ACT_FIELDS] for a in self.actuators], dtype=float)
        bat = np.array([[getattr(b, k) for k in BAT_FIELDS] for b in self.batteries], dtype=float)
        return act, bat


def default_catalog_path() -> Path:
    return Path(str(resources.files("codesign") / "data" / "catalog.toml"))


def load_catalog(path: str | Path | None = None) -> Catalog:
    p = Path(path) if path else default_catalog_path()
    raw = _toml.loads(p.read_text())
    try:
        acts = tuple(ActuatorModel(k, **{f: float(v[f]) for f in ACT_FIELDS})
                     for k, v in raw["actuators"].items())
        bats = tuple(BatteryTech(k, **{f: float(v[f]) for f in BAT_FIELDS})
                     for k, v in raw["batteries"].items())
    except KeyError as e:
        raise ValueError(f"{p}: catalog entry is missing field {e.args[0]!r}") from None
    extra = set(raw) - {"actuators", "batteries"}
    if extra:
        raise ValueError(f"{p}: unknown catalog sections {sorted(extra)}")
    for a in acts:
        if min(getattr(a, f) for f in ACT_FIELDS) <= 0:
            raise ValueError(f"{p}: actuator {a.id} has a nonpositive parameter")
    for b in bats:
        if min(getattr(b, f) for f in BAT_FIELDS) <= 0:
            raise ValueError(f"{p}: battery {b.id} has a nonpositive parameter")
    if not acts or not bats:
        raise ValueError(f"{p}: catalog needs at least one actuator and one battery")
    return Catalog(acts, bats)


def sample_space(catalog: Catalog, profile: TaskProfile, fraction: float = 0.05,
                 level: float = 0.90, missions_fraction: float | None = None) -> SampleSpace:
    """Omega = task x batteries x actuators, in that order."""
    mf = fraction if missions_fraction is None else missions_fraction
    params = [ParamSpec(MISSIONS, profile.num_missions, "count", mf, level, 0.0, True, "T")]
    units = {"energy_density": "Wh/kg", "energy_per_cost": "Wh/$", "cycles": "count", "p0": "W", "p1": "W/N^2"}
    for b in catalog.batteries:
        params += [ParamSpec(f"{b.id}.{k}", getattr(b, k), units[k], fraction, level, 0.0, False, "B")
                   for k in BAT_RANDOM]
    for a in catalog.actuators:
        params += [ParamSpec(f"{a.id}.{k}", getattr(a, k), units[k], fraction, level, 0.0, False, "A")
                   for k in ACT_RANDOM]
    return SampleSpace(tuple(params))


class OmegaLayout:
    """Scatter omega rows into the kernel's actuator/battery/mission arrays."""

    def __init__(self, catalog: Catalog, space: SampleSpace):
        self.catalog, self.space = catalog, space
        act, bat = catalog.arrays()
        self._act0, self._bat0 = act, bat
        self._act_idx = [(i, ACT_FIELDS.index(k), space.index(f"{a.id}.{k}"))
                         for i, a in enumerate(catalog.actuators) for k in ACT_RANDOM]
        self._bat_idx = [(i, BAT_FIELDS.index(k), space.index(f"{b.id}.{k}"))
                         for i, b in enumerate(catalog.batteries) for k in BAT_RANDOM]
        self.missions = space.index(MISSIONS)

    def arrays(self, omegas: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        omegas = np.atleast_2d(omegas)
        s = len(omegas)
        act = np.repeat(self._act0[None], s, axis=0)
        bat = np.repeat(self._bat0[None], s, axis=0)
        for i, j, k in self._act_idx:
            act[:, i, j] = omegas[:, k]
        for i, j, k in self._bat_idx:
            bat[:, i, j] = omegas[:, k]
        return act, bat, omegas[:, self.missions].copy()

    def bounded_names(self) -> list[str]:
        """The component parameters covered by the inner-bound rectangle."""
        return [n for n in self.space.names if n != MISSIONS]


def param_names() -> list[str]:
    return [f.name for f in fields(UavParams)]
