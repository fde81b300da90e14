"""Component design problems and the system co-design diagram, built from the generic DP algebra.

This path is exact but slow (Python objects per evaluation). The kernels in
:mod:`codesign.uav.kernels` compute the same composite for many samples at
once; tests check the two against each other.
"""

from __future__ import annotations

import math

from ..dp import (
    DesignProblem,
    Diagram,
    FunctionDP,
    Port,
    dp_from_function,
    series,
    solve_diagram,
    split_dp,
    sum_dp,
    union,
)
from ..poset import PosetDescriptor
from .catalog import ActuatorModel, BatteryTech, TaskProfile, UavParams

ACT_FUN = PosetDescriptor.chains(["velocity", "lift"], ["m/s", "N"])
ACT_RES = PosetDescriptor.chains(["power", "cost", "weight"], ["W", "$", "g"])
BAT_FUN = PosetDescriptor.chains(["capacity", "missions"], ["Wh", "count"])
BAT_RES = PosetDescriptor.chains(["battery_mass", "battery_cost"], ["g", "$"])
SYS_FUN = PosetDescriptor.chains(["payload"], ["g"])
SYS_RES = PosetDescriptor.chains(["lifetime_cost", "self_weight"], ["$", "g"])


def actuator_dp(m: ActuatorModel) -> FunctionDP:
    def ev(f):
        v, lift = f
        if v > m.v_max:
            return ()
        return [(m.p0 + m.p1 * lift * lift, m.cost, m.mass)]

    return dp_from_function(ACT_FUN, ACT_RES, ev, m.id)


def battery_dp(t: BatteryTech) -> FunctionDP:
    def ev(f):
        C, N = f
        return [(C / t.energy_density * 1000.0, C / t.energy_per_cost * math.ceil(N / t.cycles))]

    return dp_from_function(BAT_FUN, BAT_RES, ev, t.id)


def perception_dp(params: UavParams) -> FunctionDP:
    if params.perception_c0 < 0 or params.perception_c1 < 0:
        raise ValueError("perception coefficients must be nonnegative")
    return dp_from_function(PosetDescriptor.chains(["velocity"], ["m/s"]),
                            PosetDescriptor.chains(["power"], ["W"]),
                            lambda f: [(params.perception_power(f[0]),)], "perception")


def task_management_dp(params: UavParams) -> FunctionDP:
    """Task profile (missions, distance, frequency) -> (missions, endurance, velocity)."""
    v = params.cruise_velocity
    return dp_from_function(
        PosetDescriptor.chains(["missions", "distance", "frequency"], ["count", "m", "1/day"]),
        PosetDescriptor.chains(["missions", "endurance", "velocity"], ["count", "s", "m/s"]),
        lambda f: [(f[0], f[1] / v, v)], "task")


def energy_dp() -> FunctionDP:
    """Sustaining ``power`` for ``endurance`` seconds needs ``power * endurance / 3600`` Wh."""
    return dp_from_function(PosetDescriptor.chains(["power", "endurance"], ["W", "s"]),
                            PosetDescriptor.chains(["capacity"], ["Wh"]),
                            lambda f: [(f[0] * f[1] / 3600.0,)], "energy")


def body_dp(params: UavParams) -> FunctionDP:
    """Carrying payload plus component mass needs lift ``g * total / 1000`` N."""
    return dp_from_function(PosetDescriptor.chains(["payload", "component_mass"], ["g", "g"]),
                            PosetDescriptor.chains(["lift"], ["N"]),
                            lambda f: [(params.g * (f[0] + params.frame_mass + f[1]) / 1000.0,)], "body")


def frame_dp(params: UavParams) -> FunctionDP:
    return dp_from_function(PosetDescriptor.chains(["component_mass"], ["g"]),
                            PosetDescriptor.chains(["self_weight"], ["g"]),
                            lambda f: [(f[0] + params.frame_mass,)], "frame")


def _p(node, i):
    return Port(node, i)


def system_diagram(actuation: DesignProblem, battery: DesignProblem, params: UavParams) -> Diagram:
    """Open diagram ``(payload, missions, distance, frequency) -> (cost, self weight)``.

    The total component mass is fed back from its resource to the body's
    functionality.
    """
    nodes = {
        "body": body_dp(params),
        "task": task_management_dp(params),
        "vsplit": split_dp(2, "velocity", "m/s"),
        "actuation": actuation,
        "perception": perception_dp(params),
        "psum": sum_dp(2, "power", "W"),
        "energy": energy_dp(),
        "battery": battery,
        "msum": sum_dp(2, "component_mass", "g"),
        "msplit": split_dp(2, "component_mass", "g"),
        "frame": frame_dp(params),
        "csum": sum_dp(2, "lifetime_cost", "$"),
    }
    edges = [
        (_p("task", 0), _p("battery", 1)),
        (_p("task", 1), _p("energy", 1)),
        (_p("task", 2), _p("vsplit", 0)),
        (_p("vsplit", 0), _p("actuation", 0)),
        (_p("vsplit", 1), _p("perception", 0)),
        (_p("body", 0), _p("actuation", 1)),
        (_p("actuation", 0), _p("psum", 0)),
        (_p("perception", 0), _p("psum", 1)),
        (_p("psum", 0), _p("energy", 0)),
        (_p("energy", 0), _p("battery", 0)),
        (_p("actuation", 1), _p("csum", 0)),
        (_p("battery", 1), _p("csum", 1)),
        (_p("actuation", 2), _p("msum", 0)),
        (_p("battery", 0), _p("msum", 1)),
        (_p("msum", 0), _p("msplit", 0)),
        (_p("msplit", 1), _p("frame", 0)),
    ]
    return Diagram(
        nodes,
        inputs=[_p("body", 0), _p("task", 0), _p("task", 1), _p("task", 2)],
        outputs=[_p("csum", 0), _p("frame", 0)],
        edges=edges,
        feedback=[(_p("msplit", 0), _p("body", 1))],
        label="uav",
    )


def inject_task(profile: TaskProfile, num_missions: float | None = None) -> FunctionDP:
    N = profile.num_missions if num_missions is None else num_missions
    return dp_from_function(
        SYS_FUN, PosetDescriptor.chains(["payload", "missions", "distance", "frequency"]),
        lambda f: [(f[0], N, profile.distance, profile.frequency)], "task_profile")


def as_dp(choice, make) -> DesignProblem:
    """A single catalog entry, a DP, or a sequence of either (free choice)."""
    if isinstance(choice, DesignProblem):
        return choice
    if isinstance(choice, (list, tuple)):
        return union(*(as_dp(c, make) for c in choice))
    return make(choice)


def uav_diagram(actuators, batteries, params: UavParams, profile: TaskProfile,
                num_missions: float | None = None) -> DesignProblem:
    """System DP ``payload -> (lifetime cost, self weight)``."""
    core = solve_diagram(system_diagram(as_dp(actuators, actuator_dp), as_dp(batteries, battery_dp), params),
                         tol=params.trace_tol, max_iter=params.trace_max_iter, ceiling=params.trace_ceiling)
    return series(inject_task(profile, num_missions), core)


def min_cost(dp: DesignProblem, payload: float) -> float:
    return min((p[0] for p in dp.evaluate((payload,))), default=math.inf)


