import math
from dataclasses import replace

import numpy as np
import pytest

from codesign.dp import Diagram, Port, dp_from_function, series, union
from codesign.interval import DPInterval, HARMFUL
from codesign.poset import PosetDescriptor
from codesign.streams import substream
from codesign.uncertainty import (
    InnerBound,
    ParamSpec,
    RandomDP,
    SampleSpace,
    check_outer_bound_empirical,
    compose_inner_bounds,
    compose_random,
    constant_random,
    feasibility_probability,
    inner_bound_rect,
    lifted_union_random,
    min_resource_samples,
    r_min,
    sample_block,
    sample_omega,
    sample_omegas,
    sigma_from_calibration,
)
from codesign.uav.catalog import ACT_RANDOM, BAT_RANDOM
from codesign.uav.components import actuator_dp, battery_dp, inject_task, min_cost, system_diagram
from codesign.uav.experiments import experiment_distributional
from oracles import normal_ppf, truncnorm_ppf

D1 = PosetDescriptor.chains(["x"])


def test_sigma_matches_bisection_oracle():
    z = normal_ppf(0.95)
    assert math.isclose(z, 1.6448536269514722, rel_tol=1e-12)
    assert math.isclose(sigma_from_calibration(100.0), 5.0 / z, rel_tol=1e-12)
    assert sigma_from_calibration(100.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        sigma_from_calibration(1.0, 0.05, 1.0)


@pytest.mark.parametrize("nominal,frac,rho", [(100.0, 0.05, 0.9), (3.41, 0.05, 0.5), (1.0, 0.6, 0.9)])
def test_central_interval_matches_oracle(nominal, frac, rho):
    p = ParamSpec("x", nominal, fraction=frac)
    lo, hi = p.central_interval(rho)
    assert math.isclose(lo, truncnorm_ppf((1 - rho) / 2, nominal, p.sigma), rel_tol=1e-9)
    assert math.isclose(hi, truncnorm_ppf((1 + rho) / 2, nominal, p.sigma), rel_tol=1e-9)


def test_calibration_percentiles():
    space = SampleSpace((ParamSpec("x", 100.0),))
    x = sample_block(space, substream(1, 99), 100_000)[:, 0]
    lo, hi = np.quantile(x, [0.05, 0.95])
    assert abs(lo / 95.0 - 1) < 0.005 and abs(hi / 105.0 - 1) < 0.005


def test_truncation_and_integer_rounding():
    space = SampleSpace((ParamSpec("wide", 1.0, fraction=0.9), ParamSpec("n", 10.0, integer=True)))
    x = sample_omegas(space, 3, 2000)
    assert (x[:, 0] >= 0).all()
    assert np.array_equal(x[:, 1], np.ceil(x[:, 1]))
    xb = sample_block(space, substream(3, 5), 2000)
    assert (xb[:, 0] >= 0).all() and abs(xb[:, 0].mean() - x[:, 0].mean()) < 0.1


def test_omega_rows_depend_only_on_seed_and_index():
    space = SampleSpace(tuple(ParamSpec(f"p{i}", 1.0 + i) for i in range(4)))
    full = sample_omegas(space, 11, 20)
    assert np.array_equal(full[7], sample_omegas(space, 11, 1, start=7)[0])
    assert np.array_equal(full[7], sample_omega(space, substream(11, 0, 7)))
    assert not np.array_equal(full, sample_omegas(space, 12, 20))


def _threshold_rdp(space, name="t"):
    """Resource must be at least the realized threshold."""
    return RandomDP(space, lambda v: dp_from_function(D1, D1, lambda f, t=v[name]: [(f[0] + t,)]),
                    {name}, name)


def test_param_view_restricts_access():
    space = SampleSpace((ParamSpec("t", 1.0), ParamSpec("u", 2.0)))
    bad = RandomDP(space, lambda v: dp_from_function(D1, D1, lambda f, u=v["u"]: [(u,)]), {"t"})
    with pytest.raises(KeyError):
        bad.realize(space.nominal())
    with pytest.raises(ValueError):
        RandomDP(space, lambda v: None, {"zzz"})


def test_feasibility_probability_and_rmin():
    space = SampleSpace((ParamSpec("t", 1.0, fraction=0.2),))
    rdp = _threshold_rdp(space)
    p, rad = feasibility_probability(rdp, [((0.0,), (1.0,))], 4000, seed=2)
    assert abs(p - 0.5) < 3 * rad / 1.96 + 1e-3
    s = min_resource_samples(rdp, [(0.5,)], 0, 50, seed=2)
    omegas = sample_omegas(space, 2, 50)
    assert np.allclose(s, 0.5 + omegas[:, 0])
    assert r_min(rdp.realize(np.array([1.0])), [(0.0,), (2.0,)]) == 3.0


def test_inner_bound_level_and_k1_coverage():
    space = SampleSpace((ParamSpec("t", 1.0),))
    rdp = _threshold_rdp(space)
    b = inner_bound_rect(rdp, 0.9, directions=lambda n: HARMFUL)
    assert b.level == 0.9
    lo_t, hi_t = space.params[0].central_interval(0.9)
    assert r_min(b.interval.lower, [(0.0,)]) == pytest.approx(hi_t)
    assert r_min(b.interval.upper, [(0.0,)]) == pytest.approx(lo_t)
    s = min_resource_samples(rdp, [(0.0,)], 0, 10_000, seed=5)
    cover = np.mean((s >= lo_t) & (s <= hi_t))
    se = math.sqrt(0.9 * 0.1 / 10_000)
    assert abs(cover - 0.9) <= 3 * se


def test_compose_random_and_bounds_on_a_chain():
    space = SampleSpace((ParamSpec("t", 1.0), ParamSpec("u", 2.0)))
    a, b = _threshold_rdp(space, "t"), _threshold_rdp(space, "u")
    d = Diagram({"a": dp_from_function(D1, D1, lambda f: [f]), "b": dp_from_function(D1, D1, lambda f: [f])},
                [Port("a", 0)], [Port("b", 0)], [(Port("a", 0), Port("b", 0))])
    comp = compose_random({"a": a, "b": b}, d)
    om = np.array([0.7, 1.9])
    assert r_min(comp.realize(om), [(0.0,)]) == pytest.approx(2.6)
    with pytest.raises(ValueError):
        compose_random({"a": a, "b": _threshold_rdp(space, "t")}, d)
    ba = inner_bound_rect(a, 0.9, directions=lambda n: HARMFUL)
    bb = inner_bound_rect(b, 0.9, directions=lambda n: HARMFUL)
    cb = compose_inner_bounds({"a": ba, "b": bb}, d)
    assert cb.level == pytest.approx(0.81, rel=1e-12)
    hi = space.params[0].central_interval(0.9)[1] + space.params[1].central_interval(0.9)[1]
    assert r_min(cb.interval.lower, [(0.0,)]) == pytest.approx(hi)
    with pytest.raises(ValueError):
        compose_inner_bounds({"a": ba, "b": ba}, d)


def test_lifted_union_and_constant():
    space = SampleSpace((ParamSpec("t", 1.0), ParamSpec("u", 2.0)))
    u = lifted_union_random([_threshold_rdp(space, "t"), _threshold_rdp(space, "u")])
    assert r_min(u.realize(np.array([3.0, 2.5])), [(0.0,)]) == 2.5
    c = constant_random(space, dp_from_function(D1, D1, lambda f: [f]))
    assert c.depends_on == frozenset()


def test_outer_bound_checker():
    space = SampleSpace((ParamSpec("t", 1.0),))
    rdp = _threshold_rdp(space)
    nominal = rdp.realize(space.nominal())
    pr = [((0.0,), (1.0,)), ((0.0,), (1.0 - 1e-9,))]
    p_hat, q_hat = check_outer_bound_empirical(rdp, DPInterval.degenerate(nominal), pr, 2000, seed=1)
    # about half the realizations need more than 1 (missing the first probe the
    # nominal accepts), the rest need less (accepting the second, which it rejects)
    assert abs(p_hat - 0.5) < 0.05 and abs(q_hat - 0.5) < 0.05
    wide = DPInterval(dp_from_function(D1, D1, lambda f: []), dp_from_function(D1, D1, lambda f: [(0.0,)]))
    assert check_outer_bound_empirical(rdp, wide, pr, 200, seed=1) == (0.0, 0.0)


def test_uav_composed_inner_bound_generic_matches_kernel(model):
    """Composed bound via the generic algebra equals the kernel's corner solves."""
    space, cat = model.space, model.catalog

    def actuation(view):
        return union(*(actuator_dp(replace(a, **{k: view[f"{a.id}.{k}"] for k in ACT_RANDOM}))
                       for a in cat.actuators))

    def battery(view):
        return union(*(battery_dp(replace(b, **{k: view[f"{b.id}.{k}"] for k in BAT_RANDOM}))
                       for b in cat.batteries))

    act_deps = {f"{a.id}.{k}" for a in cat.actuators for k in ACT_RANDOM}
    bat_deps = {f"{b.id}.{k}" for b in cat.batteries for k in BAT_RANDOM}
    comps = {"actuation": RandomDP(space, actuation, act_deps), "battery": RandomDP(space, battery, bat_deps)}
    bounds = {k: inner_bound_rect(v, 0.9) for k, v in comps.items()}
    assert all(isinstance(b, InnerBound) for b in bounds.values())
    d = system_diagram(bounds["actuation"].interval.lower, bounds["battery"].interval.lower, model.params)
    p = model.params
    cb = compose_inner_bounds(bounds, d, tol=p.trace_tol, max_iter=p.trace_max_iter, ceiling=p.trace_ceiling)
    assert cb.level == pytest.approx(0.9 ** 30, rel=1e-12)
    payloads = [500.0, 2500.0]
    dist = experiment_distributional(model, payloads, n=4, seed=0)
    inject = inject_task(model.profile)
    for k, w in enumerate(payloads):
        pes = min_cost(series(inject, cb.interval.lower), w)
        opt = min_cost(series(inject, cb.interval.upper), w)
        assert pes == pytest.approx(dist.upper_cost[k], rel=1e-9)
        assert opt == pytest.approx(dist.lower_cost[k], rel=1e-9)
