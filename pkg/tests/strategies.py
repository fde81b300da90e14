"""Hypothesis strategies shared by the algebra tests."""

from hypothesis import strategies as st

from codesign.dp import dp_from_function
from codesign.poset import DECREASING, INCREASING, PosetDescriptor, leq

small = st.integers(0, 4).map(float)
directions = st.sampled_from([INCREASING, DECREASING])


@st.composite
def descriptors(draw, max_dim=3):
    k = draw(st.integers(1, max_dim))
    return PosetDescriptor(k, tuple(draw(directions) for _ in range(k)))


def points(desc, values=small):
    return st.tuples(*([values] * desc.dimension))


@st.composite
def desc_and_points(draw, n=3, max_dim=3):
    d = draw(descriptors(max_dim))
    return d, [draw(points(d)) for _ in range(n)]


def table_dp_from(fun, res, impls, label="table"):
    """``f -> minimal {r : (f', r) in impls, f <= f'}``: monotone by construction."""
    impls = list(impls)

    def ev(f):
        return [r for fi, r in impls if leq(fun, f, fi)]

    return dp_from_function(fun, res, ev, label)


@st.composite
def table_dps(draw, fun, res, max_impls=4):
    k = draw(st.integers(0, max_impls))
    impls = [(draw(points(fun)), draw(points(res))) for _ in range(k)]
    return table_dp_from(fun, res, impls)
