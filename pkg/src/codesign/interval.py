"""Pessimistic/optimistic pairs of design problems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from . import dp as _dp
from .dp import DesignProblem, feasible

HARMFUL = -1  # larger value shrinks the feasible set
HELPFUL = 1

# direction of each parameter attribute, keyed by the part after the last dot
PARAM_DIRECTIONS: dict[str, int] = {
    "p0": HARMFUL,
    "p1": HARMFUL,
    "mass": HARMFUL,
    "cost": HARMFUL,
    "num_missions": HARMFUL,
    "energy_density": HELPFUL,
    "energy_per_cost": HELPFUL,
    "cycles": HELPFUL,
    "v_max": HELPFUL,
}


def param_direction(name: str) -> int:
    attr = name.rsplit(".", 1)[-1]
    try:
        return PARAM_DIRECTIONS[attr]
    except KeyError:
        raise ValueError(f"no monotone direction declared for parameter {name!r}") from None


@dataclass(frozen=True)
class DPInterval:
    lower: DesignProblem  # pessimistic
    upper: DesignProblem  # optimistic

    def __post_init__(self):
        if not (self.lower.fun.compatible(self.upper.fun) and self.lower.res.compatible(self.upper.res)):
            raise ValueError("interval endpoints must share descriptors")

    @classmethod
    def degenerate(cls, dp: DesignProblem) -> "DPInterval":
        return cls(dp, dp)

    def violations(self, probes: Iterable[tuple[Sequence[float], Sequence[float]]]) -> list:
        """Probe pairs feasible for the pessimistic DP but not for the optimistic one."""
        return [(f, r) for f, r in probes if feasible(self.lower, f, r) and not feasible(self.upper, f, r)]

    def contains(self, dp: DesignProblem, probes) -> bool:
        """``lower ⊆ dp ⊆ upper`` on the given probe pairs."""
        for f, r in probes:
            inside = feasible(dp, f, r)
            if feasible(self.lower, f, r) and not inside:
                return False
            if inside and not feasible(self.upper, f, r):
                return False
        return True


_OPS: dict[str, Callable[..., DesignProblem]] = {
    "series": _dp.series,
    "parallel": _dp.parallel,
    "union": _dp.union,
    "intersection": _dp.intersection,
    "trace": _dp.trace,
}


def lift_op(op: str | Callable[..., DesignProblem], *intervals: DPInterval, **kwargs) -> DPInterval:
    """Apply a monotone DP operation endpoint-wise.

    ``kwargs`` are passed to the operation unchanged (e.g. ``loop=`` for trace).
    """
    fn = _OPS[op] if isinstance(op, str) else op
    if op == "trace" and "loop" in kwargs:
        loop = kwargs.pop("loop")
        (iv,) = intervals
        return DPInterval(fn(iv.lower, loop, **kwargs), fn(iv.upper, loop, **kwargs))
    return DPInterval(fn(*(iv.lower for iv in intervals), **kwargs),
                      fn(*(iv.upper for iv in intervals), **kwargs))


def perturb_params(nominal: Mapping[str, float], frac: float,
                   exempt: Iterable[str] = ("v_max",),
                   directions: Callable[[str], int] = param_direction
                   ) -> tuple[dict[str, float], dict[str, float]]:
    """Return ``(pessimistic, optimistic)`` tables scaled by ``1 ± frac``.

    Parameters whose attribute name is in ``exempt`` keep their nominal value.
    """
    if not 0 <= frac < 1:
        raise ValueError("frac must lie in [0, 1)")
    skip = set(exempt)
    pes, opt = {}, {}
    for name, v in nominal.items():
        if name.rsplit(".", 1)[-1] in skip or name in skip:
            pes[name] = opt[name] = v
            continue
        d = directions(name)
        worse, better = (v * (1 + frac), v * (1 - frac)) if d == HARMFUL else (v * (1 - frac), v * (1 + frac))
        pes[name], opt[name] = worse, better
    return pes, opt
