"""Run configuration: a flat TOML table of typed fields, fully defaulted.

The canonical schema lives in ``docs/config.md``.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from . import _toml

EXPERIMENTS = ("deterministic", "interval", "distributional", "adaptive", "selftest")
FORMATS = ("csv", "json", "svg")
BACKENDS = ("", "numba", "numpy")
OUT_ENV = "CODESIGN_OUT"


class ConfigError(ValueError):
    """Invalid configuration; ``field`` and ``line`` locate the offending entry when known."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None, source: str = ""):
        self.field, self.line, self.source = field, line, source
        where = ":".join(str(x) for x in (source, line) if x)
        prefix = f"{where}: " if where else ""
        super().__init__(f"{prefix}{field + ': ' if field else ''}{message}")


def default_out() -> str:
    return os.environ.get(OUT_ENV, "results")


@dataclass(frozen=True)
class RunConfig:
    experiment: str = "distributional"
    catalog: str = ""  # empty: the catalog shipped with the package
    payloads: tuple[float, ...] = tuple(500.0 * k for k in range(8))  # g
    n: int = 2000
    seed: int = 0
    rho: float = 0.9
    frac: float = 0.05
    workers: int = 1
    out: str = field(default_factory=default_out)
    formats: tuple[str, ...] = ("csv",)
    inner_n: int = 200
    policy_n: int = 1000
    backend: str = ""

    def __post_init__(self):
        object.__setattr__(self, "payloads", tuple(float(w) for w in self.payloads))
        object.__setattr__(self, "formats", tuple(self.formats))
        validate(self)

    def content_hash(self) -> str:
        """Hash of every field that can change results (the output directory cannot)."""
        d = asdict(self)
        d.pop("out")
        d.pop("workers")
        d.pop("formats")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def validate(c: RunConfig) -> None:
    if c.experiment not in EXPERIMENTS:
        raise ConfigError(f"must be one of {EXPERIMENTS}, got {c.experiment!r}", "experiment")
    for name in ("n", "workers", "inner_n", "policy_n"):
        v = getattr(c, name)
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ConfigError(f"must be an integer >= 1, got {v!r}", name)
    if isinstance(c.seed, bool) or not isinstance(c.seed, int) or not 0 <= c.seed < 2 ** 64:
        raise ConfigError(f"must be an unsigned 64-bit integer, got {c.seed!r}", "seed")
    if not 0 < c.rho < 1:
        raise ConfigError(f"must lie in (0, 1), got {c.rho!r}", "rho")
    if not 0 <= c.frac < 1:
        raise ConfigError(f"must lie in [0, 1), got {c.frac!r}", "frac")
    if not c.payloads:
        raise ConfigError("must not be empty", "payloads")
    if any(not math.isfinite(w) or w < 0 for w in c.payloads):
        raise ConfigError("must be finite and nonnegative", "payloads")
    if any(b <= a for a, b in zip(c.payloads, c.payloads[1:])):
        raise ConfigError("must be strictly increasing", "payloads")
    bad = [f for f in c.formats if f not in FORMATS]
    if bad or not c.formats:
        raise ConfigError(f"must be a nonempty subset of {FORMATS}, got {list(c.formats)}", "formats")
    if c.backend not in BACKENDS:
        raise ConfigError(f"must be one of {BACKENDS}", "backend")


_TYPES: dict[str, tuple[type, ...]] = {
    "experiment": (str,), "catalog": (str,), "payloads": (list,), "n": (int,), "seed": (int,),
    "rho": (float, int), "frac": (float, int), "workers": (int,), "out": (str,), "formats": (list,),
    "inner_n": (int,), "policy_n": (int,), "backend": (str,),
}
assert set(_TYPES) == {f.name for f in fields(RunConfig)}


def _line_of(text: str, key: str) -> int | None:
    m = re.search(rf"^[ \t]*{re.escape(key)}[ \t]*=", text, re.MULTILINE)
    return text.count("\n", 0, m.start()) + 1 if m else None


def parse_config(text: str, source: str = "") -> RunConfig:
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as e:
        m = re.search(r"line (\d+)", str(e))
        raise ConfigError(f"parse error: {e}", line=int(m.group(1)) if m else None, source=source) from None
    kw: dict[str, Any] = {}
    for key, value in raw.items():
        line = _line_of(text, key)
        if key not in _TYPES:
            raise ConfigError(f"unknown key (expected one of {sorted(_TYPES)})", key, line, source)
        if isinstance(value, bool) or not isinstance(value, _TYPES[key]):
            raise ConfigError(f"has type {type(value).__name__}, expected {_TYPES[key][0].__name__}",
                              key, line, source)
        if key == "payloads" and not all(isinstance(w, (int, float)) and not isinstance(w, bool) for w in value):
            raise ConfigError("must be a list of numbers", key, line, source)
        if key == "formats" and not all(isinstance(f, str) for f in value):
            raise ConfigError("must be a list of strings", key, line, source)
        kw[key] = tuple(value) if isinstance(value, list) else value
    try:
        return RunConfig(**kw)
    except ConfigError as e:
        raise ConfigError(str(e).split(": ", 1)[-1], e.field, _line_of(text, e.field or ""), source) from None


def load_config(path: str | os.PathLike) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", source=str(p)) from None
    return parse_config(text, str(p))
