"""Plain-text model configuration.

One ``key = value`` per line, ``#`` starts a comment. Distributions are
written ``exp(rate)``, ``gamma(shape,rate)``, ``uniform(lo,hi)`` or
``det(v)``.

``form = risk``   keys ``x``, ``y``, ``c``
``form = direct`` keys ``t``, ``x``, optional ``first`` (``ordinary``,
                  ``equilibrium`` or a distribution for a modified first interval)
``form = markov`` keys ``states``, ``row<i>`` (comma separated), ``t<i>``/``x<i>``
                  per state left, ``t<i>_<j>``/``x<i>_<j>`` per transition,
                  optional ``initial``, ``reference``

Any form may also set defaults ``level`` and ``horizon``.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import (
    BasisSpec,
    Deterministic,
    Direct,
    DistributionSpec,
    Equilibrium,
    Exponential,
    Gamma,
    Modified,
    Ordinary,
    Risk,
    Uniform,
)
from .errors import CompsumError, ConfigError

_DIST_RE = re.compile(r"^\s*([a-z_]+)\s*\(([^()]*)\)\s*$")
_DISTS = {
    "exp": (Exponential, 1),
    "gamma": (Gamma, 2),
    "uniform": (Uniform, 2),
    "det": (Deterministic, 1),
}


def parse_distribution(text: str) -> DistributionSpec:
    m = _DIST_RE.match(text)
    if not m or m.group(1) not in _DISTS:
        raise ConfigError(f"bad distribution {text!r}; expected exp(r), gamma(k,r), uniform(a,b) or det(v)")
    cls, arity = _DISTS[m.group(1)]
    args = [a.strip() for a in m.group(2).split(",")] if m.group(2).strip() else []
    if len(args) != arity:
        raise ConfigError(f"{m.group(1)} takes {arity} argument(s), got {len(args)}")
    try:
        vals = [float(a) for a in args]
    except ValueError:
        raise ConfigError(f"non-numeric argument in {text!r}") from None
    try:
        return cls(*vals)
    except CompsumError as exc:
        raise ConfigError(f"{text}: {exc}") from None


@dataclass
class ModelConfig:
    basis: object  # BasisSpec or MarkovModulatedBasis
    level: float | None = None
    horizon: float | None = None
    digest: str = ""
    raw: dict = field(default_factory=dict)

    @property
    def form(self) -> str:
        return self.raw.get("form", "")


def parse_config(text: str) -> ModelConfig:
    kv: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key or not val:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in kv:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        kv[key] = val
    form = kv.get("form")
    builders = {"risk": _risk, "direct": _direct, "markov": _markov}
    if form not in builders:
        raise ConfigError("config must set form = risk | direct | markov")
    used = {"form", "level", "horizon"}
    basis = builders[form](kv, used)
    unknown = sorted(set(kv) - used)
    if unknown:
        raise ConfigError(f"unknown keys for form {form}: {', '.join(unknown)}")
    canon = "\n".join(f"{k}={kv[k]}" for k in sorted(kv))
    return ModelConfig(
        basis,
        _float(kv, "level") if "level" in kv else None,
        _float(kv, "horizon") if "horizon" in kv else None,
        hashlib.sha256(canon.encode()).hexdigest()[:16],
        kv,
    )


def load_config(path: str | Path) -> ModelConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


def _need(kv, key, used):
    if key not in kv:
        raise ConfigError(f"missing key {key!r}")
    used.add(key)
    return kv[key]


def _float(kv, key, used=None):
    if used is not None:
        used.add(key)
    try:
        return float(kv[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {kv[key]!r}") from None


def _risk(kv, used) -> BasisSpec:
    x = parse_distribution(_need(kv, "x", used))
    y = parse_distribution(_need(kv, "y", used))
    _need(kv, "c", used)
    try:
        return Risk(x, y, _float(kv, "c"))
    except CompsumError as exc:
        raise ConfigError(str(exc)) from None


def _direct(kv, used) -> BasisSpec:
    t = parse_distribution(_need(kv, "t", used))
    x = parse_distribution(_need(kv, "x", used))
    first = kv.get("first", "ordinary")
    used.add("first")
    if first == "ordinary":
        mode = Ordinary()
    elif first == "equilibrium":
        mode = Equilibrium()
    else:
        mode = Modified(parse_distribution(first))
    try:
        return Direct(t, x, mode)
    except CompsumError as exc:
        raise ConfigError(str(exc)) from None


def _markov(kv, used):
    from .modular import MarkovModulatedBasis

    try:
        k = int(_need(kv, "states", used))
    except ValueError:
        raise ConfigError("states must be an integer") from None
    if k < 1:
        raise ConfigError("states must be positive")
    rows = []
    for i in range(k):
        try:
            rows.append([float(v) for v in _need(kv, f"row{i}", used).split(",")])
        except ValueError:
            raise ConfigError(f"row{i}: non-numeric entry") from None
    if any(len(r) != k for r in rows):
        raise ConfigError(f"each row needs {k} entries")
    tables = {}
    for sym in ("t", "x"):
        tab = [[None] * k for _ in range(k)]
        for i in range(k):
            for j in range(k):
                key = f"{sym}{i}_{j}"
                if key in kv:
                    used.add(key)
                    tab[i][j] = parse_distribution(kv[key])
                elif f"{sym}{i}" in kv:
                    used.add(f"{sym}{i}")
                    tab[i][j] = parse_distribution(kv[f"{sym}{i}"])
                elif rows[i][j] > 0:
                    raise ConfigError(f"no {sym.upper()} law for transition {i}->{j}")
                else:
                    tab[i][j] = Deterministic(1.0)  # never used
        tables[sym] = tuple(tuple(r) for r in tab)
    init = int(_float(kv, "initial", used)) if "initial" in kv else 0
    ref = int(_float(kv, "reference", used)) if "reference" in kv else 0
    try:
        return MarkovModulatedBasis(np.array(rows), tables["t"], tables["x"], init, ref)
    except CompsumError as exc:
        raise ConfigError(str(exc)) from None
