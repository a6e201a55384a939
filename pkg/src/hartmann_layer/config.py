"""JSON run configuration: parsing, defaults and hypothesis gating."""
from dataclasses import dataclass, field
import json

from .errors import ConfigError
from .grid import GridSpec
from .outer import OuterFlow
from .solver import Params

SCENARIOS = ("run", "check", "sweep", "perturb")

_GRID_KEYS = {"nx": int, "ny": int, "y_max": float}
_PARAM_KEYS = {"s": int, "gamma": float, "sigma": float, "delta": float, "eps": float,
               "dt": float, "cfl": float, "t_end": float}
_CHECK_DEFAULTS = {"hardy_lambdas": [0.0, 0.5, 1.0, 2.0, -1.0, -2.0],
                   "n_fields": 100, "n_zero_trace": 50, "n_embedding": 20}


@dataclass
class RunConfig:
    grid: GridSpec = field(default_factory=GridSpec)
    params: Params = field(default_factory=Params)
    outer: OuterFlow = field(default_factory=OuterFlow.constant)
    scenario: str = "run"
    record_every: int = 1
    seed: int = 0
    eps_list: list = field(default_factory=lambda: [0.2, 0.1, 0.05])
    amplitude: float = 0.01
    snapshots: bool = True
    C_P: float = 1.0
    C_s: float = 1.0
    check: dict = field(default_factory=lambda: dict(_CHECK_DEFAULTS))

    def to_dict(self):
        return {"grid": {"nx": self.grid.nx, "ny": self.grid.ny, "y_max": self.grid.y_max},
                "params": self.params.to_dict(), "outer_flow": self.outer.to_dict(),
                "scenario": self.scenario, "record_every": self.record_every, "seed": self.seed,
                "eps_list": list(self.eps_list), "amplitude": self.amplitude,
                "snapshots": self.snapshots, "C_P": self.C_P, "C_s": self.C_s,
                "check": dict(self.check)}


def _typed(section, path, spec):
    if not isinstance(section, dict):
        raise ConfigError(path, "must be an object")
    unknown = set(section) - set(spec)
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")
    out = {}
    for key, kind in spec.items():
        if key not in section:
            continue
        value = section[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}.{key}", f"expected a number, got {value!r}")
        if kind is int and value != int(value):
            raise ConfigError(f"{path}.{key}", "expected an integer")
        out[key] = kind(value)
    return out


def _number(d, key, default, kind=float):
    if key not in d:
        return default
    value = d[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    if kind is int and value != int(value):
        raise ConfigError(key, "expected an integer")
    return kind(value)


def parse_config(text):
    """Parse JSON text into a validated RunConfig; missing entries take their defaults."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be an object")
    allowed = {"grid", "params", "outer_flow", "scenario", "record_every", "seed", "eps_list",
               "amplitude", "snapshots", "C_P", "C_s", "check"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")

    try:
        grid = GridSpec(**_typed(raw.get("grid", {}), "grid", _GRID_KEYS))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("grid", str(exc)) from None

    params = Params(**_typed(raw.get("params", {}), "params", _PARAM_KEYS))
    bad = params.violations()
    if bad:
        key, msg = bad[0]
        raise ConfigError(f"params.{key}", msg)

    outer = OuterFlow.from_dict(raw.get("outer_flow", {}), s=params.s)

    scenario = raw.get("scenario", "run")
    if scenario not in SCENARIOS:
        raise ConfigError("scenario", f"must be one of {', '.join(SCENARIOS)}")
    record_every = _number(raw, "record_every", 1, int)
    if record_every < 1:
        raise ConfigError("record_every", "must be >= 1")
    seed = _number(raw, "seed", 0, int)

    eps_list = raw.get("eps_list", [0.2, 0.1, 0.05])
    if not isinstance(eps_list, list) or len(eps_list) < 2:
        raise ConfigError("eps_list", "must be a list of at least two values")
    eps_list = [_number({f"eps_list[{i}]": e}, f"eps_list[{i}]", None) for i, e in enumerate(eps_list)]
    if any(e < 0 for e in eps_list):
        raise ConfigError("eps_list", "values must be >= 0")

    snapshots = raw.get("snapshots", True)
    if not isinstance(snapshots, bool):
        raise ConfigError("snapshots", "expected true or false")

    check = dict(_CHECK_DEFAULTS)
    user_check = raw.get("check", {})
    if not isinstance(user_check, dict):
        raise ConfigError("check", "must be an object")
    for key, value in user_check.items():
        if key not in _CHECK_DEFAULTS:
            raise ConfigError(f"check.{key}", "unknown key")
        if key.endswith("lambdas"):
            if not isinstance(value, list):
                raise ConfigError(f"check.{key}", "must be a list")
            check[key] = [_number({f"check.{key}": v}, f"check.{key}", None) for v in value]
        else:
            check[key] = _number(user_check, key, None, int)
            if check[key] < 1:
                raise ConfigError(f"check.{key}", "must be >= 1")

    return RunConfig(grid=grid, params=params, outer=outer, scenario=scenario,
                     record_every=record_every, seed=seed, eps_list=eps_list,
                     amplitude=_number(raw, "amplitude", 0.01),
                     snapshots=snapshots, C_P=_number(raw, "C_P", 1.0),
                     C_s=_number(raw, "C_s", 1.0), check=check)
