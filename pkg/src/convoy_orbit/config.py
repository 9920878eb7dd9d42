"""Scenario files.

A scenario is a YAML mapping whose top-level keys mirror the parameter table
of a mission (``N_T``, ``V_T_max``, ``N_A``, ``V_A_min``, ...), plus the
convoy path, agent start-up and run settings. Physically meaningful
quantities have no defaults; only algorithm knobs do.
"""
from __future__ import annotations

import math
from dataclasses import MISSING, dataclass, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from .convoy import ArcConvoy, ConvoyModel, LissajousConvoy, StationaryConvoy, WaypointConvoy
from .speed_control import InfeasibleScenarioError, check_speed_assumption


class ScenarioError(ValueError):
    """Raised for unreadable or invalid scenario files."""


@dataclass(frozen=True)
class ConvoyConfig:
    path: str
    params: Dict[str, Any]


@dataclass(frozen=True)
class AgentInit:
    """Initial agent poses: explicit ``poses`` [(x, y, psi), ...] or a seeded
    uniform draw in a square of ``half_width`` around the convoy centroid."""

    poses: Optional[Tuple[Tuple[float, float, float], ...]] = None
    seed: Optional[int] = None
    half_width: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    N_T: int
    convoy: ConvoyConfig
    speed_profile: str
    V_T_max: float
    N_A: int
    V_A_min: float
    V_A_max: float
    omega_max: float
    d_c: int
    k_s: float
    k_psi: float
    k_gamma: float
    delta: float
    dt: float
    duration: float
    z_mission: float
    z_separation: float
    k_z: float
    agents: AgentInit
    gamma_Th: float = 0.1
    D_Th: float = 0.1
    alpha: float = 0.2
    integrator: str = "rk4"
    guidance: str = "curvature"
    shape_smoothing: float = 1.0
    use_l1_minor_term: bool = False
    output_dir: Optional[str] = None

    def with_overrides(self, **kw) -> "ScenarioConfig":
        cfg = replace(self, **{k: v for k, v in kw.items() if v is not None})
        validate(cfg)
        return cfg


_REQUIRED = [f.name for f in fields(ScenarioConfig) if f.default is MISSING]
_OPTIONAL = [f.name for f in fields(ScenarioConfig) if f.name not in _REQUIRED]

_CONVOY_KEYS = {
    "stationary": ({"points"}, set()),
    "curve": ({"center", "radius", "spacing", "speed"}, {"start_angle"}),
    "lissajous": ({"center", "A", "B", "lag"}, {"w1", "w2", "phase", "t0"}),
    "waypoints": ({"waypoints", "speed", "spacing"}, {"dwell", "loop"}),
}

_ALTITUDE_KEYS = {"mission": "z_mission", "separation": "z_separation", "k_z": "k_z"}


def _fail(name: str, msg: str):
    raise ScenarioError(f"{name}: {msg}")


def _positive(cfg: ScenarioConfig, *names: str):
    for n in names:
        v = getattr(cfg, n)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            _fail(n, f"must be a positive number, got {v!r}")


def validate(cfg: ScenarioConfig) -> None:
    if cfg.N_T < 2:
        _fail("N_T", f"need at least 2 convoy vehicles, got {cfg.N_T}")
    if not 0 <= cfg.N_A <= 255:
        _fail("N_A", f"must be in 0..255, got {cfg.N_A}")
    if cfg.d_c not in (-1, 1):
        _fail("d_c", f"must be -1 or 1, got {cfg.d_c!r}")
    if not (isinstance(cfg.delta, (int, float)) and 0.0 < cfg.delta <= 1.0):
        _fail("delta", f"must lie in (0, 1], got {cfg.delta!r}")
    _positive(cfg, "omega_max", "k_s", "k_psi", "k_gamma", "dt", "k_z",
              "gamma_Th", "D_Th", "alpha", "shape_smoothing")
    if cfg.duration < 0:
        _fail("duration", f"must be >= 0, got {cfg.duration}")
    if cfg.alpha > 1.0 or cfg.shape_smoothing > 1.0:
        _fail("alpha", "alpha and shape_smoothing must lie in (0, 1]")
    if cfg.z_separation < 0:
        _fail("altitude.separation", "must be >= 0")
    try:
        check_speed_assumption(cfg.V_A_min, cfg.V_A_max, cfg.V_T_max)
    except InfeasibleScenarioError as exc:
        _fail("V_A_min", str(exc))
    if cfg.integrator not in ("rk4", "euler"):
        _fail("integrator", f"must be 'rk4' or 'euler', got {cfg.integrator!r}")
    if cfg.guidance not in ("curvature", "constant"):
        _fail("guidance", f"must be 'curvature' or 'constant', got {cfg.guidance!r}")
    kind = cfg.convoy.path
    if kind not in _CONVOY_KEYS:
        _fail("convoy.path", f"unknown path kind {kind!r}; expected one of {sorted(_CONVOY_KEYS)}")
    req, opt = _CONVOY_KEYS[kind]
    keys = set(cfg.convoy.params)
    if req - keys:
        _fail("convoy", f"missing keys {sorted(req - keys)} for path {kind!r}")
    if keys - req - opt:
        _fail("convoy", f"unknown keys {sorted(keys - req - opt)} for path {kind!r}")
    init = cfg.agents
    if init.poses is not None:
        if len(init.poses) != cfg.N_A:
            _fail("agents.poses", f"need {cfg.N_A} poses, got {len(init.poses)}")
    elif init.seed is None or init.half_width is None or init.half_width <= 0:
        _fail("agents", "give either 'poses' or both 'seed' and a positive 'half_width'")
    try:
        model = build_convoy(cfg)
    except (TypeError, ValueError) as exc:
        _fail("convoy", str(exc))
    if model.n_vehicles != cfg.N_T:
        _fail("N_T", f"convoy path defines {model.n_vehicles} vehicles, N_T={cfg.N_T}")
    if model.max_speed() > cfg.V_T_max:
        _fail("V_T_max", f"convoy moves at up to {model.max_speed()} m/s > V_T_max={cfg.V_T_max}")


def build_convoy(cfg: ScenarioConfig) -> ConvoyModel:
    p = dict(cfg.convoy.params)
    kind = cfg.convoy.path
    if kind == "stationary":
        return StationaryConvoy([tuple(q) for q in p["points"]])
    if kind == "curve":
        return ArcConvoy(cfg.N_T, tuple(p.pop("center")), **p)
    if kind == "lissajous":
        return LissajousConvoy(cfg.N_T, tuple(p.pop("center")), V_max=cfg.V_T_max, **p)
    if kind == "waypoints":
        wps = [tuple(q) for q in p.pop("waypoints")]
        return WaypointConvoy(cfg.N_T, wps, **p)
    raise ScenarioError(f"convoy.path: unknown kind {kind!r}")


def parse_scenario(data: Any, source: str = "<scenario>") -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ScenarioError(f"{source}: top level must be a mapping")
    data = dict(data)
    kw: Dict[str, Any] = {}

    convoy = data.pop("convoy", None)
    if not isinstance(convoy, dict) or "path" not in convoy or "speed_profile" not in convoy:
        _fail("convoy", "mapping with 'path', 'speed_profile' and path parameters required")
    convoy = dict(convoy)
    kind = convoy.pop("path")
    kw["speed_profile"] = str(convoy.pop("speed_profile"))
    kw["convoy"] = ConvoyConfig(kind, convoy)

    alt = data.pop("altitude", None)
    if not isinstance(alt, dict):
        _fail("altitude", "mapping with 'mission', 'separation', 'k_z' required")
    unknown = set(alt) - set(_ALTITUDE_KEYS)
    if unknown:
        _fail("altitude", f"unknown keys {sorted(unknown)}")
    for k, target in _ALTITUDE_KEYS.items():
        if k not in alt:
            _fail(f"altitude.{k}", "missing")
        kw[target] = float(alt[k])

    agents = data.pop("agents", None)
    if not isinstance(agents, dict):
        _fail("agents", "mapping required")
    unknown = set(agents) - {"poses", "seed", "half_width"}
    if unknown:
        _fail("agents", f"unknown keys {sorted(unknown)}")
    poses = agents.get("poses")
    kw["agents"] = AgentInit(
        poses=tuple(tuple(float(v) for v in p) for p in poses) if poses is not None else None,
        seed=agents.get("seed"),
        half_width=agents.get("half_width"),
    )

    allowed = set(_REQUIRED) | set(_OPTIONAL)
    unknown = set(data) - allowed
    if unknown:
        _fail(sorted(unknown)[0], "unknown key")
    for k in _REQUIRED:
        if k in kw:
            continue
        if k not in data:
            _fail(k, "missing")
        kw[k] = data[k]
    for k in _OPTIONAL:
        if k in data:
            kw[k] = data[k]
    for k in ("N_T", "N_A", "d_c"):
        if isinstance(kw[k], bool) or not isinstance(kw[k], int):
            _fail(k, f"must be an integer, got {kw[k]!r}")
    for k in ("V_T_max", "V_A_min", "V_A_max", "omega_max", "k_s", "k_psi", "k_gamma",
              "delta", "dt", "duration", "gamma_Th", "D_Th", "alpha", "shape_smoothing"):
        if k in kw:
            if isinstance(kw[k], bool) or not isinstance(kw[k], (int, float)):
                _fail(k, f"must be a number, got {kw[k]!r}")
            kw[k] = float(kw[k])
    cfg = ScenarioConfig(**kw)
    validate(cfg)
    return cfg


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: YAML parse error: {exc}") from exc
    try:
        return parse_scenario(data, str(path))
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def bundled_scenarios() -> List[str]:
    root = resources.files("convoy_orbit") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_scenario_path(name: str) -> Path:
    path = Path(str(resources.files("convoy_orbit") / "scenarios" / f"{name}.yaml"))
    if not path.exists():
        raise ScenarioError(f"no bundled scenario {name!r}; available: {bundled_scenarios()}")
    return path


def load_bundled(name: str) -> ScenarioConfig:
    return load_scenario(bundled_scenario_path(name))
