"""Scenario configs, figure presets and the run pipeline behind the CLI.

A config is a JSON object; see ``docs/config.md`` for the schema.  Unknown
keys are rejected so a typo never silently falls back to a default.
"""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import AccuracyError, ConfigError
from .integrator import IntegrationConfig, ScheduleGenerator, converge, default_dt
from .model import SystemParams
from .pulses import InvariantSchedule, Ordering, Sin4Schedule, TabulatedSchedule

PROTOCOLS = ("sin4", "sin4-cd", "invariant", "tabulated")
OUTPUTS = ("trajectory", "cost", "eigen")
TARGET_ROWS = 4000


@dataclass
class ScenarioConfig:
    protocol: str = "sin4"
    ordering: str = "as-printed"
    G: float | None = None
    tau: float | None = None
    T: float | None = None
    xi: float | None = None
    kappa1: float = 0.0
    kappa2: float = 0.0
    gamma: float = 0.0
    initial_state: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    dt: float | None = None
    record_every: int | None = None
    outputs: list = field(default_factory=lambda: ["trajectory"])
    cd_convention: str = "printed"
    table: str | None = None

    def to_json(self) -> dict:
        return asdict(self)

    @property
    def params(self) -> SystemParams:
        return SystemParams(self.kappa1, self.kappa2, self.gamma)

    def schedule(self):
        if self.protocol in ("sin4", "sin4-cd"):
            return Sin4Schedule(self.G, self.tau, self.T, Ordering(self.ordering))
        if self.protocol == "invariant":
            return InvariantSchedule(self.xi, self.T)
        return TabulatedSchedule.from_csv(self.table)

    def generator(self) -> ScheduleGenerator:
        cd = self.cd_convention if self.protocol == "sin4-cd" else None
        return ScheduleGenerator(self.params, self.schedule(), cd)

    def initial_vector(self) -> np.ndarray:
        return np.array([_to_complex(c) for c in self.initial_state], dtype=complex)


_REQUIRED = {
    "sin4": ("G", "tau", "T"),
    "sin4-cd": ("G", "tau", "T"),
    "invariant": ("xi", "T"),
    "tabulated": ("table",),
}


def _to_complex(c) -> complex:
    if isinstance(c, (list, tuple)):
        return complex(float(c[0]), float(c[1]))
    return complex(float(c), 0.0)


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def config_from_dict(data: dict, text: str | None = None) -> ScenarioConfig:
    """Validate a decoded config mapping; ``text`` (the raw file) is only used
    to attach line numbers to error messages."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = {f.name for f in fields(ScenarioConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", field=key, line=_line_of(text, key))

    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", field=key, line=_line_of(text, key))

    cfg = ScenarioConfig(**data)
    if cfg.protocol not in PROTOCOLS:
        fail("protocol", f"must be one of {PROTOCOLS}")
    try:
        Ordering(cfg.ordering)
    except ValueError:
        fail("ordering", "must be 'as-printed' or 'counterintuitive'")
    if cfg.cd_convention not in ("printed", "exact"):
        fail("cd_convention", "must be 'printed' or 'exact'")
    for key in _REQUIRED[cfg.protocol]:
        if getattr(cfg, key) is None:
            fail(key, f"required for protocol {cfg.protocol!r}")
    for key in ("G", "tau", "T", "xi", "dt"):
        v = getattr(cfg, key)
        if v is not None and not _is_number(v):
            fail(key, "must be a finite number")
    for key in ("kappa1", "kappa2", "gamma"):
        v = getattr(cfg, key)
        if not _is_number(v) or v < 0:
            fail(key, "must be a finite number >= 0")
    if cfg.T is not None and cfg.T <= 0:
        fail("T", "must be > 0")
    if cfg.G is not None and cfg.G < 0:
        fail("G", "must be >= 0")
    if cfg.xi is not None and not 0 < cfg.xi < math.pi / 2:
        fail("xi", "must lie in (0, pi/2)")
    if cfg.dt is not None and cfg.dt <= 0:
        fail("dt", "must be > 0")
    if cfg.record_every is not None and (not isinstance(cfg.record_every, int)
                                         or isinstance(cfg.record_every, bool)
                                         or cfg.record_every < 1):
        fail("record_every", "must be a positive integer")
    if not isinstance(cfg.outputs, list) or any(o not in OUTPUTS for o in cfg.outputs):
        fail("outputs", f"must be a list drawn from {OUTPUTS}")
    st = cfg.initial_state
    try:
        ok = isinstance(st, list) and len(st) == 3 and all(
            np.isfinite(_to_complex(c)) for c in st)
    except (TypeError, ValueError, IndexError):
        ok = False
    if not ok:
        fail("initial_state", "must be three numbers or [re, im] pairs")
    return cfg


def load_config(path) -> ScenarioConfig:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    cfg = config_from_dict(data, text)
    if cfg.table is not None and not os.path.isabs(cfg.table):
        cfg.table = os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(path)), cfg.table))
    return cfg


# Figure presets.  Each carries a banner stating the interpretation it bakes in.
PRESETS = {
    "fig1": (
        {"protocol": "sin4", "ordering": "as-printed", "G": 1000.0, "tau": 0.1, "T": 1.0},
        "fig1: sin^4 pulses, g1 = G f(t), g2 = G f(t - tau) (g1 leads), tau = 0.1 T, "
        "G*T = 1e3 read as G = 1000 rad/us with T = 1 us, no damping.",
    ),
    "fig2": (
        {"protocol": "invariant", "xi": 0.1, "T": 1.0},
        "fig2: invariant-engineered couplings, xi = 0.1, T = 1 us, no damping.",
    ),
    "fig3": (
        {"protocol": "sin4-cd", "ordering": "counterintuitive", "G": 1000.0, "tau": 0.1,
         "T": 1.0, "cd_convention": "printed"},
        "fig3: qualitative reproduction; base schedule not stated for this figure. "
        "Assumed sin^4 with g2 leading (counterintuitive), G = 1000 rad/us, T = 1 us, "
        "tau = 0.1 T, no damping, CD drive with the printed 1/2 strength.",
    ),
}
FIG4_BANNER = ("fig4: d_t C / g0 from sqrt(2 g0^2 - 3 kappa^2/4 + 2 theta^2) with "
               "kappa = 0.01 g0, theta in {0, 0.1pi, 0.2pi, 0.3pi} rad/us.")


def preset_config(name: str) -> tuple[ScenarioConfig, str]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}", field="preset")
    data, banner = PRESETS[name]
    return config_from_dict(dict(data)), banner


@dataclass
class RunResult:
    config: ScenarioConfig
    trajectory: object
    estimate: float
    converged: bool
    dt: float

    @property
    def fidelity(self) -> float:
        return float(self.trajectory.populations[-1, 2])


def resolve(cfg: ScenarioConfig) -> ScenarioConfig:
    """Fill ``dt`` and ``record_every`` so the echoed config replays exactly."""
    schedule = cfg.schedule()
    t0, t1 = schedule.span
    resolved = ScenarioConfig(**cfg.to_json())
    if resolved.dt is None:
        T = cfg.T if cfg.T is not None else (t1 - t0)
        resolved.dt = default_dt(T, schedule.amplitude)
    if resolved.record_every is None:
        n = max(1, round((t1 - t0) / resolved.dt))
        resolved.record_every = max(1, n // TARGET_ROWS)
    return resolved


def run(cfg: ScenarioConfig, use_numba=None) -> RunResult:
    cfg = resolve(cfg)
    gen = cfg.generator()
    t0, t1 = gen.schedule.span
    icfg = IntegrationConfig(t0, t1, cfg.dt, cfg.record_every)
    try:
        traj, est = converge(gen, cfg.initial_vector(), icfg, use_numba=use_numba)
        converged = True
    except AccuracyError as exc:
        traj, est, converged = exc.trajectory, exc.estimate, False
    return RunResult(cfg, traj, est, converged, cfg.dt)


def apply_parameter(base: ScenarioConfig, parameter: str, value) -> ScenarioConfig:
    """Copy of ``base`` with one field replaced; ``"kappa"`` sets all three
    damping rates together."""
    data = base.to_json()
    if parameter == "kappa":
        data.update(kappa1=value, kappa2=value, gamma=value)
    elif parameter in data:
        data[parameter] = value
    else:
        raise ConfigError(f"unknown sweep parameter {parameter!r}", field="parameter")
    return config_from_dict(data)


@dataclass
class SweepSpec:
    parameter: str
    grid: list
    base: ScenarioConfig


def load_sweep(path) -> SweepSpec:
    with open(path) as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return sweep_from_dict(data, text)


def sweep_from_dict(data: dict, text: str | None = None) -> SweepSpec:
    allowed = {"parameter", "grid", "base", "preset"}
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r}", field=key, line=_line_of(text, key))
    if "parameter" not in data or not isinstance(data["parameter"], str):
        raise ConfigError("parameter: required string", field="parameter")
    grid = data.get("grid")
    if not isinstance(grid, list) or not grid or not all(_is_number(v) for v in grid):
        raise ConfigError("grid: must be a non-empty list of finite numbers", field="grid",
                          line=_line_of(text, "grid"))
    if ("base" in data) == ("preset" in data):
        raise ConfigError("exactly one of 'base' or 'preset' is required", field="base")
    if "preset" in data:
        base, _ = preset_config(data["preset"])
    else:
        base = config_from_dict(data["base"], text)
    try:
        for v in grid:
            apply_parameter(base, data["parameter"], v)
    except ConfigError as exc:
        raise ConfigError(str(exc), field=exc.field or "parameter",
                          line=_line_of(text, "parameter")) from None
    return SweepSpec(data["parameter"], list(grid), base)

