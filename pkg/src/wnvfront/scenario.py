"""Scenario text format: flat sections of typed key-value pairs.

A scenario fixes the epidemic parameters, the initial profile family, the
solver configuration, the requested analyses, and optionally a sweep over
parameter axes. Parsing is strict: unknown sections or keys are hard
errors with line and column positions, and every value is validated
against the owning module's rules before any run starts.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

from .frontsolver import InitialData, SolverConfig, bump_initial, cosine_initial, tabulated_initial
from .model import EpidemicParams, ParameterError, validate_params

__all__ = [
    "ScenarioParseError",
    "InitSpec",
    "Scenario",
    "SweepSpec",
    "parse_scenario",
    "serialize_scenario",
    "build_initial_data",
]

_PROFILE_FAMILIES = ("cosine", "bump", "tabulated")
_ANALYSIS_NAMES = ("thresholds", "classify", "speed", "upper_audit",
                   "lower_audit", "wavespeed")
_DEFAULT_ANALYSES = ("thresholds", "classify")

_PARAM_KEYS = ("beta_v", "beta_h", "r_v", "d_v", "r_h", "d_h", "gamma_h", "q",
               "n_v_star", "n_h_star", "dv", "dh", "mu", "k_v")
_REQUIRED_PARAM_KEYS = ("beta_v", "beta_h", "r_v", "d_h", "gamma_h",
                        "n_v_star", "n_h_star")
_INIT_KEYS = ("profile", "h0", "amplitude_v", "amplitude_h", "v_table", "h_table")
_SOLVER_KEYS = ("n_xi", "dt_init", "cfl_safety", "t_max", "record_every",
                "dt_max", "stop_width_factor")
_SOLVER_INTS = ("n_xi",)
_ANALYSES_KEYS = ("run",)
_SWEEP_KEYS = ("workers", "axis")
_AXIS_SECTIONS = {"params": _PARAM_KEYS, "init": _INIT_KEYS, "solver": _SOLVER_KEYS}


class ScenarioParseError(ValueError):
    """Parse or validation failure with source position."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class InitSpec:
    """Initial-profile family and its scalar knobs."""

    profile: str = "cosine"
    h0: float = 2.0
    amplitude_v: float = 0.0
    amplitude_h: float = 0.5
    v_table: tuple = ()
    h_table: tuple = ()


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple          # ((dotted path, value tuple), ...)
    parallelism: int = 1


@dataclass(frozen=True)
class Scenario:
    params: EpidemicParams
    init: InitSpec
    solver: SolverConfig
    analyses: tuple = _DEFAULT_ANALYSES
    sweep: SweepSpec | None = None


def _split_line(raw: str, line_no: int):
    text = raw.split("#", 1)[0].rstrip()
    if not text.strip():
        return None
    stripped = text.lstrip()
    col = len(text) - len(stripped) + 1
    if stripped.startswith("["):
        if not stripped.endswith("]"):
            raise ScenarioParseError(line_no, col, "unterminated section header")
        return ("section", stripped[1:-1].strip(), col)
    if "=" not in stripped:
        raise ScenarioParseError(line_no, col, "expected 'key = value'")
    key, value = stripped.split("=", 1)
    if not key.strip():
        raise ScenarioParseError(line_no, col, "empty key")
    value_col = col + len(key) + 1
    return ("pair", key.strip(), value.strip(), col, value_col)


def _parse_float(token: str, line: int, col: int, key: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ScenarioParseError(line, col, f"value for '{key}' is not a number: {token!r}") from None


def _parse_int(token: str, line: int, col: int, key: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ScenarioParseError(line, col, f"value for '{key}' is not an integer: {token!r}") from None


def _parse_float_list(token: str, line: int, col: int, key: str) -> tuple:
    parts = [part.strip() for part in token.split(",") if part.strip()]
    if not parts:
        raise ScenarioParseError(line, col, f"'{key}' needs at least one value")
    return tuple(_parse_float(part, line, col, key) for part in parts)


def _parse_axis(token: str, line: int, col: int) -> tuple:
    if ":" not in token:
        raise ScenarioParseError(line, col, "axis needs the form 'section.key : v1, v2'")
    path, values = token.split(":", 1)
    path = path.strip()
    if "." not in path:
        raise ScenarioParseError(line, col, f"axis path '{path}' must be section.key")
    section, key = path.split(".", 1)
    if section not in _AXIS_SECTIONS:
        raise ScenarioParseError(line, col, f"axis section '{section}' unknown")
    if key not in _AXIS_SECTIONS[section]:
        raise ScenarioParseError(line, col, f"axis key '{key}' unknown in [{section}]")
    return path, _parse_float_list(values, line, col, "axis")


def parse_scenario(text: str) -> Scenario:
    """Parse and validate scenario text; defaults fill every omitted key."""
    sections: dict[str, dict] = {"params": {}, "init": {}, "solver": {},
                                 "analyses": {}, "sweep": {}}
    positions: dict[tuple, tuple] = {}
    axes: list = []
    current = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        parsed = _split_line(raw, line_no)
        if parsed is None:
            continue
        if parsed[0] == "section":
            _, name, col = parsed
            if name not in sections:
                raise ScenarioParseError(line_no, col, f"unknown section [{name}]")
            current = name
            continue
        _, key, value, col, value_col = parsed
        if current is None:
            raise ScenarioParseError(line_no, col, "key before any [section] header")
        known = {"params": _PARAM_KEYS, "init": _INIT_KEYS, "solver": _SOLVER_KEYS,
                 "analyses": _ANALYSES_KEYS, "sweep": _SWEEP_KEYS}[current]
        if key not in known:
            raise ScenarioParseError(line_no, col, f"unknown key '{key}' in [{current}]")
        if current == "sweep" and key == "axis":
            axes.append(_parse_axis(value, line_no, value_col))
            continue
        if key in sections[current]:
            raise ScenarioParseError(line_no, col, f"duplicate key '{key}' in [{current}]")
        sections[current][key] = value
        positions[(current, key)] = (line_no, value_col)

    def position(section, key):
        return positions.get((section, key), (0, 0))

    # [params]: simplified-mode defaults tie the unspecified birth rates to
    # the death rates so the totals stay constant.
    raw_params = sections["params"]
    values = {}
    for key, token in raw_params.items():
        line, col = position("params", key)
        values[key] = _parse_float(token, line, col, key)
    for key in _REQUIRED_PARAM_KEYS:
        if key not in values:
            raise ScenarioParseError(0, 0, f"missing required key '{key}' in [params]")
    values.setdefault("d_v", values["r_v"])
    values.setdefault("r_h", values["d_h"])
    values.setdefault("q", 0.0)
    values.setdefault("dv", 0.01)
    values.setdefault("dh", 1.0)
    values.setdefault("mu", 1.0)
    params = EpidemicParams(**values)
    try:
        validate_params(params, mode="simplified")
    except ParameterError as exc:
        # Point at the named key's position when the message starts with one.
        line = col = 0
        for key in values:
            if str(exc).startswith(f"{key} "):
                line, col = position("params", key)
                break
        raise ScenarioParseError(line, col, f"invalid [params]: {exc}") from None

    # [init]
    raw_init = sections["init"]
    init_kwargs = {}
    if "profile" in raw_init:
        profile = raw_init["profile"]
        if profile not in _PROFILE_FAMILIES:
            line, col = position("init", "profile")
            raise ScenarioParseError(line, col,
                                     f"profile must be one of {_PROFILE_FAMILIES}, got '{profile}'")
        init_kwargs["profile"] = profile
    for key in ("h0", "amplitude_v", "amplitude_h"):
        if key in raw_init:
            line, col = position("init", key)
            init_kwargs[key] = _parse_float(raw_init[key], line, col, key)
    for key in ("v_table", "h_table"):
        if key in raw_init:
            line, col = position("init", key)
            init_kwargs[key] = _parse_float_list(raw_init[key], line, col, key)
    init = InitSpec(**init_kwargs)
    if init.h0 <= 0.0:
        line, col = position("init", "h0")
        raise ScenarioParseError(line, col, f"h0 must be positive, got {init.h0}")
    if not (0.0 <= init.amplitude_v <= params.n_v_star):
        line, col = position("init", "amplitude_v")
        raise ScenarioParseError(line, col,
                                 f"amplitude_v must lie in [0, {params.n_v_star}]")
    if not (0.0 <= init.amplitude_h <= params.n_h_star):
        line, col = position("init", "amplitude_h")
        raise ScenarioParseError(line, col,
                                 f"amplitude_h must lie in [0, {params.n_h_star}]")
    if init.profile == "tabulated" and (len(init.v_table) < 3 or len(init.h_table) < 3):
        raise ScenarioParseError(0, 0, "tabulated profile needs v_table and h_table")

    # [solver]
    raw_solver = sections["solver"]
    solver_kwargs = {}
    for key, token in raw_solver.items():
        line, col = position("solver", key)
        if key in _SOLVER_INTS:
            solver_kwargs[key] = _parse_int(token, line, col, key)
        else:
            solver_kwargs[key] = _parse_float(token, line, col, key)
    try:
        solver = SolverConfig(**solver_kwargs)
    except ParameterError as exc:
        raise ScenarioParseError(0, 0, f"invalid [solver]: {exc}") from None

    # [analyses]
    analyses = _DEFAULT_ANALYSES
    if "run" in sections["analyses"]:
        line, col = position("analyses", "run")
        names = tuple(part.strip() for part in sections["analyses"]["run"].split(",")
                      if part.strip())
        if not names:
            raise ScenarioParseError(line, col, "empty analyses list")
        for name in names:
            if name not in _ANALYSIS_NAMES:
                raise ScenarioParseError(line, col,
                                         f"unknown analysis '{name}' (choose from {_ANALYSIS_NAMES})")
        analyses = names

    # [sweep]
    sweep = None
    if axes or sections["sweep"]:
        if not axes:
            raise ScenarioParseError(0, 0, "sweep section needs at least one axis")
        workers = 1
        if "workers" in sections["sweep"]:
            line, col = position("sweep", "workers")
            workers = _parse_int(sections["sweep"]["workers"], line, col, "workers")
            if workers < 1:
                raise ScenarioParseError(line, col, "workers must be at least 1")
        sweep = SweepSpec(axes=tuple(axes), parallelism=workers)

    return Scenario(params=params, init=init, solver=solver,
                    analyses=analyses, sweep=sweep)


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_scenario(scenario: Scenario) -> str:
    """Canonical text for a scenario; parsing it reproduces the scenario."""
    lines = ["[params]"]
    for key in _PARAM_KEYS:
        value = getattr(scenario.params, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    lines.append("")
    lines.append("[init]")
    lines.append(f"profile = {scenario.init.profile}")
    for key in ("h0", "amplitude_v", "amplitude_h"):
        lines.append(f"{key} = {_format_value(getattr(scenario.init, key))}")
    for key in ("v_table", "h_table"):
        table = getattr(scenario.init, key)
        if table:
            lines.append(f"{key} = " + ", ".join(repr(v) for v in table))
    lines.append("")
    lines.append("[solver]")
    for key in _SOLVER_KEYS:
        value = getattr(scenario.solver, key)
        if value is None:
            continue
        lines.append(f"{key} = {_format_value(value)}")
    lines.append("")
    lines.append("[analyses]")
    lines.append("run = " + ", ".join(scenario.analyses))
    if scenario.sweep is not None:
        lines.append("")
        lines.append("[sweep]")
        lines.append(f"workers = {scenario.sweep.parallelism}")
        for path, values in scenario.sweep.axes:
            lines.append(f"axis = {path} : " + ", ".join(repr(v) for v in values))
    return "\n".join(lines) + "\n"


def build_initial_data(scenario: Scenario) -> InitialData:
    """Materialize the initial profiles on the configured solver grid."""
    init = scenario.init
    n_xi = scenario.solver.n_xi
    if init.profile == "cosine":
        return cosine_initial(init.h0, init.amplitude_v, init.amplitude_h, n_xi)
    if init.profile == "bump":
        return bump_initial(init.h0, init.amplitude_v, init.amplitude_h, n_xi)
    return tabulated_initial(init.h0, init.v_table, init.h_table, n_xi)


def apply_axis_value(scenario: Scenario, path: str, value: float) -> Scenario:
    """Return a scenario with one dotted-path field replaced."""
    section, key = path.split(".", 1)
    if section == "params":
        return replace(scenario, params=scenario.params.with_changes(**{key: value}))
    if section == "init":
        return replace(scenario, init=replace(scenario.init, **{key: value}))
    if section == "solver":
        if key in _SOLVER_INTS:
            value = int(value)
        return replace(scenario, solver=replace(scenario.solver, **{key: value}))
    raise ParameterError(f"unknown axis section '{section}'")
