"""TOML scenario files: parse into a validated :class:`ScenarioConfig` and back.

Every section maps onto one config dataclass. Absent keys take the dataclass
defaults (or the named preset's object and path); unknown keys are errors.
A file must name either a ``preset`` or give both ``[coupling] kind`` and a
``[path]`` with segments.

Example::

    name = "demo"
    preset = "experiment_object"
    controller = "aci"

    [aci]
    window = 0.25

    [mocap]
    latency = 0.06
"""
from __future__ import annotations

import math
import re
import sys
from dataclasses import fields, replace
from pathlib import Path

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .aci import AciGains
from .config import MocapConfig, HumanConfig, ScenarioConfig, preset
from .coupling import CouplingModel, FtNoise
from .errors import ConfigurationError
from .hqp import DampingSchedule, HqpWeights
from .human import PathScript, Segment
from .kinematics import RobotModel

TOP_LEVEL = ("name", "preset", "controller", "dt", "max_duration", "settle_time", "q0", "speed_limits")

# section name -> (ScenarioConfig attribute, dataclass)
SECTIONS = {
    "robot": ("robot", RobotModel),
    "wbc": ("weights", HqpWeights),
    "damping": ("damping", DampingSchedule),
    "aci": ("aci", AciGains),
    "coupling": ("coupling", CouplingModel),
    "ft": ("ft", FtNoise),
    "mocap": ("mocap", MocapConfig),
    "human": ("human", HumanConfig),
}
PATH_KEYS = ("dwell", "segments")


def _public_fields(cls) -> tuple:
    return tuple(f.name for f in fields(cls) if f.init and not f.name.startswith("_"))


class _Locator:
    """Maps (section, key) to a line number of the source text for error messages."""

    _header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.-]+)\s*\]")
    _key = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")

    def __init__(self, text: str, source: str):
        self.source = source
        self.keys = {}
        self.sections = {}
        section = ""
        for lineno, line in enumerate(text.splitlines(), start=1):
            m = self._header.match(line)
            if m:
                section = m.group(1)
                self.sections.setdefault(section, lineno)
                continue
            m = self._key.match(line)
            if m:
                self.keys.setdefault((section, m.group(1)), lineno)

    def where(self, section: str = "", key: str | None = None) -> str:
        line = self.keys.get((section, key)) if key else None
        if line is None:
            line = self.sections.get(section)
        label = f"[{section}] " if section else ""
        label += key if key else ""
        if line is None:
            return f"{self.source}: {label.strip() or 'file'}"
        return f"{self.source}:{line}: {label.strip()}"

    def error(self, section: str, key: str | None, message: str) -> ConfigurationError:
        return ConfigurationError(f"{self.where(section, key)}: {message}")


def _blame(message: str, names) -> str | None:
    """First field name mentioned in a validation message, if any."""
    for name in sorted(names, key=len, reverse=True):
        if re.search(rf"\b{re.escape(name)}\b", message):
            return name
    return None


def _build_section(loc: _Locator, section: str, table, base):
    attr, cls = SECTIONS[section]
    if not isinstance(table, dict):
        raise loc.error(section, None, "must be a table")
    allowed = _public_fields(cls)
    for key in table:
        if key not in allowed:
            raise loc.error(section, key, f"unknown key {key!r}; allowed: {', '.join(allowed)}")
    try:
        return replace(base, **table) if base is not None else cls(**table)
    except ConfigurationError as exc:
        raise loc.error(section, _blame(str(exc), table), str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise loc.error(section, _blame(str(exc), table), f"invalid value: {exc}") from None


def _build_path(loc: _Locator, table) -> PathScript:
    if not isinstance(table, dict):
        raise loc.error("path", None, "must be a table")
    for key in table:
        if key not in PATH_KEYS:
            raise loc.error("path", key, f"unknown key {key!r}; allowed: {', '.join(PATH_KEYS)}")
    if "segments" not in table:
        raise loc.error("path", None, "missing required key 'segments'")
    rows = table["segments"]
    if not isinstance(rows, list) or not rows:
        raise loc.error("path", "segments", "segments must be a non-empty list of [dx, dy, dz, duration, label]")
    segments = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 5:
            raise loc.error("path", "segments", f"segment {i} must be [dx, dy, dz, duration, label]")
        try:
            segments.append(Segment(tuple(row[:3]), row[3], row[4]))
        except (ConfigurationError, TypeError, ValueError) as exc:
            raise loc.error("path", "segments", f"segment {i}: {exc}") from None
    try:
        return PathScript(tuple(segments), table.get("dwell", 1.0))
    except (ConfigurationError, TypeError, ValueError) as exc:
        raise loc.error("path", "dwell", str(exc)) from None


def loads(text: str, source: str = "<scenario>") -> ScenarioConfig:
    """Parse scenario text; errors carry ``source:line`` context."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigurationError(f"{source}: malformed scenario file: {exc}") from None
    loc = _Locator(text, source)

    for key, value in doc.items():
        if key in TOP_LEVEL:
            continue
        if key in SECTIONS or key == "path":
            if not isinstance(value, dict):
                raise loc.error("", key, f"{key!r} must be a [section]")
            continue
        raise loc.error("", key, f"unknown key {key!r}")

    preset_name = doc.get("preset")
    if preset_name is None:
        if "kind" not in doc.get("coupling", {}):
            raise loc.error("coupling", None, "missing required key 'kind' (or name a preset)")
        if "path" not in doc:
            raise loc.error("path", None, "missing required [path] section (or name a preset)")
        cfg = ScenarioConfig(preset="")
    else:
        try:
            cfg = preset(preset_name)
        except ConfigurationError as exc:
            raise loc.error("", "preset", str(exc)) from None

    top = {k: doc[k] for k in TOP_LEVEL if k in doc and k != "preset"}
    for key in ("dt", "max_duration", "settle_time"):
        if key in top:
            value = top[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise loc.error("", key, f"{key} must be a finite number")
            if value < 0.0 or (key != "settle_time" and value == 0.0):
                raise loc.error("", key, f"{key} out of range: {value!r}")

    changes = {}
    for section, table in doc.items():
        if section in SECTIONS:
            attr = SECTIONS[section][0]
            # preset objects are overridden field by field, everything else starts from defaults
            base = cfg.coupling if (section == "coupling" and preset_name is not None) else None
            changes[attr] = _build_section(loc, section, table, base)
    if "path" in doc:
        changes["path"] = _build_path(loc, doc["path"])
    if "name" not in top:
        top["name"] = preset_name or Path(source).stem

    try:
        return replace(cfg, **top, **changes)
    except ConfigurationError as exc:
        key = _blame(str(exc), TOP_LEVEL)
        raise loc.error("", key, str(exc)) from None
    except (TypeError, ValueError) as exc:
        raise loc.error("", _blame(str(exc), TOP_LEVEL), f"invalid value: {exc}") from None


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigurationError(f"cannot read scenario {path}: {exc}") from None
    except UnicodeDecodeError as exc:
        raise ConfigurationError(f"{path}: not UTF-8: {exc}") from None
    return loads(text, str(path))


parse_scenario = load


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        raise ConfigurationError("infinite values cannot be written to a scenario file")
    return value


def to_dict(cfg: ScenarioConfig) -> dict:
    """Fully explicit nested mapping; loading it needs no preset defaults."""
    doc = {
        "name": cfg.name,
        "controller": cfg.controller,
        "dt": cfg.dt,
        "max_duration": cfg.max_duration,
        "settle_time": cfg.settle_time,
        "q0": _plain(cfg.q0),
        "speed_limits": _plain(cfg.speed_limits),
    }
    if cfg.preset:
        doc["preset"] = cfg.preset
    for section, (attr, cls) in SECTIONS.items():
        obj = getattr(cfg, attr)
        doc[section] = {name: _plain(getattr(obj, name)) for name in _public_fields(cls)}
    doc["path"] = {
        "dwell": cfg.path.dwell,
        "segments": [[*s.displacement, s.duration, s.label] for s in cfg.path.segments],
    }
    return doc


def dumps(cfg: ScenarioConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))
