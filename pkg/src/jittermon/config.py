"""Scenario configuration: a versioned YAML schema with explicit units.

Every key name carries its unit (``_bps``, ``_s``, ``_us``, ``_bytes``).
Unknown keys are rejected and errors name the key and its line.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import yaml

from jittermon.core import NS_PER_US, SimTime, seconds

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = ""
        if key is not None:
            where = f"key '{key}'"
            if line is not None:
                where += f" (line {line})"
            where += ": "
        super().__init__(where + message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class TopologyConfig:
    switches: int = 3
    switch_link_bps: int = 100_000_000
    host_link_bps: int = 1_000_000_000
    propagation_us: int = 50
    queue_capacity: int = 100

    @property
    def propagation(self) -> SimTime:
        return self.propagation_us * NS_PER_US


@dataclass(frozen=True)
class TaggedConfig:
    rate_bps: int
    packet_size_bytes: int = 1500
    # sender scheduling noise, U[0, send_jitter_us) per packet
    send_jitter_us: int = 0


@dataclass(frozen=True)
class CrossConfig:
    enabled: bool = True
    packet_size_bytes: int = 1000
    on_s: tuple[float, float] = (0.5, 2.0)
    off_s: tuple[float, float] = (0.5, 3.0)
    rate_bps: tuple[float, float] = (2e6, 12e6)
    arrivals: str = "poisson"


@dataclass(frozen=True)
class ControllerConfig:
    interval_s: float = 1.0
    counters: str = "flow"

    @property
    def interval(self) -> SimTime:
        return seconds(self.interval_s)


EWMA_SHIFTS = {"7/8": 3, "15/16": 4}


@dataclass(frozen=True)
class DataplaneConfig:
    m: int = 4
    kinds: tuple[str, ...] = ("euclid", "manhattan")
    switches: tuple[str, ...] = ("S2", "S3")
    ewma: str | None = None

    @property
    def window(self) -> int:
        return (1 << self.m) + 1

    @property
    def ewma_shift(self) -> int | None:
        return None if self.ewma is None else EWMA_SHIFTS[self.ewma]


@dataclass(frozen=True)
class GroundTruthSettings:
    interval_statistic: str = "mean_abs_consecutive"


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    duration_s: float
    tagged: TaggedConfig
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    cross: CrossConfig = field(default_factory=CrossConfig)
    controller: ControllerConfig | None = None
    dataplane: DataplaneConfig | None = None
    ground_truth: GroundTruthSettings = field(default_factory=GroundTruthSettings)
    seeds: tuple[int, ...] = (1,)
    output_dir: str = "out"

    @property
    def duration(self) -> SimTime:
        return seconds(self.duration_s)

    def with_overrides(self, **kw: Any) -> "ScenarioConfig":
        return replace(self, **kw)


# -- schema ---------------------------------------------------------------------------


def _int(v: Any) -> int:
    if isinstance(v, bool):
        raise TypeError
    if isinstance(v, float) and v.is_integer():
        return int(v)
    if isinstance(v, str):
        return _int(float(v))
    if not isinstance(v, int):
        raise TypeError
    return v


def _float(v: Any) -> float:
    if isinstance(v, bool):
        raise TypeError
    return float(v)


def _bool(v: Any) -> bool:
    if not isinstance(v, bool):
        raise TypeError
    return v


def _str(v: Any) -> str:
    if not isinstance(v, str):
        raise TypeError
    return v


def _pair(v: Any) -> tuple[float, float]:
    if not isinstance(v, list) or len(v) != 2:
        raise TypeError
    lo, hi = _float(v[0]), _float(v[1])
    if not 0 < lo <= hi:
        raise ValueError("need 0 < low <= high")
    return lo, hi


def _choice(*options: str) -> Callable[[Any], str]:
    def conv(v: Any) -> str:
        v = _str(v)
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return conv


def _str_list(v: Any) -> tuple[str, ...]:
    if not isinstance(v, list):
        raise TypeError
    return tuple(_str(x) for x in v)


def _seeds(v: Any) -> tuple[int, ...]:
    if isinstance(v, str):
        return tuple(parse_seeds(v))
    if not isinstance(v, list) or not v:
        raise TypeError
    return tuple(_int(x) for x in v)


def _ewma(v: Any) -> str | None:
    if v is None or v == "none":
        return None
    v = str(v)
    if v not in EWMA_SHIFTS:
        raise ValueError("expected 7/8, 15/16 or none")
    return v


def _positive(conv: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def check(v: Any) -> Any:
        out = conv(v)
        if out <= 0:
            raise ValueError("must be > 0")
        return out

    return check


Section = dict[str, tuple[Callable[[Any], Any], bool]]

TOPOLOGY: Section = {
    "switches": (_positive(_int), False),
    "switch_link_bps": (_positive(_int), False),
    "host_link_bps": (_positive(_int), False),
    "propagation_us": (_int, False),
    "queue_capacity": (_positive(_int), False),
}
TAGGED: Section = {
    "rate_bps": (_positive(_int), True),
    "packet_size_bytes": (_int, False),
    "send_jitter_us": (_int, False),
}
CROSS: Section = {
    "enabled": (_bool, False),
    "packet_size_bytes": (_int, False),
    "on_s": (_pair, False),
    "off_s": (_pair, False),
    "rate_bps": (_pair, False),
    "arrivals": (_choice("cbr", "poisson"), False),
}
CONTROLLER: Section = {
    "interval_s": (_positive(_float), False),
    "counters": (_choice("flow", "port"), False),
}
DATAPLANE: Section = {
    "m": (_int, False),
    "kinds": (_str_list, False),
    "switches": (_str_list, False),
    "ewma": (_ewma, False),
}
GROUND_TRUTH: Section = {
    "interval_statistic": (_choice("mean_abs_consecutive", "std_dev", "sq_std_dev"), False),
}
ESTIMATORS = {"controller": CONTROLLER, "dataplane": DATAPLANE}
TOP: dict[str, tuple[Any, bool]] = {
    "version": (_int, True),
    "name": (_str, False),
    "duration_s": (_positive(_float), True),
    "seeds": (_seeds, False),
    "output_dir": (_str, False),
    "topology": (TOPOLOGY, False),
    "tagged": (TAGGED, True),
    "cross": (CROSS, False),
    "estimators": (ESTIMATORS, True),
    "ground_truth": (GROUND_TRUTH, False),
}


def _walk(node: yaml.Node, schema: dict, path: str) -> dict[str, Any]:
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("expected a mapping", path or "<root>", node.start_mark.line + 1)
    out: dict[str, Any] = {}
    for key_node, value_node in node.value:
        key = key_node.value
        dotted = f"{path}.{key}" if path else key
        line = key_node.start_mark.line + 1
        if key not in schema:
            raise ConfigError("unknown key", dotted, line)
        if key in out:
            raise ConfigError("duplicate key", dotted, line)
        entry = schema[key]
        conv, _required = entry if isinstance(entry, tuple) else (entry, False)
        if isinstance(conv, dict):
            if isinstance(value_node, yaml.ScalarNode) and value_node.tag.endswith(":null"):
                out[key] = None
                continue
            out[key] = _walk(value_node, conv, dotted)
            continue
        value = yaml.safe_load(yaml.serialize(value_node))
        try:
            out[key] = conv(value)
        except (TypeError, ValueError) as exc:
            msg = str(exc) or f"bad value {value!r}"
            raise ConfigError(msg, dotted, line) from None
    for key, entry in schema.items():
        required = entry[1] if isinstance(entry, tuple) else False
        if required and key not in out:
            dotted = f"{path}.{key}" if path else key
            raise ConfigError("missing required key", dotted, node.start_mark.line + 1)
    return out


def parse_config(text: str, default_name: str = "custom") -> ScenarioConfig:
    try:
        root = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"not valid YAML: {exc}", None, mark.line + 1 if mark else None) from None
    if root is None:
        raise ConfigError("empty configuration")
    raw = _walk(root, TOP, "")
    if raw["version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {raw['version']}", "version")
    est = raw["estimators"] or {}
    if "controller" not in est and "dataplane" not in est:
        raise ConfigError("select at least one of controller, dataplane", "estimators")
    try:
        dp = DataplaneConfig(**(est["dataplane"] or {})) if "dataplane" in est else None
        if dp is not None:
            for kind in dp.kinds:
                if kind not in ("euclid", "manhattan"):
                    raise ConfigError(f"unknown data-plane estimator {kind!r}", "estimators.dataplane.kinds")
            if not 1 <= dp.m <= 16:
                raise ConfigError("window exponent must be in [1, 16]", "estimators.dataplane.m")
        return ScenarioConfig(
            name=raw.get("name", default_name),
            duration_s=raw["duration_s"],
            tagged=TaggedConfig(**raw["tagged"]),
            topology=TopologyConfig(**(raw.get("topology") or {})),
            cross=CrossConfig(**(raw.get("cross") or {})),
            controller=ControllerConfig(**(est["controller"] or {})) if "controller" in est else None,
            dataplane=dp,
            ground_truth=GroundTruthSettings(**(raw.get("ground_truth") or {})),
            seeds=raw.get("seeds", (1,)),
            output_dir=raw.get("output_dir", "out"),
        )
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    return parse_config(path.read_text(), default_name=path.stem)


def parse_seeds(text: str) -> list[int]:
    """'1..10', '3', '1,4,7' or a mix like '1..3,9'."""
    seeds: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError(f"empty seed range {part!r}")
            seeds.extend(range(a, b + 1))
        else:
            seeds.append(int(part))
    if not seeds:
        raise ValueError("no seeds given")
    return seeds
