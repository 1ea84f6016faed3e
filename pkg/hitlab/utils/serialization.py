"""
Serialization helpers: TOML configs, sorted JSON reports, CSV series and
run-length encoding of integer lists.
"""

import csv
import enum
import io
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Sequence, Union

import tomli_w
from pydantic import BaseModel, TypeAdapter, ValidationError

from ..schemas.system import PointSpec, SystemSpec, format_rational
from ..schemas.window import WindowSet
from .exceptions import ConfigurationError

_system_adapter = TypeAdapter(SystemSpec)
_point_adapter = TypeAdapter(PointSpec)


# ---------------------------------------------------------------------------
# TOML
# ---------------------------------------------------------------------------


def load_toml(text: str) -> Dict[str, Any]:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Malformed config: {e}", invalid_vars={"toml": str(e)}) from e


def dump_toml(data: Dict[str, Any]) -> str:
    return tomli_w.dumps(data)


def system_to_toml(system: SystemSpec) -> str:
    return dump_toml({"system": _system_adapter.dump_python(system, mode="json", exclude_none=True)})


def system_from_toml(text: str) -> SystemSpec:
    data = load_toml(text)
    if "system" not in data:
        raise ConfigurationError("Config has no [system] table", missing_vars=["system"])
    return parse_system(data["system"])


def point_to_toml(point: PointSpec) -> str:
    return dump_toml({"point": _point_adapter.dump_python(point, mode="json", exclude_none=True)})


def point_from_toml(text: str) -> PointSpec:
    data = load_toml(text)
    if "point" not in data:
        raise ConfigurationError("Config has no [point] table", missing_vars=["point"])
    return parse_point(data["point"])


def parse_system(data: Any) -> SystemSpec:
    try:
        return _system_adapter.validate_python(data)
    except ValidationError as e:
        raise ConfigurationError("Invalid system spec", invalid_vars=_errors(e)) from e


def parse_point(data: Any) -> PointSpec:
    try:
        return _point_adapter.validate_python(data)
    except ValidationError as e:
        raise ConfigurationError("Invalid point spec", invalid_vars=_errors(e)) from e


def _errors(e: ValidationError) -> Dict[str, str]:
    return {".".join(str(p) for p in err["loc"]) or "value": err["msg"] for err in e.errors()}


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def _default(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="python")
    if isinstance(obj, Fraction):
        return format_rational(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dump_json(obj: Any) -> str:
    return json.dumps(obj, default=_default, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def to_jsonable(obj: Any) -> Any:
    return json.loads(dump_json(obj))


# ---------------------------------------------------------------------------
# Integer lists and window sets
# ---------------------------------------------------------------------------


def runs(members: Sequence[int]) -> List[List[int]]:
    """Maximal runs of a sorted integer list as [start, length] pairs"""
    out: List[List[int]] = []
    for m in members:
        if out and out[-1][0] + out[-1][1] == m:
            out[-1][1] += 1
        else:
            out.append([m, 1])
    return out


def compress_members(members: Sequence[int], threshold: int) -> Union[List[int], Dict[str, List[List[int]]]]:
    if len(members) > threshold:
        return {"rle": runs(members)}
    return list(members)


def expand_members(data: Union[List[int], Dict[str, List[List[int]]]]) -> List[int]:
    if isinstance(data, dict):
        return [start + i for start, length in data["rle"] for i in range(length)]
    return list(data)


def window_to_csv(ws: WindowSet) -> str:
    return "".join([f"horizon,{ws.horizon}\n"] + [f"{m}\n" for m in ws.members])


def window_from_csv(text: str) -> WindowSet:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    horizon = _read_header(lines)
    return WindowSet.of(horizon, (int(line) for line in lines[1:]))


def window_to_rle_text(ws: WindowSet) -> str:
    return "".join([f"horizon,{ws.horizon}\n"] + [f"{s},{n}\n" for s, n in runs(ws.members)])


def window_from_rle_text(text: str) -> WindowSet:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    horizon = _read_header(lines)
    members: List[int] = []
    for line in lines[1:]:
        start, length = (int(v) for v in line.split(","))
        members.extend(range(start, start + length))
    return WindowSet.of(horizon, members)


def _read_header(lines: List[str]) -> int:
    if not lines or not lines[0].startswith("horizon,"):
        raise ConfigurationError("Window file must start with a 'horizon,H' header", missing_vars=["horizon"])
    return int(lines[0].split(",", 1)[1])


def rows_to_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


__all__ = [
    "load_toml",
    "dump_toml",
    "system_to_toml",
    "system_from_toml",
    "point_to_toml",
    "point_from_toml",
    "parse_system",
    "parse_point",
    "dump_json",
    "to_jsonable",
    "runs",
    "compress_members",
    "expand_members",
    "window_to_csv",
    "window_from_csv",
    "window_to_rle_text",
    "window_from_rle_text",
    "rows_to_csv",
]
