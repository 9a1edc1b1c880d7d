"""JSON representation of models and strikes, and deterministic report output.

Objects are plain JSON with snake_case field names; variants are selected by a
``"type"`` field. Errors carry a JSON pointer to the offending field.
"""

import dataclasses
import json
import math

from .errors import ConfigError, ValidationError
from .model import (Coefficient, CompoundPoisson, FrozenLevy, GaussianPower, Heston,
                    LevySde, NIG, Stable, StrikeRule, TemperedStable, VarianceGamma)

__all__ = ["parse_jumps", "parse_model", "parse_strike", "parse_config", "load_config",
           "to_json_obj", "dumps"]

_JUMPS = {c.__name__: c for c in (CompoundPoisson, Stable, TemperedStable, NIG, VarianceGamma)}
_MODELS = {c.__name__: c for c in (FrozenLevy, Heston, LevySde, GaussianPower)}


def _esc(key):
    return str(key).replace("~", "~0").replace("/", "~1")


def _number(value, ptr):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {type(value).__name__}", ptr)
    return float(value)


def _fields(cls, obj, ptr, special):
    if not isinstance(obj, dict):
        raise ConfigError(f"expected an object, got {type(obj).__name__}", ptr)
    known = {f.name: f for f in dataclasses.fields(cls)}
    extra = set(obj) - set(known) - {"type"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown field {key!r} for {cls.__name__}", f"{ptr}/{_esc(key)}")
    kwargs = {}
    for name, f in known.items():
        sub = f"{ptr}/{name}"
        if name not in obj:
            if f.default is dataclasses.MISSING:
                raise ConfigError(f"missing required field {name!r}", sub)
            continue
        value = obj[name]
        if name in special:
            kwargs[name] = special[name](value, sub)
        elif value is None and f.default is None:
            kwargs[name] = None
        else:
            kwargs[name] = _number(value, sub)
    try:
        return cls(**kwargs)
    except ValidationError as exc:
        msg = str(exc)
        field = msg.split(" ", 1)[0].split("[", 1)[0].split(".", 1)[0]
        pointer = f"{ptr}/{field}" if field in known else ptr
        if field == "atoms":
            # "atoms[i].name ..." or "atoms[i] ..."
            idx, rest = msg.split("[", 1)[1].split("]", 1)
            pointer = f"{ptr}/atoms/{idx}"
            if rest.startswith("."):
                pointer += "/" + rest[1:].split(" ", 1)[0]
        raise ConfigError(msg, pointer) from None


def _atoms(value, ptr):
    if not isinstance(value, list):
        raise ConfigError("atoms must be a list", ptr)
    out = []
    for i, atom in enumerate(value):
        p = f"{ptr}/{i}"
        if not isinstance(atom, dict) or set(atom) != {"size", "intensity"}:
            raise ConfigError("atom must be an object with 'size' and 'intensity'", p)
        out.append((_number(atom["size"], p + "/size"), _number(atom["intensity"], p + "/intensity")))
    return tuple(out)


def _variant(registry, obj, ptr, special):
    if not isinstance(obj, dict):
        raise ConfigError(f"expected an object, got {type(obj).__name__}", ptr)
    tag = obj.get("type")
    if tag not in registry:
        raise ConfigError(f"'type' must be one of {sorted(registry)}, got {tag!r}", f"{ptr}/type")
    return _fields(registry[tag], obj, ptr, special)


def parse_jumps(obj, ptr=""):
    if obj is None:
        return None
    return _variant(_JUMPS, obj, ptr, {"atoms": _atoms})


def _coefficient(obj, ptr):
    def _id(value, p):
        if not isinstance(value, str):
            raise ConfigError("id must be a string", p)
        return value
    return _fields(Coefficient, obj, ptr, {"id": _id})


def parse_model(obj, ptr=""):
    return _variant(_MODELS, obj, ptr, {
        "jumps": parse_jumps, "driver_jumps": parse_jumps, "coefficient": _coefficient})


def parse_strike(obj, ptr=""):
    return _fields(StrikeRule, {} if obj is None else obj, ptr, {})


def parse_config(doc):
    """``(model, strike)`` from a config document ``{"model": ..., "strike": ...}``."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "")
    if "model" not in doc:
        raise ConfigError("missing required field 'model'", "/model")
    extra = set(doc) - {"model", "strike"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown field {key!r}", f"/{_esc(key)}")
    return parse_model(doc["model"], "/model"), parse_strike(doc.get("strike"), "/strike")


def load_config(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})", "") from None
    return parse_config(doc)


def to_json_obj(obj):
    """Plain JSON structure for a model, jump spec, strike or result dataclass."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        name = type(obj).__name__
        if name in _JUMPS or name in _MODELS:
            out["type"] = name
        for f in dataclasses.fields(obj):
            value = getattr(obj, f.name)
            if isinstance(obj, CompoundPoisson) and f.name == "atoms":
                value = [{"size": s, "intensity": lam} for s, lam in value]
            out[f.name] = to_json_obj(value)
        return out
    if isinstance(obj, (list, tuple)):
        return [to_json_obj(v) for v in obj]
    if isinstance(obj, dict):
        return {k: to_json_obj(v) for k, v in obj.items()}
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):  # enums
        return obj.value
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        return format(obj, ".17g") if obj != int(obj) or abs(obj) >= 1e17 else format(obj, ".1f")
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent=2):
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    return _encode(to_json_obj(obj), indent, 0) + "\n"
